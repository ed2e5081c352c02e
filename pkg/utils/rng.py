# Counter-Based Coins
# ===================
# Philox4x32-10 evaluated on numpy arrays. Every edge coin is a pure function
# of (seed, trial, u, v): the counter is (u, v, trial_lo, trial_hi) and the key
# is (seed_lo, seed_hi), so any number of threads, and any visiting order,
# see the same random subgraph.

from __future__ import annotations

import numpy as np

from utils.errors import PreconditionError

PHILOX_M0 = np.uint64(0xD2511F53)
PHILOX_M1 = np.uint64(0xCD9E8D57)
PHILOX_W0 = 0x9E3779B9
PHILOX_W1 = 0xBB67AE85
PHILOX_ROUNDS = 10

MASK32 = np.uint64(0xFFFFFFFF)
SHIFT32 = np.uint64(32)


def _split64(value: int) -> tuple[int, int]:
    value &= (1 << 64) - 1
    return value & 0xFFFFFFFF, value >> 32


def philox4x32(counters: np.ndarray, key: tuple[int, int]) -> np.ndarray:
    """
    Ten Philox rounds on an (m, 4) array of 32-bit counter words.

    Args:
        counters (np.ndarray): shape (m, 4), any integer dtype, values < 2^32
        key (tuple[int, int]): two 32-bit key words

    Returns:
        np.ndarray: shape (m, 4) uint64 array of 32-bit output words
    """
    ctr = np.asarray(counters, dtype=np.uint64) & MASK32
    if ctr.ndim != 2 or ctr.shape[1] != 4:
        raise PreconditionError(f"counters must have shape (m, 4), got {ctr.shape}")
    c0, c1, c2, c3 = (ctr[:, i].copy() for i in range(4))
    k0, k1 = key[0] & 0xFFFFFFFF, key[1] & 0xFFFFFFFF
    for _ in range(PHILOX_ROUNDS):
        # 32x32 -> 64 bit products fit in uint64 without wrapping
        prod0 = c0 * PHILOX_M0
        prod1 = c2 * PHILOX_M1
        hi0, lo0 = prod0 >> SHIFT32, prod0 & MASK32
        hi1, lo1 = prod1 >> SHIFT32, prod1 & MASK32
        c0 = hi1 ^ c1 ^ np.uint64(k0)
        c1 = lo1
        c2 = hi0 ^ c3 ^ np.uint64(k1)
        c3 = lo0
        k0 = (k0 + PHILOX_W0) & 0xFFFFFFFF
        k1 = (k1 + PHILOX_W1) & 0xFFFFFFFF
    return np.stack([c0, c1, c2, c3], axis=1)


def edge_uniforms(seed: int, trial: int, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """
    Uniform doubles in [0, 1) for the edges (u[i], v[i]) of one trial.

    The first two output words give 53 random bits: (w0 >> 5) * 2^26 + (w1 >> 6).
    """
    u = np.atleast_1d(np.asarray(u, dtype=np.uint64))
    v = np.atleast_1d(np.asarray(v, dtype=np.uint64))
    trial_lo, trial_hi = _split64(trial)
    counters = np.empty((u.shape[0], 4), dtype=np.uint64)
    counters[:, 0] = u
    counters[:, 1] = v
    counters[:, 2] = trial_lo
    counters[:, 3] = trial_hi
    words = philox4x32(counters, _split64(seed))
    high = (words[:, 0] >> np.uint64(5)).astype(np.float64)
    low = (words[:, 1] >> np.uint64(6)).astype(np.float64)
    return (high * 67108864.0 + low) / 9007199254740992.0


def edges_survive(seed: int, trial: int, u: np.ndarray, v: np.ndarray, p: float) -> np.ndarray:
    """Boolean survival mask for a batch of edges; callers pass u < v."""
    if p >= 1.0:
        return np.ones(np.atleast_1d(u).shape[0], dtype=bool)
    if p <= 0.0:
        return np.zeros(np.atleast_1d(u).shape[0], dtype=bool)
    return edge_uniforms(seed, trial, u, v) < p


def edge_survives(seed: int, trial: int, u: int, v: int, p: float) -> bool:
    """Whether edge {u, v} of trial ``trial`` is kept in the random subgraph."""
    if not u < v:
        raise PreconditionError(f"edge coins take u < v, got ({u}, {v})")
    if not 0.0 <= p <= 1.0:
        raise PreconditionError(f"p must lie in [0, 1], got {p}")
    return bool(edges_survive(seed, trial, np.array([u]), np.array([v]), p)[0])
