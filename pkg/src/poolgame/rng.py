"""Counter-based uniforms: every draw is a pure function of (seed, round, slot).

A round's randomness never depends on which worker simulates it or on what
was drawn before, so batch, per-round and multi-process runs agree bit for
bit.  The mixer is the SplitMix64 finalizer applied to Weyl-sequence
counters.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_SLOT_STEP = np.uint64(0xD1B54A32D192ED03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def round_keys(seed: int, rounds: np.ndarray) -> np.ndarray:
    """One 64-bit stream key per round index."""
    # 1-element arrays: numpy warns on scalar uint64 wraparound but not on arrays
    base = _mix(np.array([int(seed) & _MASK64], dtype=np.uint64) + _GOLDEN)
    r = np.atleast_1d(np.asarray(rounds, dtype=np.uint64))
    return _mix(base ^ ((r + np.uint64(1)) * _GOLDEN))


def raw(keys: np.ndarray, slots: np.ndarray | int) -> np.ndarray:
    s = np.atleast_1d(np.asarray(slots, dtype=np.uint64))
    return _mix(keys + (s + np.uint64(1)) * _SLOT_STEP)


def uniform(keys: np.ndarray, slots: np.ndarray | int) -> np.ndarray:
    """Doubles in the open interval (0, 1), 53-bit resolution."""
    bits = raw(keys, slots) >> np.uint64(11)
    return (bits.astype(np.float64) + 0.5) * 2.0**-53


def uniform_pair(keys: np.ndarray, slots: np.ndarray | int) -> tuple[np.ndarray, np.ndarray]:
    """Two 32-bit-resolution uniforms in (0, 1) from a single draw."""
    bits = raw(keys, slots)
    hi = (bits >> np.uint64(32)).astype(np.float64)
    lo = (bits & np.uint64(0xFFFFFFFF)).astype(np.float64)
    return (hi + 0.5) * 2.0**-32, (lo + 0.5) * 2.0**-32
