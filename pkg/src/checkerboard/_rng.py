"""Counter-based uniforms keyed by (seed, sample, vertex).

Every random choice is a pure function of its key, so a sample can be
regenerated vertex by vertex, in any order, on any worker.  The mixer is the
SplitMix64 finaliser.
"""

import numpy as np

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_S30, _S27, _S31, _S32, _S11 = (np.uint64(s) for s in (30, 27, 31, 32, 11))
_LOW32 = np.int64(0xFFFFFFFF)


def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def vertex_key(diagonal, k):
    """Pack a (diagonal, index) pair into one 64-bit word."""
    d = np.asarray(diagonal, dtype=np.int64) & _LOW32
    k = np.asarray(k, dtype=np.int64) & _LOW32
    return ((d << np.int64(32)) | k).view(np.uint64)


def uniforms(seed: int, sample, diagonal, k) -> np.ndarray:
    """Uniforms in [0, 1) for the Z'^2 vertices (diagonal, k) of ``sample``.

    Arguments broadcast against each other.
    """
    with np.errstate(over="ignore"):
        s = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        base = _mix(np.asarray(s + _GOLDEN, dtype=np.uint64))
        smp = np.asarray(sample, dtype=np.int64).view(np.uint64)
        h = _mix(base ^ _mix(smp * _GOLDEN + _GOLDEN))
        h = _mix(h ^ vertex_key(diagonal, k))
    return (h >> _S11).astype(np.float64) * (1.0 / 9007199254740992.0)
