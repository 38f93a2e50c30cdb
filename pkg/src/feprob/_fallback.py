"""Pure numpy implementations of the hot kernels.

Mirrors ``_ckernels.pyx`` exactly: ``mc_count`` returns the same integer for
the same arguments, ``tabulate`` agrees to rounding.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB

_GOLDEN_U = np.uint64(GOLDEN)
_MUL1_U = np.uint64(_MUL1)
_MUL2_U = np.uint64(_MUL2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 2.0**-53

_BLOCK = 1 << 16


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _MUL1_U
    z = (z ^ (z >> _S27)) * _MUL2_U
    return z ^ (z >> _S31)


def uniforms(key: int, start: int, count: int) -> np.ndarray:
    """Doubles in [0, 1) for counters ``start .. start+count-1`` of stream ``key``."""
    counters = np.arange(start, start + count, dtype=np.uint64)
    z = np.uint64(key) + (counters + np.uint64(1)) * _GOLDEN_U
    return (_mix64_array(z) >> _S11).astype(np.float64) * _INV53


def mc_count(a: float, b: float, key: int, start: int, npairs: int) -> int:
    """Count pairs ``j`` in ``[start, start+npairs)`` with ``b*v_j <= a*u_j``.

    ``u_j`` and ``v_j`` are the uniforms at counters ``2j`` and ``2j+1``.
    """
    count = 0
    j = start
    stop = start + npairs
    while j < stop:
        m = min(_BLOCK, stop - j)
        u = uniforms(key, 2 * j, 2 * m)
        x = a * u[0::2]
        y = b * u[1::2]
        count += int(np.count_nonzero(y <= x))
        j += m
    return count


def _aux_tables(lam: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    # values[p, j, i] = P_i(lam[p, j]) and its derivative, built by the
    # product-rule recurrence P_i = P_{i-1} * (k*lam - i + 1) / i
    npts, dim = lam.shape
    vals = np.empty((npts, dim, k + 1))
    ders = np.empty((npts, dim, k + 1))
    vals[:, :, 0] = 1.0
    ders[:, :, 0] = 0.0
    kl = k * lam
    for i in range(1, k + 1):
        factor = (kl - (i - 1)) / i
        ders[:, :, i] = ders[:, :, i - 1] * factor + vals[:, :, i - 1] * (k / i)
        vals[:, :, i] = vals[:, :, i - 1] * factor
    return vals, ders


def tabulate(indices: np.ndarray, lam: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Values ``(P, N)`` and barycentric gradients ``(P, N, n+1)`` of all basis functions."""
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    nbasis, dim = indices.shape
    vals, ders = _aux_tables(lam, k)
    cols = np.arange(dim)
    gathered = vals[:, cols[None, :], indices]  # (P, N, dim)
    dgathered = ders[:, cols[None, :], indices]
    values = np.prod(gathered, axis=-1)
    grads = np.empty(gathered.shape)
    for l in range(dim):
        g = dgathered[:, :, l].copy()
        for j in range(dim):
            if j != l:
                g *= gathered[:, :, j]
        grads[:, :, l] = g
    return values, grads
