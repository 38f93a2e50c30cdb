"""Canonical P_k Lagrange basis on the reference n-simplex.

Basis functions are indexed by multi-indices ``(i_1, ..., i_{n+1})`` with
``sum(i_j) == k`` and written in barycentric coordinates as products of the
one-dimensional auxiliary polynomials

    P_i(lam) = prod_{c=1..i} (k*lam - c + 1) / c,   P_0 = 1.

Scalar functions accept floats or :class:`fractions.Fraction`; with
Fractions the arithmetic is exact, which makes the Kronecker property at
lattice nodes an exact identity. Batched evaluation goes through
:func:`tabulate`, backed by :mod:`feprob.kernels`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from . import kernels
from .errors import DomainError, RangeError, UsageError

Number = Union[float, Fraction, int]

# counts are used to size int64-indexed arrays
MAX_COUNT = 2**63 - 1
BARYCENTRIC_TOL = 1e-12


@dataclass(frozen=True)
class MultiIndex:
    """Multi-index identifying one basis function and its lattice node."""

    entries: tuple[int, ...]
    k: int

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if len(entries) < 2:
            raise DomainError("a multi-index needs n+1 >= 2 entries")
        if self.k < 1:
            raise DomainError(f"order k must be >= 1, got {self.k}")
        if any(e < 0 or e > self.k for e in entries):
            raise DomainError(f"entries must lie in [0, {self.k}]: {entries}")
        if sum(entries) != self.k:
            raise DomainError(f"entries {entries} do not sum to k={self.k}")

    @classmethod
    def of(cls, entries: Sequence[int]) -> "MultiIndex":
        return cls(tuple(entries), sum(entries))

    @property
    def n(self) -> int:
        return len(self.entries) - 1


@dataclass(frozen=True)
class BarycentricPoint:
    lambdas: tuple

    def __post_init__(self):
        lambdas = tuple(self.lambdas)
        object.__setattr__(self, "lambdas", lambdas)
        if len(lambdas) < 2:
            raise DomainError("a barycentric point needs n+1 >= 2 coordinates")
        total = sum(lambdas)
        if abs(total - 1) > BARYCENTRIC_TOL:
            raise DomainError(f"barycentric coordinates sum to {float(total)!r}, not 1")

    @property
    def n(self) -> int:
        return len(self.lambdas) - 1

    @property
    def inside(self) -> bool:
        return all(0 <= lam <= 1 for lam in self.lambdas)

    def as_float(self) -> np.ndarray:
        return np.array([float(lam) for lam in self.lambdas])


@dataclass(frozen=True)
class LatticeNode:
    index: MultiIndex
    point: BarycentricPoint


def _check_order(n: int, k: int) -> None:
    if n < 1:
        raise DomainError(f"space dimension n must be >= 1, got {n}")
    if k < 1:
        raise DomainError(f"polynomial order k must be >= 1, got {k}")


def pk_dimension(n: int, k: int) -> int:
    """Dimension ``binomial(n+k, n)`` of P_k on an n-simplex."""
    _check_order(n, k)
    count = math.comb(n + k, n)
    if count > MAX_COUNT:
        raise RangeError(f"dim P_k for n={n}, k={k} exceeds the int64 count range")
    return count


def _compositions(total: int, parts: int):
    # descending lexicographic order
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def multi_indices(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    """All multi-indices of order k in n+1 entries, descending lexicographic."""
    pk_dimension(n, k)
    return tuple(_compositions(k, n + 1))


def lattice_points(n: int, k: int) -> list[LatticeNode]:
    """Equispaced lattice nodes with exact rational coordinates ``i_j / k``."""
    return [
        LatticeNode(MultiIndex(idx, k), BarycentricPoint(tuple(Fraction(i, k) for i in idx)))
        for idx in multi_indices(n, k)
    ]


def index_array(n: int, k: int) -> np.ndarray:
    """Multi-indices as an ``(N, n+1)`` int64 array, in lattice order."""
    return np.array(multi_indices(n, k), dtype=np.int64)


def node_array(n: int, k: int) -> np.ndarray:
    """Lattice node barycentric coordinates as an ``(N, n+1)`` float array."""
    return index_array(n, k) / k


def _check_aux(i: int, k: int) -> None:
    if k < 1:
        raise DomainError(f"basis order k must be >= 1, got {k}")
    if i < 0 or i > k:
        raise DomainError(f"auxiliary polynomial order must lie in [0, {k}], got {i}")


def _one(lam: Number) -> Number:
    return Fraction(1) if isinstance(lam, Fraction) else 1.0


def aux_poly_eval(i: int, k: int, lam: Number) -> Number:
    """Auxiliary polynomial ``P_i(lam)``; exact when ``lam`` is a Fraction."""
    _check_aux(i, k)
    result = _one(lam)
    for c in range(1, i + 1):
        result *= (k * lam - (c - 1)) / c
    return result


def aux_poly_derivative(i: int, k: int, lam: Number) -> Number:
    """Derivative of ``P_i`` as the product-rule sum over its linear factors."""
    _check_aux(i, k)
    one = _one(lam)
    total = 0 * one
    for c in range(1, i + 1):
        term = k * one / c
        for d in range(1, i + 1):
            if d != c:
                term *= (k * lam - (d - 1)) / d
        total += term
    return total


def _coerce(index: MultiIndex | Sequence[int], point: BarycentricPoint | Sequence[Number]):
    if not isinstance(index, MultiIndex):
        index = MultiIndex.of(index)
    if not isinstance(point, BarycentricPoint):
        point = BarycentricPoint(tuple(point))
    if len(index.entries) != len(point.lambdas):
        raise UsageError(
            f"index has {len(index.entries)} entries but point has {len(point.lambdas)} coordinates"
        )
    return index, point


def basis_eval(index: MultiIndex | Sequence[int], point: BarycentricPoint | Sequence[Number]) -> Number:
    """Value of the basis function ``p_index`` at a barycentric point."""
    index, point = _coerce(index, point)
    result = _one(point.lambdas[0])
    for i, lam in zip(index.entries, point.lambdas):
        result *= aux_poly_eval(i, index.k, lam)
    return result


def basis_gradient_barycentric(
    index: MultiIndex | Sequence[int], point: BarycentricPoint | Sequence[Number]
) -> list[Number]:
    """Partials ``d p / d lam_l`` with the coordinates treated as independent."""
    index, point = _coerce(index, point)
    k = index.k
    factors = [aux_poly_eval(i, k, lam) for i, lam in zip(index.entries, point.lambdas)]
    grad = []
    for l, (i, lam) in enumerate(zip(index.entries, point.lambdas)):
        g = aux_poly_derivative(i, k, lam)
        for j, f in enumerate(factors):
            if j != l:
                g *= f
        grad.append(g)
    return grad


def _order_from_count(n: int, count: int) -> int:
    k = 1
    while True:
        N = math.comb(n + k, n)
        if N == count:
            return k
        if N > count:
            raise UsageError(f"{count} values do not match dim P_k for any k with n={n}")
        k += 1


def interpolate(values: Sequence[Number], point: BarycentricPoint | Sequence[Number], k: int | None = None) -> Number:
    """Evaluate ``sum_i values[i] * p_i(point)``; ``values`` follow lattice order."""
    if not isinstance(point, BarycentricPoint):
        point = BarycentricPoint(tuple(point))
    n = point.n
    if k is None:
        k = _order_from_count(n, len(values))
    elif len(values) != pk_dimension(n, k):
        raise UsageError(f"expected {pk_dimension(n, k)} nodal values, got {len(values)}")
    return sum(v * basis_eval(MultiIndex(idx, k), point) for v, idx in zip(values, multi_indices(n, k)))


def tabulate(n: int, k: int, lambdas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All basis values ``(P, N)`` and barycentric gradients ``(P, N, n+1)`` at points."""
    lambdas = np.atleast_2d(np.asarray(lambdas, dtype=np.float64))
    if lambdas.shape[1] != n + 1:
        raise UsageError(f"points must have n+1={n + 1} coordinates, got {lambdas.shape[1]}")
    return kernels.tabulate(index_array(n, k), lambdas, k)


def lagrange_numerator_product(npoints: int, a: float, b: float, x):
    """``prod_{j=0..Np} (x - x_j)`` for the equispaced nodes ``x_j = a + j*(b-a)/Np``.

    ``x`` may be a scalar or an array; every value must lie in ``[a, b]``.
    """
    if npoints < 1:
        raise DomainError(f"Np must be >= 1, got {npoints}")
    if not a < b:
        raise DomainError(f"need a < b, got a={a}, b={b}")
    xs = np.asarray(x, dtype=np.float64)
    if np.any(xs < a) or np.any(xs > b):
        raise DomainError(f"x must lie in [{a}, {b}]")
    h = (b - a) / npoints
    result = np.ones_like(xs)
    for j in range(npoints + 1):
        result = result * (xs - (a + j * h))
    return float(result) if result.ndim == 0 else result


def lagrange_numerator_bound(npoints: int, a: float, b: float) -> float:
    """``(Np+1)! * h**(Np+1)``."""
    h = (b - a) / npoints
    return math.factorial(npoints + 1) * h ** (npoints + 1)


def sample_simplex(n: int, samples: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform points on the n-simplex as ``(samples, n+1)`` barycentric rows.

    Normalized i.i.d. exponentials, i.e. Dirichlet(1, ..., 1).
    """
    e = rng.standard_exponential((samples, n + 1))
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class LocalBoundsReport:
    n: int
    k: int
    samples: int
    seed: int
    max_value: float
    max_gradient: float
    value_bound: float
    gradient_bound: float
    value_violations: int
    gradient_violations: int

    @property
    def value_pass(self) -> bool:
        return self.value_violations == 0

    @property
    def gradient_pass(self) -> bool:
        return self.gradient_violations == 0

    @property
    def passed(self) -> bool:
        return self.value_pass and self.gradient_pass

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "samples": self.samples,
            "seed": self.seed,
            "max_abs_value": self.max_value,
            "max_abs_gradient": self.max_gradient,
            "value_bound": self.value_bound,
            "gradient_bound": self.gradient_bound,
            "value_violations": self.value_violations,
            "gradient_violations": self.gradient_violations,
            "value_pass": self.value_pass,
            "gradient_pass": self.gradient_pass,
            "pass": self.passed,
        }


def verify_local_bounds(n: int, k: int, samples: int, seed: int = 0, chunk: int = 4096) -> LocalBoundsReport:
    """Check ``|p_i| <= k**(n+1)`` and ``|dp_i/dlam_l| <= k**(n+2)`` empirically.

    The sample set is ``samples`` uniform simplex points followed by every
    lattice node, so maxima attained at nodes are always seen.
    """
    if samples < 1:
        raise DomainError(f"samples must be >= 1, got {samples}")
    pk_dimension(n, k)
    rng = np.random.default_rng(seed)
    points = np.vstack([sample_simplex(n, samples, rng), node_array(n, k)])
    vbound = float(k ** (n + 1))
    gbound = float(k ** (n + 2))
    vmax = gmax = 0.0
    vbad = gbad = 0
    for start in range(0, len(points), chunk):
        values, grads = tabulate(n, k, points[start:start + chunk])
        av = np.abs(values)
        ag = np.abs(grads)
        vmax = max(vmax, float(av.max()))
        gmax = max(gmax, float(ag.max()))
        vbad += int(np.count_nonzero(av > vbound))
        gbad += int(np.count_nonzero(ag > gbound))
    return LocalBoundsReport(n, k, samples, seed, vmax, gmax, vbound, gbound, vbad, gbad)
