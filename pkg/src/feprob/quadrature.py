"""Simplex geometry, quadrature, and semi-norms of the P_k basis on a simplex."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from pathlib import Path

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from . import basis
from .errors import CapabilityError, GeometryError, UsageError

MAX_DIM = 3
MAX_DEGREE = 30
DEGENERACY_TOL = 1e-14
EXACTNESS_TOL = 1e-12


@dataclass(frozen=True)
class SimplexGeometry:
    vertices: np.ndarray
    measure: float
    diameter: float
    inscribed_diameter: float
    bary_gradients: np.ndarray  # (n+1, n), row l is grad(lambda_l)

    @property
    def n(self) -> int:
        return self.vertices.shape[1]

    @property
    def lambda_max(self) -> float:
        return float(np.abs(self.bary_gradients).max())

    @property
    def shape_ratio(self) -> float:
        """``h_K / rho_K``."""
        return self.diameter / self.inscribed_diameter

    def to_cartesian(self, lambdas: np.ndarray) -> np.ndarray:
        return np.asarray(lambdas) @ self.vertices


def _facet_measure(points: np.ndarray) -> float:
    # (m-1)-dimensional measure of the simplex spanned by m points, via the Gram determinant
    m = len(points)
    if m == 1:
        return 1.0
    edges = points[1:] - points[0]
    gram = edges @ edges.T
    return math.sqrt(max(np.linalg.det(gram), 0.0)) / math.factorial(m - 1)


def simplex_geometry(vertices) -> SimplexGeometry:
    """Geometric data of the simplex with the given ``n+1`` vertices in R^n."""
    v = np.array(vertices, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] != v.shape[1] + 1:
        raise GeometryError(f"need n+1 vertices in R^n, got array of shape {v.shape}")
    n = v.shape[1]
    if not 1 <= n <= MAX_DIM:
        raise GeometryError(f"dimension must be in 1..{MAX_DIM}, got {n}")
    if not np.all(np.isfinite(v)):
        raise GeometryError("vertices must be finite")
    edges = v[1:] - v[0]
    measure = abs(np.linalg.det(edges)) / math.factorial(n)
    diameter = max(float(np.linalg.norm(p - q)) for p, q in combinations(v, 2))
    if diameter == 0.0 or measure < DEGENERACY_TOL * diameter**n:
        raise GeometryError(f"degenerate simplex (measure {measure:.3e}, diameter {diameter:.3e})")
    if n == 1:
        # the inscribed "sphere" of a segment is the segment itself
        inscribed = diameter
    else:
        surface = sum(_facet_measure(np.delete(v, m, axis=0)) for m in range(n + 1))
        inscribed = 2.0 * n * measure / surface
    # lambda_l(x) = c_l . x + d_l with lambda_l(v_m) = delta_lm
    system = np.hstack([v, np.ones((n + 1, 1))])
    coeffs = np.linalg.inv(system)
    grads = coeffs[:n, :].T.copy()
    v.setflags(write=False)
    grads.setflags(write=False)
    return SimplexGeometry(v, float(measure), diameter, float(inscribed), grads)


def reference_simplex(n: int) -> SimplexGeometry:
    """The unit simplex with vertices 0, e_1, ..., e_n."""
    return simplex_geometry(np.vstack([np.zeros(n), np.eye(n)]))


def load_vertices(path: str | Path) -> np.ndarray:
    """Read ``{"vertices": [[x, y, ...], ...]}``."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "vertices" not in doc:
        raise UsageError(f"{path}: expected an object with a 'vertices' key")
    try:
        return np.array(doc["vertices"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{path}: malformed vertices ({exc})") from exc


@dataclass(frozen=True)
class QuadratureRule:
    """Rule on the reference simplex; weights sum to 1 (normalized measure)."""

    nodes: np.ndarray  # (Q, n+1) barycentric coordinates
    weights: np.ndarray
    exact_degree: int

    @property
    def n(self) -> int:
        return self.nodes.shape[1] - 1

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Mean of ``values`` (leading axis = nodes) over the simplex."""
        return np.tensordot(self.weights, values, axes=(0, 0))


def _gauss_jacobi01(m: int, alpha: int) -> tuple[np.ndarray, np.ndarray]:
    # nodes/weights on [0,1] for the weight (1-u)^alpha
    if alpha == 0:
        t, w = leggauss(m)
    else:
        t, w = roots_jacobi(m, alpha, 0)
    return (t + 1.0) / 2.0, w / 2.0 ** (alpha + 1)


def _collapsed_rule(n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    # Duffy collapse x_1 = u_1, x_2 = (1-u_1) u_2, x_3 = (1-u_1)(1-u_2) u_3;
    # the Jacobian (1-u_1)^{n-1} (1-u_2)^{n-2} ... is absorbed in Gauss-Jacobi weights
    rules = [_gauss_jacobi01(m, n - 1 - d) for d in range(n)]
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wgrids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    u = np.stack([g.ravel() for g in grids], axis=1)
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    x = np.empty_like(u)
    remaining = np.ones(len(u))
    for d in range(n):
        x[:, d] = remaining * u[:, d]
        remaining = remaining * (1.0 - u[:, d])
    lambdas = np.hstack([1.0 - x.sum(axis=1, keepdims=True), x])
    return lambdas, w * math.factorial(n)


def monomial_exponents(n: int, degree: int) -> np.ndarray:
    """Exponents of all monomials in ``n`` variables with total degree <= ``degree``."""
    rows = [e for d in range(degree + 1) for e in basis._compositions(d, n)]
    return np.array(rows, dtype=np.int64)


def exact_monomial_means(n: int, exponents: np.ndarray) -> np.ndarray:
    """Exact mean of ``prod lambda_j**a_j`` over the simplex: ``n! prod a_j! / (n + |a|)!``."""
    out = np.empty(len(exponents))
    for r, a in enumerate(exponents):
        num = math.factorial(n) * math.prod(math.factorial(int(x)) for x in a)
        out[r] = num / math.factorial(n + int(a.sum()))
    return out


def _monomial_means(rule_nodes: np.ndarray, weights: np.ndarray, exps: np.ndarray, chunk: int = 256) -> np.ndarray:
    # monomials in the trailing n barycentric coordinates (the Cartesian coordinates on the unit simplex)
    coords = rule_nodes[:, 1:]
    degree = int(exps.max()) if exps.size else 0
    powers = coords[:, :, None] ** np.arange(degree + 1)
    cols = np.arange(coords.shape[1])
    out = np.empty(len(exps))
    for start in range(0, len(exps), chunk):
        e = exps[start:start + chunk]
        vals = np.prod(powers[:, cols[None, :], e], axis=2)
        out[start:start + chunk] = weights @ vals
    return out


@lru_cache(maxsize=None)
def quadrature_rule(n: int, degree: int) -> QuadratureRule:
    """Rule exact for total degree ``degree``: Gauss-Legendre (n=1), collapsed Gauss-Jacobi products (n=2,3)."""
    if n not in (1, 2, 3) or not 1 <= degree <= MAX_DEGREE:
        raise CapabilityError(
            f"unsupported quadrature (n={n}, degree={degree}); supported: n in 1..{MAX_DIM}, degree in 1..{MAX_DEGREE}"
        )
    m = degree // 2 + 1
    nodes, weights = _collapsed_rule(n, m)
    exps = monomial_exponents(n, degree)
    approx = _monomial_means(nodes, weights, exps)
    exact = exact_monomial_means(n, exps)
    err = np.abs(approx - exact) / np.maximum(exact, 1e-300)
    if err.max() > EXACTNESS_TOL or abs(weights.sum() - 1.0) > EXACTNESS_TOL:
        raise CapabilityError(f"quadrature (n={n}, degree={degree}) failed exactness validation: {err.max():.2e}")
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights, degree)


def _resolve(index, K: SimplexGeometry) -> basis.MultiIndex:
    if not isinstance(index, basis.MultiIndex):
        index = basis.MultiIndex.of(index)
    if index.n != K.n:
        raise UsageError(f"index is for n={index.n} but simplex has n={K.n}")
    return index


def _default_degree(k: int) -> int:
    return 2 * k + 2


def _tabulate_on(K: SimplexGeometry, k: int, degree: int | None):
    rule = quadrature_rule(K.n, degree or _default_degree(k))
    values, grads = basis.tabulate(K.n, k, rule.nodes)
    # cartesian gradient: d p/d x^j = sum_l Lambda^(l)_j d p/d lambda_l
    cart = grads @ K.bary_gradients
    return rule, values, cart


def seminorm_l2(index, K: SimplexGeometry, degree: int | None = None) -> float:
    """``(int_K p_i^2 dx)^(1/2)``."""
    index = _resolve(index, K)
    rule = quadrature_rule(K.n, degree or _default_degree(index.k))
    values, _ = basis.tabulate(K.n, index.k, rule.nodes)
    col = basis.multi_indices(K.n, index.k).index(index.entries)
    return math.sqrt(K.measure * float(rule.integrate(values[:, col] ** 2)))


def seminorm_h1(index, K: SimplexGeometry, degree: int | None = None) -> float:
    """``(sum_j int_K (d p_i / d x^j)^2 dx)^(1/2)``."""
    index = _resolve(index, K)
    rule, _, cart = _tabulate_on(K, index.k, degree)
    col = basis.multi_indices(K.n, index.k).index(index.entries)
    return math.sqrt(K.measure * float(rule.integrate((cart[:, col, :] ** 2).sum(axis=1))))


def all_seminorms(n: int, k: int, K: SimplexGeometry, degree: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """L2 and H1 semi-norms of every basis function, in lattice order."""
    if K.n != n:
        raise UsageError(f"simplex has n={K.n}, expected {n}")
    rule, values, cart = _tabulate_on(K, k, degree)
    l2 = np.sqrt(K.measure * rule.integrate(values**2))
    h1 = np.sqrt(K.measure * rule.integrate((cart**2).sum(axis=2)))
    return l2, h1


@dataclass
class SeminormSums:
    n: int
    k: int
    sum_l2: float
    sum_h1: float
    bound_l2: float
    bound_h1: float
    l2: np.ndarray
    h1: np.ndarray

    @property
    def in_hypothesis(self) -> bool:
        """Whether ``k > n/2``; the H1 bound is only claimed under it."""
        return 2 * self.k > self.n

    @property
    def l2_pass(self) -> bool:
        return self.sum_l2 <= self.bound_l2

    @property
    def h1_pass(self) -> bool:
        return self.sum_h1 <= self.bound_h1

    @property
    def passed(self) -> bool:
        return self.l2_pass and self.h1_pass

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "sum_l2": self.sum_l2,
            "sum_h1": self.sum_h1,
            "bound_l2": self.bound_l2,
            "bound_h1": self.bound_h1,
            "l2_pass": self.l2_pass,
            "h1_pass": self.h1_pass,
            "in_hypothesis": self.in_hypothesis,
            "pass": self.passed,
        }


def seminorm_bounds(n: int, k: int, K: SimplexGeometry) -> tuple[float, float]:
    """``sqrt(mes K) (k+n)^n k^(n+1)`` and ``sqrt(mes K) n(n+1) Lambda / rho_K (k+n)^n k^(n+2)``."""
    root = math.sqrt(K.measure)
    common = (k + n) ** n
    bound_l2 = root * common * k ** (n + 1)
    bound_h1 = root * n * (n + 1) * K.lambda_max / K.inscribed_diameter * common * k ** (n + 2)
    return bound_l2, bound_h1


def seminorm_sums(n: int, k: int, K: SimplexGeometry, degree: int | None = None) -> SeminormSums:
    l2, h1 = all_seminorms(n, k, K, degree)
    bound_l2, bound_h1 = seminorm_bounds(n, k, K)
    return SeminormSums(n, k, float(l2.sum()), float(h1.sum()), bound_l2, bound_h1, l2, h1)
