"""Error-estimate constants, critical mesh sizes, and their high-order asymptotics.

Everything raised to a power of ``q`` is handled in log space (``math.lgamma``
for factorials): ``(h*_q)**q`` leaves double range near ``q = 150``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .errors import DomainError, HypothesisError, ProviderError

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
# largest log value whose exp is a finite double
LOG_MAX_FLOAT = math.log(2.0**1023 * (2.0 - 2.0**-52))


@dataclass(frozen=True)
class EllipticityData:
    """Continuity constant ``M`` and ellipticity constant ``alpha`` of the bilinear form."""

    continuity: float = 1.0
    ellipticity: float = 1.0

    def __post_init__(self):
        if not (self.ellipticity > 0 and self.continuity >= self.ellipticity):
            raise DomainError(f"need M >= alpha > 0, got M={self.continuity}, alpha={self.ellipticity}")


@dataclass(frozen=True)
class DomainData:
    diameter: float
    shape_ratio: float
    lambda_max: float
    dimension: int

    def __post_init__(self):
        if self.dimension < 1:
            raise DomainError(f"dimension must be >= 1, got {self.dimension}")
        if not self.diameter > 0 or not self.lambda_max > 0:
            raise DomainError("diameter and lambda_max must be positive")
        if not self.shape_ratio >= 1:
            raise DomainError(f"shape ratio sigma must be >= 1, got {self.shape_ratio}")

    @classmethod
    def unit_square(cls) -> "DomainData":
        """Unit square with sigma = Lambda = 1 (the model problem's domain)."""
        return cls(math.sqrt(2.0), 1.0, 1.0, 2)


class SeminormProvider:
    """Source of Sobolev semi-norms ``r -> |u|_{r,Omega}``.

    Subclasses implement :meth:`log_value`; it must stay finite for every
    order they accept. Implementations are stateless and thread-safe.
    """

    label = "provider"
    #: limit of |u|_{r+1} / |u|_r when known in closed form
    ratio_limit: float | None = None

    def log_value(self, r: int) -> float:
        raise NotImplementedError

    def __call__(self, r: int) -> float:
        return math.exp(self.log_value(r))


class ModelSineProvider(SeminormProvider):
    """Semi-norms of ``sin(pi x) cos(pi y)`` on the unit square (weighted convention)."""

    label = "builtin-sine"
    ratio_limit = math.sqrt(2.0) * math.pi

    def log_value(self, r: int) -> float:
        return model_seminorm_log(r)

    def __call__(self, r: int) -> float:
        return model_seminorm(r)


@dataclass(frozen=True)
class GeometricProvider(SeminormProvider):
    """``|u|_r = c * rho**r``."""

    c: float
    rho: float

    def __post_init__(self):
        if not (self.c > 0 and self.rho > 0):
            raise DomainError("geometric provider needs c > 0 and rho > 0")

    @property
    def label(self) -> str:
        return f"geometric(c={self.c!r}, rho={self.rho!r})"

    @property
    def ratio_limit(self) -> float:
        return self.rho

    def log_value(self, r: int) -> float:
        return math.log(self.c) + r * math.log(self.rho)


@dataclass(frozen=True)
class TableProvider(SeminormProvider):
    """Tabulated semi-norms; ``values[r]`` is ``|u|_r``."""

    values: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if not values or any(not (v > 0 and math.isfinite(v)) for v in values):
            raise DomainError("table provider needs finite positive values")

    @property
    def label(self) -> str:
        return f"table({len(self.values)} orders)"

    @property
    def ratio_limit(self) -> float | None:
        # best available estimate: the last tabulated ratio
        if len(self.values) < 2:
            return None
        return self.values[-1] / self.values[-2]

    def log_value(self, r: int) -> float:
        if r < 0 or r >= len(self.values):
            raise ProviderError(
                f"table provider has no semi-norm of order {r} (tabulated orders 0..{len(self.values) - 1})",
                order=r,
            )
        return math.log(self.values[r])


@dataclass(frozen=True)
class FunctionProvider(SeminormProvider):
    """Wraps an arbitrary positive function of the order."""

    func: Callable[[int], float]
    name: str = "function"
    limit: float | None = field(default=None)

    @property
    def label(self) -> str:
        return self.name

    @property
    def ratio_limit(self) -> float | None:
        return self.limit

    def log_value(self, r: int) -> float:
        value = self.func(r)
        if not (value > 0 and math.isfinite(value)):
            raise ProviderError(f"{self.name}: non-positive or non-finite semi-norm {value!r} at order {r}", order=r)
        return math.log(value)


def provider_from_json(doc: dict | str | Path) -> SeminormProvider:
    """Build a provider from ``{"type": "geometric", "c": .., "rho": ..}`` or ``{"type": "table", "values": [..]}``.

    A string or path argument is read as a JSON file.
    """
    if not isinstance(doc, dict):
        with open(doc, encoding="utf-8") as fh:
            doc = json.load(fh)
    kind = doc.get("type") if isinstance(doc, dict) else None
    if kind == "geometric":
        return GeometricProvider(float(doc["c"]), float(doc["rho"]))
    if kind == "table":
        return TableProvider(tuple(doc["values"]))
    if kind == "builtin-sine":
        return ModelSineProvider()
    raise DomainError(f"unknown semi-norm provider type {kind!r}")


def model_seminorm_log(r: int) -> float:
    """``log((sqrt 2)**(r-2) * pi**r)``."""
    if r < 0:
        raise DomainError(f"semi-norm order must be >= 0, got {r}")
    return 0.5 * (r - 2) * math.log(2.0) + r * math.log(math.pi)


def model_seminorm(r: int) -> float:
    """``|u|_{r}`` for ``u = sin(pi x) cos(pi y)`` on the unit square; ``inf`` past double range."""
    log_value = model_seminorm_log(r)
    if log_value > LOG_MAX_FLOAT:
        return math.inf
    try:
        return math.sqrt(2.0) ** (r - 2) * math.pi**r
    except OverflowError:
        return math.exp(log_value)


def _check_hypothesis(k: int, n: int) -> None:
    if not 2 * k > n:
        raise HypothesisError(k, n)


def domain_constant(d: DomainData) -> float:
    """``1 + 2 diam + sigma n (n+1) Lambda``."""
    n = d.dimension
    return 1.0 + 2.0 * d.diameter + d.shape_ratio * n * (n + 1) * d.lambda_max


def _log_order_factor(k: int, n: int) -> float:
    # log[(k+n)^n k^(n+2) / ((k-1)! (k - n/2))]
    return n * math.log(k + n) + (n + 2) * math.log(k) - math.lgamma(k) - math.log(k - n / 2)


def ck_star(k: int, e: EllipticityData, d: DomainData) -> float:
    """Upper estimate of the error constant for P_k (underflows to 0 for large k)."""
    n = d.dimension
    _check_hypothesis(k, n)
    # exact integer ratio, rounded once
    ratio = ((k + n) ** n * k ** (n + 2) * 2) / (math.factorial(k - 1) * (2 * k - n))
    return e.continuity * domain_constant(d) / e.ellipticity * ratio


def log_ck_star(k: int, e: EllipticityData, d: DomainData) -> float:
    n = d.dimension
    _check_hypothesis(k, n)
    return (
        math.log(e.continuity)
        + math.log(domain_constant(d))
        - math.log(e.ellipticity)
        + _log_order_factor(k, n)
    )


def interpolation_bound_l2(k: int, n: int, h: float, seminorm_u: float) -> float:
    """Bound on ``|u - Pi_K u|_{0,K}``: ``[1 + (k+n)^n k^(n+1)] / (k! (k+1-n/2)) |u|_{k+1} h^(k+1)``."""
    _check_hypothesis(k, n)
    if h < 0 or seminorm_u < 0:
        raise DomainError("mesh size and semi-norm must be non-negative")
    coeff = (1 + (k + n) ** n * k ** (n + 1)) / (math.factorial(k) * (k + 1 - n / 2))
    return coeff * seminorm_u * h ** (k + 1)


def interpolation_bound_h1(k: int, n: int, h: float, sigma: float, lambda_max: float, seminorm_u: float) -> float:
    """Bound on ``|u - Pi_K u|_{1,K}``: ``[1 + sigma n(n+1) Lambda (k+n)^n k^(n+2)] / ((k-1)! (k-n/2)) |u|_{k+1} h^k``."""
    _check_hypothesis(k, n)
    if h < 0 or seminorm_u < 0:
        raise DomainError("mesh size and semi-norm must be non-negative")
    if sigma < 1 or lambda_max <= 0:
        raise DomainError("need sigma >= 1 and Lambda > 0")
    coeff = (1 + sigma * n * (n + 1) * lambda_max * (k + n) ** n * k ** (n + 2)) / (
        math.factorial(k - 1) * (k - n / 2)
    )
    return coeff * seminorm_u * h**k


def h_star(c_k: float, c_m: float, k: int, m: int) -> float:
    """Critical mesh size ``(C_k / C_m)**(1/(m-k))``."""
    if m <= k:
        raise DomainError(f"need m > k, got k={k}, m={m}")
    if not (c_k > 0 and c_m > 0):
        raise DomainError("constants C_k and C_m must be positive")
    return (c_k / c_m) ** (1.0 / (m - k))


def log_h_star_q(k: int, q: int, e: EllipticityData, d: DomainData, s: SeminormProvider) -> float:
    """``log h*_q`` with ``h*_q = (C*_k |u|_{k+1} / (C*_{k+q} |u|_{k+q+1}))**(1/q)``."""
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    numerator = log_ck_star(k, e, d) + s.log_value(k + 1)
    denominator = log_ck_star(k + q, e, d) + s.log_value(k + q + 1)
    return (numerator - denominator) / q


def h_star_q(k: int, q: int, e: EllipticityData, d: DomainData, s: SeminormProvider) -> float:
    log_value = log_h_star_q(k, q, e, d, s)
    return math.exp(log_value) if log_value <= LOG_MAX_FLOAT else math.inf


def h_star_q_direct(k: int, q: int, e: EllipticityData, d: DomainData, s: SeminormProvider) -> float:
    """Linear-domain evaluation of ``h*_q``; only valid while the constants stay in range."""
    c_k = ck_star(k, e, d) * s(k + 1)
    c_kq = ck_star(k + q, e, d) * s(k + q + 1)
    return h_star(c_k, c_kq, k, k + q)


def log_constant_ratio(k: int, n: int, q: int) -> float:
    """``log[(h*_q)^q |u|_{k+q+1} / |u|_{k+1}]``, i.e. the log of ``C*_k / C*_{k+q}`` without data factors."""
    _check_hypothesis(k, n)
    return _log_order_factor(k, n) - _log_order_factor(k + q, n)


def stirling_theta(k: int, n: int) -> float:
    """``sqrt(2 pi) (k+n)^n k^(n+2) / ((k-1)! (k-n/2))``."""
    _check_hypothesis(k, n)
    return math.sqrt(2.0 * math.pi) * (k + n) ** n * k ** (n + 2) / (math.factorial(k - 1) * (k - n / 2))


def stirling_factor(k: int, n: int, q: int) -> float:
    """``log[Theta exp(-(q+k)) (q+k)^(q+k-2n-3/2)]``, the large-``q`` equivalent of :func:`log_constant_ratio`."""
    _check_hypothesis(k, n)
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    s = q + k
    return LOG_SQRT_2PI + _log_order_factor(k, n) - s + (s - 2 * n - 1.5) * math.log(s)


def h_star_q_asymptote(q: int, l: float) -> float:
    """``q / (e l)``."""
    if not l > 0:
        raise DomainError(f"ratio limit l must be positive, got {l}")
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    return q / (math.e * l)


def seminorm_ratio_sequence(s: SeminormProvider, k: int, q_max: int) -> list[float]:
    """``|u|_{k+q+2} / |u|_{k+q+1}`` for ``q = 0..q_max``."""
    if q_max < 1:
        raise DomainError(f"q_max must be >= 1, got {q_max}")
    return [math.exp(s.log_value(k + q + 2) - s.log_value(k + q + 1)) for q in range(q_max + 1)]


@dataclass
class AsymptoticModel:
    k: int
    n: int
    ratio_limit: float
    q_values: list[int]
    log_hstar_q: list[float]
    asymptote: list[float]

    @property
    def hstar_q(self) -> list[float]:
        return [math.exp(v) if v <= LOG_MAX_FLOAT else math.inf for v in self.log_hstar_q]

    @property
    def ratio(self) -> list[float]:
        """``h*_q / (q / (e l))``, formed in log space."""
        return [math.exp(v - math.log(a)) for v, a in zip(self.log_hstar_q, self.asymptote)]


def asymptotic_model(
    k: int,
    q_values: Sequence[int],
    e: EllipticityData,
    d: DomainData,
    s: SeminormProvider,
    ratio_limit: float | None = None,
) -> AsymptoticModel:
    """Tabulate ``h*_q`` against ``q / (e l)``; ``l`` defaults to the provider's ratio limit."""
    l = ratio_limit if ratio_limit is not None else s.ratio_limit
    if l is None:
        raise DomainError(f"provider {s.label} has no known ratio limit; pass ratio_limit")
    qs = [int(q) for q in q_values]
    logs = [log_h_star_q(k, q, e, d, s) for q in qs]
    asym = [h_star_q_asymptote(q, l) for q in qs]
    return AsymptoticModel(k, d.dimension, l, qs, logs, asym)
