"""Probability that the P_m error does not exceed the P_k error, and its Monte Carlo check."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence, TextIO

from . import constants, kernels
from .constants import DomainData, EllipticityData, SeminormProvider
from .errors import DomainError


class _Infinity:
    """Marker for ``h = +infinity`` in :func:`pointwise_limit`."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"


INFINITY = _Infinity()


def _positive(name: str, value: float) -> None:
    if not (value > 0 and math.isfinite(value)):
        raise DomainError(f"{name} must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class LawParameters:
    k: int
    m: int
    c_k: float
    c_m: float

    def __post_init__(self):
        if not (1 <= self.k < self.m):
            raise DomainError(f"need 1 <= k < m, got k={self.k}, m={self.m}")
        _positive("C_k", self.c_k)
        _positive("C_m", self.c_m)

    @property
    def q(self) -> int:
        return self.m - self.k

    @property
    def h_star(self) -> float:
        return constants.h_star(self.c_k, self.c_m, self.k, self.m)

    def supports(self, h: float) -> tuple[float, float]:
        """Upper ends ``C_k h^k`` and ``C_m h^m`` of the two uniform error supports."""
        return self.c_k * h**self.k, self.c_m * h**self.m


def step_law(h: float, h_star: float) -> float:
    """1 below ``h*``, 0 above, 1/2 at ``h*``."""
    _positive("h", h)
    _positive("h_star", h_star)
    if h < h_star:
        return 1.0
    if h > h_star:
        return 0.0
    return 0.5


def sigmoid_law(h: float, h_star: float, q: int) -> float:
    """``1 - (h/h*)^q / 2`` for ``h <= h*``, ``(h*/h)^q / 2`` above."""
    _positive("h", h)
    _positive("h_star", h_star)
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    if h <= h_star:
        return 1.0 - 0.5 * (h / h_star) ** q
    return 0.5 * (h_star / h) ** q


def analytic_uniform_prob(a: float, b: float) -> float:
    """``P(Y <= X)`` for independent ``X ~ U[0, a]``, ``Y ~ U[0, b]``."""
    _positive("a", a)
    _positive("b", b)
    if b <= a:
        return 1.0 - b / (2.0 * a)
    return a / (2.0 * b)


@dataclass(frozen=True)
class MonteCarloResult:
    estimate: float
    stderr: float
    samples: int
    seed: int
    stream: int = 0
    hits: int = 0
    chunk_plan: tuple[tuple[int, int], ...] = field(default=(), compare=False)
    backend: str = field(default="", compare=False)


DEFAULT_CHUNK = 1 << 20


def chunk_plan(samples: int, chunk_size: int = DEFAULT_CHUNK) -> tuple[tuple[int, int], ...]:
    """Split pair indices ``0..samples-1`` into ``(start, count)`` chunks."""
    if chunk_size < 1:
        raise DomainError("chunk_size must be >= 1")
    return tuple((s, min(chunk_size, samples - s)) for s in range(0, samples, chunk_size))


def monte_carlo_prob(
    a: float,
    b: float,
    samples: int,
    seed: int,
    *,
    stream: int = 0,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> MonteCarloResult:
    """Estimate ``P(Y <= X)`` from ``samples`` seeded uniform pairs.

    Pair ``j`` uses counters ``2j`` and ``2j+1`` of a counter-based stream, so
    the hit count is independent of the chunk plan and of ``workers``.
    """
    _positive("a", a)
    _positive("b", b)
    if samples < 100:
        raise DomainError(f"need at least 100 samples, got {samples}")
    key = kernels.stream_key(seed, stream)
    plan = chunk_plan(samples, chunk_size)

    def run(chunk: tuple[int, int]) -> int:
        return int(kernels.mc_count(a, b, key, chunk[0], chunk[1]))

    if workers > 1 and len(plan) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(run, plan))
    else:
        hits = sum(run(c) for c in plan)
    estimate = hits / samples
    stderr = math.sqrt(estimate * (1.0 - estimate) / samples)
    return MonteCarloResult(estimate, stderr, samples, seed, stream, hits, plan, kernels.BACKEND)


def law_sequence_eval(
    k: int, q: int, h: float, e: EllipticityData, d: DomainData, s: SeminormProvider
) -> float:
    """``P_q(h)``: the sigmoid law between P_k and P_{k+q} with the estimated critical size ``h*_q``."""
    hs = constants.h_star_q(k, q, e, d, s)
    return sigmoid_law(h, hs, q)


def pointwise_limit(h) -> float:
    """Limit of ``P_q(h)`` as ``q -> infinity``: 1 for finite ``h``, 1/2 at :data:`INFINITY`."""
    if h is INFINITY:
        return 0.5
    if isinstance(h, float) and math.isinf(h):
        raise DomainError("use the INFINITY marker, not a float infinity")
    if not h > 0:
        raise DomainError(f"h must be positive, got {h!r}")
    return 1.0


def convergence_order(
    h: float,
    k: int,
    e: EllipticityData,
    d: DomainData,
    s: SeminormProvider,
    tol: float = 1e-3,
    q_max: int = 5000,
) -> int | None:
    """Smallest ``q <= q_max`` with ``|P_q(h) - 1| < tol``, or ``None``."""
    for q in range(1, q_max + 1):
        if abs(law_sequence_eval(k, q, h, e, d, s) - 1.0) < tol:
            return q
    return None


@dataclass
class ProbabilityCurve:
    h: list[float]
    p_step: list[float]
    p_sigmoid: list[float]
    p_montecarlo: list[float] | None = None
    stderr: list[float] | None = None

    @property
    def columns(self) -> list[str]:
        cols = ["h", "p_step", "p_sigmoid"]
        if self.p_montecarlo is not None:
            cols += ["p_montecarlo", "stderr"]
        return cols

    def rows(self) -> list[list[float]]:
        data = [self.h, self.p_step, self.p_sigmoid]
        if self.p_montecarlo is not None:
            data += [self.p_montecarlo, self.stderr]
        return [list(r) for r in zip(*data)]


def law_curve(
    hs: Sequence[float],
    h_star: float,
    q: int,
    params: LawParameters | None = None,
    mc_samples: int = 0,
    seed: int = 0,
) -> ProbabilityCurve:
    """Step and sigmoid laws on a grid, optionally with Monte Carlo columns.

    Monte Carlo needs ``params`` for the supports; grid point ``i`` uses
    stream ``i`` of ``seed``.
    """
    hs = [float(h) for h in hs]
    curve = ProbabilityCurve(hs, [step_law(h, h_star) for h in hs], [sigmoid_law(h, h_star, q) for h in hs])
    if mc_samples:
        if params is None:
            raise DomainError("Monte Carlo columns need law parameters")
        est, err = [], []
        for i, h in enumerate(hs):
            a, b = params.supports(h)
            r = monte_carlo_prob(a, b, mc_samples, seed, stream=i)
            est.append(r.estimate)
            err.append(r.stderr)
        curve.p_montecarlo, curve.stderr = est, err
    return curve


def format_float(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def write_csv(columns: Sequence[str], rows: Sequence[Sequence], out: TextIO) -> None:
    """RFC 4180 style CSV with LF line endings and 17 significant digits."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])


def curve_to_csv(curve: ProbabilityCurve) -> str:
    buf = io.StringIO()
    write_csv(curve.columns, curve.rows(), buf)
    return buf.getvalue()
