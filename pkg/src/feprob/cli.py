"""Command-line front end.

Exit codes: 0 success (all checks pass), 1 a verified bound failed,
2 usage error, 3 numeric-domain error, 4 internal error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from . import basis, constants, laws, quadrature
from .errors import DomainError, UsageError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_INTERNAL = 4


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    laws.write_csv(columns, rows, buf)
    return buf.getvalue()


def _json(obj: Any) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _json_float(x: float) -> float | str:
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _require(args, *names: str) -> None:
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"{args.command}: missing required option(s) {flags}")


def _check_order_flags(args) -> None:
    if args.n is not None and args.n < 1:
        raise UsageError("--n must be >= 1")
    if args.k is not None and args.k < 1:
        raise UsageError("--k must be >= 1")


def cmd_basis(args) -> int:
    _require(args, "n", "k")
    _check_order_flags(args)
    if (args.eval is None) == (not args.nodes):
        raise UsageError("basis: give exactly one of --eval or --nodes")
    n, k = args.n, args.k
    indices = basis.multi_indices(n, k)
    if args.eval is not None:
        try:
            lam = tuple(float(t) for t in args.eval.split(","))
        except ValueError as exc:
            raise UsageError(f"malformed barycentric list {args.eval!r}") from exc
        if len(lam) != n + 1:
            raise UsageError(f"--eval needs n+1={n + 1} coordinates, got {len(lam)}")
        point = basis.BarycentricPoint(lam)
        values = [float(basis.basis_eval(basis.MultiIndex(idx, k), point)) for idx in indices]
        if args.format == "csv":
            cols = ["i"] + [f"i_{j + 1}" for j in range(n + 1)] + ["value"]
            rows = [[i, *idx, v] for i, (idx, v) in enumerate(zip(indices, values))]
            _emit(_csv(cols, rows), args.output)
        else:
            _emit(_json({"n": n, "k": k, "point": list(lam), "indices": [list(i) for i in indices], "values": values}), args.output)
        return EXIT_OK

    nodes = basis.lattice_points(n, k)
    exact = all(
        basis.basis_eval(a.index, b.point) == (1 if a is b else 0) for a in nodes for b in nodes
    )
    values, _ = basis.tabulate(n, k, basis.node_array(n, k))
    float_err = float(np.abs(values - np.eye(len(nodes))).max())
    summary = {"nodes": len(nodes), "dimension": basis.pk_dimension(n, k), "kronecker_exact": exact, "kronecker_max_float_error": float_err}
    if args.format == "csv":
        cols = ["i"] + [f"i_{j + 1}" for j in range(n + 1)] + [f"lambda_{j + 1}" for j in range(n + 1)]
        rows = [[i, *node.index.entries, *(float(x) for x in node.point.lambdas)] for i, node in enumerate(nodes)]
        _emit(_csv(cols, rows), args.output)
        print(f"kronecker: exact={exact} max_float_error={float_err:.3e}", file=sys.stderr)
    else:
        _emit(_json({
            "n": n,
            "k": k,
            "nodes": [
                {"i": i, "index": list(node.index.entries), "lambdas": [str(Fraction(x)) for x in node.point.lambdas]}
                for i, node in enumerate(nodes)
            ],
            "summary": summary,
        }), args.output)
    return EXIT_OK if exact else EXIT_CHECK_FAILED


def lagrange_numerator_checks(np_max: int, grid: int, a: float = 0.0, b: float = 1.0) -> list[dict]:
    xs = np.linspace(a, b, grid)
    out = []
    for npoints in range(1, np_max + 1):
        m = float(np.abs(basis.lagrange_numerator_product(npoints, a, b, xs)).max())
        bound = basis.lagrange_numerator_bound(npoints, a, b)
        out.append({"np": npoints, "max_abs": m, "bound": bound, "pass": m <= bound})
    return out


def cmd_bounds(args) -> int:
    _require(args, "n", "k")
    _check_order_flags(args)
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    if args.np_max < 1 or args.grid < 2:
        raise UsageError("--np-max must be >= 1 and --grid >= 2")
    report = basis.verify_local_bounds(args.n, args.k, args.samples, args.seed)
    pi_checks = lagrange_numerator_checks(args.np_max, args.grid)
    passed = report.passed and all(c["pass"] for c in pi_checks)
    if args.format == "csv":
        rows = [
            ["max_abs_value", report.max_value, report.value_bound, report.value_pass],
            ["max_abs_gradient", report.max_gradient, report.gradient_bound, report.gradient_pass],
        ] + [[f"lagrange_numerator_np{c['np']}", c["max_abs"], c["bound"], c["pass"]] for c in pi_checks]
        _emit(_csv(["check", "value", "bound", "pass"], rows), args.output)
    else:
        _emit(_json({"local": report.as_dict(), "lagrange_numerator": pi_checks, "pass": passed}), args.output)
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_seminorms(args) -> int:
    _require(args, "k")
    _check_order_flags(args)
    if args.vertices:
        try:
            vertices = quadrature.load_vertices(args.vertices)
        except OSError as exc:
            raise UsageError(f"cannot read vertices file {args.vertices!r}: {exc}") from exc
        except ValueError as exc:
            if isinstance(exc, UsageError):
                raise
            raise UsageError(f"malformed vertices file {args.vertices!r}: {exc}") from exc
        K = quadrature.simplex_geometry(vertices)
        if args.n is not None and args.n != K.n:
            raise UsageError(f"--n {args.n} does not match the {K.n}-simplex in {args.vertices}")
    else:
        _require(args, "n")
        K = quadrature.reference_simplex(args.n)
    n = K.n
    sums = quadrature.seminorm_sums(n, args.k, K, args.degree)
    rows = [[i, float(a), float(b)] for i, (a, b) in enumerate(zip(sums.l2, sums.h1))]
    summary = sums.as_dict()
    summary.update(measure=K.measure, diameter=K.diameter, inscribed_diameter=K.inscribed_diameter, lambda_max=K.lambda_max)
    if args.format == "csv":
        _emit(_csv(["i", "l2", "h1"], rows), args.output)
        print(
            f"sum_l2={sums.sum_l2:.17g} <= {sums.bound_l2:.17g} ({'pass' if sums.l2_pass else 'FAIL'}); "
            f"sum_h1={sums.sum_h1:.17g} <= {sums.bound_h1:.17g} ({'pass' if sums.h1_pass else 'FAIL'}); "
            f"k > n/2: {sums.in_hypothesis}",
            file=sys.stderr,
        )
    else:
        _emit(_json({"rows": [{"i": i, "l2": a, "h1": b} for i, a, b in rows], "summary": summary}), args.output)
    return EXIT_OK if sums.passed else EXIT_CHECK_FAILED


def _provider(source: str) -> constants.SeminormProvider:
    if source == "builtin-sine":
        return constants.ModelSineProvider()
    try:
        return constants.provider_from_json(source)
    except OSError as exc:
        raise UsageError(f"cannot read provider file {source!r}: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise UsageError(f"malformed provider file {source!r}: {exc}") from exc


def cmd_hstar(args) -> int:
    _require(args, "k", "q_max")
    if args.q_max < 1:
        raise UsageError("--q-max must be >= 1")
    if args.k < 1 or args.n < 1:
        raise UsageError("--k and --n must be >= 1")
    e = constants.EllipticityData(args.M, args.alpha)
    d = constants.DomainData(args.diam, args.sigma, args.lambda_max, args.n)
    s = _provider(args.model)
    model = constants.asymptotic_model(args.k, range(1, args.q_max + 1), e, d, s, args.ratio_limit)
    rows = [
        [q, lv, hv, a, r]
        for q, lv, hv, a, r in zip(model.q_values, model.log_hstar_q, model.hstar_q, model.asymptote, model.ratio)
    ]
    cols = ["q", "log_hstar_q", "hstar_q", "asymptote", "ratio"]
    if args.format == "csv":
        _emit(_csv(cols, rows), args.output)
    else:
        _emit(_json({
            "k": args.k,
            "n": args.n,
            "provider": s.label,
            "ratio_limit": model.ratio_limit,
            "rows": [dict(zip(cols, [r[0]] + [_json_float(v) for v in r[1:]])) for r in rows],
        }), args.output)
    return EXIT_OK


def _law_setup(args) -> tuple[float, int, laws.LawParameters | None]:
    consts = [args.ck, args.cm, args.k, args.m]
    params = None
    if any(v is not None for v in consts):
        if any(v is None for v in consts):
            raise UsageError("--ck, --cm, --k and --m must be given together")
        params = laws.LawParameters(args.k, args.m, args.ck, args.cm)
        hs, q = params.h_star, params.q
        if args.hstar is not None and abs(args.hstar - hs) > 1e-12 * hs:
            raise UsageError(f"--hstar {args.hstar} disagrees with (C_k/C_m)^(1/(m-k)) = {hs!r}")
        if args.q is not None and args.q != q:
            raise UsageError(f"--q {args.q} disagrees with m-k = {q}")
        return hs, q, params
    if args.montecarlo:
        raise UsageError("--montecarlo needs --ck, --cm, --k and --m")
    _require(args, "hstar", "q")
    if not args.hstar > 0:
        raise UsageError("--hstar must be positive")
    if args.q < 1:
        raise UsageError("--q must be >= 1")
    return args.hstar, args.q, None


def h_grid(h_min: float, h_max: float, steps: int, spacing: str = "linear") -> list[float]:
    if spacing == "log":
        return [float(h) for h in np.geomspace(h_min, h_max, steps)]
    return [float(h) for h in np.linspace(h_min, h_max, steps)]


def cmd_laws(args) -> int:
    _require(args, "h_min", "h_max", "steps")
    if not args.h_min > 0:
        raise UsageError("--h-min must be positive")
    if args.h_max < args.h_min:
        raise UsageError("--h-max must be >= --h-min")
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    if args.montecarlo and args.montecarlo < 100:
        raise UsageError("--montecarlo needs at least 100 samples")
    hs, q, params = _law_setup(args)
    grid = h_grid(args.h_min, args.h_max, args.steps, args.spacing)
    if args.include_hstar and args.h_min <= hs <= args.h_max and hs not in grid:
        grid = sorted(grid + [hs])
    curve = laws.law_curve(grid, hs, q, params, args.montecarlo or 0, args.seed)
    if args.format == "csv":
        _emit(laws.curve_to_csv(curve), args.output)
    else:
        _emit(_json({
            "hstar": hs,
            "q": q,
            "seed": args.seed,
            "rows": [dict(zip(curve.columns, r)) for r in curve.rows()],
        }), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="feprob", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, fmt: str) -> None:
        p.add_argument("--format", choices=("csv", "json"), default=fmt)
        p.add_argument("--output", "-o", default=None, help="output file (default: stdout)")
        p.add_argument("--config", default=None, help="JSON file supplying flag values")

    p = sub.add_parser("basis", help="evaluate the P_k basis or list its lattice nodes")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--eval", default=None, metavar="L1,L2,...", help="barycentric point")
    p.add_argument("--nodes", action="store_true")
    common(p, "json")
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("bounds", help="verify the pointwise basis bounds and the node-product bound")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--np-max", type=int, default=10)
    p.add_argument("--grid", type=int, default=10000)
    common(p, "json")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("seminorms", help="L2/H1 semi-norms of the basis on a simplex")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--vertices", default=None, help='JSON file {"vertices": [[...], ...]}')
    p.add_argument("--degree", type=int, default=None, help="quadrature degree (default 2k+2)")
    common(p, "csv")
    p.set_defaults(func=cmd_seminorms)

    p = sub.add_parser("hstar", help="critical mesh sizes h*_q against q/(e l)")
    p.add_argument("--k", type=int)
    p.add_argument("--q-max", type=int)
    p.add_argument("--model", default="builtin-sine", help="builtin-sine or a provider JSON file")
    p.add_argument("--M", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--diam", type=float, default=math.sqrt(2.0))
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--lambda", dest="lambda_max", type=float, default=1.0)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--ratio-limit", type=float, default=None, help="override the semi-norm ratio limit l")
    common(p, "csv")
    p.set_defaults(func=cmd_hstar)

    p = sub.add_parser("laws", help="step, sigmoid and Monte Carlo probability curves")
    p.add_argument("--hstar", type=float)
    p.add_argument("--q", type=int)
    p.add_argument("--h-min", type=float)
    p.add_argument("--h-max", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--spacing", choices=("linear", "log"), default="linear")
    p.add_argument("--include-hstar", action="store_true", help="add h* itself to the grid")
    p.add_argument("--montecarlo", type=int, default=0, metavar="N")
    p.add_argument("--ck", type=float)
    p.add_argument("--cm", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--seed", type=int, default=0)
    common(p, "csv")
    p.set_defaults(func=cmd_laws)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str], args: argparse.Namespace) -> argparse.Namespace:
    try:
        with open(args.config, encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config {args.config!r}: {exc}") from exc
    if not isinstance(config, dict):
        raise UsageError("config must be a JSON object")
    subparser = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
    dests = {a.dest for a in subparser._actions}  # noqa: SLF001
    defaults = {}
    for key, value in config.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest == "lambda":
            dest = "lambda_max"
        if dest not in dests or dest in ("config", "help"):
            raise UsageError(f"config key {key!r} is not an option of {args.command}")
        defaults[dest] = value
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.config:
            args = _apply_config(parser, argv, args)
        return args.func(args)
    except UsageError as exc:
        print(f"feprob {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"feprob {args.command}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except SystemExit as exc:
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001
        print(f"feprob {args.command}: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
