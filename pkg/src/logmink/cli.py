"""Command-line surface.

Subcommands: ``solve``, ``conevol``, ``distance``, ``check-scc``,
``construct {chopped-cube|phi-s|qt|mu0}``, ``experiment
{inverse|forward|phi-s|qt}`` and ``constants``.

Exit codes: 0 success, 2 parse error, 3 concentration condition violated,
4 stalled, 5 iteration cap, 6 tolerance or budget exceeded, 1 other failure.
The environment variable ``LOGMINK_MAX_GROUP_ORDER`` overrides the group
order cap (default 1024).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import experiments, serialize
from .constructions import (
    chopped_cube,
    diagonal_stretch,
    stability_constants,
    stretched_direct_sum,
    two_point_measure,
    unit_cube,
)
from .errors import (
    ConditionViolated,
    LogMinkError,
    MaxIterExceeded,
    OrderCapExceeded,
    ParameterOutOfRange,
    SerializationError,
    Stalled,
    ToleranceUnreachable,
    VerificationFailed,
)
from .geometry import HPolytope, hausdorff_distance
from .measures import (
    bounded_lipschitz,
    check_quantitative_concentration,
    check_subspace_concentration,
    cone_volume_measure,
    wasserstein,
)
from .solver import SolveOptions, solve_log_minkowski, verify_solution

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CONDITION = 3
EXIT_STALLED = 4
EXIT_MAXITER = 5
EXIT_BUDGET = 6
EXIT_OTHER = 1


def _order_cap():
    raw = os.environ.get("LOGMINK_MAX_GROUP_ORDER")
    return int(raw) if raw else 1024


def _load(path):
    try:
        with open(path) as fh:
            return serialize.loads(fh.read())
    except OSError as exc:
        raise SerializationError(f"cannot read {path}: {exc}") from exc


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_solve(args):
    if (args.delta is None) != (args.tau is None):
        raise SerializationError("--delta and --tau must be given together")
    measure = serialize.measure_from_dict(_load(args.measure))
    group = serialize.group_from_dict(_load(args.group), order_cap=_order_cap())
    options = SolveOptions(
        tol_residual=args.tol,
        max_iter=args.max_iter,
        damping=args.damping,
        seed=args.seed,
    )
    report = solve_log_minkowski(measure, group, options)
    verification = None
    failed_clause = None
    if args.delta is not None and args.tau is not None:
        try:
            verification = verify_solution(
                report, measure, group, args.delta, args.tau, c=args.c_const
            )
        except VerificationFailed as exc:
            failed_clause = {"passed": False, "clause": exc.clause, "detail": str(exc)}
    payload = serialize.report_to_dict(report, verification)
    if failed_clause is not None:
        payload["verification"] = failed_clause
    _emit(serialize.canonical_dumps(payload), args.out)
    print(
        f"solved: residual {report.residual:.3e} in {report.iterations} iterations"
        + (" (degenerate instance)" if report.degenerate else ""),
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_conevol(args):
    body = serialize.body_from_dict(_load(args.body))
    measure = cone_volume_measure(body)
    if args.format == "csv":
        lines = ["u,w"]
        for u, w in zip(measure.dirs, measure.weights):
            lines.append('"' + " ".join(repr(x) for x in u) + '",' + repr(float(w)))
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit(serialize.canonical_dumps(serialize.measure_to_dict(measure)), args.out)
    return EXIT_OK


def _cmd_distance(args):
    if args.metric == "hausdorff":
        a = serialize.body_from_dict(_load(args.a))
        b = serialize.body_from_dict(_load(args.b))
        value = hausdorff_distance(a, b, tol=args.tol)
    else:
        mu = serialize.measure_from_dict(_load(args.a))
        nu = serialize.measure_from_dict(_load(args.b))
        value = wasserstein(mu, nu) if args.metric == "wasserstein" else bounded_lipschitz(mu, nu)
    print(f"{value:.12g}")
    if args.out:
        _emit(
            serialize.canonical_dumps(
                {"metric": args.metric, "a": args.a, "b": args.b, "value": value}
            ),
            args.out,
        )
    return EXIT_OK


def _cmd_check_scc(args):
    measure = serialize.measure_from_dict(_load(args.measure))
    group = serialize.group_from_dict(_load(args.group), order_cap=_order_cap())
    report = check_subspace_concentration(measure, group)
    payload = {
        "verdict": report.verdict,
        "irreducible": report.irreducible,
        "records": [
            {
                "dim": r.subspace_dim,
                "mass": r.tube_mass,
                "threshold": r.threshold,
                "slack": r.slack,
                "support_split_ok": r.support_split_ok,
            }
            for r in report.records
        ],
    }
    if args.delta is not None and args.tau is not None:
        qreport = check_quantitative_concentration(measure, group, args.delta, args.tau)
        payload["quantitative"] = {
            "verdict": qreport.verdict,
            "irrelevant": qreport.irreducible,
            "records": [
                {
                    "dim": r.subspace_dim,
                    "tube_mass": r.tube_mass,
                    "bound": r.threshold,
                    "slack": r.slack,
                    "radius": r.radius,
                }
                for r in qreport.records
            ],
        }
    _emit(serialize.canonical_dumps(payload), args.out)
    print(f"verdict: {report.verdict}", file=sys.stderr)
    return EXIT_OK


def _axis_vector(dim, index):
    if not 0 <= index < dim:
        raise ParameterOutOfRange(f"axis index {index} out of range for dim {dim}")
    axis = np.zeros(dim)
    axis[index] = 1.0
    return axis


def _cmd_construct(args):
    if args.what == "chopped-cube":
        body = chopped_cube(args.n, args.eps)
        _emit(serialize.canonical_dumps(serialize.body_to_dict(body)), args.out)
    elif args.what == "phi-s":
        base = serialize.body_from_dict(_load(args.body)) if args.body else unit_cube(args.n)
        body = diagonal_stretch(base, _axis_vector(base.dim, args.axis), args.s)
        _emit(serialize.canonical_dumps(serialize.body_to_dict(body)), args.out)
    elif args.what == "qt":
        seg = HPolytope(1, [[1.0], [-1.0]], [0.5, 0.5])
        b1 = np.array([[1.0], [0.0]])
        b2 = np.array([[0.0], [1.0]])
        body = stretched_direct_sum(seg, b1, seg, b2, args.t)
        _emit(serialize.canonical_dumps(serialize.body_to_dict(body)), args.out)
    else:  # mu0
        measure = two_point_measure(_axis_vector(args.n, args.axis))
        _emit(serialize.canonical_dumps(serialize.measure_to_dict(measure)), args.out)
    return EXIT_OK


_EXPERIMENT_ALIASES = {
    "inverse": "inverse_stability",
    "forward": "forward_continuity",
    "phi-s": "phi_s_degeneration",
    "qt": "qt_divergence",
}

_DEFAULT_GRIDS = {
    "inverse_stability": (1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2),
    "forward_continuity": tuple(float(x) for x in np.geomspace(1e-4, 2e-2, 10)),
    "phi_s_degeneration": (1.0, 2.0, 4.0, 8.0, 16.0, 32.0),
    "qt_divergence": (0.5, 1.0, 2.0, 5.0, 10.0),
}


def _cmd_experiment(args):
    name = _EXPERIMENT_ALIASES[args.which]
    grid = tuple(float(x) for x in args.grid.split(",")) if args.grid else _DEFAULT_GRIDS[name]
    cfg = experiments.ExperimentConfig(
        experiment=name,
        grid=grid,
        n=args.n,
        delta=args.delta if args.delta is not None else 0.1,
        tau=args.tau if args.tau is not None else 0.3,
        seed=args.seed,
        tol=args.tol,
    )
    rows, summary = experiments.run_experiment(cfg)
    if args.out:
        experiments.write_rows(rows, args.out)
    else:
        sys.stdout.write(experiments.rows_to_csv(rows))
    print(f"summary: {summary}", file=sys.stderr)
    return EXIT_OK


def _cmd_constants(args):
    consts = stability_constants(
        args.n,
        delta=args.delta,
        tau=args.tau,
        irreducible=args.irreducible,
        c=args.c_const,
    )
    _emit(
        serialize.canonical_dumps(
            {
                "branch": consts.branch,
                "R0": consts.R0,
                "r0": consts.r0,
                "gamma0": consts.gamma0,
                "c": consts.c,
                "delta": consts.delta,
                "tau": consts.tau,
            }
        ),
        args.out,
    )
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="logmink",
        description="Discrete logarithmic Minkowski problem toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve V_K = mu for an invariant measure")
    p.add_argument("measure")
    p.add_argument("group")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=50_000)
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--c-const", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("conevol", help="cone-volume measure of a body")
    p.add_argument("body")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=_cmd_conevol)

    p = sub.add_parser("distance", help="distance between two measures or bodies")
    p.add_argument("metric", choices=("wasserstein", "bl", "hausdorff"))
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_distance)

    p = sub.add_parser("check-scc", help="subspace concentration report")
    p.add_argument("measure")
    p.add_argument("group")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_check_scc)

    p = sub.add_parser("construct", help="build one of the explicit examples")
    p.add_argument("what", choices=("chopped-cube", "phi-s", "qt", "mu0"))
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--s", type=float, default=2.0)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--axis", type=int, default=0)
    p.add_argument("--body", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_construct)

    p = sub.add_parser("experiment", help="run a stability sweep, emit CSV")
    p.add_argument("which", choices=tuple(_EXPERIMENT_ALIASES))
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--grid", default=None, help="comma-separated sweep values")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("constants", help="stability constants for a branch")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--irreducible", action="store_true")
    p.add_argument("--c-const", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_constants)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SerializationError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConditionViolated as exc:
        print(f"condition violated: {exc}", file=sys.stderr)
        if exc.witness is not None:
            print(
                f"witness subspace of dimension {exc.witness.subspace_dim} with "
                f"mass {exc.witness.tube_mass:.6g} > {exc.witness.threshold:.6g}",
                file=sys.stderr,
            )
        return EXIT_CONDITION
    except Stalled as exc:
        print(f"stalled: {exc}", file=sys.stderr)
        return EXIT_STALLED
    except MaxIterExceeded as exc:
        print(f"iteration cap: {exc}", file=sys.stderr)
        return EXIT_MAXITER
    except (ToleranceUnreachable, OrderCapExceeded) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except LogMinkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
