"""``singmin`` command line: catenary, residual, minimize, classify.

Exit codes: 0 success, 2 invalid input (including halfspace violations of
the input data), 3 nonconvergence or an ODE singularity.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from ._parallel import WORKERS_ENV, resolve_workers
from .catenary import CatenaryIVP, FunctionSample, integrate_catenary, shoot_catenary_bvp
from .classify import (
    DEFAULT_TOL,
    classify_affine,
    classify_cylinder,
    classify_translation,
    falsification_sweep,
    fit_catenary,
)
from .config import load_spec
from .exceptions import (
    DomainError,
    EvaluationError,
    NonConvergenceError,
    SingularityError,
    ValidationError,
)
from .geometry import Direction
from .minimize import EnergyOpts, Field, el_residual_of_field, field_header, minimize_energy
from .residuals import (
    affine_residuals,
    cylinder_residuals,
    grid_points,
    jet_residuals,
    residual_from_jet,
    residual_report,
    translation_residuals,
)

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


# -- output helpers -----------------------------------------------------------


def _check_output(path):
    if path in (None, "-"):
        return
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise ValidationError(f"output directory {parent} does not exist")


def _csv_text(columns, rows):
    lines = [",".join(columns)]
    lines.extend(",".join(format(float(v), ".17g") for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _json_text(obj):
    return json.dumps(obj, indent=2) + "\n"


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


# -- catenary -----------------------------------------------------------------


def cmd_catenary(args):
    _check_output(args.output)
    if args.f1 is None:
        if args.df0 is None:
            raise ValidationError("--df0 is required for an initial value problem")
        sample = integrate_catenary(CatenaryIVP(args.alpha, args.s0, args.f0, args.df0, args.s1, args.step))
    else:
        sample = shoot_catenary_bvp(args.alpha, args.s0, args.f0, args.s1, args.f1, tol=args.tol,
                                    step=args.step, df0_guess=args.df0)
    fit = None
    if args.fit:
        lam, mu, rms = fit_catenary(FunctionSample(sample.abscissae, sample.values))
        fit = f"lambda={lam:.17g} mu={mu:.17g} rms={rms:.3e}"
    _emit(_csv_text(["s", "f", "df"], zip(sample.abscissae, sample.values, sample.derivatives)), args.output)
    if fit is not None:
        print(fit, file=sys.stderr if args.output in (None, "-") else sys.stdout)
    return EXIT_OK


# -- residual -----------------------------------------------------------------


def _is(u, other):
    return np.allclose(u.u, other.u, rtol=0.0, atol=1e-15)


def _residual_batch(run):
    geom, u, alpha = run.geometry, run.u, run.alpha
    e1 = Direction.horizontal(run.n + 1, 0)
    if run.family == "translation":
        if _is(u, e1):
            return lambda X: translation_residuals(geom, alpha, X)
        return lambda X: residual_from_jet(X, *geom.jet(X), u.u, alpha)
    if run.family == "affine":
        if _is(u, e1):
            return lambda P: affine_residuals(geom, alpha, P)
        gen = geom.to_generalized()

        def batch(P):
            X = geom.to_graph_coordinates(P)
            return residual_from_jet(X, *gen.jet(X), u.u, alpha)

        return batch
    if run.family == "generalized":
        return lambda X: jet_residuals(geom, u, alpha, X)
    return lambda S: cylinder_residuals(geom, u, alpha, S)


def _param_names(run):
    if run.family == "cylinder":
        return ["s"] + [f"t{i + 1}" for i in range(run.n - 1)]
    if run.family == "affine":
        return ["xt", "yt"]
    return [f"x{i + 1}" for i in range(run.n)]


def _u_json(u):
    return [float(c) for c in u.u]


def cmd_residual(args):
    run = load_spec(args.spec, families=("translation", "affine", "generalized", "cylinder"))
    _check_output(args.output)
    _check_output(args.summary)
    points = grid_points(run.domain, run.grid)
    report = residual_report(_residual_batch(run), points, args.workers)
    rows = np.column_stack([report.points, report.residuals])
    summary = {"family": run.family, "n": run.n, "alpha": run.alpha, "u": _u_json(run.u)}
    summary.update(report.summary())
    _emit(_csv_text(_param_names(run) + ["residual"], rows), args.output)
    text = _json_text(summary)
    if args.summary:
        _emit(text, args.summary)
    elif args.output in (None, "-"):
        sys.stderr.write(text)  # stdout already carries the CSV
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- minimize -----------------------------------------------------------------

_MIN_OPTIONS = {"max_iterations", "gradient_tolerance", "armijo", "backtrack", "preconditioner", "init"}


def cmd_minimize(args):
    run = load_spec(args.spec, families=("field",))
    extra = set(run.options) - _MIN_OPTIONS
    if extra:
        raise ValidationError(f"spec.options: unexpected keys {sorted(extra)}")
    for path in (args.output, args.header, args.report):
        _check_output(path)
    u = "vertical" if _is(run.u, Direction.vertical(run.n + 1)) else "horizontal"
    kw = {k: run.options[k] for k in ("max_iterations", "gradient_tolerance", "armijo", "backtrack") if k in run.options}
    if "preconditioner" in run.options:
        kw["preconditioner"] = None if run.options["preconditioner"] in (None, "none") else run.options["preconditioner"]
    try:
        opts = EnergyOpts(alpha=run.alpha, u=u, **kw)
    except TypeError as exc:
        raise ValidationError(f"spec.options: {exc}") from None
    profiles = run.functions

    def boundary(*coords):
        return sum(p.value(c) for p, c in zip(profiles, coords))

    fld = Field.from_boundary(run.domain, run.grid, boundary, init=run.options.get("init", "harmonic"))
    # the initial guess is validated before any iteration (exit 2 when infeasible)
    result = minimize_energy(fld, opts)
    el = el_residual_of_field(result.field, opts)
    report = {
        "converged": result.converged,
        "message": result.message,
        "iterations": result.iterations,
        "final_gradient_norm": result.final_gradient_norm,
        "energy": result.energies[-1],
        "energy_trace": result.energies,
        "el_residual": el.summary(),
    }
    out = result.field
    nodes = out.nodes()
    columns = [f"x{i + 1}" for i in range(out.n)] + ["value"]
    _emit(_csv_text(columns, np.column_stack([nodes, out.values.ravel()])), args.output)
    if args.header:
        _emit(_json_text(field_header(out, opts)), args.header)
    text = _json_text(report)
    if args.report:
        _emit(text, args.report)
    elif args.output not in (None, "-"):
        sys.stdout.write(text)
    if not result.converged:
        print(f"minimize: {result.message} (gradient norm {result.final_gradient_norm:.3e})", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


# -- classify -----------------------------------------------------------------


def cmd_classify(args):
    _check_output(args.output)
    if args.sweep is not None:
        if args.spec is not None:
            raise ValidationError("give either a spec or --sweep, not both")
        report = falsification_sweep(args.family, args.alpha, args.sweep, args.seed, args.tol, args.workers)
        _emit(_json_text(report.to_json()), args.output)
        return EXIT_OK
    if args.spec is None:
        raise ValidationError("classify needs a spec path or --sweep N")
    run = load_spec(args.spec, families=("translation", "affine", "cylinder"))
    grid = max(run.grid)
    if run.family == "cylinder":
        result = classify_cylinder(run.geometry, run.u, run.alpha, args.tol, grid=grid, workers=args.workers)
    else:
        if not _is(run.u, Direction.horizontal(run.n + 1, 0)):
            raise ValidationError("spec.u: translation and affine classification is defined for u = 'horizontal' (e_1)")
        fn = classify_translation if run.family == "translation" else classify_affine
        result = fn(run.geometry, run.alpha, args.tol, grid=grid, workers=args.workers)
    _emit(_json_text(result.to_json()), args.output)
    return EXIT_OK


# -- entry point --------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="singmin", description="Singular-minimal hypersurface toolkit.")
    parser.add_argument("--version", action="version", version=f"singmin {__version__}")
    parser.add_argument("--workers", type=int, default=None,
                        help=f"worker threads (default: ${WORKERS_ENV} or all CPUs)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("catenary", help="integrate or shoot the alpha-catenary ODE")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--f0", type=float, required=True, help="f at --from")
    p.add_argument("--df0", type=float, help="f' at --from (IVP) or the initial slope guess (BVP)")
    p.add_argument("--from", dest="s0", type=float, default=0.0)
    p.add_argument("--to", dest="s1", type=float, required=True)
    p.add_argument("--f1", type=float, help="f at --to; switches to the boundary value problem")
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--tol", type=float, default=1e-10, help="shooting tolerance")
    p.add_argument("--fit", action="store_true", help="report a cosh(lambda s + mu)/lambda fit")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_catenary)

    p = sub.add_parser("residual", help="evaluate the SM residual of a spec on its grid")
    p.add_argument("spec")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--summary", help="write the JSON summary here")
    p.set_defaults(func=cmd_residual)

    p = sub.add_parser("minimize", help="minimize the discrete alpha-energy of a field")
    p.add_argument("spec")
    p.add_argument("-o", "--output", default="-", help="field CSV")
    p.add_argument("--header", help="field JSON header")
    p.add_argument("--report", help="run report JSON")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("classify", help="classify a spec or run a falsification sweep")
    p.add_argument("spec", nargs="?")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--sweep", type=int, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--family", default="translation", choices=("translation", "affine", "cylinder"))
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_classify)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        args.workers = resolve_workers(args.workers)
        return args.func(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except (ValidationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SingularityError, NonConvergenceError, EvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
