"""Command-line interface: ``nvexotic {field,phase,fit,budget,curve,simulate,config}``.

Every command writes a comma-separated table with a header line, preceded by
``#`` comment lines that record the command and the SHA-256 of the effective
configuration. Exit status: 0 success, 2 configuration or argument error,
3 numerical non-convergence, 4 input/output error.
"""

import argparse
import csv
import io
import logging
import math
import sys

import numpy as np

from . import __version__
from .config import load
from .exceptions import ConfigError, ConvergenceError, DomainError, PreconditionError
from .geometry import f_closed_form, f_quadrature
from .inference import exclusion_curve, exclusion_point, fit_phase, mass_from_lambda, systematic_budget
from .geometry import CouplingHypothesis
from .spin import accumulated_phase, synthetic_dataset, time_domain_phase

log = logging.getLogger("nvexotic")

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

DATA_COLUMNS = ("phi_mw_rad", "I", "sigma_I")


class DataFileError(Exception):
    pass


def _fail(code, message):
    sys.stderr.write(f"nvexotic: error: {message}\n")
    return code


def _fmt(value):
    if isinstance(value, str):
        return value
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    return repr(float(value))


def _emit(args, cfg, header, rows):
    buf = io.StringIO()
    buf.write(f"# nvexotic {__version__} {args.command}\n")
    buf.write(f"# config_sha256: {cfg.digest()}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if args.out:
        try:
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
    else:
        sys.stdout.write(text)


def read_dataset(path):
    """Read ``phi_mw_rad, I, sigma_I`` rows from a CSV file (``#`` comments allowed)."""
    try:
        with open(path, newline="") as fh:
            lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        raise DataFileError(f"cannot read {path}: {exc.strerror or exc}") from None
    if not lines:
        raise DataFileError(f"{path}: file is empty")
    reader = csv.DictReader(lines)
    missing = [c for c in DATA_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise DataFileError(f"{path}: missing column(s) {', '.join(missing)}")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        try:
            vals = [float(rec[c]) for c in DATA_COLUMNS]
        except (TypeError, ValueError):
            raise DataFileError(f"{path}: row {lineno} is not numeric") from None
        if not all(math.isfinite(v) for v in vals):
            raise DataFileError(f"{path}: row {lineno} contains NaN or infinity")
        rows.append(vals)
    if not rows:
        raise DataFileError(f"{path}: no data rows")
    return np.array(rows)


def _lambda_arg(args, cfg):
    if args.lambda_um is not None:
        return args.lambda_um * 1e-6
    return float(cfg.force_ranges()[0])


def cmd_field(args, cfg):
    lam = _lambda_arg(args, cfg)
    geo = cfg.geometry()
    d = args.d_um * 1e-6 if args.d_um is not None else cfg.vibration().d0
    quad = f_quadrature(lam, geo, d, tol=args.tol)
    try:
        closed = f_closed_form(lam, geo, d)
        rel = abs(quad.value - closed) / closed if closed else 0.0
    except PreconditionError:
        closed = rel = None
    _emit(args, cfg, ["lambda_m", "d_m", "f_closed", "f_quad", "f_quad_err", "rel_diff"],
          [[lam, d, closed, quad.value, quad.error, rel]])


def cmd_phase(args, cfg):
    lam = _lambda_arg(args, cfg)
    g = cfg["hypothesis"]["g"] if args.g is None else args.g
    setup = cfg.setup(args.variant)
    hyp = CouplingHypothesis(lam, g)
    common = (hyp, setup.geometry, setup.vibration, setup.theta, setup.sequence, setup.constants)
    if args.method == "timedomain":
        res = time_domain_phase(*common, n_steps=cfg["analysis"]["time_steps"], tol=setup.quad_tol)
    else:
        res = accumulated_phase(*common, samples_per_tau=setup.samples_per_tau, tol=setup.quad_tol)
    _emit(args, cfg, ["lambda_m", "g", "variant", "method", "phi_rad"],
          [[lam, g, setup.sequence.variant.value, res.method.value, res.phi]])


def cmd_fit(args, cfg):
    data = read_dataset(args.data)
    est = fit_phase(data)
    _emit(args, cfg, ["n_points", "phi_central_rad", "sigma_rad"], [[str(len(data)), est.phi_central, est.sigma_stat]])


def cmd_budget(args, cfg):
    lam = _lambda_arg(args, cfg)
    setup = cfg.setup()
    a = cfg["analysis"]
    budget = systematic_budget(lam, setup, cfg.systematic_parameters(setup), cfg.phase_estimate(),
                               a["cl"], a["reference"])
    rows = [[r.name, r.nominal, r.uncertainty, r.unit, r.correction_central, r.correction_sigma]
            for r in budget.rows]
    t = budget.total
    rows.append(["total", None, None, "", t.correction_central, t.correction_sigma])
    _emit(args, cfg, ["parameter", "nominal", "uncertainty", "unit", "correction_central", "correction_sigma"], rows)


def cmd_curve(args, cfg):
    if args.n_points < 2:
        raise ConfigError("--n-points", "must be at least 2")
    if not 0 < args.lambda_min_um < args.lambda_max_um:
        raise ConfigError("--lambda-min-um", "need 0 < lambda_min < lambda_max")
    grid = np.geomspace(args.lambda_min_um, args.lambda_max_um, args.n_points) * 1e-6
    setup = cfg.setup()
    a = cfg["analysis"]
    points = exclusion_curve(grid, cfg.phase_estimate(), setup, cfg.systematic_parameters(setup),
                             a["cl"], a["reference"], n_jobs=a["n_jobs"])
    _emit(args, cfg, ["lambda_m", "m_b_eV", "g_limit", "transfer_factor_rad"],
          [[p.force_range, p.mass_ev, p.g_limit, p.transfer_factor] for p in points])


def cmd_simulate(args, cfg):
    s = cfg["sensor"]
    seed = cfg["analysis"]["seed"] if args.seed is None else args.seed
    phi = cfg["analysis"]["phi_central_rad"] if args.phi is None else args.phi
    data = synthetic_dataset(phi, cfg.phi_mw_grid(), s["shots"], s["contrast"], np.random.default_rng(seed))
    _emit(args, cfg, list(DATA_COLUMNS), data.tolist())


def cmd_config(args, cfg):
    text = cfg.dump()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML experiment config (defaults: published setup)")
    common.add_argument("--out", metavar="PATH", help="write the table here instead of stdout")
    common.add_argument("--seed", type=int, help="random seed (overrides analysis.seed)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="nvexotic", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("field", parents=[common], help="closed form vs quadrature for the source integral")
    p.add_argument("--lambda-um", type=float)
    p.add_argument("--d-um", type=float)
    p.add_argument("--tol", type=float, default=1e-7)
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("phase", parents=[common], help="anomalous echo phase for a coupling")
    p.add_argument("--lambda-um", type=float)
    p.add_argument("--g", type=float)
    p.add_argument("--method", choices=("analytic", "timedomain"), default="analytic")
    p.add_argument("--variant", choices=("plus", "minus"))
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("fit", parents=[common], help="fit the phase to interference data")
    p.add_argument("--data", required=True, metavar="PATH")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("budget", parents=[common], help="systematic error budget at one force range")
    p.add_argument("--lambda-um", type=float)
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("curve", parents=[common], help="exclusion curve over a log-spaced force-range grid")
    p.add_argument("--lambda-min-um", type=float, default=1.0)
    p.add_argument("--lambda-max-um", type=float, default=1000.0)
    p.add_argument("--n-points", type=int, default=25)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("simulate", parents=[common], help="synthetic interference dataset")
    p.add_argument("--phi", type=float, help="true phase in rad (overrides analysis.phi_central_rad)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("config", parents=[common], help="print the effective configuration")
    p.set_defaults(func=cmd_config)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = load(args.config)
        cfg.setup()
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, f"config error at {exc}")
    except DomainError as exc:
        return _fail(EXIT_CONFIG, f"config error: {exc}")
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot read config {args.config}: {exc.strerror or exc}")
    try:
        args.func(args, cfg)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, f"argument error at {exc}")
    except ConvergenceError as exc:
        log.info("diagnostics: %s", exc.diagnostics)
        return _fail(EXIT_NUMERIC, f"numerical failure: {exc} (estimate={exc.estimate}, error={exc.error})")
    except (DataFileError, OSError) as exc:
        return _fail(EXIT_IO, str(exc))
    except (DomainError, PreconditionError, ValueError) as exc:
        return _fail(EXIT_CONFIG, f"invalid input: {exc}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
