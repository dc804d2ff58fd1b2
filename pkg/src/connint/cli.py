"""Command-line front end.

Subcommands: moments, density, euclidean-density, maxima, verify, measure-scan.
Output is a table in CSV or JSON; every column names the route that produced
it.  Settings come from flags, then a JSON config file (--config), then
built-in defaults.  Without --out, files go to $CONNINT_OUT_DIR/<command>.<fmt>
when that variable is set, otherwise to stdout.

Exit codes: 0 success, 1 a numerical check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import checks as checks_mod
from . import distribution as dist
from . import measure, moments
from .jets import PrecisionConfig
from .special import QuadratureSpec

OUT_DIR_ENV = "CONNINT_OUT_DIR"

DEFAULTS = {
    "gamma": 1.0,
    "bits": 256,
    "abs_tol": 1e-12,
    "rel_tol": 1e-10,
    "format": "csv",
    "out": None,
    "seed": 42,
    # moments
    "kind": "arcsin",
    "kmin": 0,
    "kmax": 6,
    # density / euclidean-density
    "region": "spacelike",
    "vmin": 0.0,
    "vmax": 10.0,
    "points": 101,
    "vminus": None,
    "gamma_e_re": None,
    "gamma_e_im": None,
    # maxima
    "n": 5,
    # measure-scan
    "ns": [0, 4, 10, 18, 19, 20, 22],
    "decades": 10,
    "samples_per_decade": 8,
    # verify
    "checks": None,
    "timings": False,
}

# tolerances applied by the moments command
GENERIC_TOL = 1e-25
DENSITY_RTOL = 1e-8


class UsageError(Exception):
    pass


@dataclass
class Column:
    name: str
    route: str  # closed_form | generating_function | quadrature | fit | input | derived | check
    unit: str = ""


@dataclass
class Table:
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)


# --- serialization ---------------------------------------------------------------


def _plain(x):
    """JSON-ready scalar: complex -> {re, im}, numpy/mpmath numbers -> float."""
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, complex) or (hasattr(x, "imag") and not isinstance(x, (float, np.floating)) and x.imag != 0):
        z = complex(x)
        return {"re": z.real, "im": z.imag}
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return float(x)


def _header(col: Column) -> str:
    return f"{col.name} [{col.route}{'; ' + col.unit if col.unit else ''}]"


def render_csv(table: Table, config: dict) -> str:
    buf = io.StringIO()
    buf.write(f"# connint {__version__}\n")
    buf.write(f"# config: {json.dumps(_plain(config), sort_keys=True)}\n")
    for k, v in sorted(table.meta.items()):
        buf.write(f"# {k}: {json.dumps(_plain(v), sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    header = []
    complex_cols = {i for i, _ in enumerate(table.columns) if any(isinstance(r[i], complex) for r in table.rows)}
    for i, col in enumerate(table.columns):
        if i in complex_cols:
            header += [_header(Column(col.name + ".re", col.route, col.unit)),
                       _header(Column(col.name + ".im", col.route, col.unit))]
        else:
            header.append(_header(col))
    writer.writerow(header)
    for row in table.rows:
        out = []
        for i, x in enumerate(row):
            if i in complex_cols:
                z = complex(x)
                out += [repr(z.real), repr(z.imag)]
            elif isinstance(x, (float, np.floating)) or hasattr(x, "_mpf_"):
                out.append(repr(float(x)))
            else:
                out.append("" if x is None else str(x))
        writer.writerow(out)
    return buf.getvalue()


def render_json(table: Table, config: dict) -> str:
    doc = {
        "version": __version__,
        "config": _plain(config),
        "columns": [{"name": c.name, "route": c.route, "unit": c.unit} for c in table.columns],
        "rows": [{c.name: _plain(x) for c, x in zip(table.columns, row)} for row in table.rows],
        "meta": _plain(table.meta),
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def emit(table: Table, config: dict, command: str) -> None:
    text = render_csv(table, config) if config["format"] == "csv" else render_json(table, config)
    target = config.get("out")
    if target is None and os.environ.get(OUT_DIR_ENV):
        target = str(Path(os.environ[OUT_DIR_ENV]) / f"{command}.{config['format']}")
    if target in (None, "-"):
        sys.stdout.write(text)
        return
    path = Path(target)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# --- commands ----------------------------------------------------------------------


def _precision(cfg: dict) -> PrecisionConfig:
    return PrecisionConfig(bits=int(cfg["bits"]))


def _quad_spec(cfg: dict) -> QuadratureSpec:
    return QuadratureSpec(abs_tol=float(cfg["abs_tol"]), rel_tol=float(cfg["rel_tol"]))


def cmd_moments(cfg: dict) -> Table:
    kind = moments.GKind(cfg["kind"])
    if not 0 <= cfg["kmin"] <= cfg["kmax"]:
        raise UsageError("need 0 <= kmin <= kmax")
    prec, spec = _precision(cfg), _quad_spec(cfg)
    ks = range(cfg["kmin"], cfg["kmax"] + 1)
    closed = [moments.moment_closed_form(k, kind, prec) for k in ks]
    generic = [moments.moment_generic_kind(k, kind, prec) for k in ks]
    dens = [moments.density_moment_quadrature(k, kind, spec) for k in ks]
    units = [float(c.to_unit_mass()) for c in closed]
    if kind is moments.GKind.LINEAR:
        const = 1.0
    else:
        const, _ = moments.fit_route_constant(units, [d.value for d in dens])
    rows, failures = [], []
    for k, c, g, u, d in zip(ks, closed, generic, units, dens):
        r_gen = float(abs(c.value - g.value))
        r_den = abs(d.value - const * u) / abs(const * u)
        if r_gen > GENERIC_TOL:
            failures.append(f"k={k}: generic route differs by {r_gen:.3e}")
        if r_den > DENSITY_RTOL:
            failures.append(f"k={k}: density route differs by {r_den:.3e} (relative)")
        rows.append([k, c.value, g.value, u, d.value, d.parts["regular"], d.parts["contact"], r_gen, r_den])
    cols = [
        Column("k", "input"),
        Column("moment", "closed_form", "raw"),
        Column("moment", "generating_function", "raw"),
        Column("moment", "closed_form", "unit_mass"),
        Column("moment", "quadrature", "unit_mass"),
        Column("regular_part", "quadrature", "unit_mass"),
        Column("contact_part", "closed_form", "unit_mass"),
        Column("residual_generic", "check", "absolute"),
        Column("residual_density", "check", "relative, after route constant"),
    ]
    # distinct names for JSON records
    for col, suffix in zip(cols[1:5], ("closed_raw", "generic_raw", "closed_unit", "density_unit")):
        col.name = f"moment_{suffix}"
    meta = {"route_constant": {"value": const, "route": "fit" if kind is moments.GKind.ARCSIN else "closed_form"}}
    return Table(cols, rows, meta, failures)


def _grid(cfg: dict) -> np.ndarray:
    if cfg["points"] < 2 or not 0 <= cfg["vmin"] < cfg["vmax"]:
        raise UsageError("need points >= 2 and 0 <= vmin < vmax")
    return np.linspace(cfg["vmin"], cfg["vmax"], cfg["points"])


def cmd_density(cfg: dict) -> Table:
    gamma = dist.GammaParam(cfg["gamma"])
    region = dist.Region(cfg["region"])
    rows = []
    for t in _grid(cfg):
        v2 = dist.SquaredArea.on_ray(float(t), region)
        p = dist.n0_density(v2, gamma)
        rows.append([float(t), p.v2, p.value, p.log_value, p.pole_distance])
    cols = [Column("abs_v", "input"), Column("v2", "input"), Column("n0", "closed_form"),
            Column("log_n0", "closed_form"), Column("pole_distance", "closed_form")]
    fit = dist.decay_rate(region, gamma)
    meta = {"decay_rate": {"predicted": fit.predicted, "fitted": fit.fitted, "route": "fit", "window": list(fit.window)}}
    return Table(cols, rows, meta)


def cmd_euclidean(cfg: dict) -> Table:
    if cfg["gamma_e_re"] is None and cfg["gamma_e_im"] is None:
        gamma_e = -1j * dist.GammaParam(cfg["gamma"]).value
    else:
        gamma_e = complex(cfg["gamma_e_re"] or 0.0, cfg["gamma_e_im"] or 0.0)
        if gamma_e == 0:
            raise UsageError("gamma_E must be nonzero")
    rows = []
    for t in _grid(cfg):
        vm = float(t) if cfg["vminus"] is None else float(cfg["vminus"])
        val = dist.n0_euclidean(float(t), vm, gamma_e)
        rows.append([float(t), vm, val, dist.log_abs_euclidean(float(t), vm, gamma_e)])
    cols = [Column("v_plus", "input"), Column("v_minus", "input"), Column("n0_euclidean", "closed_form"),
            Column("log_abs_n0_euclidean", "closed_form")]
    return Table(cols, rows, {"gamma_e": gamma_e})


def cmd_maxima(cfg: dict) -> Table:
    res = dist.find_local_maxima(cfg["gamma"], cfg["region"], int(cfg["n"]))
    rows = [[m.index, m.location, m.value, m.prominence, m.predicted, m.ratio] for m in res.maxima]
    cols = [Column("n", "input"), Column("location", "fit", "|v|, golden-section"), Column("n0", "closed_form"),
            Column("prominence", "derived", "relative"), Column("spectrum", "closed_form", "|v|"),
            Column("ratio", "derived", "location/spectrum")]
    meta = {"candidates": res.candidates, "found": len(res.maxima), "diagnostics": res.diagnostics}
    failures = []
    if len(res.maxima) < cfg["n"]:
        failures.append(f"found {len(res.maxima)} of {cfg['n']} requested maxima")
    return Table(cols, rows, meta, failures)


def cmd_measure_scan(cfg: dict) -> Table:
    rows, failures = [], []
    for n in cfg["ns"]:
        if n < 0:
            raise UsageError("length powers must be nonnegative")
        r = measure.length_moment_scan(int(n), cfg["decades"], cfg["samples_per_decade"], cfg["seed"])
        rows.append([int(n), r.exponent, r.predicted, r.rel_error, r.verdict])
    cols = [Column("n", "input"), Column("exponent", "fit"), Column("predicted", "closed_form", "9 - n/2"),
            Column("rel_error", "check"), Column("verdict", "fit", "convergent iff exponent > -1")]
    return Table(cols, rows, {}, failures)


def cmd_verify(cfg: dict) -> Table:
    ids = cfg["checks"] or sorted(checks_mod.CHECKS)
    for i in ids:
        if i not in checks_mod.CHECKS:
            raise UsageError(f"unknown check id {i}")
    results = checks_mod.run_checks(ids, _precision(cfg), cfg["seed"])
    for r in results:
        print(r.line(), file=sys.stderr)
    rows = []
    for r in results:
        row = [r.id, r.name, "PASS" if r.ok else "FAIL", r.residual, r.tolerance, r.message]
        if cfg["timings"]:
            row += [r.runtime, r.time_limit]
        rows.append(row)
    cols = [Column("id", "input"), Column("name", "input"), Column("status", "check"),
            Column("residual", "check"), Column("tolerance", "input"), Column("message", "check")]
    if cfg["timings"]:
        cols += [Column("runtime", "check", "s"), Column("time_limit", "input", "s")]
    failures = [f"check {r.id} failed: residual {r.residual:.3e} vs tol {r.tolerance:.1e}" for r in results if not r.ok]
    return Table(cols, rows, {}, failures)


COMMANDS = {
    "moments": cmd_moments,
    "density": cmd_density,
    "euclidean-density": cmd_euclidean,
    "maxima": cmd_maxima,
    "measure-scan": cmd_measure_scan,
    "verify": cmd_verify,
}


# --- argument handling ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS  # unset flags stay absent so config files can fill them
    common = argparse.ArgumentParser(add_help=False, argument_default=S)
    common.add_argument("--config", help="JSON file with settings (flags override it)")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--out", help=f"output file ('-' for stdout); default ${OUT_DIR_ENV}/<command>.<format> or stdout")
    common.add_argument("--gamma", type=float)
    common.add_argument("--bits", type=int, help="jet precision in bits")
    common.add_argument("--abs-tol", dest="abs_tol", type=float)
    common.add_argument("--rel-tol", dest="rel_tol", type=float)
    common.add_argument("--seed", type=int)

    parser = argparse.ArgumentParser(prog="connint", description="Connection-integral moments and area distributions.")
    parser.add_argument("--version", action="version", version=f"connint {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", parents=[common], argument_default=S, help="moment table by three routes")
    p.add_argument("--kind", choices=["linear", "arcsin"])
    p.add_argument("--kmin", type=int)
    p.add_argument("--kmax", type=int)

    for name, helptext in (("density", "N0 along a physical ray"),
                           ("euclidean-density", "Euclidean density samples")):
        p = sub.add_parser(name, parents=[common], argument_default=S, help=helptext)
        p.add_argument("--vmin", type=float)
        p.add_argument("--vmax", type=float)
        p.add_argument("--points", type=int)
        if name == "density":
            p.add_argument("--region", choices=["spacelike", "timelike"])
        else:
            p.add_argument("--vminus", type=float, help="fixed v- (default: the slice v- = v+)")
            p.add_argument("--gamma-e-re", dest="gamma_e_re", type=float)
            p.add_argument("--gamma-e-im", dest="gamma_e_im", type=float,
                           help="gamma_E components; default gamma_E = -i gamma")

    p = sub.add_parser("maxima", parents=[common], argument_default=S, help="local maxima vs spectrum")
    p.add_argument("--region", choices=["spacelike", "timelike"])
    p.add_argument("--n", type=int, help="number of maxima")

    p = sub.add_parser("measure-scan", parents=[common], argument_default=S, help="flattening exponents")
    p.add_argument("--n", dest="ns", type=int, nargs="+", help="length powers")
    p.add_argument("--decades", type=int)
    p.add_argument("--samples-per-decade", dest="samples_per_decade", type=int)

    p = sub.add_parser("verify", parents=[common], argument_default=S, help="run the verification suite")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--all", dest="checks", action="store_const", const=None)
    g.add_argument("--check", dest="checks", type=int, action="append", help="check id (repeatable)")
    p.add_argument("--timings", action="store_true", help="include runtimes (output no longer byte-stable)")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    flags = vars(args).copy()
    command = flags.pop("command")
    path = flags.pop("config", None)
    if path:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as err:
            raise UsageError(f"cannot read config file {path}: {err}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        # either flat keys or a per-command section
        section = loaded.get(command, {}) if isinstance(loaded.get(command), dict) else {}
        flat = {k.replace("-", "_"): v for k, v in loaded.items() if not isinstance(v, dict)}
        for src in (flat, {k.replace("-", "_"): v for k, v in section.items()}):
            unknown = set(src) - set(DEFAULTS)
            if unknown:
                raise UsageError(f"unknown config keys: {sorted(unknown)}")
            cfg.update(src)
    cfg.update(flags)
    cfg["command"] = command
    return cfg


def _validate(cfg: dict) -> None:
    if cfg["format"] not in ("csv", "json"):
        raise UsageError("format must be csv or json")
    try:
        dist.GammaParam(cfg["gamma"])
        _precision(cfg)
        _quad_spec(cfg)
    except (TypeError, ValueError) as err:
        raise UsageError(str(err)) from None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        _validate(cfg)
        table = COMMANDS[cfg["command"]](cfg)
    except UsageError as err:
        parser.print_usage(sys.stderr)
        print(f"connint: error: {err}", file=sys.stderr)
        return 2
    except (dist.PoleError, dist.DecayFitError) as err:
        print(f"connint: error: {err}", file=sys.stderr)
        return 1
    echoed = {k: v for k, v in sorted(cfg.items())}
    emit(table, echoed, cfg["command"])
    for f in table.failures:
        print(f"connint: check failed: {f}", file=sys.stderr)
    return 1 if table.failures else 0


if __name__ == "__main__":
    sys.exit(main())
