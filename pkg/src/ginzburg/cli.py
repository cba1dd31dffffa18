"""Command-line front end.

    ginzburg <subcommand> [--config FILE] [--set key=value ...] [--out PATH] [--format csv|json]

Every subcommand has a nested parameter schema.  A JSON config file and
``--set`` overrides (dotted keys, JSON-literal values) are merged into the
schema defaults and type-checked before anything is computed.  Outputs start
with a provenance block holding the tool version and the fully resolved
parameters, and contain no timestamps, so identical inputs give identical
bytes.

Exit status: 0 success, 2 configuration error, 3 numerical non-convergence,
4 physically infeasible request.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__
from ._accel import THREADS_ENV, backend, configure_threads
from .correlator import CSV_FIELDS as CORRELATOR_FIELDS
from .correlator import correlator_rows
from .detector1d import (
    DetectorSpec1D,
    SmallVelocityWarning,
    excitation_rate_exact,
    excitation_rate_smallv,
    excitation_rate_weakG,
)
from .detector3d import (
    CutoffSpec,
    DetectorSpec3D,
    OutOfValidityError,
    eta_min,
    excitation_rate_3d_closed,
    excitation_rate_3d_cutoff,
    excitation_rate_3d_exact,
    rate_to_si,
)
from .experiment import (
    ExperimentScenario,
    OpticalDataError,
    FitError,
    fit_lorentz_params,
    hydrogen_dipole_2s3p,
    load_optical_data,
    plan_experiment,
)
from .medium import (
    CalibrationError,
    MediumParams,
    calibrate_G_from_resonance_n,
    calibrate_g_from_n0,
    permittivity,
    phase_velocity,
    refractive_index,
)
from .quadrature import QuadratureConfig
from .surface import (
    InfeasibleError,
    NotEvanescentError,
    SurfaceGeometry,
    beam_average_suppression,
    efolding_length,
    min_velocity,
    suppression_at_distance,
)

PROG = "ginzburg"
EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_INFEASIBLE = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# schema
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Param:
    kind: str  # float, int, str, bool, floats, pairs, dict
    default: Any = None
    optional: bool = False
    choices: tuple = ()

    def check(self, value, key):
        if value is None:
            if self.optional:
                return None
            raise ConfigError(f"{key}: value required")
        k = self.kind
        if k == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{key}: expected a number, got {value!r}")
            return float(value)
        if k == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{key}: expected an integer, got {value!r}")
            return value
        if k == "bool":
            if not isinstance(value, bool):
                raise ConfigError(f"{key}: expected true/false, got {value!r}")
            return value
        if k == "str":
            if not isinstance(value, str):
                raise ConfigError(f"{key}: expected a string, got {value!r}")
            if self.choices and value not in self.choices:
                raise ConfigError(f"{key}: must be one of {', '.join(self.choices)}, got {value!r}")
            return value
        if k == "floats":
            if not isinstance(value, list) or not all(
                    isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
                raise ConfigError(f"{key}: expected a list of numbers, got {value!r}")
            return [float(x) for x in value]
        if k == "pairs":
            ok = isinstance(value, list) and all(
                isinstance(p, list) and len(p) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool)
                                                            for x in p) for p in value)
            if not ok:
                raise ConfigError(f"{key}: expected a list of [dt, dx] pairs, got {value!r}")
            return [[float(a), float(b)] for a, b in value]
        if k == "dict":
            if not isinstance(value, dict):
                raise ConfigError(f"{key}: expected an object, got {value!r}")
            return copy.deepcopy(value)
        raise AssertionError(k)  # pragma: no cover


def _medium_schema(omega=3.3, g=None, G_sq=None, n0=3.4, n_res=6.8):
    return {
        "omega_res_eV": Param("float", omega),
        "coupling_g_eV": Param("float", g, optional=True),
        "coupling_G_sq_eV": Param("float", G_sq, optional=True),
        "n0": Param("float", n0),
        "n_res": Param("float", n_res),
    }


SCHEMAS = {
    "dispersion": {
        "medium": _medium_schema(),
        "energies": {"start": Param("float", 0.5), "stop": Param("float", 6.0), "num": Param("int", 56)},
    },
    "correlator": {
        "medium": _medium_schema(1.0, 1.0, 0.5),
        "points": Param("pairs", [[0.0, 1.0], [0.3, 1.0], [2.0, 1.0]]),
        "method": Param("str", "residue", choices=("residue", "direct", "euclidean")),
        "rel_tol": Param("float", 1e-8),
    },
    "rate1d": {
        "medium": _medium_schema(1.0, 0.3, 0.004),
        "detector": {"gap_eV": Param("float", 0.5), "coupling_lambda": Param("float", 1.0)},
        "velocities": Param("floats", [1e-3, 3e-3, 1e-2]),
        "rel_tol": Param("float", 1e-10),
    },
    "rate3d": {
        "medium": _medium_schema(),
        "detector": {
            "gap_eV": Param("float", 1.9),
            "dipoles_ea0": Param("floats", None, optional=True),
            "velocity_c": Param("float", 0.25),
        },
        "cutoff_eV": Param("float", 22.4, optional=True),
        "method": Param("str", "cutoff", choices=("cutoff", "closed", "exact")),
        "units": Param("str", "SI", choices=("SI", "natural_eV")),
        "rel_tol": Param("float", 1e-9),
    },
    "surface": {
        "medium": _medium_schema(),
        "gap_eV": Param("float", 1.9),
        "k_max_eV": Param("float", 22.4),
        "k_z_eV": Param("floats", [5.0, 10.0, 22.4, 40.0]),
        "hole_radius_mm": Param("floats", [0.5]),
        "distances_nm": Param("floats", [0.0, 4.5, 9.0, 18.0]),
    },
    "experiment": {
        "medium": _medium_schema(),
        "fit_from_data": Param("str", None, optional=True),
        "cutoff_eV": Param("float", 22.4),
        "detector": {
            "gap_eV": Param("float", 1.9),
            "dipoles_ea0": Param("floats", None, optional=True),
            "velocity_c": Param("float", 0.25),
        },
        "geometry": {
            "hole_radius_mm": Param("float", 0.5, optional=True),
            "plate_distance_nm": Param("float", None, optional=True),
        },
        "beam_flux_per_s": Param("float", 1e6),
        "path_cm": Param("float", 1.0),
    },
    "sweep": {
        "target": Param("str", "rate3d", choices=("rate3d", "rate1d", "surface")),
        "parameter": Param("str", "detector.velocity_c"),
        "start": Param("float", 0.20),
        "stop": Param("float", 0.30),
        "step": Param("float", 0.01),
        "values": Param("floats", None, optional=True),
        "base": Param("dict", {}),
        "jobs": Param("int", 1),
    },
}


def _set_dotted(tree: dict, key: str, value):
    parts = key.split(".")
    node = tree
    for p in parts[:-1]:
        nxt = node.setdefault(p, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"{key}: {p} is not a section")
        node = nxt
    node[parts[-1]] = value


def _parse_override(text: str):
    if "=" not in text:
        raise ConfigError(f"--set expects key=value, got {text!r}")
    key, raw = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"--set expects key=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def resolve(schema: dict, given: dict, prefix: str = "") -> dict:
    """Merge ``given`` into the schema defaults, rejecting unknown keys and bad types."""
    if not isinstance(given, dict):
        raise ConfigError(f"{prefix or 'config'}: expected an object")
    unknown = sorted(set(given) - set(schema))
    if unknown:
        raise ConfigError(f"unknown parameter {prefix}{unknown[0]}")
    out = {}
    for key, spec in schema.items():
        path = f"{prefix}{key}"
        if isinstance(spec, dict):
            out[key] = resolve(spec, given.get(key, {}), path + ".")
        else:
            out[key] = spec.check(given.get(key, spec.default), path)
    return out


def build_config(subcommand: str, config_path: str | None, overrides) -> dict:
    given: dict = {}
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as fh:
                given = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from None
        if not isinstance(given, dict):
            raise ConfigError("config file must hold a JSON object")
    for text in overrides or ():
        key, value = _parse_override(text)
        _set_dotted(given, key, value)
    return resolve(SCHEMAS[subcommand], given)


# ---------------------------------------------------------------------------
# subcommand bodies: each returns a Table
# ---------------------------------------------------------------------------

@dataclass
class Table:
    columns: list
    rows: list
    converged: bool = True
    infeasible: bool = False
    payload: dict | None = None  # JSON body overriding the row list
    notes: list = field(default_factory=list)


def make_medium(c: dict) -> MediumParams:
    Om = c["omega_res_eV"]
    g = c["coupling_g_eV"]
    if g is None:
        g = calibrate_g_from_n0(c["n0"], Om)
    G_sq = c["coupling_G_sq_eV"]
    if G_sq is None:
        G_sq = calibrate_G_from_resonance_n(c["n_res"], MediumParams(Om, g, 0.0))
    return MediumParams(Om, g, G_sq)


def run_dispersion(c: dict) -> Table:
    m = make_medium(c["medium"])
    e = c["energies"]
    if e["num"] < 1 or not 0 < e["start"] <= e["stop"]:
        raise ConfigError("energies need 0 < start <= stop and num >= 1")
    rows = []
    for w in np.linspace(e["start"], e["stop"], e["num"]):
        eps = complex(permittivity(w, m))
        n = complex(refractive_index(w, m))
        rows.append([float(w), eps.real, eps.imag, n.real, n.imag, float(phase_velocity(w, m))])
    return Table(["energy_eV", "eps_re", "eps_im", "n_re", "n_im", "phase_velocity_c"], rows)


def run_correlator(c: dict) -> Table:
    m = make_medium(c["medium"])
    cfg = QuadratureConfig(rel_tol=c["rel_tol"], max_subdivisions=400000)
    rows = correlator_rows(c["points"], m, cfg, c["method"])
    return Table(list(CORRELATOR_FIELDS), [[r[k] for k in CORRELATOR_FIELDS] for r in rows],
                 converged=all(r["converged"] for r in rows))


def run_rate1d(c: dict) -> Table:
    import warnings

    m = make_medium(c["medium"])
    cfg = QuadratureConfig(rel_tol=c["rel_tol"])
    det = c["detector"]
    rows, ok = [], True
    for v in c["velocities"]:
        d = DetectorSpec1D(det["gap_eV"], det["coupling_lambda"], v)
        ex = excitation_rate_exact(d, m, cfg)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SmallVelocityWarning)
            sv = excitation_rate_smallv(d, m, cfg)
        wg = excitation_rate_weakG(d, m)
        ok &= ex.converged and sv.converged
        rows.append([v, d.gap, ex.value, sv.value, wg.value, ex.error])
    return Table(["v", "omega", "rate_exact", "rate_smallv", "rate_weakG", "err_estimate"], rows, converged=ok)


def _dipoles(value):
    if value is None:
        return hydrogen_dipole_2s3p()
    if len(value) != 3:
        raise ConfigError("dipoles_ea0 needs three entries")
    return tuple(value)


def run_rate3d(c: dict) -> Table:
    m = make_medium(c["medium"])
    det = c["detector"]
    d = DetectorSpec3D(det["gap_eV"], _dipoles(det["dipoles_ea0"]), det["velocity_c"])
    cut = CutoffSpec(c["cutoff_eV"])
    method = c["method"]
    if method == "cutoff":
        if cut.k_max is None:
            raise ConfigError("method 'cutoff' needs cutoff_eV")
        rate = excitation_rate_3d_cutoff(d, m, cut)
    elif method == "closed":
        rate = excitation_rate_3d_closed(d, m)
    else:
        rate = excitation_rate_3d_exact(d, m, cut, QuadratureConfig(rel_tol=c["rel_tol"]))
    si = rate_to_si(rate, d.velocity)
    em = eta_min(d.gap, m, d.velocity, cut.k_max) if (cut.k_max and d.velocity) else None
    shown = si.per_second if c["units"] == "SI" else rate.value
    row = [d.velocity, d.gap, method, em, shown, c["units"], rate.value, si.per_second, si.per_cm, rate.converged]
    infeasible = method == "cutoff" and rate.value == 0.0
    return Table(["velocity_c", "gap_eV", "method", "eta_min", "rate", "rate_units", "rate_natural_eV",
                  "rate_per_s", "rate_per_cm", "converged"], [row], converged=rate.converged,
                 infeasible=infeasible)


def run_surface(c: dict) -> Table:
    m = make_medium(c["medium"])
    rows = []
    for kz in c["k_z_eV"]:
        rows.append(["efolding_length_nm", "k_z_eV", kz, efolding_length(kz, m)])
    rows.append(["v_min_c", "k_max_eV", c["k_max_eV"], min_velocity(c["gap_eV"], m, c["k_max_eV"], relativistic=False)])
    rows.append(["v_min_relativistic_c", "k_max_eV", c["k_max_eV"], min_velocity(c["gap_eV"], m, c["k_max_eV"])])
    ell = efolding_length(c["k_max_eV"], m)
    for dist in c["distances_nm"]:
        rows.append(["suppression_at_distance", "distance_nm", dist, suppression_at_distance(dist, ell)])
    for R in c["hole_radius_mm"]:
        rows.append(["beam_average_suppression", "hole_radius_mm", R, beam_average_suppression(R, ell)])
    return Table(["quantity", "argument", "argument_value", "value"], rows)


def make_scenario(c: dict) -> ExperimentScenario:
    if c["fit_from_data"]:
        data = load_optical_data(c["fit_from_data"])
        m, _ = fit_lorentz_params(data, make_medium(c["medium"]))
    else:
        m = make_medium(c["medium"])
    det = c["detector"]
    geo = c["geometry"]
    if (geo["hole_radius_mm"] is None) == (geo["plate_distance_nm"] is None):
        raise ConfigError("geometry needs exactly one of hole_radius_mm, plate_distance_nm")
    geometry = (SurfaceGeometry.hole(geo["hole_radius_mm"]) if geo["hole_radius_mm"] is not None
                else SurfaceGeometry.plate(geo["plate_distance_nm"]))
    return ExperimentScenario(m, c["cutoff_eV"], DetectorSpec3D(det["gap_eV"], _dipoles(det["dipoles_ea0"]),
                                                                det["velocity_c"]),
                              geometry, c["beam_flux_per_s"], c["path_cm"])


def run_experiment(c: dict) -> Table:
    report = plan_experiment(make_scenario(c))
    inter = report.intermediates
    row = [report.feasible, report.count_rate_per_s_per_cm, report.count_rate_per_s, inter["bulk_per_cm"],
           inter["eta_min"], inter["prefactor"], inter["efolding_length_nm"], inter["suppression"], inter["v_min_c"]]
    cols = ["feasible", "count_rate_per_s_per_cm", "count_rate_per_s", "bulk_per_cm", "eta_min", "prefactor",
            "efolding_length_nm", "suppression", "v_min_c"]
    notes = [inter["bulk_order_check"]["note"], *report.diagnostics]
    return Table(cols, [row], infeasible=not report.feasible, payload=report.to_dict(), notes=notes)


RUNNERS = {
    "dispersion": run_dispersion,
    "correlator": run_correlator,
    "rate1d": run_rate1d,
    "rate3d": run_rate3d,
    "surface": run_surface,
    "experiment": run_experiment,
}


def sweep_values(c: dict) -> list:
    if c["values"] is not None:
        return list(c["values"])
    step = c["step"]
    if not step > 0 or c["stop"] < c["start"]:
        raise ConfigError("sweep needs step > 0 and stop >= start")
    n = int(math.floor((c["stop"] - c["start"]) / step + 1e-9)) + 1
    return [round(c["start"] + i * step, 12) for i in range(n)]


def _sweep_point(args):
    target, base, parameter, value = args
    given = copy.deepcopy(base)
    _set_dotted(given, parameter, value)
    return RUNNERS[target](resolve(SCHEMAS[target], given))


def run_sweep(c: dict) -> Table:
    target = c["target"]
    values = sweep_values(c)
    # validate the base config once, before spawning anything
    resolve(SCHEMAS[target], c["base"])
    jobs = c["jobs"]
    env_jobs = os.environ.get(THREADS_ENV)
    if env_jobs and jobs == 1:
        jobs = max(1, int(env_jobs))
    tasks = [(target, c["base"], c["parameter"], v) for v in values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            tables = list(pool.map(_sweep_point, tasks))
    else:
        tables = [_sweep_point(t) for t in tasks]
    cols = ["index", c["parameter"]] + (tables[0].columns if tables else [])
    rows = []
    for i, (v, t) in enumerate(zip(values, tables)):
        rows.extend([i, v, *r] for r in t.rows)
    return Table(cols, rows, converged=all(t.converged for t in tables))


RUNNERS["sweep"] = run_sweep


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


def provenance(subcommand: str, params: dict) -> dict:
    return {"tool": PROG, "version": __version__, "subcommand": subcommand, "backend": backend(),
            "parameters": _jsonable(params)}


def render(table: Table, subcommand: str, params: dict, fmt: str) -> str:
    prov = provenance(subcommand, params)
    if fmt == "json":
        body = {"provenance": prov}
        if table.payload is not None:
            body["result"] = _jsonable(table.payload)
        else:
            body["columns"] = table.columns
            body["rows"] = [dict(zip(table.columns, _jsonable(r))) for r in table.rows]
        body["notes"] = table.notes
        return json.dumps(body, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# {PROG} {__version__} {subcommand}\n")
    buf.write(f"# backend: {prov['backend']}\n")
    for line in json.dumps(prov["parameters"], sort_keys=True).splitlines():
        buf.write(f"# parameters: {line}\n")
    for note in table.notes:
        buf.write(f"# note: {note}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for r in table.rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def write_atomic(text: str, path: str):
    if path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".out")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_plot_data(series, path, x_label: str = "x"):
    """Write labelled (x, y) series as CSV: one x column, one column per series.

    ``series`` is a sequence of (label, x, y).  All series must have the same
    x values; an empty sequence writes only the header.
    """
    series = list(series)
    if series:
        x0 = np.asarray(series[0][1], dtype=float)
        for label, x, y in series:
            x = np.asarray(x, dtype=float)
            y = np.asarray(y, dtype=float)
            if x.shape != y.shape or x.shape != x0.shape:
                raise ValueError(f"series {label!r}: length mismatch")
            if not np.array_equal(x, x0):
                raise ValueError(f"series {label!r}: x values differ from the first series")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([x_label] + [s[0] for s in series])
    if series:
        cols = [np.asarray(s[2], dtype=float) for s in series]
        for i, xv in enumerate(np.asarray(series[0][1], dtype=float)):
            w.writerow([repr(float(xv))] + [repr(float(c[i])) for c in cols])
    write_atomic(buf.getvalue(), path)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=PROG, description="Medium-correlator, detector-rate and experiment-planning tools.")
    p.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True, metavar="subcommand")
    helps = {
        "dispersion": "permittivity, index and phase velocity over an energy grid",
        "correlator": "field two-point function at (dt, dx) points",
        "rate1d": "1D detector rates: exact, small-v and weak-G",
        "rate3d": "3D detector rate with optional cutoff, natural or SI units",
        "surface": "e-folding lengths, threshold velocity and suppression factors",
        "experiment": "end-to-end count-rate planner",
        "sweep": "run another subcommand over a parameter grid",
    }
    for name in SCHEMAS:
        sp = sub.add_parser(name, help=helps[name])
        sp.add_argument("--config", help="JSON parameter file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a parameter; dotted keys, JSON values")
        sp.add_argument("--out", default="-", help="output path ('-' for stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        if name == "sweep":
            sp.add_argument("--plot", help="also write plot-ready CSV of the first numeric result column")
    return p


def run(args: argparse.Namespace) -> int:
    try:
        params = build_config(args.subcommand, args.config, args.set)
    except ConfigError as exc:
        print(f"{PROG}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    configure_threads()
    try:
        table = RUNNERS[args.subcommand](params)
    except ConfigError as exc:
        print(f"{PROG}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleError, NotEvanescentError, OutOfValidityError) as exc:
        print(f"{PROG}: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (FitError, CalibrationError) as exc:
        print(f"{PROG}: no convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (OpticalDataError, ValueError) as exc:
        print(f"{PROG}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    write_atomic(render(table, args.subcommand, params, args.format), args.out)
    if getattr(args, "plot", None):
        _sweep_plot(table, params, args.plot)
    if not table.converged:
        print(f"{PROG}: warning: some integrals did not converge", file=sys.stderr)
        return EXIT_NONCONVERGED
    if table.infeasible:
        print(f"{PROG}: infeasible: zero prediction, see notes", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _sweep_plot(table: Table, params: dict, path: str):
    cols = table.columns
    x = [r[1] for r in table.rows]
    name = next((c for c in ("rate_per_cm", "rate_exact", "value") if c in cols), None)
    series = [] if name is None else [(name, x, [r[cols.index(name)] for r in table.rows])]
    emit_plot_data(series, path, x_label=params["parameter"])


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return run(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
