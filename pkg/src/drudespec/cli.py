"""Command-line front end.

    drudespec <scenario> [--config FILE] [--out DIR] [--threads N] [--seed S]

Scenarios: dispersion, zones, mode, green, transform, evolve, resonance,
validate.  Data tables go to CSV (complex values split into Re/Im
columns), summaries and reports to JSON.  Exit status: 0 success, 1 a
numerical check failed, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from threadpoolctl import threadpool_limits

from . import checks
from .dispersion import classify, cut_curves
from .errors import ConfigError, DomainError
from .evolution import DriveSpec, driven_evolve, driven_norms, free_coefficients
from .fields import StateField1D, collocated_layout
from .material import MediumParams
from .modes import ModeField
from .sturm import green as green_eval
from .transform import adjoint, forward, project, spectral_grid

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

SCENARIOS = ("dispersion", "zones", "mode", "green", "transform", "evolve", "resonance", "validate")

_SCHEMA: dict[str, Any] = {
    "scenario": str,
    "medium": {"eps0": float, "mu0": float, "omega_e": float, "omega_m": float},
    "grids": {
        "x": {"L": float, "n": int},
        "lambda": {"min": float, "max": float, "count": int, "delta": float, "panel_width": float, "nodes": int},
        "k": {"min": float, "max": float, "count": int},
    },
    "params": {
        "k": float,
        "lam": float,
        "j": int,
        "zeta_re": float,
        "zeta_im": float,
        "x_prime": float,
        "times": list,
        "omega": float,
        "t_max": float,
        "t_count": int,
        "field_index": int,
        "field_file": str,
        "checks": list,
    },
    "output": {"path": str, "format": str},
}

_DEFAULTS: dict[str, Any] = {
    "medium": {"eps0": 1.0, "mu0": 1.0, "omega_e": 1.0, "omega_m": 1.2},
    "grids": {
        "x": {"L": 20.0, "n": 1000},
        "lambda": {"min": 0.0, "max": 4.0, "count": 201, "panel_width": 0.25, "nodes": 16},
        "k": {"min": 0.0, "max": 4.0, "count": 81},
    },
    "params": {"k": 1.5, "lam": 2.5, "j": 1, "zeta_im": 0.5, "x_prime": 0.0, "times": [0.0, 5.0, 10.0], "t_max": 50.0, "t_count": 46,
               "field_index": 0},
    "output": {"path": ".", "format": "csv"},
}


@dataclass
class ScenarioConfig:
    scenario: str
    medium: MediumParams
    grids: dict[str, dict[str, Any]]
    params: dict[str, Any]
    output_path: Path
    output_format: str = "csv"
    seed: int = 0
    threads: int = 1
    raw: dict[str, Any] = field(default_factory=dict, repr=False)


def _check_keys(data: dict, schema: dict, where: str) -> None:
    for key, value in data.items():
        if key not in schema:
            raise ConfigError(f"unknown key '{where}{key}'")
        spec = schema[key]
        if isinstance(spec, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"'{where}{key}' must be a table")
            _check_keys(value, spec, f"{where}{key}.")
        elif spec is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"'{where}{key}' must be a number")
        elif spec is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"'{where}{key}' must be an integer")
        elif not isinstance(value, spec):
            raise ConfigError(f"'{where}{key}' must be of type {spec.__name__}")


def _merge(base: dict, top: dict) -> dict:
    out = {k: (dict(v) if isinstance(v, dict) else v) for k, v in base.items()}
    for k, v in top.items():
        out[k] = _merge(out.get(k, {}), v) if isinstance(v, dict) else v
    return out


def load_document(path: Path) -> dict:
    text = path.read_text()
    try:
        if path.suffix.lower() == ".toml":
            return tomllib.loads(text)
        return json.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _lift_medium(doc: dict) -> dict:
    """Accept eps0/mu0/omega_e/omega_m at top level as shorthand for [medium]."""
    flat = {k: doc[k] for k in _SCHEMA["medium"] if k in doc}
    if not flat:
        return doc
    nested = doc.get("medium", {})
    if not isinstance(nested, dict):
        raise ConfigError("'medium' must be a table")
    clash = sorted(set(flat) & set(nested))
    if clash:
        raise ConfigError(f"'{clash[0]}' given both at top level and in [medium]")
    rest = {k: v for k, v in doc.items() if k not in flat}
    rest["medium"] = {**nested, **flat}
    return rest


def parse_config(doc: dict, scenario: str | None = None, *, out: str | None = None, seed: int = 0,
                 threads: int = 1) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("the configuration must be a table")
    doc = _lift_medium(doc)
    _check_keys(doc, _SCHEMA, "")
    merged = _merge(_DEFAULTS, doc)
    name = scenario or merged.get("scenario")
    if name is None:
        raise ConfigError("no scenario given")
    if scenario and doc.get("scenario") not in (None, scenario):
        raise ConfigError(f"config scenario '{doc['scenario']}' does not match '{scenario}'")
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario '{name}'")
    med = merged["medium"]
    for key in ("eps0", "mu0", "omega_e", "omega_m"):
        v = med[key]
        if not math.isfinite(v) or v <= 0:
            raise ConfigError(f"{key} must be positive")
    medium = MediumParams(*(float(med[k]) for k in ("eps0", "mu0", "omega_e", "omega_m")))
    grids = merged["grids"]
    if grids["x"]["L"] <= 0 or grids["x"]["n"] < 16:
        raise ConfigError("grids.x needs L > 0 and n >= 16")
    for axis in ("lambda", "k"):
        g = grids[axis]
        if g["count"] < 2 or g["max"] <= g["min"]:
            raise ConfigError(f"grids.{axis} needs count >= 2 and max > min")
    fmt = merged["output"]["format"]
    if fmt not in ("csv", "json"):
        raise ConfigError("output.format must be 'csv' or 'json'")
    if threads < 1:
        raise ConfigError("--threads must be at least 1")
    path = Path(out) if out is not None else Path(merged["output"]["path"])
    return ScenarioConfig(name, medium, grids, merged["params"], path, fmt, seed, threads, doc)


# --- output ------------------------------------------------------------------------


def _split_complex(rows: list[dict]) -> list[dict]:
    out = []
    for row in rows:
        flat = {}
        for key, val in row.items():
            if isinstance(val, (complex, np.complexfloating)):
                flat[f"re_{key}"], flat[f"im_{key}"] = float(val.real), float(val.imag)
            elif isinstance(val, (np.floating, np.integer)):
                flat[key] = val.item()
            else:
                flat[key] = val
        out.append(flat)
    return out


class Writer:
    def __init__(self, cfg: ScenarioConfig):
        self.root = cfg.output_path
        self.fmt = cfg.output_format
        self.root.mkdir(parents=True, exist_ok=True)
        self.written: list[str] = []

    def table(self, name: str, rows: list[dict]) -> Path:
        rows = _split_complex(rows)
        if self.fmt == "json":
            return self.json(name, rows)
        path = self.root / f"{name}.csv"
        with path.open("w", newline="") as fh:
            if rows:
                w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
                w.writeheader()
                for row in rows:
                    w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
        self.written.append(path.name)
        return path

    def json(self, name: str, data) -> Path:
        path = self.root / f"{name}.json"
        path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n")
        self.written.append(path.name)
        return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _nan(v) -> float:
    v = float(v)
    return v if math.isfinite(v) else float("nan")


# --- scenarios ---------------------------------------------------------------------


def _axis(g: dict) -> np.ndarray:
    return np.linspace(g["min"], g["max"], g["count"])


def _require(params: dict, *names: str) -> list:
    missing = [n for n in names if n not in params]
    if missing:
        raise ConfigError(f"params.{missing[0]} is required for this scenario")
    return [params[n] for n in names]


def run_dispersion(cfg: ScenarioConfig, out: Writer) -> int:
    p = cfg.medium
    cc = cut_curves(p)
    rows = []
    for k in _axis(cfg.grids["k"]):
        lam_e = float(cc.lambdaE(k)) if abs(k) >= cc.kc else float("nan")
        rows.append({"k": float(k), "lambda0": float(cc.lambda0(k)), "lambdaI": float(cc.lambdaI(k)),
                     "lambdaD": float(cc.lambdaD(k)), "lambdaE": _nan(lam_e)})
    out.table("dispersion", rows)
    out.json("dispersion_summary", {"kc": cc.kc, "lambdac": cc.lambdac, "omega_m_over_sqrt2": p.omega_m / math.sqrt(2)})
    return 0


def run_zones(cfg: ScenarioConfig, out: Writer) -> int:
    p = cfg.medium
    ks, lams = _axis(cfg.grids["k"]), _axis(cfg.grids["lambda"])

    def row(k):
        return [{"k": float(k), "lambda": float(lam), "zone": classify(p, float(k), float(lam)).kind.value}
                for lam in lams]

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        rows = [r for chunk in pool.map(row, ks) for r in chunk]
    out.table("zones", rows)
    counts: dict[str, int] = {}
    for r in rows:
        counts[r["zone"]] = counts.get(r["zone"], 0) + 1
    out.json("zones_summary", {"counts": counts, "kc": cut_curves(p).kc})
    return 0


def _x_axis(cfg: ScenarioConfig, count: int = 401) -> np.ndarray:
    L = cfg.grids["x"]["L"]
    return np.linspace(-L, L, count)


def run_mode(cfg: ScenarioConfig, out: Writer) -> int:
    k, lam = _require(cfg.params, "k", "lam")
    j = cfg.params["j"]
    mode = ModeField(cfg.medium, k, lam, j)
    xs = _x_axis(cfg)
    vals = mode(xs)
    rows = [{"x": float(x), **{c: complex(vals[c][i]) for c in vals}} for i, x in enumerate(xs)]
    out.table("mode", rows)
    out.json("mode_summary", {"k": k, "lambda": lam, "j": j, "zone": str(mode.zone)})
    return 0


def run_green(cfg: ScenarioConfig, out: Writer) -> int:
    (k,) = _require(cfg.params, "k")
    re = cfg.params.get("zeta_re", 0.5 * cfg.medium.omega_m)
    zeta = complex(re, cfg.params["zeta_im"])
    xp = cfg.params["x_prime"]
    xs = _x_axis(cfg)
    res = green_eval(cfg.medium, k, zeta, xs, np.full_like(xs, xp))
    out.table("green", [{"x": float(x), "g": complex(v)} for x, v in zip(xs, res.value)])
    out.json("green_summary", {"k": k, "zeta": zeta, "x_prime": xp, "wronskian": res.wronskian})
    return 0


def _load_field(cfg: ScenarioConfig, k: float) -> StateField1D:
    """A test field from params.field_file, else the seeded Gaussian family."""
    path = cfg.params.get("field_file")
    if path is None:
        layout = collocated_layout(cfg.grids["x"]["L"], cfg.grids["x"]["n"])
        idx = cfg.params["field_index"]
        return checks.random_fields(idx + 1, cfg.seed)[idx].sample(layout, k)
    doc = load_document(Path(path))
    try:
        layout = collocated_layout(float(doc["L"]), int(doc["n"]))
        u = StateField1D(layout)
        for key, data in doc["components"].items():
            comp, side = key.split(":")
            arr = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data.get("im", 0.0), dtype=float)
            u.set_block(comp, int(side), arr)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: malformed field ({exc})") from exc
    return u


def _grid_kwargs(cfg: ScenarioConfig) -> dict:
    lg = cfg.grids["lambda"]
    kw = {"panel_width": lg["panel_width"], "nodes": lg["nodes"]}
    if "delta" in lg:
        kw["delta"] = lg["delta"]
    return kw


def run_transform(cfg: ScenarioConfig, out: Writer) -> int:
    (k,) = _require(cfg.params, "k")
    p = cfg.medium
    u = _load_field(cfg, k)
    grid = spectral_grid(p, k, x_spacing=u.layout.h, x_extent=u.layout.L, **_grid_kwargs(cfg))
    coeffs = forward(p, k, u, grid)
    rows = []
    for seg, vals in zip(grid.segments, coeffs.values):
        for j, v in sorted(vals.items()):
            rows += [{"zone": seg.zone.value, "j": j, "lambda": float(lam), "weight": float(w), "coeff": complex(c)}
                     for lam, w, c in zip(seg.lam, seg.weights, v)]
    out.table("transform", rows)
    back = adjoint(p, k, coeffs, u.layout)
    pu = project(p, k, u)
    out.json("transform_summary", {
        "k": k,
        "norm_u": u.norm(p),
        "norm_pu": pu.norm(p),
        "norm_coeffs": coeffs.norm(),
        "round_trip_rel": (back - pu).norm(p) / max(u.norm(p), 1e-300),
        "point_masses": [{"lambda": lam, "coeff": c} for lam, c in sorted(coeffs.point_mass.items())],
        "grid_nodes": grid.size,
    })
    return 0


def run_evolve(cfg: ScenarioConfig, out: Writer) -> int:
    (k,) = _require(cfg.params, "k")
    p = cfg.medium
    times = [float(t) for t in cfg.params["times"]]
    if any(t < 0 for t in times):
        raise ConfigError("params.times must be non-negative")
    u = _load_field(cfg, k)
    grid = spectral_grid(p, k, x_spacing=u.layout.h, x_extent=u.layout.L, t_max=max(times), **_grid_kwargs(cfg))
    omega = cfg.params.get("omega")
    rows, snaps = [], []
    if omega is None:
        coeffs = forward(p, k, u, grid)
        states = {t: adjoint(p, k, free_coefficients(coeffs, t), u.layout) for t in times}
    else:
        states = driven_evolve(DriveSpec(p, k, omega, u), times, grid=grid)
    for t in times:
        rows.append({"t": t, "norm": states[t].norm(p)})
        for b in u.layout.blocks:
            if b.comp == "E":
                vals = states[t].block("E", b.side)
                snaps += [{"t": t, "x": float(x), "E": complex(v)} for x, v in zip(b.x, vals)]
    out.table("evolve_norms", rows)
    out.table("evolve_snapshots", snaps)
    out.json("evolve_summary", {"k": k, "omega": omega, "times": times, "initial_norm": u.norm(p)})
    return 0


def run_resonance(cfg: ScenarioConfig, out: Writer) -> int:
    p = cfg.medium
    cc = cut_curves(p)
    k = cfg.params.get("k", 2.0 * cc.kc if math.isfinite(cc.kc) else 1.5)
    omega = cfg.params.get("omega", p.omega_m / math.sqrt(2))
    ts = np.linspace(0.0, cfg.params["t_max"], cfg.params["t_count"])
    u = _load_field(cfg, k)
    grid = spectral_grid(p, k, x_spacing=u.layout.h, x_extent=u.layout.L, t_max=float(ts[-1]), **_grid_kwargs(cfg))
    norms = driven_norms(DriveSpec(p, k, omega, u), ts, grid=grid)
    out.table("resonance", [{"t": float(t), "norm": float(n)} for t, n in zip(ts, norms)])
    tail = ts >= 0.1 * ts[-1]
    slope, icept = np.polyfit(ts[tail], norms[tail], 1)
    out.json("resonance_summary", {"k": k, "omega": omega, "slope": float(slope), "intercept": float(icept),
                                   "sup_norm": float(norms.max())})
    return 0


def run_validate(cfg: ScenarioConfig, out: Writer) -> int:
    only = set(cfg.params.get("checks") or []) or None
    results = checks.run_all(seed=cfg.seed, only=only)
    report = {"all_passed": all(r.passed for r in results), "checks": [r.as_dict() for r in results]}
    for r in results:
        print(r.line())
    out.json("validate_report", report)
    return 0 if report["all_passed"] else 1


RUNNERS = {
    "dispersion": run_dispersion,
    "zones": run_zones,
    "mode": run_mode,
    "green": run_green,
    "transform": run_transform,
    "evolve": run_evolve,
    "resonance": run_resonance,
    "validate": run_validate,
}


def run(cfg: ScenarioConfig) -> int:
    with threadpool_limits(limits=cfg.threads):
        return RUNNERS[cfg.scenario](cfg, Writer(cfg))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="drudespec", description="Spectral tools for a vacuum/Drude interface.")
    ap.add_argument("scenario", choices=SCENARIOS)
    ap.add_argument("--config", type=Path, help="JSON or TOML scenario file")
    ap.add_argument("--out", help="output directory (overrides output.path)")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized test fields")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = load_document(args.config) if args.config else {}
        cfg = parse_config(doc, args.scenario, out=args.out, seed=args.seed, threads=args.threads)
        return run(cfg)
    except (ConfigError, DomainError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
