"""Run configuration, per-mode drivers and record emitters behind the CLI."""

from __future__ import annotations

import configparser
import csv
import io
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Iterable

import numpy as np

from . import groups
from .kernel import (
    Cuboid,
    KernelCoeffs,
    Spherocuboid,
    Spherotriangle,
    discriminant,
    eval_kernel,
    geometry_coeffs,
)
from .solver import NumericalRangeError, SolutionReport, SolverConfig, multi_start_solve
from .symmetry import c_min, lemma_condition_check, theorem1_applies

MODES = ("solve", "coeffs", "sweep", "cmin-map", "verify-invariance", "repro-commutator")

GEOMETRY_FIELDS = {
    "cuboid": ("W", "B", "L"),
    "spherocuboid": ("W", "B", "L", "D"),
    "spherotriangle": ("l", "theta", "D"),
}
GEOMETRY_TYPES = {"cuboid": Cuboid, "spherocuboid": Spherocuboid, "spherotriangle": Spherotriangle}
# non-shape geometry keys, in record order
GEOMETRY_EXTRAS = ("c", "c1_value")

REPRO_C1 = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
REPRO_N_C2 = 21
REPRO_TOTAL = -20.0


class UsageError(ValueError):
    """Bad command line or configuration file."""


@dataclass
class RunConfig:
    mode: str
    coeffs: KernelCoeffs | None = None
    geometry: dict[str, Any] | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    axes: dict[str, list[float]] = field(default_factory=dict)
    workers: int = 1
    fmt: str = "csv"

    def validate(self) -> None:
        if self.mode not in MODES:
            raise UsageError(f"unknown mode {self.mode!r}")
        if self.fmt not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.fmt!r}")
        if self.workers < 1:
            raise UsageError("workers must be >= 1")
        needs_kernel = self.mode in ("solve", "verify-invariance")
        if self.mode == "coeffs" and self.geometry is None:
            raise UsageError("coeffs mode needs a [geometry] section or --geometry")
        if self.coeffs is not None and self.geometry is not None:
            raise UsageError("give either explicit coefficients or a geometry, not both")
        if needs_kernel and self.coeffs is None and self.geometry is None:
            raise UsageError(f"{self.mode} needs coefficients (--coeffs) or a geometry")
        if self.mode in ("sweep", "cmin-map"):
            if not self.axes or any(len(v) == 0 for v in self.axes.values()):
                raise UsageError(f"{self.mode} needs non-empty sweep axes")

    def to_dict(self) -> dict[str, Any]:
        d = {
            "mode": self.mode,
            "coeffs": None if self.coeffs is None else list(self.coeffs.as_tuple()),
            "geometry": self.geometry,
            "solver": asdict(self.solver),
            "axes": self.axes,
            "format": self.fmt,
        }
        d["solver"]["grid"] = list(self.solver.grid)
        return d


# ---------------------------------------------------------------------------
# config parsing


def parse_floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse number list {text!r}") from exc


def parse_grid(text: str) -> tuple[int, int, int]:
    try:
        sizes = tuple(int(tok) for tok in text.split(","))
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {text!r}") from exc
    if len(sizes) != 3:
        raise UsageError(f"grid needs three sizes NA,NB,NG, got {text!r}")
    return sizes


def parse_geometry(text: str) -> dict[str, Any]:
    """``kind:key=value,...``, e.g. ``spherotriangle:l=2,theta=1.0472,D=0.1,c=1``."""
    kind, _, rest = text.partition(":")
    geom: dict[str, Any] = {"kind": kind.strip()}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"bad geometry item {item!r}")
        geom[key.strip()] = parse_floats(val)
    return _check_geometry(geom)


def _check_geometry(geom: dict[str, Any]) -> dict[str, Any]:
    kind = geom.get("kind")
    if kind not in GEOMETRY_FIELDS:
        raise UsageError(f"geometry kind must be one of {sorted(GEOMETRY_FIELDS)}, got {kind!r}")
    allowed = set(GEOMETRY_FIELDS[kind]) | set(GEOMETRY_EXTRAS)
    out: dict[str, Any] = {"kind": kind}
    for key, val in geom.items():
        if key == "kind":
            continue
        if key not in allowed:
            raise UsageError(f"unknown {kind} parameter {key!r}")
        out[key] = val if isinstance(val, list) else [float(val)]
    missing = [k for k in GEOMETRY_FIELDS[kind] if k not in out]
    if missing:
        raise UsageError(f"{kind} geometry is missing {missing}")
    out.setdefault("c", [1.0])
    out.setdefault("c1_value", [0.0])
    return out


def geometry_points(geom: dict[str, Any]) -> list[dict[str, float]]:
    keys = list(GEOMETRY_FIELDS[geom["kind"]]) + list(GEOMETRY_EXTRAS)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(geom[k] for k in keys))]


def coeffs_from_point(kind: str, point: dict[str, float]) -> KernelCoeffs:
    shape = GEOMETRY_TYPES[kind](*(point[k] for k in GEOMETRY_FIELDS[kind]))
    try:
        return geometry_coeffs(shape, point["c"], point["c1_value"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def load_config(path: str | None, mode: str, overrides: dict[str, Any]) -> RunConfig:
    """Read an INI-style file, then apply command-line overrides (which win)."""
    cp = configparser.ConfigParser()
    cp.optionxform = str  # geometry keys are case sensitive (W, B, L, D)
    if path is not None:
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc

    solver_kw: dict[str, Any] = {}
    run_kw: dict[str, Any] = {}
    if cp.has_section("solver"):
        sec = cp["solver"]
        conv = {
            "grid": parse_grid,
            "damping": float,
            "tol": float,
            "max_iter": int,
            "starts": int,
            "seed": int,
            "probe_delta": float,
            "n_probes": int,
            "dedup_tol": float,
            "workers": int,
        }
        for key, raw in sec.items():
            if key not in conv:
                raise UsageError(f"unknown [solver] key {key!r}")
            try:
                val = conv[key](raw)
            except ValueError as exc:
                raise UsageError(f"bad value for {key}: {raw!r}") from exc
            if key == "workers":
                run_kw["workers"] = val
            else:
                solver_kw[key] = val
    if cp.has_section("output") and "format" in cp["output"]:
        run_kw["fmt"] = cp["output"]["format"].strip()

    coeffs = None
    if cp.has_section("kernel"):
        unknown = set(cp["kernel"]) - {"c1", "c2", "c3", "c4"}
        if unknown:
            raise UsageError(f"unknown [kernel] keys {sorted(unknown)}")
        try:
            coeffs = KernelCoeffs(**{k: float(v) for k, v in cp["kernel"].items()})
        except ValueError as exc:
            raise UsageError(f"bad [kernel] section: {exc}") from exc
    geometry = None
    if cp.has_section("geometry"):
        geometry = _check_geometry({k: (v if k == "kind" else parse_floats(v)) for k, v in cp["geometry"].items()})

    axes: dict[str, list[float]] = {}
    if mode in cp and mode in ("sweep", "cmin-map", "repro-commutator"):
        for key, raw in cp[mode].items():
            if key == "kind":
                continue
            axes[key] = parse_floats(raw)
        if mode == "sweep" and "kind" in cp[mode]:
            geometry = _check_geometry({"kind": cp[mode]["kind"], **axes})
            axes = {k: v for k, v in geometry.items() if k != "kind"}

    # command line wins
    for key in ("grid", "damping", "tol", "max_iter", "starts", "seed"):
        if overrides.get(key) is not None:
            solver_kw[key] = overrides[key]
    if overrides.get("workers") is not None:
        run_kw["workers"] = overrides["workers"]
    if overrides.get("format") is not None:
        run_kw["fmt"] = overrides["format"]
    if overrides.get("coeffs") is not None:
        coeffs, geometry = overrides["coeffs"], None
    if overrides.get("geometry") is not None:
        geometry, coeffs = overrides["geometry"], None

    rename = {"tol": "tol_res", "starts": "n_starts"}
    try:
        solver = SolverConfig(**{rename.get(k, k): v for k, v in solver_kw.items()})
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    cfg = RunConfig(mode=mode, coeffs=coeffs, geometry=geometry, solver=solver, axes=axes, **run_kw)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# records


def _geometry_record(kind: str, point: dict[str, float]) -> dict[str, Any]:
    rec: dict[str, Any] = {"geometry": kind}
    rec.update({f"geom_{k}": v for k, v in point.items()})
    return rec


def verdict_fields(coeffs: KernelCoeffs) -> dict[str, Any]:
    v = theorem1_applies(coeffs)
    return {
        "theorem_applies": v.applies,
        "theorem_branch": v.branch,
        "epsilon": math.nan if v.epsilon is None else v.epsilon,
        "epsilon_swapped": math.nan if v.epsilon_swapped is None else v.epsilon_swapped,
        "c1_ok": v.c1_ok,
    }


def solution_record(coeffs: KernelCoeffs, index: int, rep: SolutionReport) -> dict[str, Any]:
    diag = rep.diagnostics
    rec: dict[str, Any] = {
        "c1": coeffs.c1,
        "c2": coeffs.c2,
        "c3": coeffs.c3,
        "c4": coeffs.c4,
        "solution": index,
        "converged": rep.converged,
        "iterations": rep.iterations,
        "residual": rep.residual,
        "stability": rep.stability,
        "phase": diag.phase_label,
        "free_energy": rep.free_energy,
        "p_norm": rep.state.p_norm,
    }
    for name, vals in (("q1", diag.eigvals_Q1), ("q2", diag.eigvals_Q2)):
        for k, v in enumerate(vals, 1):
            rec[f"{name}_eig{k}"] = v
    rec["commutator_norm"] = diag.commutator_norm
    rec["shared_frame"] = diag.shared_frame is not None
    rec["p_aligned"] = diag.p_aligned
    rec["lemma_condition"] = lemma_condition_check(rep.state, coeffs.symmetry, tol=1e-8)
    rec.update(verdict_fields(coeffs))
    rec["error"] = ""
    return rec


def error_record(coeffs: KernelCoeffs, message: str) -> dict[str, Any]:
    rec: dict[str, Any] = {"c1": coeffs.c1, "c2": coeffs.c2, "c3": coeffs.c3, "c4": coeffs.c4}
    rec.update({"solution": -1, "converged": False, "error": message})
    return rec


def solve_point(args: tuple[int, KernelCoeffs, SolverConfig]) -> list[dict[str, Any]]:
    """Independent task: all distinct solutions at one parameter point."""
    index, coeffs, solver = args
    seed = int(np.random.SeedSequence([solver.seed, index]).generate_state(1)[0])
    try:
        reports = multi_start_solve(coeffs, replace(solver, seed=seed))
    except NumericalRangeError as exc:
        return [error_record(coeffs, str(exc))]
    return [solution_record(coeffs, k, r) for k, r in enumerate(reports)]


def _run_points(points: list[KernelCoeffs], cfg: RunConfig) -> list[list[dict[str, Any]]]:
    tasks = [(i, c, cfg.solver) for i, c in enumerate(points)]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(solve_point, tasks))
    return [solve_point(t) for t in tasks]


def kernel_points(cfg: RunConfig) -> list[tuple[KernelCoeffs, dict[str, Any]]]:
    """Coefficients for every point of the configured kernel source, with geometry columns."""
    if cfg.geometry is not None:
        kind = cfg.geometry["kind"]
        return [(coeffs_from_point(kind, pt), _geometry_record(kind, pt)) for pt in geometry_points(cfg.geometry)]
    if cfg.mode == "sweep":
        names = ("c1", "c2", "c3", "c4")
        unknown = set(cfg.axes) - set(names)
        if unknown:
            raise UsageError(f"unknown sweep axes {sorted(unknown)}")
        base = cfg.coeffs.as_tuple() if cfg.coeffs is not None else (0.0,) * 4
        lists = [cfg.axes.get(n, [base[k]]) for k, n in enumerate(names)]
        return [(KernelCoeffs(*combo), {}) for combo in itertools.product(*lists)]
    return [(cfg.coeffs, {})]


def cmd_solve(cfg: RunConfig) -> tuple[list[dict[str, Any]], int]:
    """Solve at every kernel point (one point unless a geometry lists several values)."""
    points = kernel_points(cfg)
    results = _run_points([c for c, _ in points], cfg)
    records = []
    for (coeffs, extra), recs in zip(points, results):
        for r in recs:
            records.append({**extra, **r})
    status = 0 if all(r["converged"] for r in records) else 2
    return records, status


cmd_sweep = cmd_solve


def cmd_coeffs(cfg: RunConfig) -> tuple[list[dict[str, Any]], int]:
    records = []
    for coeffs, extra in kernel_points(cfg):
        rec = {**extra, "c1": coeffs.c1, "c2": coeffs.c2, "c3": coeffs.c3, "c4": coeffs.c4}
        rec["discriminant"] = discriminant(coeffs)
        rec.update(verdict_fields(coeffs))
        records.append(rec)
    return records, 0


def cmd_cmin_map(cfg: RunConfig) -> tuple[list[dict[str, Any]], int]:
    """c_min over the product of user-supplied reference coefficient grids."""
    names = ("c2_0", "c3_0", "c4_0")
    unknown = set(cfg.axes) - set(names)
    if unknown or not all(n in cfg.axes for n in names):
        raise UsageError(f"cmin-map needs exactly the axes {names}")
    records = []
    for c2, c3, c4 in itertools.product(*(cfg.axes[n] for n in names)):
        records.append({"c2_0": c2, "c3_0": c3, "c4_0": c4, "c_min": c_min(c2, c3, c4)})
    return records, 0


def cmd_verify_invariance(cfg: RunConfig) -> tuple[list[dict[str, Any]], int]:
    records = []
    for coeffs, extra in kernel_points(cfg):
        for tag in groups.GROUP_TAGS:
            rep = groups.check_kernel_invariance(
                lambda P, co=coeffs: eval_kernel(co, P), tag, seed=cfg.solver.seed
            )
            records.append(
                {**extra, "c1": coeffs.c1, "c2": coeffs.c2, "c3": coeffs.c3, "c4": coeffs.c4,
                 "group": tag, "passed": rep.passed, "max_violation": rep.max_violation}
            )
    return records, 0


def repro_points(axes: dict[str, list[float]]) -> list[KernelCoeffs]:
    """Grid with c4 = 0 and c2 + c3 = total (both non-positive)."""
    unknown = set(axes) - {"c1", "n_c2", "total"}
    if unknown:
        raise UsageError(f"unknown repro-commutator keys {sorted(unknown)}")
    c1s = axes.get("c1", list(REPRO_C1))
    n_c2 = int(axes.get("n_c2", [REPRO_N_C2])[0])
    total = float(axes.get("total", [REPRO_TOTAL])[0])
    if n_c2 < 2 or total > 0:
        raise UsageError("repro-commutator needs n_c2 >= 2 and total <= 0")
    points = []
    for c1 in c1s:
        for k in range(n_c2):
            c2 = total * k / (n_c2 - 1)
            points.append(KernelCoeffs(c1, c2, total - c2, 0.0))
    return points


def cmd_repro_commutator(cfg: RunConfig) -> tuple[list[dict[str, Any]], int, dict[str, Any]]:
    """One record per parameter point with the largest commutator over its minimum candidates."""
    points = repro_points(cfg.axes)
    results = _run_points(points, cfg)
    records = []
    global_max = 0.0
    n_bad = 0
    for coeffs, recs in zip(points, results):
        minima = [r for r in recs if r["converged"] and r["stability"] == "minimum-candidate"]
        unconverged = sum(1 for r in recs if not r["converged"])
        n_bad += unconverged > 0
        worst = max((r["commutator_norm"] for r in minima), default=math.nan)
        if minima:
            global_max = max(global_max, worst)
        records.append(
            {"c1": coeffs.c1, "c2": coeffs.c2, "c3": coeffs.c3, "c4": coeffs.c4,
             "n_solutions": len(recs), "n_minima": len(minima), "n_unconverged": unconverged,
             "max_commutator_norm": worst,
             "max_p_norm": max((r["p_norm"] for r in minima), default=math.nan)}
        )
    summary = {"points": len(points), "unconverged_points": n_bad, "global_max_commutator_norm": global_max}
    return records, (0 if n_bad == 0 else 2), summary


# ---------------------------------------------------------------------------
# output


def format_value(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def _columns(records: Iterable[dict[str, Any]]) -> list[str]:
    cols: list[str] = []
    for rec in records:
        for k in rec:
            if k not in cols:
                cols.append(k)
    return cols


def to_csv(records: list[dict[str, Any]]) -> str:
    cols = _columns(records)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for rec in records:
        writer.writerow([format_value(rec[c]) if c in rec else "" for c in cols])
    return buf.getvalue()


def _jsonable(v: Any) -> Any:
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def to_json(config: dict[str, Any], records: list[dict[str, Any]]) -> str:
    # inf and nan are written as Infinity/NaN, which Python's json reads back
    return json.dumps({"config": _jsonable(config), "records": _jsonable(records)}, indent=1) + "\n"


def parse_csv_value(s: str) -> Any:
    if s == "":
        return s
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(text: str) -> list[dict[str, Any]]:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    return [{k: parse_csv_value(v) for k, v in zip(header, row)} for row in body]


def emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)
