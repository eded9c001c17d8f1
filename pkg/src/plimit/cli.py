"""Command-line interface: mesh, solve, limits, sweep, counterexample,
validate-energy.

Configs are YAML (schema shipped in docs/config_schema.yaml); results are
written as CSV/JSON with full precision plus PNG figures, and every run
records a manifest.json with the sha256 of each produced file.  Exit code 0
means every requested check passed; 2 flags bad input (config violations,
missing files, refusing to overwrite); 1 flags failed checks or solves.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import energy as energy_mod
from . import limit_lab, report
from .errors import ConfigError, PlimitError
from .expressions import Expr, as_point_function
from .geometry import (
    DomainSpec,
    REGION_LETTERS,
    build_domain,
    extract_submesh,
    read_mesh,
    validate_mesh,
    validate_regions,
    write_mesh,
)
from .solver import (
    BoundaryCondition,
    SolveSettings,
    _p1,
    element_gradient_magnitude,
    minimize,
    solve_limit_B_pei,
    solve_limit_pec,
)

logger = logging.getLogger("plimit")

FMT = "%.17g"  # full double precision for all delimited output

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2


@dataclass
class ExperimentConfig:
    """Validated experiment description."""

    p: float
    q: float
    f: str
    domain: DomainSpec | None = None
    mesh_file: str | None = None
    density_B: dict = field(default_factory=lambda: {"kind": "PowerLaw", "exponent": 2.0})
    density_A: dict = field(default_factory=lambda: {"kind": "PowerLaw", "exponent": 3.0})
    zero_mean: bool = True
    lambdas: list = field(default_factory=lambda: [1.0, 10.0, 100.0, 1000.0, 10000.0])
    settings: dict = field(default_factory=dict)
    fi_tol_rel: float = 0.02
    bc_mode: str = "none"        # solve subcommand only
    lam: float = 1.0             # solve subcommand only
    normalize_p: float = 0.0     # solve subcommand only
    inner_values: object = None  # solve subcommand, prescribed mode only
    output: str | None = None

    def emit(self) -> dict:
        data = asdict(self)
        if self.domain is not None:
            dom = {k: v for k, v in asdict(self.domain).items()}
            dom["inclusion_center"] = list(dom["inclusion_center"])
            dom["inclusions"] = [list(i) for i in dom["inclusions"]]
            data["domain"] = dom
        return data

    def solver_settings(self) -> SolveSettings:
        return SolveSettings(**self.settings)


def _boundary_mean_estimate(domain: DomainSpec, f_text: str) -> float:
    """Parse-time zero-average probe of f on the parametric outer boundary."""
    fn = as_point_function(f_text)
    if domain.shape in ("annulus", "disk_with_inclusion"):
        theta = 2.0 * np.pi * np.arange(4096) / 4096
        pts = domain.r_outer * np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return float(fn(pts).mean())
    s = domain.half_width
    t = np.linspace(-s, s, 1025)
    sides = [np.stack([t, np.full_like(t, -s)], axis=1),
             np.stack([np.full_like(t, s), t], axis=1),
             np.stack([t, np.full_like(t, s)], axis=1),
             np.stack([np.full_like(t, -s), t], axis=1)]
    return float(np.concatenate([fn(p) for p in sides]).mean())


def parse_config(path, for_limits: bool = True) -> ExperimentConfig:
    """Load and validate a config file, reporting every violation at once."""
    path = Path(path)
    if not path.exists():
        raise ConfigError([f"config file not found: {path}"])
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError([f"config {path} must be a mapping"])
    return config_from_dict(raw, base_dir=path.parent, for_limits=for_limits)


def config_from_dict(raw: dict, base_dir: Path = Path("."), for_limits: bool = True) -> ExperimentConfig:
    problems = []
    known = set(ExperimentConfig.__dataclass_fields__)
    for key in raw:
        if key not in known:
            problems.append(f"unknown key {key!r}")

    p = raw.get("p")
    q = raw.get("q")
    for name, val in (("p", p), ("q", q)):
        if val is None:
            problems.append(f"missing exponent {name!r}")
        elif not isinstance(val, (int, float)) or val <= 1:
            problems.append(f"exponent {name} must be a real > 1, got {val!r}")
    if for_limits and isinstance(p, (int, float)) and isinstance(q, (int, float)) and p == q:
        problems.append(
            "unsupported: p == q (equal growth exponents are a single-phase "
            "problem treated elsewhere; limit experiments need p != q)"
        )

    f_text = raw.get("f")
    if not f_text:
        problems.append("missing boundary data expression 'f'")
    else:
        try:
            Expr(str(f_text))
        except ConfigError as exc:
            problems.extend(exc.violations)

    domain = None
    mesh_file = raw.get("mesh_file")
    if mesh_file is not None:
        mesh_path = (base_dir / mesh_file).resolve() if not Path(mesh_file).is_absolute() else Path(mesh_file)
        if not mesh_path.exists():
            problems.append(f"mesh file not found: {mesh_path}")
        else:
            mesh_file = str(mesh_path)
    elif "domain" in raw:
        dom = dict(raw["domain"])
        try:
            if "inclusion_center" in dom:
                dom["inclusion_center"] = tuple(dom["inclusion_center"])
            if "inclusions" in dom:
                dom["inclusions"] = [tuple(i) for i in dom["inclusions"]]
            domain = DomainSpec(**dom)
            problems.extend(domain.validate())
        except TypeError as exc:
            problems.append(f"bad domain spec: {exc}")
    else:
        problems.append("config needs either 'domain' or 'mesh_file'")

    for side in ("density_B", "density_A"):
        d = raw.get(side)
        if d is None:
            continue
        if isinstance(d, str):
            dpath = (base_dir / d).resolve() if not Path(d).is_absolute() else Path(d)
            if not dpath.exists():
                problems.append(f"{side} file not found: {dpath}")
                continue
            with open(dpath) as fh:
                d = yaml.safe_load(fh)
            raw[side] = d
        try:
            energy_mod.density_from_dict(d)
        except ConfigError as exc:
            problems.extend(f"{side}: {v}" for v in exc.violations)
        except PlimitError as exc:
            problems.append(f"{side}: {exc}")

    lambdas = raw.get("lambdas", [1.0, 10.0, 100.0, 1000.0, 10000.0])
    if for_limits:
        if (not isinstance(lambdas, (list, tuple)) or len(lambdas) < 4
                or any(not isinstance(x, (int, float)) for x in lambdas)
                or any(b <= a for a, b in zip(lambdas, lambdas[1:]))):
            problems.append("lambdas must be a strictly increasing list of at least 4 reals")

    zero_mean = bool(raw.get("zero_mean", True))
    if zero_mean and domain is not None and f_text:
        try:
            mean = _boundary_mean_estimate(domain, str(f_text))
            fn = as_point_function(str(f_text))
            scale = float(np.abs(fn(np.array([[domain.r_outer if domain.shape != "square_with_inclusions"
                                               else domain.half_width, 0.0]]))).max()) + 1e-300
            if abs(mean) > 1e-6 * max(scale, 1.0):
                problems.append(
                    f"boundary data {f_text!r} is not zero-average on the outer boundary "
                    f"(mean ~ {mean:.3e}) while zero_mean is set"
                )
        except ConfigError:
            pass

    settings = raw.get("settings", {}) or {}
    try:
        SolveSettings(**settings)
    except (TypeError, PlimitError) as exc:
        problems.append(f"bad settings: {exc}")

    bc_mode = raw.get("bc_mode", "none")
    if bc_mode not in ("none", "natural", "tied_constant", "prescribed", "pei", "pec"):
        problems.append(f"unknown bc_mode {bc_mode!r}")
    if bc_mode == "prescribed" and raw.get("inner_values") is None:
        problems.append("bc_mode 'prescribed' needs inner_values")

    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(
        p=float(p), q=float(q), f=str(f_text), domain=domain, mesh_file=mesh_file,
        density_B=raw.get("density_B", {"kind": "PowerLaw", "exponent": float(p)}),
        density_A=raw.get("density_A", {"kind": "PowerLaw", "exponent": float(q)}),
        zero_mean=zero_mean, lambdas=[float(x) for x in lambdas], settings=settings,
        fi_tol_rel=float(raw.get("fi_tol_rel", 0.02)), bc_mode=bc_mode,
        lam=float(raw.get("lam", 1.0)), normalize_p=float(raw.get("normalize_p", 0.0)),
        inner_values=raw.get("inner_values"), output=raw.get("output"),
    )


def emit_config(config: ExperimentConfig, path):
    with open(path, "w") as fh:
        yaml.safe_dump(config.emit(), fh, sort_keys=False)


# -- output helpers -----------------------------------------------------------


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


class OutputDir:
    """Tracks produced files and writes the closing manifest."""

    def __init__(self, root, force: bool, command: str, meta: dict | None = None):
        self.root = Path(root)
        self.command = command
        self.meta = meta or {}
        self.files: list[str] = []
        manifest = self.root / "manifest.json"
        if manifest.exists() and not force:
            raise ConfigError(
                [f"output directory already holds results ({manifest}); re-run with --force"]
            )
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.root / name

    def write_json(self, name: str, payload):
        with open(self.path(name), "w") as fh:
            if isinstance(payload, str):
                fh.write(payload)
            else:
                json.dump(payload, fh, indent=2)
            fh.write("\n")

    def finalize(self, status: dict):
        manifest = {
            "command": self.command,
            **self.meta,
            "status": status,
            "files": {name: _sha256(self.root / name) for name in self.files},
        }
        with open(self.root / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")


def write_field_csv(path, mesh, values):
    with open(path, "w") as fh:
        fh.write("node,x1,x2,value\n")
        for i, ((x, y), v) in enumerate(zip(mesh.nodes, values)):
            fh.write(f"{i},{FMT % x},{FMT % y},{FMT % v}\n")


def write_elements_csv(path, mesh, regions, values):
    p1 = _p1(mesh)
    gm = element_gradient_magnitude(mesh, values)
    with open(path, "w") as fh:
        fh.write("element,cx,cy,grad_mag,region\n")
        for t in range(mesh.n_triangles):
            reg = REGION_LETTERS[int(regions.element_region[t])] if regions is not None else "B"
            fh.write(
                f"{t},{FMT % p1.centroids[t, 0]},{FMT % p1.centroids[t, 1]},"
                f"{FMT % gm[t]},{reg}\n"
            )


def write_sweep_csv(path, records):
    cols = limit_lab.SweepRecord.COLUMNS
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for rec in records:
            row = []
            for c in cols:
                v = getattr(rec, c)
                if isinstance(v, bool):
                    row.append(str(int(v)))
                elif isinstance(v, float):
                    row.append(FMT % v)
                else:
                    row.append(str(v))
            fh.write(",".join(row) + "\n")


def _load_mesh(config: ExperimentConfig):
    if config.mesh_file:
        mesh, regions = read_mesh(config.mesh_file)
    else:
        mesh, regions = build_domain(config.domain)
    validate_mesh(mesh)
    validate_regions(mesh, regions)
    return mesh, regions


def _densities(config: ExperimentConfig):
    db = energy_mod.density_from_dict(dict(config.density_B, exponent=config.density_B.get("exponent", config.p)))
    da = energy_mod.density_from_dict(dict(config.density_A, exponent=config.density_A.get("exponent", config.q)))
    return db, da


def _resolve_out(args, config=None, default_name="plimit_out"):
    if args.out:
        return args.out
    if config is not None and config.output:
        return config.output
    return default_name


# -- subcommand implementations -------------------------------------------------


def cmd_mesh(args) -> int:
    with open(args.spec) as fh:
        raw = yaml.safe_load(fh)
    dom = dict(raw["domain"] if "domain" in raw else raw)
    if "inclusion_center" in dom:
        dom["inclusion_center"] = tuple(dom["inclusion_center"])
    if "inclusions" in dom:
        dom["inclusions"] = [tuple(i) for i in dom["inclusions"]]
    spec = DomainSpec(**dom)
    problems = spec.validate()
    if problems:
        raise ConfigError(problems)
    mesh, regions = build_domain(spec)
    validate_mesh(mesh)
    validate_regions(mesh, regions)
    out = Path(args.out)
    if out.exists() and not args.force:
        raise ConfigError([f"{out} exists; re-run with --force"])
    out.parent.mkdir(parents=True, exist_ok=True)
    write_mesh(out, mesh, regions)
    report.figure_mesh(mesh, regions, out.parent / (out.stem + ".png"))
    print(f"mesh: {mesh.n_nodes} nodes, {mesh.n_triangles} triangles -> {out}")
    return EXIT_OK


def cmd_solve(args) -> int:
    config = parse_config(args.config, for_limits=False)
    mesh, regions = _load_mesh(config)
    db, da = _densities(config)
    settings = config.solver_settings()
    out = OutputDir(_resolve_out(args, config, "plimit_solve"), args.force, "solve",
                    {"config": config.emit(), "seed": args.seed, "threads": args.threads})
    mode = config.bc_mode
    csv_mesh, csv_regions = mesh, regions
    if mode == "pei":
        mesh_b, _ = extract_submesh(mesh, regions, "B")
        res = solve_limit_B_pei(mesh_b, db.weight, config.p, config.f, settings)
        csv_mesh, csv_regions = mesh_b, None
    elif mode == "pec":
        res = solve_limit_pec(mesh, regions, db.weight, config.p, config.f, settings,
                              zero_mean=config.zero_mean)
    else:
        bc = BoundaryCondition(outer=config.f, inner_mode=mode,
                               inner_values=config.inner_values, zero_mean=config.zero_mean)
        res = minimize(mesh, regions, db, da, bc, lam=config.lam,
                       normalize_p=config.normalize_p, settings=settings)
    out.write_json("result.json", {
        "energy": res.energy, "iterations": res.iterations,
        "residual": res.final_residual, "converged": res.converged,
        "diagnostics": res.diagnostics,
    })
    write_field_csv(out.path("field.csv"), csv_mesh, res.field.values)
    write_elements_csv(out.path("elements.csv"), csv_mesh, csv_regions, res.field.values)
    report.figure_field(csv_mesh, res.field.values, out.path("field.png"))
    out.finalize({"converged": res.converged})
    print(f"solve: energy={res.energy:.10g} iterations={res.iterations} "
          f"converged={res.converged}")
    return EXIT_OK if res.converged else EXIT_CHECK_FAILED


def cmd_limits(args) -> int:
    config = parse_config(args.config)
    mesh, regions = _load_mesh(config)
    db, da = _densities(config)
    out = OutputDir(_resolve_out(args, config, "plimit_limits"), args.force, "limits",
                    {"config": config.emit(), "seed": args.seed, "threads": args.threads})
    bundle = limit_lab.compute_limit_bundle(
        mesh, regions, db.weight, da.weight, config.p, config.q, config.f,
        config.solver_settings(),
    )
    write_field_csv(out.path("limit_w.csv"), mesh, bundle.w.values)
    report.figure_field(mesh, bundle.w.values, out.path("limit_w.png"), "conducting limit")
    if bundle.regime == limit_lab.REGIME_Q_LESS_P:
        write_field_csv(out.path("limit_v_B.csv"), bundle.mesh_b, bundle.v_b.values)
        write_field_csv(out.path("limit_v_A.csv"), bundle.mesh_a, bundle.v_a.values)
        report.figure_field(bundle.mesh_b, bundle.v_b.values, out.path("limit_v_B.png"),
                            "insulating limit (outer)")
    converged = all(r.converged for r in bundle.results.values())
    out.write_json("limits.json", {
        "regime": bundle.regime, "b_energy": bundle.b_energy,
        "solves": {k: {"energy": v.energy, "iterations": v.iterations,
                       "converged": v.converged} for k, v in bundle.results.items()},
    })
    out.finalize({"converged": converged})
    print(f"limits: regime={bundle.regime} b_energy={bundle.b_energy:.10g}")
    return EXIT_OK if converged else EXIT_CHECK_FAILED


def run_experiment(config: ExperimentConfig, out: OutputDir) -> dict:
    """mesh -> limits -> sweep -> checks pipeline; returns the status dict."""
    mesh, regions = _load_mesh(config)
    db, da = _densities(config)
    settings = config.solver_settings()

    write_mesh(out.path("mesh.txt"), mesh, regions)
    report.figure_mesh(mesh, regions, out.path("mesh.png"))

    bundle = limit_lab.compute_limit_bundle(
        mesh, regions, db.weight, da.weight, config.p, config.q, config.f, settings
    )
    write_field_csv(out.path("limit_w.csv"), mesh, bundle.w.values)
    if bundle.regime == limit_lab.REGIME_Q_LESS_P:
        write_field_csv(out.path("limit_v_B.csv"), bundle.mesh_b, bundle.v_b.values)
        write_field_csv(out.path("limit_v_A.csv"), bundle.mesh_a, bundle.v_a.values)
    out.write_json("limits.json", {"regime": bundle.regime, "b_energy": bundle.b_energy})

    records, fields = limit_lab.run_lambda_sweep(
        mesh, regions, db, da, config.p, config.q, config.f, config.lambdas, bundle,
        settings, keep_fields=True,
    )
    write_sweep_csv(out.path("sweep.csv"), records)
    for i, (rec, fld) in enumerate(zip(records, fields)):
        write_field_csv(out.path(f"field_{i:02d}.csv"), mesh, fld.values)
    write_elements_csv(out.path("elements_final.csv"), mesh, regions, fields[-1].values)
    report.figure_sweep(records, out.path("sweep.png"))
    report.figure_field(mesh, fields[-1].values, out.path("field_final.png"),
                        f"normalized solution, lambda={records[-1].lam:g}")

    fi = limit_lab.check_fundamental_inequality(records[-3:], bundle, db.weight,
                                                tol_rel=config.fi_tol_rel)
    checks = {
        "all_converged": all(r.converged for r in records),
        "bounds_ok": all(r.bound_56_ok and r.bound_57_ok for r in records),
        "fundamental_inequality": fi,
        "dist_B_decreasing": all(
            b.dist_to_limit_B < a.dist_to_limit_B for a, b in zip(records, records[1:])
        ),
    }
    checks["ok"] = bool(
        checks["all_converged"] and checks["bounds_ok"] and fi["ok"]
        and checks["dist_B_decreasing"]
    )
    out.write_json("checks.json", checks)
    return checks


def cmd_sweep(args) -> int:
    config = parse_config(args.config)
    out = OutputDir(_resolve_out(args, config, "plimit_sweep"), args.force, "sweep",
                    {"config": config.emit(), "seed": args.seed, "threads": args.threads})
    try:
        checks = run_experiment(config, out)
    except PlimitError as exc:
        out.finalize({"ok": False, "error": str(exc)})
        raise
    out.finalize(checks)
    print(f"sweep: checks {'passed' if checks['ok'] else 'FAILED'} "
          f"(bounds={checks['bounds_ok']}, fi={checks['fundamental_inequality']['ok']}, "
          f"monotone={checks['dist_B_decreasing']})")
    return EXIT_OK if checks["ok"] else EXIT_CHECK_FAILED


def cmd_counterexample(args) -> int:
    out = OutputDir(_resolve_out(args, None, "plimit_counterexample"), args.force, "counterexample",
                    {"seed": args.seed, "threads": args.threads,
                     "params": {"r": args.r, "L": args.L, "n": args.n,
                                "lambda2_1": args.lambda2_1, "q": args.q,
                                "n_radial": args.n_radial}})
    rep = limit_lab.run_counterexample(
        big_l=args.L, lambda2_1=args.lambda2_1, r=args.r, n_max=args.n,
        n_radial=args.n_radial, q=args.q, progress=lambda msg: print("  " + msg),
    )
    out.write_json("counterexample.json", rep.to_json())
    report.figure_counterexample(rep, out.path("counterexample.png"))
    density = energy_mod.oscillating_psi(args.L, args.lambda2_1, args.n)
    report.figure_psi(density, out.path("density.png"))
    ok = rep.verdict is True and (rep.control_ok in (True, None))
    out.finalize({"verdict": rep.verdict, "degraded": rep.degraded,
                  "control_ok": rep.control_ok, "ok": ok})
    print(f"counterexample: l1={rep.l1:.4f} l2={rep.l2:.4f} verdict={rep.verdict} "
          f"degraded={rep.degraded} control_spread={rep.control_spread}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_validate_energy(args) -> int:
    with open(args.density) as fh:
        data = yaml.safe_load(fh)
    density = energy_mod.density_from_dict(data)
    out = OutputDir(_resolve_out(args, None, "plimit_validate_energy"), args.force, "validate-energy",
                    {"seed": args.seed, "threads": args.threads, "density": data})
    rng = np.random.default_rng(args.seed)
    pts = rng.uniform(-1.0, 1.0, size=(args.n_x, 2))
    es = np.geomspace(max(args.e_max * 1e-6, 1e-12), args.e_max, args.n_e)
    rep = energy_mod.check_growth_bounds(density, pts, es)
    out.write_json("growth_bounds.json", rep.to_json())
    schedule = np.geomspace(max(args.e_max * 1e-4, 1e-10), args.e_max, max(args.n_e, 12))
    asym = energy_mod.estimate_asymptotic_weight(density, pts[0], schedule)
    out.write_json("asymptotic_weight.json", {
        "weight_estimate": asym["weight_estimate"],
        "oscillation": asym["oscillation"],
        "certified": energy_mod.certifies_asymptotic_weight(asym),
    })
    if density.kind == "OscillatingPsi":
        report.figure_psi(density, out.path("density.png"))
    out.finalize({"verdict": rep.verdict})
    print(f"validate-energy: growth bounds {'pass' if rep.verdict else 'FAIL'} "
          f"({len(rep.violations)} violations); asymptotic oscillation "
          f"{asym['oscillation']:.3e}")
    return EXIT_OK if rep.verdict else EXIT_CHECK_FAILED


def _add_common(sub):
    sub.add_argument("--out", default=None,
                     help="output directory (default: the config's output key, "
                          "else plimit_<command>)")
    sub.add_argument("--force", action="store_true", help="overwrite existing results")
    sub.add_argument("--threads", type=int, default=1, help="BLAS/OpenMP thread cap")
    sub.add_argument("--seed", type=int, default=0, help="seed for randomized validators")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="plimit",
        description="Two-phase conductivity solver and large-boundary-data limit laboratory",
    )
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("mesh", help="generate a mesh from a domain spec")
    s.add_argument("--spec", required=True, help="domain spec YAML")
    s.add_argument("--out", required=True, help="output mesh file")
    s.add_argument("--force", action="store_true")
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(fn=cmd_mesh)

    s = sub.add_parser("solve", help="single minimization from a solve request")
    s.add_argument("--config", required=True)
    _add_common(s)
    s.set_defaults(fn=cmd_solve)

    s = sub.add_parser("limits", help="compute the limit solutions")
    s.add_argument("--config", required=True)
    _add_common(s)
    s.set_defaults(fn=cmd_limits)

    s = sub.add_parser("sweep", help="lambda sweep with limit distances and checks")
    s.add_argument("--config", required=True)
    _add_common(s)
    s.set_defaults(fn=cmd_sweep)

    s = sub.add_parser("counterexample", help="oscillating-density verdict run")
    s.add_argument("--r", type=float, default=10.0)
    s.add_argument("--L", type=float, default=11.0)
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--lambda2-1", dest="lambda2_1", type=float, default=1.0)
    s.add_argument("--q", type=float, default=3.0)
    s.add_argument("--n-radial", dest="n_radial", type=int, default=37)
    _add_common(s)
    s.set_defaults(fn=cmd_counterexample)

    s = sub.add_parser("validate-energy", help="growth/asymptotic validators for a density")
    s.add_argument("--density", required=True, help="density YAML")
    s.add_argument("--e-max", dest="e_max", type=float, default=1e4)
    s.add_argument("--n-e", dest="n_e", type=int, default=64)
    s.add_argument("--n-x", dest="n_x", type=int, default=32)
    _add_common(s)
    s.set_defaults(fn=cmd_validate_energy)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    threads = str(getattr(args, "threads", 1))
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, threads)
    try:
        return args.fn(args)
    except ConfigError as exc:
        for v in exc.violations:
            print(f"error: {v}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except PlimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
