"""Command line front end.

Scenarios are described by a YAML file and run through subcommands::

    slowlight simulate  --config scenario.yaml --out results
    slowlight trajectory --config scenario.yaml
    slowlight stop      --config scenario.yaml
    slowlight verify    --config scenario.yaml --seed 7
    slowlight sweep     --config scenario.yaml --param alpha --values 1,2,4

Each command writes one CSV table whose header records the
configuration hash, the command and the seed, so identical inputs
produce byte-identical outputs.  Exit codes: 0 success, 1 invalid
configuration or input, 2 solver divergence, 3 verification failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .background import (
    BackgroundSolution,
    ConstantField,
    ControlField,
    ExponentialOffField,
    InstantOffField,
    SampledField,
    TanhRampField,
    TauGrid,
    default_grid,
    solve_background,
)
from .dynamics import stop_report, trajectory
from .errors import DivergenceError, SlowlightError, ValidationError
from .model import PhysicalParams, SpectralPoint, spectral_derive
from .soliton import phase_slopes, sample_grid
from .verify import convergence_study, invariant_suite

__all__ = ["main", "Scenario", "load_config", "build_scenario"]

_FLOAT_FMT = "%.12e"


def load_config(path) -> dict:
    """Load a YAML scenario description."""
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"config: no such file {p}")
    with open(p, "r") as fh:
        try:
            cfg = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ValidationError(f"config: not valid YAML ({exc})") from exc
    if not isinstance(cfg, dict):
        raise ValidationError("config: top level must be a mapping")
    return cfg


def _as_float(value, path: str) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{path}: expected a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ValidationError(f"{path}: must be finite")
    return out


def _as_int(value, path: str) -> int:
    try:
        out = int(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{path}: expected an integer, got {value!r}") from None
    return out


def _as_complex(value, path: str) -> complex:
    if isinstance(value, dict):
        re = _as_float(value.get("re", 0.0), f"{path}.re")
        im = _as_float(value.get("im", 0.0), f"{path}.im")
        return complex(re, im)
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValidationError(f"{path}: expected [re, im]")
        return complex(_as_float(value[0], path), _as_float(value[1], path))
    return complex(_as_float(value, path), 0.0)


def _section(cfg: dict, name: str, required: bool = True) -> dict:
    sec = cfg.get(name)
    if sec is None:
        if required:
            raise ValidationError(f"config: missing section {name!r}")
        return {}
    if not isinstance(sec, dict):
        raise ValidationError(f"config: section {name!r} must be a mapping")
    return sec


def _load_samples(path: Path):
    """Read a 3-column sampled field: tau, Re Omega, Im Omega."""
    if not path.is_file():
        raise ValidationError(f"field.path: no such file {path}")
    lines = [ln for ln in path.read_text().splitlines()
             if ln.strip() and not ln.lstrip().startswith("#")]
    delim = "," if (lines and "," in lines[0]) else None
    try:
        data = np.loadtxt(str(path), comments="#", delimiter=delim, ndmin=2)
    except ValueError as exc:
        raise ValidationError(f"field.path: could not parse {path} ({exc})") from exc
    if data.shape[1] != 3:
        raise ValidationError(
            f"field.path: expected 3 columns (tau, re, im), got {data.shape[1]}"
        )
    return data[:, 0], data[:, 1] + 1j * data[:, 2]


def build_field(sec: dict, base_dir: Path) -> ControlField:
    """Construct the controlling field from its config section."""
    variant = sec.get("variant")
    if variant is None:
        raise ValidationError("field.variant: required")
    variant = str(variant).lower().replace("-", "_")
    if variant == "sampled":
        if "path" not in sec:
            raise ValidationError("field.path: required for a sampled field")
        taus, values = _load_samples(base_dir / str(sec["path"]))
        left = (_as_complex(sec["left_asymptote"], "field.left_asymptote")
                if "left_asymptote" in sec else complex(values[0]))
        right = (_as_complex(sec["right_asymptote"], "field.right_asymptote")
                 if "right_asymptote" in sec else complex(values[-1]))
        return SampledField(taus=taus, values=values,
                            left_asymptote=left, declared_right=right)
    if "omega0" not in sec:
        raise ValidationError("field.omega0: required")
    omega0 = _as_complex(sec["omega0"], "field.omega0")
    if variant == "constant":
        return ConstantField(amplitude=omega0)
    if variant == "instant_off":
        return InstantOffField(
            amplitude=omega0,
            tau_off=_as_float(sec.get("tau_off", 0.0), "field.tau_off"),
        )
    if variant == "exponential_off":
        if "alpha" not in sec:
            raise ValidationError("field.alpha: required for exponential_off")
        return ExponentialOffField(
            amplitude=omega0, alpha=_as_float(sec["alpha"], "field.alpha"),
        )
    if variant == "tanh_ramp":
        if "alpha" not in sec:
            raise ValidationError("field.alpha: required for tanh_ramp")
        return TanhRampField(
            amplitude=omega0,
            alpha=_as_float(sec["alpha"], "field.alpha"),
            tau_off=_as_float(sec.get("tau_off", 0.0), "field.tau_off"),
        )
    raise ValidationError(f"field.variant: unknown variant {variant!r}")


@dataclass(frozen=True)
class Scenario:
    """A fully resolved scenario ready to run."""

    params: PhysicalParams
    spectral: SpectralPoint
    field: ControlField
    grid: TauGrid
    zeta_window: Optional[tuple]
    method: str
    tol: float
    max_iter: int
    seed: int
    out_dir: Path
    config_hash: str

    def solve(self) -> BackgroundSolution:
        return solve_background(
            self.field, self.spectral, self.grid,
            method=self.method, tol=self.tol, max_iter=self.max_iter,
        )


def _hash_config(cfg: dict, field: ControlField) -> str:
    payload = dict(cfg)
    if isinstance(field, SampledField):
        digest = hashlib.sha256(field.taus.tobytes() + field.values.tobytes())
        payload["_samples"] = digest.hexdigest()
    blob = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def build_scenario(cfg: dict, base_dir: Path = Path("."),
                   out: Optional[str] = None, tol: Optional[float] = None,
                   seed: Optional[int] = None) -> Scenario:
    """Resolve a config mapping into a validated :class:`Scenario`."""
    phys_sec = _section(cfg, "physical")
    params = PhysicalParams(
        nu0=_as_float(phys_sec.get("nu0", 1.0), "physical.nu0"),
        delta=_as_float(phys_sec.get("delta", 0.0), "physical.delta"),
        c=_as_float(phys_sec.get("c", 1.0), "physical.c"),
        x0=_as_float(phys_sec.get("x0", 0.0), "physical.x0"),
    )
    spec_sec = _section(cfg, "spectral")
    if "lambda" not in spec_sec:
        raise ValidationError("spectral.lambda: required")
    lam = _as_complex(spec_sec["lambda"], "spectral.lambda")
    field = build_field(_section(cfg, "field"), base_dir)
    spectral = spectral_derive(lam, field.omega0)

    grid_sec = _section(cfg, "grid", required=False)
    if grid_sec:
        tau_min = _as_float(grid_sec.get("tau_min"), "grid.tau_min")
        tau_max = _as_float(grid_sec.get("tau_max"), "grid.tau_max")
        if "n" in grid_sec:
            grid = TauGrid(tau_min=tau_min, tau_max=tau_max,
                           n=_as_int(grid_sec["n"], "grid.n"))
        elif "h" in grid_sec:
            grid = TauGrid.from_spacing(tau_min, tau_max,
                                        _as_float(grid_sec["h"], "grid.h"))
        else:
            raise ValidationError("grid: need either n or h")
    else:
        grid = default_grid(field, spectral)

    zeta_sec = _section(cfg, "zeta_grid", required=False)
    zeta_window = None
    if zeta_sec:
        zeta_window = (
            _as_float(zeta_sec.get("zeta_min"), "zeta_grid.zeta_min"),
            _as_float(zeta_sec.get("zeta_max"), "zeta_grid.zeta_max"),
            _as_int(zeta_sec.get("n", 241), "zeta_grid.n"),
        )
        if not zeta_window[0] < zeta_window[1]:
            raise ValidationError("zeta_grid: zeta_min must be below zeta_max")
        if zeta_window[2] < 2:
            raise ValidationError("zeta_grid.n: need at least 2")

    solver_sec = _section(cfg, "solver", required=False)
    method = str(solver_sec.get("method", "picard")).lower().replace("_", "-")
    if method not in ("picard", "riccati", "closed-form"):
        raise ValidationError(f"solver.method: unknown method {method!r}")
    tol_val = tol if tol is not None else _as_float(
        solver_sec.get("tol", 1e-10), "solver.tol")
    if tol_val <= 0:
        raise ValidationError("solver.tol: must be > 0")
    max_iter = _as_int(solver_sec.get("max_iter", 200), "solver.max_iter")
    if max_iter < 1:
        raise ValidationError("solver.max_iter: must be >= 1")

    out_sec = _section(cfg, "output", required=False)
    out_dir = Path(out) if out is not None else base_dir / str(
        out_sec.get("directory", "out"))
    seed_val = seed if seed is not None else _as_int(cfg.get("seed", 0), "seed")

    resolved = dict(cfg)
    # Only overrides that change results belong in the hash; the output
    # location does not.
    resolved["_overrides"] = {"tol": tol_val, "seed": seed_val}
    return Scenario(
        params=params, spectral=spectral, field=field, grid=grid,
        zeta_window=zeta_window, method=method, tol=tol_val,
        max_iter=max_iter, seed=seed_val, out_dir=out_dir,
        config_hash=_hash_config(resolved, field),
    )


def write_table(path: Path, meta: dict, columns, rows) -> None:
    """Write a deterministic CSV table with ``#`` metadata lines."""
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {key} = {meta[key]}" for key in sorted(meta)]
    lines.append(",".join(columns))
    for row in rows:
        cells = []
        for value in row:
            if isinstance(value, str):
                cells.append(value)
            elif isinstance(value, (int, np.integer)):
                cells.append(str(int(value)))
            else:
                cells.append(_FLOAT_FMT % float(value))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


def _meta(scenario: Scenario, command: str) -> dict:
    return {
        "config": scenario.config_hash,
        "command": command,
        "seed": scenario.seed,
    }


def _zeta_axis(scenario: Scenario, bg: BackgroundSolution) -> np.ndarray:
    if scenario.zeta_window is not None:
        lo, hi, n = scenario.zeta_window
        return np.linspace(lo, hi, n)
    traj = trajectory(bg, scenario.params)
    slope, _ = phase_slopes(scenario.spectral, scenario.params)
    pad = 12.0 / abs(slope)
    return np.linspace(float(np.min(traj.zeta_peak)) - pad,
                       float(np.max(traj.zeta_peak)) + pad, 241)


def _subsample(values: np.ndarray, limit: int) -> np.ndarray:
    stride = max(1, (values.size - 1) // max(limit - 1, 1))
    return values[::stride]


def run_simulate(scenario: Scenario) -> int:
    bg = scenario.solve()
    zetas = _zeta_axis(scenario, bg)
    taus = _subsample(bg.grid.taus, 201)
    snap = sample_grid(zetas, taus, bg, scenario.params)
    pops = np.abs(snap.psi) ** 2
    columns = ["zeta", "tau", "re_omega_a", "im_omega_a", "re_omega_b",
               "im_omega_b", "pop1", "pop2", "pop3", "phi", "theta"]
    rows = []
    for i, zv in enumerate(snap.zetas):
        for j, tv in enumerate(snap.taus):
            rows.append((
                zv, tv,
                snap.omega_a[i, j].real, snap.omega_a[i, j].imag,
                snap.omega_b[i, j].real, snap.omega_b[i, j].imag,
                pops[i, j, 0], pops[i, j, 1], pops[i, j, 2],
                snap.phi[i, j], snap.theta[i, j],
            ))
    out = scenario.out_dir / "simulate.csv"
    write_table(out, _meta(scenario, "simulate"), columns, rows)
    print(f"simulate: {len(rows)} samples on {snap.zetas.size} x {snap.taus.size} "
          f"grid -> {out}")
    return 0


def run_trajectory(scenario: Scenario) -> int:
    bg = scenario.solve()
    traj = trajectory(bg, scenario.params)
    idx = np.arange(traj.taus.size)
    keep = _subsample(idx, 2001)
    columns = ["tau", "zeta_peak", "x", "t", "vg_ratio"]
    rows = list(zip(traj.taus[keep], traj.zeta_peak[keep], traj.x[keep],
                    traj.t[keep], traj.vg[keep]))
    out = scenario.out_dir / "trajectory.csv"
    write_table(out, _meta(scenario, "trajectory"), columns, rows)
    print(f"trajectory: {len(rows)} samples, final x = "
          f"{traj.x[-1]:.9g} -> {out}")
    return 0


_STOP_COLUMNS = ["stopping_distance", "relative_distance", "series_estimate",
                 "i1", "i2", "width", "width_measured", "x_bit"]


def _stop_row(report) -> tuple:
    return tuple(getattr(report, name) for name in _STOP_COLUMNS)


def run_stop(scenario: Scenario) -> int:
    bg = scenario.solve()
    report = stop_report(bg, scenario.params)
    out = scenario.out_dir / "stop.csv"
    write_table(out, _meta(scenario, "stop"), _STOP_COLUMNS, [_stop_row(report)])
    for name in _STOP_COLUMNS:
        print(f"stop: {name} = {getattr(report, name):.9g}")
    print(f"stop: wrote {out}")
    return 0


def run_verify(scenario: Scenario, residual_tol: Optional[float]) -> int:
    bg = scenario.solve()
    suite = invariant_suite(bg, scenario.params, seed=scenario.seed)

    s = scenario.spectral
    rate = max(abs(s.k), abs(s.lam))
    base = 1e-2 / max(1.0, rate)
    hs = (base, base / 2.0, base / 4.0)
    # Atomic-residual stencils cannot straddle jumps or derivative kinks.
    jumps = scenario.field.breakpoints()
    half = 0.5 / max(1.0, abs(s.lam.imag))
    slope, _ = phase_slopes(s, scenario.params)

    def builder(h: float):
        grid = default_grid(scenario.field, s, h=h)
        level_bg = solve_background(
            scenario.field, s, grid, method=scenario.method,
            tol=scenario.tol, max_iter=scenario.max_iter,
        )
        taus = grid.taus
        mask = np.abs(taus) <= half + 0.5 * grid.h
        m = int(round(half / (abs(slope) * h)))
        zetas = np.arange(-m, m + 1) * (h * np.sign(slope))
        return sample_grid(np.sort(zetas), taus[mask], level_bg, scenario.params)

    study = convergence_study(builder, scenario.params, hs, exclude_taus=jumps)
    finest = study.finest.worst
    resid_thr = residual_tol if residual_tol is not None else 1e-5
    order_ok = study.order >= 1.8
    resid_ok = finest <= resid_thr

    rows = [(c["check"], c["passed"], c["value"], c["threshold"], c["detail"])
            for c in suite.rows()]
    for i, lv in enumerate(study.levels):
        lv_ok = lv.worst <= resid_thr if i == len(study.levels) - 1 else True
        rows.append((f"residual-h={lv.h_tau:.3e}", int(lv_ok), lv.worst,
                     resid_thr, "sup-norm defect"))
    rows.append(("residual-order", int(order_ok), study.order, 1.8,
                 f"field {study.order_field:.2f}, atom {study.order_atom:.2f}"))
    columns = ["check", "passed", "value", "threshold", "detail"]
    out = scenario.out_dir / "verify.csv"
    write_table(out, _meta(scenario, "verify"), columns, rows)

    ok = suite.passed and order_ok and resid_ok
    for c in suite.checks:
        print(f"verify: {c.name}: {'pass' if c.passed else 'FAIL'} "
              f"(value {c.value:.3e}, threshold {c.threshold:.3e})")
    print(f"verify: residual order {study.order:.2f} (>= 1.8: "
          f"{'pass' if order_ok else 'FAIL'}), finest {finest:.3e} "
          f"(<= {resid_thr:.1e}: {'pass' if resid_ok else 'FAIL'})")
    print(f"verify: wrote {out}")
    return 0 if ok else 3


_SWEEP_PARAMS = ("alpha", "omega0", "im_lambda")


def run_sweep(scenario: Scenario, cfg: dict, base_dir: Path,
              parameter: Optional[str], values: Optional[str]) -> int:
    sweep_sec = _section(cfg, "sweep", required=False)
    if parameter is None:
        parameter = sweep_sec.get("parameter")
    if values is None:
        raw = sweep_sec.get("values")
    else:
        raw = [v for v in values.split(",") if v.strip()]
    if parameter is None or raw is None:
        raise ValidationError("sweep: need a parameter and values "
                              "(config sweep section or --param/--values)")
    parameter = str(parameter)
    if parameter not in _SWEEP_PARAMS:
        raise ValidationError(
            f"sweep.parameter: must be one of {', '.join(_SWEEP_PARAMS)}"
        )
    vals = [_as_float(v, "sweep.values") for v in raw]
    if not vals:
        raise ValidationError("sweep.values: must not be empty")
    variant = str(_section(cfg, "field").get("variant", "")).lower().replace("-", "_")
    if parameter == "alpha" and variant not in ("exponential_off", "tanh_ramp"):
        raise ValidationError(
            "sweep: alpha sweeps need an exponential_off or tanh_ramp field"
        )
    if parameter == "omega0" and variant == "sampled":
        raise ValidationError("sweep: omega0 sweeps need an analytic field variant")

    rows = []
    for value in vals:
        sub = json.loads(json.dumps(cfg, default=str))
        sub.pop("sweep", None)
        if parameter == "alpha":
            sub.setdefault("field", {})["alpha"] = value
        elif parameter == "omega0":
            sub.setdefault("field", {})["omega0"] = value
        else:
            lam = _as_complex(_section(cfg, "spectral")["lambda"], "spectral.lambda")
            sub["spectral"]["lambda"] = [lam.real, value]
        sub_scenario = build_scenario(sub, base_dir=base_dir,
                                      out=str(scenario.out_dir),
                                      tol=scenario.tol, seed=scenario.seed)
        bg = sub_scenario.solve()
        report = stop_report(bg, sub_scenario.params)
        rows.append((value,) + _stop_row(report))
        print(f"sweep: {parameter} = {value:g}: relative_distance = "
              f"{report.relative_distance:.9g}")

    columns = [parameter] + _STOP_COLUMNS
    out = scenario.out_dir / "sweep.csv"
    write_table(out, _meta(scenario, "sweep"), columns, rows)
    print(f"sweep: wrote {out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slowlight",
        description="Slow-light solitons on a switched driving field",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("simulate", "sample the full solution on a space-time grid"),
        ("trajectory", "track the soliton peak"),
        ("stop", "stopping distance, relative travel and bit geometry"),
        ("verify", "residual convergence and structural invariants"),
        ("sweep", "stop reports across a parameter ladder"),
    ):
        cmd = sub.add_parser(name, help=doc)
        cmd.add_argument("--config", required=True, help="YAML scenario file")
        cmd.add_argument("--out", default=None, help="output directory")
        cmd.add_argument("--tol", type=float, default=None,
                         help="solver tolerance (verify: residual threshold)")
        cmd.add_argument("--seed", type=int, default=None,
                         help="seed for randomized spot checks")
        if name == "sweep":
            cmd.add_argument("--param", default=None,
                             help=f"one of {', '.join(_SWEEP_PARAMS)}")
            cmd.add_argument("--values", default=None,
                             help="comma-separated parameter values")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        base_dir = Path(args.config).resolve().parent
        solver_tol = args.tol if args.command != "verify" else None
        scenario = build_scenario(cfg, base_dir=base_dir, out=args.out,
                                  tol=solver_tol, seed=args.seed)
        if args.command == "simulate":
            return run_simulate(scenario)
        if args.command == "trajectory":
            return run_trajectory(scenario)
        if args.command == "stop":
            return run_stop(scenario)
        if args.command == "verify":
            return run_verify(scenario, residual_tol=args.tol)
        return run_sweep(scenario, cfg, base_dir, args.param, args.values)
    except DivergenceError as exc:
        print(f"error: solver diverged: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SlowlightError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
