"""Batch front door: config-driven scans, pattern emission, figure
reproduction, and oracle checks, all emitting provenance-stamped CSV.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical
convergence error, 4 oracle mismatch beyond the asserted tolerance.
"""
from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .config import RunConfig, config_digest, load_config
from .constants import MBAR, PLANCK, UM
from .decoherence import (collision_scenario, suppression_factor,
                          thermal_scenario)
from .model import (BeamSpec, GratingSpec, MaterialInteraction, ParticleSpec,
                    SetupSpec, ValidationError, derive_kinematics)
from .oracle import (OracleConfig, UnsupportedScenarioError, WindowError,
                     coherent_pattern_oracle, compare, mc_decohered_pattern)
from .quadrature import QuadratureError
from .talbot import (NumericError, density_at_velocity, fringes_at_velocity,
                     velocity_average)
from .constants import AMU, MEV_NM3

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_ORACLE = 4

SCAN_PARAMS = ("open_fraction", "L_over_Ltalbot", "v_z", "pressure",
               "T_star", "laser_power")


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def write_csv(path: Optional[str], meta: Sequence[Tuple[str, str]],
              columns: Sequence[str], rows: Sequence[Sequence[float]]) -> None:
    lines = [f"# {key} = {value}" for key, value in meta]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _base_meta(args, command: str) -> List[Tuple[str, str]]:
    meta = [("tool", f"talbotlau {__version__}"), ("command", command),
            ("backend", BACKEND), ("seed", str(getattr(args, "seed", 0)))]
    if getattr(args, "config", None):
        meta.append(("config_sha256", config_digest(args.config)))
    return meta


def parse_scan(spec: str) -> Tuple[str, np.ndarray]:
    try:
        param, rng = spec.split("=", 1)
        lo_s, hi_s, n_s = rng.split(":")
        lo, hi, n = float(lo_s), float(hi_s), int(n_s)
    except ValueError as exc:
        raise ValidationError(
            f"--scan: expected param=lo:hi:n, got {spec!r}") from exc
    if param not in SCAN_PARAMS:
        raise ValidationError(
            f"--scan: unknown parameter {param!r}; choose from "
            f"{', '.join(SCAN_PARAMS)}")
    if n < 2:
        raise ValidationError("--scan: point count must be at least 2")
    return param, np.linspace(lo, hi, n)


def apply_scan_value(cfg: RunConfig, param: str, value: float) -> RunConfig:
    setup = cfg.setup
    if param == "open_fraction":
        if not 0.0 < value < 1.0:
            raise ValidationError(f"--scan open_fraction: {value!r} outside (0, 1)")
        def with_f(g: GratingSpec) -> GratingSpec:
            return replace(g, open_fraction=value) if g.kind == "binary" else g
        new_setup = replace(setup, grating1=with_f(setup.grating1),
                            grating2=with_f(setup.grating2),
                            grating3=with_f(setup.grating3)).validate()
        return replace(cfg, setup=new_setup)
    if param == "v_z":
        if cfg.beam.kind != "delta":
            raise ValidationError("--scan v_z: needs a delta velocity beam")
        return replace(cfg, beam=replace(cfg.beam, v_mean=value).validate())
    if param == "L_over_Ltalbot":
        if cfg.beam.kind != "delta":
            raise ValidationError("--scan L_over_Ltalbot: needs a delta "
                                  "velocity beam")
        if value <= 0.0:
            raise ValidationError("--scan L_over_Ltalbot: must be positive")
        v_z = PLANCK * setup.separation / (
            cfg.particle.mass * setup.d ** 2 * value)
        return replace(cfg, beam=replace(cfg.beam, v_mean=v_z).validate())
    if param == "pressure":
        if cfg.gas is None:
            raise ValidationError("--scan pressure: config has no [gas] section")
        return replace(cfg, gas=replace(cfg.gas,
                                        pressure=value * MBAR).validate())
    if param == "T_star":
        if cfg.thermal is None:
            raise ValidationError("--scan T_star: config has no [thermal] "
                                  "section")
        return replace(cfg, thermal=replace(cfg.thermal,
                                            T_star=value).validate())
    if param == "laser_power":
        g2 = setup.grating2
        if g2.kind != "light":
            raise ValidationError("--scan laser_power: second grating is not "
                                  "a light grating")
        light = replace(g2.light, laser_power=value)
        new_setup = replace(setup, grating2=replace(
            g2, light=light)).validate()
        return replace(cfg, setup=new_setup)
    raise ValidationError(f"--scan: unknown parameter {param!r}")


def _scenarios(cfg: RunConfig, kin):
    out = []
    if cfg.gas is not None and cfg.gas.pressure > 0.0:
        out.append(collision_scenario(cfg.gas, cfg.particle, kin))
    if cfg.thermal is not None:
        out.append(thermal_scenario(cfg.thermal, kin,
                                    2.0 * cfg.setup.separation))
    return out


def _suppression_builder(cfg: RunConfig):
    def build(kin):
        scenarios = _scenarios(cfg, kin)
        if not scenarios:
            return None
        return suppression_factor(scenarios, cfg.setup, kin)
    return build


def compute_point(cfg: RunConfig, decohere: bool):
    """Quantum, classical and (optionally) decohered visibility plus the
    mean signal level at one parameter point."""
    max_order = cfg.numerics.max_order
    grid = cfg.numerics.pattern_grid
    builder = _suppression_builder(cfg) if decohere else None
    if cfg.beam.kind == "delta":
        v = cfg.beam.v_mean
        q = fringes_at_velocity(cfg.setup, cfg.particle, v, "quantum",
                                max_order, grid)
        c = fringes_at_velocity(cfg.setup, cfg.particle, v, "classical",
                                max_order, grid)
        d = None
        if decohere:
            d = fringes_at_velocity(cfg.setup, cfg.particle, v, "quantum",
                                    max_order, grid,
                                    suppression_builder=builder)
    else:
        q = velocity_average(cfg.setup, cfg.particle, cfg.beam, "quantum",
                             max_order, grid)
        c = velocity_average(cfg.setup, cfg.particle, cfg.beam, "classical",
                             max_order, grid)
        d = None
        if decohere:
            d = velocity_average(cfg.setup, cfg.particle, cfg.beam, "quantum",
                                 max_order, grid, suppression_builder=builder)
    out = {"quantum": q.visibility, "classical": c.visibility,
           "mean_level": q.mean_level}
    if d is not None:
        out["decohered"] = d.visibility
    return out


def _scan_point_worker(payload):
    config_path, param, value, decohere = payload
    cfg = apply_scan_value(load_config(config_path), param, value)
    return compute_point(cfg, decohere)


def _oracle_config(cfg: RunConfig, seed: int) -> OracleConfig:
    n = cfg.numerics
    return OracleConfig(
        window_periods=n.oracle_window_periods,
        samples_per_period=n.oracle_samples_per_period,
        source_points_per_slit=n.oracle_source_points,
        output_points=n.oracle_output_points,
        mc_events=n.mc_events, seed=seed)


# ---------------------------------------------------------------------------
# subcommands

def cmd_pattern(args) -> int:
    cfg = load_config(args.config)
    if cfg.beam.kind != "delta":
        raise ValidationError("pattern: needs a delta velocity beam")
    grid = args.grid or cfg.numerics.pattern_grid
    builder = _suppression_builder(cfg) if args.decohere else None
    pat = density_at_velocity(cfg.setup, cfg.particle, cfg.beam.v_mean,
                              args.regime, cfg.numerics.max_order, grid,
                              suppression_builder=builder)
    x, v = pat.as_arrays()
    v = v / np.mean(v)
    meta = _base_meta(args, "pattern")
    meta.append(("columns", "x [m], density [mean-normalized]"))
    meta.append(("regime", args.regime))
    meta.append(("visibility", _fmt(pat.visibility)))
    write_csv(args.out, meta, ["x", "density"], list(zip(x, v)))
    return EXIT_OK


def cmd_visibility_scan(args) -> int:
    param, values = parse_scan(args.scan)
    cfg0 = load_config(args.config)
    decohere = args.decohere or (cfg0.gas is not None
                                 or cfg0.thermal is not None)
    payloads = [(args.config, param, float(v), decohere) for v in values]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_scan_point_worker, payloads))
    else:
        results = [_scan_point_worker(p) for p in payloads]
    columns = [param, "quantum_visibility", "classical_visibility"]
    if decohere:
        columns.append("decohered_visibility")
    columns.append("mean_level")
    oracle_cols = args.oracle or args.assert_oracle is not None
    if oracle_cols:
        columns.append("oracle_visibility")
    rows = []
    worst = 0.0
    for v, res in zip(values, results):
        row = [v, res["quantum"], res["classical"]]
        if decohere:
            row.append(res.get("decohered", res["quantum"]))
        row.append(res["mean_level"])
        if oracle_cols:
            cfg = apply_scan_value(cfg0, param, float(v))
            kin = derive_kinematics(cfg.particle, cfg.beam.v_mean, cfg.setup.d)
            pat = coherent_pattern_oracle(cfg.setup, kin, cfg.particle,
                                          _oracle_config(cfg, args.seed))
            fast = density_at_velocity(cfg.setup, cfg.particle,
                                       cfg.beam.v_mean, "quantum",
                                       cfg.numerics.max_order,
                                       cfg.numerics.pattern_grid)
            row.append(pat.visibility)
            worst = max(worst, abs(pat.visibility - fast.visibility))
        rows.append(row)
    meta = _base_meta(args, "visibility-scan")
    meta.append(("scan", args.scan))
    write_csv(args.out, meta, columns, rows)
    if args.assert_oracle is not None and worst > args.assert_oracle:
        print(f"oracle mismatch: worst visibility difference {worst:.3e} "
              f"exceeds {args.assert_oracle:g}", file=sys.stderr)
        return EXIT_ORACLE
    return EXIT_OK


def cmd_decoherence_scan(args) -> int:
    param, _ = parse_scan(args.scan)
    if param not in ("pressure", "T_star"):
        raise ValidationError("decoherence-scan: sweep pressure or T_star")
    args.decohere = True
    return cmd_visibility_scan(args)


def cmd_oracle_check(args) -> int:
    cfg = load_config(args.config)
    if cfg.beam.kind != "delta":
        raise ValidationError("oracle-check: needs a delta velocity beam")
    kin = derive_kinematics(cfg.particle, cfg.beam.v_mean, cfg.setup.d)
    ocfg = _oracle_config(cfg, args.seed)
    fast = density_at_velocity(cfg.setup, cfg.particle, cfg.beam.v_mean,
                               "quantum", cfg.numerics.max_order,
                               cfg.numerics.pattern_grid)
    oracle_pat = coherent_pattern_oracle(cfg.setup, kin, cfg.particle, ocfg)
    rep = compare(fast, oracle_pat)
    rows = [[fast.visibility, oracle_pat.visibility,
             rep.visibility_difference, rep.l2_error]]
    scenarios = _scenarios(cfg, kin)
    columns = ["fast_visibility", "oracle_visibility",
               "visibility_difference", "l2_error"]
    if scenarios:
        builder = _suppression_builder(cfg)
        deco_fast = density_at_velocity(
            cfg.setup, cfg.particle, cfg.beam.v_mean, "quantum",
            cfg.numerics.max_order, cfg.numerics.pattern_grid,
            suppression_builder=builder)
        mc = mc_decohered_pattern(cfg.setup, kin, scenarios[0], cfg.particle,
                                  ocfg, seed=args.seed)
        columns += ["decohered_fast_visibility", "mc_visibility"]
        rows[0] += [deco_fast.visibility, mc.visibility]
    meta = _base_meta(args, "oracle-check")
    write_csv(args.out, meta, columns, rows)
    if args.assert_oracle is not None and \
            abs(rep.visibility_difference) > args.assert_oracle:
        print(f"oracle mismatch: visibility difference "
              f"{rep.visibility_difference:.3e} exceeds "
              f"{args.assert_oracle:g}", file=sys.stderr)
        return EXIT_ORACLE
    return EXIT_OK


def figure_config(which: str, l_over_talbot: float, open_fraction: float
                  ) -> RunConfig:
    """Built-in parameter sets for the figure-reproduction scans."""
    interaction = MaterialInteraction()
    thickness = 0.0
    if which == "fig4":
        interaction = MaterialInteraction(law="vdw_c3", C3=10.0 * MEV_NM3)
        thickness = 0.2 * UM
    grating = GratingSpec(period=1.0 * UM, open_fraction=open_fraction,
                          thickness=thickness, interaction=interaction)
    ideal = GratingSpec(period=1.0 * UM, open_fraction=open_fraction)
    setup = SetupSpec(grating1=ideal, grating2=grating, grating3=ideal,
                      separation=0.2, period_ratio=2).validate()
    particle = ParticleSpec(mass=1000.0 * AMU).validate()
    v_z = PLANCK * setup.separation / (
        particle.mass * setup.d ** 2 * l_over_talbot)
    beam = BeamSpec(kind="delta", v_mean=v_z).validate()
    return RunConfig(particle=particle, beam=beam, setup=setup)


def cmd_figure_repro(args) -> int:
    if args.figure not in ("fig2", "fig4"):
        raise ValidationError(f"--figure: unknown figure {args.figure!r}")
    settings = (1.0, 0.9, 0.8)
    fractions = np.linspace(0.05, 0.95, 19)
    rows = []
    for ratio in settings:
        for f in fractions:
            cfg = figure_config(args.figure, ratio, float(f))
            res = compute_point(cfg, decohere=False)
            rows.append([f, ratio, res["quantum"], res["classical"],
                         res["mean_level"]])
    meta = _base_meta(args, f"figure-repro {args.figure}")
    meta.append(("columns", "open fraction, L/L_Talbot, quantum visibility, "
                            "classical visibility, mean level"))
    write_csv(args.out, meta,
              ["open_fraction", "L_over_Ltalbot", "quantum_visibility",
               "classical_visibility", "mean_level"], rows)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="talbotlau",
        description="Talbot-Lau matter-wave fringe simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="INI config file")
        p.add_argument("--out", default=None, help="output CSV (default stdout)")
        p.add_argument("--seed", type=int, default=0, help="RNG seed")

    p = sub.add_parser("pattern", help="emit one period of the density")
    common(p)
    p.add_argument("--regime", choices=("quantum", "classical"),
                   default="quantum")
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--decohere", action="store_true")
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("visibility-scan", help="sweep one parameter")
    common(p)
    p.add_argument("--scan", required=True, metavar="param=lo:hi:n")
    p.add_argument("--decohere", action="store_true")
    p.add_argument("--oracle", action="store_true",
                   help="add a direct-propagation oracle column")
    p.add_argument("--assert-oracle", type=float, default=None,
                   metavar="TOL", help="exit 4 if |fast - oracle| > TOL")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_visibility_scan)

    p = sub.add_parser("decoherence-scan",
                       help="sweep pressure or T_star with decoherence")
    common(p)
    p.add_argument("--scan", required=True, metavar="param=lo:hi:n")
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--assert-oracle", type=float, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_decoherence_scan)

    p = sub.add_parser("oracle-check",
                       help="compare the fast path against direct propagation")
    common(p)
    p.add_argument("--assert-oracle", type=float, default=None, metavar="TOL")
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("figure-repro", help="built-in reference scans")
    common(p, needs_config=False)
    p.add_argument("--figure", required=True, choices=("fig2", "fig4"))
    p.set_defaults(func=cmd_figure_repro)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, UnsupportedScenarioError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, QuadratureError, WindowError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
