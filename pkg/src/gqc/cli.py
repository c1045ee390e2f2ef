"""Command-line driver: ``gqc qfi-curve | optimize | verify | reproduce``.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .control import (
    FAMILIES,
    ControlProtocol,
    closed_form_curve,
    optimize_control,
)
from .dynamics import ThermalChannel
from .errors import GQCError
from .fock import AUTO_Y_MAX, fidelity_qfi
from .qfi import angle_family, reduced_rate_angle, reduced_rate_strength, strength_family
from .verify import SUITES, fock_protocol_builder, run_suite, worker_count

FIGURE_TC = tuple(round(0.05 * k, 2) for k in range(11))
FIGURE_GRID = 201
PANELS = {"upper": (3.0, 1.0), "lower": (10.0, 2.0)}
FIGURES = {"fig2": "angle", "fig3": "strength"}
ORACLE_TOL = 1e-3


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    family: str = "angle"
    y: float = 3.0
    theta_bar: float = 0.0
    N: float = 1.0
    t_c_list: list[float] = field(default_factory=lambda: [0.0])
    t_max: float = 1.0
    t_steps: int = FIGURE_GRID
    oracle: bool = False
    oracle_dim: int = 60
    seed: int = 0

    def validate(self) -> "ExperimentConfig":
        if self.family not in FAMILIES:
            raise ConfigError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if not (self.y >= 1.0):
            raise ConfigError(f"y must be >= 1, got {self.y}")
        if not (self.N >= 1.0):
            raise ConfigError(f"N must be >= 1, got {self.N}")
        if not (self.t_max > 0.0):
            raise ConfigError(f"t_max must be positive, got {self.t_max}")
        if int(self.t_steps) != self.t_steps or self.t_steps < 2:
            raise ConfigError(f"t_steps must be an integer >= 2, got {self.t_steps}")
        for tc in self.t_c_list:
            if not (0.0 <= tc <= self.t_max):
                raise ConfigError(f"control time {tc} outside [0, t_max={self.t_max}]")
        if self.oracle_dim < 10:
            raise ConfigError(f"oracle_dim too small: {self.oracle_dim}")
        return self

    def t_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, int(self.t_steps))


_JSON_KEYS = {
    "family": "family", "y": "y", "theta_bar": "theta_bar", "N": "N", "big_n": "N",
    "t_c_list": "t_c_list", "tc": "t_c_list", "t_max": "t_max", "t_steps": "t_steps",
    "oracle": "oracle", "oracle_dim": "oracle_dim", "seed": "seed",
}


def load_config(path: str | None, overrides: dict) -> ExperimentConfig:
    data: dict = {}
    if path:
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        for key, value in raw.items():
            if key not in _JSON_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            data[_JSON_KEYS[key]] = value
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = ExperimentConfig(**data)
        cfg.y, cfg.theta_bar, cfg.N, cfg.t_max = (
            float(cfg.y), float(cfg.theta_bar), float(cfg.N), float(cfg.t_max))
        cfg.t_c_list = sorted(float(v) for v in cfg.t_c_list)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def fmt(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.17g}"


def curve_rows(cfg: ExperimentConfig) -> list[tuple[float, float, float]]:
    """(t, tc, qfi) rows, sorted by tc (uncontrolled last) then t."""
    grid = cfg.t_grid()
    tcs = list(cfg.t_c_list) + [math.inf]

    def one(tc):
        p = ControlProtocol(cfg.family, cfg.y, cfg.N, tc, cfg.theta_bar)
        return [(float(t), tc, float(q)) for t, q in zip(grid, closed_form_curve(p, grid))]

    with ThreadPoolExecutor(worker_count()) as pool:
        chunks = list(pool.map(one, tcs))
    return [row for chunk in chunks for row in chunk]


def write_csv(rows, out) -> None:
    out.write("t,tc,qfi\n")
    for t, tc, q in rows:
        out.write(f"{fmt(t)},{fmt(tc)},{fmt(q)}\n")


def _emit(rows, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)


def oracle_crosscheck(cfg: ExperimentConfig, rows) -> bool:
    """Compare a few closed-form values with the Fock-space protocol."""
    if cfg.y > AUTO_Y_MAX:
        print(f"oracle: skipped, y={cfg.y} exceeds the Fock box (y <= {AUTO_Y_MAX})", file=sys.stderr)
        return True
    grid = cfg.t_grid()
    probes = sorted({float(grid[0]), float(grid[len(grid) // 2]), float(grid[-1])})
    lookup = {(t, tc): q for t, tc, q in rows}
    ok = True
    for tc in list(cfg.t_c_list) + [math.inf]:
        p = ControlProtocol(cfg.family, cfg.y, cfg.N, tc, cfg.theta_bar)
        for t in probes:
            build, theta_bar = fock_protocol_builder(p, t, cfg.oracle_dim)
            q_fock = fidelity_qfi(build, theta_bar)
            q_csv = lookup[(t, tc)]
            err = abs(q_fock - q_csv) / max(abs(q_fock), 1e-300)
            passed = err <= ORACLE_TOL
            ok &= passed
            print(
                f"oracle {'PASS' if passed else 'FAIL'} t={fmt(t)} tc={fmt(tc)} "
                f"closed_form={q_csv:.10g} fock={q_fock:.10g} rel_err={err:.2e}",
                file=sys.stderr,
            )
    return ok


def cmd_qfi_curve(args) -> int:
    overrides = {
        "family": args.family, "y": args.y, "theta_bar": args.theta_bar, "N": args.big_n,
        "t_c_list": args.tc, "t_max": args.t_max, "t_steps": args.t_steps,
        "oracle": True if args.oracle else None, "oracle_dim": args.oracle_dim, "seed": args.seed,
    }
    cfg = load_config(args.config, overrides)
    rows = curve_rows(cfg)
    _emit(rows, args.out)
    if cfg.oracle and not oracle_crosscheck(cfg, rows):
        return 1
    return 0


def cmd_optimize(args) -> int:
    if args.family not in FAMILIES:
        raise ConfigError(f"family must be one of {FAMILIES}")
    if not (args.y >= 1.0 and args.nu >= 1.0 and args.big_n >= 1.0):
        raise ConfigError("need y >= 1, nu >= 1 and N >= 1")
    ch = ThermalChannel(args.big_n)
    if args.family == "angle":
        fam = angle_family(args.y, args.nu, args.theta_bar)
        analytic = reduced_rate_angle(args.y, args.nu, args.big_n, 2.0 / args.nu)
    else:
        fam = strength_family(2.0 * math.log(args.y), args.nu)
        analytic = reduced_rate_strength(args.nu, args.big_n, 2.0 / args.nu)
    control, rate = optimize_control(fam, ch)
    print(f"family={args.family}")
    print(f"phi={control.phi:.12g}")
    print(f"z={control.z:.12g}")
    print(f"achieved_rate={rate:.17g}")
    print(f"analytic_rate={analytic:.17g}")
    print(f"gap={rate - analytic:.3e}")
    return 0


def cmd_verify(args) -> int:
    results = run_suite(args.suite, args.seed, args.samples)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def figure_config(figure: str, panel: str) -> ExperimentConfig:
    if figure not in FIGURES or panel not in PANELS:
        raise ConfigError(f"unknown figure/panel {figure!r} {panel!r}")
    y, N = PANELS[panel]
    return ExperimentConfig(
        family=FIGURES[figure], y=y, N=N, t_c_list=list(FIGURE_TC), t_max=1.0, t_steps=FIGURE_GRID
    ).validate()


def cmd_reproduce(args) -> int:
    cfg = figure_config(args.figure, args.panel)
    _emit(curve_rows(cfg), args.out)
    return 0


def _tc_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad control-time list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gqc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qfi-curve", help="closed-form controlled QFI curves as CSV")
    p.add_argument("--config", help="JSON experiment config; flags override its fields")
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--y", type=float)
    p.add_argument("--theta-bar", type=float)
    p.add_argument("--big-n", type=float, help="thermal noise N = 2N̄ + 1")
    p.add_argument("--tc", type=_tc_list, help="comma-separated control times")
    p.add_argument("--t-max", type=float)
    p.add_argument("--t-steps", type=int)
    p.add_argument("--oracle", action="store_true", help="cross-check against the Fock oracle")
    p.add_argument("--oracle-dim", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_qfi_curve)

    p = sub.add_parser("optimize", help="numerical time-local optimum vs the analytic one")
    p.add_argument("--family", choices=FAMILIES, default="angle")
    p.add_argument("--y", type=float, default=3.0)
    p.add_argument("--theta-bar", type=float, default=0.0)
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--big-n", type=float, default=1.0)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("verify", help="run seeded verification suites")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reproduce", help="curve bundle of a figure panel as CSV")
    p.add_argument("figure", choices=tuple(FIGURES))
    p.add_argument("panel", choices=tuple(PANELS))
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GQCError) as exc:
        print(f"gqc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
