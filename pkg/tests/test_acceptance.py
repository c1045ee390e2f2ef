"""Acceptance gate: one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py`` (the lines are repeated in the terminal
summary) or ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import sys
import time

import numpy as np
import pytest

from gqc.cli import curve_rows, figure_config
from gqc.control import (
    ControlProtocol,
    controlled_family,
    controlled_qfi_angle,
    controlled_qfi_strength,
    controlled_rate,
    optimize_control,
    simulate_protocol,
    single_control_suffices_check,
)
from gqc.dynamics import ThermalChannel, transform_family
from gqc.qfi import angle_family, gaussian_qfi, reduced_rate_angle, reduced_rate_strength, strength_family
from gqc.symplectic import SymplecticControl, compose_control
from gqc.verify import CheckResult, check_dynamics, check_oracle, check_qfi_derivative, random_family

RESULTS: dict[int, str] = {}


def _record(number: int, result: CheckResult) -> CheckResult:
    line = f"[{number}] {result.line()}"
    RESULTS[number] = line
    print(line)
    return result


def _timed(fn, *args):
    start = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - start


def criterion_1() -> CheckResult:
    err_angle = abs(controlled_qfi_angle(3.0, 1.0, 0.0, 0.0) - 3200 / 81)
    err_strength = max(
        abs(controlled_qfi_strength(y, N, tc, 0.0) - 0.5)
        for y in (1.0, 3.0, 10.0)
        for N in (1.0, 2.0)
        for tc in (0.0, 0.3, math.inf)
    )
    worst = max(err_angle, err_strength)
    return CheckResult("closed-form anchor values", worst <= 1e-12, worst, 1e-12)


def criterion_2() -> CheckResult:
    (res,), elapsed = _timed(check_qfi_derivative, 0, 500, 1e-5)
    ok = res.passed and elapsed <= 5.0
    return CheckResult(
        "exact rate vs centred difference", ok, res.measured, 1e-6, f"{res.detail}, {elapsed:.1f}s of 5s"
    )


def criterion_3() -> CheckResult:
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    worst_gap = worst_chi = 0.0
    for k in range(100):
        y, theta, nu, N = rng.uniform(1, 5), rng.uniform(0, 2 * math.pi), rng.uniform(1, 2), rng.uniform(1, 3)
        ch = ThermalChannel(N)
        if k < 50:
            f = angle_family(y, nu, theta)
            analytic = reduced_rate_angle(y, nu, N, 2 / nu)
        else:
            f = strength_family(2 * math.log(y), nu)
            analytic = reduced_rate_strength(nu, N, 2 / nu)
        c, rate = optimize_control(f, ch)
        worst_gap = max(worst_gap, abs(rate - analytic))
        rates = [controlled_rate(f, SymplecticControl(c.phi, c.z, chi), ch) for chi in np.linspace(0, 2 * math.pi, 8)]
        worst_chi = max(worst_chi, float(np.ptp(rates)) / max(1.0, abs(rate)))
    elapsed = time.perf_counter() - start
    ok = worst_gap <= 1e-8 and worst_chi <= 1e-10 and elapsed <= 30.0
    return CheckResult(
        "optimiser recovers the analytic optimum",
        ok,
        worst_gap,
        1e-8,
        f"chi spread {worst_chi:.1e} (tol 1e-10), 100 instances, {elapsed:.1f}s of 30s",
    )


def criterion_4() -> CheckResult:
    rng = np.random.default_rng(4)
    worst = -math.inf
    failures = []
    for k in range(20):
        family = "angle" if k % 2 == 0 else "strength"
        p = ControlProtocol(family, rng.uniform(1.5, 5), rng.uniform(1, 3), rng.uniform(0, 0.5), rng.uniform(0, 3))
        ok, witness = single_control_suffices_check(p, p.t_c + rng.uniform(0.1, 1.0))
        worst = max(worst, witness["gain"])
        if not ok:
            failures.append(f"{family} t_c={p.t_c:.2f}")
    detail = f"{20 - len(failures)}/20 protocols"
    if failures:
        detail += "; improvable: " + ", ".join(failures)
    return CheckResult("single control suffices", not failures, worst, 1e-9, detail)


def criterion_5() -> CheckResult:
    res = check_dynamics(seed=5, samples=200, dt=1e-3)[0]
    return res


def criterion_6() -> CheckResult:
    results, elapsed = _timed(check_oracle, 60)
    cm, q = results
    ok = cm.passed and q.passed and elapsed <= 120.0
    return CheckResult(
        "Fock oracle equivalence",
        ok,
        q.measured,
        1e-3,
        f"CM error {cm.measured:.1e} (tol 1e-5), {cm.detail}, {elapsed:.0f}s of 120s",
    )


def _bundle_checks(figure: str, panel: str) -> dict[str, float]:
    cfg = figure_config(figure, panel)
    rows = curve_rows(cfg)
    grid = cfg.t_grid()
    curves: dict[float, np.ndarray] = {}
    for t, tc, q in rows:
        curves.setdefault(tc, []).append(q)
    curves = {tc: np.array(v) for tc, v in curves.items()}
    order = sorted(curves)
    fn = controlled_qfi_angle if cfg.family == "angle" else controlled_qfi_strength

    continuity = max(abs(fn(cfg.y, cfg.N, tc, tc) - fn(cfg.y, cfg.N, math.inf, tc)) for tc in order if math.isfinite(tc))
    # relative excess of a later-control curve over an earlier one; ties at the
    # control instant differ only by rounding
    dominance = max(float(np.max((curves[b] - curves[a]) / curves[a])) for a, b in zip(order, order[1:]))
    decay = max(float(np.max(np.diff(c))) for c in curves.values())
    simulation = 0.0
    for tc in order:
        p = ControlProtocol(cfg.family, cfg.y, cfg.N, tc)
        sim = simulate_protocol(p, grid)[:, 1]
        simulation = max(simulation, float(np.max(np.abs(sim - curves[tc]) / np.abs(sim))))
    return {"continuity": continuity, "dominance": dominance, "decay": decay, "simulation": simulation}


def criterion_7() -> CheckResult:
    parts = []
    ok = True
    worst_sim = 0.0
    for figure, panel in (("fig2", "upper"), ("fig3", "lower")):
        m = _bundle_checks(figure, panel)
        flags = {
            "a": m["continuity"] <= 1e-12,
            "b": m["dominance"] <= 1e-12,
            "c": m["decay"] <= 0.0,
            "d": m["simulation"] <= 1e-10,
        }
        ok &= all(flags.values())
        worst_sim = max(worst_sim, m["simulation"])
        parts.append(
            f"{figure} {panel}: "
            + " ".join(f"({k}){'ok' if v else 'FAIL'}" for k, v in flags.items())
            + f" sim-vs-closed={m['simulation']:.1e}"
        )
    return CheckResult("figure bundles", ok, worst_sim, 1e-10, "; ".join(parts))


def criterion_8() -> CheckResult:
    rng = np.random.default_rng(8)
    worst_qfi = worst_mean = 0.0
    for _ in range(500):
        f = random_family(rng)
        S = compose_control(
            SymplecticControl(rng.uniform(0, 2 * math.pi), math.exp(rng.uniform(-1.5, 1.5)), rng.uniform(0, 2 * math.pi))
        )
        a, b = gaussian_qfi(f), gaussian_qfi(transform_family(f, S))
        worst_qfi = max(worst_qfi, abs(a.qfi - b.qfi) / a.qfi)
        worst_mean = max(worst_mean, abs(a.term_mean - b.term_mean) / a.term_mean)
    worst = max(worst_qfi, worst_mean)
    return CheckResult(
        "unitary and first-moment invariance", worst <= 1e-10, worst, 1e-10, f"mean term {worst_mean:.1e}, 500 actions"
    )


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
}


@pytest.mark.acceptance
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    result = _record(number, CRITERIA[number]())
    assert result.passed, result.line()


if __name__ == "__main__":
    failed = 0
    for n in sorted(CRITERIA):
        failed += not _record(n, CRITERIA[n]()).passed
    sys.exit(1 if failed else 0)
