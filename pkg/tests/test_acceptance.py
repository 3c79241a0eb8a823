"""Acceptance criteria, one test each. Every test reports a PASS/FAIL line."""

import time

import numpy as np
from conftest import ACCEPTANCE_LINES

from ttd_precoder import cli
from ttd_precoder.closed_form import ScenarioParams, theorem1_design
from ttd_precoder.harness import (
    appendix_errors,
    default_scenario,
    random_batch,
    run_fig1,
    run_fig3,
    run_fig4,
    sign_invariance_error,
)
from ttd_precoder.model import ArrayGeometry, OfdmGrid
from ttd_precoder.precoder import effective_beams, objective, objective_matrix
from ttd_precoder.qp_oracle import lemma2_check, verify_against_theorem1


def report(name, checks):
    """checks: list of (label, bool). Records one line, then asserts."""
    failed = [label for label, ok in checks if not ok]
    line = f"{'PASS' if not failed else 'FAIL'} {name}"
    if failed:
        line += " [" + "; ".join(failed) + "]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert not failed, line


def by_designer(records):
    out = {}
    for r in records:
        out.setdefault(r.designer, {})[r.swept_value] = r.average
    return out


def test_oracle_equivalence():
    start = time.perf_counter()
    reports = [verify_against_theorem1(sc) for sc in random_batch(42, 100)]
    elapsed = time.perf_counter() - start
    coord = max(r.max_coord_error for r in reports)
    gap = max(r.max_objective_gap for r in reports)
    report("1 closed form matches the numerical oracle on 100 random scenarios", [
        (f"coord error {coord:.2e} > 1e-6", coord <= 1e-6),
        (f"objective gap {gap:.2e} > 1e-9", gap <= 1e-9),
        (f"runtime {elapsed:.1f}s >= 60s", elapsed < 60),
    ])


def test_appendix_constants():
    worst = {}
    for sc in random_batch(42, 100):
        for k, v in appendix_errors(sc).items():
            worst[k] = max(worst.get(k, 0.0), v)
    report("2 eta, Schur complement, block inverse and unconstrained delay", [
        (f"eta rel {worst['eta_rel']:.2e}", worst["eta_rel"] <= 1e-10),
        (f"schur rel {worst['schur_rel']:.2e}", worst["schur_rel"] <= 1e-10),
        (f"C^-1 C - I {worst['c_inverse']:.2e}", worst["c_inverse"] <= 1e-10),
        (f"theta error {worst['theta_unconstrained']:.2e}", worst["theta_unconstrained"] <= 1e-9),
    ])


def test_gain_versus_delay_bound():
    avg = by_designer(run_fig4(default_scenario()))
    t1, base = avg["theorem1"], avg["baseline"]
    tmax = sorted(t1)
    series = [t1[t] for t in tmax]
    report("3 average gain versus t_max (N_t = 256)", [
        (f"gain at 400 ps {t1[400]:.4f} outside [0.92, 0.96]", 0.92 <= t1[400] <= 0.96),
        ("closed-form curve not monotone", all(b >= a - 1e-12 for a, b in zip(series, series[1:]))),
        ("baseline differs for t_max >= 350 ps", all(abs(t1[t] - base[t]) <= 1e-9 for t in tmax if t >= 350)),
        (f"baseline {base[340]:.4f} not below {t1[340]:.4f} at 340 ps", base[340] < t1[340]),
    ])


def test_gain_versus_antennas():
    avg = by_designer(run_fig3(default_scenario()))
    t1, base = avg["theorem1"], avg["baseline"]
    report("4 average gain versus N_t (t_max = 340 ps)", [
        ("designs differ at N_t = 32/64", all(abs(t1[n] - base[n]) <= 1e-9 for n in (32, 64))),
        ("baseline above closed form at 256/512/1024", all(t1[n] >= base[n] for n in (256, 512, 1024))),
        (f"no strict gap at 1024 ({t1[1024]:.4f} vs {base[1024]:.4f})", t1[1024] > base[1024]),
    ])


def test_beam_squint_profile():
    recs = run_fig1(default_scenario().grid, 0.8, (16, 128, 1024))
    centre = default_scenario().grid.center
    off = [np.mean(np.delete(r.gains, centre - 1)) for r in recs]
    report("5 carrier-matched beam squint", [
        ("centre gain != 1", all(abs(r.gains[centre - 1] - 1) <= 1e-12 for r in recs)),
        (f"off-centre means {off} not decreasing", off[0] > off[1] > off[2]),
        (f"edge gain {recs[2].gains[0]:.4f} >= 0.05 at N_t = 1024", recs[2].gains[0] < 0.05),
    ])


def test_property_suite():
    rng = np.random.default_rng(42)
    batch = random_batch(42, 30)
    sign_err = max(sign_invariance_error(sc) for sc in batch)
    x0 = float(rng.uniform(-np.pi, np.pi))
    lemma = lemma2_check(x0, x0 + rng.uniform(1e-6, np.pi - 1e-6, 1000) * rng.choice([-1.0, 1.0], 1000))
    grid = OfdmGrid(300e9, 30e9, 33)
    modulus, decomp = 0.0, 0.0
    for _ in range(10):
        geom = ArrayGeometry(64, 8, 2)
        psi = tuple(rng.uniform(-1, 1, 2))
        sc = ScenarioParams(grid, geom, psi, float(rng.uniform(0, 400e-12)))
        d = theorem1_design(sc)
        for l in (1, 2):
            modulus = max(modulus, float(np.max(np.abs(np.abs(effective_beams(d, grid, l)) - 1 / 8))))
        decomp = max(decomp, abs(objective(d, grid, psi) - objective_matrix(d, grid, psi)))
    fault_code = cli.main(["verify", "--count", "10", "--inject-fault", "--out", "/dev/null"])
    report("6 properties and negative control", [
        (f"sign invariance {sign_err:.2e}", sign_err <= 1e-12),
        ("lemma 2 ordering on 1000 samples", lemma.ok),
        (f"constant modulus {modulus:.2e}", modulus <= 1e-12),
        (f"objective decomposition {decomp:.2e}", decomp <= 1e-9),
        (f"fault injection exit code {fault_code} != 2", fault_code == 2),
    ])


def test_criteria_command(capsys):
    code = cli.main(["criteria"])
    lines = capsys.readouterr().out.splitlines()
    report("7 selection rules (t_max >= 330 ps, N_t <= 263)", [
        (f"exit code {code}", code == 0),
        (f"delay line {lines[0] if lines else ''!r}", "tmax_min_ps = 330" in lines),
        (f"antenna line {lines[1] if len(lines) > 1 else ''!r}", "nt_max = 263" in lines),
    ])
