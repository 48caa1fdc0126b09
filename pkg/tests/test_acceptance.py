"""Acceptance suite: one test per criterion, each recording a pass/fail line
that is repeated in the pytest terminal summary."""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from reldoppler import (
    ASTAR,
    AV,
    DE,
    LF,
    DopplerLaw,
    FitError,
    MonotoneMap,
    doppler_de,
    doppler_general,
    dstar_law,
    general_composition_law,
    general_doppler_law,
    lorentz_fitzgerald,
    random_monotone_map,
    u_lf_map,
    velocity_add_av,
    velocity_add_general,
    velocity_add_perp,
)
from reldoppler.axioms import (
    DEFAULT_GRID,
    check_DC,
    check_LOI,
    check_M,
    check_R,
    witness_lf_vs_dstar,
)
from reldoppler.recover import (
    build_additive_rep,
    extract_f,
    fit_power_exponent,
    recover_representation,
)

BETAS = DEFAULT_GRID.betas()
LAMBDAS = DEFAULT_GRID.lambdas()


def rel_err(got, want):
    got, want = np.asarray(got, float), np.asarray(want, float)
    return float(np.max(np.abs(got - want) / np.abs(want)))


def generator(rng):
    u = random_monotone_map(rng, int(rng.integers(8, 17)))
    return u, float(rng.uniform(0.1, 3.0))


def test_criterion_01_exact_identities(record):
    errs = {
        "de(1,0.6)=0.5": rel_err(doppler_de(1.0, 0.6), 0.5),
        "lf(1,0.6)=0.8": rel_err(lorentz_fitzgerald(1.0, 0.6), 0.8),
        "av(0.5,0.5)=0.8": rel_err(velocity_add_av(0.5, 0.5), 0.8),
        "perp(0.6,0.8)=sqrt(0.7696)": rel_err(velocity_add_perp(0.6, 0.8), math.sqrt(0.7696)),
    }
    worst = max(errs.values())
    assert record(1, worst <= 1e-12, f"max relative error {worst:.2e} (tol 1e-12)")


def test_criterion_02_identity_specialization(record):
    u = MonotoneMap.identity()
    b = np.linspace(0.0, 0.99, 25)
    lam = LAMBDAS[:, None]
    e_d = rel_err(doppler_general(lam, b, u, 0.5), doppler_de(lam, b))
    V, W = np.meshgrid(b, b, indexing="ij")
    got, want = velocity_add_general(V, W, u), velocity_add_av(V, W)
    nz = want > 0
    e_a = max(rel_err(got[nz], want[nz]), float(np.max(np.abs(got[~nz]))))
    ok = e_d <= 1e-12 and e_a <= 1e-12
    assert record(2, ok, f"D-dagger vs DE {e_d:.2e}, A-dagger vs AV {e_a:.2e} (tol 1e-12)")


def test_criterion_03_length_contraction_bridge(record):
    r = check_R(LF, ASTAR, DEFAULT_GRID, tol=1e-9)
    m = check_M(LF, ASTAR, DEFAULT_GRID)
    u = u_lf_map()
    lam = LAMBDAS[:, None]
    e_d = rel_err(doppler_general(lam, BETAS, u, 0.5), lorentz_fitzgerald(lam, BETAS))
    V, W = np.meshgrid(BETAS, BETAS, indexing="ij")
    got, want = velocity_add_general(V, W, u), velocity_add_perp(V, W)
    nz = want > 0
    e_a = max(rel_err(got[nz], want[nz]), float(np.max(np.abs(got[~nz]))))
    ok = r.passed and m.passed and e_d <= 1e-10 and e_a <= 1e-10
    assert record(3, ok, f"R {r.passed} ({r.max_violation:.1e}), M {m.passed}, "
                         f"D-dagger(u_lf) vs LF {e_d:.1e}, A-dagger(u_lf) vs perp {e_a:.1e}")


def test_criterion_04_soundness_sweep(record):
    rng = np.random.default_rng(4)
    gens = [generator(rng) for _ in range(11)]
    same_ok = mismatch_ok = agree = True
    worst_same, least_mismatch = 0.0, np.inf
    for i in range(10):
        u, xi = gens[i]
        L, op = general_doppler_law(u, xi), general_composition_law(u)
        r, m = check_R(L, op, tol=1e-7), check_M(L, op)
        same_ok &= r.passed and m.passed
        agree &= r.passed == m.passed
        worst_same = max(worst_same, r.max_violation)

        op_other = general_composition_law(gens[i + 1][0])
        r, m = check_R(L, op_other, tol=1e-7), check_M(L, op_other)
        mismatch_ok &= (not r.passed) and r.max_violation > 1e-3
        agree &= r.passed == m.passed
        least_mismatch = min(least_mismatch, r.max_violation)
    ok = same_ok and mismatch_ok and agree
    assert record(4, ok, f"10 same-u pairs pass (worst R {worst_same:.1e}); 10 mismatched "
                         f"fail (least R {least_mismatch:.2e}); R/M agree {agree}")


def test_criterion_05_length_contraction_inconsistency(record):
    r, m = check_R(LF, AV), check_M(LF, AV)
    x1, x2 = witness_lf_vs_dstar(0.5, 0.8)
    ok = (not r.passed and not m.passed and abs(x1 - 0.130930) <= 1e-5
          and abs(x2 - 0.232487) <= 1e-5 and x2 - x1 > 0.1)
    assert record(5, ok, f"R fails ({r.max_violation:.3f} at {r.worst_tuple}), M fails "
                         f"({m.details['counterexamples']} counterexamples); "
                         f"witness ({x1:.6f}, {x2:.6f})")


def test_criterion_06_recovery_round_trip(record):
    fit = recover_representation(DE, AV)
    probe = np.unique(np.concatenate([BETAS, np.linspace(0, 0.99, 991)]))
    xi_err = abs(fit.xi.xi - 0.5)
    u_err = float(np.max(np.abs(fit.u(probe) - probe)))
    ok_de = xi_err <= 1e-8 and u_err <= 1e-9

    fit2 = recover_representation(LF, ASTAR)
    ok_lf = fit2.residual_max_L <= 1e-7 and fit2.residual_max_op <= 1e-7

    rng = np.random.default_rng(6)
    worst, slowest = 0.0, 0.0
    V, W = np.meshgrid(BETAS, BETAS, indexing="ij")
    lam = LAMBDAS[:, None]
    for _ in range(5):
        u0, xi0 = generator(rng)
        L, op = general_doppler_law(u0, xi0), general_composition_law(u0)
        t0 = time.perf_counter()
        r = recover_representation(L, op)
        slowest = max(slowest, time.perf_counter() - t0)
        e_L = rel_err(r.rebuilt_doppler()(lam, BETAS), L(lam, BETAS))
        want = op(V, W)
        nz = want > 0
        e_op = rel_err(r.rebuilt_composition()(V, W)[nz], want[nz])
        worst = max(worst, e_L, e_op)
    ok_rand = worst <= 1e-6 and slowest <= 10.0
    ok = ok_de and ok_lf and ok_rand
    assert record(6, ok, f"(de,av) xi err {xi_err:.1e}, u err {u_err:.1e}; (lf,perp) residuals "
                         f"{fit2.residual_max_L:.1e}/{fit2.residual_max_op:.1e}; random rebuilt "
                         f"{worst:.1e}, slowest {slowest:.2f}s")


def test_criterion_07_additive_representation(record):
    rep = build_additive_rep(AV)
    e_av = float(np.max(np.abs(rep.phi - np.arctanh(rep.betas) / math.atanh(0.5))))
    rep2 = build_additive_rep(ASTAR)
    e_perp = float(np.max(np.abs(rep2.phi - np.log1p(-rep2.betas ** 2) / math.log(0.75))))
    ok = e_av <= 1e-9 and e_perp <= 1e-9
    assert record(7, ok, f"AV vs artanh {e_av:.1e} over {rep.betas.size} points, perp vs "
                         f"log {e_perp:.1e} over {rep2.betas.size} points (tol 1e-9)")


def test_criterion_08_exponent_fit(record):
    rng = np.random.default_rng(8)
    worst = 0.0
    for xi in rng.uniform(0.05, 5.0, 20):
        got, _ = fit_power_exponent(extract_f(dstar_law(xi), BETAS))
        worst = max(worst, abs(got.xi - xi))
    try:
        fit_power_exponent(extract_f(LF, BETAS))
        lf_rejected = False
    except FitError:
        lf_rejected = True
    ok = worst <= 1e-9 and lf_rejected
    assert record(8, ok, f"max |xi_hat - xi| {worst:.1e} over 20 draws; LF raises FitError "
                         f"{lf_rejected}")


def _cli(*argv, cwd=None):
    return subprocess.run([sys.executable, "-m", "reldoppler", *map(str, argv)],
                          capture_output=True, text=True, cwd=cwd)


def test_criterion_09_cli_round_trip(record, tmp_path):
    n = 300
    for law in ("de", "av", "lf", "astar"):
        assert _cli("table", law, "--n-beta", n, "--output", tmp_path / f"{law}.csv").returncode == 0
    assert _cli("table", "dstar", "--xi", 0.37, "--output", tmp_path / "ds.csv").returncode == 0

    p = _cli("fit", "exponent", "--input", tmp_path / "ds.csv")
    xi_ds = json.loads(p.stdout)["xi"]
    ok_ds = p.returncode == 0 and abs(xi_ds - 0.37) <= 1e-8

    p = _cli("fit", "full", "--input", tmp_path / "de.csv", "--op-input", tmp_path / "av.csv")
    d = json.loads(p.stdout)
    u_err = max(abs(b - v) for b, v in d["u"])
    ok_de = p.returncode == 0 and abs(d["xi"] - 0.5) <= 1e-8 and u_err <= 1e-9

    p = _cli("fit", "full", "--input", tmp_path / "lf.csv", "--op-input", tmp_path / "astar.csv")
    d2 = json.loads(p.stdout)
    ok_lf = p.returncode == 0 and d2["residual_max_L"] <= 1e-7 and d2["residual_max_op"] <= 1e-7

    codes = (_cli("check", "R", "--law", "de", "--op", "av").returncode,
             _cli("check", "R", "--law", "lf", "--op", "av").returncode,
             _cli("eval", "de", "--lambda", 1, "--v", 1.0).returncode)
    ok_codes = codes == (0, 1, 2)
    ok = ok_ds and ok_de and ok_lf and ok_codes
    assert record(9, ok, f"dstar xi {xi_ds:.12f}; (de,av) xi err {abs(d['xi'] - 0.5):.1e}, "
                         f"u err {u_err:.1e}; (lf,perp) residuals {d2['residual_max_L']:.1e}/"
                         f"{d2['residual_max_op']:.1e}; exit codes {codes}")


def test_criterion_10_ordinal_calibration(record):
    rng = np.random.default_rng(10)
    factored = {"de": DE, "lf": LF, "dstar(0.37)": dstar_law(0.37), "dstar(2.5)": dstar_law(2.5),
                "dgen(u_lf, 0.5)": general_doppler_law(u_lf_map(), 0.5)}
    for i in range(3):
        u, xi = generator(rng)
        factored[f"dgen(random {i})"] = general_doppler_law(u, xi)
    failures = [name for name, L in factored.items()
                if not (check_LOI(L).passed and check_DC(L).passed)]

    offset = DopplerLaw(lambda lam, b: np.asarray(lam) + (1.0 - np.asarray(b)), "offset")
    rep = check_LOI(offset)
    genuine = False
    if not rep.passed and len(rep.worst_tuple) == 5:
        x, y, z, w, a = rep.worst_tuple
        genuine = (np.sign(offset(x, y) - offset(z, w))
                   * np.sign(offset(a * x, y) - offset(a * z, w))) < 0
    ok = not failures and genuine
    assert record(10, ok, f"{len(factored)} factored laws pass LOI and DC "
                          f"(failures: {failures or 'none'}); offset law fails LOI at "
                          f"{[round(v, 4) for v in rep.worst_tuple]}")
