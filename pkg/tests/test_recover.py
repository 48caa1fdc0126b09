import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reldoppler import (
    ASTAR,
    AV,
    DE,
    LF,
    BisectionError,
    CompositionLaw,
    ConsistencyError,
    DomainError,
    DopplerLaw,
    FitError,
    HomogeneityError,
    MonotonicityError,
    dstar_law,
    general_composition_law,
    general_doppler_law,
    random_monotone_map,
    u_lf,
)
from reldoppler.axioms import DEFAULT_GRID
from reldoppler.recover import (
    FactorSamples,
    RecoverConfig,
    build_additive_rep,
    extract_f,
    fit_power_exponent,
    fix_gauge,
    recover_representation,
    recover_u,
)

BETAS = DEFAULT_GRID.betas()


@pytest.fixture(scope="module")
def rep_av():
    return build_additive_rep(AV)


@pytest.fixture(scope="module")
def rep_perp():
    return build_additive_rep(ASTAR)


@pytest.fixture(scope="module")
def fit_de_av():
    return recover_representation(DE, AV)


@pytest.fixture(scope="module")
def fit_lf_perp():
    return recover_representation(LF, ASTAR)


# extract_f

def test_extract_f_de():
    s = extract_f(DE, BETAS)
    np.testing.assert_allclose(s.f_values, np.sqrt((1 - BETAS) / (1 + BETAS)), rtol=1e-14)
    assert s.homogeneity_deviation <= 1e-10


def test_extract_f_prepends_zero_speed():
    s = extract_f(LF, [0.6])
    np.testing.assert_array_equal(s.betas, [0.0, 0.6])
    assert s.f_values[0] == 1.0
    assert s.f_values[1] == pytest.approx(0.8, rel=1e-14)


@given(st.floats(1e-3, 10.0))
def test_extract_f_rejects_additive_offsets(c):
    offset = DopplerLaw(lambda lam, b: DE(lam, b) + c * np.asarray(b), "offset")
    with pytest.raises(HomogeneityError):
        extract_f(offset, BETAS)


@given(st.floats(0.0, 2.0))
def test_extract_f_accepts_factored_laws(c):
    law = DopplerLaw(lambda lam, b: DE(lam, b) / (1 + c * np.asarray(b) ** 2), "scaled")
    assert extract_f(law, BETAS).homogeneity_deviation <= 1e-12


def test_extract_f_rejects_moving_rest_wavelength():
    with pytest.raises(HomogeneityError):
        extract_f(DopplerLaw(lambda lam, b: DE(lam, b) + 1e-3 * np.asarray(lam), "s"), BETAS)


def test_extract_f_rejects_increasing_factor():
    blue = DopplerLaw(lambda lam, b: np.asarray(lam) * (1 + np.asarray(b)), "blue")
    with pytest.raises(MonotonicityError):
        extract_f(blue, BETAS)


def test_factor_samples_validation():
    with pytest.raises(MonotonicityError):
        FactorSamples([0.0, 0.5, 0.4], [1.0, 0.9, 0.8])
    with pytest.raises(DomainError):
        FactorSamples([0.0, 1.0], [1.0, 0.5])


# fit_power_exponent

def test_fit_exponent_is_exact(rng):
    for xi in rng.uniform(0.05, 5.0, 20):
        got, resid = fit_power_exponent(extract_f(dstar_law(xi), BETAS))
        assert abs(got.xi - xi) <= 1e-9
        assert resid <= 1e-12


def test_fit_exponent_de_is_half():
    xi, _ = fit_power_exponent(extract_f(DE, BETAS))
    assert xi.xi == pytest.approx(0.5, abs=1e-12)


def test_fit_exponent_rejects_length_contraction():
    samples = extract_f(LF, BETAS)
    with pytest.raises(FitError):
        fit_power_exponent(samples)
    _, resid = fit_power_exponent(samples, max_residual=None)
    assert resid > 0.01


def test_fit_exponent_rejects_nonpositive_values():
    with pytest.raises(FitError):
        fit_power_exponent(FactorSamples([0.0, 0.5], [1.0, 0.0]))
    with pytest.raises(FitError):
        fit_power_exponent(FactorSamples([0.0], [1.0]))


# additive representation

def test_phi_av_matches_rapidity(rep_av):
    oracle = np.arctanh(rep_av.betas) / np.arctanh(0.5)
    assert np.max(np.abs(rep_av.phi - oracle)) <= 1e-9
    probe = np.linspace(0, 0.99, 397)
    assert np.max(np.abs(rep_av(probe) - np.arctanh(probe) / np.arctanh(0.5))) <= 1e-9


def test_phi_perp_matches_log(rep_perp):
    oracle = np.log1p(-rep_perp.betas ** 2) / math.log(0.75)
    assert np.max(np.abs(rep_perp.phi - oracle)) <= 1e-9
    probe = np.linspace(0, 0.99, 397)
    assert np.max(np.abs(rep_perp(probe) - np.log1p(-probe ** 2) / math.log(0.75))) <= 1e-9


def test_phi_basics(rep_av):
    assert rep_av(0.0) == 0.0
    assert rep_av(0.5) == 1.0
    assert rep_av.betas[0] == 0.0 and rep_av.betas[-1] == 0.99
    assert np.all(np.diff(rep_av.betas) > 0) and np.all(np.diff(rep_av.phi) > 0)
    assert rep_av.additivity_residual <= 1e-10


_REP = build_additive_rep(AV)


@given(st.floats(0.0, 0.9), st.floats(0.0, 0.9))
def test_phi_is_additive(v, w):
    s = AV(v, w)
    if s > 0.99:
        return
    assert _REP(s) == pytest.approx(_REP(v) + _REP(w), abs=1e-10)


@given(st.floats(0.0, 6.0))
def test_phi_inverse_roundtrip(p):
    assert _REP(_REP.inverse(p)) == pytest.approx(p, abs=1e-10)


def test_build_rejects_idempotent_operation():
    flat = CompositionLaw(lambda v, w: np.maximum(v, w), "max")
    with pytest.raises(MonotonicityError):
        build_additive_rep(flat)


def test_build_requires_bracketable_halving():
    # Einstein addition above 0.3, max below: continuous doubling, broken halving
    def jump(v, w):
        v, w = np.asarray(v, float), np.asarray(w, float)
        return np.where(np.maximum(v, w) >= 0.3, AV(v, w), np.maximum(v, w))

    with pytest.raises(BisectionError):
        build_additive_rep(CompositionLaw(jump, "jump"))


def test_build_rejects_non_group_operation():
    bent = CompositionLaw(lambda v, w: AV(v, w) + 0.01 * np.asarray(v) * np.asarray(w)
                          * (1 - np.asarray(v)) * (1 - np.asarray(w)), "bent")
    with pytest.raises(ConsistencyError):
        build_additive_rep(bent)


@pytest.mark.parametrize("kwargs", [{"unit_point": 0.995}, {"unit_point": 0.0}, {"depth": 3}])
def test_build_argument_checks(kwargs):
    with pytest.raises((DomainError, ValueError)):
        build_additive_rep(AV, **kwargs)


# gauge and speed map

def test_fix_gauge_av(rep_av):
    assert fix_gauge(rep_av, 0.5) == pytest.approx(0.5 * math.log(3), abs=1e-12)
    assert fix_gauge(rep_av, 0.3) == pytest.approx(0.5 * math.log(3), abs=1e-9)


def test_fix_gauge_perp_at_unit_point(rep_perp):
    assert fix_gauge(rep_perp, 0.5) == pytest.approx(math.atanh(0.5), abs=1e-12)


def test_fix_gauge_rejects_zero_anchor(rep_av):
    with pytest.raises(DomainError):
        fix_gauge(rep_av, 0.0)


def test_recover_u_av_is_identity(rep_av):
    u = recover_u(rep_av, math.atanh(0.5))
    probe = np.linspace(0, 0.99, 199)
    assert np.max(np.abs(u(probe) - probe)) <= 1e-10
    assert u(0.0) == 0.0
    knots = u.knots
    np.testing.assert_allclose(knots[:, 1], knots[:, 0], atol=1e-10)


def test_recover_u_perp_is_u_lf_up_to_gauge(rep_perp):
    # artanh(u_lf(b)) = -ln(1 - b^2) / 2, so the u_lf gauge is k = -ln(0.75) / 2
    u = recover_u(rep_perp, -0.5 * math.log(0.75))
    probe = np.linspace(0, 0.99, 199)
    assert np.max(np.abs(u(probe) - u_lf(probe))) <= 1e-9
    V, W = np.meshgrid(BETAS, BETAS, indexing="ij")
    inside = ASTAR(V, W) <= 0.99
    rebuilt = general_composition_law(recover_u(rep_perp, fix_gauge(rep_perp)))
    assert np.max(np.abs(rebuilt(V[inside], W[inside]) - ASTAR(V[inside], W[inside]))) <= 1e-8


def test_recover_u_requires_positive_gauge(rep_av):
    with pytest.raises(DomainError):
        recover_u(rep_av, 0.0)


# full pipeline

def test_recover_de_av(fit_de_av):
    r = fit_de_av
    assert r.xi.xi == pytest.approx(0.5, abs=1e-8)
    probe = np.linspace(0, 0.99, 199)
    assert np.max(np.abs(r.u(probe) - probe)) <= 1e-9
    assert r.residual_max_L <= 1e-9 and r.residual_max_op <= 1e-9
    assert r.xi_spread <= 1e-9


def test_recover_lf_perp(fit_lf_perp):
    r = fit_lf_perp
    assert r.residual_max_L <= 1e-7 and r.residual_max_op <= 1e-7
    g = r.regauged(-0.5 * math.log(0.75))
    assert g.xi.xi == pytest.approx(0.5, abs=1e-9)
    probe = np.linspace(0, 0.99, 199)
    assert np.max(np.abs(g.u(probe) - u_lf(probe))) <= 1e-9


def test_recover_mismatched_pair_raises():
    with pytest.raises(ConsistencyError):
        recover_representation(DE, ASTAR)


def test_gauge_covariance(fit_lf_perp):
    r = fit_lf_perp
    lam = DEFAULT_GRID.lambdas()[:, None]
    L0, op0 = r.rebuilt_doppler(), r.rebuilt_composition()
    V, W = np.meshgrid(BETAS[:20], BETAS[:20], indexing="ij")
    for c in (0.3, 1.7, 4.0):
        g = r.regauged(r.gauge_k * c)
        assert g.xi.xi == pytest.approx(r.xi.xi / c, rel=1e-14)
        np.testing.assert_allclose(g.rebuilt_doppler()(lam, BETAS), L0(lam, BETAS), rtol=1e-12)
        np.testing.assert_allclose(g.rebuilt_composition()(V, W), op0(V, W), rtol=1e-12,
                                   atol=1e-15)


def test_recover_random_generator(rng):
    u0 = random_monotone_map(rng, 12)
    xi0 = rng.uniform(0.1, 3.0)
    L, op = general_doppler_law(u0, xi0), general_composition_law(u0)
    r = recover_representation(L, op)
    lam = DEFAULT_GRID.lambdas()[:, None]
    np.testing.assert_allclose(r.rebuilt_doppler()(lam, BETAS), L(lam, BETAS), rtol=1e-6)
    V, W = np.meshgrid(BETAS, BETAS, indexing="ij")
    np.testing.assert_allclose(r.rebuilt_composition()(V, W), op(V, W), rtol=1e-6)


def test_report_json(fit_de_av):
    d = json.loads(fit_de_av.to_json())
    for key in ("xi", "gauge_k", "unit_point", "anchor", "residual_max_L", "residual_max_op",
                "phi", "u"):
        assert key in d
    assert d["phi"][0] == [0.0, 0.0]
    assert len(d["u"]) == len(d["phi"])
    np.testing.assert_allclose([p[1] for p in d["u"]], [p[0] for p in d["u"]], atol=1e-9)


def test_config_custom_gauge():
    r = recover_representation(DE, AV, RecoverConfig(unit_point=0.3, anchor=0.7))
    assert r.xi.xi == pytest.approx(0.5, abs=1e-8)
    assert r.u(0.7) == pytest.approx(0.7, abs=1e-12)
