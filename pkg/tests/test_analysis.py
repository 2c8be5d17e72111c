import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from growthcat import (analytic_curve, boundary_integrals, classify, embedded_invariant,
                       excursion_height_cdf, exit_prob_up, expected_return_time, gamma_big,
                       return_time_at_zero, scale_s, speed_density, survival, time_to_reach)
from growthcat.analysis import (NotPositiveRecurrent, UnsupportedKernel, ZeroNotReflecting,
                                pre_jump_density)
from growthcat.numerics import Tolerance, integrate, integrate_to_infinity
from oracles import AFFINE_S1, EXP2_M1, EXP_M2, ONE_M_EXP_M2, SQRT_PI

SQRT = {"family": "power_law", "alpha1": 1, "a": 0.5}
CONST_DRIFT = {"family": "affine", "alpha0": 1, "alpha1": 0}
ONE = {"family": "constant", "beta1": 1}
EXP = {"family": "separable_exp"}


TIGHT = Tolerance(abs=1e-14, rel=1e-12)


def full_integral(f):
    return integrate(f, 0.0, 1.0) + integrate_to_infinity(f, 1.0)


# ------------------------------------------------------------- scale function

def test_scale_total_disaster(td):
    assert scale_s(td, 1.0) == pytest.approx(EXP2_M1, rel=1e-12)
    quad = integrate(lambda y: td.gamma(y) * math.exp(gamma_big(td, y)), 0.0, 1.0)
    assert quad == pytest.approx(EXP2_M1, rel=1e-9)
    assert scale_s(td, 0.0) == 0.0


def test_scale_affine(affine):
    assert scale_s(affine, 1.0) == pytest.approx(AFFINE_S1, rel=1e-9)
    assert scale_s(affine, math.inf) == pytest.approx(1.0, rel=1e-8)


def test_scale_needs_h0(make):
    spec = make(SQRT, ONE, {"family": "separable_linear"})
    with pytest.raises(UnsupportedKernel):
        scale_s(spec, 1.0)
    with pytest.raises(UnsupportedKernel):
        scale_s(make(SQRT, ONE, {"family": "uniform_fraction"}), 1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 5.0), st.floats(0.01, 5.0))
def test_scale_strictly_increasing(x, dx):
    from growthcat import load_model
    spec = load_model("u0_sqrt_pi")
    assert scale_s(spec, x + dx) > scale_s(spec, x)


# ------------------------------------------------------------- exit probabilities

def test_exit_total_disaster(td):
    assert exit_prob_up(td, 0.0, 1.0) == pytest.approx(EXP_M2, rel=1e-12)


def test_exit_affine(affine):
    expect = (2 - math.exp(-0.5)) / (2 - math.exp(-2))
    assert exit_prob_up(affine, 0.5, 2.0) == pytest.approx(expect, rel=1e-9)
    assert exit_prob_up(affine, 2.0 - 1e-9, 2.0) == pytest.approx(1.0, abs=1e-8)


def test_exit_decreasing_in_b(sqrtpi):
    vals = [exit_prob_up(sqrtpi, 0.3, b) for b in (0.5, 1.0, 2.0, 4.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_exit_rejects_bad_range(td):
    with pytest.raises(ValueError):
        exit_prob_up(td, 1.0, 1.0)


@pytest.mark.parametrize("name", ["u0_sqrt_pi", "exp_affine", "fig1"])
@settings(max_examples=20, deadline=None)
@given(x=st.floats(0.0, 3.0), dx=st.floats(0.01, 3.0))
def test_exit_complement_form(name, x, dx):
    from growthcat import load_model
    spec = load_model(name)
    b = x + dx
    h0 = spec.kernel.h_zero
    sb = scale_s(spec, b)
    p0 = h0 * sb / (1 + h0 * sb)
    p = p0 * (1 - scale_s(spec, x) / sb)
    assert exit_prob_up(spec, x, b) + p == pytest.approx(1.0, abs=1e-8)


@settings(max_examples=30, deadline=None)
@given(x=st.floats(0.0, 4.0), dx=st.floats(1e-3, 4.0))
def test_total_disaster_exit_is_survival(x, dx):
    from growthcat import load_model
    td = load_model("total_disaster")
    b = x + dx
    assert exit_prob_up(td, x, b) == pytest.approx(survival(td, x, time_to_reach(td, x, b)),
                                                   rel=1e-8)


# ------------------------------------------------------------- excursion heights

def test_height_total_disaster(td):
    assert excursion_height_cdf(td, 1.0) == pytest.approx(ONE_M_EXP_M2, rel=1e-12)
    assert excursion_height_cdf(td, 1e-12) == pytest.approx(0.0, abs=1e-5)


def test_height_mass_at_infinity(affine):
    assert excursion_height_cdf(affine, 1e3) == pytest.approx(0.5, rel=1e-8)


def test_height_needs_reflecting_zero(absorbed):
    with pytest.raises(ZeroNotReflecting):
        excursion_height_cdf(absorbed, 1.0)


# ------------------------------------------------------------- speed density

def test_speed_sqrtpi(sqrtpi):
    sd = speed_density(sqrtpi)
    assert sd.mass == pytest.approx(SQRT_PI, rel=1e-9)
    assert sd.C == pytest.approx(1 / SQRT_PI, rel=1e-9)
    assert full_integral(sd) == pytest.approx(1.0, rel=1e-8)


def test_speed_total_disaster(td):
    assert speed_density(td).mass == pytest.approx(1.0, rel=1e-9)


def test_speed_unnormalizable(affine):
    sd = speed_density(affine)
    assert not sd.normalizable and sd.mass == math.inf


def test_speed_non_separable(make):
    with pytest.raises(UnsupportedKernel):
        speed_density(make(SQRT, ONE, {"family": "fixed_fraction", "u": 0.5}))


@pytest.mark.parametrize("name", ["u0_sqrt_pi", "total_disaster", "fig2"])
def test_stationarity_identity(name):
    from growthcat import load_model
    spec = load_model(name)
    sd = speed_density(spec)
    k = spec.kernel
    tilde = lambda y: spec.alpha(y) * sd(y)
    for y in np.linspace(0.05, 6.0, 20):
        rhs = integrate_to_infinity(lambda z: spec.gamma(z) * k.cdf(z, y) * tilde(z), y, TIGHT)
        assert tilde(y) == pytest.approx(rhs, rel=1e-8)


# ------------------------------------------------------------- classification

def test_classify_rows(td, affine, sqrtpi, fig1, fig2, absorbed):
    r = classify(td)
    assert (r.zero_class, r.recurrence) == ("regular", "positive_recurrent")
    assert r.s_infinity == math.inf and r.pi_mass == pytest.approx(1.0)
    r = classify(affine)
    assert r.recurrence == "transient_to_infinity" and r.s_infinity == pytest.approx(1.0)
    assert classify(sqrtpi).recurrence == "positive_recurrent"
    assert classify(fig2).recurrence == "positive_recurrent"
    r = classify(fig1)
    assert r.recurrence == "hits_infinity_finite_time_possible"
    assert r.infinity_class == "inaccessible" and r.diagnostics
    r = classify(absorbed)
    assert (r.zero_class, r.recurrence) == ("exit", "transient_absorbed_at_zero")


def test_classify_entrance_and_unknown(make):
    r = classify(make(SQRT, ONE, {"family": "separable_linear"}))
    assert r.zero_class == "entrance" and r.recurrence == "unknown"
    r = classify(make({"family": "power_law", "alpha1": 1, "a": 1}, ONE,
                      {"family": "uniform_fraction"}))
    assert r.zero_class == "natural" and r.recurrence == "unknown"


def test_classify_null_recurrent(make):
    # gamma = 1 and h = e^y: pi ~ y^(-1/2), s(x) = x
    r = classify(make(SQRT, {"family": "power_law", "beta1": 1, "b": 0.5}, EXP))
    assert r.recurrence == "null_recurrent"


def test_classify_accessible_infinity(make):
    r = classify(make({"family": "power_law", "alpha1": 1, "a": 2},
                      {"family": "power_law", "beta1": 1, "b": 0}, {"family": "total_disaster"}))
    assert r.infinity_class == "accessible" and r.gamma_infinity_finite


def test_report_dict_is_json_ready(fig1):
    import json
    json.dumps(classify(fig1).to_dict(), allow_nan=False)


# ------------------------------------------------------------- return times

def test_return_time_sqrtpi(sqrtpi):
    assert return_time_at_zero(sqrtpi) == pytest.approx(SQRT_PI, rel=1e-8)
    assert return_time_at_zero(sqrtpi) == pytest.approx(math.gamma(0.5), rel=1e-8)
    assert expected_return_time(sqrtpi, 0.0) == return_time_at_zero(sqrtpi)
    # u(x) = u(0) - 2 sqrt(x) + O(x) near 0
    assert expected_return_time(sqrtpi, 1e-8) == pytest.approx(SQRT_PI - 2e-4, abs=1e-6)


def test_return_time_not_recurrent(affine):
    with pytest.raises(NotPositiveRecurrent):
        return_time_at_zero(affine)


def test_return_time_asymptote(sqrtpi):
    x = 1e4
    assert expected_return_time(sqrtpi, x) / (2 * math.sqrt(x)) == pytest.approx(1.0, rel=0.05)


@pytest.mark.parametrize("x", [0.5, 2.0])
def test_return_time_second_form(sqrtpi, x):
    sd = speed_density(sqrtpi)
    p = sd.unnormalized
    alt = (return_time_at_zero(sqrtpi) + scale_s(sqrtpi, x) * integrate_to_infinity(p, x)
           + integrate(lambda y: scale_s(sqrtpi, y) * p(y), 0.0, x)
           - boundary_integrals(sqrtpi, x).i_zero)
    assert expected_return_time(sqrtpi, x) == pytest.approx(alt, rel=1e-8)


@pytest.mark.parametrize("x", [0.5, 1.5])
def test_return_time_generator_residual(sqrtpi, x):
    # alpha u' + beta (int_(0,x] u dH(x, .) - u) = -1; the atom at 0 ends the clock
    u = lambda y: expected_return_time(sqrtpi, y)
    h = 1e-3
    du = (-u(x + 2 * h) + 8 * u(x + h) - 8 * u(x - h) + u(x - 2 * h)) / (12 * h)
    # y = t^2 removes the square-root cusp of u at 0
    t, w = np.polynomial.legendre.leggauss(24)
    t = 0.5 * math.sqrt(x) * (t + 1)
    jump = 0.5 * math.sqrt(x) * sum(wi * u(ti * ti) * math.exp(ti * ti - x) * 2 * ti
                                    for ti, wi in zip(t, w))
    resid = sqrtpi.alpha(x) * du + sqrtpi.beta(x) * (jump - u(x)) + 1.0
    assert abs(resid) < 1e-5


# ------------------------------------------------------------- embedded invariant

def test_embedded_invariant_total_disaster(td):
    inv = embedded_invariant(td)
    assert inv.atom_at_zero == pytest.approx(1.0, rel=1e-9)
    assert inv.density(1.0) == 0.0


def test_embedded_invariant_linear(make):
    inv = embedded_invariant(make(CONST_DRIFT, ONE, {"family": "separable_linear"}))
    assert inv.atom_at_zero == 0.0
    assert full_integral(inv.density) == pytest.approx(1.0, rel=1e-8)


def test_embedded_invariant_sqrtpi(sqrtpi):
    inv = embedded_invariant(sqrtpi)
    assert inv.atom_at_zero == pytest.approx(0.5, rel=1e-8)
    assert inv.atom_at_zero + full_integral(inv.density) == pytest.approx(1.0, rel=1e-8)


def test_pre_jump_density(td, sqrtpi):
    assert full_integral(lambda y: pre_jump_density(td, y)) == pytest.approx(1.0, rel=1e-8)
    with pytest.raises(UnsupportedKernel):
        pre_jump_density(sqrtpi, 1.0)


# ------------------------------------------------------------- tabulation

def test_analytic_curve(sqrtpi, affine):
    xs = np.linspace(0.0, 3.0, 7)
    c = analytic_curve(sqrtpi, xs, b=2.0)
    lines = c.to_csv().splitlines()
    assert lines[0] == "x,s,pi,u,p_exit_b" and len(lines) == 8
    assert c.u[0] == pytest.approx(SQRT_PI, rel=1e-8)
    assert np.all(c.p_exit_b[xs >= 2.0] == 1.0)
    c = analytic_curve(affine, xs)
    assert np.all(np.isnan(c.u)) and np.all(np.isnan(c.pi)) and np.all(np.isnan(c.p_exit_b))
    assert np.all(np.isfinite(c.s))
