import json
import math

import numpy as np
import pytest

from growthcat import StopRule
from growthcat.montecarlo import (EstimateCI, EstimationError, ExitAtZero, HeightExceeds,
                                  JumpTimeMean, ReturnTime, atom_mass_check, estimate,
                                  ks_distance, occupation_vs_speed, report_json, sample_embedded,
                                  sample_values, simulate_many, summarize, verify)


def test_estimate_independent_of_threads(td):
    f = ExitAtZero(0.0, 1.0)
    assert estimate(td, f, 600, 5, threads=1) == estimate(td, f, 600, 5, threads=3)


def test_half_batches_merge(td):
    f = HeightExceeds(0.7)
    full, _ = sample_values(td, f, 400, 9)
    a, _ = sample_values(td, f, 200, 9)
    b, _ = sample_values(td, f, 200, 9, start=200, threads=2)
    assert np.array_equal(full, np.concatenate([a, b]))


def test_simulate_many_independent_of_threads(fig2):
    stop = StopRule(horizon=5.0)
    one = simulate_many(fig2, 1.0, stop, 7, 3)
    many = simulate_many(fig2, 1.0, stop, 7, 3, threads=3)
    assert [t.to_csv() for t in one] == [t.to_csv() for t in many]
    assert len({t.to_csv() for t in one}) == 7


def test_sample_embedded_independent_of_threads(fig2):
    assert np.array_equal(sample_embedded(fig2, 1.0, 50, 4), sample_embedded(fig2, 1.0, 50, 4, 2))


def test_jump_time_mean_constant_rate(make):
    spec = make({"family": "affine", "alpha0": 1, "alpha1": 1}, {"family": "constant", "beta1": 2},
                {"family": "total_disaster"})
    est = estimate(spec, JumpTimeMean(1.0), 4000, 1)
    assert abs(est.z(0.5)) < 4 and est.censored == 0


def test_all_censored(sqrtpi):
    with pytest.raises(EstimationError):
        estimate(sqrtpi, ReturnTime(1.0, max_jumps=1, horizon=1e-9), 20, 0)


def test_summarize_and_z():
    est = summarize(np.array([1.0, 2.0, 3.0, math.nan]), np.array([False, False, False, True]))
    assert (est.mean, est.n, est.censored) == (2.0, 3, 1)
    assert est.stderr == pytest.approx(1 / math.sqrt(3))
    assert EstimateCI(1.0, 0.0, 5, 0).z(1.0) == 0.0
    assert EstimateCI(1.0, 0.0, 5, 0).z(0.0) == math.inf


def test_estimate_rejects_empty(td):
    with pytest.raises(ValueError):
        estimate(td, ExitAtZero(0.0, 1.0), 0, 0)


def test_atom_mass_zero_horizon(fig1):
    assert atom_mass_check(fig1, 1.0, 0.0, 10, 0)["empirical_atom"] == 1.0


def test_atom_mass_small(td):
    r = atom_mass_check(td, 0.0, 1.0, 3000, 2)
    assert r["analytic_atom"] == pytest.approx(math.exp(-1.0))  # flow reaches 1/4, Gamma = 1
    assert abs(r["z"]) < 4


def test_occupation_range_beyond_support(td):
    r = occupation_vs_speed(td, [0.0, 1.0, 50.0, 60.0], 500, 3)
    last = r["bins"][-1]
    assert last["empirical"] == 0.0 and last["analytic"] < 1e-5
    assert r["censored"] == 0
    assert sum(b["empirical"] for b in r["bins"]) == pytest.approx(1.0)


def test_occupation_rejects(td, affine):
    with pytest.raises(ValueError):
        occupation_vs_speed(td, [0.0, 1.0, 1.0], 10, 0)
    from growthcat.analysis import NotPositiveRecurrent
    with pytest.raises(NotPositiveRecurrent):
        occupation_vs_speed(affine, [0.0, 1.0], 10, 0)


def test_ks_distance_with_atom():
    rng = np.random.default_rng(0)
    n = 20000
    x = np.where(rng.random(n) < 0.3, 0.0, rng.random(n))
    cdf = lambda v: np.where(v < 0, 0.0, np.minimum(0.3 + 0.7 * np.clip(v, 0, 1), 1.0))
    assert ks_distance(x, cdf) < 1.63 / math.sqrt(n)
    wrong = lambda v: np.where(v < 0, 0.0, np.minimum(0.5 + 0.5 * np.clip(v, 0, 1), 1.0))
    assert ks_distance(x, wrong) > 0.15


def test_ks_distance_exact_small():
    assert ks_distance([0.5], lambda v: np.clip(v, 0, 1)) == pytest.approx(0.5)


def test_report_json_deterministic():
    obj = {"a": math.inf, "b": [math.nan, -math.inf, 1.5], "c": "x"}
    text = report_json(obj)
    assert json.loads(text) == {"a": "inf", "b": ["nan", "-inf", 1.5], "c": "x"}
    assert report_json(obj) == text


def test_verify_total_disaster(td):
    records = verify(td, n=800, seed=1)
    names = [r["check"] for r in records]
    assert names[0].startswith("jump_time_mean") and "return_time(x=0)" in names
    assert sum(n.startswith("occupation") for n in names) == 10
    assert all(set(r) == {"check", "target", "estimate", "stderr", "z", "pass"} for r in records)


def test_verify_transient(affine):
    names = [r["check"] for r in verify(affine, n=300, seed=1)]
    assert "return_time(x=0)" not in names and any(n.startswith("exit_at_zero") for n in names)
