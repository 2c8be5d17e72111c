"""Monte Carlo estimators that check the analytic layer against simulation.

Path ``i`` always uses ``stream(seed, i)``. Batches are split into
contiguous index ranges and concatenated in index order before any
reduction, so results do not depend on the number of workers.
"""
from __future__ import annotations

import json
import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import analysis
from .embedded import sample_embedded_step
from .flow import travel_potential
from .hazard import At, expected_jump_time, hazard_potential, sample_jump_time, survival
from .numerics import integrate, invert_monotone
from .simulate import Status, StopRule, first_exit, simulate_path
from .streams import stream

Z_PASS = 3.0
Z_PASS_BINS = 4.0


class EstimationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExitAtZero:
    """Indicator that 0 is hit before the level ``b`` starting from ``x``."""
    x: float
    b: float


@dataclass(frozen=True)
class HeightExceeds:
    """Indicator that an excursion from 0 reaches ``b``."""
    b: float


@dataclass(frozen=True)
class ReturnTime:
    """Hitting time of 0 from ``x``; paths stopped by the guards are censored."""
    x: float
    max_jumps: int = 10**6
    horizon: float | None = None


@dataclass(frozen=True)
class JumpTimeMean:
    """First jump time from ``x``; paths without a jump are censored."""
    x: float


@dataclass(frozen=True)
class EstimateCI:
    mean: float
    stderr: float
    n: int
    censored: int

    def z(self, target):
        if self.stderr == 0:
            return 0.0 if self.mean == target else math.copysign(math.inf, self.mean - target)
        return (self.mean - target) / self.stderr


def _return_guard(spec, functional):
    if functional.horizon is not None:
        return functional.horizon
    scale = expected_jump_time(spec, functional.x)
    return 1e6 * (scale if math.isfinite(scale) and scale > 0 else 1.0)


def _one(spec, functional, rng, guard):
    """Value of the functional on one path and whether it was censored."""
    if isinstance(functional, ExitAtZero):
        return float(first_exit(spec, functional.x, functional.b, rng)[0]), False
    if isinstance(functional, HeightExceeds):
        return float(not first_exit(spec, 0.0, functional.b, rng)[0]), False
    if isinstance(functional, ReturnTime):
        stop = StopRule(hit_zero=True, max_jumps=functional.max_jumps, horizon=guard)
        term = simulate_path(spec, functional.x, stop, rng).terminal
        if term.status is Status.HIT_ZERO:
            return term.t, False
        return math.nan, True
    if isinstance(functional, JumpTimeMean):
        out = sample_jump_time(spec, functional.x, rng)
        return (out.t, False) if isinstance(out, At) else (math.nan, True)
    raise TypeError(f"unknown functional {functional!r}")


def _chunk(spec, functional, seed, lo, hi):
    guard = _return_guard(spec, functional) if isinstance(functional, ReturnTime) else None
    vals = np.empty(hi - lo)
    cens = np.zeros(hi - lo, dtype=bool)
    for j, i in enumerate(range(lo, hi)):
        vals[j], cens[j] = _one(spec, functional, stream(seed, i), guard)
    return vals, cens


def _split(lo, n, parts):
    parts = max(1, min(parts, n))
    edges = [lo + (n * k) // parts for k in range(parts + 1)]
    return list(zip(edges[:-1], edges[1:]))


def _run(fn, args, lo, n, threads):
    """Apply ``fn(*args, lo_k, hi_k)`` over contiguous chunks; results in index order."""
    chunks = _split(lo, n, threads)
    if len(chunks) == 1:
        return [fn(*args, *chunks[0])]
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=len(chunks), mp_context=ctx) as pool:
        futures = [pool.submit(fn, *args, a, b) for a, b in chunks]
        return [f.result() for f in futures]


def sample_values(spec, functional, n, seed, start=0, threads=1):
    """Raw per-path values for paths ``start .. start+n-1`` and their censoring flags."""
    parts = _run(_chunk, (spec, functional, seed), start, n, threads)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def summarize(values, censored):
    kept = values[~censored]
    if kept.size == 0:
        raise EstimationError("every path was censored")
    std = float(np.std(kept, ddof=1)) if kept.size > 1 else 0.0
    return EstimateCI(float(np.mean(kept)), std / math.sqrt(kept.size), int(kept.size),
                      int(censored.sum()))


def estimate(spec, functional, n, seed, threads=1):
    """Monte Carlo mean of ``functional`` over ``n`` independent paths."""
    if n < 1:
        raise ValueError("n must be positive")
    return summarize(*sample_values(spec, functional, n, seed, 0, threads))


def _paths_chunk(spec, x, stop, seed, lo, hi):
    return [simulate_path(spec, x, stop, stream(seed, i)) for i in range(lo, hi)]


def simulate_many(spec, x, stop, n, seed, threads=1):
    """Paths ``0 .. n-1`` from ``x``; path ``i`` uses ``stream(seed, i)``."""
    return [t for part in _run(_paths_chunk, (spec, x, stop, seed), 0, n, threads) for t in part]


# ------------------------------------------------------------- occupation

def _occupation_chunk(spec, edges, seed, lo, hi):
    fl = travel_potential(spec.drift)
    m = len(edges) - 1
    occ = np.zeros((hi - lo, m))
    tau = np.empty(hi - lo)
    cens = np.zeros(hi - lo, dtype=bool)
    stop = StopRule(hit_zero=True, max_jumps=10**6)
    for j, i in enumerate(range(lo, hi)):
        traj = simulate_path(spec, 0.0, stop, stream(seed, i))
        if traj.terminal.status is not Status.HIT_ZERO:
            cens[j] = True
            continue
        tau[j] = traj.terminal.t
        z = 0.0
        for u, nxt in zip(traj.pre, traj.post):
            for k in range(m):
                a, b = max(z, edges[k]), min(u, edges[k + 1])
                if a < b:
                    occ[j, k] += fl.increment(a, b)
            z = nxt
    return occ, tau, cens


def occupation_vs_speed(spec, bins, n_excursions, seed, threads=1):
    """Compare time spent in each bin per excursion with the speed density.

    Empirical bin mass is the ratio of mean occupation to mean excursion
    length; its standard error comes from the delta method.
    """
    report = analysis.classify(spec)
    if report.recurrence != "positive_recurrent":
        raise analysis.NotPositiveRecurrent(f"recurrence verdict is {report.recurrence}")
    edges = [float(e) for e in bins]
    if any(b <= a for a, b in zip(edges, edges[1:])):
        raise ValueError("bin edges must increase")
    parts = _run(_occupation_chunk, (spec, edges, seed), 0, n_excursions, threads)
    occ = np.concatenate([p[0] for p in parts])
    tau = np.concatenate([p[1] for p in parts])
    cens = np.concatenate([p[2] for p in parts])
    occ, tau = occ[~cens], tau[~cens]
    n = tau.size
    if n < 2:
        raise EstimationError("too few uncensored excursions")
    mean_tau = float(np.mean(tau))
    sd = analysis.speed_density(spec)
    out = []
    for k in range(len(edges) - 1):
        ratio = float(np.mean(occ[:, k])) / mean_tau
        resid = occ[:, k] - ratio * tau
        stderr = float(np.std(resid, ddof=1)) / math.sqrt(n) / mean_tau
        target = integrate(sd, edges[k], edges[k + 1])
        if stderr > 0:
            z = (ratio - target) / stderr
        else:
            z = 0.0 if abs(ratio - target) < 1e-12 else math.inf
        out.append({"lo": edges[k], "hi": edges[k + 1], "empirical": ratio, "analytic": target,
                    "stderr": stderr, "z_score": z})
    return {"bins": out, "u0_estimate": mean_tau, "n": n, "censored": int(cens.sum())}


# ------------------------------------------------------------- marginal atom

def _atom_chunk(spec, x, t, seed, lo, hi):
    stop = StopRule(horizon=t, max_jumps=1)
    return np.array([simulate_path(spec, x, stop, stream(seed, i)).n_jumps == 0
                     for i in range(lo, hi)])


def atom_mass_check(spec, x, t, n, seed, threads=1):
    """Fraction of paths without a jump by ``t`` against the survival function."""
    if t == 0:
        return {"empirical_atom": 1.0, "analytic_atom": 1.0, "stderr": 0.0, "z": 0.0, "n": n}
    hits = np.concatenate(_run(_atom_chunk, (spec, x, t, seed), 0, n, threads))
    p = survival(spec, x, t)
    emp = float(np.mean(hits))
    stderr = math.sqrt(p * (1 - p) / n)
    z = (emp - p) / stderr if stderr > 0 else 0.0
    return {"empirical_atom": emp, "analytic_atom": p, "stderr": stderr, "z": z, "n": n}


# ------------------------------------------------------------- goodness of fit

def _embedded_chunk(spec, x, seed, lo, hi):
    return np.array([sample_embedded_step(spec, x, stream(seed, i))[0] for i in range(lo, hi)])


def sample_embedded(spec, x, n, seed, threads=1):
    """``n`` independent one-step draws of the post-jump chain from ``x``."""
    return np.concatenate(_run(_embedded_chunk, (spec, x, seed), 0, n, threads))


def ks_distance(samples, cdf):
    """Kolmogorov-Smirnov distance between ``samples`` and a CDF that may have atoms.

    ``cdf`` maps a sorted array to CDF values. Repeated sample values are
    treated as atoms: the left limit there is evaluated just below the value.
    """
    vals, counts = np.unique(np.asarray(samples, dtype=float), return_counts=True)
    n = counts.sum()
    upper = np.cumsum(counts) / n
    lower = upper - counts / n
    f_right = np.asarray(cdf(vals), dtype=float)
    f_left = f_right.copy()
    tied = counts > 1
    if tied.any():
        f_left[tied] = np.asarray(cdf(np.nextafter(vals[tied], -np.inf)), dtype=float)
    return float(max(np.max(np.abs(upper - f_right)), np.max(np.abs(lower - f_left))))


# ------------------------------------------------------------- verification suite

def _record(check, target, est, stderr, z, limit=Z_PASS):
    return {"check": check, "target": target, "estimate": est, "stderr": stderr, "z": z,
            "pass": bool(abs(z) < limit)}


def _pi_quantile(spec, q):
    sd = analysis.speed_density(spec)
    return invert_monotone(lambda y: integrate(sd, 0.0, y), q, 0.0)


def verify(spec, n=10_000, seed=0, threads=1):
    """Run every Monte Carlo check that applies to ``spec``; one record per check."""
    records = []
    report = analysis.classify(spec)
    x1 = 1.0
    e1 = expected_jump_time(spec, x1)
    if spec.assumption1 and math.isfinite(e1):
        est = estimate(spec, JumpTimeMean(x1), n, seed, threads)
        records.append(_record(f"jump_time_mean(x={x1:g})", e1, est.mean, est.stderr, est.z(e1)))
    # horizon at which survival from x1 is exp(-1)
    hz = hazard_potential(spec.drift, spec.rate)
    y = hz.advance(x1, 1.0)
    t = travel_potential(spec.drift).increment(x1, y)
    if math.isfinite(t) and t > 0:
        atom = atom_mass_check(spec, x1, t, n, seed + 1, threads)
        records.append(_record(f"atom_mass(x={x1:g},t={t:.6g})", atom["analytic_atom"],
                               atom["empirical_atom"], atom["stderr"], atom["z"]))
    scale_ok = (spec.kernel.separable and spec.kernel.h_zero > 0 and spec.assumption1
                and spec.assumption2)
    if scale_ok:
        x, b = 0.5, 2.0
        target = 1.0 - analysis.exit_prob_up(spec, x, b)
        est = estimate(spec, ExitAtZero(x, b), n, seed + 2, threads)
        records.append(_record(f"exit_at_zero(x={x:g},b={b:g})", target, est.mean, est.stderr,
                               est.z(target)))
        if report.i_zero_finite:
            b = 1.0
            target = 1.0 - analysis.excursion_height_cdf(spec, b)
            est = estimate(spec, HeightExceeds(b), n, seed + 3, threads)
            records.append(_record(f"height_exceeds(b={b:g})", target, est.mean, est.stderr,
                                   est.z(target)))
    if report.recurrence == "positive_recurrent":
        u0 = analysis.return_time_at_zero(spec)
        est = estimate(spec, ReturnTime(0.0), n, seed + 4, threads)
        records.append(_record("return_time(x=0)", u0, est.mean, est.stderr, est.z(u0)))
        top = _pi_quantile(spec, 0.95)
        edges = np.linspace(0.0, top, 11)
        occ = occupation_vs_speed(spec, edges, n, seed + 5, threads)
        for row in occ["bins"]:
            records.append(_record(f"occupation[{row['lo']:.4g},{row['hi']:.4g})", row["analytic"],
                                   row["empirical"], row["stderr"], row["z_score"], Z_PASS_BINS))
    return records


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def report_json(obj):
    """Deterministic JSON text for reports (non-finite floats become strings)."""
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"
