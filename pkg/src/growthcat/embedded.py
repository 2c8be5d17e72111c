"""Embedded chains: post-jump values ``Z_n`` and pre-jump values ``U_n``.

Sampling is by composition of the exact first-jump draw and the kernel draw.
The transition CDF is computed independently by quadrature and serves as the
oracle for that sampler.
"""
from __future__ import annotations

import csv
import io
import math

import numpy as np

from .flow import travel_potential
from .hazard import At, expected_jump_time, hazard_potential, jump_from_exponential
from .kernel import sample_after_jump
from .model import FixedFraction
from .numerics import DEFAULT_TOL, integrate_to_infinity, short_integral


class ChainTerminated(RuntimeError):
    """No further jump: the chain stops (blow-up or no jump ever)."""

    def __init__(self, outcome):
        super().__init__(f"embedded chain terminated: {outcome!r}")
        self.outcome = outcome


def _absorbing_zero(spec):
    return not travel_potential(spec.drift).finite_at_zero


def _kernel_part(spec, x, y, tol):
    """``int_{x v y}^inf gamma(z) exp(-(Gamma(z) - Gamma(x))) H(z, y) dz``."""
    hz = hazard_potential(spec.drift, spec.rate)
    k = spec.kernel
    w = max(x, y)
    if isinstance(k, FixedFraction):
        # H(z, y) = 1 exactly while u z <= y
        top = max(w, y / k.u)
        return math.exp(-hz.increment(x, w)) - math.exp(-hz.increment(x, top))
    gamma = spec.gamma
    if k.separable:
        log_hy = float(k.log_h(y)) if y > 0 or k.h_zero > 0 else -math.inf
        if log_hy == -math.inf:
            return 0.0

        def f(z):
            return gamma(z) * math.exp(-hz.increment(x, z) + log_hy - float(k.log_h(z)))
    else:
        def f(z):
            return gamma(z) * math.exp(-hz.increment(x, z)) * k.cdf(z, y)
    return integrate_to_infinity(f, w, tol)


def embedded_cdf(spec, x, y, tol=DEFAULT_TOL):
    """``P(Z_n <= y | Z_{n-1} = x)``."""
    if y < 0:
        return 0.0
    if x == 0 and _absorbing_zero(spec):
        return 1.0
    hz = hazard_potential(spec.drift, spec.rate)
    up = -math.expm1(-hz.increment(x, y)) if y > x else 0.0
    return min(1.0, up + _kernel_part(spec, x, y, tol))


def down_move_prob(spec, x, tol=DEFAULT_TOL):
    """Probability that the next post-jump value is at or below ``x``."""
    return embedded_cdf(spec, x, x, tol)


def embedded_cdf_many(spec, x, ys, tol=DEFAULT_TOL):
    """Vectorised :func:`embedded_cdf` for a separable kernel.

    The kernel integral is accumulated over the sorted evaluation points, so
    each short cell is integrated once:
    ``K(y_i) = int_{y_i}^{y_{i+1}} ... + (h(y_i)/h(y_{i+1})) K(y_{i+1})``.
    """
    k = spec.kernel
    ys = np.asarray(ys, dtype=float)
    if not k.separable:
        return np.array([embedded_cdf(spec, x, float(y), tol) for y in ys])
    if x == 0 and _absorbing_zero(spec):
        return np.ones_like(ys)
    hz = hazard_potential(spec.drift, spec.rate)
    gamma = spec.gamma
    order = np.argsort(ys)
    srt = ys[order]
    above = np.unique(np.concatenate([[x], srt[srt > x]]))
    log_h = [float(k.log_h(v)) for v in above]
    # K(w) = int_w^inf gamma e^{-(Gamma(z)-Gamma(x))} h(w)/h(z) dz on the grid "above"
    kvals = np.empty(len(above))

    def cell(lhi_ref):
        return lambda z: gamma(z) * math.exp(-hz.increment(x, z) + lhi_ref - float(k.log_h(z)))

    kvals[-1] = integrate_to_infinity(cell(log_h[-1]), above[-1], tol)
    for i in range(len(above) - 2, -1, -1):
        piece = short_integral(cell(log_h[i]), above[i], above[i + 1], tol)
        kvals[i] = piece + math.exp(log_h[i] - log_h[i + 1]) * kvals[i + 1]
    out = np.empty(len(srt))
    k_x = kvals[0]
    for j, y in enumerate(srt):
        if y < 0:
            out[j] = 0.0
        elif y <= x:
            if y == 0 and k.h_zero == 0:
                out[j] = 0.0
            else:
                out[j] = math.exp(float(k.log_h(y)) - log_h[0]) * k_x
        else:
            i = np.searchsorted(above, y)
            out[j] = -math.expm1(-hz.increment(x, y)) + kvals[i]
    res = np.empty_like(out)
    res[order] = np.minimum(out, 1.0)
    return res


def sample_embedded_step(spec, x, rng):
    """One step of the chain from ``x``: returns ``(z, u, dt)``.

    ``u`` is the pre-jump value and ``dt`` the holding time.
    """
    if x == 0 and _absorbing_zero(spec):
        return 0.0, 0.0, math.inf
    outcome, u = jump_from_exponential(spec, x, rng.standard_exponential())
    if not isinstance(outcome, At):
        raise ChainTerminated(outcome)
    return sample_after_jump(spec, u, rng), u, outcome.t


def run_chain(spec, x, n, rng):
    """Up to ``n`` steps of the chain; stops early if it terminates.

    Returns arrays ``dt, u, z`` and the terminating outcome (``None`` if all
    ``n`` steps were taken).
    """
    dts, us, zs = [], [], []
    outcome = None
    for _ in range(n):
        try:
            z, u, dt = sample_embedded_step(spec, x, rng)
        except ChainTerminated as exc:
            outcome = exc.outcome
            break
        dts.append(dt)
        us.append(u)
        zs.append(z)
        x = z
    return np.array(dts), np.array(us), np.array(zs), outcome


def chain_csv(dts, us, zs, fh=None):
    out = fh if fh is not None else io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n", "dt", "u", "z"])
    for i, (dt, u, z) in enumerate(zip(dts, us, zs), start=1):
        w.writerow([i, f"{dt:.17g}", f"{u:.17g}", f"{z:.17g}"])
    if fh is None:
        return out.getvalue()


def explosion_partial_sums(spec, x, n, rng):
    """Running sums of ``e(Z_k)`` along one realisation of the chain.

    The jump times accumulate at a finite time exactly when this series
    converges.
    """
    _, _, zs, _ = run_chain(spec, x, n, rng)
    cache = {}
    terms = []
    for z in zs:
        if z not in cache:
            cache[z] = expected_jump_time(spec, z)
        terms.append(cache[z])
    return np.cumsum(terms)
