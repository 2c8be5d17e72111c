"""Integrated hazard and the law of the first jump time.

Along the flow from ``x`` the probability of no jump before the value ``y``
is reached is ``exp(-(Gamma(y) - Gamma(x)))``. Sampling therefore draws a
standard exponential ``E`` and moves ``Gamma`` forward by ``E``; the time is
read off the flow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .flow import AbsorbedAtZero, flow_at, time_to_reach, travel_potential
from .model import AffineDrift, ConstantRate, PowerLawDrift
from .numerics import DEFAULT_TOL, CumulativeIntegral, integrate_to_infinity
from .potentials import LogPotential, PowerPotential


class AssumptionError(ValueError):
    """A standing assumption needed by the requested quantity fails."""


@dataclass(frozen=True)
class At:
    t: float


@dataclass(frozen=True)
class AtBlowup:
    t: float


@dataclass(frozen=True)
class Never:
    t: float = math.inf


@lru_cache(maxsize=None)
def hazard_potential(drift, rate):
    """Antiderivative of ``gamma = beta/alpha``, anchored at 0 when finite there."""
    b, beta1 = rate.b, rate.beta1
    if isinstance(drift, PowerLawDrift):
        return PowerPotential(beta1 / drift.alpha1, b - drift.a + 1.0)
    if isinstance(drift, AffineDrift):
        if drift.alpha1 == 0:
            return PowerPotential(beta1 / drift.alpha0, b + 1.0)
        if drift.alpha0 == 0:
            return PowerPotential(beta1 / drift.alpha1, b)
        if isinstance(rate, ConstantRate) or b == 0:
            return LogPotential(drift.alpha0, drift.alpha1, beta1)
    q0 = b - drift.zero_exponent
    qinf = b - drift.infinity_exponent
    return CumulativeIntegral(lambda y: rate(y) / drift(y), q0 > -1, qinf < -1)


def _potential(spec):
    return hazard_potential(spec.drift, spec.rate)


def gamma_big(spec, x):
    """Integrated hazard with ``Gamma(0) = 0``."""
    if not spec.assumption2:
        raise AssumptionError("Gamma(0) = -inf: the hazard is not integrable at 0")
    if x < 0:
        raise ValueError("x must be nonnegative")
    return _potential(spec).value(x)


def gamma_tail(spec, x):
    """``Gamma(inf) - Gamma(x)``, infinite under the no-escape assumption."""
    return _potential(spec).increment(x, math.inf)


def survival(spec, x, t):
    """Probability that no jump occurs before time ``t`` from ``x``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return 1.0
    y = flow_at(spec, x, t)
    return math.exp(-_potential(spec).increment(x, y))


def jump_from_exponential(spec, x, e):
    """First jump outcome given the exponential clock value ``e``.

    Returns the outcome and, for :class:`At`, the pre-jump value.
    """
    hz = _potential(spec)
    if x == 0 and not travel_potential(spec.drift).finite_at_zero:
        raise AbsorbedAtZero("no motion from an absorbing 0")
    u = hz.advance(x, e)
    if u < math.inf:
        return At(time_to_reach(spec, x, u)), u
    i_inf = time_to_reach(spec, x, math.inf)
    if i_inf < math.inf:
        return AtBlowup(i_inf), math.inf
    return Never(), math.inf


def sample_jump_time(spec, x, rng):
    """Exact draw of the first jump time from ``x``."""
    return jump_from_exponential(spec, x, rng.standard_exponential())[0]


def expected_jump_time(spec, x, tol=DEFAULT_TOL):
    """Mean of the first jump time (capped at the blow-up time), ``inf`` if divergent."""
    hz = _potential(spec)
    alpha = spec.drift

    def f(z):
        return math.exp(-hz.increment(x, z)) / alpha(z)

    return integrate_to_infinity(f, x, tol)
