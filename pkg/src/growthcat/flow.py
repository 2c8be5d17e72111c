"""Deterministic growth between jumps.

The flow started at ``x`` solves ``dx/dt = alpha(x)``; equivalently
``I(x_t) = I(x) + t`` with ``I`` an antiderivative of ``1/alpha``. Reaching
infinity is signalled by ``math.inf``.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple

from .model import AffineDrift, PowerImmigrationDrift, PowerLawDrift
from .numerics import CumulativeIntegral
from .potentials import LogPotential, PowerPotential

# Finite values above this are reported as infinity when infinity is reachable.
X_MAX = 1e12


class AbsorbedAtZero(ValueError):
    """The flow cannot leave 0."""


class BoundaryIntegrals(NamedTuple):
    i_zero: float
    i_infinity: float


@lru_cache(maxsize=None)
def travel_potential(drift):
    """Antiderivative of ``1/alpha`` for a drift variant."""
    if isinstance(drift, PowerLawDrift):
        return PowerPotential(1.0 / drift.alpha1, 1.0 - drift.a)
    if isinstance(drift, AffineDrift):
        if drift.alpha1 == 0:
            return PowerPotential(1.0 / drift.alpha0, 1.0)
        if drift.alpha0 == 0:
            return PowerPotential(1.0 / drift.alpha1, 0.0)
        return LogPotential(drift.alpha0, drift.alpha1)
    if isinstance(drift, PowerImmigrationDrift):
        a0, a1, a = drift.alpha0, drift.alpha1, drift.a
        return CumulativeIntegral(lambda y: 1.0 / (a0 + a1 * y ** a), True, a > 1)
    raise TypeError(f"unknown drift {drift!r}")


def flow_at(spec, x, t):
    """Value at time ``t`` of the flow started at ``x`` (``inf`` once blown up).

    From ``x = 0`` with a finite ``I0`` the maximal solution is used, so the
    flow leaves 0 immediately.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return x
    pot = travel_potential(spec.drift)
    if x == 0 and not pot.finite_at_zero:
        raise AbsorbedAtZero("0 is absorbing for this drift; the flow stays at 0")
    y = pot.advance(x, t)
    if y > X_MAX and pot.finite_at_infinity:
        return math.inf
    return y


def time_to_reach(spec, x, y):
    """Travel time of the flow from ``x`` up to ``y``."""
    if y < x:
        raise ValueError(f"target {y!r} lies below start {x!r}")
    return travel_potential(spec.drift).increment(x, y)


def boundary_integrals(spec, x):
    """Travel times from 0 up to ``x`` and from ``x`` up to infinity."""
    if not x > 0:
        raise ValueError("x must be positive")
    pot = travel_potential(spec.drift)
    i_zero = pot.increment(0.0, x) if pot.finite_at_zero else math.inf
    i_inf = pot.increment(x, math.inf) if pot.finite_at_infinity else math.inf
    return BoundaryIntegrals(i_zero, i_inf)
