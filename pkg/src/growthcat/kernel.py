"""Catastrophe kernel: where the value lands after a jump from ``x``."""
from __future__ import annotations

import math

from .model import FixedFraction, SeparableExp, TotalDisaster, UniformFraction


def kernel_cdf(spec, x, y):
    """``H(x, y)``: probability that a jump from ``x`` lands at or below ``y``."""
    if not x > 0:
        raise ValueError("x must be positive")
    return spec.kernel.cdf(x, y)


def disaster_prob(spec, x):
    """Mass ``H(x, 0)`` of the atom at 0; ``x = inf`` gives the limit."""
    if not x > 0:
        raise ValueError("x must be positive")
    k = spec.kernel
    if not k.separable:
        return 0.0
    if isinstance(k, SeparableExp):
        return math.exp(-x)
    if x == math.inf:
        return k.h_zero / k.h_infinity
    return k.h_zero / float(k.h(x))


def sample_after_jump(spec, x, rng):
    """Post-jump value; the atom at 0 is returned as an exact 0.0."""
    k = spec.kernel
    if isinstance(k, TotalDisaster):
        return 0.0
    if isinstance(k, FixedFraction):
        return k.u * x
    u = 1.0 - rng.random()  # in (0, 1]
    if isinstance(k, UniformFraction):
        return x * u
    if u <= disaster_prob(spec, x):
        return 0.0
    y = min(k.sample_continuous(x, u), x)
    # keep exact zeros reserved for the atom
    return y if y > 0 else math.ulp(0.0)
