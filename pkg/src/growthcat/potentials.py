"""Antiderivatives with closed-form inverses.

Both the travel time ``I = int 1/alpha`` and the integrated hazard
``Gamma = int beta/alpha`` are increasing functions on ``[0, inf)``. The
classes here and :class:`~growthcat.numerics.CumulativeIntegral` share one
interface: ``value``, ``increment``, ``advance``, ``invert`` plus the limits
``lower`` and ``upper``.
"""
from __future__ import annotations

import math
from functools import wraps


def _overflow_to_inf(method):
    @wraps(method)
    def wrapper(*args):
        try:
            return method(*args)
        except OverflowError:
            return math.inf
    return wrapper


class PowerPotential:
    """F(x) = c x**p / p, or c log x when p = 0."""

    def __init__(self, c, p):
        self.c = c
        self.p = p
        self.finite_at_zero = p > 0
        self.finite_at_infinity = p < 0
        self.lower = 0.0 if p > 0 else -math.inf
        self.upper = 0.0 if p < 0 else math.inf

    @_overflow_to_inf
    def value(self, x):
        c, p = self.c, self.p
        if x == 0.0:
            return self.lower
        if x == math.inf:
            return self.upper
        if p == 0:
            return c * math.log(x)
        try:
            return c * x ** p / p
        except OverflowError:
            return math.copysign(math.inf, p)

    @_overflow_to_inf
    def increment(self, x, y):
        if x == y:
            return 0.0
        c, p = self.c, self.p
        if x == 0.0 or y == math.inf:
            return self.value(y) - self.value(x)
        if p == 0:
            return c * math.log(y / x)
        return c * (y ** p - x ** p) / p

    @_overflow_to_inf
    def invert(self, v):
        c, p = self.c, self.p
        if v >= self.upper:
            return math.inf
        if v <= self.lower:
            return 0.0
        if p == 0:
            return math.exp(v / c)
        return (p * v / c) ** (1.0 / p)

    @_overflow_to_inf
    def advance(self, x, d):
        c, p = self.c, self.p
        if d == 0.0:
            return x
        if p == 0:
            return 0.0 if x == 0.0 else x * math.exp(d / c)
        if x == 0.0 and p < 0:
            return 0.0
        base = x ** p + p * d / c
        if base <= 0.0:
            return math.inf
        return base ** (1.0 / p)


class LogPotential:
    """F(x) = (scale / alpha1) log(1 + alpha1 x / alpha0), both coefficients positive."""

    finite_at_zero = True
    finite_at_infinity = False
    lower = 0.0
    upper = math.inf

    def __init__(self, alpha0, alpha1, scale=1.0):
        self.alpha0 = alpha0
        self.alpha1 = alpha1
        self.k = scale / alpha1

    @_overflow_to_inf
    def value(self, x):
        if x == math.inf:
            return math.inf
        return self.k * math.log1p(self.alpha1 * x / self.alpha0)

    @_overflow_to_inf
    def increment(self, x, y):
        if y == math.inf:
            return math.inf
        return self.k * math.log1p(self.alpha1 * (y - x) / (self.alpha0 + self.alpha1 * x))

    @_overflow_to_inf
    def invert(self, v):
        if v == math.inf:
            return math.inf
        return self.alpha0 * math.expm1(v / self.k) / self.alpha1

    @_overflow_to_inf
    def advance(self, x, d):
        if d == math.inf:
            return math.inf
        return x + (self.alpha0 + self.alpha1 * x) * math.expm1(d / self.k) / self.alpha1
