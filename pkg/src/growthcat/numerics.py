"""Quadrature and monotone inversion primitives.

Everything here is a thin, strict layer over :mod:`scipy.integrate` and
:mod:`scipy.optimize`: failures become exceptions carrying the best estimate
instead of warnings.
"""
from __future__ import annotations

import bisect
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _spi
from scipy import optimize as _spo


@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative accuracy goal and adaptive subdivision budget."""

    abs: float = 1e-9
    rel: float = 1e-9
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.abs > 0 and self.rel > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be positive")

    def goal(self, value):
        return max(self.abs, self.rel * abs(value))


DEFAULT_TOL = Tolerance()

# Divergence heuristic for integrate_to_infinity: this many consecutive
# doublings whose increments fail to contract by CONTRACTION.
DIVERGENCE_DOUBLINGS = 8
CONTRACTION = 0.98
MAX_DOUBLINGS = 1000


class NumericalError(ArithmeticError):
    """Base class for numerical failures."""


class IntegrationError(NumericalError):
    def __init__(self, message, estimate=math.nan, error=math.nan):
        super().__init__(f"{message} (estimate={estimate!r}, error bound={error!r})")
        self.estimate = estimate
        self.error = error


class NonConvergenceError(IntegrationError):
    """The tail of an improper integral neither settled nor diverged."""


class NoRootError(NumericalError):
    pass


def integrate(f, a, b, tol=DEFAULT_TOL):
    """Adaptive Gauss-Kronrod integral of ``f`` over ``[a, b]``.

    Integrable power singularities at the endpoints are fine. Raises
    :class:`IntegrationError` when QUADPACK reports a failure and its error
    estimate misses the requested tolerance.
    """
    if a == b:
        return 0.0
    if b < a:
        return -integrate(f, b, a, tol)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        out = _spi.quad(f, a, b, epsabs=tol.abs, epsrel=tol.rel,
                        limit=tol.max_subdivisions, full_output=1)
    value, err, info = out[0], out[1], out[2]
    if len(out) > 3 and err > tol.goal(value):
        raise IntegrationError(f"quadrature on [{a}, {b}] failed: {out[3]}", value, err)
    if not math.isfinite(value):
        if math.isinf(value):
            return value
        raise IntegrationError(f"non-finite integrand on [{a}, {b}]", value, err)
    return value


_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)


def short_integral(f, a, b, tol=DEFAULT_TOL):
    """Integral of a smooth ``f`` over a possibly short interval.

    Intervals narrower than 1% of their distance from 0 use 5-point
    Gauss-Legendre, whose error there is far below ``tol`` for integrands
    varying on the scale of ``x``; wider ones go to :func:`integrate`.
    """
    if abs(b - a) > 1e-2 * max(abs(a), abs(b)):
        return integrate(f, a, b, tol)
    m, h = 0.5 * (a + b), 0.5 * (b - a)
    return h * math.fsum(float(w) * f(m + h * float(x)) for x, w in zip(_GL_X, _GL_W))


def integrate_to_infinity(f, a, tol=DEFAULT_TOL):
    """Integral of ``f`` over ``[a, inf)`` by successive doubling of the range.

    Returns ``math.inf`` (or ``-math.inf``) when the tail is judged divergent:
    either an increment overflows or increments fail to contract for
    ``DIVERGENCE_DOUBLINGS`` consecutive doublings. The remainder after the
    last doubling is estimated geometrically from the ratio of the last two
    increments.
    """
    width = max(1.0, abs(a))
    lo = a
    hi = a + width
    total = integrate(f, lo, hi, tol)
    prev = None
    stalled = 0
    signs = set()
    for _ in range(MAX_DOUBLINGS):
        lo, hi = hi, a + 2.0 * (hi - a)
        if not math.isfinite(hi):
            break
        inc = integrate(f, lo, hi, tol)
        if math.isinf(inc):
            return inc
        total += inc
        if math.isinf(total):
            return total
        if inc == 0.0:
            return total
        rem, tail = inc, 0.0
        if prev is not None and prev != 0.0:
            r = inc / prev
            if 0.0 < r < 1.0:
                rem = tail = inc * r / (1.0 - r)
        if abs(rem) <= tol.goal(total):
            return total + tail
        if prev is not None and abs(inc) >= CONTRACTION * abs(prev):
            stalled += 1
            signs.add(inc > 0)
            if stalled >= DIVERGENCE_DOUBLINGS:
                if len(signs) == 1:
                    return math.copysign(math.inf, inc)
                raise NonConvergenceError("oscillating tail", total, abs(inc))
        else:
            stalled = 0
            signs.clear()
        prev = inc
    raise NonConvergenceError("tail did not settle within the doubling budget",
                              total, abs(prev) if prev is not None else math.nan)


def invert_monotone(g, target, lo, hi=math.inf, tol=DEFAULT_TOL):
    """Solve ``g(x) = target`` for non-decreasing continuous ``g`` on ``[lo, hi]``.

    With ``hi = inf`` the bracket is grown by doubling until it contains the
    target; :class:`NoRootError` is raised if it never does.
    """
    glo = g(lo)
    if glo >= target:
        if glo == target or glo - target <= tol.abs:
            return lo
        raise NoRootError(f"g(lo)={glo!r} already exceeds target {target!r}")
    if math.isinf(hi):
        step = max(1.0, abs(lo))
        hi = lo + step
        while g(hi) < target:
            lo = hi
            step *= 2.0
            hi = lo + step
            if not math.isfinite(hi) or hi > 1e300:
                raise NoRootError(f"target {target!r} not reached by g on [lo, inf)")
    else:
        ghi = g(hi)
        if ghi < target:
            raise NoRootError(f"g(hi)={ghi!r} below target {target!r}")
        if ghi == target:
            return hi
    return _spo.brentq(lambda x: g(x) - target, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                       maxiter=400)


class CumulativeIntegral:
    """Fast repeated evaluation of ``F(x) = int f`` for positive ``f`` on ``(0, inf)``.

    Values at a fixed geometric node grid are tabulated once; evaluation adds
    one short quadrature from the nearest node. ``F`` is anchored at 0 when
    ``finite_at_zero`` and at 1 otherwise. The endpoint limits ``lower`` and
    ``upper`` are ``-inf``/``inf`` when the corresponding improper integral
    diverges (decided by the caller, who knows the tail exponents).
    """

    NODES = np.concatenate([[0.0], 10.0 ** (np.arange(-96, 97) / 8.0)])

    def __init__(self, f, finite_at_zero, finite_at_infinity, tol=DEFAULT_TOL):
        self.f = f
        self.tol = tol
        self.finite_at_zero = finite_at_zero
        self.finite_at_infinity = finite_at_infinity
        nodes = self.NODES if finite_at_zero else self.NODES[1:]
        pieces = [0.0] + [integrate(f, nodes[k], nodes[k + 1], tol) for k in range(len(nodes) - 1)]
        table = np.cumsum(pieces)
        if not finite_at_zero:
            table -= table[np.searchsorted(nodes, 1.0)]
        self.nodes = nodes
        self._nodes = nodes.tolist()
        self.table = table
        self._table = table.tolist()
        self.lower = 0.0 if finite_at_zero else -math.inf
        if finite_at_infinity:
            self.upper = self._table[-1] + integrate_to_infinity(f, self._nodes[-1], tol)
        else:
            self.upper = math.inf

    def value(self, x):
        if x == math.inf:
            return self.upper
        nodes = self._nodes
        if x <= nodes[0]:
            if x == nodes[0]:
                return self._table[0]
            if self.finite_at_zero:
                return integrate(self.f, 0.0, x, self.tol)
            if x == 0.0:
                return -math.inf
            return self._table[0] - integrate(self.f, x, nodes[0], self.tol)
        k = bisect.bisect_right(nodes, x) - 1
        return self._table[k] + integrate(self.f, nodes[k], x, self.tol)

    def increment(self, x, y):
        """``F(y) - F(x)``, integrated directly when both points share a cell."""
        if x == y:
            return 0.0
        if y < x:
            return -self.increment(y, x)
        if y == math.inf:
            return self.upper - self.value(x)
        nodes = self._nodes
        if x > 0.0 and bisect.bisect_right(nodes, x) == bisect.bisect_right(nodes, y):
            return integrate(self.f, x, y, self.tol)
        return self.value(y) - self.value(x)

    def invert(self, v):
        """Smallest ``x`` with ``F(x) = v``; ``inf`` when ``v >= upper``."""
        if v >= self.upper:
            return math.inf
        if v <= self.lower:
            return 0.0
        table, nodes = self._table, self._nodes
        k = bisect.bisect_right(table, v) - 1
        if k < 0:
            if self.finite_at_zero:
                return invert_monotone(lambda y: integrate(self.f, 0.0, y, self.tol), v, 0.0,
                                       nodes[0], self.tol)
            lo = nodes[0]
            gap = table[0] - v
            while True:
                lo /= 2.0
                if integrate(self.f, lo, nodes[0], self.tol) >= gap or lo < 1e-300:
                    break
            return invert_monotone(lambda y: table[0] - integrate(self.f, y, nodes[0], self.tol),
                                   v, lo, nodes[0], self.tol)
        base, left = table[k], nodes[k]
        if v == base:
            return left
        if k + 1 >= len(nodes):
            return invert_monotone(lambda y: base + integrate(self.f, left, y, self.tol), v,
                                   left, math.inf, self.tol)
        return self._newton(left, nodes[k + 1], v - base, table[k + 1] - base)

    def _newton(self, left, right, d, gap):
        """Solve ``int_left^y f = d`` inside one cell; ``f`` is the exact derivative.

        The residual is carried along and updated by the short integral between
        successive iterates.
        """
        f, tol = self.f, self.tol
        y = left + (right - left) * min(d / gap, 1.0)
        r = integrate(f, left, y, tol) - d
        lo, hi = left, right
        for _ in range(60):
            if r == 0.0:
                return y
            if r > 0:
                hi = y
            else:
                lo = y
            step = r / f(y)
            # the residual carries rounding noise, so a converged step may
            # land just outside the bracket
            if abs(step) <= 1e-13 * y:
                return y - step
            y_new = y - step
            if not lo < y_new < hi:
                y_new = 0.5 * (lo + hi)
            if hi - lo <= 1e-14 * hi:
                return y_new
            r += short_integral(f, y, y_new, tol)
            y = y_new
        return y

    def advance(self, x, d):
        """Point ``y >= x`` with ``F(y) - F(x) = d``."""
        if d == 0.0:
            return x
        return self.invert(self.value(x) + d)
