"""Analytic layer: scale function, exit laws, speed density, return times.

Everything except the zero classification needs a separable kernel
``H(x, y) = h(y)/h(x)``; the scale function further needs ``h(0) > 0``.
Exponentials are combined in log space (``Gamma - log h``) so that large
arguments do not overflow.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .flow import boundary_integrals, travel_potential
from .hazard import AssumptionError, hazard_potential
from .kernel import disaster_prob
from .model import TotalDisaster
from .numerics import DEFAULT_TOL, integrate, integrate_to_infinity

# classification uses this probe point for kernel-dependent checks
PROBE_X = 1.0


class UnsupportedKernel(ValueError):
    """The requested quantity needs a separable kernel with h(0) > 0."""


class ZeroNotReflecting(ValueError):
    pass


class NotPositiveRecurrent(ValueError):
    pass


def _require_separable(spec):
    if not spec.kernel.separable:
        raise UnsupportedKernel(f"{spec.kernel.family} kernel is not separable")
    if not spec.assumption2:
        raise AssumptionError("Gamma(0) = -inf")


def _require_scale(spec):
    _require_separable(spec)
    if not spec.kernel.h_zero > 0:
        raise UnsupportedKernel("no scale function when h(0) = 0")


def _gamma_pot(spec):
    return hazard_potential(spec.drift, spec.rate)


def _integrate_0_inf(f, tol, finite_at_zero=True):
    if not finite_at_zero:
        return math.inf
    head = integrate(f, 0.0, 1.0, tol)
    return head + integrate_to_infinity(f, 1.0, tol)


def _s_prime(spec):
    hz = _gamma_pot(spec)
    gamma, log_h = spec.gamma, spec.kernel.log_h
    return lambda y: gamma(y) * math.exp(hz.value(y) - float(log_h(y)))


def scale_s(spec, x, tol=DEFAULT_TOL):
    """``s(x) = int_0^x gamma(y) e^{Gamma(y)} / h(y) dy``."""
    _require_scale(spec)
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0:
        return 0.0
    if isinstance(spec.kernel, TotalDisaster):
        try:
            return math.expm1(_gamma_pot(spec).value(x))
        except OverflowError:
            return math.inf
    if x == math.inf:
        return _integrate_0_inf(_s_prime(spec), tol)
    return integrate(_s_prime(spec), 0.0, x, tol)


def s_infinity(spec, tol=DEFAULT_TOL):
    return scale_s(spec, math.inf, tol)


def exit_prob_up(spec, x, b, tol=DEFAULT_TOL):
    """Probability of reaching ``b`` before 0 from ``x < b``."""
    _require_scale(spec)
    if not 0 <= x < b:
        raise ValueError("need 0 <= x < b")
    if isinstance(spec.kernel, TotalDisaster):
        return math.exp(-_gamma_pot(spec).increment(x, b))
    kappa = 1.0 / spec.kernel.h_zero
    return (kappa + scale_s(spec, x, tol)) / (kappa + scale_s(spec, b, tol))


def excursion_height_cdf(spec, b, tol=DEFAULT_TOL):
    """``P(H < b)`` for the height ``H`` of an excursion away from 0."""
    _require_scale(spec)
    if not travel_potential(spec.drift).finite_at_zero:
        raise ZeroNotReflecting("0 is absorbing; there are no excursions")
    if not b > 0:
        raise ValueError("b must be positive")
    s = scale_s(spec, b, tol)
    if s == math.inf:
        return 1.0
    return s / (1.0 / spec.kernel.h_zero + s)


@dataclass(frozen=True)
class SpeedDensity:
    """``pi(y) = C h(y) e^{-Gamma(y)} / alpha(y)``; C = 1/mass when the mass is finite."""

    spec: object
    mass: float

    @property
    def normalizable(self):
        return math.isfinite(self.mass)

    @property
    def C(self):
        return 1.0 / self.mass if self.normalizable else 1.0

    def unnormalized(self, y):
        if y < 0:
            return 0.0
        if y == 0:
            a0 = self.spec.drift.at_zero
            return self.spec.kernel.h_zero / a0 if a0 > 0 else math.inf
        hz = _gamma_pot(self.spec)
        return math.exp(float(self.spec.kernel.log_h(y)) - hz.value(y)) / self.spec.drift(y)

    def __call__(self, y):
        if np.ndim(y):
            return np.array([self(v) for v in np.asarray(y, dtype=float)])
        return self.C * self.unnormalized(float(y))


def speed_density(spec, tol=DEFAULT_TOL):
    _require_separable(spec)
    k = spec.kernel
    # integrable at 0 iff h(y)/alpha(y) ~ y^(k0 - e0) with k0 - e0 > -1
    k0 = 0.0 if k.h_zero > 0 else 1.0
    dens = SpeedDensity(spec, 1.0)
    mass = _integrate_0_inf(dens.unnormalized, tol, k0 - spec.drift.zero_exponent > -1)
    return SpeedDensity(spec, mass)


@dataclass(frozen=True)
class BoundaryReport:
    zero_class: str
    infinity_class: str
    recurrence: str
    s_infinity: float
    pi_mass: float
    i_zero_finite: bool
    i_infinity_finite: bool
    gamma_infinity_finite: bool
    alpha_zero_vanishes: bool
    diagnostics: tuple = field(default=())

    def to_dict(self):
        def clean(v):
            if isinstance(v, float) and not math.isfinite(v):
                return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
            return list(v) if isinstance(v, tuple) else v
        return {k: clean(v) for k, v in self.__dict__.items()}


def classify(spec, tol=DEFAULT_TOL):
    """Boundary classification of 0 and infinity plus the recurrence verdict."""
    fl = travel_potential(spec.drift)
    i0, iinf = fl.finite_at_zero, fl.finite_at_infinity
    atom = disaster_prob(spec, PROBE_X) > 0
    zero_class = {(True, True): "regular", (True, False): "exit",
                  (False, True): "entrance", (False, False): "natural"}[(atom, i0)]
    gamma_inf_finite = not spec.assumption1
    infinity_class = "accessible" if (iinf and gamma_inf_finite) else "inaccessible"
    diagnostics = []
    if iinf and not gamma_inf_finite:
        diagnostics.append("the flow reaches infinity in finite time but a jump always comes "
                           "first; infinity can only be reached by accumulation of jumps")
    s_inf = math.nan
    pi_mass = math.nan
    recurrence = "unknown"
    k = spec.kernel
    if not k.separable:
        diagnostics.append("no scale function: kernel is not separable")
    elif not k.h_zero > 0:
        diagnostics.append("no scale function: h(0) = 0")
    elif not (spec.assumption1 and spec.assumption2):
        diagnostics.append("no scale function: Gamma(0) or Gamma(inf) is finite on the wrong side")
    else:
        s_inf = s_infinity(spec, tol)
        if s_inf == math.inf:
            if i0:
                pi_mass = speed_density(spec, tol).mass
                recurrence = "positive_recurrent" if math.isfinite(pi_mass) else "null_recurrent"
            else:
                recurrence = "transient_absorbed_at_zero"
        else:
            recurrence = "hits_infinity_finite_time_possible" if iinf else "transient_to_infinity"
    if math.isnan(pi_mass) and k.separable and spec.assumption2:
        pi_mass = speed_density(spec, tol).mass
    return BoundaryReport(
        zero_class=zero_class,
        infinity_class=infinity_class,
        recurrence=recurrence,
        s_infinity=s_inf,
        pi_mass=pi_mass,
        i_zero_finite=i0,
        i_infinity_finite=iinf,
        gamma_infinity_finite=gamma_inf_finite,
        alpha_zero_vanishes=spec.drift.at_zero == 0,
        diagnostics=tuple(diagnostics),
    )


def return_time_at_zero(spec, tol=DEFAULT_TOL):
    """``u(0+) = 1 / (C h(0))``, the mean excursion length away from 0."""
    report = classify(spec, tol)
    if report.recurrence != "positive_recurrent":
        raise NotPositiveRecurrent(f"recurrence verdict is {report.recurrence}")
    return report.pi_mass / spec.kernel.h_zero


def expected_return_time(spec, x, tol=DEFAULT_TOL):
    """Mean hitting time of 0 from ``x``.

    Uses ``u(x) = u(0) + int_0^x w - I0(x)`` with
    ``w(y) = gamma(y)/h(y) int_y^inf e^{-(Gamma(z)-Gamma(y))} h(z)/alpha(z) dz``.
    """
    u0 = return_time_at_zero(spec, tol)
    if x == 0:
        return u0
    hz = _gamma_pot(spec)
    gamma, log_h, alpha = spec.gamma, spec.kernel.log_h, spec.drift

    def w(y):
        ly = float(log_h(y))

        def inner(z):
            return math.exp(float(log_h(z)) - ly - hz.increment(y, z)) / alpha(z)
        return gamma(y) * integrate_to_infinity(inner, y, tol)

    return u0 + integrate(w, 0.0, x, tol) - boundary_integrals(spec, x).i_zero


@dataclass(frozen=True)
class EmbeddedInvariant:
    """Stationary law of the post-jump chain: an atom at 0 plus a density."""

    spec: object
    atom_at_zero: float
    norm: float

    def density(self, y):
        if np.ndim(y):
            return np.array([self.density(v) for v in np.asarray(y, dtype=float)])
        hz = _gamma_pot(self.spec)
        tail = math.exp(-hz.value(y)) - math.exp(-hz.upper)
        return float(self.spec.kernel.h_prime(y)) * tail / self.norm


def embedded_invariant(spec, tol=DEFAULT_TOL):
    """Invariant law of ``Z_n``: ``pi(beta H(., dy)) / pi(beta)``."""
    _require_separable(spec)
    sd = speed_density(spec, tol)
    if not sd.normalizable:
        raise NotPositiveRecurrent("speed density is not normalizable")
    hz = _gamma_pot(spec)
    k, gamma = spec.kernel, spec.gamma

    def pi_beta(z):
        return gamma(z) * math.exp(float(k.log_h(z)) - hz.value(z))

    norm = _integrate_0_inf(pi_beta, tol)
    if not math.isfinite(norm):
        raise ArithmeticError("pi(beta) diverges")
    atom = 0.0
    if k.h_zero > 0:
        atom = k.h_zero * _integrate_0_inf(lambda z: gamma(z) * math.exp(-hz.value(z)), tol) / norm
    return EmbeddedInvariant(spec, atom, norm)


def pre_jump_density(spec, y):
    """Common law of the i.i.d. pre-jump values under total disasters."""
    if not isinstance(spec.kernel, TotalDisaster):
        raise UnsupportedKernel("the pre-jump law is only provided for total disasters")
    return spec.gamma(y) * math.exp(-_gamma_pot(spec).value(y))


@dataclass
class AnalyticCurve:
    x: np.ndarray
    s: np.ndarray
    pi: np.ndarray
    u: np.ndarray
    p_exit_b: np.ndarray
    b: float | None = None
    tol: object = DEFAULT_TOL

    def to_csv(self, fh=None):
        out = fh if fh is not None else io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["x", "s", "pi", "u", "p_exit_b"])
        for row in zip(self.x, self.s, self.pi, self.u, self.p_exit_b):
            w.writerow([f"{v:.17g}" for v in row])
        if fh is None:
            return out.getvalue()


def _column(fn, xs):
    out = np.full(len(xs), np.nan)
    for i, x in enumerate(xs):
        try:
            out[i] = fn(float(x))
        except (UnsupportedKernel, ZeroNotReflecting, NotPositiveRecurrent, AssumptionError,
                ValueError):
            pass
    return out


def analytic_curve(spec, xs, b=None, tol=DEFAULT_TOL):
    """Tabulate ``s``, ``pi``, ``u`` and the up-exit probability over ``xs``.

    Columns that do not exist for the model are filled with NaN.
    """
    xs = np.asarray(xs, dtype=float)
    s = _column(lambda x: scale_s(spec, x, tol), xs)
    try:
        sd = speed_density(spec, tol)
        pi = _column(sd, xs) if sd.normalizable else np.full(len(xs), np.nan)
    except (UnsupportedKernel, AssumptionError):
        pi = np.full(len(xs), np.nan)
    try:
        u0 = return_time_at_zero(spec, tol)
        u = _column(lambda x: expected_return_time(spec, x, tol) if x > 0 else u0, xs)
    except (UnsupportedKernel, NotPositiveRecurrent, AssumptionError):
        u = np.full(len(xs), np.nan)
    if b is None:
        p = np.full(len(xs), np.nan)
    else:
        p = _column(lambda x: exit_prob_up(spec, x, b, tol) if x < b else 1.0, xs)
    return AnalyticCurve(xs, s, pi, u, p, b, tol)
