"""Model family: growth drift, jump rate and catastrophe kernel.

Every variant is a frozen dataclass, so a :class:`ModelSpec` is immutable and
hashable and can key the caches used by the numerical layers. Drifts and
rates are written with arithmetic operators only, which keeps them cheap on
Python floats and still valid on numpy arrays.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import ClassVar

import numpy as np


class ModelError(ValueError):
    """Malformed model definition."""


def _finite(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelError(f"{name} must be a real number, got {value!r}")
    if not math.isfinite(value):
        raise ModelError(f"{name} must be finite, got {value!r}")
    return float(value)


def _positive(name, value):
    if _finite(name, value) <= 0:
        raise ModelError(f"{name} must be positive, got {value!r}")


# ---------------------------------------------------------------- drifts

@dataclass(frozen=True)
class PowerLawDrift:
    """alpha(x) = alpha1 * x**a."""

    alpha1: float
    a: float
    family: ClassVar[str] = "power_law"

    def __post_init__(self):
        _positive("drift.alpha1", self.alpha1)
        _finite("drift.a", self.a)

    def __call__(self, x):
        return self.alpha1 * x ** self.a

    @property
    def zero_exponent(self):
        return self.a

    @property
    def infinity_exponent(self):
        return self.a

    @property
    def at_zero(self):
        return self.alpha1 if self.a == 0 else (0.0 if self.a > 0 else math.inf)


@dataclass(frozen=True)
class AffineDrift:
    """alpha(x) = alpha0 + alpha1 * x."""

    alpha0: float
    alpha1: float
    family: ClassVar[str] = "affine"

    def __post_init__(self):
        for name in ("alpha0", "alpha1"):
            if _finite(f"drift.{name}", getattr(self, name)) < 0:
                raise ModelError(f"drift.{name} must be nonnegative")
        if self.alpha0 == 0 and self.alpha1 == 0:
            raise ModelError("drift.alpha0 and drift.alpha1 cannot both be zero")

    def __call__(self, x):
        return self.alpha0 + self.alpha1 * x

    @property
    def zero_exponent(self):
        return 0.0 if self.alpha0 > 0 else 1.0

    @property
    def infinity_exponent(self):
        return 1.0 if self.alpha1 > 0 else 0.0

    @property
    def at_zero(self):
        return self.alpha0


@dataclass(frozen=True)
class PowerImmigrationDrift:
    """alpha(x) = alpha0 + alpha1 * x**a."""

    alpha0: float
    alpha1: float
    a: float
    family: ClassVar[str] = "power_immigration"

    def __post_init__(self):
        _positive("drift.alpha0", self.alpha0)
        _positive("drift.alpha1", self.alpha1)
        _positive("drift.a", self.a)

    def __call__(self, x):
        return self.alpha0 + self.alpha1 * x ** self.a

    @property
    def zero_exponent(self):
        return 0.0

    @property
    def infinity_exponent(self):
        return self.a

    @property
    def at_zero(self):
        return self.alpha0


# ---------------------------------------------------------------- rates

@dataclass(frozen=True)
class PowerLawRate:
    """beta(x) = beta1 * x**b."""

    beta1: float
    b: float
    family: ClassVar[str] = "power_law"

    def __post_init__(self):
        _positive("rate.beta1", self.beta1)
        _finite("rate.b", self.b)

    def __call__(self, x):
        return self.beta1 * x ** self.b


@dataclass(frozen=True)
class ConstantRate:
    beta1: float
    family: ClassVar[str] = "constant"

    def __post_init__(self):
        _positive("rate.beta1", self.beta1)

    @property
    def b(self):
        return 0.0

    def __call__(self, x):
        return self.beta1 + 0.0 * x


# ---------------------------------------------------------------- kernels

@dataclass(frozen=True)
class _Separable:
    """H(x, y) = h(y) / h(x) for y < x."""

    separable: ClassVar[bool] = True

    def cdf(self, x, y):
        if y >= x:
            return 1.0
        if y < 0:
            return 0.0
        return float(self.h(y) / self.h(x))

    def log_h(self, y):
        return np.log(self.h(y))


@dataclass(frozen=True)
class SeparableExp(_Separable):
    family: ClassVar[str] = "separable_exp"
    h_zero: ClassVar[float] = 1.0
    h_infinity: ClassVar[float] = math.inf

    def h(self, y):
        return np.exp(y)

    def log_h(self, y):
        return y

    def cdf(self, x, y):
        if y >= x:
            return 1.0
        return math.exp(y - x) if y >= 0 else 0.0

    def h_prime(self, y):
        return np.exp(y)

    def h_inverse(self, v):
        return math.log(v)

    def sample_continuous(self, x, u):
        # inverse of h(y) = h(x) u, written to avoid overflow for large x
        return x + math.log(u)


@dataclass(frozen=True)
class SeparableLinear(_Separable):
    family: ClassVar[str] = "separable_linear"
    h_zero: ClassVar[float] = 0.0
    h_infinity: ClassVar[float] = math.inf

    def h(self, y):
        return y

    def h_prime(self, y):
        return 1.0 + 0.0 * y

    def h_inverse(self, v):
        return v

    def sample_continuous(self, x, u):
        return x * u


@dataclass(frozen=True)
class TotalDisaster(_Separable):
    family: ClassVar[str] = "total_disaster"
    h_zero: ClassVar[float] = 1.0
    h_infinity: ClassVar[float] = 1.0

    def h(self, y):
        return 1.0 + 0.0 * y

    def log_h(self, y):
        return 0.0 * y

    def h_prime(self, y):
        return 0.0 * y

    def cdf(self, x, y):
        return 1.0 if y >= 0 else 0.0


@dataclass(frozen=True)
class SeparableBounded(_Separable):
    """h(y) = hinf - (hinf - h0) exp(-lam y)."""

    h0: float
    hinf: float
    lam: float
    family: ClassVar[str] = "separable_bounded"

    def __post_init__(self):
        _positive("kernel.h0", self.h0)
        _positive("kernel.lambda", self.lam)
        if _finite("kernel.hinf", self.hinf) <= self.h0:
            raise ModelError("kernel.hinf must exceed kernel.h0")

    @property
    def h_zero(self):
        return self.h0

    @property
    def h_infinity(self):
        return self.hinf

    def h(self, y):
        return self.hinf - (self.hinf - self.h0) * np.exp(-self.lam * y)

    def h_prime(self, y):
        return self.lam * (self.hinf - self.h0) * np.exp(-self.lam * y)

    def h_inverse(self, v):
        return -math.log((self.hinf - v) / (self.hinf - self.h0)) / self.lam

    def sample_continuous(self, x, u):
        return self.h_inverse(float(self.h(x)) * u)


@dataclass(frozen=True)
class FixedFraction:
    """A fixed fraction u of the value survives: point mass at u x."""

    u: float
    family: ClassVar[str] = "fixed_fraction"
    separable: ClassVar[bool] = False

    def __post_init__(self):
        u = _finite("kernel.u", self.u)
        if not 0 < u < 1:
            raise ModelError(f"kernel.u outside (0,1): {self.u!r}")

    def cdf(self, x, y):
        return 1.0 if y >= self.u * x else 0.0


@dataclass(frozen=True)
class UniformFraction:
    """A uniform random fraction of the value survives."""

    family: ClassVar[str] = "uniform_fraction"
    separable: ClassVar[bool] = False

    def cdf(self, x, y):
        if y >= x:
            return 1.0
        return max(y, 0.0) / x


DRIFTS = {c.family: c for c in (PowerLawDrift, AffineDrift, PowerImmigrationDrift)}
RATES = {c.family: c for c in (PowerLawRate, ConstantRate)}
KERNELS = {c.family: c for c in (SeparableExp, SeparableLinear, TotalDisaster,
                                 SeparableBounded, FixedFraction, UniformFraction)}
# json key -> dataclass field
_RENAMES = {"lambda": "lam"}


@dataclass(frozen=True)
class ModelSpec:
    """A complete model. Gamma is normalised by Gamma(0) = 0 throughout."""

    drift: PowerLawDrift | AffineDrift | PowerImmigrationDrift
    rate: PowerLawRate | ConstantRate
    kernel: SeparableExp | SeparableLinear | TotalDisaster | SeparableBounded | FixedFraction | UniformFraction
    name: str = field(default="", compare=False)

    def alpha(self, x):
        return self.drift(x)

    def beta(self, x):
        return self.rate(x)

    def gamma(self, x):
        a = self.drift(x)
        if np.ndim(x) == 0 and a == 0:
            # drift vanishes (or underflows) near 0: use the leading power laws
            c = self.drift.alpha1
            e = self.rate.b - self.drift.zero_exponent
            if x == 0:
                return self.rate.beta1 / c if e == 0 else (0.0 if e > 0 else math.inf)
            return self.rate.beta1 / c * x ** e
        return self.rate(x) / a

    # Tail behaviour, read off the power-law exponents of the families.
    @property
    def i_zero_finite(self):
        """Whether int_0 dy/alpha converges, i.e. 0 is left instantly."""
        return self.drift.zero_exponent < 1

    @property
    def i_infinity_finite(self):
        """Whether the flow reaches infinity in finite time."""
        return self.drift.infinity_exponent > 1

    @property
    def gamma_zero_exponent(self):
        return self.rate.b - self.drift.zero_exponent

    @property
    def gamma_infinity_exponent(self):
        return self.rate.b - self.drift.infinity_exponent

    @property
    def assumption1(self):
        """Gamma(inf) = inf."""
        return self.gamma_infinity_exponent >= -1

    @property
    def assumption2(self):
        """Gamma(0) > -inf."""
        return self.gamma_zero_exponent > -1

    def to_dict(self):
        def dump(part):
            d = {"family": part.family}
            for k, v in part.__dict__.items():
                d["lambda" if k == "lam" else k] = v
            return d
        return {"drift": dump(self.drift), "rate": dump(self.rate), "kernel": dump(self.kernel)}

    @classmethod
    def from_dict(cls, data, name=""):
        if not isinstance(data, dict):
            raise ModelError("model must be a JSON object with drift/rate/kernel")
        unknown = set(data) - {"drift", "rate", "kernel", "name"}
        if unknown:
            raise ModelError(f"unknown model keys: {sorted(unknown)}")
        parts = {}
        for key, table in (("drift", DRIFTS), ("rate", RATES), ("kernel", KERNELS)):
            if key not in data:
                raise ModelError(f"missing field: {key}")
            part = dict(data[key])
            family = part.pop("family", None)
            if family not in table:
                raise ModelError(f"{key}.family must be one of {sorted(table)}, got {family!r}")
            kwargs = {_RENAMES.get(k, k): v for k, v in part.items()}
            try:
                parts[key] = table[family](**kwargs)
            except TypeError as exc:
                raise ModelError(f"{key} ({family}): {exc}") from None
        return cls(name=data.get("name", name), **parts)


def load_model(source):
    """Load a model from a JSON path or the name of a bundled fixture."""
    path = Path(source)
    if path.is_file():
        text = path.read_text()
        name = path.stem
    else:
        stem = path.name[:-5] if path.name.endswith(".json") else path.name
        res = resources.files("growthcat") / "fixtures" / f"{stem}.json"
        if not res.is_file():
            raise ModelError(f"no such model file or bundled fixture: {source}")
        text = res.read_text()
        name = stem
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"{source}: invalid JSON ({exc})") from None
    return ModelSpec.from_dict(data, name=name)


def fixture_names():
    root = resources.files("growthcat") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


@dataclass(frozen=True)
class ValidationReport:
    assumption1: bool
    assumption2: bool
    separable: bool
    h_zero_positive: bool
    violations: tuple[str, ...] = ()

    @property
    def ok(self):
        return self.assumption1 and self.assumption2 and not self.violations


def validate(spec):
    """Check the standing assumptions of a constructed model.

    Malformed parameters never get this far: the variant constructors raise
    :class:`ModelError`. What remains are soft conditions reported as flags.
    """
    violations = []
    if spec.drift.at_zero == math.inf:
        violations.append("drift: alpha is not continuous at 0 (a < 0)")
    if spec.rate.b < 0:
        violations.append("rate: beta is not continuous at 0 (b < 0)")
    separable = spec.kernel.separable
    h0 = separable and spec.kernel.h_zero > 0
    return ValidationReport(
        assumption1=spec.assumption1,
        assumption2=spec.assumption2,
        separable=separable,
        h_zero_positive=h0,
        violations=tuple(violations),
    )
