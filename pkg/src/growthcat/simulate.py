"""Exact event-driven simulation.

Each step draws one exponential clock ``E`` and compares it with the hazard
accumulated by the flow up to the nearest deterministic boundary (a target
level, the value cap, the horizon or infinity). If the clock rings first
the jump position is found by inverting the integrated hazard, otherwise the
path stops exactly on the boundary. There is no time step anywhere.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field

from .flow import X_MAX, flow_at, travel_potential
from .hazard import expected_jump_time, hazard_potential
from .kernel import sample_after_jump

# ExplosionSuspected: the last EXPLOSION_WINDOW terms of sum e(Z_k) add less
# than EXPLOSION_REL of the total.
EXPLOSION_WINDOW = 100
EXPLOSION_REL = 1e-6
# Default value cap when the flow reaches infinity in finite time. Above it
# the remaining time to blow-up is negligible but the number of jumps on the
# way up can grow like a power of the level.
BLOWUP_CAP = 1e6


class SimulationError(RuntimeError):
    pass


class Status(str, enum.Enum):
    HIT_ZERO = "HitZero"
    HIT_LEVEL = "HitLevel"
    HORIZON = "Horizon"
    JUMP_BUDGET = "JumpBudget"
    REACHED_INFINITY = "ReachedInfinity"
    EXPLOSION_SUSPECTED = "ExplosionSuspected"


@dataclass(frozen=True)
class StopRule:
    hit_zero: bool = False
    hit_level: float | None = None
    horizon: float | None = None
    max_jumps: int | None = None
    value_cap: float | None = None

    def __post_init__(self):
        if not (self.hit_zero or self.hit_level is not None or self.horizon is not None
                or self.max_jumps is not None or self.value_cap is not None):
            raise ValueError("a stop rule needs at least one condition")
        for name in ("hit_level", "horizon", "value_cap"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_jumps is not None and self.max_jumps < 1:
            raise ValueError("max_jumps must be a positive integer")

    @classmethod
    def parse(cls, text):
        """Parse ``"hit_zero,horizon=100,max_jumps=1000"``."""
        kwargs = {}
        for item in filter(None, (s.strip() for s in text.split(","))):
            key, _, val = item.partition("=")
            key = key.strip()
            if key == "hit_zero" and not val:
                kwargs[key] = True
            elif key in ("hit_level", "horizon", "value_cap") and val:
                kwargs[key] = float(val)
            elif key == "max_jumps" and val:
                kwargs[key] = int(val)
            else:
                raise ValueError(f"bad stop rule item: {item!r}")
        return cls(**kwargs)

    def __str__(self):
        parts = ["hit_zero"] if self.hit_zero else []
        for name in ("hit_level", "horizon", "max_jumps", "value_cap"):
            v = getattr(self, name)
            if v is not None:
                parts.append(f"{name}={v:.17g}" if isinstance(v, float) else f"{name}={v}")
        return ",".join(parts)


@dataclass(frozen=True)
class Terminal:
    status: Status
    t: float
    value: float
    partial_sum: float | None = None


@dataclass
class Trajectory:
    start: float
    times: list = field(default_factory=list)
    pre: list = field(default_factory=list)
    post: list = field(default_factory=list)
    terminal: Terminal | None = None

    @property
    def n_jumps(self):
        return len(self.times)

    @property
    def events(self):
        return list(zip(self.times, self.pre, self.post))

    def to_csv(self, fh=None):
        """Write ``t,x_pre,x_post,kind``; the last row carries the terminal status."""
        out = fh if fh is not None else io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["t", "x_pre", "x_post", "kind"])
        for t, u, z in zip(self.times, self.pre, self.post):
            w.writerow([f"{t:.17g}", f"{u:.17g}", f"{z:.17g}", "jump"])
        term = self.terminal
        w.writerow([f"{term.t:.17g}", f"{term.value:.17g}", f"{term.value:.17g}", term.status.value])
        if fh is None:
            return out.getvalue()

    @classmethod
    def from_csv(cls, text, start):
        """Inverse of :meth:`to_csv`; the starting value is not stored in the file."""
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows or rows[-1]["kind"] == "jump":
            raise ValueError("trajectory CSV needs a terminal row")
        jumps = rows[:-1]
        last = rows[-1]
        return cls(start, [float(r["t"]) for r in jumps], [float(r["x_pre"]) for r in jumps],
                   [float(r["x_post"]) for r in jumps],
                   Terminal(Status(last["kind"]), float(last["t"]), float(last["x_pre"])))


def _explosion_suspected(spec, values):
    # terms are summed smallest-first from the end, which is where convergence shows
    terms = [expected_jump_time(spec, z) for z in values]
    total = math.fsum(terms)
    tail = math.fsum(terms[-EXPLOSION_WINDOW:])
    return math.isfinite(total) and tail <= EXPLOSION_REL * total, total


def simulate_path(spec, x, stop, rng):
    """Simulate one path from ``x`` until a rule in ``stop`` fires."""
    fl = travel_potential(spec.drift)
    hz = hazard_potential(spec.drift, spec.rate)
    traj = Trajectory(start=x)
    absorbing = not fl.finite_at_zero
    if x == 0 and absorbing:
        traj.terminal = Terminal(Status.HIT_ZERO, 0.0, 0.0)
        return traj
    level = stop.hit_level
    cap = stop.value_cap
    if fl.finite_at_infinity:
        cap = BLOWUP_CAP if cap is None else min(cap, X_MAX)
    horizon = stop.horizon
    t = 0.0
    n = 0
    while True:
        target, status = math.inf, Status.REACHED_INFINITY
        if level is not None:
            target, status = level, Status.HIT_LEVEL
        if cap is not None and cap < target:
            target, status = cap, Status.REACHED_INFINITY
        if x >= target:
            traj.terminal = Terminal(status, t, x)
            return traj
        t_target = t + fl.increment(x, target)
        if horizon is not None and horizon < t_target:
            b_time, status = horizon, Status.HORIZON
            b_value = flow_at(spec, x, horizon - t) if horizon > t else x
        else:
            b_time, b_value = t_target, target
        e = rng.standard_exponential()
        if e >= hz.increment(x, b_value):
            if b_time == math.inf:
                raise SimulationError("the path never jumps again and no horizon or value cap "
                                      "can stop it")
            if status is Status.REACHED_INFINITY and fl.finite_at_infinity:
                b_value = math.inf
            traj.terminal = Terminal(status, b_time, b_value)
            return traj
        u = hz.advance(x, e)
        t += fl.increment(x, u)
        z = sample_after_jump(spec, u, rng)
        traj.times.append(t)
        traj.pre.append(u)
        traj.post.append(z)
        n += 1
        if z == 0.0 and (stop.hit_zero or absorbing):
            traj.terminal = Terminal(Status.HIT_ZERO, t, 0.0)
            return traj
        if stop.max_jumps is not None and n >= stop.max_jumps:
            if fl.finite_at_infinity and n > EXPLOSION_WINDOW:
                suspected, total = _explosion_suspected(spec, traj.post)
                if suspected:
                    traj.terminal = Terminal(Status.EXPLOSION_SUSPECTED, t, z, total)
                    return traj
            traj.terminal = Terminal(Status.JUMP_BUDGET, t, z)
            return traj
        x = z


def first_exit(spec, x, b, rng):
    """Run from ``x`` until 0 or the level ``b > x`` is hit.

    Returns ``(at_zero, time)``.
    """
    if not b > x:
        raise ValueError(f"level {b!r} must lie above the start {x!r}")
    traj = simulate_path(spec, x, StopRule(hit_zero=True, hit_level=b), rng)
    return traj.terminal.status is Status.HIT_ZERO, traj.terminal.t
