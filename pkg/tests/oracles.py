"""Independent re-simulators and statistical helpers used by the tests.

Everything here recomputes expected values from first principles (the
update definitions, closed-form moments, direct summation), deliberately
not reusing the package's own accumulation code paths.
"""

from __future__ import annotations

import math
import random


class ScriptedSource:
    """Uniform source that replays a fixed list of values (cycled)."""

    def __init__(self, values):
        self.values = list(values)
        self.i = 0

    def random(self) -> float:
        v = self.values[self.i % len(self.values)]
        self.i += 1
        return v


def resim_queue_levels(arrivals, serve_requests):
    """Backlog trajectory from per-slot arrival and service-offer counts.

    Departures are capped by the post-arrival backlog; the clamp at zero
    mirrors the queue recursion even though it can never bind here.
    """
    q = 0
    levels = []
    for a, s in zip(arrivals, serve_requests):
        dep = min(q + a, s)
        q = max(q + a - dep, 0)
        levels.append(q)
    return levels


def resim_trajectories(trace, delay_bounds, i_avg):
    """Recompute (Q, Y, X) after every slot from logged driving data.

    ``trace`` entries carry per-slot arrival counts, the scheduled user,
    the departed waiting times, and the slot's interference contribution.
    The recursions are applied exactly as defined: queue backlog moves by
    arrivals minus departures, the delay accumulator by the departed
    excess over the bound, the interference accumulator by the slot gain
    minus the budget, each clamped at zero.
    """
    n = len(delay_bounds)
    q = [0] * n
    y = [0.0] * n
    x = 0.0
    out = []
    for t in trace:
        for i in range(n):
            q[i] = max(q[i] + t.arrivals[i], 0)
        if t.su is not None:
            i = t.su
            q[i] = max(q[i] - len(t.waiting_times), 0)
            excess = 0.0
            for w in t.waiting_times:
                excess += w - delay_bounds[i]
            y[i] = max(y[i] + excess, 0.0)
        x = max(x + t.gain - i_avg, 0.0)
        out.append((tuple(q), tuple(y), x))
    return out


def truncated_poisson_stats(rate: float, cap: int) -> tuple[float, float]:
    """Mean and variance of Poisson(rate) conditioned on {0..cap}, by
    direct summation."""
    weights = [math.exp(-rate) * rate**k / math.factorial(k) for k in range(cap + 1)]
    total = sum(weights)
    mean = sum(k * w for k, w in enumerate(weights)) / total
    second = sum(k * k * w for k, w in enumerate(weights)) / total
    return mean, second - mean * mean


def random_small_sim_config(case_seed: int):
    """A randomized small instance for trajectory-equivalence checks."""
    from crsched.channels import DeterministicGain, RayleighGain
    from crsched.engine import SimConfig, SuConfig
    from crsched.queueing import Bernoulli, TruncatedPoisson
    from crsched.schedulers import SchedulerKind

    rng = random.Random(case_seed)
    n = rng.randint(1, 3)

    def channel():
        if rng.random() < 0.5:
            return DeterministicGain(round(rng.uniform(0.0, 4.0), 3))
        return RayleighGain(round(rng.uniform(0.05, 2.0), 3))

    def arrivals():
        if rng.random() < 0.5:
            return Bernoulli(round(rng.uniform(0.0, 1.0), 3))
        return TruncatedPoisson(round(rng.uniform(0.0, 2.0), 3), rng.randint(2, 5))

    sus = tuple(
        SuConfig(
            arrivals=arrivals(),
            delay_bound=round(rng.uniform(0.5, 6.0), 3),
            direct=channel(),
            interference=channel(),
        )
        for _ in range(n)
    )
    kind = rng.choice(["proposed", "proposed-nonidling", "maxweight"])
    mode = rng.choice(["actual", "literal"]) if kind != "maxweight" else "actual"
    slots = rng.randint(10, 200)
    return (
        SimConfig(
            sus=sus,
            i_avg=round(rng.uniform(0.05, 3.0), 3),
            scheduler=SchedulerKind(kind, mode),
            max_slots=max(slots, 1),
            check_interval=max(slots, 1),
            seed=rng.getrandbits(32),
            trace=True,
        ),
        slots,
    )
