"""Constraint-violation accumulators ("virtual queues").

Each accumulator is a nonnegative scalar that absorbs per-slot constraint
slack or excess: it grows when the slot violates its constraint and drains
when the slot has room to spare. If the time-averaged accumulator level
vanishes, the corresponding long-run average constraint holds.
"""

from __future__ import annotations

from dataclasses import dataclass

from .queueing import DepartureBatch


class DelayVirtualQueue:
    """Cumulative waiting time in excess of one user's delay bound.

    One update per slot: y <- max(y + sum_j (W_j - d), 0) over that slot's
    departures. A slot with no departures leaves y unchanged.
    """

    __slots__ = ("bound", "y")

    def __init__(self, bound: float):
        if bound <= 0.0:
            raise ValueError(f"delay bound must be positive, got {bound!r}")
        self.bound = bound
        self.y = 0.0

    def update(self, batch: DepartureBatch) -> None:
        excess = 0.0
        d = self.bound
        for w in batch.waiting_times:
            excess += w - d
        y = self.y + excess
        self.y = y if y > 0.0 else 0.0


class InterferenceVirtualQueue:
    """Cumulative interference energy in excess of the per-slot budget."""

    __slots__ = ("budget", "x")

    def __init__(self, budget: float):
        if budget <= 0.0:
            raise ValueError(f"interference budget must be positive, got {budget!r}")
        self.budget = budget
        self.x = 0.0

    def update(self, gain: float) -> None:
        """``gain`` is the scheduled user's interference gain; pass 0.0 for
        an idle slot."""
        x = self.x + gain - self.budget
        self.x = x if x > 0.0 else 0.0


def stability_metric(x: float, ys: tuple[float, ...], slots: int) -> float:
    """Average terminal accumulator level per queue per slot.

    Small values indicate every accumulator grew sublinearly, i.e. the
    delay and interference constraints are met in long-run average.
    """
    if slots <= 0:
        raise ValueError("stability metric needs at least one elapsed slot")
    return (x + sum(ys)) / ((len(ys) + 1) * slots)


@dataclass(frozen=True)
class StabilityProbe:
    """Snapshot of terminal accumulator levels normalized by the horizon."""

    horizon: int
    terminal_over_t: tuple[float, ...]

    @classmethod
    def capture(cls, x: float, ys: tuple[float, ...], horizon: int) -> "StabilityProbe":
        if horizon <= 0:
            raise ValueError("probe horizon must be positive")
        return cls(horizon, tuple(v / horizon for v in (x, *ys)))

    @property
    def metric(self) -> float:
        return sum(self.terminal_over_t) / len(self.terminal_over_t)
