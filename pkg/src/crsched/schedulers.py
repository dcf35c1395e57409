"""Slot decision rules.

Two families share the single-transmitter constraint (at most one user per
slot, chosen among the backlogged):

* the index policy: schedule the backlogged user with the smallest
  decision index phi, where phi trades the slot's interference cost and
  residual delay pressure against the backlog it would clear. The idling
  variant leaves the slot empty when even the best index is strictly
  positive; the non-idling variant always transmits when someone is
  backlogged.
* max-weight: schedule the backlogged user with the largest Q/g, i.e.
  longest queue per unit of interference caused. Never idles while anyone
  is backlogged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channels import ChannelSample
from .queueing import DepartureBatch

PHI_ACTUAL = "actual"  # closing term counts the packets actually transmittable
PHI_LITERAL = "literal"  # closing term uses the raw real-valued rate

PROPOSED = "proposed"
PROPOSED_NONIDLING = "proposed-nonidling"
MAXWEIGHT = "maxweight"
SCHEDULER_NAMES = (PROPOSED, PROPOSED_NONIDLING, MAXWEIGHT)


@dataclass(frozen=True)
class SchedulerKind:
    """A decision rule plus, for the index policy, its phi flavor."""

    kind: str
    phi_mode: str = PHI_ACTUAL

    def __post_init__(self):
        if self.kind not in SCHEDULER_NAMES:
            raise ValueError(
                f"unknown scheduler {self.kind!r}; expected one of {SCHEDULER_NAMES}"
            )
        if self.phi_mode not in (PHI_ACTUAL, PHI_LITERAL):
            raise ValueError(f"unknown phi mode {self.phi_mode!r}")

    @property
    def idling(self) -> bool:
        return self.kind == PROPOSED


@dataclass(frozen=True)
class ScheduleDecision:
    """One slot's assignment: one user, or idle (su is None).

    metric_values holds each user's decision metric (phi for the index
    policy, the Q/g weight for max-weight); NaN marks users that were not
    backlogged and therefore never evaluated. ``batch`` is the chosen
    user's prospective departure batch, None on idle.
    """

    su: int | None
    metric_values: tuple[float, ...]
    batch: DepartureBatch | None

    @property
    def idle(self) -> bool:
        return self.su is None


def transmission_rate(gamma: float, scheduled: bool = True) -> float:
    """Packets deliverable in one slot at direct power gain gamma.

    An unscheduled user transmits nothing, whatever its gain.
    """
    if not scheduled:
        return 0.0
    return math.log2(1.0 + gamma)


def phi_value(
    q: int,
    y: float,
    d: float,
    x: float,
    g: float,
    rate: float,
    waiting_times: tuple[int, ...],
    mode: str = PHI_ACTUAL,
) -> float:
    """Decision index from already-peeked departures.

    phi = X g + Y sum(W) - (Y d + Q) r, with the W-sum over the head
    packets that would depart and r either that packet count (actual) or
    the raw rate (literal).
    """
    w_sum = 0.0
    for w in waiting_times:
        w_sum += w
    r = rate if mode == PHI_LITERAL else float(len(waiting_times))
    return x * g + y * w_sum - (y * d + q) * r


def compute_phi(su, x_vq, sample: ChannelSample, slot: int,
                mode: str = PHI_ACTUAL) -> float:
    """Decision index for one backlogged user under this slot's gains.

    ``su`` needs .index, .queue and .delay_vq attributes; ``x_vq`` is the
    interference accumulator.
    """
    i = su.index
    q = su.queue.backlog
    if q <= 0:
        raise ValueError("phi is only defined for backlogged users")
    rate = transmission_rate(sample.direct[i])
    batch = su.queue.peek_departures(min(q, int(rate)), slot)
    return phi_value(
        q, su.delay_vq.y, su.delay_vq.bound, x_vq.x,
        sample.interference[i], rate, batch.waiting_times, mode,
    )


def argmin_index(values) -> int | None:
    """Index of the smallest non-NaN value, lowest index on ties; None if
    every value is NaN."""
    best = None
    best_v = math.inf
    for i, v in enumerate(values):
        if v == v and v < best_v:
            best, best_v = i, v
    return best


def argmax_index(values) -> int | None:
    """Index of the largest non-NaN value, lowest index on ties."""
    best = None
    best_v = -math.inf
    for i, v in enumerate(values):
        if v == v and v > best_v:
            best, best_v = i, v
    return best


def decide_proposed(
    sus,
    x_vq,
    sample: ChannelSample,
    slot: int,
    idling: bool = True,
    mode: str = PHI_ACTUAL,
) -> ScheduleDecision:
    """Index policy: argmin phi over backlogged users, lowest index on
    ties; the idling variant idles when the minimum is strictly positive."""
    x = x_vq.x
    n = len(sus)
    metrics = [math.nan] * n
    batches = [None] * n
    for i, su in enumerate(sus):
        queue = su.queue
        q = queue.backlog
        if q == 0:
            continue
        rate = transmission_rate(sample.direct[i])
        batch = queue.peek_departures(min(q, int(rate)), slot)
        batches[i] = batch
        metrics[i] = phi_value(
            q, su.delay_vq.y, su.delay_vq.bound, x,
            sample.interference[i], rate, batch.waiting_times, mode,
        )
    best = argmin_index(metrics)
    if best is None or (idling and metrics[best] > 0.0):
        return ScheduleDecision(None, tuple(metrics), None)
    return ScheduleDecision(best, tuple(metrics), batches[best])


def decide_max_weight(sus, sample: ChannelSample, slot: int) -> ScheduleDecision:
    """Max-weight baseline: argmax Q/g over backlogged users (g = 0 means
    interference-free, i.e. infinite weight); lowest index on ties."""
    metrics = [math.nan] * len(sus)
    for i, su in enumerate(sus):
        q = su.queue.backlog
        if q == 0:
            continue
        g = sample.interference[i]
        metrics[i] = math.inf if g <= 0.0 else q / g
    best = argmax_index(metrics)
    if best is None:
        return ScheduleDecision(None, tuple(metrics), None)
    queue = sus[best].queue
    rate = transmission_rate(sample.direct[best])
    batch = queue.peek_departures(min(queue.backlog, int(rate)), slot)
    return ScheduleDecision(best, tuple(metrics), batch)
