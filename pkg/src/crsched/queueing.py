"""FIFO packet queues and arrival processes.

Each user buffers whole packets in arrival order and tracks, per departed
packet, the waiting time W = departure slot - arrival slot + 1 (the
transmission slot counts, so W >= 1 always).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from itertools import islice

DEFAULT_BUFFER_CAP = 10_000_000


class InfeasibleLoadError(RuntimeError):
    """A queue outgrew its safety cap: the offered load cannot be served."""

    def __init__(self, message: str, partial_result=None):
        super().__init__(message)
        self.partial_result = partial_result


@dataclass(slots=True)
class PacketRecord:
    arrival_slot: int
    departure_slot: int | None = None
    waiting_slots: int | None = None


@dataclass(frozen=True)
class DepartureBatch:
    """Head-of-line packets that leave (or would leave) in one slot.

    waiting_times[j] is the j-th departing packet's W, computed against
    ``slot`` as the departure slot.
    """

    slot: int
    count: int
    waiting_times: tuple[int, ...]

    def __post_init__(self):
        if self.count != len(self.waiting_times):
            raise ValueError("batch count does not match its waiting times")


@dataclass(frozen=True)
class Bernoulli:
    """At most one arrival per slot, with mean ``rate``."""

    rate: float

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"bernoulli rate must be in [0, 1], got {self.rate!r}")

    @property
    def a_max(self) -> int:
        return 1

    def draw(self, source) -> int:
        return 1 if source.random() < self.rate else 0

    def with_rate(self, rate: float) -> "Bernoulli":
        return Bernoulli(rate)


@lru_cache(maxsize=None)
def _truncated_poisson_cdf(rate: float, cap: int) -> tuple[float, ...]:
    # Renormalized over {0, ..., cap}; this is a conditioned distribution,
    # not a clamp of the unbounded one, so no mass piles up at the cap.
    weights = [math.exp(-rate) * rate**k / math.factorial(k) for k in range(cap + 1)]
    total = sum(weights)
    cdf = []
    acc = 0.0
    for w in weights:
        acc += w / total
        cdf.append(acc)
    return tuple(cdf)


@dataclass(frozen=True)
class TruncatedPoisson:
    """Poisson(rate) conditioned on the support {0, ..., cap}."""

    rate: float
    cap: int

    def __post_init__(self):
        if self.cap < 1:
            raise ValueError(f"poisson cap must be at least 1, got {self.cap!r}")
        if not 0.0 <= self.rate <= self.cap:
            raise ValueError(
                f"poisson rate must be in [0, cap={self.cap}], got {self.rate!r}"
            )

    @property
    def a_max(self) -> int:
        return self.cap

    def draw(self, source) -> int:
        u = source.random()
        for k, c in enumerate(_truncated_poisson_cdf(self.rate, self.cap)):
            if u < c:
                return k
        return self.cap

    def with_rate(self, rate: float) -> "TruncatedPoisson":
        return TruncatedPoisson(rate, self.cap)


ArrivalProcess = Bernoulli | TruncatedPoisson


class SuQueue:
    """One user's FIFO buffer plus cumulative arrival/departure stats."""

    __slots__ = (
        "arrivals",
        "buffer_cap",
        "fifo",
        "cumulative_arrivals",
        "cumulative_departures",
        "departed_waiting_sum",
    )

    def __init__(self, arrivals: ArrivalProcess, buffer_cap: int = DEFAULT_BUFFER_CAP):
        if buffer_cap < 1:
            raise ValueError("buffer cap must be positive")
        self.arrivals = arrivals
        self.buffer_cap = buffer_cap
        self.fifo: deque[PacketRecord] = deque()
        self.cumulative_arrivals = 0
        self.cumulative_departures = 0
        self.departed_waiting_sum = 0

    @property
    def backlog(self) -> int:
        return len(self.fifo)

    def draw_arrivals(self, slot: int, source) -> int:
        """Append this slot's arrivals; new packets are eligible to depart
        in the same slot."""
        n = self.arrivals.draw(source)
        fifo = self.fifo
        for _ in range(n):
            fifo.append(PacketRecord(slot))
        self.cumulative_arrivals += n
        if len(fifo) > self.buffer_cap:
            raise InfeasibleLoadError(
                f"backlog exceeded safety cap {self.buffer_cap} at slot {slot}"
            )
        return n

    def peek_departures(self, n_max: int, slot: int) -> DepartureBatch:
        """Prospective departure of up to n_max head packets at ``slot``,
        without mutating the queue."""
        fifo = self.fifo
        k = min(len(fifo), n_max)
        if k <= 0:
            return DepartureBatch(slot, 0, ())
        return DepartureBatch(
            slot, k, tuple(slot - rec.arrival_slot + 1 for rec in islice(fifo, k))
        )

    def commit_departures(self, batch: DepartureBatch) -> None:
        """Remove the batch's packets and record their waiting times."""
        fifo = self.fifo
        if batch.count > len(fifo):
            raise ValueError("stale departure batch: count exceeds backlog")
        if batch.count and batch.waiting_times[0] != batch.slot - fifo[0].arrival_slot + 1:
            raise ValueError("stale departure batch: head waiting time mismatch")
        for w in batch.waiting_times:
            rec = fifo.popleft()
            rec.departure_slot = batch.slot
            rec.waiting_slots = w
            self.departed_waiting_sum += w
        self.cumulative_departures += batch.count

    def average_delay(self) -> float | None:
        """Mean waiting time over departed packets; None if none departed."""
        if self.cumulative_departures == 0:
            return None
        return self.departed_waiting_sum / self.cumulative_departures
