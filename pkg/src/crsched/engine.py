"""Slot-by-slot simulation driver.

Every slot executes the same fixed sequence:

1. each user's arrivals are appended to its queue (new packets may depart
   in the same slot)
2. the slot's channel gains are drawn
3. the scheduler picks at most one backlogged user
4. the chosen user's head packets depart, n = min(Q, floor(rate))
5. the chosen user's delay accumulator absorbs the departed waiting times
6. the interference accumulator absorbs the slot's interference (0 on idle)
7. metrics are accumulated

A run stops once the average accumulator level per queue per slot falls
below epsilon (converged), or at max_slots (not converged). A backlog that
outgrows its safety cap aborts the run with an infeasible-load diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .channels import ChannelBank, ChannelModel, ChannelSample
from .queueing import (
    DEFAULT_BUFFER_CAP,
    ArrivalProcess,
    InfeasibleLoadError,
    SuQueue,
)
from .schedulers import (
    MAXWEIGHT,
    PHI_ACTUAL,
    SchedulerKind,
    ScheduleDecision,
    decide_max_weight,
    decide_proposed,
    transmission_rate,
)
from .streams import ROLE_ARRIVALS, BufferedUniforms, substream
from .virtual_queues import (
    DelayVirtualQueue,
    InterferenceVirtualQueue,
    stability_metric,
)


class DiagnosticsUnavailableError(RuntimeError):
    """Drift diagnostics were requested from a run that did not record them."""


class PsiConsistencyError(RuntimeError):
    """A slot decision disagreed with the brute-force objective minimizer."""


@dataclass(frozen=True)
class SuConfig:
    """One user's statics: traffic, delay bound, and both channel models."""

    arrivals: ArrivalProcess
    delay_bound: float
    direct: ChannelModel
    interference: ChannelModel

    @property
    def rate(self) -> float:
        return self.arrivals.rate


@dataclass(frozen=True)
class SimConfig:
    """Everything one run needs; picklable, so sweeps can fan out."""

    sus: tuple[SuConfig, ...]
    i_avg: float
    scheduler: SchedulerKind
    epsilon: float = 0.01
    max_slots: int = 1_000_000
    check_interval: int = 10_000
    seed: int = 0
    buffer_cap: int = DEFAULT_BUFFER_CAP
    record_series: bool = True
    series_stride: int = 100
    trace: bool = False
    debug_check_psi: bool = False

    def __post_init__(self):
        if not self.sus:
            raise ValueError("need at least one user")
        # epsilon = 0 is allowed here: the threshold is then unreachable and
        # the run always executes max_slots slots.
        if self.epsilon < 0.0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon!r}")
        if self.check_interval < 1:
            raise ValueError("check interval must be positive")
        if self.max_slots < self.check_interval:
            raise ValueError("max_slots must be at least the check interval")
        if self.series_stride < 1:
            raise ValueError("series stride must be positive")
        if self.debug_check_psi:
            if self.scheduler.kind == MAXWEIGHT:
                raise ValueError("objective consistency check applies to the index policy only")
            if self.scheduler.phi_mode != PHI_ACTUAL:
                raise ValueError("objective consistency check requires actual phi mode")

    @property
    def n_sus(self) -> int:
        return len(self.sus)


class SuState:
    """One user's live state inside a run."""

    __slots__ = ("cfg", "index", "queue", "delay_vq", "arrival_source")

    def __init__(self, cfg: SuConfig, index: int, seed: int, buffer_cap: int):
        self.cfg = cfg
        self.index = index
        self.queue = SuQueue(cfg.arrivals, buffer_cap)
        self.delay_vq = DelayVirtualQueue(cfg.delay_bound)
        self.arrival_source = BufferedUniforms(substream(seed, index, ROLE_ARRIVALS))


@dataclass(frozen=True)
class SlotTrace:
    """Post-slot snapshot plus the slot's driving quantities."""

    slot: int
    arrivals: tuple[int, ...]
    su: int | None
    gain: float
    waiting_times: tuple[int, ...]
    q: tuple[int, ...]
    y: tuple[float, ...]
    x: float


@dataclass
class MetricsLedger:
    """Per-run accumulators. Series entries are decimated post-slot states."""

    diagnostics: bool = False
    slots: int = 0
    interference_sum: float = 0.0
    series_slots: list[int] = field(default_factory=list)
    series_q: list[tuple[int, ...]] = field(default_factory=list)
    series_y: list[tuple[float, ...]] = field(default_factory=list)
    series_x: list[float] = field(default_factory=list)
    drift_sum: float = 0.0
    lyapunov_prev: float = 0.0
    c_y_emp: list[float] = field(default_factory=list)
    psi_checks: int = 0
    trace: list[SlotTrace] = field(default_factory=list)
    terminal_x: float | None = None
    terminal_y: tuple[float, ...] | None = None
    terminal_q: tuple[int, ...] | None = None


@dataclass(frozen=True)
class DriftSummary:
    """Empirical drift bound check for one recorded run.

    c_total bounds the mean one-slot quadratic drift; jensen_bound is the
    implied cap sqrt(C/T) on every terminal backlog divided by the horizon.
    """

    c_x: float
    c_q: tuple[float, ...]
    c_y_emp: tuple[float, ...]
    c_total: float
    mean_drift: float
    q_over_t: tuple[float, ...]
    jensen_bound: float


@dataclass(frozen=True)
class RunResult:
    converged: bool
    stability_metric: float
    avg_delays: tuple[float | None, ...]
    interference_avg: float
    slots: int
    terminal_x: float
    terminal_y: tuple[float, ...]
    terminal_q: tuple[int, ...]
    drift: DriftSummary | None
    note: str = ""


def drift_diagnostics(ledger: MetricsLedger, config: SimConfig) -> DriftSummary:
    """Empirical drift statistics against the per-run deterministic bound."""
    if not ledger.diagnostics or ledger.terminal_q is None:
        raise DiagnosticsUnavailableError("diagnostics unavailable: run recorded no series")
    g_max = max(su.interference.cap for su in config.sus)
    c_x = g_max * g_max + config.i_avg * config.i_avg
    c_q = []
    for su in config.sus:
        a_max = float(su.arrivals.a_max)
        r_max = transmission_rate(su.direct.cap)
        c_q.append(a_max * a_max + r_max * r_max)
    c_total = c_x + sum(c_q) + sum(ledger.c_y_emp)
    t = ledger.slots
    return DriftSummary(
        c_x=c_x,
        c_q=tuple(c_q),
        c_y_emp=tuple(ledger.c_y_emp),
        c_total=c_total,
        mean_drift=ledger.drift_sum / t,
        q_over_t=tuple(q / t for q in ledger.terminal_q),
        jensen_bound=math.sqrt(c_total / t),
    )


class Simulation:
    """Mutable run state; drive with run_slot() or run_until_converged()."""

    def __init__(self, config: SimConfig):
        self.config = config
        seed = config.seed
        self.sus = tuple(
            SuState(cfg, i, seed, config.buffer_cap) for i, cfg in enumerate(config.sus)
        )
        self.bank = ChannelBank(
            tuple(su.direct for su in config.sus),
            tuple(su.interference for su in config.sus),
            seed,
        )
        self.x_vq = InterferenceVirtualQueue(config.i_avg)
        self.ledger = MetricsLedger(
            diagnostics=config.record_series,
            c_y_emp=[0.0] * config.n_sus,
        )
        self.slot = 0
        sched = config.scheduler
        self._kind = sched.kind
        self._idling = sched.idling
        self._phi_mode = sched.phi_mode
        self._record = config.record_series
        self._stride = config.series_stride
        self._trace = config.trace
        self._debug_psi = config.debug_check_psi

    def run_slot(self) -> ScheduleDecision:
        slot = self.slot
        sus = self.sus
        if self._trace:
            arrivals = tuple(su.queue.draw_arrivals(slot, su.arrival_source) for su in sus)
        else:
            for su in sus:
                su.queue.draw_arrivals(slot, su.arrival_source)
        sample = self.bank.sample_slot()
        if self._kind == MAXWEIGHT:
            decision = decide_max_weight(sus, sample, slot)
        else:
            decision = decide_proposed(
                sus, self.x_vq, sample, slot, idling=self._idling, mode=self._phi_mode
            )
        if self._debug_psi:
            self._check_psi(decision, sample, slot)
        if decision.su is None:
            gain = 0.0
        else:
            chosen = sus[decision.su]
            chosen.queue.commit_departures(decision.batch)
            chosen.delay_vq.update(decision.batch)
            gain = sample.interference[decision.su]
        self.x_vq.update(gain)
        led = self.ledger
        led.slots = slot + 1
        led.interference_sum += gain
        if self._record:
            self._accumulate(decision, slot)
        if self._trace:
            led.trace.append(
                SlotTrace(
                    slot=slot,
                    arrivals=arrivals,
                    su=decision.su,
                    gain=gain,
                    waiting_times=decision.batch.waiting_times if decision.batch else (),
                    q=tuple(su.queue.backlog for su in sus),
                    y=tuple(su.delay_vq.y for su in sus),
                    x=self.x_vq.x,
                )
            )
        self.slot = slot + 1
        return decision

    def _accumulate(self, decision: ScheduleDecision, slot: int) -> None:
        led = self.ledger
        x = self.x_vq.x
        l_new = 0.5 * x * x
        for su in self.sus:
            y = su.delay_vq.y
            q = su.queue.backlog
            l_new += 0.5 * (y * y + q * q)
        led.drift_sum += l_new - led.lyapunov_prev
        led.lyapunov_prev = l_new
        if decision.su is not None and decision.batch.count:
            batch = decision.batch
            d = self.sus[decision.su].cfg.delay_bound
            w_sum = 0.0
            for w in batch.waiting_times:
                w_sum += w
            cand = d * d * batch.count * batch.count + w_sum * w_sum
            if cand > led.c_y_emp[decision.su]:
                led.c_y_emp[decision.su] = cand
        if slot % self._stride == 0:
            led.series_slots.append(slot)
            led.series_q.append(tuple(su.queue.backlog for su in self.sus))
            led.series_y.append(tuple(su.delay_vq.y for su in self.sus))
            led.series_x.append(x)

    def _check_psi(self, decision: ScheduleDecision, sample: ChannelSample, slot: int) -> None:
        # Independent route: enumerate the one-slot objective over
        # {idle} u {schedule one backlogged user} and insist the decision
        # attained the minimum. Idle scores 0; ties prefer scheduling, then
        # the lowest index.
        x = self.x_vq.x
        best_su = None
        best_psi = 0.0 if self._idling else math.inf
        for i, su in enumerate(self.sus):
            q = su.queue.backlog
            if q == 0:
                continue
            n = min(q, int(math.log2(1.0 + sample.direct[i])))
            batch = su.queue.peek_departures(n, slot)
            y = su.delay_vq.y
            d = su.delay_vq.bound
            excess = 0.0
            for w in batch.waiting_times:
                excess += w - d
            psi = x * sample.interference[i] + y * excess - q * n
            if (best_su is None and psi <= best_psi) or psi < best_psi:
                best_su, best_psi = i, psi
        if best_su != decision.su:
            raise PsiConsistencyError(
                f"slot {slot}: scheduled {decision.su} but objective minimizer is {best_su}"
            )
        self.ledger.psi_checks += 1

    def stability_metric(self) -> float:
        if self.slot == 0:
            return math.inf
        return stability_metric(
            self.x_vq.x, tuple(su.delay_vq.y for su in self.sus), self.slot
        )

    def run_until_converged(self) -> RunResult:
        cfg = self.config
        check = cfg.check_interval
        try:
            while self.slot < cfg.max_slots:
                self.run_slot()
                if self.slot % check == 0:
                    metric = self.stability_metric()
                    if metric < cfg.epsilon:
                        return self._finalize(True, metric)
            return self._finalize(False, self.stability_metric())
        except InfeasibleLoadError as err:
            err.partial_result = self._finalize(
                False, self.stability_metric(), note="infeasible-load"
            )
            raise

    def _finalize(self, converged: bool, metric: float, note: str = "") -> RunResult:
        led = self.ledger
        led.terminal_x = self.x_vq.x
        led.terminal_y = tuple(su.delay_vq.y for su in self.sus)
        led.terminal_q = tuple(su.queue.backlog for su in self.sus)
        slots = led.slots
        drift = drift_diagnostics(led, self.config) if (led.diagnostics and slots) else None
        return RunResult(
            converged=converged,
            stability_metric=metric,
            avg_delays=tuple(su.queue.average_delay() for su in self.sus),
            interference_avg=led.interference_sum / slots if slots else 0.0,
            slots=slots,
            terminal_x=led.terminal_x,
            terminal_y=led.terminal_y,
            terminal_q=led.terminal_q,
            drift=drift,
            note=note,
        )


def run_until_converged(config: SimConfig) -> RunResult:
    """Build a Simulation from config and drive it to its stopping point."""
    return Simulation(config).run_until_converged()
