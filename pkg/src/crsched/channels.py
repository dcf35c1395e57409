"""Per-slot channel gain models.

Gains are power gains, drawn independently across slots and links and
truncated to a finite support [0, cap]. Two models cover the experiments:
a constant gain and a Rayleigh-faded link, whose power gain (the squared
envelope) is exponentially distributed with the configured mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .streams import ROLE_DIRECT, ROLE_INTERFERENCE, substream

# Default truncation point for fading gains, as a multiple of the mean.
# P(exceed) = exp(-25), so the truncation is statistically invisible but
# keeps every per-slot quantity bounded.
RAYLEIGH_CAP_FACTOR = 25.0


@dataclass(frozen=True)
class DeterministicGain:
    """Constant power gain. The cap defaults to the value itself."""

    value: float
    cap: float | None = None

    def __post_init__(self):
        if self.cap is None:
            object.__setattr__(self, "cap", float(self.value))
        if not 0.0 <= self.value <= self.cap:
            raise ValueError(
                f"deterministic gain {self.value!r} outside [0, {self.cap!r}]"
            )

    @property
    def mean(self) -> float:
        return self.value

    def sample(self, rng: np.random.Generator) -> float:
        return self.value

    def sample_block(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.full(n, self.value)


@dataclass(frozen=True)
class RayleighGain:
    """Rayleigh-faded link: exponential power gain, truncated at cap."""

    mean: float
    cap: float | None = None

    def __post_init__(self):
        if self.mean <= 0.0:
            raise ValueError(f"rayleigh mean must be positive, got {self.mean!r}")
        if self.cap is None:
            object.__setattr__(self, "cap", RAYLEIGH_CAP_FACTOR * self.mean)
        if self.cap <= 0.0:
            raise ValueError(f"rayleigh cap must be positive, got {self.cap!r}")

    def sample(self, rng: np.random.Generator) -> float:
        return min(float(rng.exponential(self.mean)), self.cap)

    def sample_block(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.minimum(rng.exponential(self.mean, n), self.cap)


ChannelModel = DeterministicGain | RayleighGain


@dataclass(frozen=True)
class ChannelSample:
    """One slot's gains for every user: direct[i] and interference[i]."""

    direct: tuple[float, ...]
    interference: tuple[float, ...]


class _GainSource:
    """Scalar gain feed for one (user, link) pair, refilled in blocks."""

    __slots__ = ("model", "rng", "block", "_buf", "_idx")

    def __init__(self, model: ChannelModel, rng: np.random.Generator, block: int):
        self.model = model
        self.rng = rng
        self.block = block
        self._buf = model.sample_block(rng, block).tolist()
        self._idx = 0

    def next(self) -> float:
        i = self._idx
        if i == self.block:
            self._buf = self.model.sample_block(self.rng, self.block).tolist()
            i = 0
        self._idx = i + 1
        return self._buf[i]


class ChannelBank:
    """Owns the per-user channel substreams and draws one slot at a time.

    Each (user, link type) pair gets its own substream, so a user's gain
    sequence depends only on the seed and its own index.
    """

    def __init__(
        self,
        direct: tuple[ChannelModel, ...],
        interference: tuple[ChannelModel, ...],
        seed: int,
        block: int = 4096,
    ):
        if not direct or len(direct) != len(interference):
            raise ValueError("need one direct and one interference model per user")
        self.n_sus = len(direct)
        self.direct_models = tuple(direct)
        self.interference_models = tuple(interference)
        self._direct_sources = tuple(
            _GainSource(m, substream(seed, i, ROLE_DIRECT), block)
            for i, m in enumerate(self.direct_models)
        )
        self._interference_sources = tuple(
            _GainSource(m, substream(seed, i, ROLE_INTERFERENCE), block)
            for i, m in enumerate(self.interference_models)
        )

    def sample_slot(self) -> ChannelSample:
        return ChannelSample(
            direct=tuple(s.next() for s in self._direct_sources),
            interference=tuple(s.next() for s in self._interference_sources),
        )
