import sys
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from crsched.channels import DeterministicGain, RayleighGain
from crsched.engine import SimConfig, SuConfig
from crsched.queueing import Bernoulli
from crsched.schedulers import SchedulerKind


def shipped_config(name: str) -> str:
    return str(resources.files("crsched") / "configs" / name)


def two_user_sus(lam: float, g_means=(0.4, 0.2), bounds=(1.5, 5.0)):
    """The baseline pair: unit deterministic direct links, faded
    interference links."""
    return tuple(
        SuConfig(
            arrivals=Bernoulli(lam),
            delay_bound=d,
            direct=DeterministicGain(1.0),
            interference=RayleighGain(g),
        )
        for d, g in zip(bounds, g_means)
    )


def two_user_config(lam: float, scheduler: str, i_avg: float = 2.0, seed: int = 1, **kw) -> SimConfig:
    return SimConfig(
        sus=two_user_sus(lam),
        i_avg=i_avg,
        scheduler=SchedulerKind(scheduler),
        seed=seed,
        **kw,
    )


@pytest.fixture
def table1_cfg_path():
    return shipped_config("table1.cfg")


@pytest.fixture
def binding_cfg_path():
    return shipped_config("binding.cfg")
