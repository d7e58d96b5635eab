import logging

import numpy as np
import pytest
from hypothesis import settings

from .constants import LOGGER_NAME
from .schemas import ChannelParams, InputQubit

settings.register_profile("rabin_qot", max_examples=60, deadline=None)
settings.load_profile("rabin_qot")


@pytest.fixture
def channel() -> ChannelParams:
    # |a|^2 = 0.8, |b|^2 = 0.2
    return ChannelParams.from_b2(0.2)


@pytest.fixture
def qubit_in() -> InputQubit:
    return InputQubit(alpha=0.6, beta=0.8)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(1234))


@pytest.fixture(autouse=True)
def reset_logger():
    # setup_logging binds sys.stderr at call time; drop handlers once capture closes it
    yield
    logger = logging.getLogger(LOGGER_NAME)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    logger.propagate = True
    logger.setLevel(logging.NOTSET)
