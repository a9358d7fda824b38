import math

import pytest

from semlat.channel import gain_for_average_snr
from semlat.config import default_system
from semlat.quality import PRESET_TARGETS, default_curves
from semlat.units import db_to_linear


@pytest.fixture(scope="session")
def system():
    return default_system()


@pytest.fixture(scope="session")
def curves():
    return default_curves()


@pytest.fixture(scope="session")
def reqs(curves):
    return {label: t.requirements(curves) for label, t in PRESET_TARGETS.items()}


def gain_at(sys, snr_db):
    return gain_for_average_snr(sys, db_to_linear(snr_db))


def rel(a, b):
    return abs(a - b) / abs(b) if b else abs(a)


def db(x):
    return 10.0 * math.log10(x)
