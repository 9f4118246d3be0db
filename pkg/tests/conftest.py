"""Shared fixtures for the bell-timing test suite."""

import math

import pytest

from bell_timing.models import SettingsQuad, build_schedule
from bell_timing.utils.local_models import ClockModel, ConstantModel, MalusModel
from bell_timing.utils.qm import qm_correlation_data

SQRT2 = math.sqrt(2.0)


@pytest.fixture
def standard_quad() -> SettingsQuad:
    return SettingsQuad.standard()


@pytest.fixture
def schedule(standard_quad):
    return build_schedule(1.0, standard_quad)


@pytest.fixture
def qm_data(standard_quad):
    return qm_correlation_data(standard_quad)


@pytest.fixture
def malus() -> MalusModel:
    return MalusModel()


@pytest.fixture
def clock() -> ClockModel:
    return ClockModel(period=0.5)


@pytest.fixture
def constant() -> ConstantModel:
    return ConstantModel(p=0.5)
