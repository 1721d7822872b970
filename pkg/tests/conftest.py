import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dtwdro.harness import GeneratorParams, generate_requests, generate_scenario, historical_distribution
from dtwdro.network import EdgeServer, PhysicalTwin, Scenario
from dtwdro.requestlog import SampleSpace

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def make_e1(capacity=10.0, storage_cost=1.0, response_size=1.0) -> Scenario:
    """Two servers, one PT at server 1 (index 0); the worked example used across the docs."""
    return Scenario(
        servers=[EdgeServer(0, capacity), EdgeServer(1, capacity)],
        cloud_unit_latency=[5.0, 5.0],
        inter_es_unit_latency=[[0.0, 1.0], [1.0, 0.0]],
        upload_unit_latency=0.5,
        pts=[PhysicalTwin(0, 0, 2.0, 100.0, storage_cost, response_size)],
    )


@pytest.fixture
def e1():
    return make_e1()


def small_instance(seed, V=3, M=2, history=200, **kw):
    params = GeneratorParams(seed=seed, V=V, M=M, **kw)
    scenario = generate_scenario(params)
    space = SampleSpace.of(scenario)
    hist = generate_requests(scenario, space, historical_distribution(space, seed), history, seed)
    return scenario, space, hist


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one "PASS/FAIL criterion ..." line per acceptance check, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
