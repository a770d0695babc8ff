import json
import pathlib

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("dualjet", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("dualjet")

FROZEN = pathlib.Path(__file__).parent / "oracles" / "frozen.json"


@pytest.fixture(scope="session")
def frozen():
    return json.loads(FROZEN.read_text())
