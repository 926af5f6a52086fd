import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def ctx4():
    from leray_alpha import ModelContext

    return ModelContext(nu=1.0, alpha=1.0, theta1=1.0, theta2=1.0, n=4)


@pytest.fixture
def ctx8():
    from leray_alpha import ModelContext

    return ModelContext(nu=1.0, alpha=1.0, theta1=0.25, theta2=1.0, n=8)
