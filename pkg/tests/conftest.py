import numpy as np
import pytest

from routers import born, collapse_time, competition, highdim, kaon, props
from services.experiment_service import ExperimentService
from services.output_service import OutputService


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def output_service(tmp_path):
    return OutputService(output_dir=str(tmp_path))


@pytest.fixture
def service(output_service):
    service = ExperimentService(version="test", output=output_service)
    for module in (born, collapse_time, competition, kaon, highdim, props):
        service.include_router(module.router)
    return service
