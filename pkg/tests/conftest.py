import pytest

from motility_bif.expansion import run_pipeline
from motility_bif.model import DiffusionModel, PhysParams
from motility_bif.oned import OneDConfig, oned_pipeline

BASE = PhysParams(0.1, 1.25, 0.05)


@pytest.fixture(scope="session")
def pipeline():
    return run_pipeline(BASE, DiffusionModel.van_der_waals(10.0, 0.3))


@pytest.fixture(scope="session")
def pipeline_1d():
    return oned_pipeline(OneDConfig(PhysParams(0.1, 1.25), DiffusionModel.van_der_waals(10.0, 0.3)))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS):
        passed, detail = RESULTS[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if passed else 'FAIL'}  {detail}")
