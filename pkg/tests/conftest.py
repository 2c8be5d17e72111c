import numpy as np
import pytest

from growthcat import load_model
from growthcat.model import ModelSpec

ACCEPTANCE = {}


@pytest.fixture(scope="session")
def td():
    """alpha = sqrt(x), beta = 1, total disaster: Gamma(x) = 2 sqrt(x)."""
    return load_model("total_disaster")


@pytest.fixture(scope="session")
def affine():
    """alpha = 1 + x, beta = 1, h = e^y: transient to infinity."""
    return load_model("exp_affine")


@pytest.fixture(scope="session")
def sqrtpi():
    """alpha = sqrt(x), beta = 2 sqrt(x), h = e^y: mean return time sqrt(pi)."""
    return load_model("u0_sqrt_pi")


@pytest.fixture(scope="session")
def fig1():
    """alpha = 1 + x^2, beta = x^1.5, h = e^y: blow-up in finite time is possible."""
    return load_model("fig1")


@pytest.fixture(scope="session")
def fig2():
    return load_model("fig2")


@pytest.fixture(scope="session")
def absorbed():
    """alpha = x, beta = x, total disaster: 0 is an exit boundary."""
    return load_model("absorbed")


@pytest.fixture(scope="session")
def make():
    def build(drift, rate, kernel):
        return ModelSpec.from_dict({"drift": drift, "rate": rate, "kernel": kernel})
    return build


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        ACCEPTANCE[props["criterion"]] = (report.outcome, props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        outcome, detail = ACCEPTANCE[key]
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {key}: {mark}  {detail}")
