import pytest

from ahesim.crypto import SeededRandomSource, keygen
from ahesim.encoding import ScaleConfig
from ahesim.store import default_schema

pytest_plugins = "pytester"

getname = lambda x: x.name

# 512-bit keys are test-only; every test shares one deterministic pair
TEST_KEY_BITS = 512
TEST_KEY_SEED = 20240917


def pytest_addoption(parser):
    parser.addoption(
        "--full-scale",
        action="store_true",
        help="Run acceptance-sized loops instead of the reduced defaults.")
    parser.addoption("--skip-bench",
                     action="store_true",
                     help="Skip wall-clock timing tests.")


def pytest_runtest_setup(item):
    """
    This method handles skipping tests depending on command line flags
    """
    markers = set(map(getname, item.iter_markers()))
    if "bench" in markers and item.config.getoption("--skip-bench"):
        pytest.skip('Skipping test since --skip-bench was passed')
    if "slow" in markers and not item.config.getoption("--full-scale"):
        pytest.skip('Skipping test since --full-scale was not passed')


@pytest.fixture(scope="session")
def full_scale(request) -> bool:
    return request.config.getoption("--full-scale")


@pytest.fixture(scope="session")
def keypair():
    return keygen(TEST_KEY_BITS, SeededRandomSource(TEST_KEY_SEED))


@pytest.fixture(scope="session")
def other_keypair():
    return keygen(TEST_KEY_BITS, SeededRandomSource(TEST_KEY_SEED + 1))


@pytest.fixture
def rng():
    return SeededRandomSource(7)


@pytest.fixture
def cfg():
    return ScaleConfig(frac_bits=16, weight_frac_bits=8, max_abs=4.0)


@pytest.fixture
def schema():
    return default_schema(128)
