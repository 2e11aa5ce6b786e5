import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from noisyqpc.codes import hamming_parity_check, steane_code  # noqa: E402
from noisyqpc.noise import make_rng  # noqa: E402

HAMMING_ROWS = ["0001111", "0110011", "1010101"]


@pytest.fixture(scope="session")
def steane():
    return steane_code()


@pytest.fixture(scope="session")
def hamming_h():
    return hamming_parity_check()


@pytest.fixture
def rng():
    return make_rng(20240611)
