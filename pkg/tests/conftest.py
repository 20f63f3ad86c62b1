import numpy as np
import pytest
from hypothesis import settings

from diskode.harness import get_entry

settings.register_profile("suite", max_examples=25, deadline=None, derandomize=True)
settings.load_profile("suite")

ANGLES8 = 2 * np.pi * np.arange(8) / 8


@pytest.fixture(scope="session")
def catalog():
    return get_entry
