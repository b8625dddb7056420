import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # pay the one-time JIT cost before any timed test runs
    from sharksim import engine

    engine.warm_kernels()
