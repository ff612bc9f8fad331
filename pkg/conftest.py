import os

import pytest

# Full tracebacks would change what the CLI tests see on stderr.
os.environ.pop("OTCELLS_DEBUG", None)


@pytest.fixture
def resources():
    return os.path.join(os.path.dirname(__file__), "tests", "resources")
