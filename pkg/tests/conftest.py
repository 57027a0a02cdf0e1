import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cliquepack.experiments import preset, run  # noqa: E402


@pytest.fixture(scope="session")
def preset_runs():
    """Single-thread preset runs, shared by the acceptance and determinism checks."""
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = run(preset(name), threads=1)
        return cache[name]

    return get
