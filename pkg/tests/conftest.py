import numpy as np
import pytest

from chebham.problems import bundled_spec, bundled_spec_ids
from chebham.runner import run


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)


class RunCache:
    """Run each bundled problem once per session; several suites share results."""

    def __init__(self):
        self._cache = {}

    def get(self, problem_id, **kw):
        key = (problem_id, tuple(sorted(kw.items())))
        if key not in self._cache:
            spec = bundled_spec(problem_id)
            self._cache[key] = run(spec, seed=1, **kw)
        return self._cache[key]


@pytest.fixture(scope="session")
def runs():
    return RunCache()


@pytest.fixture(scope="session")
def all_bundled_ids():
    return bundled_spec_ids()
