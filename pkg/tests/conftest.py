import numpy as np
import pytest

from mrdpm import CountTrack, MixtureState


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_state(track, rng):
    """A random valid configuration for ``track``."""
    n = len(track)
    gammas = rng.integers(0, 2, n)
    n_draws = n + int(gammas.sum())
    labels = rng.integers(0, max(1, n_draws // 2 + 1), n_draws)
    s = np.empty((n, 2), dtype=np.int64)
    d = 0
    for i in range(n):
        if gammas[i]:
            s[i] = labels[d], labels[d + 1]
            d += 2
        else:
            s[i] = labels[d]
            d += 1
    _, s = np.unique(s, return_inverse=True)
    return MixtureState.from_assignments(track, s.reshape(n, 2), gammas)


def random_track(rng, n, max_count=5, exposures=False):
    e1 = rng.uniform(0.2, 5.0, n) if exposures else None
    e2 = rng.uniform(0.2, 5.0, n) if exposures else None
    return CountTrack(
        np.sort(rng.choice(10 * n + 10, n, replace=False)),
        rng.integers(0, max_count + 1, n),
        rng.integers(0, max_count + 1, n),
        e1,
        e2,
    )


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
