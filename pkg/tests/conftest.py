import numpy as np
import pytest

from budgetdiv.core import Profile


@pytest.fixture
def fig2():
    """The worked 7-voter example: 2x{a}, 3x{a,b}, 1x{b,c}, 1x{c}."""
    return Profile.from_named_ballots(
        ("a", "b", "c"),
        [{"a"}, {"a"}, {"a", "b"}, {"a", "b"}, {"a", "b"}, {"b", "c"}, {"c"}],
    )


def random_profile(rng, n_max=8, m_max=5, p=0.4):
    """Small random profile with non-empty ballots (resampled rows)."""
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    ballots = []
    for _ in range(n):
        while True:
            row = np.nonzero(rng.random(m) < p)[0]
            if row.size:
                break
        ballots.append(frozenset(int(x) for x in row))
    return Profile.from_ballots(ballots, m=m)
