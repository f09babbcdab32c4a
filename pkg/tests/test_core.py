from fractions import Fraction

import numpy as np
import pytest

from budgetdiv.core import (
    Distribution,
    Profile,
    ProfileFormatError,
    parse_profile,
    utility,
    utility_vector,
    write_profile,
)

from conftest import random_profile


def test_profile_validation():
    with pytest.raises(ValueError):
        Profile(("a", "b"), (frozenset(),))  # empty ballot
    with pytest.raises(ValueError):
        Profile(("a", "a"), (frozenset({0}),))  # duplicate name
    with pytest.raises(ValueError):
        Profile(("a",), (frozenset({1}),))  # unknown candidate
    with pytest.raises(ValueError):
        Profile(("a",), ())  # no voters
    with pytest.raises(ValueError):
        Profile(("sp ace",), (frozenset({0}),))  # bad name


def test_distribution_validation():
    Distribution((Fraction(1, 2), Fraction(1, 2)), exact=True)
    with pytest.raises(ValueError):
        Distribution((Fraction(1, 2), Fraction(1, 3)), exact=True)
    with pytest.raises(ValueError):
        Distribution((Fraction(3, 2), Fraction(-1, 2)), exact=True)
    Distribution((0.5, 0.5 + 1e-13), exact=False)
    with pytest.raises(ValueError):
        Distribution((0.5, 0.6), exact=False)


def test_utility_fig2_values(fig2):
    nash_like = Distribution.from_exact([Fraction(2, 3), Fraction(1, 12), Fraction(1, 4)])
    # voter 2 approves {a, b}
    assert utility(fig2, nash_like, 2) == Fraction(3, 4)
    egal_like = Distribution.from_exact([Fraction(1, 2), 0, Fraction(1, 2)])
    assert utility(fig2, egal_like, 5) == Fraction(1, 2)  # ballot {b, c}
    assert utility_vector(fig2, egal_like) == (Fraction(1, 2),) * 7


def test_point_distribution_gives_full_utility():
    prof = Profile.from_ballots([{1}, {0, 1}], m=3)
    point = Distribution.point(3, 1)
    assert utility(prof, point, 0) == 1
    two = Profile.from_ballots([{0}, {1}], m=2)
    uni = Distribution.uniform(2)
    assert utility_vector(two, uni) == (Fraction(1, 2), Fraction(1, 2))


def test_utility_errors(fig2):
    dist = Distribution.uniform(3)
    with pytest.raises(IndexError):
        utility(fig2, dist, 7)
    with pytest.raises(ValueError):
        utility(fig2, Distribution.uniform(4), 0)


def test_utility_vector_is_linear():
    rng = np.random.default_rng(5)
    for _ in range(25):
        prof = random_profile(rng)
        m = prof.m
        a = _random_exact_dist(rng, m)
        b = _random_exact_dist(rng, m)
        lam = Fraction(int(rng.integers(0, 11)), 10)
        mixed = Distribution.from_exact(
            [lam * sa + (1 - lam) * sb for sa, sb in zip(a.shares, b.shares)])
        ua, ub, um = (utility_vector(prof, d) for d in (a, b, mixed))
        for x, y, z in zip(ua, ub, um):
            assert lam * x + (1 - lam) * y == z


def _random_exact_dist(rng, m):
    weights = [Fraction(int(rng.integers(0, 20))) for _ in range(m)]
    total = sum(weights)
    if total == 0:
        weights[0] = Fraction(1)
        total = Fraction(1)
    return Distribution.from_exact([w / total for w in weights])


def test_parse_basic():
    prof = parse_profile("candidates: a b c\nvoter: a\nvoter: a b\n")
    assert prof.n == 2 and prof.m == 3
    assert prof.ballots[1] == frozenset({0, 1})


def test_parse_multiplicities_fig2(fig2):
    text = """
# the worked example
candidates: a b c
2: a
3: a b
voter: b c
voter: c
"""
    assert parse_profile(text) == fig2


def test_parse_errors():
    with pytest.raises(ProfileFormatError, match="empty ballot"):
        parse_profile("candidates: a b\nvoter:\n")
    with pytest.raises(ProfileFormatError, match="unknown candidate"):
        parse_profile("candidates: a b\nvoter: z\n")
    with pytest.raises(ProfileFormatError, match="duplicate"):
        parse_profile("candidates: a a\nvoter: a\n")
    with pytest.raises(ProfileFormatError, match="header"):
        parse_profile("voter: a\n")
    err = None
    try:
        parse_profile("candidates: a\nvoter: a\nvoter:\n")
    except ProfileFormatError as exc:
        err = exc
    assert err is not None and err.line == 3


def test_roundtrip_identity(fig2):
    text = write_profile(fig2)
    assert parse_profile(text) == fig2
    assert write_profile(parse_profile(text)) == text
    rng = np.random.default_rng(11)
    for _ in range(20):
        prof = random_profile(rng)
        assert parse_profile(write_profile(prof)) == prof
