from fractions import Fraction

import numpy as np
import pytest

from budgetdiv.constructions import construct
from budgetdiv.core import Profile, utility, utility_vector
from budgetdiv.kernels import stationarity_residual
from budgetdiv.rules import (
    NASH,
    RuleSpec,
    fut_rounds,
    parse_rule_spec,
    solve,
    solve_egal,
    solve_fut,
    solve_mix,
    solve_mp,
    solve_nash,
    solve_scwm,
)

from conftest import random_profile

F = Fraction


# --- rule spec parsing -----------------------------------------------------

def test_parse_rule_specs():
    assert parse_rule_spec("nash") == NASH
    assert parse_rule_spec("scwm:0.5").alpha == 0.5
    mix = parse_rule_spec("mix:0.25:nash")
    assert mix.lam == F(1, 4) and mix.base == NASH
    assert str(mix) == "mix:1/4:nash"
    nested = parse_rule_spec("mix:1/2:scwm:0.5")
    assert nested.base.kind == "scwm"
    with pytest.raises(ValueError):
        parse_rule_spec("plurality")
    with pytest.raises(ValueError):
        parse_rule_spec("scwm:1.5")
    with pytest.raises(ValueError):
        parse_rule_spec("mix:0.5:mix:0.5:nash")
    with pytest.raises(ValueError):
        RuleSpec("mix", lam=F(0), base=NASH)


# --- worked example --------------------------------------------------------

def test_fig2_all_rules(fig2):
    nash = solve_nash(fig2)
    for got, want in zip(nash.shares, (2 / 3, 1 / 12, 1 / 4)):
        assert abs(got - want) < 1e-8
    fut = solve_fut(fig2)
    assert fut.shares == (F(5, 7), F(1, 7), F(1, 7))
    mp = solve_mp(fig2)
    assert mp.shares == (F(5, 7), F(0), F(2, 7))
    egal = solve_egal(fig2)
    assert utility_vector(fig2, egal) == (F(1, 2),) * 7
    assert egal.shares == (F(1, 2), F(0), F(1, 2))


def test_fig2_egal_manipulated(fig2):
    deviated = fig2.replace_ballot(5, {1})
    egal = solve_egal(deviated)
    assert egal.shares == (F(1, 3), F(1, 3), F(1, 3))
    assert utility(fig2, egal, 5) == F(2, 3)


def test_single_voter_gets_everything():
    prof = Profile.from_ballots([{0, 1}], m=3)
    assert utility(prof, solve_nash(prof), 0) > 1 - 1e-9
    assert utility(prof, solve_fut(prof), 0) == 1
    assert utility(prof, solve_mp(prof), 0) == 1
    assert utility(prof, solve_egal(prof), 0) == 1


# --- dispatch and mix ------------------------------------------------------

def test_solve_dispatch_and_exact_flag(fig2):
    assert solve(parse_rule_spec("mp"), fig2).exact
    assert not solve(parse_rule_spec("nash"), fig2).exact
    with pytest.raises(ValueError):
        solve(parse_rule_spec("nash"), fig2, exact=True)
    egal_float = solve(parse_rule_spec("egal"), fig2, exact=False)
    assert not egal_float.exact
    assert max(abs(a - float(b)) for a, b in
               zip(egal_float.shares, solve_egal(fig2).shares)) < 1e-9


def test_mix_rule(fig2):
    full = solve_mix(fig2, 1, NASH)
    nash = solve_nash(fig2)
    assert max(abs(a - b) for a, b in zip(full.shares, nash.shares)) < 1e-12
    half = solve_mix(fig2, F(1, 2), NASH)
    assert abs(half.shares[0] - 0.5) < 1e-8  # 1/2 * 2/3 + 1/2 * 1/3
    quarter = solve_mix(fig2, F(1, 4), NASH)
    assert abs(quarter.shares[0] - (0.25 * 2 / 3 + 0.75 / 3)) < 1e-8
    with pytest.raises(ValueError):
        solve_mix(fig2, 0, NASH)


def test_scwm_symmetric_pair():
    prof = Profile.from_ballots([{0}, {1}], m=2)
    for alpha in (0.5, 0.999):
        dist = solve_scwm(prof, alpha)
        assert abs(dist.shares[0] - 0.5) < 1e-7


# --- proof-family closed forms ---------------------------------------------

def test_mp_theorem2_family():
    built = construct("mp-lb:2")
    p = solve_mp(built.profile)
    by_name = dict(zip(built.profile.names, p.shares))
    assert by_name == {"b": F(5, 8), "a": F(1, 8), "c": F(2, 8)}
    q = solve_mp(built.manipulated)
    by_name = dict(zip(built.profile.names, q.shares))
    assert by_name == {"a": F(5, 8), "c": F(3, 8), "b": F(0)}


def test_fut_theorem2_family():
    built = construct("fut-lb:6")
    assert solve_fut(built.profile).shares == (F(1, 19), F(6, 19), F(6, 19), F(6, 19))
    assert solve_fut(built.manipulated).shares == (F(7, 19), F(2, 19), F(0), F(10, 19))


def test_egal_theorem2_family():
    built = construct("egal-lb:3")
    q = solve_egal(built.manipulated)
    by_name = dict(zip(built.profile.names, q.shares))
    assert by_name["y1"] == F(2, 7) and by_name["y2"] == F(2, 7)
    assert by_name["y3"] == by_name["y4"] == by_name["y5"] == F(1, 7)
    p = solve_egal(built.profile)
    assert utility_vector(built.profile, p) == (F(1, 3),) * 9


# --- invariants ------------------------------------------------------------

def test_utility_vector_uniqueness_across_reruns():
    rng = np.random.default_rng(2)
    for _ in range(10):
        prof = random_profile(rng)
        u1 = utility_vector(prof, solve_egal(prof))
        u2 = utility_vector(prof, solve_egal(prof))
        assert u1 == u2
        n1 = np.array(utility_vector(prof, solve_nash(prof)))
        n2 = np.array(utility_vector(prof, solve_nash(prof)))
        assert np.abs(n1 - n2).max() <= 1e-9


def test_mp_floor_one_over_n():
    rng = np.random.default_rng(4)
    for _ in range(25):
        prof = random_profile(rng)
        dist = solve_mp(prof)
        for u in utility_vector(prof, dist):
            assert u >= F(1, prof.n)


def test_egal_floor_one_over_m():
    rng = np.random.default_rng(6)
    for _ in range(15):
        prof = random_profile(rng)
        dist = solve_egal(prof)
        for u in utility_vector(prof, dist):
            assert u >= F(1, prof.m)


def test_fut_budget_conservation():
    rng = np.random.default_rng(8)
    for _ in range(20):
        prof = random_profile(rng)
        dist = solve_fut(prof)
        assert sum(dist.shares, F(0)) == 1
        rounds = fut_rounds(prof)
        final = rounds[-1]
        assert final.active == frozenset()
        assert all(st.target == rounds[0].target for st in rounds)
        spent = sum(final.shares, F(0))
        assert spent == 1


def test_nash_kkt_certificate():
    rng = np.random.default_rng(10)
    for _ in range(15):
        prof = random_profile(rng)
        dist = solve_nash(prof)
        supported, onesided = stationarity_residual(
            np.array(prof.matrix), dist.as_floats(), 0.0)
        assert supported <= 1e-8
        assert onesided <= 1e-8


def test_egal_leximin_dominates_random_points():
    rng = np.random.default_rng(12)
    for _ in range(5):
        prof = random_profile(rng, n_max=6, m_max=4)
        egal_sorted = sorted(float(u) for u in utility_vector(prof, solve_egal(prof)))
        mat = np.array(prof.matrix)
        for q in rng.dirichlet(np.ones(prof.m), size=1000):
            other = np.sort(mat @ q)
            for a, b in zip(egal_sorted, other):
                if abs(a - b) > 1e-9:
                    assert a > b
                    break


def test_nash_afs_family_utility_bound():
    # the manipulating voter's truthful utility is capped by the AFS argument:
    # u <= 1 - (l-1)/l * k/(2k+l+1); for l=3, k=8 that is 11/15
    built = construct("afs-lb:3,8")
    dist = solve_nash(built.profile)
    u = float(utility(built.profile, dist, built.manipulator))
    assert u <= 11 / 15 + 1e-7


def test_fut_active_voters_share_current_weight():
    built = construct("fut-lb:6")
    rounds = fut_rounds(built.profile)
    # target is the max initial approval score and never changes
    assert rounds[0].target == 9
    for st in rounds:
        active_weights = {st.weights[v] for v in st.active}
        assert len(active_weights) <= 1
