"""Decision procedures for fairness/efficiency axioms on (profile, distribution).

Float distributions are rationalized (continued fractions, denominator at
most 10^9) before the exact checks run, and verdicts fold the rationalization
distance into their margins; a slack of 1e-7 absorbs both it and iterative
solver noise.  Exact distributions are checked with zero slack.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .concave import SolverError
from .core import Distribution, Profile, utility, utility_vector
from .lp import OPTIMAL, simplex_exact
from .rules import solve_nash

PS_FLOAT_TOL = 1e-9
FLOAT_SLACK = 1e-7
GFS_MAX_CANDIDATES = 20
RATIONALIZE_DENOMINATOR = 10 ** 9

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class AxiomVerdict:
    satisfied: bool
    witness: object = None
    margin: object = None


def rationalize_distribution(dist: Distribution, max_denominator=RATIONALIZE_DENOMINATOR):
    """Exact distribution nearest the float shares, plus the distance moved."""
    if dist.exact:
        return dist, 0.0
    approx = [Fraction(float(s)).limit_denominator(max_denominator) for s in dist.shares]
    total = sum(approx, _ZERO)
    exact = tuple(s / total for s in approx)
    err = sum(abs(float(e) - float(s)) for e, s in zip(exact, dist.shares))
    return Distribution(exact, exact=True), err


def check_positive_share(profile: Profile, dist: Distribution) -> AxiomVerdict:
    """Every voter gets strictly positive utility (floats: above 1e-9)."""
    threshold = _ZERO if dist.exact else PS_FLOAT_TOL
    utils = utility_vector(profile, dist)
    for i, u in enumerate(utils):
        if u <= threshold:
            return AxiomVerdict(False, witness=i, margin=u - threshold)
    return AxiomVerdict(True, margin=min(utils) - threshold)


def check_gfs(profile: Profile, dist: Distribution, float_slack=FLOAT_SLACK) -> AxiomVerdict:
    """Group fair share via the candidate-set form: for every T, the share on
    T covers the fraction of voters whose whole ballot lies inside T."""
    m = profile.m
    if m > GFS_MAX_CANDIDATES:
        raise ValueError(f"GFS enumeration capped at m <= {GFS_MAX_CANDIDATES}, got {m}")
    exact, rat_err = rationalize_distribution(dist)
    tol = _ZERO if dist.exact else float_slack
    n = Fraction(profile.n)
    # Voters whose ballot is contained in T, via a subset-sum transform.
    counts = [0] * (1 << m)
    for mask in profile.masks:
        counts[mask] += 1
    for bit in range(m):
        step = 1 << bit
        for T in range(1 << m):
            if T & step:
                counts[T] += counts[T ^ step]
    share_sum = [_ZERO] * (1 << m)
    for T in range(1, 1 << m):
        low = T & -T
        share_sum[T] = share_sum[T ^ low] + exact.shares[low.bit_length() - 1]
    worst_T = 0
    worst = _ZERO  # largest deficit count/n - share(T)
    for T in range(1, 1 << m):
        if counts[T] == 0:
            continue
        deficit = Fraction(counts[T]) / n - share_sum[T]
        if deficit > worst:
            worst = deficit
            worst_T = T
    margin = (tol - worst) if dist.exact else (float(tol) - float(worst) - rat_err)
    if margin >= 0:
        return AxiomVerdict(True, margin=margin)
    group = frozenset(x for x in range(m) if (worst_T >> x) & 1)
    voters = tuple(i for i, mask in enumerate(profile.masks) if mask & ~worst_T == 0)
    return AxiomVerdict(False, witness=(group, voters), margin=margin)


def check_afs(profile: Profile, dist: Distribution, float_slack=FLOAT_SLACK) -> AxiomVerdict:
    """Average fair share.  For a group with a common candidate x, the worst
    group of size k is the k lowest-utility approvers of x, so only prefixes
    of each candidate's approver list need checking."""
    exact, rat_err = rationalize_distribution(dist)
    tol = _ZERO if dist.exact else float_slack
    utils = utility_vector(profile, exact)
    n = Fraction(profile.n)
    worst = _ZERO
    worst_witness = None
    for x in range(profile.m):
        approvers = sorted((i for i in range(profile.n) if x in profile.ballots[i]),
                           key=lambda i: utils[i])
        total = _ZERO
        for k, i in enumerate(approvers, start=1):
            total += utils[i]
            deficit = Fraction(k) / n - total / k  # k/n minus the prefix average
            if deficit > worst:
                worst = deficit
                worst_witness = (x, tuple(approvers[:k]))
    margin = (tol - worst) if dist.exact else (float(tol) - float(worst) - rat_err)
    if margin >= 0:
        return AxiomVerdict(True, margin=margin)
    return AxiomVerdict(False, witness=worst_witness, margin=margin)


def check_efficiency(profile: Profile, dist: Distribution, float_slack=FLOAT_SLACK) -> AxiomVerdict:
    """Pareto efficiency via the exact LP max sum(delta) subject to
    u_i(q) >= u_i(p) + delta_i, delta >= 0, q on the simplex."""
    exact, rat_err = rationalize_distribution(dist)
    utils = utility_vector(profile, exact)
    n, m = profile.n, profile.m
    nvar = m + n  # q shares then deltas
    rows = []
    rhs = []
    for i in range(n):
        row = [_ZERO] * nvar
        for x in profile.ballots[i]:
            row[x] = -_ONE
        row[m + i] = _ONE
        rows.append(tuple(row))
        rhs.append(-utils[i])
    eq = [_ONE] * m + [_ZERO] * n
    c = [_ZERO] * m + [_ONE] * n
    status, x, value = simplex_exact(c, rows, rhs, (tuple(eq),), (_ONE,))
    if status != OPTIMAL:
        raise SolverError(f"efficiency LP came back {status}")
    tol_total = _ZERO if dist.exact else Fraction(float_slack).limit_denominator(10 ** 9) * n
    margin = (tol_total - value) if dist.exact else (float(tol_total) - float(value) - rat_err)
    if value <= tol_total:
        return AxiomVerdict(True, margin=margin)
    witness = Distribution(tuple(x[:m]), exact=True)
    return AxiomVerdict(False, witness=witness, margin=margin)


def verify_nash_separation(profile: Profile, nash_dist: Distribution, q: Distribution) -> float:
    """sum_i (u_i(q) - u_i(p)) / u_i(p); nonpositive (up to solver noise) when
    p maximizes the Nash welfare."""
    up = utility_vector(profile, nash_dist)
    uq = utility_vector(profile, q)
    total = 0.0
    for a, b in zip(uq, up):
        if b <= 0:
            raise SolverError("nash distribution gives a voter zero utility")
        total += (float(a) - float(b)) / float(b)
    return total


def verify_nash_removal_bounds(profile: Profile, voter: int) -> float:
    """Ratio of the others' Nash welfare with and without voter i; must lie
    in [1/e, 1] up to solver tolerance."""
    if profile.n < 2:
        raise ValueError("removal bound needs at least two voters")
    full = solve_nash(profile)
    reduced_profile = profile.without_voter(voter)
    reduced = solve_nash(reduced_profile)
    num = 1.0
    den = 1.0
    u_full = utility_vector(profile, full)
    u_red = utility_vector(reduced_profile, reduced)
    j_red = 0
    for j in range(profile.n):
        if j == voter:
            continue
        num *= float(u_full[j])
        den *= float(u_red[j_red])
        j_red += 1
    if den == 0.0:
        raise SolverError("nash distribution gives a voter zero utility")
    return num / den
