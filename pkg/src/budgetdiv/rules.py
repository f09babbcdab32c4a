"""Distribution rules: NASH, EGAL, FUT, MP, SCWM(alpha), and the uniform mix.

EGAL, FUT, and MP produce exact rational distributions; NASH, SCWM, and MIX
are float-valued (their solvers are iterative) with certified stationarity
residuals.  EGAL additionally has a fast float engine used by the experiment
runner, selected with exact=False.

The mask-level helpers (`*_masks`, `*_mat`) operate on integer-bitmask
ballots or 0/1 matrices so that exhaustive manipulation search can swap a
single voter's ballot without rebuilding profiles.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .concave import (
    DEFAULT_EPS,
    DEFAULT_MAX_ITER,
    SUPPORT_THRESHOLD,
    ConcaveProgram,
    ConcaveSolution,
    SolverError,
    maximize_concave,
)
from .core import Distribution, Profile

RULE_KINDS = ("nash", "egal", "fut", "mp", "scwm", "mix")
EXACT_KINDS = frozenset(("egal", "fut", "mp"))

_ZERO = Fraction(0)


@dataclass(frozen=True)
class RuleSpec:
    """Identifier plus parameters selecting one distribution rule."""

    kind: str
    alpha: float = None
    lam: Fraction = None
    base: "RuleSpec" = None

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if self.kind == "scwm":
            if self.alpha is None or not 0 < self.alpha < 1:
                raise ValueError("scwm requires alpha in (0, 1)")
        elif self.alpha is not None:
            raise ValueError(f"{self.kind} takes no alpha parameter")
        if self.kind == "mix":
            if self.lam is None or not 0 < self.lam <= 1:
                raise ValueError("mix requires lambda in (0, 1]")
            if self.base is None:
                raise ValueError("mix requires a base rule")
            if self.base.kind == "mix":
                raise ValueError("mix base must not itself be mix")
        else:
            if self.lam is not None or self.base is not None:
                raise ValueError(f"{self.kind} takes no mix parameters")

    @property
    def exact(self):
        """Whether the rule's native output is exact-rational."""
        return self.kind in EXACT_KINDS

    def __str__(self):
        if self.kind == "scwm":
            return f"scwm:{self.alpha}"
        if self.kind == "mix":
            return f"mix:{self.lam}:{self.base}"
        return self.kind


NASH = RuleSpec("nash")
EGAL = RuleSpec("egal")
FUT = RuleSpec("fut")
MP = RuleSpec("mp")


def parse_rule_spec(text: str) -> RuleSpec:
    """Parse CLI syntax: nash | egal | fut | mp | scwm:0.5 | mix:0.25:nash."""
    parts = text.strip().split(":")
    kind = parts[0]
    if kind == "scwm":
        if len(parts) != 2:
            raise ValueError(f"scwm needs one parameter, e.g. scwm:0.5 (got {text!r})")
        return RuleSpec("scwm", alpha=float(parts[1]))
    if kind == "mix":
        if len(parts) < 3:
            raise ValueError(f"mix needs lambda and a base rule, e.g. mix:0.25:nash (got {text!r})")
        lam = Fraction(parts[1])
        base = parse_rule_spec(":".join(parts[2:]))
        return RuleSpec("mix", lam=lam, base=base)
    if len(parts) != 1:
        raise ValueError(f"{kind} takes no parameters (got {text!r})")
    return RuleSpec(kind)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def solve(rule: RuleSpec, profile: Profile, exact=None) -> Distribution:
    """Run a rule on a profile.

    exact=True demands the exact-rational engine (an error for the float
    rules); exact=False allows the fast float engine where one exists (EGAL).
    None keeps each rule's native mode.
    """
    if exact and not rule.exact:
        raise ValueError(f"rule {rule} has no exact solver")
    if rule.kind == "nash":
        return solve_nash(profile)
    if rule.kind == "egal":
        return solve_egal(profile, exact=exact is not False)
    if rule.kind == "fut":
        return solve_fut(profile)
    if rule.kind == "mp":
        return solve_mp(profile)
    if rule.kind == "scwm":
        return solve_scwm(profile, rule.alpha)
    return solve_mix(profile, rule.lam, rule.base, exact=exact)


# ---------------------------------------------------------------------------
# NASH and SCWM
# ---------------------------------------------------------------------------

def solve_nash(profile: Profile, eps=DEFAULT_EPS, max_iter=DEFAULT_MAX_ITER) -> Distribution:
    """Maximize the Nash welfare (product of utilities); float output."""
    sol = nash_solution(profile, eps=eps, max_iter=max_iter)
    return sol.dist


def nash_solution(profile: Profile, eps=DEFAULT_EPS, max_iter=DEFAULT_MAX_ITER) -> ConcaveSolution:
    sol = maximize_concave(ConcaveProgram(profile, alpha=None, eps=eps, max_iter=max_iter))
    if not sol.converged:
        raise SolverError(
            f"nash welfare ascent did not converge in {max_iter} iterations",
            residual=sol.kkt_residual,
        )
    return sol


def solve_scwm(profile: Profile, alpha, eps=DEFAULT_EPS, max_iter=DEFAULT_MAX_ITER) -> Distribution:
    """Maximize the power welfare sum u_i^alpha, 0 < alpha < 1; float output."""
    sol = maximize_concave(ConcaveProgram(profile, alpha=float(alpha), eps=eps, max_iter=max_iter))
    if not sol.converged:
        raise SolverError(
            f"scwm({alpha}) welfare ascent did not converge in {max_iter} iterations",
            residual=sol.kkt_residual,
        )
    return sol.dist


def _welfare_shares_mat(mat, alpha, eps=DEFAULT_EPS, max_iter=DEFAULT_MAX_ITER):
    """Mask-level welfare maximizer: cleaned float shares for a 0/1 matrix."""
    shares, resid, _ = kernels.welfare_ascent(mat, alpha, eps, max_iter)
    if resid > max(eps, 1e-9):
        raise SolverError("welfare ascent did not converge", residual=resid)
    cleaned = np.where(shares > SUPPORT_THRESHOLD, shares, 0.0)
    cleaned /= cleaned.sum()
    return cleaned


# ---------------------------------------------------------------------------
# EGAL: leximin via iterated exact LPs (or the float kernel)
# ---------------------------------------------------------------------------

def solve_egal(profile: Profile, exact=True) -> Distribution:
    """Lexicographically maximize the sorted utility vector.

    Maximize the minimum utility, permanently fix exactly those voters whose
    utility cannot exceed the floor at any optimum (one exact test LP per
    tight voter), and recurse on the rest.
    """
    if exact:
        shares, _ = _egal_shares_exact_masks(profile.masks, profile.m)
        return Distribution(shares, exact=True)
    shares, _ = _egal_shares_float_mat(np.array(profile.matrix))
    return Distribution.from_floats(shares)


def _egal_shares_float_mat(mat):
    u, shares, status = kernels.leximin_f64(mat)
    if status != 0:
        raise SolverError(f"float leximin failed with LP status {status}")
    total = shares.sum()
    return shares / total, u / total


def _egal_shares_exact_masks(masks, m):
    """Exact leximin; returns (shares, utilities) as Fraction tuples."""
    from .lp import OPTIMAL, simplex_exact

    n = len(masks)
    nvar = m + 1  # shares plus the floor variable
    one = Fraction(1)
    eq_rows = (tuple([one] * m + [_ZERO]),)
    eq_rhs = (one,)
    fixed = [None] * n
    shares = None

    def voter_row(mask, tcoef):
        row = [_ZERO] * nvar
        b = mask
        while b:
            low = b & -b
            row[low.bit_length() - 1] = -one
            b ^= low
        row[m] = tcoef
        return tuple(row)

    while any(level is None for level in fixed):
        rows, rhs = [], []
        for i in range(n):
            if fixed[i] is None:
                rows.append(voter_row(masks[i], one))
                rhs.append(_ZERO)
            else:
                rows.append(voter_row(masks[i], _ZERO))
                rhs.append(-fixed[i])
        c = [_ZERO] * m + [one]
        status, x, tstar = simplex_exact(c, rows, rhs, eq_rows, eq_rhs)
        if status != OPTIMAL:
            raise SolverError(f"leximin floor LP came back {status}")
        shares = x[:m]
        utils = [_mask_sum(shares, mask) for mask in masks]
        # Test every unfixed voter sitting at the floor.
        test_rows, test_rhs = [], []
        for i in range(n):
            test_rows.append(voter_row(masks[i], _ZERO))
            test_rhs.append(-(fixed[i] if fixed[i] is not None else tstar))
        newly = 0
        for i in range(n):
            if fixed[i] is not None or utils[i] != tstar:
                continue
            c2 = [_ZERO] * nvar
            b = masks[i]
            while b:
                low = b & -b
                c2[low.bit_length() - 1] = one
                b ^= low
            status2, _, best = simplex_exact(c2, test_rows, test_rhs, eq_rows, eq_rhs)
            if status2 != OPTIMAL:
                raise SolverError(f"leximin test LP came back {status2}")
            if best == tstar:
                fixed[i] = tstar
                newly += 1
        if newly == 0:
            raise AssertionError("leximin made no progress; floor LP inconsistent")
    utils = tuple(_mask_sum(shares, mask) for mask in masks)
    return tuple(shares), utils


def _mask_sum(shares, mask):
    total = _ZERO
    b = mask
    while b:
        low = b & -b
        total += shares[low.bit_length() - 1]
        b ^= low
    return total


# ---------------------------------------------------------------------------
# MP: greedy maximum-payment rule (exact by construction)
# ---------------------------------------------------------------------------

def solve_mp(profile: Profile) -> Distribution:
    """Repeatedly fund the most approved candidate (ties to the lowest index);
    funding voters drop out and each contributes 1/n."""
    nums, n = _mp_share_nums_masks(profile.masks, profile.m)
    return Distribution(tuple(Fraction(v, n) for v in nums), exact=True)


def _mp_share_nums_masks(masks, m):
    """Share numerators over n for the greedy max-approval rule."""
    n = len(masks)
    remaining = list(masks)
    alive = (1 << m) - 1
    nums = [0] * m
    while remaining:
        best_x, best_c = -1, 0
        for x in range(m):
            if not (alive >> x) & 1:
                continue
            bit = 1 << x
            c = 0
            for b in remaining:
                if b & bit:
                    c += 1
            if c > best_c:
                best_c, best_x = c, x
        bit = 1 << best_x
        nums[best_x] = best_c
        remaining = [b for b in remaining if not (b & bit)]
        alive &= ~bit
    return nums, n


# ---------------------------------------------------------------------------
# FUT: fair utilitarian rule with frozen weights (exact scaled integers)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FutState:
    """Snapshot after one FUT round.

    Spent voters keep the weight they had when they spent; the target score
    never changes from the maximum initial approval score.
    """

    target: int
    weights: tuple
    active: frozenset
    remaining: frozenset
    shares: tuple


def solve_fut(profile: Profile) -> Distribution:
    shares = _fut_shares_masks(profile.masks, profile.m)
    return Distribution(tuple(shares), exact=True)


def fut_rounds(profile: Profile):
    """Run FUT and return the list of per-round FutState snapshots."""
    trace = []
    _fut_shares_masks(profile.masks, profile.m, trace=trace)
    return trace


def _fut_shares_masks(masks, m, trace=None):
    """Exact FUT.  All voter weights are integers over one running
    denominator D; every round solves the next weight crossing in integers."""
    n = len(masks)
    score0 = [0] * m
    for b in masks:
        x = b
        while x:
            low = x & -x
            score0[low.bit_length() - 1] += 1
            x ^= low
    t = max(score0)
    D = 1
    weight_num = [1] * n          # per-voter weight numerator over D
    frozen_score = [0] * m        # spent-voter score numerator per candidate over D
    active = list(range(n))
    alive = (1 << m) - 1
    shares = [_ZERO] * m
    acount = score0[:]
    while active:
        best_x = -1
        bn = bd = 0
        for x in range(m):
            if (alive >> x) & 1 and acount[x] > 0:
                num = t * D - frozen_score[x]
                den = acount[x]
                if best_x < 0 or num * bd < bn * den:
                    best_x, bn, bd = x, num, den
        if best_x < 0:
            # Cannot happen: every active voter approves a remaining candidate.
            raise AssertionError("FUT weight equation has no finite solution")
        if bd != 1:
            for v in range(n):
                weight_num[v] *= bd
            for x in range(m):
                frozen_score[x] *= bd
            D *= bd
        W = bn  # event weight numerator: lambda* = W / D
        for v in active:
            weight_num[v] = W
        X = 0
        for x in range(m):
            if (alive >> x) & 1 and acount[x] * W + frozen_score[x] == t * D:
                X |= 1 << x
        still_active = []
        for v in active:
            hit = masks[v] & X
            if hit:
                k = hit.bit_count()
                unit = Fraction(1, n * k)
                h = hit
                while h:
                    low = h & -h
                    shares[low.bit_length() - 1] += unit
                    h ^= low
                rest = masks[v] & alive & ~X
                while rest:
                    low = rest & -rest
                    frozen_score[low.bit_length() - 1] += W
                    rest ^= low
                covered = masks[v] & alive
                while covered:
                    low = covered & -covered
                    acount[low.bit_length() - 1] -= 1
                    covered ^= low
            else:
                still_active.append(v)
        active = still_active
        alive &= ~X
        if trace is not None:
            trace.append(FutState(
                target=t,
                weights=tuple(Fraction(w, D) for w in weight_num),
                active=frozenset(still_active),
                remaining=frozenset(x for x in range(m) if (alive >> x) & 1),
                shares=tuple(shares),
            ))
    return shares


# ---------------------------------------------------------------------------
# MIX: convex combination with the uniform distribution
# ---------------------------------------------------------------------------

def solve_mix(profile: Profile, lam, base: RuleSpec, exact=None) -> Distribution:
    """lam * base(profile) + (1 - lam) * uniform; float output."""
    lam = Fraction(lam) if not isinstance(lam, float) else lam
    if not 0 < lam <= 1:
        raise ValueError(f"mix lambda must lie in (0, 1], got {lam}")
    base_dist = solve(base, profile, exact=exact)
    return base_dist.mix_with_uniform(float(lam))
