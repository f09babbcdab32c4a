"""Exhaustive deviation search: best responses and per-profile incentive ratios.

The manipulator's measured utility always uses her truthful ballot while the
rule is fed the deviation; mixing those up is the classic implementation bug.
Ratios follow the 0/0 = 1 and x/0 = +inf conventions.  Exact engines compare
exact rational utilities, float engines use a relative guard of 1e-6 to keep
solver noise from flagging phantom manipulations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .concave import SolverError
from .core import Profile, mask_utility
from .rules import (
    RuleSpec,
    _egal_shares_exact_masks,
    _fut_shares_masks,
    _mp_share_nums_masks,
    _welfare_shares_mat,
)

FLOAT_TOL = 1e-6
MAX_ENUM_CANDIDATES = 20


def engine_is_exact(rule: RuleSpec, exact=None) -> bool:
    """Whether the engine that will run is exact-rational.

    FUT and MP only have exact engines; EGAL drops to the float leximin when
    exact=False; NASH, SCWM, and MIX are always float.
    """
    if rule.kind in ("fut", "mp"):
        return True
    if rule.kind == "egal":
        return exact is not False
    return False


def manipulability_tol(rule: RuleSpec, exact=None) -> float:
    return 0.0 if engine_is_exact(rule, exact) else FLOAT_TOL


@dataclass(frozen=True)
class VoterResponse:
    voter: int
    ballot: frozenset
    truthful_utility: object
    best_utility: object
    ratio: object


@dataclass(frozen=True)
class ManipulationReport:
    rule: RuleSpec
    responses: tuple
    profile_ratio: object
    manipulable: bool
    tol: float

    @property
    def best_voter(self):
        """Voter achieving the profile ratio (first one in voter order)."""
        for r in self.responses:
            if r.ratio == self.profile_ratio:
                return r.voter
        return None


def deviation_masks(m: int, truthful_mask: int):
    """All non-empty ballot bitmasks except the truthful one, ascending."""
    if m > MAX_ENUM_CANDIDATES:
        raise ValueError(f"deviation enumeration capped at m <= {MAX_ENUM_CANDIDATES}, got {m}")
    for mask in range(1, 1 << m):
        if mask != truthful_mask:
            yield mask


def enumerate_deviations(m: int, truthful) -> list:
    """All 2^m - 1 non-empty ballots except the truthful one, as frozensets."""
    truthful_mask = 0
    for x in truthful:
        truthful_mask |= 1 << x
    out = []
    for mask in deviation_masks(m, truthful_mask):
        out.append(frozenset(x for x in range(m) if (mask >> x) & 1))
    return out


def _ratio(best, truthful):
    if truthful == 0:
        return 1 if best == 0 else math.inf
    if isinstance(best, Fraction) and isinstance(truthful, Fraction):
        return best / truthful
    return float(best) / float(truthful)


class _Evaluator:
    """Per-profile engine: swaps one voter's ballot and returns her true utility."""

    def __init__(self, rule, profile, exact=None):
        self.rule = rule
        self.profile = profile
        self.exact_engine = engine_is_exact(rule, exact)
        self.kind = rule.kind
        self.m = profile.m
        if self.kind in ("fut", "mp", "egal") and self.exact_engine:
            self.masks = list(profile.masks)
        else:
            self.mat = np.array(profile.matrix)
        if self.kind == "mix":
            self.base_eval = _Evaluator(rule.base, profile, exact=exact)

    def utility_with(self, voter, ballot_mask, true_mask):
        """True utility of `voter` when she reports `ballot_mask` instead."""
        if self.kind == "mix":
            lam = float(self.rule.lam)
            base_u = self.base_eval.utility_with(voter, ballot_mask, true_mask)
            size = bin(true_mask).count("1")
            return lam * float(base_u) + (1.0 - lam) * size / self.m
        if self.kind in ("fut", "mp") or (self.kind == "egal" and self.exact_engine):
            masks = self.masks
            saved = masks[voter]
            masks[voter] = ballot_mask
            try:
                if self.kind == "fut":
                    shares = _fut_shares_masks(masks, self.m)
                    return mask_utility(shares, true_mask)
                if self.kind == "mp":
                    nums, n = _mp_share_nums_masks(masks, self.m)
                    return Fraction(mask_utility(nums, true_mask), n)
                shares, _ = _egal_shares_exact_masks(masks, self.m)
                return mask_utility(shares, true_mask)
            finally:
                masks[voter] = saved
        mat = self.mat
        saved_row = mat[voter].copy()
        for x in range(self.m):
            mat[voter, x] = 1.0 if (ballot_mask >> x) & 1 else 0.0
        try:
            if self.kind == "egal":
                u, shares, status = kernels.leximin_f64(mat)
                if status != 0:
                    raise SolverError(f"float leximin failed with LP status {status}")
                shares = shares / shares.sum()
            elif self.kind == "nash":
                shares = _welfare_shares_mat(mat, 0.0)
            else:  # scwm
                shares = _welfare_shares_mat(mat, float(self.rule.alpha))
            total = 0.0
            for x in range(self.m):
                if (true_mask >> x) & 1:
                    total += shares[x]
            return total
        finally:
            mat[voter] = saved_row


def best_response(rule: RuleSpec, profile: Profile, voter: int, exact=None,
                  evaluator=None, truthful_utility=None) -> VoterResponse:
    """Search all deviations of one voter for her best true-utility outcome.

    Ties break toward the earliest deviation in enumeration order.  The
    reported ratio is best/truthful under the 0/0 = 1, x/0 = inf conventions.
    """
    if not 0 <= voter < profile.n:
        raise IndexError(f"voter index {voter} out of range")
    if evaluator is None:
        evaluator = _Evaluator(rule, profile, exact=exact)
    true_mask = profile.masks[voter]
    if truthful_utility is None:
        truthful_utility = evaluator.utility_with(voter, true_mask, true_mask)
    best_mask = None
    best_u = None
    for dev in deviation_masks(profile.m, true_mask):
        u = evaluator.utility_with(voter, dev, true_mask)
        if best_u is None or u > best_u:
            best_u = u
            best_mask = dev
    if best_mask is None:
        # no deviation exists (m = 1): only the truthful ballot is non-empty
        return VoterResponse(voter, profile.ballots[voter], truthful_utility,
                             truthful_utility, _ratio(truthful_utility, truthful_utility))
    ballot = frozenset(x for x in range(profile.m) if (best_mask >> x) & 1)
    return VoterResponse(
        voter=voter,
        ballot=ballot,
        truthful_utility=truthful_utility,
        best_utility=best_u,
        ratio=_ratio(best_u, truthful_utility),
    )


def profile_incentive_ratio(rule: RuleSpec, profile: Profile, exact=None) -> ManipulationReport:
    """Best response for every voter; IR(f, A) is the max ratio (at least 1).

    Voters with identical ballots share a best response (all rules here are
    anonymous), so each distinct ballot is searched once.
    """
    evaluator = _Evaluator(rule, profile, exact=exact)
    tol = manipulability_tol(rule, exact)
    truthful = {}
    for i in range(profile.n):
        mask = profile.masks[i]
        if mask not in truthful:
            truthful[mask] = evaluator.utility_with(i, mask, mask)
    by_mask = {}
    responses = []
    for i in range(profile.n):
        mask = profile.masks[i]
        if mask in by_mask:
            rep = by_mask[mask]
            responses.append(VoterResponse(i, rep.ballot, rep.truthful_utility,
                                           rep.best_utility, rep.ratio))
            continue
        resp = best_response(rule, profile, i, exact=exact, evaluator=evaluator,
                             truthful_utility=truthful[mask])
        by_mask[mask] = resp
        responses.append(resp)
    worst = max((r.ratio for r in responses), default=1)
    profile_ratio = worst if worst > 1 else (Fraction(1) if engine_is_exact(rule, exact) else 1.0)
    manipulable = profile_ratio > 1 + tol
    return ManipulationReport(rule, tuple(responses), profile_ratio, manipulable, tol)
