"""Core domain types for approval-based budget division.

A profile is a list of candidates plus one non-empty approval ballot per
voter.  Distributions assign each candidate a share of a unit budget; a
voter's utility is the total share on her approved candidates.  Exact
shares are `fractions.Fraction`, float shares are binary doubles, and every
distribution is tagged with which mode it is in.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple, Sequence, Union

import numpy as np

# Exact rational scalar used by the LP-based rules and all exact checks.
Rat = Fraction

Scalar = Union[Fraction, float]

FLOAT_SUM_TOL = 1e-12

_NAME_RE = re.compile(r"^[A-Za-z0-9_]+$")


class ProfileFormatError(ValueError):
    """Raised for malformed profile text; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Candidate(NamedTuple):
    index: int
    name: str


def default_names(m):
    return tuple(f"x{i}" for i in range(m))


@dataclass(frozen=True)
class Profile:
    """Immutable approval profile: candidate names plus one ballot per voter.

    Ballots are stored as frozensets of 0-based candidate indices; the
    candidate order fixes lexicographic tie-breaking (lowest index first).
    """

    names: tuple
    ballots: tuple

    def __post_init__(self):
        names = tuple(self.names)
        ballots = tuple(frozenset(b) for b in self.ballots)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "ballots", ballots)
        if len(names) < 1:
            raise ValueError("profile needs at least one candidate")
        if len(ballots) < 1:
            raise ValueError("profile needs at least one voter")
        if len(set(names)) != len(names):
            raise ValueError("duplicate candidate name")
        for name in names:
            if not _NAME_RE.match(name):
                raise ValueError(f"invalid candidate name {name!r}")
        m = len(names)
        for i, ballot in enumerate(ballots):
            if not ballot:
                raise ValueError(f"empty ballot for voter {i}")
            for x in ballot:
                if not isinstance(x, int) or not 0 <= x < m:
                    raise ValueError(f"ballot of voter {i} references unknown candidate {x!r}")

    @classmethod
    def from_ballots(cls, ballots, m=None, names=None):
        """Build a profile from index ballots, defaulting names to x0, x1, ..."""
        ballots = [frozenset(b) for b in ballots]
        if names is None:
            if m is None:
                m = max((max(b) for b in ballots if b), default=-1) + 1
            names = default_names(m)
        return cls(tuple(names), tuple(ballots))

    @classmethod
    def from_named_ballots(cls, names, named_ballots):
        idx = {name: i for i, name in enumerate(names)}
        ballots = [frozenset(idx[nm] for nm in b) for b in named_ballots]
        return cls(tuple(names), tuple(ballots))

    @property
    def n(self):
        return len(self.ballots)

    @property
    def m(self):
        return len(self.names)

    @property
    def candidates(self):
        return tuple(Candidate(i, nm) for i, nm in enumerate(self.names))

    @cached_property
    def masks(self):
        """Ballots as integer bitmasks (bit x set iff candidate x approved)."""
        out = []
        for ballot in self.ballots:
            b = 0
            for x in ballot:
                b |= 1 << x
            out.append(b)
        return tuple(out)

    @cached_property
    def matrix(self):
        """Approval matrix as an (n, m) float64 array of 0/1 entries."""
        mat = np.zeros((self.n, self.m))
        for i, ballot in enumerate(self.ballots):
            for x in ballot:
                mat[i, x] = 1.0
        mat.setflags(write=False)
        return mat

    def replace_ballot(self, voter, ballot):
        if not 0 <= voter < self.n:
            raise IndexError(f"voter index {voter} out of range")
        ballots = list(self.ballots)
        ballots[voter] = frozenset(ballot)
        return Profile(self.names, tuple(ballots))

    def without_voter(self, voter):
        if not 0 <= voter < self.n:
            raise IndexError(f"voter index {voter} out of range")
        if self.n == 1:
            raise ValueError("cannot remove the only voter")
        ballots = self.ballots[:voter] + self.ballots[voter + 1:]
        return Profile(self.names, ballots)

    def ballot_names(self, voter):
        return frozenset(self.names[x] for x in self.ballots[voter])


@dataclass(frozen=True)
class Distribution:
    """Shares per candidate, summing to one; tagged exact (Fraction) or float."""

    shares: tuple
    exact: bool

    def __post_init__(self):
        shares = tuple(self.shares)
        object.__setattr__(self, "shares", shares)
        if not shares:
            raise ValueError("empty distribution")
        if self.exact:
            total = Fraction(0)
            for s in shares:
                if not isinstance(s, Fraction):
                    raise ValueError("exact distribution requires Fraction shares")
                if s < 0:
                    raise ValueError(f"negative share {s}")
                total += s
            if total != 1:
                raise ValueError(f"shares sum to {total}, not 1")
        else:
            total = 0.0
            for s in shares:
                s = float(s)
                if s < 0:
                    raise ValueError(f"negative share {s}")
                total += s
            if abs(total - 1.0) > FLOAT_SUM_TOL:
                raise ValueError(f"shares sum to {total!r}, not 1 within {FLOAT_SUM_TOL}")

    @classmethod
    def from_exact(cls, shares):
        return cls(tuple(Fraction(s) for s in shares), exact=True)

    @classmethod
    def from_floats(cls, shares):
        return cls(tuple(float(s) for s in shares), exact=False)

    @classmethod
    def point(cls, m, x):
        shares = [Fraction(0)] * m
        shares[x] = Fraction(1)
        return cls(tuple(shares), exact=True)

    @classmethod
    def uniform(cls, m):
        return cls(tuple(Fraction(1, m) for _ in range(m)), exact=True)

    @property
    def m(self):
        return len(self.shares)

    def as_floats(self):
        return np.array([float(s) for s in self.shares])

    def support(self, threshold=0):
        return frozenset(x for x, s in enumerate(self.shares) if s > threshold)

    def mix_with_uniform(self, lam):
        """Return lam * self + (1 - lam) * uniform, as a float distribution."""
        m = self.m
        lam = float(lam)
        return Distribution.from_floats(
            [lam * float(s) + (1.0 - lam) / m for s in self.shares]
        )


def utility(profile: Profile, dist: Distribution, voter: int) -> Scalar:
    """Total share the distribution assigns to the voter's approved candidates."""
    if not 0 <= voter < profile.n:
        raise IndexError(f"voter index {voter} out of range (n={profile.n})")
    if dist.m != profile.m:
        raise ValueError(f"distribution over {dist.m} candidates, profile has {profile.m}")
    if dist.exact:
        return sum((dist.shares[x] for x in profile.ballots[voter]), Fraction(0))
    return float(sum(dist.shares[x] for x in profile.ballots[voter]))


def utility_vector(profile: Profile, dist: Distribution) -> tuple:
    if dist.m != profile.m:
        raise ValueError(f"distribution over {dist.m} candidates, profile has {profile.m}")
    return tuple(utility(profile, dist, i) for i in range(profile.n))


def mask_utility(shares: Sequence[Scalar], mask: int) -> Scalar:
    """Utility of an integer-bitmask ballot against a raw share sequence."""
    total = None
    b = mask
    while b:
        low = b & -b
        s = shares[low.bit_length() - 1]
        total = s if total is None else total + s
        b ^= low
    return total if total is not None else 0


# ---------------------------------------------------------------------------
# profile file format v1
#
#   # comment
#   candidates: a b c
#   voter: a b
#   3: a c          <- three identical voters
# ---------------------------------------------------------------------------

def parse_profile(text: str) -> Profile:
    names = None
    index = {}
    ballots = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, sep, rest = line.partition(":")
        if not sep:
            raise ProfileFormatError(f"expected '<key>: ...', got {raw!r}", lineno)
        head = head.strip()
        tokens = rest.split()
        if names is None:
            if head != "candidates":
                raise ProfileFormatError("missing 'candidates:' header", lineno)
            if not tokens:
                raise ProfileFormatError("empty candidate list", lineno)
            for tok in tokens:
                if not _NAME_RE.match(tok):
                    raise ProfileFormatError(f"invalid candidate name {tok!r}", lineno)
                if tok in index:
                    raise ProfileFormatError(f"duplicate candidate name {tok!r}", lineno)
                index[tok] = len(index)
            names = tuple(tokens)
            continue
        if head == "voter":
            count = 1
        else:
            try:
                count = int(head)
            except ValueError:
                raise ProfileFormatError(f"expected 'voter' or a multiplicity, got {head!r}", lineno)
            if count < 1:
                raise ProfileFormatError(f"multiplicity must be positive, got {count}", lineno)
        if not tokens:
            raise ProfileFormatError("empty ballot", lineno)
        ballot = set()
        for tok in tokens:
            if tok not in index:
                raise ProfileFormatError(f"unknown candidate name {tok!r}", lineno)
            ballot.add(index[tok])
        ballots.extend([frozenset(ballot)] * count)
    if names is None:
        raise ProfileFormatError("missing 'candidates:' header")
    if not ballots:
        raise ProfileFormatError("profile has no voters")
    return Profile(names, tuple(ballots))


def write_profile(profile: Profile) -> str:
    lines = ["candidates: " + " ".join(profile.names)]
    for ballot in profile.ballots:
        names = [profile.names[x] for x in sorted(ballot)]
        lines.append("voter: " + " ".join(names))
    return "\n".join(lines) + "\n"


def read_profile_file(path) -> Profile:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_profile(fh.read())


def write_profile_file(profile: Profile, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_profile(profile))
