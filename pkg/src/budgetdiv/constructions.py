"""Deterministic generators for the worst-case manipulation families.

Each family emits a truthful profile, the manipulated profile, the
manipulating voter, and the candidate order (which fixes lexicographic
tie-breaking: the mp-lb family orders candidates a, c, b so that ties favor
a over c over b).  Closed-form targets, where the family has them, are
exposed for tests: mp-lb(k) has manipulation ratio (k+1)/2, fut-lb(k) has
k+1, egal-lb(k) has k, and fig2 has 4/3 under EGAL.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import Profile

FAMILY_SYNTAX = "fig2 | mp-lb:k | fut-lb:k | egal-lb:k | afs-lb:l,k | scwm-lb:l | regular-lb:k"


@dataclass(frozen=True)
class FamilyId:
    family: str
    params: tuple = ()

    def __str__(self):
        if not self.params:
            return self.family
        return f"{self.family}:" + ",".join(str(p) for p in self.params)


@dataclass(frozen=True)
class Construction:
    family: FamilyId
    profile: Profile
    manipulated: Profile
    manipulator: int
    tie_break_order: tuple


def parse_family(text: str) -> FamilyId:
    head, sep, rest = text.strip().partition(":")
    params = ()
    if sep:
        try:
            params = tuple(int(tok) for tok in rest.split(","))
        except ValueError:
            raise ValueError(f"family parameters must be integers (got {text!r})")
    return FamilyId(head, params)


def construct(family) -> Construction:
    """Build the truthful/manipulated profile pair for a family id or string."""
    if isinstance(family, str):
        family = parse_family(family)
    builder = _BUILDERS.get(family.family)
    if builder is None:
        raise ValueError(f"unknown family {family.family!r}; expected {FAMILY_SYNTAX}")
    return builder(family)


def _one_param(fid, name, minimum):
    if len(fid.params) != 1:
        raise ValueError(f"{name} takes one parameter, e.g. {name}:{minimum}")
    k = fid.params[0]
    if k < minimum:
        raise ValueError(f"{name} requires parameter >= {minimum}, got {k}")
    return k


def _build_fig2(fid):
    if fid.params:
        raise ValueError("fig2 takes no parameters")
    names = ("a", "b", "c")
    a, b, c = 0, 1, 2
    ballots = [{a}] * 2 + [{a, b}] * 3 + [{b, c}] + [{c}]
    profile = Profile.from_ballots(ballots, names=names)
    manipulated = profile.replace_ballot(5, {b})
    return Construction(fid, profile, manipulated, 5, names)


def _build_mp_lb(fid):
    k = _one_param(fid, "mp-lb", 2)
    # Candidate order a, c, b: the MP tie between a and b in the manipulated
    # profile must resolve to a.
    names = ("a", "c", "b")
    a, c, b = 0, 1, 2
    ballots = [{b, c}] * k + [{a, b}] * 3 + [{a}] * (k - 1) + [{c}] * 2
    profile = Profile.from_ballots(ballots, names=names)
    manipulator = 2 * k + 3  # the last {c} voter
    manipulated = profile.replace_ballot(manipulator, {a, c})
    return Construction(fid, profile, manipulated, manipulator, names)


def _build_fut_lb(fid):
    k = _one_param(fid, "fut-lb", 6)
    names = ("a", "b", "c", "d")
    a, b, c, d = 0, 1, 2, 3
    ballots = ([{a}] + [{a, b}] * (k - 2) + [{b}] * 2 + [{b, d}] * 2
               + [{a, c}] * 3 + [{c, d}] * k + [{d}])
    profile = Profile.from_ballots(ballots, names=names)
    manipulated = profile.replace_ballot(0, {a, d})
    return Construction(fid, profile, manipulated, 0, names)


def _build_egal_lb(fid):
    k = _one_param(fid, "egal-lb", 3)
    names = tuple(f"x{i}" for i in range(1, k + 1)) + tuple(f"y{j}" for j in range(1, k + 3))

    def x(i):
        return i - 1

    def y(j):
        return k + j - 1

    ballots = []
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            if (i, j) == (1, 1):
                ballots.append({x(1)} | {y(jj) for jj in range(1, k + 3)})
            elif j <= k - 1:
                ballots.append({x(i), y(j)})
            elif i <= k - 2:
                ballots.append({x(i), y(k), y(k + 1)})
            elif i == k - 1:
                ballots.append({x(k - 1), y(k + 1), y(k + 2)})
            else:
                ballots.append({x(k), y(k), y(k + 2)})
    profile = Profile.from_ballots(ballots, names=names)
    manipulated = profile.replace_ballot(0, {y(1)})
    return Construction(fid, profile, manipulated, 0, names)


def _build_afs_lb(fid):
    if len(fid.params) != 2:
        raise ValueError("afs-lb takes two parameters, e.g. afs-lb:3,8")
    l, k = fid.params
    if l < 2 or k < l:
        raise ValueError(f"afs-lb requires k >= l >= 2, got l={l}, k={k}")
    names = ("x",) + tuple(f"y{i}" for i in range(1, l + 1))
    xc = 0
    ys = list(range(1, l + 1))
    ballots = [{xc, y} for y in ys] + [{xc}] * (k + 1) + [set(ys)] * k
    profile = Profile.from_ballots(ballots, names=names)
    manipulated = profile.replace_ballot(0, {ys[0]})
    return Construction(fid, profile, manipulated, 0, names)


def _build_scwm_lb(fid):
    l = _one_param(fid, "scwm-lb", 2)
    names = ("x1", "x2") + tuple(f"y{i}" for i in range(1, l + 1))
    x1, x2 = 0, 1
    ys = list(range(2, l + 2))
    ballots = []
    for i in range(l):
        ballots.append({x1} | {y for j, y in enumerate(ys) if j != i})
    ballots.append({x2} | set(ys))  # voter i*
    ballots.extend([{x2}] * (l - 1))
    profile = Profile.from_ballots(ballots, names=names)
    manipulated = profile.replace_ballot(l, set(ys))
    return Construction(fid, profile, manipulated, l, names)


def _build_regular_lb(fid):
    k = _one_param(fid, "regular-lb", 3)
    names = (tuple(f"x{i}" for i in range(1, k + 2))
             + tuple(f"y_{i}_{j}" for i in range(1, k + 1) for j in range(1, k + 1))
             + ("z",))

    def x(i):
        return i - 1

    def y(i, j):
        return (k + 1) + (i - 1) * k + (j - 1)

    z = (k + 1) + k * k
    xs = {x(i) for i in range(1, k + 2)}
    all_y = {y(i, j) for i in range(1, k + 1) for j in range(1, k + 1)}

    ballots = []
    for i in range(1, k + 2):
        for j in range(1, k + 2):
            if i <= k and j <= k:
                ballots.append({x(i), y(i, j)})
            elif i == k + 1 and j == 1:
                ballots.append({x(k + 1), z})
            elif i == k + 1 and 2 <= j <= k:
                ballots.append({x(k + 1)})
            elif j == k + 1 and (i == 1 or i == k + 1):
                ballots.append(set(xs))
            else:
                # voter (i, k+1) for 1 < i <= k: z plus Y minus column i
                col = {y(r, i) for r in range(1, k + 1)}
                ballots.append({z} | (all_y - col))
    profile = Profile.from_ballots(ballots, names=names)
    manipulator = k * (k + 1)  # voter (k+1, 1) in row-major order
    col1 = {y(r, 1) for r in range(1, k + 1)}
    manipulated = profile.replace_ballot(manipulator, {z} | (all_y - col1))
    return Construction(fid, profile, manipulated, manipulator, names)


_BUILDERS = {
    "fig2": _build_fig2,
    "mp-lb": _build_mp_lb,
    "fut-lb": _build_fut_lb,
    "egal-lb": _build_egal_lb,
    "afs-lb": _build_afs_lb,
    "scwm-lb": _build_scwm_lb,
    "regular-lb": _build_regular_lb,
}

FAMILIES = tuple(_BUILDERS)


def family_ratio(fid) -> Fraction:
    """Closed-form manipulation ratio where the proof pins one exactly."""
    if isinstance(fid, str):
        fid = parse_family(fid)
    if fid.family == "mp-lb":
        return Fraction(fid.params[0] + 1, 2)
    if fid.family == "fut-lb":
        return Fraction(fid.params[0] + 1)
    if fid.family == "egal-lb":
        return Fraction(fid.params[0])
    if fid.family == "fig2":
        return Fraction(4, 3)
    raise ValueError(f"family {fid.family} has no closed-form ratio")
