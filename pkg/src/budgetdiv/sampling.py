"""Random approval-profile generators: impartial culture, Euclidean, Mallows.

Reproducibility: every sampler is a pure function of its config.  The RNG is
numpy's PCG64; voter i draws from the child stream
``SeedSequence(entropy=config.seed, spawn_key=(i + 1,))`` (the Euclidean
model uses spawn key (0,) for the candidate positions), so results are
independent of evaluation order.  Voters who draw an empty ballot are
resampled in place, which preserves each model's conditional law given
non-emptiness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Profile

MODELS = ("ic", "euclidean", "mallows")
MAX_RESAMPLES = 10 ** 6

# Ambient ball for the Euclidean model.  With the default approval radius 0.4
# this calibrates to roughly three to four approvals out of ten candidates;
# a radius-1 ball would give well under one approval per voter on average.
BALL_RADIUS = 0.5


class SamplerError(RuntimeError):
    pass


@dataclass(frozen=True)
class SamplerConfig:
    model: str
    n: int
    m: int
    p_approve: float = 0.3
    radius: float = 0.4
    dimension: int = 3
    phi: float = 0.75
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown sampling model {self.model!r}")
        if self.n < 1 or self.m < 1:
            raise ValueError("need n >= 1 and m >= 1")
        if not 0 < self.p_approve < 1:
            raise ValueError("p_approve must lie strictly inside (0, 1)")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if not 0 < self.phi <= 1:
            raise ValueError("phi must lie in (0, 1]")


def _child_rng(seed, key):
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(entropy=seed, spawn_key=(key,))))


def sample(config: SamplerConfig) -> Profile:
    """Draw a profile; deterministic in config, ballots never empty."""
    if config.model == "ic":
        ballots = _sample_ic(config)
    elif config.model == "euclidean":
        ballots = _sample_euclidean(config)
    else:
        ballots = _sample_mallows(config)
    return Profile.from_ballots(ballots, m=config.m)


def _sample_ic(config):
    ballots = []
    for i in range(config.n):
        rng = _child_rng(config.seed, i + 1)
        for attempt in range(MAX_RESAMPLES):
            approved = np.nonzero(rng.random(config.m) < config.p_approve)[0]
            if approved.size:
                break
        else:
            raise SamplerError("empty-ballot resampling exceeded the attempt cap")
        ballots.append(frozenset(int(x) for x in approved))
    return ballots


def _ball_point(rng, dim):
    """Uniform point in the ambient ball: gaussian direction, radius U^(1/dim)."""
    direction = rng.standard_normal(dim)
    norm = np.linalg.norm(direction)
    while norm == 0.0:
        direction = rng.standard_normal(dim)
        norm = np.linalg.norm(direction)
    return direction / norm * (BALL_RADIUS * rng.random() ** (1.0 / dim))


def _sample_euclidean(config):
    cand_rng = _child_rng(config.seed, 0)
    positions = np.stack([_ball_point(cand_rng, config.dimension) for _ in range(config.m)])
    ballots = []
    for i in range(config.n):
        rng = _child_rng(config.seed, i + 1)
        for attempt in range(MAX_RESAMPLES):
            voter = _ball_point(rng, config.dimension)
            dist = np.linalg.norm(positions - voter, axis=1)
            approved = np.nonzero(dist <= config.radius)[0]
            if approved.size:
                break
        else:
            raise SamplerError("empty-ballot resampling exceeded the attempt cap")
        ballots.append(frozenset(int(x) for x in approved))
    return ballots


def _mallows_ranking(rng, m, phi):
    """Repeated insertion: the item at reference rank r lands at position j
    (0 = top) with probability proportional to phi^(r - j)."""
    ranking = [0]
    for r in range(1, m):
        weights = phi ** np.arange(r, -1, -1, dtype=float)
        total = weights.sum()
        u = rng.random() * total
        acc = 0.0
        pos = r
        for j in range(r + 1):
            acc += weights[j]
            if u < acc:
                pos = j
                break
        ranking.insert(pos, r)
    return ranking


def _sample_mallows(config):
    ballots = []
    for i in range(config.n):
        rng = _child_rng(config.seed, i + 1)
        ranking = _mallows_ranking(rng, config.m, config.phi)
        if config.m == 1:
            t = 1
        else:
            t = int(rng.integers(1, config.m))  # uniform on {1, ..., m-1}
        ballots.append(frozenset(ranking[:t]))
    return ballots
