"""Monte-Carlo manipulability experiments with a semicolon-CSV report.

For each voter count n, `trials` profiles are sampled and every rule's
per-profile incentive ratio IR(f, A) is computed by exhaustive deviation
search.  The CSV has one row per n and columns
``<rule>_avg, <rule>_max, <rule>_per90, <rule>_std, <rule>_freq`` (average,
maximum, 90th percentile, standard deviation of IR, and the fraction of
manipulable profiles), followed by diagnostic ``<rule>_inf_count`` columns.

Profile seeds derive from SeedSequence entropy [seed, n, trial], so output
is byte-identical for any --jobs value.  EGAL runs on its float engine here;
the exact leximin is far too slow for millions of deviation solves.
"""

from __future__ import annotations

import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .manipulation import profile_incentive_ratio
from .rules import RuleSpec, parse_rule_spec
from .sampling import SamplerConfig, sample

STAT_NAMES = ("avg", "max", "per90", "std", "freq")


@dataclass(frozen=True)
class ExperimentRow:
    """Per-n summary: rule name -> (avg, max, per90, std, freq) over trials."""

    n: int
    stats: dict
    inf_counts: dict

    def __post_init__(self):
        for rule, (avg, mx, per90, std, freq) in self.stats.items():
            if math.isfinite(avg):
                assert 1 <= avg <= mx, (rule, avg, mx)
                assert per90 <= mx, (rule, per90, mx)
            assert 0 <= freq <= 1, (rule, freq)

    def csv_cells(self, rules):
        cells = [str(self.n)]
        for rule in rules:
            cells.extend(_format_value(v) for v in self.stats[str(rule)])
        cells.extend(str(self.inf_counts[str(rule)]) for rule in rules)
        return cells


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    n_list: tuple
    m: int
    trials: int
    rules: tuple
    seed: int
    jobs: int = 1
    p_approve: float = 0.3
    radius: float = 0.4
    dimension: int = 3
    phi: float = 0.75

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if not self.n_list:
            raise ValueError("need at least one voter count")
        if not self.rules:
            raise ValueError("need at least one rule")
        rules = tuple(r if isinstance(r, RuleSpec) else parse_rule_spec(r) for r in self.rules)
        object.__setattr__(self, "rules", rules)
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))


def profile_seed(seed, n, trial):
    """64-bit sampler seed derived from SeedSequence entropy [seed, n, trial]."""
    state = np.random.SeedSequence(entropy=[seed, n, trial]).generate_state(2)
    return int(state[0]) | (int(state[1]) << 32)


def _task_ir(args):
    (model, n, m, p_approve, radius, dimension, phi, seed, trial, rules) = args
    cfg = SamplerConfig(model=model, n=n, m=m, p_approve=p_approve, radius=radius,
                        dimension=dimension, phi=phi,
                        seed=profile_seed(seed, n, trial))
    profile = sample(cfg)
    out = []
    for rule in rules:
        report = profile_incentive_ratio(rule, profile, exact=False)
        out.append((float(report.profile_ratio), bool(report.manipulable)))
    return out


def nearest_rank_percentile(values, q):
    """Value at 1-based rank ceil(q * len) of the ascending sorted list."""
    if not values:
        return math.nan
    ordered = sorted(values)
    rank = math.ceil(q * len(ordered))
    return ordered[max(rank, 1) - 1]


def summarize(irs, flags):
    """(avg, max, per90, std, freq); infinite ratios are excluded from the
    numeric statistics and counted separately."""
    finite = [v for v in irs if math.isfinite(v)]
    inf_count = len(irs) - len(finite)
    if finite:
        arr = np.asarray(finite)
        stats = (float(arr.mean()), float(arr.max()),
                 float(nearest_rank_percentile(finite, 0.9)), float(arr.std()))
    else:
        stats = (math.nan,) * 4
    freq = sum(1 for f in flags if f) / len(flags)
    return stats + (freq,), inf_count


def _format_value(v):
    # repr round-trips doubles exactly, so reference recomputations of the
    # statistics from the dump sidecar can match to full precision
    return repr(float(v))


def run_experiment(config: ExperimentConfig, out_path, dump_path=None):
    """Run the experiment, streaming one CSV row per n; returns the rows.

    An interrupted run leaves the rows finished so far plus a trailing
    comment marker in the output file.
    """
    rules = config.rules
    header = ["n"]
    for rule in rules:
        header.extend(f"{rule}_{stat}" for stat in STAT_NAMES)
    header.extend(f"{rule}_inf_count" for rule in rules)

    out = sys.stdout if out_path in (None, "-") else open(out_path, "w", encoding="utf-8", newline="\n")
    dump = open(dump_path, "w", encoding="utf-8", newline="\n") if dump_path else None
    rows = []
    try:
        print(";".join(header), file=out, flush=True)
        if dump:
            print("n;trial;rule;ir;manipulable", file=dump, flush=True)
        pool = ProcessPoolExecutor(max_workers=config.jobs) if config.jobs > 1 else None
        try:
            for n in config.n_list:
                tasks = [(config.model, n, config.m, config.p_approve, config.radius,
                          config.dimension, config.phi, config.seed, trial, rules)
                         for trial in range(config.trials)]
                if pool is None:
                    results = [_task_ir(t) for t in tasks]
                else:
                    results = list(pool.map(_task_ir, tasks))
                stats = {}
                inf_counts = {}
                for r, rule in enumerate(rules):
                    irs = [results[t][r][0] for t in range(config.trials)]
                    flags = [results[t][r][1] for t in range(config.trials)]
                    stats[str(rule)], inf_counts[str(rule)] = summarize(irs, flags)
                    if dump:
                        for t in range(config.trials):
                            print(f"{n};{t};{rule};{irs[t]!r};{int(flags[t])}",
                                  file=dump)
                row = ExperimentRow(n, stats, inf_counts)
                print(";".join(row.csv_cells(rules)), file=out, flush=True)
                if dump:
                    dump.flush()
                rows.append(row)
        except KeyboardInterrupt:
            print("# interrupted: partial results above", file=out, flush=True)
            raise
        finally:
            if pool is not None:
                pool.shutdown()
    finally:
        if out is not sys.stdout:
            out.close()
        if dump:
            dump.close()
    return rows
