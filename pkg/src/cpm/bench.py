"""Locality benchmark: local elimination versus the materialized joint."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .errors import TooLarge
from .fixtures import chain_sequence
from .sequence import GeneratingSequence, compose_sequence_right, eliminate_variable
from .tables import DEFAULT_MAX_ENTRIES, marginalize_out, max_abs_diff, oracle_joint, track_tables

__all__ = ["BenchReport", "run_locality_bench"]

ORACLE_MAX_ENTRIES = 2**14


@dataclass
class BenchReport:
    params: dict
    seconds: dict = field(default_factory=dict)
    peak_entries: dict = field(default_factory=dict)
    deltas: dict = field(default_factory=dict)
    refused: dict = field(default_factory=dict)
    sweep_seconds: float | None = None
    sweep_peak_entries: int | None = None

    def summary(self) -> dict:
        out = {f"{k}_{m}": v for k, d in
               (("seconds", self.seconds), ("peak_entries", self.peak_entries),
                ("delta", self.deltas), ("refused", self.refused)) for m, v in d.items()}
        out.update(self.params)
        if self.sweep_seconds is not None:
            out["sweep_seconds"] = self.sweep_seconds
            out["sweep_peak_entries"] = self.sweep_peak_entries
        return out


def _timed(fn, trials):
    best, value = float("inf"), None
    for _ in range(trials):
        t0 = time.perf_counter()
        value = fn()
        best = min(best, time.perf_counter() - t0)
    return best, value


def run_locality_bench(
    length: int = 26,
    var: str | None = None,
    trials: int = 5,
    seed: int = 0,
    max_entries: int = DEFAULT_MAX_ENTRIES,
    sweep: bool = True,
    seq: GeneratingSequence | None = None,
) -> BenchReport:
    """Time eliminating ``var`` from a binary chain of ``length`` variables.

    Two routes are compared: local elimination, and composing the full joint
    before summing ``var`` out.  The joint route is refused (recorded in
    ``refused``) when it would exceed ``max_entries``.  Deviations from the
    brute-force oracle are reported only for chains small enough to run it.
    With ``sweep``, every interior variable is also eliminated in turn, each
    from the original chain, and the total time recorded.
    """
    if seq is None:
        seq = chain_sequence(seed, length)
    names = seq.union_scope
    if var is None:
        var = names[len(names) // 2]
    report = BenchReport({"length": len(names), "factors": len(seq), "var": var,
                          "trials": trials, "max_entries": max_entries})

    t, res = _timed(lambda: eliminate_variable(seq, var), trials)
    report.seconds["eliminate"] = t
    report.peak_entries["eliminate"] = res.peak_entries

    joint_marginal = None
    try:
        def joint_route():
            with track_tables() as rec:
                m = marginalize_out(compose_sequence_right(seq, max_entries), var)
            return m, rec.peak_entries
        t, (joint_marginal, peak) = _timed(joint_route, trials)
        report.seconds["joint"] = t
        report.peak_entries["joint"] = peak
    except TooLarge as exc:
        report.refused["joint"] = str(exc)

    n_entries = 1
    for v in names:
        n_entries *= seq.registry.card(v)
    if n_entries <= ORACLE_MAX_ENTRIES:
        truth = marginalize_out(oracle_joint(seq), var)
        report.deltas["eliminate"] = max_abs_diff(compose_sequence_right(res.reduced), truth)
        if joint_marginal is not None:
            report.deltas["joint"] = max_abs_diff(joint_marginal, truth)

    if sweep:
        interior = [v for v in names if len(seq.positions_of(v)) >= 2]
        t0 = time.perf_counter()
        peak = 0
        for v in interior:
            peak = max(peak, eliminate_variable(seq, v).peak_entries)
        report.sweep_seconds = time.perf_counter() - t0
        report.sweep_peak_entries = peak
        report.params["sweep_runs"] = len(interior)
    return report
