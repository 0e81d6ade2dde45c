"""Iterative proportional fitting on the union scope of a sequence.

Each fitting step is a left composition ``estimate ◁ target``: the estimate
keeps its conditional given the target's variables and takes the target as
its marginal there.  Started from the uniform distribution, the first cycle
therefore yields ``P1 ◁ P2 ◁ ... ◁ Pn``, and for perfect sequences the
second cycle changes nothing.
"""

from __future__ import annotations

from dataclasses import dataclass

from .compose import compose_left
from .errors import DominanceViolation, ScopeMismatch
from .sequence import GeneratingSequence
from .tables import (
    DEFAULT_MAX_ENTRIES,
    Factor,
    check_entries,
    marginal,
    max_abs_diff,
    uniform_factor,
)

__all__ = ["IpfpRun", "ipfp_run", "ipfp_step"]


@dataclass(frozen=True)
class IpfpRun:
    """Result of :func:`ipfp_run`.

    ``cycles_used`` counts the cycles that produced the result: when the last
    cycle only confirmed the fixed point (its change is within ``tol``) it is
    not counted, except that at least one cycle is always reported.
    """

    result: Factor
    cycles_used: int
    per_cycle_change: tuple[float, ...]
    converged: bool
    first_cycle: Factor
    marginal_mismatch: float


def ipfp_step(current: Factor, target: Factor) -> Factor:
    """Fit ``current`` to the marginal ``target``: ``current ◁ target``."""
    if not set(target.scope) <= set(current.scope):
        raise ScopeMismatch(f"target scope {list(target.scope)} not within {list(current.scope)}")
    return compose_left(current, target)


def ipfp_run(
    seq: GeneratingSequence,
    max_cycles: int = 500,
    tol: float = 1e-9,
    max_entries: int = DEFAULT_MAX_ENTRIES,
) -> IpfpRun:
    """Cycle through ``P1..Pn`` from a uniform start until a cycle changes
    the estimate by at most ``tol`` (max-abs) or ``max_cycles`` is reached.

    Non-convergence is reported through ``converged=False``; nothing is
    claimed about a limit for inconsistent inputs.
    """
    if max_cycles < 1:
        raise ValueError("max_cycles must be >= 1")
    union = seq.union_scope
    check_entries(union, seq.registry, max_entries)
    estimate = uniform_factor(union, seq.registry)
    changes: list[float] = []
    first = None
    converged = False
    for _ in range(max_cycles):
        previous = estimate
        for k, target in enumerate(seq.factors, start=1):
            try:
                estimate = ipfp_step(estimate, target)
            except DominanceViolation as exc:
                raise exc.at_step(k) from None
        if first is None:
            first = estimate
        changes.append(max_abs_diff(estimate, previous))
        if changes[-1] <= tol:
            converged = True
            break
    cycles = max(1, len(changes) - 1) if converged else len(changes)
    mismatch = max(max_abs_diff(marginal(estimate, f.scope), f) for f in seq.factors)
    return IpfpRun(estimate, cycles, tuple(changes), converged, first, mismatch)
