"""Generating sequences: chain composition, perfectness and local elimination."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .compose import anticipate, compose_left, compose_right
from .errors import CardinalityMismatch, CheckDisagreement, DominanceViolation, VariableAbsent
from .tables import (
    DEFAULT_MAX_ENTRIES,
    DEFAULT_TOL,
    Factor,
    Tolerance,
    VariableRegistry,
    check_entries,
    marginal,
    marginalize_out,
    max_abs_diff,
    track_tables,
)

__all__ = [
    "EliminationResult",
    "GeneratingSequence",
    "PerfectnessReport",
    "compose_sequence_left",
    "compose_sequence_right",
    "eliminate_variable",
    "eliminate_variables",
    "is_perfect",
]


@dataclass(frozen=True)
class GeneratingSequence:
    """An ordered list of factors ``P1, ..., Pn`` read as ``P1 ▷ P2 ▷ ... ▷ Pn``."""

    factors: tuple[Factor, ...]
    registry: VariableRegistry = None
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ValueError("a generating sequence needs at least one factor")
        registry = self.registry if self.registry is not None else factors[0].registry
        for f in factors:
            if f.registry is not registry:
                for v in f.scope:
                    if registry.card(v) != f.registry.card(v):
                        raise CardinalityMismatch(f"variable {v!r} has inconsistent cardinality")
        if self.names is not None and len(self.names) != len(factors):
            raise ValueError("one name per factor expected")
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "registry", registry)
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))

    @property
    def union_scope(self) -> tuple[str, ...]:
        return self.registry.sort({v for f in self.factors for v in f.scope})

    def scopes(self) -> list[tuple[str, ...]]:
        return [f.scope for f in self.factors]

    def positions_of(self, var: str) -> list[int]:
        """0-based indices of the factors whose scope contains ``var``."""
        return [i for i, f in enumerate(self.factors) if var in f.scope]

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)

    def __getitem__(self, i):
        return self.factors[i]

    def with_factors(self, factors: Iterable[Factor], names=None) -> "GeneratingSequence":
        factors = tuple(factors)
        if names is None and self.names is not None and len(factors) == len(self.names):
            names = self.names
        return GeneratingSequence(factors, self.registry, names)

    def factor_names(self) -> tuple[str, ...]:
        if self.names is not None:
            return self.names
        return tuple(f"P{i}" for i in range(1, len(self.factors) + 1))


def _joint_guard(seq: GeneratingSequence, max_entries: int) -> None:
    check_entries(seq.union_scope, seq.registry, max_entries)


def compose_sequence_right(
    seq: GeneratingSequence, max_entries: int = DEFAULT_MAX_ENTRIES
) -> Factor:
    """``(...((P1 ▷ P2) ▷ P3) ... ▷ Pn)``.

    Raises
    ------
    DominanceViolation
        With ``step`` set to the 1-based position of the factor that could
        not be composed.
    TooLarge
        If the joint would exceed ``max_entries``.
    """
    _joint_guard(seq, max_entries)
    acc = seq.factors[0]
    for k, f in enumerate(seq.factors[1:], start=2):
        try:
            acc = compose_right(acc, f)
        except DominanceViolation as exc:
            raise exc.at_step(k) from None
    return acc


def compose_sequence_left(
    seq: GeneratingSequence, max_entries: int = DEFAULT_MAX_ENTRIES
) -> Factor:
    """``(...((P1 ◁ P2) ◁ P3) ... ◁ Pn)``.

    Every step marginalizes the whole accumulated distribution, so this is
    only meant for checks at desk scale.
    """
    _joint_guard(seq, max_entries)
    acc = seq.factors[0]
    for k, f in enumerate(seq.factors[1:], start=2):
        try:
            acc = compose_left(acc, f)
        except DominanceViolation as exc:
            raise exc.at_step(k) from None
    return acc


# -- perfectness --------------------------------------------------------------

@dataclass(frozen=True)
class PerfectnessReport:
    """Outcome of :func:`is_perfect`.

    ``failing_index`` is the 1-based position of the first factor at which
    the check failed, or ``None``.  With ``method="both"`` the index reported
    is the one from the definition check, and ``details`` holds each method's
    ``(worst_deviation, failing_index)``.
    """

    verdict: bool
    method: str
    worst_deviation: float
    failing_index: int | None = None
    details: dict = field(default_factory=dict)


def _perfect_by_definition(seq, tol, max_entries):
    _joint_guard(seq, max_entries)
    right = left = seq.factors[0]
    worst, failing = 0.0, None
    for k, f in enumerate(seq.factors[1:], start=2):
        try:
            right = compose_right(right, f)
            left = compose_left(left, f)
        except DominanceViolation as exc:
            raise exc.at_step(k) from None
        dev = max_abs_diff(right, left)
        worst = max(worst, dev)
        if failing is None and dev > tol.eq_tol:
            failing = k
    return worst, failing


def _perfect_by_marginals(seq, tol, max_entries):
    joint = compose_sequence_right(seq, max_entries)
    worst, failing = 0.0, None
    for k, f in enumerate(seq.factors, start=1):
        dev = max_abs_diff(marginal(joint, f.scope), f)
        worst = max(worst, dev)
        if failing is None and dev > tol.eq_tol:
            failing = k
    return worst, failing


def is_perfect(
    seq: GeneratingSequence,
    method: str = "both",
    tol: Tolerance = DEFAULT_TOL,
    max_entries: int = DEFAULT_MAX_ENTRIES,
) -> PerfectnessReport:
    """Check whether ``seq`` is perfect.

    ``"definition"`` compares the right and left prefix chains for every
    ``k = 2..n``; ``"marginals"`` composes the right chain once and checks that
    every factor is one of its marginals; ``"both"`` runs the two and raises
    :class:`CheckDisagreement` if their verdicts differ.
    """
    if method in ("def", "definition"):
        worst, failing = _perfect_by_definition(seq, tol, max_entries)
        return PerfectnessReport(failing is None, "definition", worst, failing,
                                 {"definition": (worst, failing)})
    if method == "marginals":
        worst, failing = _perfect_by_marginals(seq, tol, max_entries)
        return PerfectnessReport(failing is None, "marginals", worst, failing,
                                 {"marginals": (worst, failing)})
    if method != "both":
        raise ValueError(f"unknown method {method!r}")
    d = _perfect_by_definition(seq, tol, max_entries)
    m = _perfect_by_marginals(seq, tol, max_entries)
    if (d[1] is None) != (m[1] is None):
        raise CheckDisagreement(
            f"definition check says {d[1] is None} (deviation {d[0]:.3g}), "
            f"marginals check says {m[1] is None} (deviation {m[0]:.3g})"
        )
    return PerfectnessReport(d[1] is None, "both", max(d[0], m[0]), d[1],
                             {"definition": d, "marginals": m})


# -- elimination --------------------------------------------------------------

@dataclass(frozen=True)
class EliminationResult:
    """Output of :func:`eliminate_variable` / :func:`eliminate_variables`.

    Attributes
    ----------
    reduced : GeneratingSequence
        ``Q1, ..., Qn``; composes to the marginal of the input chain.
    residual : Factor or None
        ``Q_{n+1}``, the last accumulator; appending it to ``reduced``
        reproduces the input chain's joint.
    peak_entries : int
        Largest table allocated during the elimination.
    positions : tuple of int
        1-based positions of the factors that contained the eliminated
        variable(s).  Every other factor is passed through as the same object.
    intermediate_scopes : frozenset
        Scopes of every table allocated along the way.
    fill_in : tuple of (int, tuple of str)
        Variables a touched factor gained relative to its own scope.
    rounds : tuple of EliminationResult
        Per-variable results for :func:`eliminate_variables`.
    """

    reduced: GeneratingSequence
    residual: Factor | None
    peak_entries: int
    positions: tuple[int, ...]
    intermediate_scopes: frozenset = frozenset()
    fill_in: tuple = ()
    rounds: tuple = ()

    @property
    def m(self) -> int:
        return len(self.positions)


def eliminate_variable(
    seq: GeneratingSequence, var: str, keep_residual: bool = False
) -> EliminationResult:
    """Sum ``var`` out of the model defined by ``seq`` without forming the joint.

    Only the factors containing ``var`` are touched.  Walking them in order
    ``i1 < i2 < ... < im``, an accumulator starts at ``P_{i1}`` and absorbs
    each later one with the anticipating operator, whose context is
    everything composed before it with ``var`` removed.  Each touched position
    receives the accumulator with ``var`` summed out.  For ``m = 1`` this
    degenerates to replacing ``P_{i1}`` by its marginal.
    """
    idx = seq.positions_of(var)
    if not idx:
        raise VariableAbsent(f"variable {var!r} does not occur in the sequence")

    out = list(seq.factors)
    with track_tables() as rec:
        acc = seq.factors[idx[0]]
        out[idx[0]] = marginalize_out(acc, var)
        for i in idx[1:]:
            context = {v for f in seq.factors[:i] for v in f.scope}
            context.discard(var)
            try:
                acc = anticipate(acc, seq.factors[i], context)
            except DominanceViolation as exc:
                raise exc.at_step(i + 1) from None
            out[i] = marginalize_out(acc, var)

    fill_in = []
    for i in idx:
        extra = tuple(v for v in out[i].scope if v not in seq.factors[i].scope)
        if extra:
            fill_in.append((i + 1, extra))
    return EliminationResult(
        reduced=seq.with_factors(out),
        residual=acc if keep_residual else None,
        peak_entries=rec.peak_entries,
        positions=tuple(i + 1 for i in idx),
        intermediate_scopes=frozenset(rec.scopes),
        fill_in=tuple(fill_in),
    )


def eliminate_variables(
    seq: GeneratingSequence, variables: Sequence[str], ignore_missing: bool = False
) -> EliminationResult:
    """Eliminate several variables one at a time, in the order given."""
    rounds = []
    current = seq
    for var in variables:
        if ignore_missing and not current.positions_of(var):
            continue
        res = eliminate_variable(current, var)
        rounds.append(res)
        current = res.reduced
    return EliminationResult(
        reduced=current,
        residual=None,
        peak_entries=max((r.peak_entries for r in rounds), default=0),
        positions=tuple(sorted({p for r in rounds for p in r.positions})),
        intermediate_scopes=frozenset().union(*(r.intermediate_scopes for r in rounds)),
        fill_in=tuple(x for r in rounds for x in r.fill_in),
        rounds=tuple(rounds),
    )
