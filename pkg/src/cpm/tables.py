"""Variables, scopes and dense probability tables.

Every table is stored as an n-dimensional numpy array whose axes follow the
scope, and scopes are always sorted in the registry's canonical order.  The
C-order flattening of a table is therefore the row-major layout with the last
scope variable varying fastest::

    scope (X1:2, X2:2)   ->   flat index order (0,0), (0,1), (1,0), (1,1)

Because all scopes share one total order, any scope is a subsequence of any
superset scope, and broadcasting a table to a larger scope never needs a
transpose: insert unit axes and let numpy do the rest.
"""

from __future__ import annotations

import contextvars
import itertools
import math
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    CardinalityMismatch,
    MarginalZeroDivision,
    NegativeEntry,
    NotNormalized,
    ScopeMismatch,
    ShapeMismatch,
    TooLarge,
    UnknownVariable,
    VariableAbsent,
)

__all__ = [
    "DEFAULT_MAX_ENTRIES",
    "Factor",
    "Table",
    "TableRecorder",
    "Tolerance",
    "VariableRegistry",
    "check_entries",
    "divide_by_marginal",
    "make_factor",
    "marginal",
    "marginalize_out",
    "max_abs_diff",
    "multiply",
    "oracle_joint",
    "track_tables",
    "uniform_factor",
]

DEFAULT_MAX_ENTRIES = 2**24

Scope = tuple  # tuple[str, ...] in canonical order


@dataclass(frozen=True)
class Tolerance:
    """Comparison bounds.  Zero is always exact (``== 0.0``), never thresholded."""

    eq_tol: float = 1e-9
    norm_tol: float = 1e-9

    def __post_init__(self):
        if not (self.eq_tol > 0 and self.norm_tol > 0):
            raise ValueError("tolerances must be positive")


DEFAULT_TOL = Tolerance()


class VariableRegistry:
    """Ordered map from variable name to cardinality.

    The insertion order is the canonical order used to sort every scope.
    """

    __slots__ = ("_cards", "_rank")

    def __init__(self, entries: Iterable[tuple[str, int]] | Mapping[str, int] = ()):
        if isinstance(entries, Mapping):
            entries = entries.items()
        cards: dict[str, int] = {}
        for name, card in entries:
            if not isinstance(name, str) or not name:
                raise ValueError(f"variable id must be a non-empty string, got {name!r}")
            if name in cards:
                raise ValueError(f"duplicate variable {name!r}")
            card = int(card)
            if card < 1:
                raise ValueError(f"cardinality of {name!r} must be >= 1, got {card}")
            cards[name] = card
        self._cards = cards
        self._rank = {name: i for i, name in enumerate(cards)}

    @classmethod
    def binary(cls, names: Iterable[str]) -> "VariableRegistry":
        return cls((n, 2) for n in names)

    def card(self, name: str) -> int:
        try:
            return self._cards[name]
        except KeyError:
            raise UnknownVariable(f"variable {name!r} is not registered") from None

    def cards(self, scope: Iterable[str]) -> tuple[int, ...]:
        return tuple(self.card(v) for v in scope)

    def sort(self, names: Iterable[str]) -> Scope:
        """Return ``names`` as a canonical scope (sorted, deduplicated check)."""
        names = list(names)
        for v in names:
            if v not in self._rank:
                raise UnknownVariable(f"variable {v!r} is not registered")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variables in scope {names}")
        return tuple(sorted(names, key=self._rank.__getitem__))

    def items(self):
        return self._cards.items()

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._cards)

    def __contains__(self, name) -> bool:
        return name in self._cards

    def __iter__(self) -> Iterator[str]:
        return iter(self._cards)

    def __len__(self) -> int:
        return len(self._cards)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VariableRegistry):
            return NotImplemented
        return list(self._cards.items()) == list(other._cards.items())

    def __hash__(self):
        return hash(tuple(self._cards.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}:{v}" for k, v in self._cards.items())
        return f"VariableRegistry({inner})"


# -- allocation tracking ------------------------------------------------------

class TableRecorder:
    """Collects the size and scope of every table built while active."""

    def __init__(self):
        self.peak_entries = 0
        self.count = 0
        self.scopes: set[Scope] = set()

    def note(self, table: "Table") -> None:
        self.count += 1
        self.scopes.add(table.scope)
        if table.size > self.peak_entries:
            self.peak_entries = table.size


_recorders: contextvars.ContextVar[tuple[TableRecorder, ...]] = contextvars.ContextVar(
    "cpm_table_recorders", default=()
)


@contextmanager
def track_tables() -> Iterator[TableRecorder]:
    """Record every :class:`Table` constructed inside the ``with`` block."""
    rec = TableRecorder()
    token = _recorders.set(_recorders.get() + (rec,))
    try:
        yield rec
    finally:
        _recorders.reset(token)


def check_entries(scope: Sequence[str], registry: VariableRegistry, max_entries: int) -> int:
    """Raise :class:`TooLarge` if a table over ``scope`` would exceed ``max_entries``."""
    n = math.prod(registry.cards(scope))
    if n > max_entries:
        raise TooLarge(
            f"table over {len(scope)} variables needs {n} entries (limit {max_entries})"
        )
    return n


# -- tables -------------------------------------------------------------------

class Table:
    """A nonnegative table over a canonical scope.  Not necessarily normalized."""

    __slots__ = ("scope", "values", "registry")

    def __init__(self, scope: Scope, values: np.ndarray, registry: VariableRegistry):
        scope = tuple(scope)
        values = np.asarray(values, dtype=np.float64)
        shape = registry.cards(scope)
        if values.shape != shape:
            raise ShapeMismatch(f"table shape {values.shape} does not match scope shape {shape}")
        if values.flags.writeable:
            values = values.view()
            values.flags.writeable = False
        self.scope = scope
        self.values = values
        self.registry = registry
        for rec in _recorders.get():
            rec.note(self)

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def flat(self) -> np.ndarray:
        """Row-major (last variable fastest) view of the entries."""
        return self.values.reshape(-1)

    def total(self) -> float:
        return float(self.values.sum())

    def __getitem__(self, config: Mapping[str, int]) -> float:
        return float(self.values[tuple(config[v] for v in self.scope)])

    def __repr__(self) -> str:
        scope = ", ".join(self.scope)
        return f"{type(self).__name__}({scope}; {np.array2string(self.flat, precision=4)})"


class Factor(Table):
    """A probability distribution over a scope.

    Build these with :func:`make_factor`; operations return factors directly
    without re-normalizing, so any drift in the mass stays visible.
    """

    __slots__ = ()


def _validate(values: np.ndarray, norm_tol: float) -> None:
    if not np.all(np.isfinite(values)):
        raise ValueError("table entries must be finite")
    if np.any(values < 0):
        raise NegativeEntry("probability tables must be nonnegative")
    total = float(values.sum())
    if abs(total - 1.0) > norm_tol:
        raise NotNormalized(f"entries sum to {total!r}, not 1 (tolerance {norm_tol})")


def make_factor(
    scope: Iterable[str],
    values,
    registry: VariableRegistry,
    norm_tol: float | None = None,
) -> Factor:
    """Build a validated :class:`Factor`.

    Parameters
    ----------
    scope : iterable of str
        Variables of the distribution.  If not in canonical order, ``values``
        is interpreted in the given order and permuted to canonical layout.
    values : array_like
        Flat row-major entries (last variable fastest), or an array already
        shaped by the cardinalities of ``scope``.  Stored verbatim.
    registry : VariableRegistry
    norm_tol : float, optional
        Allowed ``|sum - 1|``; defaults to ``1e-9``.
    """
    scope = list(scope)
    canon = registry.sort(scope)
    shape = registry.cards(scope)
    arr = np.array(values, dtype=np.float64)
    n = math.prod(shape)
    if arr.shape != shape:
        if arr.size != n or (arr.ndim != 1 and arr.ndim != 0):
            raise ShapeMismatch(f"expected {n} values for scope {scope}, got shape {arr.shape}")
        arr = arr.reshape(shape)
    _validate(arr, DEFAULT_TOL.norm_tol if norm_tol is None else norm_tol)
    if tuple(scope) != canon:
        arr = np.transpose(arr, [scope.index(v) for v in canon])
        arr = np.ascontiguousarray(arr)
    return Factor(canon, arr, registry)


def uniform_factor(scope: Iterable[str], registry: VariableRegistry) -> Factor:
    scope = registry.sort(scope)
    shape = registry.cards(scope)
    return Factor(scope, np.full(shape, 1.0 / math.prod(shape)), registry)


def _union(registry: VariableRegistry, *scopes: Iterable[str]) -> Scope:
    return registry.sort(set().union(*scopes))


def _check_compatible(a: Table, b: Table) -> None:
    if a.registry is b.registry:
        return
    for v in b.scope:
        if v not in a.registry:
            raise UnknownVariable(f"variable {v!r} is not registered")
        if a.registry.card(v) != b.registry.card(v):
            raise CardinalityMismatch(
                f"variable {v!r} has cardinality {a.registry.card(v)} vs {b.registry.card(v)}"
            )


def _expand(table: Table, target: Scope) -> np.ndarray:
    """View of ``table.values`` broadcastable against a table over ``target``."""
    present = set(table.scope)
    shape = [table.registry.card(v) if v in present else 1 for v in target]
    return table.values.reshape(shape)


def marginal(p: Table, keep: Iterable[str]) -> Factor:
    """Marginal of ``p`` on ``scope(p) ∩ keep``; ``keep`` may name any variables."""
    keep = set(keep)
    axes = tuple(i for i, v in enumerate(p.scope) if v not in keep)
    scope = tuple(v for v in p.scope if v in keep)
    if not axes:
        return p if isinstance(p, Factor) else Factor(scope, p.values, p.registry)
    return Factor(scope, p.values.sum(axis=axes), p.registry)


def marginalize_out(p: Table, var: str) -> Factor:
    """Remove one variable by summation."""
    if var not in p.scope:
        raise VariableAbsent(f"variable {var!r} is not in scope {list(p.scope)}")
    return marginal(p, [v for v in p.scope if v != var])


def multiply(a: Table, b: Table) -> Table:
    """Pointwise product over the union scope.  The result is a raw :class:`Table`."""
    _check_compatible(a, b)
    scope = _union(a.registry, a.scope, b.scope)
    return Table(scope, _expand(a, scope) * _expand(b, scope), a.registry)


def divide_by_marginal(num: Table, den: Table) -> Table:
    """Pointwise ``num / den`` with ``0/0 = 0``.

    ``scope(den)`` must be contained in ``scope(num)``.  A positive numerator
    entry over an exactly-zero denominator raises :class:`MarginalZeroDivision`.
    """
    _check_compatible(num, den)
    if not set(den.scope) <= set(num.scope):
        raise ScopeMismatch(f"denominator scope {den.scope} not within {num.scope}")
    d = np.broadcast_to(_expand(den, num.scope), num.values.shape)
    zero = d == 0.0
    if np.any(num.values[zero] != 0.0):
        raise MarginalZeroDivision("positive numerator over a zero denominator marginal")
    out = np.zeros(num.values.shape)
    np.divide(num.values, d, out=out, where=~zero)
    return Table(num.scope, out, num.registry)


def max_abs_diff(a: Table, b: Table) -> float:
    if tuple(a.scope) != tuple(b.scope):
        raise ScopeMismatch(f"scopes differ: {list(a.scope)} vs {list(b.scope)}")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a.values - b.values)))


# -- brute-force oracle -------------------------------------------------------

def _strides(cards: Sequence[int]) -> list[int]:
    strides = [1] * len(cards)
    for i in range(len(cards) - 2, -1, -1):
        strides[i] = strides[i + 1] * cards[i + 1]
    return strides


def oracle_joint(seq, max_entries: int = DEFAULT_MAX_ENTRIES) -> Factor:
    """Joint of a right-composition chain, evaluated one configuration at a time.

    For every configuration ``x`` of the union scope this multiplies
    ``P1(x) * prod_k Pk(x) / Pk^(Kk ∩ (K1 ∪ ... ∪ Kk-1))(x)`` using plain
    Python loops over flat row-major lists.  It shares no code with
    :func:`multiply`, :func:`marginal` or the composition operators, so it can
    serve as an independent reference for them.  Desk scale only.

    ``seq`` is a :class:`~cpm.sequence.GeneratingSequence` or a list of factors.
    """
    from .errors import DominanceViolation

    factors = list(getattr(seq, "factors", seq))
    if not factors:
        raise ValueError("empty sequence")
    registry = factors[0].registry
    order = {v: i for i, v in enumerate(registry.names)}
    union: list[str] = sorted({v for f in factors for v in f.scope}, key=order.__getitem__)
    check_entries(union, registry, max_entries)
    cards = [registry.card(v) for v in union]

    prepared = []
    seen: set[str] = set()
    for f in factors:
        fcards = [registry.card(v) for v in f.scope]
        fstrides = _strides(fcards)
        flat = [float(x) for x in f.values.reshape(-1).tolist()]
        shared = [v for v in f.scope if v in seen]
        # marginal of f on the shared variables, keyed by their value tuple
        den: dict[tuple, float] = {}
        for idx in range(len(flat)):
            key = tuple((idx // fstrides[f.scope.index(v)]) % fcards[f.scope.index(v)] for v in shared)
            den[key] = den.get(key, 0.0) + flat[idx]
        pos = [union.index(v) for v in f.scope]
        spos = [union.index(v) for v in shared]
        prepared.append((flat, pos, fstrides, spos, den, shared))
        seen.update(f.scope)

    out = []
    for x in itertools.product(*(range(c) for c in cards)):
        value = 1.0
        for k, (flat, pos, fstrides, spos, den, shared) in enumerate(prepared):
            entry = flat[sum(x[p] * s for p, s in zip(pos, fstrides))]
            d = den[tuple(x[p] for p in spos)]
            if d == 0.0:
                if value > 0.0:
                    witness = {v: x[p] for v, p in zip(shared, spos)}
                    raise DominanceViolation(shared, witness, step=k + 1)
                value = 0.0
            else:
                value = value * entry / d
        out.append(value)
    arr = np.array(out, dtype=np.float64).reshape(cards) if cards else np.array(out[0])
    return Factor(tuple(union), arr, registry)
