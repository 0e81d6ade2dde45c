"""Right and left composition, dominance, consistency and the anticipating operator."""

from __future__ import annotations

import numpy as np

from .errors import DominanceViolation
from .tables import (
    DEFAULT_TOL,
    Factor,
    Table,
    Tolerance,
    _check_compatible,
    divide_by_marginal,
    marginal,
    max_abs_diff,
    multiply,
    uniform_factor,
)

__all__ = [
    "anticipate",
    "compose_left",
    "compose_right",
    "dominates",
    "find_dominance_witness",
    "is_consistent",
]


def _shared(a: Table, b: Table) -> tuple[str, ...]:
    other = set(b.scope)
    return tuple(v for v in a.scope if v in other)


def find_dominance_witness(a: Table, b: Table, scope) -> dict | None:
    """Configuration of ``scope`` where ``b``'s marginal is 0 but ``a``'s is not."""
    ma = marginal(a, scope)
    mb = marginal(b, scope)
    if ma.scope != mb.scope:
        raise ValueError(f"scope {list(scope)} is not shared by both tables")
    bad = np.argwhere((mb.values == 0.0) & (ma.values != 0.0))
    if bad.size == 0:
        return None
    return {v: int(x) for v, x in zip(ma.scope, bad[0])}


def dominates(a: Table, b: Table, scope) -> bool:
    """True iff ``a^(scope) << b^(scope)``: every zero of ``b``'s marginal is a zero of ``a``'s."""
    return find_dominance_witness(a, b, scope) is None


def _require_dominance(num: Table, den: Table, scope) -> None:
    witness = find_dominance_witness(num, den, scope)
    if witness is not None:
        raise DominanceViolation(marginal(num, scope).scope, witness)


def compose_right(p1: Factor, p2: Factor) -> Factor:
    """``P1 ▷ P2 = P1 P2 / P2^(K1 ∩ K2)``.

    The result's marginal on ``scope(p1)`` is ``p1``.  Raises
    :class:`DominanceViolation` when ``P1`` puts mass where ``P2``'s
    intersection marginal is zero.
    """
    _check_compatible(p1, p2)
    shared = _shared(p1, p2)
    _require_dominance(p1, p2, shared)
    if len(shared) == len(p2.scope):
        # P2 adds no new variable: P1 * P2 / P2 == P1 under 0*0/0 = 0
        return p1
    out = divide_by_marginal(multiply(p1, p2), marginal(p2, shared))
    return Factor(out.scope, out.values, out.registry)


def compose_left(p1: Factor, p2: Factor) -> Factor:
    """``P1 ◁ P2 = P1 P2 / P1^(K1 ∩ K2)``; keeps ``p2`` as a marginal."""
    _check_compatible(p1, p2)
    shared = _shared(p1, p2)
    _require_dominance(p2, p1, shared)
    out = divide_by_marginal(multiply(p1, p2), marginal(p1, shared))
    return Factor(out.scope, out.values, out.registry)


def is_consistent(p1: Factor, p2: Factor, tol: Tolerance = DEFAULT_TOL) -> bool:
    _check_compatible(p1, p2)
    shared = _shared(p1, p2)
    return max_abs_diff(marginal(p1, shared), marginal(p2, shared)) <= tol.eq_tol


def anticipate(p2: Factor, p3: Factor, context, r_choice: str = "own-marginal") -> Factor:
    """Anticipating composition ``P2 ⊙_context P3``.

    Computes ``(R^((context \\ K2) ∩ K3) · P2) ▷ P3``.  The auxiliary factor
    ``R`` re-introduces, ahead of time, the variables of ``P3`` that the
    surrounding chain already knows about (``context``) but ``P2`` does not,
    so that they end up independent of ``P2``'s variables.

    Parameters
    ----------
    p2, p3 : Factor
    context : iterable of str
        Variables of everything composed to the left of ``p2``.
    r_choice : {"own-marginal", "uniform"}
        ``R = P3`` (default) or the uniform distribution.  Both give the same
        result once composed to the right of a context distribution with
        strictly positive inputs.
    """
    _check_compatible(p2, p3)
    k2 = set(p2.scope)
    aux_vars = [v for v in p3.scope if v in set(context) and v not in k2]
    if not aux_vars:
        return compose_right(p2, p3)
    if r_choice == "own-marginal":
        aux = marginal(p3, aux_vars)
    elif r_choice == "uniform":
        aux = uniform_factor(aux_vars, p3.registry)
    else:
        raise ValueError(f"unknown r_choice {r_choice!r}")
    # aux and p2 have disjoint scopes, so their product is a distribution
    prod = multiply(aux, p2)
    return compose_right(Factor(prod.scope, prod.values, prod.registry), p3)
