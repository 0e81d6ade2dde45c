"""Seeded random factors and sequences for tests, demos and benchmarks.

Every generator takes an explicit seed (or ``numpy.random.Generator``) and is
deterministic given it.  All generated tables are strictly positive.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from .tables import Factor, VariableRegistry, divide_by_marginal, marginal, multiply
from .sequence import GeneratingSequence, is_perfect

__all__ = [
    "chain_sequence",
    "consistent_sequence",
    "gen_nonperfect_fixture",
    "gen_perfect_fixture",
    "random_factor",
    "random_sequence",
]


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_factor(rng, scope: Sequence[str], registry: VariableRegistry, alpha: float = 1.0) -> Factor:
    """Dirichlet-distributed positive factor over ``scope``."""
    rng = _rng(rng)
    scope = registry.sort(scope)
    shape = registry.cards(scope)
    n = math.prod(shape)
    while True:
        values = rng.dirichlet(np.full(n, alpha))
        if np.all(values > 0):
            return Factor(scope, values.reshape(shape), registry)


def _registry(rng, num_vars: int, max_card: int, min_card: int = 2) -> VariableRegistry:
    lo = min(min_card, max_card)
    return VariableRegistry(
        (f"X{i + 1}", int(rng.integers(lo, max_card + 1))) for i in range(num_vars)
    )


def random_sequence(
    seed,
    n_factors: int = 4,
    num_vars: int = 6,
    max_scope: int = 4,
    max_card: int = 3,
    registry: VariableRegistry | None = None,
) -> GeneratingSequence:
    """Random positive sequence with scopes of 1..``max_scope`` variables."""
    rng = _rng(seed)
    if registry is None:
        registry = _registry(rng, num_vars, max_card)
    names = registry.names
    factors = []
    for _ in range(n_factors):
        size = int(rng.integers(1, min(max_scope, len(names)) + 1))
        scope = rng.choice(len(names), size=size, replace=False)
        factors.append(random_factor(rng, [names[i] for i in scope], registry))
    return GeneratingSequence(tuple(factors), registry)


def consistent_sequence(seed, scopes: Sequence[Sequence[str]], registry: VariableRegistry) -> GeneratingSequence:
    """Marginals of one random joint, so every pair of factors is consistent."""
    rng = _rng(seed)
    joint = random_factor(rng, {v for s in scopes for v in s}, registry)
    return GeneratingSequence(tuple(marginal(joint, s) for s in scopes), registry)


def chain_sequence(seed, length: int, card: int = 2) -> GeneratingSequence:
    """Pairwise factors ``P(X1,X2), P(X2,X3), ...`` over ``length`` variables."""
    rng = _rng(seed)
    registry = VariableRegistry((f"X{i + 1}", card) for i in range(length))
    names = registry.names
    if length == 1:
        return GeneratingSequence((random_factor(rng, names, registry),), registry)
    factors = [random_factor(rng, names[i:i + 2], registry) for i in range(length - 1)]
    return GeneratingSequence(tuple(factors), registry)


def _parents(rng, num_vars: int, structure, max_parents: int) -> list[list[int]]:
    if isinstance(structure, Mapping):
        return [sorted(structure.get(j, ())) for j in range(num_vars)]
    if structure == "empty":
        return [[] for _ in range(num_vars)]
    if structure == "chain":
        return [[j - 1] if j else [] for j in range(num_vars)]
    if structure == "random":
        out = []
        for j in range(num_vars):
            k = int(rng.integers(0, min(j, max_parents) + 1))
            out.append(sorted(int(i) for i in rng.choice(j, size=k, replace=False)) if k else [])
        return out
    raise ValueError(f"unknown structure {structure!r}")


def gen_perfect_fixture(
    seed,
    num_vars: int = 5,
    max_card: int = 3,
    structure="random",
    max_parents: int = 2,
) -> GeneratingSequence:
    """Perfect sequence built from a random Bayesian network.

    A random joint ``Q`` supplies the conditionals ``Q(Xj | pa(Xj))`` of a
    network whose parents precede each variable (``structure`` is
    ``"random"``, ``"chain"``, ``"empty"`` or a mapping from 0-based variable
    index to parent indices).  With ``B`` the product of those conditionals,
    the returned sequence is ``B^(cl(X1)), ..., B^(cl(Xn))`` where
    ``cl(Xj) = {Xj} ∪ pa(Xj)``.
    """
    if num_vars < 1:
        raise ValueError("num_vars must be >= 1")
    rng = _rng(seed)
    registry = _registry(rng, num_vars, max_card)
    names = registry.names
    parents = _parents(rng, num_vars, structure, max_parents)
    q = random_factor(rng, names, registry)

    b = None
    for j, pa in enumerate(parents):
        family = [names[i] for i in pa] + [names[j]]
        cond = divide_by_marginal(marginal(q, family), marginal(q, [names[i] for i in pa]))
        b = cond if b is None else multiply(b, cond)
    b = Factor(b.scope, b.values, registry)

    factors = [marginal(b, [names[j]] + [names[i] for i in pa]) for j, pa in enumerate(parents)]
    return GeneratingSequence(tuple(factors), registry)


def gen_nonperfect_fixture(
    seed,
    num_vars: int = 5,
    max_card: int = 3,
    structure="chain",
    magnitude: float = 0.3,
    max_parents: int = 2,
    attempts: int = 20,
) -> GeneratingSequence:
    """Perfect fixture with one factor mixed towards a random distribution.

    The perturbed factor is ``(1 - magnitude) * Pk + magnitude * D`` for the
    first ``k >= 2`` that shares variables with ``P1..Pk-1``.  This moves
    ``Pk``'s marginal on the shared variables away from the one the prefix
    fixes, so ``Pk`` stops being a marginal of the joint.  ``magnitude=0``
    returns the perfect fixture unchanged.
    """
    rng = _rng(seed)
    base = gen_perfect_fixture(rng, num_vars, max_card, structure, max_parents)
    if magnitude == 0:
        return base
    seen: set[str] = set()
    target = None
    for k, f in enumerate(base.factors):
        if k and seen & set(f.scope):
            target = k
            break
        seen.update(f.scope)
    if target is None:
        raise ValueError("structure has no factor sharing variables with its prefix")
    original = base.factors[target]
    for _ in range(attempts):
        noise = random_factor(rng, original.scope, base.registry)
        mixed = (1 - magnitude) * original.values + magnitude * noise.values
        factors = list(base.factors)
        factors[target] = Factor(original.scope, mixed, base.registry)
        seq = base.with_factors(factors)
        if is_perfect(seq, method="marginals").worst_deviation > 1e-8:
            return seq
    raise RuntimeError("could not break perfectness; increase magnitude")
