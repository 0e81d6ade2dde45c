"""Acceptance criteria, one test per criterion.

Each test carries ``@pytest.mark.acceptance(number, title)``; the terminal
summary prints a ``[PASS]``/``[FAIL]`` line per criterion together with the
measured metrics.  Run just this suite with::

    python3 -m pytest tests/test_acceptance.py -v
"""

import time

import numpy as np
import pytest

from cpm import (
    GeneratingSequence,
    TooLarge,
    anticipate,
    compose_left,
    compose_right,
    compose_sequence_left,
    compose_sequence_right,
    eliminate_variable,
    ipfp_run,
    is_perfect,
    marginal,
    marginalize_out,
    max_abs_diff,
    oracle_joint,
    read_model,
    track_tables,
)
from cpm.fixtures import (
    chain_sequence,
    gen_nonperfect_fixture,
    gen_perfect_fixture,
    random_factor,
    random_sequence,
)
from cpm.modelfile import parse_model, serialize_model
from cpm.errors import ParseError

from conftest import DATA, random_registry, random_scope

acceptance = pytest.mark.acceptance


def _sub(rng, names, lo=0):
    names = list(names)
    if not names:
        return []
    k = int(rng.integers(lo, len(names) + 1))
    return sorted(rng.choice(names, size=k, replace=False).tolist(), key=names.index)


@acceptance("1", "marginal identity of right composition")
def test_marginal_identity(record_property):
    worst, t0 = 0.0, time.perf_counter()
    for seed in range(500):
        rng = np.random.default_rng(seed)
        reg = random_registry(rng, 4, max_card=3)
        p1 = random_factor(rng, random_scope(rng, reg.names), reg)
        p2 = random_factor(rng, random_scope(rng, reg.names), reg)
        worst = max(worst, max_abs_diff(marginal(compose_right(p1, p2), p1.scope), p1))
    elapsed = time.perf_counter() - t0
    record_property("worst", f"{worst:.2e}")
    record_property("seconds", f"{elapsed:.2f}")
    assert worst <= 1e-12
    assert elapsed < 5.0


@acceptance("2", "right and left composition agree exactly on consistent pairs")
def test_consistency_biconditional(record_property):
    worst_consistent, weakest_gap = 0.0, np.inf
    for seed in range(200):
        rng = np.random.default_rng(seed)
        reg = random_registry(rng, 4, max_card=3)
        joint = random_factor(rng, reg.names, reg)
        k1 = random_scope(rng, reg.names, hi=3)
        k2 = sorted(set(random_scope(rng, reg.names, hi=3)) | {k1[0]}, key=reg.names.index)
        p1, p2 = marginal(joint, k1), marginal(joint, k2)
        worst_consistent = max(worst_consistent, max_abs_diff(compose_right(p1, p2), compose_left(p1, p2)))

    for seed in range(200):
        rng = np.random.default_rng(10_000 + seed)
        reg = random_registry(rng, 4, max_card=3)
        joint = random_factor(rng, reg.names, reg)
        k1 = random_scope(rng, reg.names, hi=3)
        k2 = sorted(set(random_scope(rng, reg.names, hi=3)) | {k1[0]}, key=reg.names.index)
        shared = [v for v in reg.names if v in k1 and v in k2]
        p1 = marginal(joint, k1)
        # mix P2 with independent noise until its shared marginal moves by >= 0.05
        while True:
            noise = random_factor(rng, k2, reg)
            eps = rng.uniform(0.3, 1.0)
            p2 = marginal(joint, k2)
            p2 = type(p2)(p2.scope, (1 - eps) * p2.values + eps * noise.values, reg)
            if max_abs_diff(marginal(p1, shared), marginal(p2, shared)) >= 0.05:
                break
        weakest_gap = min(weakest_gap, max_abs_diff(compose_right(p1, p2), compose_left(p1, p2)))
    record_property("consistent_worst", f"{worst_consistent:.2e}")
    record_property("perturbed_min_gap", f"{weakest_gap:.2e}")
    assert worst_consistent <= 1e-10
    assert weakest_gap > 1e-4


@acceptance("3", "reordering, marginal insertion, marginal push-down, anticipation")
def test_chain_identities_and_anticipation(record_property):
    worst = dict(swap=0.0, insert=0.0, pushdown=0.0, anticipate=0.0, uniform_r=0.0)
    for seed in range(200):
        rng = np.random.default_rng(seed)
        reg = random_registry(rng, 5, max_card=3)
        names = reg.names

        # K1 contains K2 ∩ K3
        k2, k3 = random_scope(rng, names, hi=3), random_scope(rng, names, hi=3)
        k1 = sorted(set(k2) & set(k3) | set(_sub(rng, names[:3])), key=names.index)
        p1, p2, p3 = (random_factor(rng, k, reg) for k in (k1, k2, k3))
        worst["swap"] = max(worst["swap"], max_abs_diff(
            compose_right(compose_right(p1, p2), p3), compose_right(compose_right(p1, p3), p2)))

        # K1 ∩ K2 ⊆ L ⊆ K2
        p1 = random_factor(rng, random_scope(rng, names, hi=3), reg)
        p2 = random_factor(rng, random_scope(rng, names, hi=3), reg)
        shared = [v for v in p2.scope if v in p1.scope]
        extra = _sub(rng, [v for v in p2.scope if v not in shared])
        lset = sorted(set(shared) | set(extra), key=names.index)
        worst["insert"] = max(worst["insert"], max_abs_diff(
            compose_right(p1, p2), compose_right(compose_right(p1, marginal(p2, lset)), p2)))

        # L ⊇ K1 ∩ K2
        p1 = random_factor(rng, random_scope(rng, names, hi=3), reg)
        p2 = random_factor(rng, random_scope(rng, names, hi=3), reg)
        shared = [v for v in names if v in p1.scope and v in p2.scope]
        lset = sorted(set(shared) | set(_sub(rng, names)), key=names.index)
        worst["pushdown"] = max(worst["pushdown"], max_abs_diff(
            marginal(compose_right(p1, p2), lset),
            compose_right(marginal(p1, lset), marginal(p2, lset))))

        # P1 ▷ P2 ▷ P3 = P1 ▷ (P2 anticipating P3 in the context K1)
        p1, p2, p3 = (random_factor(rng, random_scope(rng, names, hi=3), reg) for _ in range(3))
        chain = compose_right(compose_right(p1, p2), p3)
        worst["anticipate"] = max(worst["anticipate"], max_abs_diff(
            chain, compose_right(p1, anticipate(p2, p3, p1.scope))))
        worst["uniform_r"] = max(worst["uniform_r"], max_abs_diff(
            chain, compose_right(p1, anticipate(p2, p3, p1.scope, r_choice="uniform"))))
    for k, v in worst.items():
        record_property(k, f"{v:.2e}")
    assert all(v <= 1e-10 for v in worst.values())


def _elimination_corpus():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        yield random_sequence(seed, n_factors=int(rng.integers(2, 6)), num_vars=8, max_scope=4, max_card=3)


@pytest.fixture(scope="module")
def elimination_results():
    """For every corpus sequence and every variable in two or more scopes,
    the worst reconstruction and marginalization deviations."""
    recon, margin, cases = 0.0, 0.0, 0
    for seq in _elimination_corpus():
        joint = oracle_joint(seq)
        for var in seq.union_scope:
            if len(seq.positions_of(var)) < 2:
                continue
            res = eliminate_variable(seq, var, keep_residual=True)
            full = res.reduced.with_factors(list(res.reduced) + [res.residual])
            recon = max(recon, max_abs_diff(compose_sequence_right(full), joint))
            margin = max(margin, max_abs_diff(compose_sequence_right(res.reduced), marginalize_out(joint, var)))
            cases += 1
    return recon, margin, cases


@acceptance("4", "elimination with residual reconstructs the joint")
def test_reconstruction(elimination_results, record_property):
    recon, _, cases = elimination_results
    record_property("cases", cases)
    record_property("worst", f"{recon:.2e}")
    assert cases >= 100
    assert recon <= 1e-9


@acceptance("5", "local elimination equals marginalizing the joint")
def test_marginalization(elimination_results, record_property):
    _, margin, cases = elimination_results

    reg, stored = read_model(DATA / "worked_example.cpm")
    worked = 0.0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        seq = GeneratingSequence(tuple(random_factor(rng, f.scope, reg) for f in stored), reg)
        res = eliminate_variable(seq, "X1")
        worked = max(worked, max_abs_diff(compose_sequence_right(res.reduced),
                                          marginalize_out(oracle_joint(seq), "X1")))

    p1, p2, p3 = stored
    naive = GeneratingSequence((marginalize_out(p1, "X1"), p2, marginalize_out(compose_right(p1, p3), "X1")))
    naive_gap = max_abs_diff(compose_sequence_right(naive), marginalize_out(oracle_joint(stored), "X1"))

    record_property("corpus_worst", f"{margin:.2e}")
    record_property("worked_worst", f"{worked:.2e}")
    record_property("naive_gap", f"{naive_gap:.2e}")
    assert margin <= 1e-9
    assert worked <= 1e-10
    assert naive_gap > 1e-3


@acceptance("6", "perfectness by definition and by marginals agree")
def test_perfectness_equivalence(record_property):
    disagreements, wrong, prefix = 0, 0, 0.0
    for seed in range(50):
        for expected, seq in ((True, gen_perfect_fixture(seed)), (False, gen_nonperfect_fixture(seed))):
            a = is_perfect(seq, method="definition")
            b = is_perfect(seq, method="marginals")
            disagreements += a.verdict != b.verdict
            wrong += a.verdict != expected
            if expected:
                joint = compose_sequence_right(seq)
                for k in range(1, len(seq) + 1):
                    head = compose_sequence_right(seq.with_factors(seq.factors[:k]))
                    prefix = max(prefix, max_abs_diff(head, marginal(joint, head.scope)))
    record_property("disagreements", disagreements)
    record_property("misclassified", wrong)
    record_property("prefix_worst", f"{prefix:.2e}")
    assert disagreements == 0
    assert wrong == 0
    assert prefix <= 1e-10


@acceptance("7", "IPFP stops after one cycle on perfect sequences")
def test_ipfp_one_cycle(record_property):
    worst_change, worst_first, cycles = 0.0, 0.0, set()
    t0 = time.perf_counter()
    for seed in range(50):
        seq = gen_perfect_fixture(seed)
        run = ipfp_run(seq, tol=1e-12)
        worst_change = max(worst_change, run.per_cycle_change[1])
        cycles.add(run.cycles_used)
        worst_first = max(worst_first, max_abs_diff(run.first_cycle, compose_sequence_left(seq)))
    elapsed = time.perf_counter() - t0
    record_property("cycle2_change", f"{worst_change:.2e}")
    record_property("cycles_used", sorted(cycles))
    record_property("first_cycle_worst", f"{worst_first:.2e}")
    record_property("seconds", f"{elapsed:.2f}")
    assert worst_change < 1e-12
    assert cycles == {1}
    assert worst_first <= 1e-10
    assert elapsed < 10.0


@acceptance("8", "elimination stays local on a 26-variable chain")
def test_locality(record_property):
    seq = chain_sequence(0, 26)
    var = "X13"
    timings = []
    for _ in range(5):
        t0 = time.perf_counter()
        with track_tables() as rec:
            res = eliminate_variable(seq, var)
        timings.append(time.perf_counter() - t0)
    touched = set().union(*(seq[i - 1].scope for i in res.positions))
    widest = max(len(s) for s in rec.scopes)
    local = all(set(s) <= touched for s in rec.scopes)

    refused = False
    try:
        compose_sequence_right(seq)
    except TooLarge:
        refused = True

    interior = [v for v in seq.union_scope if len(seq.positions_of(v)) >= 2]
    t0 = time.perf_counter()
    sweep_peak = max(eliminate_variable(seq, v).peak_entries for v in interior)
    sweep = time.perf_counter() - t0

    record_property("peak_entries", rec.peak_entries)
    record_property("worst_ms", f"{1e3 * max(timings):.2f}")
    record_property("widest_scope", widest)
    record_property("joint_refused", refused)
    record_property("sweep_runs", len(interior))
    record_property("sweep_seconds", f"{sweep:.3f}")
    assert rec.peak_entries <= 8 and res.peak_entries <= 8
    assert max(timings) < 0.1
    assert local and widest <= 3
    assert refused
    assert sweep_peak <= 8
    assert sweep < 3.0


@acceptance("9", "model files round-trip and malformed files raise ParseError")
def test_round_trip_and_malformed(record_property):
    files = sorted(DATA.glob("*.cpm"))
    exact = 0
    for path in files:
        registry, seq = read_model(path)
        text = serialize_model(registry, seq)
        registry2, seq2 = parse_model(text)
        same = registry == registry2 and seq.factor_names() == seq2.factor_names() and all(
            f.scope == g.scope and f.values.tobytes() == g.values.tobytes() for f, g in zip(seq, seq2))
        exact += bool(same and len(seq) == len(seq2) and serialize_model(registry2, seq2) == text)

    malformed = sorted((DATA / "malformed").glob("*.cpm"))
    located = 0
    for path in malformed:
        try:
            read_model(path)
        except ParseError as exc:
            located += isinstance(exc.line, int) and exc.line >= 1
    record_property("round_trips", f"{exact}/{len(files)}")
    record_property("malformed_located", f"{located}/{len(malformed)}")
    assert files and exact == len(files)
    assert malformed and located == len(malformed)
