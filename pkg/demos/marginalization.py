"""Summing a variable out of a generating sequence without building the joint.

Uses the stored three-factor model P1(X1,X3), P2(X2), P3(X1,X2,X3,X4) and
eliminates X1.  The local result is compared with the brute-force joint, and
with the tempting shortcut that marginalizes P1 and P1 |> P3 separately.
"""

import pathlib

from cpm import (
    GeneratingSequence,
    compose_right,
    compose_sequence_right,
    eliminate_variable,
    marginalize_out,
    max_abs_diff,
    oracle_joint,
    read_model,
)

path = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data" / "worked_example.cpm"
registry, seq = read_model(path)
p1, p2, p3 = seq

res = eliminate_variable(seq, "X1", keep_residual=True)
print("touched factors:", res.positions)
print("reduced scopes: ", [list(f.scope) for f in res.reduced])
print("peak entries:   ", res.peak_entries)

truth = marginalize_out(oracle_joint(seq), "X1")
print("local vs brute force:", max_abs_diff(compose_sequence_right(res.reduced), truth))

full = res.reduced.with_factors(list(res.reduced) + [res.residual])
print("with residual vs joint:", max_abs_diff(compose_sequence_right(full), oracle_joint(seq)))

naive = GeneratingSequence((marginalize_out(p1, "X1"), p2, marginalize_out(compose_right(p1, p3), "X1")))
print("naive shortcut error:", max_abs_diff(compose_sequence_right(naive), truth))
