"""Perfect generating sequences.

A sequence is perfect when every factor is a marginal of the composed joint.
Sequences built from the clusters of a Bayesian network have this property;
mixing noise into one factor destroys it.  Both checks are run on each.
"""

from cpm import compose_sequence_left, compose_sequence_right, is_perfect, max_abs_diff
from cpm.fixtures import gen_nonperfect_fixture, gen_perfect_fixture

for label, seq in [("network clusters", gen_perfect_fixture(7, num_vars=5)),
                   ("perturbed", gen_nonperfect_fixture(7, num_vars=5))]:
    print(f"-- {label}: scopes {[list(s) for s in seq.scopes()]}")
    for method in ("definition", "marginals"):
        report = is_perfect(seq, method=method)
        print(f"   {method:<10} verdict={report.verdict} worst={report.worst_deviation:.2e}"
              f" failing={report.failing_index}")
    gap = max_abs_diff(compose_sequence_right(seq), compose_sequence_left(seq))
    print(f"   right vs left chain: {gap:.2e}")
