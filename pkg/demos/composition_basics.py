"""Right and left composition of two overlapping tables.

Builds P1(X1, X2) and P2(X2, X3) whose X2 marginals disagree, composes them
both ways, and shows that each result keeps the marginal of the factor that
"wins": the left operand for right composition, the right operand for left
composition.  Run with ``python3 demos/composition_basics.py``.
"""

from cpm import (
    VariableRegistry,
    compose_left,
    compose_right,
    is_consistent,
    make_factor,
    marginal,
    max_abs_diff,
)

reg = VariableRegistry.binary(["X1", "X2", "X3"])
p1 = make_factor(["X1", "X2"], [0.1, 0.2, 0.3, 0.4], reg)
p2 = make_factor(["X2", "X3"], [0.2, 0.3, 0.25, 0.25], reg)

print("P1(X2) =", marginal(p1, ["X2"]).flat)
print("P2(X2) =", marginal(p2, ["X2"]).flat)
print("consistent:", is_consistent(p1, p2))

right = compose_right(p1, p2)
left = compose_left(p1, p2)
print("P1 |> P2 =", right.flat.round(4))
print("P1 <| P2 =", left.flat.round(4))

print("right keeps P1:", max_abs_diff(marginal(right, p1.scope), p1))
print("left keeps P2: ", max_abs_diff(marginal(left, p2.scope), p2))
print("difference:    ", max_abs_diff(right, left))

# marginals of one joint are consistent, and then the two operators agree
joint = compose_right(p1, p2)
q1, q2 = marginal(joint, ["X1", "X2"]), marginal(joint, ["X2", "X3"])
print("consistent pair difference:", max_abs_diff(compose_right(q1, q2), compose_left(q1, q2)))
