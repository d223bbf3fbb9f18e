"""Random cost expressions and types shared by the property tests."""
import random

from hypothesis import strategies as st

from amcost.costalg import AddC, Arrow, Cost, MaxC, MulC, NumC, Record, VarC

VARS = ("x", "y", "z")

leaves = st.one_of(st.integers(0, 5).map(NumC), st.sampled_from(VARS).map(VarC))

cost_exprs = st.recursive(
    leaves,
    lambda kids: st.one_of(
        st.builds(AddC, kids, kids),
        st.builds(MulC, kids, kids),
        st.builds(MaxC, kids, kids),
    ),
    max_leaves=8,
)

sigmas = st.fixed_dictionaries({v: st.integers(0, 6) for v in VARS})


def random_cost_expr(rng: random.Random, depth: int = 4):
    """Plain-``random`` generator used by the bulk acceptance check."""
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.5:
            return NumC(rng.randint(0, 5))
        return VarC(rng.choice(VARS))
    ctor = rng.choice((AddC, MulC, MaxC))
    return ctor(random_cost_expr(rng, depth - 1), random_cost_expr(rng, depth - 1))


def random_type(rng: random.Random, shape: str, depth: int = 3):
    """A type of the given shape: "cost", "arrow" (one zero parameter) or "record"."""
    if shape == "arrow":
        return Arrow((Cost(NumC(0)),), Cost(random_cost_expr(rng, depth)))
    if shape == "record":
        return Record((("a", Cost(random_cost_expr(rng, depth))),
                       ("b", Cost(random_cost_expr(rng, depth)))))
    return Cost(random_cost_expr(rng, depth))
