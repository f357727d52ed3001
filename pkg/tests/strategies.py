"""Hypothesis strategies for random terms and formulas (shared by several test modules)."""

from hypothesis import strategies as st

from heightinterp.formula import ONE, ZERO, Add, And, AtomB, AtomEq, AtomH, Exists, Mul, Or, Var

names = st.sampled_from(["x", "y", "z", "a.b", "t'", "_f0"])
terms = st.recursive(
    st.one_of(names.map(Var), st.just(ZERO), st.just(ONE)),
    lambda kids: st.one_of(st.builds(Add, kids, kids), st.builds(Mul, kids, kids)),
    max_leaves=8,
)


@st.composite
def atom_h(draw):
    xs = draw(st.lists(terms, min_size=1, max_size=3))
    ys = draw(st.lists(terms, min_size=1, max_size=3))
    return AtomH(len(xs), len(ys), tuple(xs), tuple(ys))


formulas = st.recursive(
    st.one_of(st.builds(AtomEq, terms, terms), st.builds(AtomB, terms, terms), atom_h()),
    lambda kids: st.one_of(
        st.builds(And, kids, kids),
        st.builds(Or, kids, kids),
        st.builds(lambda ns, b: Exists(tuple(ns), b), st.lists(names, min_size=1, max_size=2, unique=True), kids),
    ),
    max_leaves=10,
)


# Plain seeded generators over the same grammar, for bulk timing runs where
# hypothesis' own data generation would dominate the measurement.
_NAMES = ["x", "y", "z", "a.b", "t'", "_f0"]


def random_term(rng, leaves=8):
    if leaves <= 1 or rng.random() < 0.3:
        r = rng.randrange(len(_NAMES) + 2)
        return Var(_NAMES[r]) if r < len(_NAMES) else (ZERO, ONE)[r - len(_NAMES)]
    k = rng.randint(1, leaves - 1)
    return rng.choice((Add, Mul))(random_term(rng, k), random_term(rng, leaves - k))


def random_formula(rng, leaves=10):
    if leaves <= 1 or rng.random() < 0.25:
        kind = rng.randrange(3)
        if kind == 0:
            return AtomEq(random_term(rng), random_term(rng))
        if kind == 1:
            return AtomB(random_term(rng), random_term(rng))
        xs = tuple(random_term(rng) for _ in range(rng.randint(1, 3)))
        ys = tuple(random_term(rng) for _ in range(rng.randint(1, 3)))
        return AtomH(len(xs), len(ys), xs, ys)
    kind = rng.randrange(3)
    if kind == 2:
        return Exists(tuple(rng.sample(_NAMES, rng.randint(1, 2))), random_formula(rng, leaves - 1))
    k = rng.randint(1, leaves - 1)
    return (And, Or)[kind](random_formula(rng, k), random_formula(rng, leaves - k))
