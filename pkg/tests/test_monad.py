import random

import pytest

from domprob.domain import IntervalUnit, Product, chain_poset
from domprob.errors import MissingMapping, NonMonotoneMap
from domprob.monad import (
    NestedRV,
    R_eta,
    basic_eq_sides,
    check_laws,
    costrength,
    double_strength_left,
    double_strength_right,
    eta,
    eta_R,
    kleisli,
    mu,
    random_nested,
    rmap,
    strength,
)
from domprob.pairing import PairingDescriptor
from domprob.randvar import StepRV, rv_const, rv_equiv, rv_eval, rv_leq, rv_precompose, rv_T
from domprob.sample_space import SpaceKind
from domprob.valuation import SimpleValuation

CANTOR = SpaceKind.CANTOR
UCLOSED = SpaceKind.UNIT_CLOSED
C = chain_poset(3)
U = IntervalUnit()
SPACES = [CANTOR, UCLOSED]


def step(space, cells, D=C):
    n = (len(cells) - 1).bit_length()
    return StepRV(space, n, cells, D)


def test_eta_examples():
    assert eta("bot", CANTOR, C) == rv_const(CANTOR, "bot", C)
    assert rv_T(eta("c2", UCLOSED, C)) == SimpleValuation.point(C, "c2")
    for x in ["", "0110"]:
        assert rv_eval(eta("c1", CANTOR, C), x) == "c1"


def test_mu_examples():
    d = eta("c2", CANTOR, C)
    assert mu(NestedRV(CANTOR, 0, (d,))) == d
    rr = NestedRV(CANTOR, 1, (eta("c1", CANTOR, C), eta("c3", CANTOR, C)))
    assert mu(rr).cells_at(2) == ("c1", "c1", "c3", "c3")
    inner = step(UCLOSED, ["bot", "c1", "c2", "c3"])
    flat = mu(NestedRV(UCLOSED, 0, (inner,)))
    assert rv_equiv(flat, inner)


def test_mu_envelope_is_monotone_in_depth():
    rng = random.Random(1)
    for space in SPACES:
        for _ in range(20):
            rr = random_nested(rng, space, C, C.elements, 2, 2)
            outs = [mu(rr, n) for n in range(0, 7)]
            for a, b in zip(outs, outs[1:]):
                assert rv_leq(a, b)
    rr = NestedRV(CANTOR, 2, tuple(step(CANTOR, [rng.choice(C.elements) for _ in range(4)]) for _ in range(4)))
    assert mu(rr, 4) == mu(rr, 6) == mu(rr)


def test_kleisli_examples():
    r = step(CANTOR, ["c1", "bot", "c3", "c1"])
    unit = {v: eta(v, CANTOR, C) for v in C.elements}
    assert rv_equiv(kleisli(unit, r), r)
    f = {"c2": step(CANTOR, ["c3", "bot"]), "bot": eta("bot", CANTOR, C)}
    assert rv_equiv(kleisli(f, eta("c2", CANTOR, C)), f["c2"])
    with pytest.raises(MissingMapping):
        kleisli({"c1": eta("c1", CANTOR, C)}, r)


def test_kleisli_composition():
    rng = random.Random(2)
    for space in SPACES:
        for _ in range(30):
            r = step(space, [rng.choice(C.elements) for _ in range(4)])
            f = {v: step(space, [rng.choice(C.elements) for _ in range(2)]) for v in C.elements}
            g = {v: step(space, [rng.choice(C.elements) for _ in range(2)]) for v in C.elements}
            lhs = kleisli(g, kleisli(f, r))
            gf = {v: kleisli(g, f[v]) for v in C.elements}
            rhs = kleisli(gf, r)
            assert rv_T(lhs) == rv_T(rhs)


def test_rmap_examples():
    r = step(CANTOR, ["c1", "bot", "c3", "c1"])
    ident = {v: v for v in C.elements}
    assert rmap(ident, r) == r
    const = {v: "c2" for v in C.elements}
    assert rmap(const, r) == eta("c2", CANTOR, C)
    with pytest.raises(NonMonotoneMap):
        rmap({"c1": "c3", "bot": "c3", "c3": "c1"}, r)
    with pytest.raises(MissingMapping):
        rmap({"c1": "c1"}, r)


def test_rmap_respects_equivalence():
    rng = random.Random(3)
    for _ in range(100):
        r = step(CANTOR, [rng.choice(C.elements) for _ in range(8)])
        s = rv_precompose(r, ("perm", [2, 0, 1]))
        levels = sorted(rng.choices(range(4), k=4))
        f = dict(zip(C.elements, [C.elements[k] for k in levels]))
        assert rv_equiv(rmap(f, r), rmap(f, s))


def test_strength_examples():
    e = eta("c1", CANTOR, C)
    got = strength("c2", e, C)
    assert got == eta(("c2", "c1"), CANTOR, Product(C, C))
    r = step(CANTOR, ["c1", "bot"])
    co = costrength(r, "c3", C)
    swapped = StepRV(CANTOR, co.depth, [(b, a) for a, b in co.cells], Product(C, C))
    assert swapped == strength("c3", r, C)


def test_both_double_strengths_have_equal_laws():
    rng = random.Random(4)
    for space in SPACES:
        for _ in range(30):
            r = step(space, [rng.choice(C.elements) for _ in range(2)])
            s = step(space, [rng.choice(C.elements) for _ in range(4)])
            a = double_strength_left(r, s)
            b = double_strength_right(r, s)
            assert rv_T(a) == rv_T(b)


def test_check_laws_reports_all_pass():
    for space, D, pool in [(CANTOR, C, C.elements), (UCLOSED, C, C.elements), (UCLOSED, U, U.basis(1))]:
        rep = check_laws(200, space, D, pool, seed=5)
        assert rep["failures"] == []
        assert rep["unit_left"] == rep["unit_right"] == rep["assoc"] == 200


def test_units_are_reparametrisations_on_cantor():
    rng = random.Random(6)
    for _ in range(100):
        r = step(CANTOR, [rng.choice(C.elements) for _ in range(1 << rng.randint(0, 3))])
        assert mu(R_eta(r)) == rv_precompose(r, PairingDescriptor("interleave", "h2"))
        assert mu(eta_R(r)) == rv_precompose(r, PairingDescriptor("interleave", "h1"))


def test_mu_is_monotone():
    rng = random.Random(7)
    for space in SPACES:
        for _ in range(60):
            rr = random_nested(rng, space, C, C.elements, 2, 2)
            up = NestedRV(
                space,
                rr.depth,
                tuple(StepRV(space, c.depth, [rng.choice(sorted(C.up[v])) for v in c.cells], C) for c in rr.cells),
            )
            for n in (None, 3):
                assert rv_leq(mu(rr, n), mu(up, n))


def test_naturality():
    rng = random.Random(8)
    for space in SPACES:
        for _ in range(60):
            rr = random_nested(rng, space, C, C.elements, 2, 2)
            levels = sorted(rng.choices(range(4), k=4))
            f = dict(zip(C.elements, [C.elements[k] for k in levels]))
            lhs = rmap(f, mu(rr))
            inner = NestedRV(space, rr.depth, tuple(rmap(f, c) for c in rr.cells))
            assert rv_T(lhs) == rv_T(mu(inner))


def test_layer_cake_identity():
    rng = random.Random(9)
    for space in SPACES:
        for _ in range(100):
            rr = random_nested(rng, space, C, C.elements, 3, 3)
            O = rng.sample(C.elements, rng.randint(0, 2))
            lhs, rhs = basic_eq_sides(rr, O)
            assert lhs == rhs
