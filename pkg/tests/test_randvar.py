import random
from itertools import combinations

import pytest

from helpers import random_poset, random_valuation, refine
from domprob.domain import BOT, FinitePoset, IntervalReal, chain_poset
from domprob.dyadic import Dyadic, DyInterval, dy
from domprob.errors import (
    ChainNotIncreasing,
    DepthOverflow,
    NotEquivalent,
    PointOutsideSpace,
    PreconditionFailed,
    UnboundedJoin,
    Unsupported,
)
from domprob.pairing import PairingDescriptor
from domprob.randvar import (
    StepRV,
    apply_witness,
    rv_approx_degree,
    rv_chain_from_valuations,
    rv_const,
    rv_equiv,
    rv_equiv_witness,
    rv_eval,
    rv_leq,
    rv_make,
    rv_member_q_open,
    rv_precompose,
    rv_refine_up,
    rv_restrict_down,
    rv_T,
    rv_way_above,
    rv_way_below,
)
from domprob.sample_space import SpaceKind, parse_open
from domprob.valuation import SimpleValuation, val_leq, val_way_below

CANTOR = SpaceKind.CANTOR
UCLOSED = SpaceKind.UNIT_CLOSED
UOPEN = SpaceKind.UNIT_OPEN
R = IntervalReal()
C = chain_poset(3)
FORK = FinitePoset(["bot", "c1", "c2"], [("bot", "c1"), ("bot", "c2")], "bot")
DIAMOND = FinitePoset(
    ["bot", "a", "b", "top"], [("bot", "a"), ("bot", "b"), ("a", "top"), ("b", "top")], "bot"
)


def iv(a, b):
    return DyInterval(dy(a), dy(b))


def V(D, text):
    return SimpleValuation.parse(D, text)


def rand_rv(rng, space, D, depth, pool=None):
    pool = pool or D.basis(2)
    return StepRV(space, depth, [rng.choice(pool) for _ in range(1 << depth)], D)


def test_make_examples():
    r = rv_make(CANTOR, [(parse_open(CANTOR, "cyl:0"), "c2")], C)
    assert r.depth == 1 and r.cells == ("c2", "bot")
    r = rv_make(CANTOR, [(parse_open(CANTOR, "cyl:0"), iv(0, 2)), (parse_open(CANTOR, "cyl:00"), iv(1, 3))], R)
    assert rv_eval(r, "00") == iv(1, 2) and rv_eval(r, "01") == iv(0, 2) and rv_eval(r, "1") is BOT
    with pytest.raises(UnboundedJoin):
        rv_make(CANTOR, [(parse_open(CANTOR, "cyl:0"), iv(0, 1)), (parse_open(CANTOR, "cyl:0"), iv(2, 3))], R)


def test_eval_examples():
    k = rv_const(UCLOSED, iv(1, 2), R)
    for x in ["0", "3/8", "1"]:
        assert rv_eval(k, x) == iv(1, 2)
    r = StepRV(UCLOSED, 1, [iv(0, 1), iv(2, 3)], R)
    assert rv_eval(r, "1/2") == iv(0, 3)
    assert rv_eval(r, "1/4") == iv(0, 1)
    c = StepRV(CANTOR, 2, [iv(0, 1), iv(2, 3), iv(5, 5), iv(5, 6)], R)
    assert rv_eval(c, "0") == iv(0, 3) and rv_eval(c, "") == iv(0, 6)
    with pytest.raises(PointOutsideSpace):
        rv_eval(StepRV(UOPEN, 1, [iv(0, 1), iv(2, 3)], R), "0")


def test_T_examples():
    assert rv_T(rv_const(CANTOR, "c1", C)) == SimpleValuation.point(C, "c1")
    assert rv_T(StepRV(CANTOR, 1, ["c1", "c2"], C)) == V(C, "1/2*delta(c1) + 1/2*delta(c2)")
    r = StepRV(CANTOR, 2, ["c1", "c1", "c2", "bot"], C)
    assert rv_T(r) == V(C, "1/2*delta(c1) + 1/4*delta(c2) + 1/4*delta(bot)")


def test_order_examples():
    r = StepRV(CANTOR, 2, ["c1", "c1", "c2", "bot"], C)
    assert rv_leq(r, r) and rv_leq(rv_const(CANTOR, "bot", C), r)
    a = StepRV(CANTOR, 1, [BOT, iv(0, 1)], R)
    b = StepRV(CANTOR, 1, [iv(0, 1), iv("1/4", "1/2")], R)
    assert rv_way_below(a, b)
    edge = StepRV(UOPEN, 2, ["c1", "bot", "bot", "bot"], C)
    assert not rv_way_below(edge, rv_const(UOPEN, "c3", C))
    with pytest.raises(Unsupported):
        rv_way_below(rv_const(SpaceKind.CANTOR_ZERO, "bot", C), rv_const(SpaceKind.CANTOR_ZERO, "bot", C))


def test_unit_way_below_needs_neighbours():
    b = StepRV(UOPEN, 2, ["bot", "c1", "bot", "bot"], C)
    s_ok = StepRV(UOPEN, 2, ["c1", "c1", "c1", "bot"], C)
    s_bad = StepRV(UOPEN, 2, ["bot", "c1", "c1", "bot"], C)
    assert rv_way_below(b, s_ok) and not rv_way_below(b, s_bad)
    assert rv_way_below(StepRV(CANTOR, 2, ["bot", "c1", "bot", "bot"], C), StepRV(CANTOR, 2, ["bot", "c1", "bot", "bot"], C))


def test_equiv_examples():
    r = StepRV(CANTOR, 1, ["c1", "c2"], C)
    assert rv_equiv(r, StepRV(CANTOR, 1, ["c2", "c1"], C))
    assert not rv_equiv(StepRV(CANTOR, 1, ["c1", "bot"], C), rv_const(CANTOR, "c1", C))
    assert rv_equiv(r, StepRV(UCLOSED, 1, ["c1", "c2"], C))


def test_refine_up_examples():
    r1 = StepRV(CANTOR, 2, ["c1", "bot", "c2", "c1"], C)
    r2 = rv_refine_up(r1, rv_T(r1))
    assert rv_equiv(r1, r2) and rv_leq(r1, r2)
    target = V(C, "1/2*delta(c2) + 1/2*delta(bot)")
    r2 = rv_refine_up(rv_const(UCLOSED, "bot", C), target)
    assert rv_T(r2) == target and r2.depth >= 1
    with pytest.raises(PreconditionFailed):
        rv_refine_up(rv_const(CANTOR, "c2", C), SimpleValuation.point(C, "c1"))


def test_restrict_down_examples():
    r2 = StepRV(CANTOR, 2, ["c1", "bot", "c3", "c2"], C)
    r1, flow = rv_restrict_down(r2, SimpleValuation.point(C, "bot"))
    assert r1 == rv_const(CANTOR, "bot", C)
    assert sorted(flow.entries.values()) == [Dyadic(1, 2)] * 4
    r1, flow = rv_restrict_down(r2, rv_T(r2))
    assert r1 == r2
    a2 = rv_T(r2)
    assert all(a2.atoms[i][1] == a2.atoms[j][1] for i, j in flow.entries)


def test_chain_examples():
    a = V(C, "1/2*delta(c1) + 1/2*delta(bot)")
    (r,) = rv_chain_from_valuations([a], CANTOR)
    assert rv_T(r) == a
    with pytest.raises(ChainNotIncreasing):
        rv_chain_from_valuations([a, SimpleValuation.point(C, "bot")], CANTOR)


def test_chain_on_four_element_poset():
    rng = random.Random(5)
    D = DIAMOND
    alphas = [SimpleValuation.point(D, "bot")]
    for _ in range(4):
        alphas.append(refine(rng, alphas[-1], 2))
    rs = rv_chain_from_valuations(alphas, UCLOSED)
    assert [rv_T(r) for r in rs] == alphas
    assert all(rv_leq(x, y) for x, y in zip(rs, rs[1:]))


def test_chain_of_uniform_refinements_is_identity_like():
    from domprob.valuation import uniform_unit_valuation

    alphas = [uniform_unit_valuation(k) for k in range(1, 5)]
    rs = rv_chain_from_valuations(alphas, UCLOSED)
    for k, r in enumerate(rs, start=1):
        assert rv_T(r) == alphas[k - 1] and r.depth == k
        assert sorted(r.cells, key=lambda c: c.lo) == sorted(alphas[k - 1].elems, key=lambda c: c.lo)
    assert all(rv_leq(x, y) for x, y in zip(rs, rs[1:]))


def test_approx_degree_examples():
    r = StepRV(CANTOR, 1, [iv(0, 1), iv(2, 3)], R)
    assert rv_approx_degree(r, 1) == r
    assert rv_approx_degree(r, 0) == rv_const(CANTOR, iv(0, 3), R)


def test_member_q_open_examples():
    r = StepRV(CANTOR, 1, ["c2", "bot"], C)
    assert rv_member_q_open(r, Dyadic(1, 2), ["c1"])
    assert not rv_member_q_open(r, Dyadic(1, 1), ["c1"])
    assert not rv_member_q_open(rv_const(CANTOR, "bot", C), 0, ["c1"])
    assert not rv_member_q_open(rv_const(CANTOR, "c3", C), 1, ["bot"])
    assert rv_member_q_open(rv_const(CANTOR, "bot", C), 0, ["bot"])


def test_precompose_examples():
    r = StepRV(CANTOR, 2, ["c1", "c2", "c3", "bot"], C)
    assert rv_precompose(r, None) == r
    swapped = rv_precompose(r, ("perm", [1, 0]))
    assert swapped.cells == ("c1", "c3", "c2", "bot")
    assert rv_T(swapped) == rv_T(r)
    h1 = rv_precompose(r, PairingDescriptor("interleave", "h1"))
    assert h1.depth <= 4 and rv_equiv(h1, r)
    assert rv_eval(h1, "1101") == rv_eval(r, "10")


def test_witness_examples():
    r = StepRV(CANTOR, 2, ["c1", "c2", "c3", "bot"], C)
    assert rv_equiv_witness(r, r) == [0, 1, 2, 3]
    a = StepRV(CANTOR, 1, ["c1", "c2"], C)
    b = StepRV(CANTOR, 1, ["c2", "c1"], C)
    assert rv_equiv_witness(a, b) == [1, 0]
    with pytest.raises(NotEquivalent):
        rv_equiv_witness(a, rv_const(CANTOR, "c1", C))


def test_json_round_trip():
    r = StepRV(UOPEN, 2, [BOT, iv(0, 1), iv("1/4", "1/2"), BOT], R)
    assert StepRV.from_json(r.to_json()) == r
    s = StepRV(CANTOR, 1, ["c1", "c2"], C)
    assert StepRV.from_json(s.to_json()) == s


# ---------------------------------------------------------------------------
# properties over generated instances


def test_T_is_monotone():
    rng = random.Random(21)
    for _ in range(300):
        D = random_poset(rng, 5)
        r = rand_rv(rng, rng.choice([CANTOR, UCLOSED]), D, rng.randint(0, 3))
        s = StepRV(r.space, r.depth, [rng.choice([x for x in D.elements if D.below(c, x)]) for c in r.cells], D)
        assert rv_leq(r, s)
        assert val_leq(rv_T(r), rv_T(s))[0]


def test_T_preserves_way_below_on_open_interval():
    rng = random.Random(22)
    hits = 0
    for _ in range(400):
        D = random_poset(rng, 5)
        s = rand_rv(rng, UOPEN, D, rng.randint(1, 3))
        n = s.depth + rng.randint(0, 1)
        cs = s.cells_at(n)
        cells = []
        for i in range(len(cs)):
            if i in (0, len(cs) - 1) or rng.random() < 0.4:
                cells.append(D.bottom)
                continue
            nb = D.inf([cs[j] for j in (i - 1, i, i + 1) if 0 <= j < len(cs)])
            cells.append(rng.choice(sorted(D.down[nb])))
        b = StepRV(UOPEN, n, cells, D)
        if rv_way_below(b, s):
            hits += 1
            assert val_way_below(rv_T(b), rv_T(s))[0]
    assert hits > 300


def test_way_above_lift_on_chains():
    rng = random.Random(23)
    done = 0
    for _ in range(200):
        D = chain_poset(rng.randint(1, 4))
        depth = rng.randint(2, 3)
        cells = [D.bottom] + [rng.choice(D.elements) for _ in range((1 << depth) - 2)] + [D.bottom]
        b = StepRV(UOPEN, depth, cells, D)
        alpha = refine(rng, rv_T(b), 3)
        if not val_way_below(rv_T(b), alpha)[0]:
            continue
        r = rv_way_above(b, alpha)
        assert rv_way_below(b, r) and rv_T(r) == alpha
        done += 1
    assert done > 50


def _arrangements(alpha, depth):
    n = 1 << depth
    counts = [(e, int(w.to_fraction() * n)) for w, e in alpha.atoms]
    def rec(cells, rest):
        if not rest:
            yield list(cells)
            return
        (e, k), more = rest[0], rest[1:]
        free = [i for i, c in enumerate(cells) if c is None]
        for pos in combinations(free, k):
            nxt = list(cells)
            for i in pos:
                nxt[i] = e
            yield from rec(nxt, more)
    yield from rec([None] * n, counts)


def test_way_above_lift_fails_across_incomparable_neighbours():
    # (bot, a, b, bot): the point 1/2 needs a value above both a and b
    b = StepRV(UOPEN, 2, ["bot", "a", "b", "bot"], DIAMOND)
    alpha = V(DIAMOND, "1/2*delta(a) + 1/2*delta(b)")
    assert val_way_below(rv_T(b), alpha)[0]
    for depth in range(2, 5):
        for cells in _arrangements(alpha, depth):
            assert not rv_way_below(b, StepRV(UOPEN, depth, cells, DIAMOND, normalize=False))
    with pytest.raises(DepthOverflow):
        rv_way_above(b, alpha, max_depth=8)
    fork = StepRV(UOPEN, 2, ["bot", "c1", "c2", "bot"], FORK)
    with pytest.raises(UnboundedJoin):
        rv_way_above(fork, V(FORK, "1/2*delta(c1) + 1/2*delta(c2)"))


def test_refine_up_round_trip():
    rng = random.Random(24)
    for _ in range(200):
        D = random_poset(rng, 5)
        r = rand_rv(rng, rng.choice([CANTOR, UCLOSED, UOPEN]), D, rng.randint(0, 3))
        alpha = refine(rng, rv_T(r), 3)
        r2 = rv_refine_up(r, alpha)
        assert rv_T(r2) == alpha and rv_leq(r, r2)
        beta = random_valuation(rng, D, 3, 3)
        if val_leq(beta, rv_T(r))[0]:
            r1, flow = rv_restrict_down(r, beta)
            assert rv_T(r1) == beta and rv_leq(r1, r)
            assert flow.validate(beta, rv_T(r), D.below)


def test_approx_degree_chain():
    rng = random.Random(25)
    for _ in range(100):
        r = rand_rv(rng, rng.choice([CANTOR, UCLOSED]), R, rng.randint(0, 4), R.basis(1))
        approx = [rv_approx_degree(r, n) for n in range(r.depth + 1)]
        assert approx[-1] == r
        for x, y in zip(approx, approx[1:]):
            assert rv_leq(x, y) and val_leq(rv_T(x), rv_T(y))[0]


def test_equiv_is_an_equivalence_and_witness_validates():
    rng = random.Random(26)
    for _ in range(200):
        r = rand_rv(rng, CANTOR, C, rng.randint(0, 3))
        perm = list(range(r.depth + 1))
        rng.shuffle(perm)
        s = rv_precompose(r, ("perm", perm))
        t = rv_precompose(s, ("perm", perm))
        assert rv_equiv(r, r) and rv_equiv(r, s) and rv_equiv(s, r) and rv_equiv(r, t)
        sigma = rv_equiv_witness(r, s)
        assert apply_witness(s, sigma) == StepRV(CANTOR, max(r.depth, s.depth), r.cells_at(max(r.depth, s.depth)), C)
