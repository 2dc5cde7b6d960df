import random
from fractions import Fraction

import mpmath
import pytest

from oracles import bits_value, copy_point, encloses, normal_at, piecewise_cdf, random_word
from domprob.domain import BOT, IntervalUnit
from domprob.dyadic import ONE, ZERO, Dyadic, DyInterval, dy, ival_elem
from domprob.errors import BadAlpha, BadProbability, DepthOverflow, NotPSD, ParseError
from domprob.distributions import (
    BuiltinCdf,
    PiecewiseLinearCdf,
    beta_enclosure,
    box_muller,
    chi_squared,
    cholesky_psd,
    dirichlet,
    identity_rv,
    iid_copies,
    mvn,
    parse_cdf,
    quantile_envelope,
    rv_quantile,
    student_t,
)
from domprob.pairing import PairingDescriptor, hilbert_cell
from domprob.randvar import StepRV, rv_equiv, rv_eval, rv_precompose, rv_T
from domprob.sample_space import SpaceKind

CANTOR = SpaceKind.CANTOR
U = IntervalUnit()


def iv(a, b):
    return DyInterval(dy(a), dy(b))


def mp(d):
    return mpmath.mpf(d.m) / mpmath.mpf(2) ** d.e


# ---------------------------------------------------------------------------
# quantiles


def grid_quantiles(breaks, step_exp=8, lo=-4, hi=4):
    """``p -> (sup{x : F(x) < p}, sup{x : F(x) <= p})`` over a fine grid."""
    F = piecewise_cdf(breaks)
    grid = [Fraction(k, 1 << step_exp) for k in range(lo << step_exp, (hi << step_exp) + 1)]
    values = [F(x) for x in grid]

    def scan(p):
        below = max(x for x, v in zip(grid, values) if v < p)
        at_most = max(x for x, v in zip(grid, values) if v <= p)
        return below, at_most

    return scan


def test_uniform_quantile_is_identity():
    F = BuiltinCdf("uniform")
    for k in range(1, 16):
        p = Dyadic(k, 4)
        assert quantile_envelope(F, p, 10) == DyInterval(p, p)


def test_flat_stretch_and_jump():
    flat = parse_cdf("0:0, 1:1/2, 2:1/2, 3:1")
    assert quantile_envelope(flat, Dyadic(1, 1), 12).contains(iv(1, 2))
    jump = parse_cdf("0:0, 0:1")
    for k in range(1, 8):
        assert quantile_envelope(jump, Dyadic(k, 3), 12) == DyInterval(ZERO, ZERO)
    with pytest.raises(BadProbability):
        quantile_envelope(jump, ONE, 8)
    with pytest.raises(ParseError):
        parse_cdf("0:0, 1:1/2")
    with pytest.raises(ParseError):
        parse_cdf("gamma(2)")


def test_piecewise_quantile_matches_grid_scan():
    rng = random.Random(41)
    for _ in range(40):
        xs = sorted(Fraction(rng.randint(-12, 12), 4) for _ in range(rng.randint(1, 4)))
        fs = sorted(Fraction(rng.randint(0, 8), 8) for _ in range(len(xs) - 1)) + [Fraction(1)]
        breaks = list(zip(xs, fs))
        F = PiecewiseLinearCdf(tuple((Dyadic.from_fraction(x), Dyadic.from_fraction(f)) for x, f in breaks))
        scan = grid_quantiles(breaks)
        for k in range(1, 16):
            env = quantile_envelope(F, Dyadic(k, 4), 8)
            x1, x2 = scan(Fraction(k, 16))
            step = Fraction(1, 256)
            assert env.lo.to_fraction() <= x1 + step and x1 <= env.lo.to_fraction() + step
            assert env.hi.to_fraction() >= x2 and env.hi.to_fraction() <= x2 + 2 * step


def test_builtin_quantiles_match_mpmath():
    E = BuiltinCdf("exponential", Dyadic(2))
    N = BuiltinCdf("stdnormal")
    for k in range(1, 16):
        p = Dyadic(k, 4)
        e = quantile_envelope(E, p, 20)
        assert encloses(e, -mpmath.log(1 - mp(p)) / 2) and e.width() <= Dyadic(1, 19)
        n = quantile_envelope(N, p, 20)
        assert encloses(n, mpmath.sqrt(2) * mpmath.erfinv(2 * mp(p) - 1)) and n.width() <= Dyadic(1, 19)


def test_rv_quantile_examples():
    r = rv_quantile(BuiltinCdf("uniform"), 3, 10)
    assert r.cells == tuple(DyInterval(Dyadic(i, 3), Dyadic(i + 1, 3)) for i in range(8))
    ex = rv_quantile(BuiltinCdf("exponential"), 4, 16)
    p = 1 - mpmath.exp(-1)
    cell = ex.cells[int(p * 16)]
    assert cell.contains(ONE)
    assert ex.cells[-1] is BOT and ex.cells[0].lo == ZERO
    nrm = rv_quantile(BuiltinCdf("stdnormal"), 3, 12)
    assert nrm.cells[0] is BOT and nrm.cells[-1] is BOT


def test_rv_quantile_bin_masses():
    F = parse_cdf("0:0, 1:1/4, 2:1")
    for depth in (3, 4, 6):
        r = rv_quantile(F, depth, 16)
        T = rv_T(r)
        inside = lambda a, b: sum((w for w, c in T.atoms if c is not BOT and a <= c.lo and c.hi <= b), ZERO)
        assert inside(0, 1) == Dyadic(1, 2)
        assert inside(1, 2) == Dyadic(3, 2)
        assert inside(0, 2) == ONE


# ---------------------------------------------------------------------------
# normals and friends


def test_box_muller_cell_example():
    z1, z2 = box_muller(2, 20)
    # u1 in [1/4, 1/2] (even bits 01), u2 in [0, 1/4] (odd bits 00): word 0010
    want = ival_elem("sqrt", ival_elem("ln", iv("1/4", "1/2"), 20).scale(Dyadic(-2)), 20) * ival_elem(
        "cos2pi", iv(0, "1/4"), 20
    )
    assert rv_eval(z1, "0010") == want
    # the radius is unbounded on the cell touching 0
    assert rv_eval(z1, "0000") is BOT and rv_eval(z1, "0100") is BOT
    assert rv_eval(z2, "1000") is BOT and rv_eval(z2, "1010") is BOT
    assert rv_eval(z2, "0100") is not BOT


def test_box_muller_symmetric_law():
    for k in (2, 3):
        z1, z2 = box_muller(k, 16)
        for z in (z1, z2):
            flipped = StepRV(z.space, z.depth, [c if c is BOT else -c for c in z.cells], z.codomain)
            assert rv_T(flipped) == rv_T(z)
        assert rv_equiv(z1, z2)


def test_box_muller_encloses_points_cantor():
    rng = random.Random(42)
    z1, z2 = box_muller(3, 24)
    for _ in range(200):
        w = random_word(rng, 160)
        u1, u2 = bits_value(w[0::2]), bits_value(w[1::2])
        r = mpmath.sqrt(-2 * mpmath.log(u1))
        assert encloses(rv_eval(z1, w), r * mpmath.cos(2 * mpmath.pi * u2))
        assert encloses(rv_eval(z2, w), mpmath.sqrt(-2 * mpmath.log(u2)) * mpmath.cos(2 * mpmath.pi * u1))


def test_box_muller_encloses_points_hilbert():
    rng = random.Random(43)
    k = 3
    z1, _ = box_muller(k, 24, SpaceKind.UNIT_CLOSED)
    for _ in range(200):
        i = rng.randrange(1 << (2 * k))
        w = format(i, f"0{2 * k}b")
        quat = "".join(str(2 * int(w[j]) + int(w[j + 1])) for j in range(0, 2 * k, 2))
        x, y = hilbert_cell(quat)
        u1 = mp(x.lo) + (mp(x.hi) - mp(x.lo)) * mpmath.mpf(rng.random())
        u2 = mp(y.lo) + (mp(y.hi) - mp(y.lo)) * mpmath.mpf(rng.random())
        cell = z1.cells_at(2 * k)[i]
        assert encloses(cell, mpmath.sqrt(-2 * mpmath.log(u1)) * mpmath.cos(2 * mpmath.pi * u2))


def test_iid_copies_examples():
    r = identity_rv(CANTOR, 2)
    (c,) = iid_copies(r, 1)
    assert c == rv_precompose(r, PairingDescriptor("interleave", "h1"))
    with pytest.raises(DepthOverflow):
        iid_copies(identity_rv(CANTOR, 4), 64)


@pytest.mark.parametrize("space", [CANTOR, SpaceKind.UNIT_CLOSED])
def test_iid_copies_are_independent(space):
    r = identity_rv(space, 2)
    cs = iid_copies(r, 4)
    N = max(c.depth for c in cs)
    cols = [c.cells_at(N) for c in cs]
    for c in cs:
        assert rv_equiv(c, r)
    vals = r.cells
    for a in range(4):
        for b in range(a + 1, 4):
            for A in vals:
                for B in vals:
                    joint = sum(1 for x, y in zip(cols[a], cols[b]) if x == A and y == B)
                    pa = sum(1 for x in cols[a] if x == A)
                    pb = sum(1 for y in cols[b] if y == B)
                    assert joint * (1 << N) == pa * pb


def test_chi_squared_and_t_enclose_points():
    rng = random.Random(44)
    chi = chi_squared(2, 2, 20)
    t = student_t(1, 3, 20)
    for _ in range(150):
        w = random_word(rng, 400)
        zs = [normal_at(copy_point(w, j, 2)) for j in range(2)]
        assert encloses(rv_eval(chi, w), zs[0] ** 2 + zs[1] ** 2)
        assert encloses(rv_eval(t, w), zs[1] / mpmath.sqrt(zs[0] ** 2))


def test_chi_squared_one_and_bottom_propagation():
    chi = chi_squared(1, 2, 16)
    z = iid_copies(box_muller(2, 16)[0], 1)[0]
    N = max(chi.depth, z.depth)
    for a, b in zip(chi.cells_at(N), z.cells_at(N)):
        assert (a is BOT) == (b is BOT)
        if b is not BOT:
            assert a.lo >= ZERO and a.contains(DyInterval(ZERO, ZERO)) == b.contains(ZERO)


def test_t_central_cells_overlap_normal():
    t = student_t(1, 3, 16)
    nonbot = [c for c in t.cells if c is not BOT]
    assert nonbot and any(c.contains(ZERO) for c in nonbot)


# ---------------------------------------------------------------------------
# multivariate normal


def test_cholesky_examples():
    I = cholesky_psd([[1, 0], [0, 1]])
    assert I == [[DyInterval(ONE), DyInterval(ZERO)], [DyInterval(ZERO), DyInterval(ONE)]]
    L = cholesky_psd([[4, 2], [2, 2]])
    for (i, j), v in {(0, 0): 2, (1, 0): 1, (1, 1): 1, (0, 1): 0}.items():
        assert L[i][j].contains(v)
    L = cholesky_psd([[1, 1], [1, 1]])
    for (i, j), v in {(0, 0): 1, (1, 0): 1, (1, 1): 0}.items():
        assert L[i][j].contains(v)
    with pytest.raises(NotPSD):
        cholesky_psd([[1, 2], [2, 1]])


def test_cholesky_encloses_random_psd():
    rng = random.Random(45)
    for _ in range(200):
        k = rng.randint(1, 4)
        r = rng.randint(1, k)
        A = [[Fraction(rng.randint(-3, 3), rng.choice([1, 2])) for _ in range(r)] for _ in range(k)]
        S = [[sum(A[i][p] * A[j][p] for p in range(r)) for j in range(k)] for i in range(k)]
        Sd = [[Dyadic.parse(f"{x.numerator}/{x.denominator}") for x in row] for row in S]
        L = cholesky_psd(Sd, 40)
        for i in range(k):
            for j in range(k):
                acc = DyInterval(ZERO)
                for p in range(k):
                    acc = acc + L[i][p] * L[j][p]
                assert acc.contains(Sd[i][j]), (S, i, j)


def test_mvn_examples():
    zero = mvn([1, -2], [[0, 0], [0, 0]], 2, 16)
    assert [c.cells for c in zero] == [(DyInterval(ONE),), (DyInterval(Dyadic(-2)),)]
    comps = mvn([1, 0], [[1, 0], [0, 1]], 2, 16)
    base = iid_copies(box_muller(2, 16)[0], 2)
    assert comps[1].cells_at(comps[1].depth) == base[1].cells_at(comps[1].depth)
    shifted = [x if x is BOT else x + DyInterval(ONE) for x in base[0].cells_at(comps[0].depth)]
    assert comps[0].cells_at(comps[0].depth) == tuple(shifted)


@pytest.mark.parametrize("rho,sign", [("1/2", 1), ("-1/2", -1)])
def test_mvn_correlation_sign(rho, sign):
    x, y = mvn([0, 0], [[1, rho], [rho, 1]], 3, 16)
    N = max(x.depth, y.depth)
    mids = [
        ((a.lo + a.hi).half().to_fraction(), (b.lo + b.hi).half().to_fraction())
        for a, b in zip(x.cells_at(N), y.cells_at(N))
        if a is not BOT and b is not BOT
    ]
    cov = sum(p * q for p, q in mids) / len(mids) - (sum(p for p, _ in mids) / len(mids)) * (sum(q for _, q in mids) / len(mids))
    assert cov * sign > 0


def test_mvn_encloses_points():
    rng = random.Random(46)
    m = [dy("1/2"), dy(-1)]
    S = [[dy(2), dy("1/2")], [dy("1/2"), dy(1)]]
    comps = mvn(m, S, 2, 24)
    for _ in range(100):
        w = random_word(rng, 400)
        zs = [normal_at(copy_point(w, j, 2)) for j in range(2)]
        l00 = mpmath.sqrt(2)
        l10 = mpmath.mpf(1) / 2 / l00
        l11 = mpmath.sqrt(1 - l10 ** 2)
        assert encloses(rv_eval(comps[0], w), mp(m[0]) + l00 * zs[0])
        assert encloses(rv_eval(comps[1], w), mp(m[1]) + l10 * zs[0] + l11 * zs[1])


# ---------------------------------------------------------------------------
# Dirichlet


def test_beta_enclosure_matches_mpmath():
    for alpha in ([1, 1], [2, 3], ["1/2", "3/2"], ["1/2", "1/2", 1], [3, "5/2", 1]):
        B = beta_enclosure([dy(a) for a in alpha], 40)
        a = [mpmath.mpf(Fraction(str(x)).numerator) / Fraction(str(x)).denominator for x in alpha]
        want = mpmath.fprod(mpmath.gamma(x) for x in a) / mpmath.gamma(mpmath.fsum(a))
        assert encloses(B, want) and B.width() <= Dyadic(1, 38)
    with pytest.raises(BadAlpha):
        beta_enclosure([dy("1/4")])


def test_dirichlet_examples():
    r1 = identity_rv(CANTOR, 2)
    r2 = identity_rv(CANTOR, 2)
    B = beta_enclosure([1, 1])
    flat = dirichlet([1, 1], [r1, r2], B, 20)
    assert flat.depth == 0 and flat.cells[0] == DyInterval(ONE)
    B21 = beta_enclosure([2, 1], 30)
    d = dirichlet([2, 1], [r1, r2], B21, 30)
    cell = rv_eval(d, "01")
    assert cell.contains(DyInterval(Dyadic(1, 2), Dyadic(1, 1)).scale(Dyadic(2)))
    half = dirichlet([dy("1/2"), 1], [r1, r2], beta_enclosure(["1/2", 1]), 20)
    assert rv_eval(half, "00") is BOT and rv_eval(half, "11") is not BOT
    with pytest.raises(BadAlpha):
        dirichlet([0, 1], [r1, r2], B, 20)


def test_dirichlet_encloses_points():
    rng = random.Random(47)
    alpha = [dy("3/2"), dy("1/2"), dy(2)]
    B = beta_enclosure(alpha, 30)
    rs = iid_copies(identity_rv(CANTOR, 3), 3)
    d = dirichlet(alpha, rs, B, 30)
    Bv = mpmath.gamma(1.5) * mpmath.gamma(0.5) * mpmath.gamma(2) / mpmath.gamma(4)
    for _ in range(150):
        w = random_word(rng, 200)
        xs = [bits_value(copy_point(w, j, 3)) for j in range(3)]
        val = xs[0] ** mpmath.mpf(0.5) * xs[1] ** mpmath.mpf(-0.5) * xs[2] / Bv
        assert encloses(rv_eval(d, w), val)
