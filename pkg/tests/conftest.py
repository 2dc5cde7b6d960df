from hypothesis import settings
from hypothesis import strategies as st

from domprob.dyadic import Dyadic, DyInterval

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@st.composite
def dyadics(draw, lo=-64, hi=64, max_exp=8):
    e = draw(st.integers(0, max_exp))
    m = draw(st.integers(lo << e, hi << e))
    return Dyadic(m, e)


@st.composite
def intervals(draw, lo=-8, hi=8, max_exp=6):
    a = draw(dyadics(lo, hi, max_exp))
    b = draw(dyadics(lo, hi, max_exp))
    return DyInterval(min(a, b), max(a, b))


@st.composite
def points_in(draw, I: DyInterval, max_exp=10):
    """A dyadic point of ``I``."""
    e = max(I.lo.e, I.hi.e, draw(st.integers(0, max_exp)))
    k = draw(st.integers(I.lo.floor_at(e), I.hi.floor_at(e)))
    x = Dyadic(k, e)
    return min(max(x, I.lo), I.hi)
