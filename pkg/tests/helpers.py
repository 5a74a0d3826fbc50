"""Random objects and morphisms shared by the property suites."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from octaverify.modcat import Context, EMorphism, FpObject


def random_object(rng: random.Random, m: int, max_rank: int = 2, lo: int = 1, hi: int | None = None) -> FpObject:
    hi = m - 1 if hi is None else hi
    k = rng.randint(1, max_rank)
    return FpObject.from_exponents(m, [rng.randint(lo, hi) for _ in range(k)])


def random_morphism(rng: random.Random, ctx: Context, X: FpObject, Y: FpObject) -> EMorphism:
    p = ctx.p
    rows = [
        [p ** max(0, f - e) * rng.randrange(p ** min(e, f)) for f in Y.exponents]
        for e in X.exponents
    ]
    return EMorphism.make(ctx, X, Y, rows)


@st.composite
def objects(draw, m: int, max_rank: int = 2, lo: int = 1, hi: int | None = None):
    hi = m - 1 if hi is None else hi
    exps = draw(st.lists(st.integers(lo, hi), min_size=1, max_size=max_rank))
    return FpObject.from_exponents(m, exps)


@st.composite
def morphisms(draw, ctx: Context, X: FpObject, Y: FpObject):
    p = ctx.p
    rows = [
        [p ** max(0, f - e) * draw(st.integers(0, p ** min(e, f) - 1)) for f in Y.exponents]
        for e in X.exponents
    ]
    return EMorphism.make(ctx, X, Y, rows)
