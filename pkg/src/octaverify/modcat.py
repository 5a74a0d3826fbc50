"""The exact category of finitely generated Z/p^m-modules.

Objects are multiplicity vectors (a_0, ..., a_m) standing for the direct sum of
a_i copies of Z/p^i, summands listed by ascending exponent.  A morphism is an
integer matrix whose rows index source summands and columns index target
summands; elements are row vectors, so ``compose(f, g)`` (first f, then g) is
the matrix product F @ G.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import ContractError, EnumerationTooLarge, InternalConsistencyError
from .exact import IntMatrix, abelian_image_order, smith_normal_form, valuation

DEFAULT_MAX_ENUM = 10**7
MODULUS_CAP = 2**31
# "both" mode only walks elements when the middle object is at most this large
CROSS_CHECK_CAP = 2**12


def _default_max_enum() -> int:
    return int(os.environ.get("OCTA_MAX_ENUM", DEFAULT_MAX_ENUM))


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


@dataclass(frozen=True)
class Context:
    p: int
    m: int
    max_enum: int = field(default_factory=_default_max_enum, compare=False)

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ContractError(f"p = {self.p} is not prime")
        if self.m < 0:
            raise ContractError(f"m = {self.m} must be nonnegative")
        if self.p**self.m > MODULUS_CAP:
            raise ContractError(f"p^m = {self.p}^{self.m} exceeds 2^31")

    @property
    def modulus(self) -> int:
        return self.p**self.m

    def obj(self, *exponents: int) -> "FpObject":
        return FpObject.from_exponents(self.m, exponents)

    def zero_object(self) -> "FpObject":
        return FpObject.zero(self.m)


@dataclass(frozen=True)
class FpObject:
    mult: tuple[int, ...]

    def __post_init__(self):
        if not self.mult or any(a < 0 for a in self.mult):
            raise ContractError(f"bad multiplicity vector {self.mult}")

    @classmethod
    def from_exponents(cls, m: int, exponents: Sequence[int]) -> "FpObject":
        mult = [0] * (m + 1)
        for e in exponents:
            if not 0 <= e <= m:
                raise ContractError(f"exponent {e} outside [0, {m}]")
            mult[e] += 1
        return cls(tuple(mult))

    @classmethod
    def zero(cls, m: int) -> "FpObject":
        return cls((0,) * (m + 1))

    @property
    def m(self) -> int:
        return len(self.mult) - 1

    @property
    def exponents(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.mult) for _ in range(a))

    @property
    def rank(self) -> int:
        return sum(self.mult)

    def order(self, p: int) -> int:
        return p ** sum(self.exponents)

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.mult[1:])

    def __str__(self):
        if not self.rank:
            return "0"
        return "+".join(f"Z/p^{e}" for e in self.exponents)


def sum_layout(objects: Sequence[FpObject]) -> tuple[FpObject, list[list[int]]]:
    """Direct sum in canonical order plus, per summand object, where its summands land.

    Summands of equal exponent keep the order in which the objects are given.
    """
    if not objects:
        raise ContractError("empty direct sum")
    m = objects[0].m
    tagged = [(e, k, s) for k, X in enumerate(objects) for s, e in enumerate(X.exponents)]
    order = sorted(range(len(tagged)), key=lambda i: (tagged[i][0], tagged[i][1], tagged[i][2]))
    slots: list[list[int]] = [[0] * X.rank for X in objects]
    for pos, i in enumerate(order):
        _, k, s = tagged[i]
        slots[k][s] = pos
    return FpObject.from_exponents(m, [t[0] for t in tagged]), slots


@dataclass(frozen=True)
class EMorphism:
    ctx: Context
    source: FpObject
    target: FpObject
    matrix: IntMatrix

    def __post_init__(self):
        src, tgt, M = self.source.exponents, self.target.exponents, self.matrix
        if M.shape != (len(src), len(tgt)):
            raise ContractError(f"matrix shape {M.shape} does not fit {self.source} -> {self.target}")
        p = self.ctx.p
        for r, e in enumerate(src):
            for c, f in enumerate(tgt):
                a = M[r, c]
                if not 0 <= a < p**f:
                    raise ContractError(f"entry ({r},{c}) = {a} not reduced mod p^{f}")
                if a % p ** max(0, f - e):
                    raise ContractError(
                        f"entry ({r},{c}) = {a}: Z/p^{e} -> Z/p^{f} needs divisibility by p^{f - e}"
                    )

    @classmethod
    def make(cls, ctx: Context, source: FpObject, target: FpObject, rows) -> "EMorphism":
        """Build from any integer representatives; entries are reduced on the way in."""
        tgt = target.exponents
        if isinstance(rows, IntMatrix):
            rows = rows.tolist()
        rows = [list(r) for r in rows]
        if source.rank == 0:
            rows = []
        red = [[int(a) % ctx.p**f for a, f in zip(r, tgt)] for r in rows]
        for r in rows:
            if len(r) != len(tgt):
                raise ContractError(f"row {r} does not fit target {target}")
        return cls(ctx, source, target, IntMatrix.from_rows(red, len(tgt)))

    def then(self, other: "EMorphism") -> "EMorphism":
        return compose(self, other)

    def __add__(self, other: "EMorphism") -> "EMorphism":
        return add(self, other)

    def __neg__(self) -> "EMorphism":
        return negate(self)

    def __sub__(self, other: "EMorphism") -> "EMorphism":
        return add(self, negate(other))

    def rows(self) -> list[list[int]]:
        return self.matrix.tolist()


def _same_ctx(f, g):
    if f.ctx != g.ctx:
        raise ContractError("morphisms live over different contexts")


def compose(f: EMorphism, g: EMorphism) -> EMorphism:
    _same_ctx(f, g)
    if f.target != g.source:
        raise ContractError(f"cannot compose {f.source}->{f.target} with {g.source}->{g.target}")
    return EMorphism.make(f.ctx, f.source, g.target, f.matrix @ g.matrix)


def add(f: EMorphism, g: EMorphism) -> EMorphism:
    _same_ctx(f, g)
    if (f.source, f.target) != (g.source, g.target):
        raise ContractError("cannot add morphisms with different source/target")
    return EMorphism.make(f.ctx, f.source, f.target, f.matrix + g.matrix)


def negate(f: EMorphism) -> EMorphism:
    return EMorphism.make(f.ctx, f.source, f.target, -f.matrix)


def identity(ctx: Context, X: FpObject) -> EMorphism:
    return EMorphism.make(ctx, X, X, IntMatrix.identity(X.rank))


def zero_morphism(ctx: Context, X: FpObject, Y: FpObject) -> EMorphism:
    return EMorphism(ctx, X, Y, IntMatrix.zeros(X.rank, Y.rank))


def _place(rows: int, cols: int, blocks) -> list[list[int]]:
    out = [[0] * cols for _ in range(rows)]
    for rslots, cslots, M in blocks:
        for i, r in enumerate(rslots):
            for j, c in enumerate(cslots):
                out[r][c] = M[i, j]
    return out


def direct_sum(f: EMorphism, g: EMorphism) -> EMorphism:
    """Block-diagonal sum f (+) g between the canonical sums of sources and targets."""
    _same_ctx(f, g)
    S, (sf, sg) = sum_layout([f.source, g.source])
    T, (tf, tg) = sum_layout([f.target, g.target])
    rows = _place(S.rank, T.rank, [(sf, tf, f.matrix), (sg, tg, g.matrix)])
    return EMorphism.make(f.ctx, S, T, rows)


def to_sum(ctx: Context, source: FpObject, maps: Sequence[EMorphism]) -> EMorphism:
    """The map source -> (+)_k target_k with components ``maps``."""
    T, slots = sum_layout([f.target for f in maps])
    all_rows = list(range(source.rank))
    rows = _place(source.rank, T.rank, [(all_rows, s, f.matrix) for s, f in zip(slots, maps)])
    return EMorphism.make(ctx, source, T, rows)


def from_sum(ctx: Context, maps: Sequence[EMorphism], target: FpObject) -> EMorphism:
    """The map (+)_k source_k -> target with components ``maps``."""
    S, slots = sum_layout([f.source for f in maps])
    all_cols = list(range(target.rank))
    rows = _place(S.rank, target.rank, [(s, all_cols, f.matrix) for s, f in zip(slots, maps)])
    return EMorphism.make(ctx, S, target, rows)


def hom_size(ctx: Context, X: FpObject, Y: FpObject) -> int:
    return math.prod(ctx.p ** min(e, f) for e in X.exponents for f in Y.exponents)


def hom_enumerate(ctx: Context, X: FpObject, Y: FpObject) -> Iterator[EMorphism]:
    """Every E-morphism X -> Y exactly once, in lexicographic order of entries."""
    size = hom_size(ctx, X, Y)
    if size > ctx.max_enum:
        raise EnumerationTooLarge(f"Hom({X}, {Y})", size, ctx.max_enum)
    p = ctx.p
    ranges = [
        range(0, p**f, p ** max(0, f - e)) for e in X.exponents for f in Y.exponents
    ]
    ncols = Y.rank
    for vals in itertools.product(*ranges):
        rows = [vals[i * ncols:(i + 1) * ncols] for i in range(X.rank)]
        yield EMorphism(ctx, X, Y, IntMatrix.from_rows(rows, ncols))


# --- element counting: SNF path and brute-force path -------------------------------


def _image_order_snf(f: EMorphism) -> int:
    p = f.ctx.p
    return abelian_image_order(f.rows(), [p**e for e in f.target.exponents])


def _enumerate_elements(ctx: Context, X: FpObject, what: str):
    size = X.order(ctx.p)
    if size > ctx.max_enum:
        raise EnumerationTooLarge(what, size, ctx.max_enum)
    return itertools.product(*[range(ctx.p**e) for e in X.exponents])


def _images_by_enumeration(f: EMorphism) -> tuple[int, int]:
    """(kernel order, image order) of f by walking every element of the source."""
    p = f.ctx.p
    mods = [p**e for e in f.target.exponents]
    cols = list(zip(*f.matrix.entries)) if f.source.rank else [()] * f.target.rank
    kernel = 0
    image = set()
    for x in _enumerate_elements(f.ctx, f.source, f"elements of {f.source}"):
        y = tuple(sum(a * b for a, b in zip(x, col)) % q for col, q in zip(cols, mods))
        image.add(y)
        if not any(y):
            kernel += 1
    return kernel, len(image)


def image_size(f: EMorphism, method: str = "snf") -> int:
    if method == "snf":
        return _image_order_snf(f)
    if method == "enum":
        return _images_by_enumeration(f)[1]
    raise ContractError(f"unknown method {method!r}")


def kernel_size(f: EMorphism, method: str = "snf") -> int:
    if method == "snf":
        return f.source.order(f.ctx.p) // _image_order_snf(f)
    if method == "enum":
        return _images_by_enumeration(f)[0]
    raise ContractError(f"unknown method {method!r}")


def is_injective(f: EMorphism) -> bool:
    return image_size(f) == f.source.order(f.ctx.p)


def is_surjective(f: EMorphism) -> bool:
    return image_size(f) == f.target.order(f.ctx.p)


def _exact_via(f: EMorphism, g: EMorphism, method: str) -> bool:
    p = f.ctx.p
    if any(any(r) for r in compose(f, g).rows()):
        return False
    im_f = image_size(f, method)
    return (
        im_f == f.source.order(p)
        and image_size(g, method) == g.target.order(p)
        and im_f == kernel_size(g, method)
    )


def is_exact(f: EMorphism, g: EMorphism, method: str = "both") -> bool:
    """Whether 0 -> X -f-> Y -g-> Z -> 0 is short exact.

    ``method="both"`` runs the SNF computation and, when the middle object has
    at most ``CROSS_CHECK_CAP`` elements, the element-enumeration oracle; the
    two must agree.
    """
    _same_ctx(f, g)
    if f.target != g.source:
        raise ContractError("is_exact: target of f differs from source of g")
    if method in ("snf", "enum"):
        return _exact_via(f, g, method)
    if method != "both":
        raise ContractError(f"unknown method {method!r}")
    fast = _exact_via(f, g, "snf")
    if f.target.order(f.ctx.p) > CROSS_CHECK_CAP:
        return fast
    try:
        slow = _exact_via(f, g, "enum")
    except EnumerationTooLarge:
        return fast
    if fast != slow:
        raise InternalConsistencyError(f"exactness paths disagree: snf={fast}, enum={slow}")
    return fast


# --- bijectives, distinguished sequences, cokernels -------------------------------


def is_bijective(X: FpObject) -> bool:
    return all(a == 0 for a in X.mult[1:-1])


def shift_object(X: FpObject) -> FpObject:
    return FpObject(tuple(reversed(X.mult)))


def distinguished_ses(ctx: Context, X: FpObject):
    """The chosen sequence X >-> B ->> X^{+1}; returns (mono, B, epi, X^{+1}).

    Summand i of X (exponent e) goes to copy i of Z/p^m by p^{m-e}; copy i of B
    maps onto the summand of X^{+1} at the mirrored index.
    """
    N = X.rank
    m = ctx.m
    B = FpObject.from_exponents(m, [m] * N)
    Xs = shift_object(X)
    mono = EMorphism.make(
        ctx, X, B, [[ctx.p ** (m - e) if i == j else 0 for j in range(N)] for i, e in enumerate(X.exponents)]
    )
    epi = EMorphism.make(ctx, B, Xs, [[int(j == N - 1 - i) for j in range(N)] for i in range(N)])
    return mono, B, epi, Xs


def cokernel(f: EMorphism) -> tuple[FpObject, EMorphism]:
    """Q = coker f in canonical form together with the projection target(f) ->> Q."""
    ctx = f.ctx
    p = ctx.p
    tgt = f.target.exponents
    pres = f.rows() + [[p**e if i == j else 0 for j in range(len(tgt))] for i, e in enumerate(tgt)]
    snf = smith_normal_form(IntMatrix.from_rows(pres, len(tgt)))
    d = snf.D.diagonal()
    keep = [i for i, x in enumerate(d) if x != 1]
    exps = []
    for i in keep:
        v = valuation(d[i], p)
        if p**v != d[i]:
            raise InternalConsistencyError(f"cokernel invariant {d[i]} is not a power of {p}")
        exps.append(v)
    Q = FpObject.from_exponents(ctx.m, exps)
    if list(Q.exponents) != exps:
        raise InternalConsistencyError("SNF invariants out of divisibility order")
    V = snf.V
    proj = EMorphism.make(ctx, f.target, Q, [[V[r, i] for i in keep] for r in range(len(tgt))])
    return Q, proj


# --- quadrangles --------------------------------------------------------------------


@dataclass(frozen=True)
class Quadrangle:
    """Corners A, B, C, D with b: A->B, c: A->C, d: B->D, e: C->D."""

    b: object
    c: object
    d: object
    e: object

    @property
    def A(self):
        return self.b.source

    @property
    def B(self):
        return self.b.target

    @property
    def C(self):
        return self.c.target

    @property
    def D(self):
        return self.d.target

    def diagonal(self):
        """(b, c): A -> B(+)C and (d, -e)^T: B(+)C -> D, built with the same layout."""
        from . import stable

        if isinstance(self.b, EMorphism):
            ctx = self.b.ctx
            first = to_sum(ctx, self.A, [self.b, self.c])
            second = from_sum(ctx, [self.d, negate(self.e)], self.D)
            return first, second
        return stable.to_sum([self.b, self.c]), stable.from_sum([self.d, -self.e])


def is_pure_square(q: Quadrangle) -> bool:
    if compose(q.b, q.d) != compose(q.c, q.e):
        raise ContractError("is_pure_square: quadrangle does not commute")
    first, second = q.diagonal()
    return is_exact(first, second)


# --- lifting problems ----------------------------------------------------------------


def solve_right_factor(a: EMorphism, f: EMorphism) -> EMorphism | None:
    """Some g: target(a) -> target(f) with a.g == f exactly, or None."""
    _same_ctx(a, f)
    if a.source != f.source:
        raise ContractError("solve_right_factor: a and f must share their source")
    from .linsys import CongruenceSystem

    sys_ = CongruenceSystem(a.ctx)
    g = sys_.unknown(a.target.exponents, f.target.exponents)
    sys_.equation([(a.matrix, g, None)], f.rows(), f.target.exponents)
    sol = sys_.solve()
    if sol is None:
        return None
    return EMorphism.make(a.ctx, a.target, f.target, sol[0])


def extend_along_mono(mono: EMorphism, f: EMorphism) -> EMorphism:
    """Extend f: A -> B along the pure mono A >-> C; B must be bijective."""
    if not is_bijective(f.target):
        raise ContractError(f"extend_along_mono: target {f.target} is not bijective")
    if mono.source != f.source:
        raise ContractError("extend_along_mono: mono and f must share their source")
    if not is_injective(mono):
        raise ContractError("extend_along_mono: first map is not injective")
    g = solve_right_factor(mono, f)
    if g is None:
        raise InternalConsistencyError("no extension into a bijective object was found")
    return g
