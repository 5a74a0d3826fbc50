"""Periodic diagrams on the strip, stored on the fundamental triangle.

A position beta/alpha is the pair ``(beta, alpha)``.  With N = n + 1 the
fundamental triangle is F = {0 <= alpha <= beta <= N}; beta = N is written
``0+``.  The strip is alpha <= beta <= alpha + N and carries the translation

    (beta, alpha)^{+1} = (alpha + N, beta),    X at P^{+1} = (X at P)^{+1}.

On the triangle this is the flip (beta, alpha) -> (alpha + N, beta): it swaps
right steps with up steps, so a diagram on F plus the shift determines the
whole strip.  Two translations give the identity since the shift is a strict
involution on canonical forms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from . import modcat, stable
from .errors import ContractError, InternalConsistencyError, StructureError
from .modcat import Context, EMorphism, FpObject, Quadrangle, shift_object
from .stable import StableMorphism, Triangle, canonical_form, compose
from .verdict import Verdict

Pos = tuple[int, int]  # (beta, alpha)


# --- positions ---------------------------------------------------------------------


def format_pos(pos: Pos, n: int) -> str:
    N = n + 1

    def one(x):
        return "0+" if x == N else str(x)

    return f"{one(pos[0])}/{one(pos[1])}"


_POS_RE = re.compile(r"^\s*(0\+|\d+)\s*/\s*(0\+|\d+)\s*$")


def parse_pos(text: str, n: int) -> Pos:
    mt = _POS_RE.match(text)
    if not mt:
        raise ContractError(f"bad position {text!r}")
    N = n + 1
    b, a = (N if s == "0+" else int(s) for s in mt.groups())
    if not 0 <= a <= b <= N:
        raise ContractError(f"position {text!r} is outside the fundamental triangle for n={n}")
    return (b, a)


def in_strip(pos: Pos, n: int) -> bool:
    b, a = pos
    return a <= b <= a + n + 1


def in_triangle(pos: Pos, n: int) -> bool:
    b, a = pos
    return 0 <= a <= b <= n + 1


def translate(pos: Pos, n: int) -> Pos:
    b, a = pos
    return (a + n + 1, b)


def untranslate(pos: Pos, n: int) -> Pos:
    b, a = pos
    return (a, b - n - 1)


def resolve(pos: Pos, n: int) -> tuple[Pos, int]:
    """(P0, k) with P0 in the triangle and P = P0 translated k times (k may be negative)."""
    if not in_strip(pos, n):
        raise ContractError(f"{pos} violates the strip condition for n={n}")
    k = 0
    while pos[1] < 0:
        pos = translate(pos, n)
        k -= 1
    while pos[0] > n + 1:
        pos = untranslate(pos, n)
        k += 1
    return pos, k


def triangle_positions(n: int) -> list[Pos]:
    N = n + 1
    return [(b, a) for a in range(N + 1) for b in range(a, N + 1)]


def is_zero_position(pos: Pos, n: int) -> bool:
    b, a = pos
    return a == b or (b == n + 1 and a == 0)


def stored_positions(n: int) -> list[Pos]:
    """Positions j/i, 0 <= i < j <= n, carrying the free data of a periodic diagram."""
    return [(j, i) for i in range(n + 1) for j in range(i + 1, n + 1)]


def unit_steps(n: int) -> list[tuple[Pos, Pos]]:
    """All unit steps with both ends in the triangle, right steps first per position."""
    N = n + 1
    out = []
    for a in range(N + 1):
        for b in range(a, N + 1):
            if b + 1 <= N:
                out.append(((b, a), (b + 1, a)))
            if a + 1 <= b:
                out.append(((b, a), (b, a + 1)))
    return out


def unit_cells(n: int) -> list[Pos]:
    """Lower-left corners A of unit cells with all four corners in the triangle."""
    N = n + 1
    return [(b, a) for a in range(N) for b in range(a + 1, N)]


# --- diagrams ----------------------------------------------------------------------


def _lift_map(ctx, src, tgt, value) -> StableMorphism:
    if isinstance(value, StableMorphism):
        f = value
    elif isinstance(value, EMorphism):
        f = canonical_form(value)
    else:
        f = StableMorphism.make(ctx, src, tgt, value)
    if (f.source, f.target) != (src, tgt):
        raise ContractError(f"map {f.source} -> {f.target} does not fit {src} -> {tgt}")
    return f


@dataclass(frozen=True, eq=True)
class PeriodicDiagram:
    """Objects on every triangle position and stable maps on every unit step inside it."""

    ctx: Context
    n: int
    objects: Mapping[Pos, FpObject] = field(hash=False)
    maps: Mapping[tuple[Pos, Pos], StableMorphism] = field(hash=False)

    @property
    def N(self) -> int:
        return self.n + 1

    @classmethod
    def build(cls, ctx: Context, n: int, objects: Mapping[Pos, FpObject], maps: Mapping) -> "PeriodicDiagram":
        """Assemble a diagram from its free data, checking structure.

        ``objects`` must cover j/i for 0 <= i < j <= n; zero positions and the
        rightmost column may be given, in which case they are checked.  ``maps``
        is keyed by (P, Q) unit steps; maps touching a zero object and the
        column's vertical maps may be omitted.  Commutativity is not checked
        here (see ``is_periodic_pretriangle``).
        """
        if n < 0:
            raise ContractError("n must be non-negative")
        N = n + 1
        zero = ctx.zero_object()
        objs: dict[Pos, FpObject] = {}
        for pos in objects:
            if not in_triangle(pos, n):
                raise StructureError(f"object outside the triangle", position=format_pos(pos, n))
        for pos in triangle_positions(n):
            given = objects.get(pos)
            if given is not None and given.m != ctx.m:
                raise StructureError("object has the wrong number of exponents", position=format_pos(pos, n))
            if is_zero_position(pos, n):
                if given is not None and not given.is_zero():
                    raise StructureError("object must be zero here", position=format_pos(pos, n))
                objs[pos] = zero
            elif pos[0] < N:
                if given is None:
                    raise StructureError("missing object", position=format_pos(pos, n))
                objs[pos] = given
        for i in range(1, N):
            want = shift_object(objs[(i, 0)])
            given = objects.get((N, i))
            if given is not None and given != want:
                raise StructureError(
                    f"column object {given} is not the shift {want} of the bottom row",
                    position=format_pos((N, i), n),
                )
            objs[(N, i)] = want
        steps = set(unit_steps(n))
        for key in maps:
            if key not in steps:
                P, Q = key
                raise StructureError(
                    "map key is not a unit step inside the triangle",
                    position=f"{format_pos(P, n) if in_triangle(P, n) else P}->{format_pos(Q, n) if in_triangle(Q, n) else Q}",
                )
        out: dict[tuple[Pos, Pos], StableMorphism] = {}
        column_up = []
        for P, Q in unit_steps(n):
            src, tgt = objs[P], objs[Q]
            label = f"{format_pos(P, n)}->{format_pos(Q, n)}"
            given = maps.get((P, Q))
            if P[0] == N and Q[0] == N:
                column_up.append((P, Q))
                continue
            if given is None:
                if src.is_zero() or tgt.is_zero():
                    out[(P, Q)] = stable.zero(ctx, src, tgt)
                    continue
                raise StructureError("missing map", position=label)
            try:
                out[(P, Q)] = _lift_map(ctx, src, tgt, given)
            except ContractError as exc:
                raise StructureError(str(exc), position=label) from exc
        for P, Q in column_up:
            i = P[1]
            want = stable.shift_morphism(out[((i, 0), (i + 1, 0))])
            given = maps.get((P, Q))
            label = f"{format_pos(P, n)}->{format_pos(Q, n)}"
            if given is not None:
                try:
                    g = _lift_map(ctx, objs[P], objs[Q], given)
                except ContractError as exc:
                    raise StructureError(str(exc), position=label) from exc
                if g != want:
                    raise StructureError("column map is not the shift of the bottom-row map", position=label)
            out[(P, Q)] = want
        return cls(ctx, n, objs, out)

    def free_maps(self) -> dict[tuple[Pos, Pos], StableMorphism]:
        """The unit-step maps that are not forced (zero ends or column periodicity)."""
        N = self.N
        return {
            (P, Q): f
            for (P, Q), f in self.maps.items()
            if not (f.source.is_zero() or f.target.is_zero()) and not (P[0] == N and Q[0] == N)
        }

    def replace_map(self, P: Pos, Q: Pos, value) -> "PeriodicDiagram":
        maps = dict(self.free_maps())
        maps[(P, Q)] = value
        objs = {pos: self.objects[pos] for pos in stored_positions(self.n)}
        return PeriodicDiagram.build(self.ctx, self.n, objs, maps)

    # access on the whole strip

    def object_at(self, pos: Pos) -> FpObject:
        P0, k = resolve(pos, self.n)
        X = self.objects[P0]
        return shift_object(X) if k % 2 else X

    def _unit(self, P: Pos, Q: Pos) -> StableMorphism:
        n, N = self.n, self.N
        P0, k = resolve(P, n)
        # the same step seen from P0; odd translations swap right and up
        right = Q[0] == P[0] + 1
        if k % 2:
            right = not right
        if right and P0[0] == N:
            # leaves the triangle: view it from the column one translation back
            P0 = untranslate(P0, n)
            k += 1
            right = False
        Q0 = (P0[0] + 1, P0[1]) if right else (P0[0], P0[1] + 1)
        f = self.maps[(P0, Q0)]
        return stable.shift_morphism(f) if k % 2 else f

    def arrow(self, P: Pos, Q: Pos) -> StableMorphism:
        """Composite of unit steps from P to Q (P <= Q componentwise, both on the strip)."""
        n = self.n
        if not (in_strip(P, n) and in_strip(Q, n)):
            raise ContractError(f"arrow {P} -> {Q}: position off the strip")
        if Q[0] < P[0] or Q[1] < P[1]:
            raise ContractError(f"arrow {P} -> {Q}: positions are not ordered")
        cur = P
        f = stable.identity(self.ctx, self.object_at(P))
        while cur != Q:
            b, a = cur
            if a < Q[1] and a + 1 <= b:
                nxt = (b, a + 1)
            else:
                nxt = (b + 1, a)
            f = compose(f, self._unit(cur, nxt))
            cur = nxt
        return f

    def cell(self, A: Pos) -> Quadrangle:
        """Unit cell with lower-left corner A: A -> A+right, A -> A+up, then to the far corner."""
        b, a = A
        B, C, D = (b + 1, a), (b, a + 1), (b + 1, a + 1)
        return Quadrangle(self.arrow(A, B), self.arrow(A, C), self.arrow(B, D), self.arrow(C, D))


def triangle_of(D: PeriodicDiagram) -> Triangle:
    """The triangle X_{1/0} -> X_{2/0} -> X_{2/1} -> X_{0+/1} of a diagram with n = 2."""
    if D.n != 2:
        raise ContractError("triangle_of needs n = 2")
    return Triangle.make(
        D.arrow((1, 0), (2, 0)), D.arrow((2, 0), (2, 1)), D.arrow((2, 1), (3, 1))
    )


# --- checks ------------------------------------------------------------------------


def is_weak_square(q: Quadrangle) -> Verdict:
    """Whether the diagonal sequence A -> B(+)C -> D of the quadrangle is weakly exact."""
    first, second = q.diagonal()
    if not stable.is_stably_zero(compose(first, second)):
        return Verdict.failed("quadrangle does not commute stably")
    return stable.weakly_exact(first, second)


def _cell_label(A: Pos, n: int) -> str:
    b, a = A
    return f"{format_pos(A, n)}..{format_pos((b + 1, a + 1), n)}"


def is_periodic_pretriangle(D: PeriodicDiagram) -> Verdict:
    """Unit-cell test: every cell of the triangle commutes and is a weak square.

    Cells across the column are translates of triangle cells; one of them is
    rechecked directly anyway.
    """
    n = D.n
    cells = unit_cells(n) + [(D.N, 1)] if n >= 1 else unit_cells(n)
    for A in cells:
        q = D.cell(A)
        if not stable.stable_equal(compose(q.b, q.d), compose(q.c, q.e)):
            return Verdict.failed("cell does not commute", cell=_cell_label(A, n))
        v = is_weak_square(q)
        if not v:
            return Verdict.failed(f"cell is not a weak square: {v.reason}", cell=_cell_label(A, n), **v.details)
    return Verdict.passed(cells_checked=len(cells))


def monotone_map(n: int, k: int):
    """d: [0, n-1] -> [0, n] skipping k, extended periodically (period n -> n + 1)."""
    if not 0 <= k <= n:
        raise ContractError(f"face index {k} outside [0, {n}]")

    def d(x: int) -> int:
        t, r = divmod(x, n)
        return (r if r < k else r + 1) + t * (n + 1)

    return d


def restrict(D: PeriodicDiagram, k: int) -> PeriodicDiagram:
    """Pull D back along the periodic face map skipping k; the result has n - 1."""
    n = D.n
    if n < 1:
        raise ContractError("cannot restrict a diagram with n = 0")
    d = monotone_map(n, k)
    m_ = n - 1
    objects = {(b, a): D.object_at((d(b), d(a))) for (b, a) in triangle_positions(m_)}
    maps = {}
    for P, Q in unit_steps(m_):
        maps[(P, Q)] = D.arrow((d(P[0]), d(P[1])), (d(Q[0]), d(Q[1])))
    return PeriodicDiagram.build(D.ctx, m_, objects, maps)


def is_verdier_octahedron(D: PeriodicDiagram) -> Verdict:
    if D.n != 3:
        raise ContractError("a Verdier octahedron lives on n = 3")
    v = is_periodic_pretriangle(D)
    if not v:
        return Verdict.failed(f"not a pretriangle: {v.reason}", **v.details)
    cones = {}
    for k in range(4):
        t = is_distinguished(triangle_of(restrict(D, k)))
        if not t:
            return Verdict.failed(f"face {k} is not distinguished: {t.reason}", face=k)
        cones[k] = t.details.get("cone_object")
    return Verdict.passed(cones=cones)


def is_distinguished(T: Triangle) -> Verdict:
    return stable.is_distinguished(T)


def bbd_extra_triangles(D: PeriodicDiagram, rotation_sign: bool = True) -> tuple[Triangle, Triangle]:
    """The two extra triangles of an octahedron (n = 3).

    The cone of the diagonal of a quadrangle is the sum of the off-diagonal
    corners of the next one; the minus sign making the middle composite vanish
    sits on the second component of the first map of the first triangle and
    of the middle map of the second.

    The second triangle is read off directly: 2/0 -> 3/1 -> 3/2 (+) 4/1 -> 4/2.
    The first is the rotation of u -> 2/0 -> 2/1 (+) 3/0 -> 3/1, where u is the
    diagonal ending at 2/0; rotating puts -u^{+1} in third place.  With
    ``rotation_sign=False`` the third map is u^{+1}, the periodic reading
    arrow(3/1 -> 4/2), which is not distinguished for odd p.
    """
    if D.n != 3:
        raise ContractError("extra triangles need n = 3")
    a = D.arrow
    up_20_21, right_20_30 = a((2, 0), (2, 1)), a((2, 0), (3, 0))
    f1 = stable.to_sum([up_20_21, -right_20_30])
    g1 = stable.from_sum([a((2, 1), (3, 1)), a((3, 0), (3, 1))])
    h1 = a((3, 1), (4, 2))
    if rotation_sign:
        u = a((1, -1), (2, 0))
        # on a commuting diagram u^{+1} == h1; the rotation adds the sign
        t1 = stable.rotate(Triangle.make(u, f1, g1))
    else:
        t1 = Triangle.make(f1, g1, h1)
    up_31_32, right_31_41 = a((3, 1), (3, 2)), a((3, 1), (4, 1))
    t2 = Triangle.make(
        a((2, 0), (3, 1)),
        stable.to_sum([up_31_32, -right_31_41]),
        stable.from_sum([a((3, 2), (4, 2)), a((4, 1), (4, 2))]),
    )
    return t1, t2


# --- module-level diagrams and standardisation ----------------------------------------


@dataclass(frozen=True)
class EDiagram:
    """A diagram of modules on the triangle, including the column and 0+/0."""

    ctx: Context
    n: int
    objects: Mapping[Pos, FpObject] = field(hash=False)
    maps: Mapping[tuple[Pos, Pos], EMorphism] = field(hash=False)

    @property
    def N(self):
        return self.n + 1

    @classmethod
    def build(cls, ctx: Context, n: int, objects: Mapping[Pos, FpObject], maps: Mapping) -> "EDiagram":
        zero = ctx.zero_object()
        objs = {pos: objects.get(pos, zero) for pos in triangle_positions(n)}
        out = {}
        for P, Q in unit_steps(n):
            src, tgt = objs[P], objs[Q]
            given = maps.get((P, Q))
            if given is None:
                if src.is_zero() or tgt.is_zero():
                    out[(P, Q)] = modcat.zero_morphism(ctx, src, tgt)
                    continue
                raise StructureError("missing map", position=f"{format_pos(P, n)}->{format_pos(Q, n)}")
            f = given if isinstance(given, EMorphism) else EMorphism.make(ctx, src, tgt, given)
            if (f.source, f.target) != (src, tgt):
                raise StructureError("map does not fit its ends", position=f"{format_pos(P, n)}->{format_pos(Q, n)}")
            out[(P, Q)] = f
        return cls(ctx, n, objs, out)

    def arrow(self, P: Pos, Q: Pos) -> EMorphism:
        cur = P
        f = modcat.identity(self.ctx, self.objects[P])
        while cur != Q:
            b, a = cur
            nxt = (b, a + 1) if a < Q[1] and a + 1 <= b else (b + 1, a)
            f = modcat.compose(f, self.maps[(cur, nxt)])
            cur = nxt
        return f

    def cell(self, A: Pos) -> Quadrangle:
        b, a = A
        B, C, Dd = (b + 1, a), (b, a + 1), (b + 1, a + 1)
        return Quadrangle(self.maps[(A, B)], self.maps[(A, C)], self.maps[(B, Dd)], self.maps[(C, Dd)])


def check_box_property(E: EDiagram) -> Verdict:
    """Pure unit cells, bijective entries on the diagonal and at 0+/0."""
    n, N = E.n, E.N
    for pos in [(a, a) for a in range(N + 1)] + [(N, 0)]:
        if not modcat.is_bijective(E.objects[pos]):
            return Verdict.failed("entry is not bijective", position=format_pos(pos, n))
    for A in unit_cells(n):
        q = E.cell(A)
        if modcat.compose(q.b, q.d) != modcat.compose(q.c, q.e):
            return Verdict.failed("cell does not commute", cell=_cell_label(A, n))
        if not modcat.is_pure_square(q):
            return Verdict.failed("cell is not a pure square", cell=_cell_label(A, n))
    return Verdict.passed()


def column_ses(E: EDiagram, i: int) -> tuple[EMorphism, EMorphism]:
    """X_{i/0} >-> X_{i/i} (+) X_{0+/0} ->> X_{0+/i}, signs (x, x) then (x, -x)."""
    ctx, N = E.ctx, E.N
    mono = modcat.to_sum(ctx, E.objects[(i, 0)], [E.arrow((i, 0), (i, i)), E.arrow((i, 0), (N, 0))])
    epi = modcat.from_sum(
        ctx, [E.arrow((i, i), (N, i)), modcat.negate(E.arrow((N, 0), (N, i)))], E.objects[(N, i)]
    )
    return mono, epi


def column_correction(E: EDiagram, i: int) -> EMorphism:
    """tau_i: X_{0+/i} -> X_{i/0}^{+1} comparing the column sequence with the distinguished one."""
    ctx = E.ctx
    mono, epi = column_ses(E, i)
    mono_d, _, epi_d, _ = modcat.distinguished_ses(ctx, E.objects[(i, 0)])
    phi = modcat.extend_along_mono(mono, mono_d)
    tau = modcat.solve_right_factor(epi, modcat.compose(phi, epi_d))
    if tau is None:
        raise InternalConsistencyError(f"no comparison map on the column at i={i}")
    return tau


def standardize_column(E: EDiagram) -> PeriodicDiagram:
    """Replace the column by the shifted bottom row, correcting the maps into it by tau."""
    v = check_box_property(E)
    if not v:
        raise ContractError(f"box property fails: {v.reason} {v.details}")
    ctx, n, N = E.ctx, E.n, E.N
    taus = {i: canonical_form(column_correction(E, i)) for i in range(1, N)}
    objects = {pos: E.objects[pos] for pos in stored_positions(n)}
    maps = {}
    for (P, Q), f in E.maps.items():
        if P[0] == N or is_zero_position(P, n) or is_zero_position(Q, n):
            continue
        g = canonical_form(f)
        if Q[0] == N:
            g = compose(g, taus[Q[1]])
        maps[(P, Q)] = g
    D = PeriodicDiagram.build(ctx, n, objects, maps)
    # the corrected column must be the shifted bottom row
    for i in range(1, N - 1):
        lhs = compose(canonical_form(E.maps[((N, i), (N, i + 1))]), taus[i + 1])
        rhs = compose(taus[i], D.maps[((N, i), (N, i + 1))])
        if lhs != rhs:
            raise InternalConsistencyError(f"column corrections are not natural at i={i}")
    return D


def stable_image(E: EDiagram) -> dict[tuple[Pos, Pos], StableMorphism]:
    """Stable classes of all maps of E, column included (no correction)."""
    return {key: canonical_form(f) for key, f in E.maps.items()}
