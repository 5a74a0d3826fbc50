import random

import pytest

from helpers import random_morphism, random_object
from octaverify import diagram, gallery, modcat, stable
from octaverify.diagram import EDiagram, PeriodicDiagram
from octaverify.errors import ContractError, StructureError
from octaverify.modcat import Context, EMorphism, Quadrangle


@pytest.fixture(scope="module", params=[2, 3])
def octx(request):
    return gallery.gen_X(3, request.param)


def test_position_text_round_trip():
    n = 3
    for pos in diagram.triangle_positions(n):
        assert diagram.parse_pos(diagram.format_pos(pos, n), n) == pos
    assert diagram.format_pos((4, 1), 3) == "0+/1"
    with pytest.raises(ContractError):
        diagram.parse_pos("7/x", 3)


def test_translation_and_resolve():
    n = 3
    assert diagram.translate((2, 1), n) == (5, 2)
    assert diagram.untranslate(diagram.translate((2, 1), n), n) == (2, 1)
    P0, k = diagram.resolve((6, 4), n)
    assert diagram.in_triangle(P0, n) and k == 1


def test_translation_coherence(octx):
    D = octx
    n, N = D.n, D.N
    rng = random.Random(D.ctx.p)
    pairs = [
        ((b, a), (b + db, a + da))
        for a in range(-N, N + 1)
        for b in range(a, a + N + 1)
        for db in range(0, 3)
        for da in range(0, 3)
    ]
    pairs = [
        (P, Q) for P, Q in pairs
        if diagram.in_strip(P, n) and diagram.in_strip(Q, n) and Q[0] <= P[1] + N
    ]
    for P, Q in rng.sample(pairs, 60):
        f = D.arrow(P, Q)
        g = D.arrow(diagram.translate(P, n), diagram.translate(Q, n))
        assert g == stable.shift_morphism(f), (P, Q)


def test_objects_follow_the_flip_rule(octx):
    D = octx
    for b, a in diagram.triangle_positions(D.n):
        P1 = diagram.translate((b, a), D.n)
        assert D.object_at(P1) == modcat.shift_object(D.object_at((b, a)))


def test_arrow_contracts(octx):
    with pytest.raises(ContractError):
        octx.arrow((2, 0), (1, 0))
    with pytest.raises(ContractError):
        octx.arrow((1, 0), (9, 0))


def test_restrictions_have_the_displayed_cones(octx):
    p = octx.ctx.p
    cones = {}
    for k in range(4):
        T = diagram.triangle_of(diagram.restrict(octx, k))
        v = stable.is_distinguished(T)
        assert v
        cones[k] = v.details["cone_object"]
    assert cones[1] == cones[3] == "Z/p^1+Z/p^5"
    assert cones[2] == "Z/p^2+Z/p^4"
    face0 = diagram.triangle_of(diagram.restrict(octx, 0))
    assert face0.h.rows() == [[0, (-(p**4)) % p**5], [1, 0]]


def test_restriction_contract():
    with pytest.raises(ContractError):
        diagram.restrict(gallery.gen_X(3, 2), 4)


def test_zeroed_map_breaks_the_pretriangle_and_names_a_cell():
    X = gallery.gen_X(3, 2)
    bad = X.replace_map((2, 0), (3, 0), stable.zero(X.ctx, X.objects[(2, 0)], X.objects[(3, 0)]))
    v = diagram.is_periodic_pretriangle(bad)
    assert not v
    assert "cell" in v.details and ".." in v.details["cell"]


def test_zeroed_inner_map_is_not_an_octahedron():
    X = gallery.gen_X(3, 2)
    bad = X.replace_map((2, 1), (3, 1), stable.zero(X.ctx, X.objects[(2, 1)], X.objects[(3, 1)]))
    assert not diagram.is_verdier_octahedron(bad)


@pytest.mark.parametrize("n,p", [(3, 2), (3, 3), (4, 2)])
def test_mutating_a_tilde_entry_flips_a_check(n, p):
    Xt = gallery.gen_Xtilde(n, p)
    assert diagram.is_periodic_pretriangle(Xt)
    (P1, Q1), (P2, Q2) = gallery.tilde_positions(n)
    for (P, Q), r, c in (((P1, Q1), 1, 0), ((P2, Q2), 1, 0)):
        rows = Xt.maps[(P, Q)].rows()
        rows[r][c] = 0
        assert not diagram.is_periodic_pretriangle(Xt.replace_map(P, Q, rows)), (P, Q)


def test_build_reports_positions():
    ctx = Context(2, 4)
    X = gallery.gen_X(3, 2)
    objs = {pos: X.objects[pos] for pos in diagram.stored_positions(3)}
    maps = dict(X.free_maps())
    missing = dict(objs)
    del missing[(2, 1)]
    with pytest.raises(StructureError) as exc:
        PeriodicDiagram.build(X.ctx, 3, missing, maps)
    assert exc.value.position == "2/1"
    wrong = dict(objs)
    wrong[(4, 1)] = X.ctx.obj(1)
    with pytest.raises(StructureError) as exc:
        PeriodicDiagram.build(X.ctx, 3, wrong, maps)
    assert exc.value.position == "0+/1"
    short = dict(maps)
    del short[((2, 1), (3, 1))]
    with pytest.raises(StructureError) as exc:
        PeriodicDiagram.build(X.ctx, 3, objs, short)
    assert exc.value.position == "2/1->3/1"
    with pytest.raises(StructureError):
        PeriodicDiagram.build(ctx, 1, {(1, 0): ctx.obj(2), (1, 1): ctx.obj(1)}, {})


def test_zero_diagram():
    ctx = Context(2, 4)
    E = EDiagram.build(ctx, 2, {}, {})
    assert diagram.check_box_property(E)
    D = diagram.standardize_column(E)
    assert all(X.is_zero() for X in D.objects.values())
    assert diagram.is_periodic_pretriangle(D)


def _one_column(ctx, e, u):
    """n = 1 module diagram whose column sequence differs from the chosen one by u."""
    p, m = ctx.p, ctx.m
    objects = {(1, 0): ctx.obj(e), (2, 0): ctx.obj(m), (2, 1): ctx.obj(m - e)}
    maps = {((1, 0), (2, 0)): [[p ** (m - e)]], ((2, 0), (2, 1)): [[-u]]}
    return EDiagram.build(ctx, 1, objects, maps)


@pytest.mark.parametrize("p,e", [(2, 2), (2, 1), (3, 2)])
def test_column_correction_by_a_unit(p, e):
    ctx = Context(p, 6 if p == 2 else 4)
    u = 1 + p
    E = _one_column(ctx, e, u)
    assert diagram.check_box_property(E)
    tau = stable.canonical_form(diagram.column_correction(E, 1))
    # composing with u gives the identity stably: tau is u^{-1}
    ustab = stable.StableMorphism.make(ctx, ctx.obj(ctx.m - e), ctx.obj(ctx.m - e), [[u]])
    assert stable.compose(tau, ustab) == stable.identity(ctx, ctx.obj(ctx.m - e))
    # and it agrees with the extension computed directly
    mono, epi = diagram.column_ses(E, 1)
    mono_d, _, epi_d, _ = modcat.distinguished_ses(ctx, ctx.obj(e))
    phi = modcat.extend_along_mono(mono, mono_d)
    assert modcat.compose(epi, diagram.column_correction(E, 1)) == modcat.compose(phi, epi_d)


def test_box_property_violation_is_a_contract_error():
    ctx = Context(2, 4)
    E = EDiagram.build(ctx, 1, {(1, 0): ctx.obj(2), (2, 0): ctx.obj(4), (2, 1): ctx.obj(2)},
                       {((1, 0), (2, 0)): [[0]], ((2, 0), (2, 1)): [[1]]})
    assert not diagram.check_box_property(E)
    with pytest.raises(ContractError):
        diagram.standardize_column(E)


def random_pure_square(rng, ctx):
    A = random_object(rng, ctx.m, 2)
    B = random_object(rng, ctx.m, 2, lo=0, hi=ctx.m)
    C0 = random_object(rng, ctx.m, 1, lo=0, hi=ctx.m)
    b = random_morphism(rng, ctx, A, B)
    mono, BA, _, _ = modcat.distinguished_ses(ctx, A)
    C, _ = modcat.sum_layout([C0, BA])
    c = modcat.to_sum(ctx, A, [random_morphism(rng, ctx, A, C0), mono])
    first = modcat.to_sum(ctx, A, [b, c])
    D, proj = modcat.cokernel(first)
    _, (sb, sc) = modcat.sum_layout([B, C])
    rows = proj.rows()
    d = EMorphism.make(ctx, B, D, [rows[i] for i in sb])
    e = modcat.negate(EMorphism.make(ctx, C, D, [rows[i] for i in sc]))
    return Quadrangle(b, c, d, e)


def test_weak_square_accepts_images_of_pure_squares():
    ctx = Context(2, 6)
    rng = random.Random(50)
    for _ in range(50):
        q = random_pure_square(rng, ctx)
        assert modcat.is_pure_square(q)
        sq = Quadrangle(*(stable.canonical_form(x) for x in (q.b, q.c, q.d, q.e)))
        assert diagram.is_weak_square(sq)


def test_weak_square_rejects_non_pure_square():
    ctx = Context(2, 4)
    X = ctx.obj(1)
    one, zero = stable.identity(ctx, X), stable.zero(ctx, X, X)
    v = diagram.is_weak_square(Quadrangle(one, one, zero, zero))
    assert not v


def test_extra_triangles_of_the_octahedra(octx):
    p = octx.ctx.p
    t1, t2 = diagram.bbd_extra_triangles(octx)
    assert [str(t1.X), str(t1.Y), str(t1.Z)] == ["Z/p^3", "Z/p^1+Z/p^3+Z/p^5", "Z/p^2+Z/p^4"]
    assert [str(t2.X), str(t2.Y), str(t2.Z)] == ["Z/p^3", "Z/p^2+Z/p^4", "Z/p^1+Z/p^3+Z/p^5"]
    # first map (1, p^2, -p) listed in the order Z/p, Z/p^3, Z/p^5
    assert t1.f.rows() == [[1, (-p) % p**3, p**2]]
    assert stable.is_distinguished(t1) and stable.is_distinguished(t2)


def test_literal_third_map_needs_the_rotation_sign():
    for p, expect in ((2, True), (3, False)):
        t1, _ = diagram.bbd_extra_triangles(gallery.gen_X(3, p), rotation_sign=False)
        assert bool(stable.is_distinguished(t1)) is expect


def test_extra_triangles_on_a_broken_octahedron_still_build():
    X = gallery.gen_X(3, 2)
    bad = X.replace_map((1, 0), (2, 0), stable.zero(X.ctx, X.objects[(1, 0)], X.objects[(2, 0)]))
    t1, t2 = diagram.bbd_extra_triangles(bad)
    assert t1.X == t2.X


def test_rotation_sign_is_the_only_difference(octx):
    rotated, _ = diagram.bbd_extra_triangles(octx)
    literal, _ = diagram.bbd_extra_triangles(octx, rotation_sign=False)
    assert (rotated.f, rotated.g) == (literal.f, literal.g)
    assert rotated.h == -literal.h
