import random

import pytest
from hypothesis import given, strategies as st

from helpers import morphisms, objects, random_morphism, random_object
from octaverify import modcat
from octaverify.errors import ContractError, EnumerationTooLarge
from octaverify.modcat import Context, EMorphism, FpObject, Quadrangle

C2 = Context(2, 4)
C3 = Context(3, 3)


def test_context_contracts():
    with pytest.raises(ContractError):
        Context(4, 3)
    with pytest.raises(ContractError):
        Context(2, 40)
    assert Context(2, 6).modulus == 64


def test_object_canonical_order():
    X = C2.obj(3, 1, 3, 0)
    assert X.exponents == (0, 1, 3, 3)
    assert X.rank == 4
    assert str(C2.obj(1, 4)) == "Z/p^1+Z/p^4"
    assert C2.zero_object().is_zero() and C2.obj(0, 0).is_zero()


def test_morphism_divisibility_is_enforced():
    # Z/p^2 -> Z/p^4 needs entries divisible by p^2
    with pytest.raises(ContractError):
        EMorphism.make(C3, C3.obj(1), C3.obj(3), [[3]])
    f = EMorphism.make(C3, C3.obj(1), C3.obj(3), [[9]])
    assert f.rows() == [[9]]


def test_make_reduces_representatives():
    f = EMorphism.make(C2, C2.obj(2), C2.obj(2), [[-1]])
    assert f.rows() == [[3]]


@given(st.data())
def test_composition_associative(data):
    X, Y, Z, W = (data.draw(objects(4)) for _ in range(4))
    f, g, h = data.draw(morphisms(C2, X, Y)), data.draw(morphisms(C2, Y, Z)), data.draw(morphisms(C2, Z, W))
    assert modcat.compose(modcat.compose(f, g), h) == modcat.compose(f, modcat.compose(g, h))


@given(st.data())
def test_identity_and_zero_laws(data):
    X, Y = data.draw(objects(4)), data.draw(objects(4))
    f = data.draw(morphisms(C2, X, Y))
    assert modcat.compose(modcat.identity(C2, X), f) == f
    assert modcat.compose(f, modcat.identity(C2, Y)) == f
    assert f + modcat.zero_morphism(C2, X, Y) == f
    assert f - f == modcat.zero_morphism(C2, X, Y)


@given(st.data())
def test_image_and_kernel_paths_agree(data):
    X, Y = data.draw(objects(4)), data.draw(objects(4))
    f = data.draw(morphisms(C2, X, Y))
    assert modcat.image_size(f, "snf") == modcat.image_size(f, "enum")
    assert modcat.kernel_size(f, "snf") == modcat.kernel_size(f, "enum")
    assert modcat.image_size(f) * modcat.kernel_size(f) == X.order(2)


def test_hom_enumeration_counts_and_cap():
    X, Y = C2.obj(1, 3), C2.obj(2)
    homs = list(modcat.hom_enumerate(C2, X, Y))
    assert len(homs) == modcat.hom_size(C2, X, Y) == 2 * 4
    assert len(set(h.matrix for h in homs)) == len(homs)
    tiny = Context(2, 4, max_enum=3)
    with pytest.raises(EnumerationTooLarge):
        list(modcat.hom_enumerate(tiny, X, Y))


@pytest.mark.parametrize("ctx", [C2, C3, Context(2, 6)])
def test_distinguished_ses_is_exact(ctx):
    rng = random.Random(ctx.p * 100 + ctx.m)
    for _ in range(20):
        X = random_object(rng, ctx.m, 3)
        mono, B, epi, Xs = modcat.distinguished_ses(ctx, X)
        assert modcat.is_bijective(B)
        assert Xs == modcat.shift_object(X)
        assert modcat.is_exact(mono, epi)


def test_cokernel_is_exact():
    rng = random.Random(5)
    for _ in range(40):
        X, Y = random_object(rng, 4), random_object(rng, 4, 3)
        f = random_morphism(rng, C2, X, Y)
        Q, proj = modcat.cokernel(f)
        assert modcat.is_surjective(proj)
        assert modcat.image_size(f) == modcat.kernel_size(proj)
        assert all(not any(r) for r in modcat.compose(f, proj).rows())


def test_direct_sum_layout():
    f = EMorphism.make(C2, C2.obj(3), C2.obj(3), [[1]])
    g = EMorphism.make(C2, C2.obj(1), C2.obj(1), [[1]])
    s = modcat.direct_sum(f, g)
    assert s.source.exponents == (1, 3)
    assert s.rows() == [[1, 0], [0, 1]]


def test_is_exact_disagreement_is_impossible_on_small_sequences():
    X = C2.obj(1)
    Y = C2.obj(1, 1)
    Z = C2.obj(1)
    f = EMorphism.make(C2, X, Y, [[1, 1]])
    g = EMorphism.make(C2, Y, Z, [[1], [-1]])
    assert modcat.is_exact(f, g, "both")
    # the same square read with identity maps is pure: its diagonal is this sequence
    one = modcat.identity(C2, X)
    assert modcat.is_pure_square(Quadrangle(one, one, one, one))


def test_non_pure_square():
    X = C2.obj(1)
    one, zero = modcat.identity(C2, X), modcat.zero_morphism(C2, X, X)
    q = Quadrangle(one, one, zero, zero)
    assert not modcat.is_pure_square(q)


def test_non_commuting_quadrangle_is_a_contract_error():
    X = C2.obj(1)
    one, zero = modcat.identity(C2, X), modcat.zero_morphism(C2, X, X)
    with pytest.raises(ContractError):
        modcat.is_pure_square(Quadrangle(one, one, one, zero))


def test_extend_along_mono():
    rng = random.Random(11)
    for _ in range(30):
        X = random_object(rng, 4)
        mono, B, _, _ = modcat.distinguished_ses(C2, X)
        f = random_morphism(rng, C2, X, FpObject.from_exponents(4, [4, 4]))
        g = modcat.extend_along_mono(mono, f)
        assert modcat.compose(mono, g) == f
    with pytest.raises(ContractError):
        modcat.extend_along_mono(mono, modcat.identity(C2, X))
