import pytest

from octaverify import diagram, gallery, stable
from octaverify.errors import ContractError


def rows(D, P, Q):
    return D.maps[(P, Q)].rows()


@pytest.mark.parametrize("p", [2, 3])
def test_octahedron_x_matches_the_display(p):
    X = gallery.gen_X(3, p)
    assert X.ctx.m == 6
    assert [str(X.objects[(j, 0)]) for j in (1, 2, 3)] == ["Z/p^3"] * 3
    assert str(X.objects[(2, 1)]) == "Z/p^1+Z/p^5"
    assert str(X.objects[(3, 1)]) == "Z/p^2+Z/p^4"
    assert str(X.objects[(3, 2)]) == "Z/p^1+Z/p^5"
    assert rows(X, (1, 0), (2, 0)) == rows(X, (2, 0), (3, 0)) == [[p]]
    assert rows(X, (2, 0), (2, 1)) == [[1, p**2]]
    assert rows(X, (3, 0), (3, 1)) == [[1, p]]
    assert rows(X, (2, 1), (3, 1)) == [[p, 0], [0, 1]]
    assert rows(X, (3, 1), (3, 2)) == [[1, 0], [0, p]]
    # maps into the column: (-p^i, 1) read down a column of the display
    assert rows(X, (3, 1), (4, 1)) == [[(-p) % p**3], [1]]
    assert rows(X, (3, 2), (4, 2)) == [[(-(p**2)) % p**3], [1]]


@pytest.mark.parametrize("p", [2, 3])
def test_octahedron_xtilde_differs_at_two_maps(p):
    X, Xt = gallery.gen_X(3, p), gallery.gen_Xtilde(3, p)
    assert rows(Xt, (2, 1), (3, 1)) == [[p, 0], [1, 1]]
    assert rows(Xt, (3, 1), (3, 2)) == [[1, 0], [(-1) % p, p]]  # Z/p^5 -> Z/p reduces mod p
    differing = {key for key in X.maps if X.maps[key] != Xt.maps[key]}
    assert differing == set(gallery.tilde_positions(3))
    assert X.objects == Xt.objects


@pytest.mark.parametrize("n,p", [(3, 2), (3, 3), (4, 2)])
def test_faces_one_and_last_agree_literally(n, p):
    X, Xt = gallery.gen_X(n, p), gallery.gen_Xtilde(n, p)
    for k in (1, n):
        assert diagram.restrict(X, k) == diagram.restrict(Xt, k)


@pytest.mark.parametrize("n,p", [(3, 2), (3, 3), (4, 2)])
def test_every_generated_diagram_and_face_is_a_pretriangle(n, p):
    for D in (gallery.gen_X(n, p), gallery.gen_Xtilde(n, p)):
        assert diagram.is_periodic_pretriangle(D)
        for k in range(n + 1):
            assert diagram.is_periodic_pretriangle(diagram.restrict(D, k))


def test_y_display_entries():
    E = gallery.gen_Y(3, 2)
    N = E.N
    assert E.n == 5 and N == 6
    assert str(E.objects[(1, 0)]) == "Z/p^1"
    assert E.maps[((1, 0), (2, 0))].rows() == [[2]]
    # rightmost column: -p into the column for i >= 1, identity verticals elsewhere
    assert E.maps[((5, 1), (6, 1))].rows() == [[(-2) % 2**5]]
    # lower right corner quadrangle on Z/p^4, Z/p^5, Z/p^5, Z/p^6 with maps p, 1, -1, -p
    corner = E.cell((5, 0))
    assert [str(x) for x in (corner.A, corner.B, corner.C, corner.D)] == ["Z/p^5", "Z/p^6", "Z/p^4", "Z/p^5"]
    assert [x.rows() for x in (corner.b, corner.c, corner.d, corner.e)] == [[[2]], [[1]], [[31]], [[30]]]


@pytest.mark.parametrize("n,p", [(3, 2), (3, 3)])
def test_y_box_property_and_trivial_corrections(n, p):
    E = gallery.gen_Y(n, p)
    assert diagram.check_box_property(E)
    D = diagram.standardize_column(E)
    image = diagram.stable_image(E)
    for key, f in D.free_maps().items():
        assert image[key] == f
    for i in range(1, E.N):
        tau = stable.canonical_form(diagram.column_correction(E, i))
        assert tau == stable.identity(E.ctx, E.objects[(E.N, i)])
    assert diagram.is_periodic_pretriangle(D)


@pytest.mark.parametrize("n,p", [(3, 2), (3, 3), (4, 2), (5, 2)])
def test_known_witnesses_verify(n, p):
    from octaverify.isosearch import verify_diagram_iso

    for k in range(n + 1):
        v = verify_diagram_iso(gallery.known_witness_iso(k, n, p))
        assert v, (k, v.reason, v.details)


def test_witness_components_shape():
    assert gallery.known_witness_components(1, 3, 2) == {}
    assert gallery.known_witness_components(3, 3, 2) == {}
    assert gallery.known_witness_components(0, 4, 2) == {(3, 0): [[1, 0], [2, 1]]}
    comps = gallery.known_witness_components(2, 4, 2)
    assert comps == {(2, 1): [[1, 0], [-1, 1]]}
    comps = gallery.known_witness_components(3, 5, 3)
    assert comps[(3, 2)] == [[1, 0], [-1, 1]]
    assert comps[(3, 1)] == [[1, 0], [-3, 1]]
    assert (4, 1) not in comps


def test_generator_contracts():
    with pytest.raises(ContractError):
        gallery.gen_X(2, 2)
    with pytest.raises(ContractError):
        gallery.gen_X(3, 4)
    with pytest.raises(ContractError):
        gallery.generate("OctX", 4, 2)
    with pytest.raises(ContractError):
        gallery.generate("nope", 3, 2)
    with pytest.raises(ContractError):
        gallery.known_witness_components(5, 4, 2)
