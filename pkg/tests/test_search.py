import pytest

from octaverify import diagram, gallery, stable
from octaverify.errors import ContractError
from octaverify.isosearch import (
    DiagramIso,
    bottom_row_congruence,
    find_periodic_isos,
    search_order,
    verify_diagram_iso,
)


@pytest.fixture(scope="module")
def x2():
    return gallery.gen_X(3, 2), gallery.gen_Xtilde(3, 2)


@pytest.fixture(scope="module")
def self_isos(x2):
    return find_periodic_isos(x2[0], x2[0], mode="all")


def test_search_order():
    assert search_order(3) == [(1, 0), (2, 0), (3, 0), (2, 1), (3, 1), (3, 2)]


def test_identity_is_found(x2):
    X = x2[0]
    res = find_periodic_isos(X, X, mode="first")
    assert res.complete and len(res) == 1
    assert verify_diagram_iso(res.isos[0])


def test_all_self_isomorphisms(self_isos, x2):
    assert self_isos.complete
    assert len(self_isos) == 1024
    ident = DiagramIso.from_matrices(x2[0], x2[0])
    assert any(iso.components == ident.components for iso in self_isos)


def test_self_isomorphisms_reverify(self_isos):
    for iso in self_isos.isos[::37]:
        assert verify_diagram_iso(iso)


def test_bottom_row_congruence_holds_for_every_witness(self_isos):
    assert all(bottom_row_congruence(iso, 4) for iso in self_isos)


def test_x_and_xtilde_are_not_isomorphic(x2):
    res = find_periodic_isos(*x2, mode="all")
    assert res.complete and len(res) == 0


@pytest.mark.parametrize("k", range(4))
def test_faces_have_a_witness(x2, k):
    L, R = (diagram.restrict(D, k) for D in x2)
    res = find_periodic_isos(L, R, mode="first")
    assert len(res) == 1 and verify_diagram_iso(res.isos[0])


def test_budget_gives_inconclusive(x2):
    X = x2[0]
    res = find_periodic_isos(X, X, mode="all", budget=10)
    assert res.status == "inconclusive" and not res.complete
    assert res.nodes > 10


def test_workers_match_single_process(x2):
    X, Xt = x2
    one = find_periodic_isos(X, X, mode="all")
    two = find_periodic_isos(X, X, mode="all", workers=2)
    assert [i.as_rows() for i in one] == [i.as_rows() for i in two]
    assert find_periodic_isos(X, Xt, mode="all", workers=2).complete


def test_different_objects_short_circuit():
    X4 = gallery.gen_X(4, 2)
    L, R = diagram.restrict(X4, 0), diagram.restrict(X4, 2)
    assert L.objects != R.objects
    res = find_periodic_isos(L, R, mode="all")
    assert res.complete and len(res) == 0 and res.nodes == 0


def test_broken_witness_is_rejected(x2):
    X, Xt = x2
    # the identity family is not a map X -> Xtilde
    assert not verify_diagram_iso(DiagramIso.from_matrices(X, Xt))
    # a non-invertible component is caught by the solver, not by the search
    comps = dict(DiagramIso.from_matrices(X, X).components)
    comps[(1, 0)] = stable.StableMorphism.make(X.ctx, X.objects[(1, 0)], X.objects[(1, 0)], [[2]])
    v = verify_diagram_iso(DiagramIso(X, X, comps))
    assert not v and v.details["position"] == "1/0"


def test_search_contracts(x2):
    with pytest.raises(ContractError):
        find_periodic_isos(*x2, mode="some")
    with pytest.raises(ContractError):
        find_periodic_isos(x2[0], gallery.gen_X(3, 3))
