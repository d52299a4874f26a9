import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coxcc import cartan as ct
from coxcc import corpus
from coxcc import coxeter as cx
from coxcc.cartan import CartanError, CartanMatrix
from coxcc.coxeter import INF, CoxeterMatrix

import helpers

A2 = CoxeterMatrix.from_edges(2, [(0, 1, 3)])
INF2 = CoxeterMatrix.from_edges(2, [(0, 1, INF)])


def test_matrix_is_read_only_and_hashable():
    A = ct.tits_cartan(A2)
    with pytest.raises(ValueError):
        A.entries[0, 0] = 3
    assert A == ct.tits_cartan(A2) and hash(A) == hash(ct.tits_cartan(A2))
    with pytest.raises(CartanError):
        CartanMatrix(np.eye(3), A2)


@pytest.mark.parametrize("entries, clause", [
    ([[2.5, -1], [-1, 2]], "diagonal"),
    ([[2, 1], [1, 2]], "negative-off-diagonal"),
    ([[2, -1], [-2, 2]], "product-4cos2"),
])
def test_validate_clauses(entries, clause):
    bad = ct.validate(CartanMatrix(np.array(entries, float), A2))
    assert [v.clause for v in bad] == [clause]


def test_validate_commuting_and_infinite():
    W = CoxeterMatrix.from_edges(2, [])
    bad = ct.validate(CartanMatrix(np.array([[2, -0.1], [0, 2]]), W))
    assert [v.clause for v in bad] == ["zero-iff-commuting"]
    A = CartanMatrix(np.array([[2, -1.5], [-2, 2]]), INF2)
    assert ct.validate(A, level="weak") == []
    assert [v.clause for v in ct.validate(A)] == ["product-ge-4"]
    assert ct.is_compatible(CartanMatrix(np.array([[2, -1], [-4, 2]]), INF2))


def test_matrix_type_known_values():
    # closed forms: lowest eigenvalues 2 - 2 sqrt 3, 2 - 2.5 sqrt 2, 2 - sqrt 15
    r = ct.matrix_type(corpus.cartan("ex91"))
    assert r.type == "Negative" and r.lowest_eigenvalue == pytest.approx(2 - 2 * math.sqrt(3), abs=1e-12)
    r = ct.matrix_type(corpus.cartan("fig5"))
    assert r.lowest_eigenvalue == pytest.approx(2 - 2.5 * math.sqrt(2), abs=1e-12)
    r = ct.matrix_type(corpus.cartan("ex92", x=1, y=1))
    assert r.lowest_eigenvalue == pytest.approx(2 - math.sqrt(15), abs=1e-12)
    r = ct.matrix_type(corpus.cartan("ex93", x=1, y=1), (0, 1, 2))
    assert r.type == "Zero" and abs(r.lowest_eigenvalue) < 1e-12
    assert ct.matrix_type(ct.tits_cartan(A2)).type == "Positive"


def test_pf_vector_is_eigenvector():
    A = corpus.cartan("ex93", x=2, y=0.7)
    r = ct.matrix_type(A)
    x = r.pf_vector
    assert (x > 0).all() and x.max() == pytest.approx(1.0)
    assert np.abs(A.entries @ x - r.lowest_eigenvalue * x).max() < 1e-10


def test_matrix_type_rejects_reducible_subset():
    with pytest.raises(CartanError):
        ct.matrix_type(corpus.cartan("ex91"), (0, 2))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_type_matches_dense_eigenvalue(seed):
    rng = np.random.default_rng(seed)
    W, A = helpers.random_pair(rng, 5)
    r = ct.matrix_type(A)
    lam = min(np.linalg.eigvals(A.entries).real)
    assert abs(r.lowest_eigenvalue - lam) < 1e-7


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_normalize_is_conjugation_invariant(seed):
    rng = np.random.default_rng(seed)
    W, A = helpers.random_pair(rng, 6)
    d = np.exp(rng.normal(0, 1, W.N))
    B = ct.conjugate(A, d)
    na, nb = ct.normalize(A).entries, ct.normalize(B).entries
    assert np.abs(na - nb).max() < 1e-9 * max(1.0, np.abs(na).max())
    ia, ib = ct.equivalence_invariants(A), ct.equivalence_invariants(B)
    for k in ia.pair_products:
        assert ia.pair_products[k] == pytest.approx(ib.pair_products[k], rel=1e-12)
    for k in ia.cycle_products:
        assert ia.cycle_products[k] == pytest.approx(ib.cycle_products[k], rel=1e-9)
    assert ct.matrix_type(A).type == ct.matrix_type(B).type


def test_normalize_fixes_example():
    A = corpus.cartan("ex92", x=1.0, y=1.3)
    assert ct.normalize(A) == A


def test_cycle_products():
    A = ct.affine_atilde_cartan(3, 2.0)
    assert ct.fundamental_cycles(A.coxeter) == [(0, 1, 2)]
    assert ct.cycle_product(A, (0, 1, 2)) == pytest.approx(0.25)
    assert not ct.is_symmetrizable(A)
    assert ct.is_symmetrizable(ct.affine_atilde_cartan(3, 1.0))


def test_generic_atilde2():
    # frozen: t = 2, 3, 5 on the three edges
    A = ct.generic_cc_cartan(ct.atilde_coxeter(3))
    assert np.linalg.det(A.entries) == pytest.approx(-49 / 30, abs=1e-12)
    assert ct.cycle_product(A, (0, 1, 2)) == pytest.approx(100 / 9)
    assert ct.validate(A) == []


def test_generic_requires_admissible_group():
    with pytest.raises(cx.CoxeterError):
        ct.generic_cc_cartan(corpus.coxeter("ex91"))


def test_deformed():
    W = corpus.coxeter("fig5")
    A = ct.deformed_tits_cartan(W, {(0, 1): 0.5, (2, 1): 0.0})
    assert A.entries[0, 1] == -2.5 and A.entries[1, 2] == -2.0
    with pytest.raises(CartanError):
        ct.deformed_tits_cartan(W, {(0, 1): 0.5})
    with pytest.raises(CartanError):
        ct.deformed_tits_cartan(W, {(0, 1): -0.5, (1, 2): 0})


def test_affine_atilde_det():
    for N in range(3, 8):
        for a in (0.5, 2.0, 3.0):
            A = ct.affine_atilde_cartan(N, a)
            assert np.linalg.det(A.entries) == pytest.approx(2 - a - 1 / a, abs=1e-9)
    with pytest.raises(CartanError):
        ct.affine_atilde_cartan(3, -1.0)


def test_json_roundtrip(tmp_path):
    A = corpus.cartan("ex93", x=0.3, y=2.2)
    assert ct.cartan_from_json(ct.cartan_to_json(A)) == A
    (tmp_path / "w.cox").write_text(cx.format_coxeter(A.coxeter))
    import json
    d = json.loads(ct.cartan_to_json(A))
    d["coxeter"] = "w.cox"
    assert ct.cartan_from_json(json.dumps(d), tmp_path) == A
    with pytest.raises(CartanError):
        ct.cartan_from_json('{"n": 2}')


def test_path_tits_matrix_is_negative_type():
    # all-infinite path on five nodes: det 0 but lowest eigenvalue 2 - 2 sqrt 3
    W = corpus.coxeter("ex91")
    lam = {(i, j): 0.0 for i, j, m in W.edges()}
    A = ct.deformed_tits_cartan(W, lam)
    assert A == ct.tits_cartan(W)
    assert abs(np.linalg.det(A.entries)) < 1e-12
    r = ct.matrix_type(A)
    assert r.type == "Negative" and r.lowest_eigenvalue == pytest.approx(2 - 2 * math.sqrt(3))
