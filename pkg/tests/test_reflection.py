import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coxcc import cartan as ct
from coxcc import corpus
from coxcc import reflection as rf
from coxcc.coxeter import CoxeterMatrix

import helpers


def _relations_ok(rep, W):
    rpt = rf.verify_rep(rep, W)
    return rpt.passed, rpt


@pytest.mark.parametrize("name, params", [
    ("ex31", {}), ("fig5", {}), ("ex91", {}), ("ex92", {"x": 2.0, "y": 1.7}),
    ("ex93", {"x": 2.0, "y": 0.5}),
])
def test_build_and_verify_corpus(name, params):
    A = corpus.cartan(name, **params)
    rep = rf.build_rep(A)
    ok, rpt = _relations_ok(rep, A.coxeter)
    assert ok, rpt.to_dict()
    assert rpt.interior_status == "certified"
    assert np.abs(rep.cartan_entries() - A.entries).max() <= 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_build_random_pairs(seed):
    rng = np.random.default_rng(seed)
    W, A = helpers.random_pair(rng, 5)
    if ct.matrix_type(A).type == "Zero":
        with pytest.raises(rf.NonSemisimpleRequired):
            rf.build_rep(A)
        return
    try:
        rep = rf.build_rep(A)
    except rf.RankAmbiguous:
        return
    rpt = rf.verify_rep(rep, W)
    assert rpt.involution_error <= 1e-9
    assert not rpt.relation_failures
    assert rpt.cartan_error <= 1e-9


def test_tits_flavor_on_spherical_and_affine():
    for _, W in helpers.spherical_families(6)[:8] + helpers.affine_families(4)[2:6]:
        A = ct.tits_cartan(W)
        if ct.matrix_type(A).type == "Zero":
            continue
        ok, rpt = _relations_ok(rf.build_rep(A), W)
        assert ok, rpt.to_dict()


def test_rank_errors():
    A = ct.tits_cartan(CoxeterMatrix.from_edges(2, [(0, 1, 3)]))
    with pytest.raises(rf.RepError, match="rank"):
        rf.build_rep(A, 1)
    with pytest.raises(rf.NonSemisimpleRequired):
        rf.build_rep(ct.affine_atilde_cartan(3, 1.0))


def test_numerical_rank_gap():
    A = corpus.cartan("ex92", x=2.0, y=corpus.ex92_curve_y(2.0))
    r, rows, gap = rf.numerical_rank(A.entries)
    assert r == 5 and gap > 1e10
    W = CoxeterMatrix.from_edges(3, [(0, 1, 4), (1, 2, 4)])
    with pytest.raises(rf.RankAmbiguous):
        rf.build_rep(ct.CartanMatrix(_near_singular(), W))


def _near_singular():
    # C~2 Tits matrix perturbed so its determinant sits inside the ambiguous band
    a = ct.tits_cartan(CoxeterMatrix.from_edges(3, [(0, 1, 4), (1, 2, 4)])).entries.copy()
    a[0, 1] *= 1 + 1e-10
    a[1, 0] /= 1 + 1e-10
    a[1, 2] *= 1 + 1e-9
    return a


def test_padding_adds_trivial_summand():
    A = corpus.cartan("ex31")
    rep = rf.build_rep(A, 3)
    assert rep.n == 3
    assert rf.verify_rep(rep).passed
    sub = rf.subspace_report(rep)
    assert not sub.reduced and not sub.dual_reduced
    blk = rf.block_decomposition(rep)
    assert blk.dims == (1, 0, 2, 0) and blk.pattern_error < 1e-12


def test_nonsemisimple_atilde1_blocks():
    rep = rf.nonsemisimple_atilde1_rep()
    assert np.allclose(rep.cartan_entries(), [[2, -2], [-2, 2]])
    blk = rf.block_decomposition(rep)
    assert blk.dims == (0, 0, 1, 1)
    assert np.allclose(rep.generators[0] @ rep.generators[1], [[1, -1], [0, 1]])
    assert blk.pattern_error < 1e-12


@pytest.mark.parametrize("N", range(3, 8))
@pytest.mark.parametrize("a", [0.5, 2.0, 3.0])
def test_zigzag(N, a):
    rep, z = rf.atilde_model(N, a)
    want = np.eye(N)
    want[0, 0], want[-1, -1] = 1 / a, a
    assert np.abs(z - want).max() <= 1e-9
    assert rf.verify_rep(rep).passed
    assert rf.zigzag_word(N)[-1] == N - 1


def test_atilde_model_rejects_a1():
    with pytest.raises(rf.RepError):
        rf.atilde_model(3, 1.0)


def test_proximal():
    pd = rf.n2_proximal(corpus.cartan("ex31"))
    assert np.array_equal(pd.matrix, [[5, -3], [2, -1]])
    lp, lm = pd.eigenvalues
    assert lp == pytest.approx(2 + math.sqrt(3), abs=1e-12)
    assert lp * lm == pytest.approx(1, abs=1e-12)
    assert np.linalg.norm(pd.matrix @ pd.x_plus - lp * pd.x_plus) <= 1e-9
    assert np.linalg.norm(pd.matrix @ pd.x_minus - lm * pd.x_minus) <= 1e-9
    assert rf.n2_proximal(np.array([[2, -2.0], [-2, 2]])).regime == "unipotent"


def test_invariant_hyperplane():
    rep = rf.build_rep(corpus.cartan("ex31"), 3)
    # ker e3* is the span of the v's, which is invariant; ker e1* is not
    assert rf.is_invariant_hyperplane(rep, [0, 0, 1])
    assert not rf.is_invariant_hyperplane(rep, [1, 0, 0])


def test_rep_json_roundtrip():
    rep = rf.build_rep(corpus.cartan("fig5"))
    back = rf.rep_from_json(rf.rep_to_json(rep))
    assert np.array_equal(back.alpha, rep.alpha) and np.array_equal(back.v, rep.v)
