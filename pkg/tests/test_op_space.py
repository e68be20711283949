import math

import numpy as np
import pytest

from bjortho.norms import NormSpec, SpaceMismatch, UnsupportedNorm, sample_sphere_array
from bjortho.op_space import (
    AttainmentKind,
    DimensionOverflow,
    MatrixFormatError,
    Op,
    ZeroOperator,
    attainment_set,
    format_matrix,
    mt_subset_of_ma,
    op_is_bj_orthogonal,
    op_is_chmielinski_orthogonal,
    op_is_dragomir_orthogonal,
    op_line,
    op_norm,
    op_norm_info,
    parse_matrix,
    restricted_norm_complement,
    sign_vectors,
)
from bjortho.vec_ortho import Outcome

H, F, M = Outcome.HOLDS, Outcome.FAILS, Outcome.MARGINAL
M22 = [[1, 2], [3, 4]]
NIL = [[0, 1], [0, 0]]


def test_op_norm_examples():
    assert op_norm(Op.on(np.diag([2.0, 1.0]))) == 2.0
    assert op_norm(Op.on(M22, 1)) == 6.0
    assert op_norm(Op.on(M22, "inf")) == 7.0
    assert op_norm(Op.on(np.zeros((2, 2)))) == 0.0


def test_op_norm_mixed_spaces():
    # l_1 -> l_2: largest Euclidean column norm; l_inf -> l_1: max over signs of ||Ts||_1
    assert math.isclose(op_norm(Op.on(M22, 1, 2)), math.hypot(2, 4))
    assert op_norm(Op.on(M22, "inf", 1)) == 10.0
    val, exact = op_norm_info(Op.on(M22, 3))
    assert not exact
    assert op_norm_info(Op.on(M22, 2))[1]


@pytest.mark.parametrize("p,q", [(2, 2), (1, 1), ("inf", "inf"), (1, 2), ("inf", 2), (3, 3), (1.5, 2)])
def test_op_norm_dominates_samples(p, q):
    rng = np.random.default_rng(3)
    T = Op.on(rng.standard_normal((3, 3)), p, q)
    n = op_norm(T)
    pts = sample_sphere_array(T.domain, 1000, seed=1)
    vals = T.codomain.norm_array(pts @ T.entries.T)
    assert vals.max() <= n * (1 + 1e-9)


@pytest.mark.parametrize("p", [1.0, 2.0, math.inf])
def test_norm_axioms_and_convexity(p):
    rng = np.random.default_rng(7)
    for _ in range(20):
        T = Op.on(rng.standard_normal((3, 3)), p)
        A = Op.on(rng.standard_normal((3, 3)), p)
        a = float(rng.normal())
        assert op_norm(T.plus(A)) <= op_norm(T) + op_norm(A) + 1e-12
        assert math.isclose(op_norm(Op(a * T.entries, T.domain, T.codomain)), abs(a) * op_norm(T), rel_tol=1e-12)
        l1, l2 = rng.uniform(-3, 3, 2)
        f = op_line(T, A)
        assert f((l1 + l2) / 2) <= (f(l1) + f(l2)) / 2 + 1e-12


def test_weighted_op_norm():
    dom = NormSpec(2, 2.0, weights=(4.0, 1.0))
    T = Op(np.eye(2), dom, dom)
    assert math.isclose(op_norm(T), 1.0)
    cod = NormSpec(2, 1.0, weights=(2.0, 1.0))
    S = Op(np.eye(2), NormSpec(2, 1.0), cod)
    assert op_norm(S) == 2.0


def test_sign_vectors():
    s = sign_vectors(3)
    assert s.shape == (4, 3) and np.all(s[:, 0] == 1)
    assert len({tuple(r) for r in s}) == 4
    with pytest.raises(DimensionOverflow):
        sign_vectors(21)


def test_attainment_examples():
    m = attainment_set(Op.on(np.diag([2.0, 1.0])))
    assert m.kind is AttainmentKind.SUBSPHERE and m.dimension == 1
    assert np.allclose(np.abs(m.basis[:, 0]), [1, 0])
    assert math.isclose(m.singular_gap, 0.5)
    m = attainment_set(Op.on(np.eye(2)))
    assert m.kind is AttainmentKind.SUBSPHERE and m.dimension == 2 and m.is_continuum
    m = attainment_set(Op.on(M22, 1))
    assert m.kind is AttainmentKind.FINITE and m.complete
    assert {tuple(r) for r in m.points} == {(0.0, 1.0), (-0.0, -1.0)}
    m = attainment_set(Op.on(M22, "inf"))
    assert {tuple(r) for r in m.points} == {(1.0, 1.0), (-1.0, -1.0)}
    with pytest.raises(ZeroOperator):
        attainment_set(Op.on(np.zeros((2, 2))))


def test_attainment_ties_flag_incomplete():
    m = attainment_set(Op.on([[1, -1], [1, 1]], 1))
    assert len(m.points) == 4 and not m.complete


@pytest.mark.parametrize("p", [1.0, 2.0, math.inf, 3.0])
def test_attainment_members_attain(p):
    rng = np.random.default_rng(9)
    for _ in range(10):
        T = Op.on(rng.standard_normal((3, 3)), p)
        m = attainment_set(T)
        pts = m.finite_points() if not m.is_continuum else (m.basis.T)
        assert np.allclose(T.domain.norm_array(pts), 1.0)
        assert np.allclose(T.codomain.norm_array(pts @ T.entries.T), m.attained_norm, rtol=1e-9)
        assert m.exact == (p != 3.0)
        if m.points is not None:
            assert {tuple(r) for r in m.points} == {tuple(-r) for r in m.points}


def test_restricted_norm_examples():
    T = Op.on(np.diag([2.0, 1.0]))
    assert restricted_norm_complement(T, np.array([[1.0], [0.0]])) == 1.0
    assert restricted_norm_complement(Op.on(np.eye(2)), np.eye(2)) == 0.0
    d = [1.0] + [0.5 - 1 / (n + 2) for n in range(2, 51)]
    assert abs(restricted_norm_complement(Op.on(np.diag(d)), np.eye(50)[:, :1]) - (0.5 - 1 / 52)) < 1e-12
    with pytest.raises(UnsupportedNorm):
        restricted_norm_complement(Op.on(M22, 1), np.array([[1.0], [0.0]]))
    with pytest.raises(ValueError):
        restricted_norm_complement(T, np.array([[2.0], [0.0]]))


def test_op_predicate_examples():
    T = Op.on(np.diag([2.0, 1.0]))
    r = op_is_bj_orthogonal(T, Op.on(NIL))
    assert r.satisfied and r.margin >= 0
    assert op_is_chmielinski_orthogonal(T, Op.on(np.eye(2)), 0.5).outcome is F
    R = Op.on(np.random.default_rng(1).standard_normal((3, 3)))
    r = op_is_bj_orthogonal(R, R)
    assert r.outcome is F and abs(r.witness_lambda + 1) < 1e-6
    Z = Op.on(np.zeros((2, 2)))
    assert op_is_bj_orthogonal(T, Z).outcome is H
    assert op_is_dragomir_orthogonal(T, Z, 0.3).outcome is H
    assert op_is_chmielinski_orthogonal(T, Z, 0.3).outcome is H


def test_op_dragomir_example():
    # ||T + lam I|| = max(|2 + lam|, |1 + lam|) bottoms out at 0.5 < sqrt(1 - 0.01) * 2
    r = op_is_dragomir_orthogonal(Op.on(np.diag([2.0, 1.0])), Op.on(np.eye(2)), 0.1)
    assert r.outcome is F
    assert abs(r.witness_lambda + 1.5) < 1e-6


def test_general_p_predicates_flagged_approximate():
    T = Op.on(M22, 3)
    assert op_is_bj_orthogonal(T, Op.on(NIL, 3)).approximate


def test_space_mismatch():
    with pytest.raises(SpaceMismatch):
        op_is_bj_orthogonal(Op.on(M22, 1), Op.on(M22, 2))
    with pytest.raises(SpaceMismatch):
        Op(np.eye(2), NormSpec(3), NormSpec(2))


def test_mt_subset_of_ma():
    T = Op.on(np.diag([2.0, 1.0]))
    assert mt_subset_of_ma(T, Op.on(np.eye(2)))
    assert not mt_subset_of_ma(T, Op.on(np.diag([1.0, 2.0])))
    assert mt_subset_of_ma(Op.on(M22, 1), Op.on([[0, 5], [1, 0]], 1))


def test_matrix_format_roundtrip():
    T = Op.on([[1.5, -2.0, 0.1], [3.0, 4.0, 1e-17]], "inf", 1)
    U = parse_matrix(format_matrix(T))
    assert np.array_equal(U.entries, T.entries)
    assert U.domain == T.domain and U.codomain == T.codomain


def test_matrix_format_parsing():
    text = """
    # a comment
    rows: 2
    cols: 2
    domain: inf
    entries: 1, 2   # trailing comment
             3 4
    """
    T = parse_matrix(text)
    assert T.domain.p == math.inf and T.codomain.p == math.inf
    assert np.array_equal(T.entries, M22)


@pytest.mark.parametrize(
    "text",
    [
        "rows: 2\ncols: 2\nentries: 1 2 3",
        "rows: 2\nentries: 1 2 3 4",
        "rows: 2\ncols: 2\nentries: 1 2 3 x",
        "rows: 2\ncols: 2\ncolour: red\nentries: 1 2 3 4",
        "rows: 2\ncols: 2\ndomain: 0.5\nentries: 1 2 3 4",
        "rows: 2\ncols: 2\nentries: 1 2 3 nan",
        "rows: 2\nrows: 2\ncols: 2\nentries: 1 2 3 4",
        "1 2 3 4",
    ],
)
def test_matrix_format_errors(text):
    with pytest.raises(MatrixFormatError):
        parse_matrix(text)
