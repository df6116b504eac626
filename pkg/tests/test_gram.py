import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coorbit import (
    ConsistencyError,
    DimensionError,
    DualPair,
    Frame,
    PreconditionError,
    Weight,
    analysis,
    coorbit_norm,
    cross_gram,
    fixed_point_residual,
    gram_opnorm_linf_w,
    l1_majorant,
    linf_w_norm,
    materialize,
    partial_sum_lift,
    psi_coefficient_bound,
    range_basis,
    verify_projection_identity,
)
from coorbit.frames import analysis_matrix
from coorbit.gram import (
    closedness_check,
    extremal_probe,
    fixed_point_eigenspace,
    principal_angles,
)
from coorbit.report import perturb_dual

from conftest import SQ3, naive_inner, random_pair

ONE = Weight.constant(3)


def explicit_gram(pair):
    M = pair.M
    return np.array([[naive_inner(pair.primal[l], pair.dual[k]) for l in range(M)] for k in range(M)])


def brute_opnorm(G, w):
    """Max over rows of the weighted sup norm of G applied to the row's sign vector."""
    best = 0.0
    for k in range(G.shape[0]):
        row = G[k]
        alpha = np.where(row != 0, row.conj() / np.where(row != 0, np.abs(row), 1), 1) / w
        best = max(best, np.max(np.abs(G @ alpha) * w))
    return best


def test_cross_gram_onb(onb_pair):
    np.testing.assert_array_equal(cross_gram(onb_pair, ONE).entries, np.eye(3))


def test_cross_gram_mercedes(mercedes_pair):
    G = cross_gram(mercedes_pair, ONE).entries
    np.testing.assert_allclose(G, explicit_gram(mercedes_pair), atol=1e-15)
    np.testing.assert_allclose(np.diag(G), [2 / 3] * 3, atol=1e-15)
    off = G[~np.eye(3, dtype=bool)]
    np.testing.assert_allclose(off, -1 / 3, atol=1e-15)


def test_cross_gram_e1e1e2(e1e1e2_pair):
    G = cross_gram(e1e1e2_pair, ONE).entries
    np.testing.assert_array_equal(G, [[0.5, 0.5, 0], [0.5, 0.5, 0], [0, 0, 1]])


def test_cross_gram_weight_length():
    onb = Frame(np.eye(2))
    with pytest.raises(DimensionError):
        cross_gram(DualPair(onb, onb), ONE)


def test_opnorm_examples(onb_pair, mercedes_pair, e1e1e2_pair):
    assert gram_opnorm_linf_w(cross_gram(onb_pair, Weight([1, 7, 0.2]))) == 1
    G = cross_gram(mercedes_pair, ONE)
    assert gram_opnorm_linf_w(G) == pytest.approx(4 / 3, abs=1e-15)
    assert brute_opnorm(G.entries, ONE.values) == pytest.approx(4 / 3, abs=1e-15)
    assert gram_opnorm_linf_w(cross_gram(e1e1e2_pair, ONE)) == 1


@pytest.mark.parametrize("wkind", ["constant", "poly", "exp"])
def test_opnorm_exact_and_dominating(rng, wkind):
    pair = random_pair(rng, 5, 17)
    w = {"constant": Weight.constant(17), "poly": Weight.polynomial(17, 1.5),
         "exp": Weight.exponential(17, 0.2)}[wkind]
    G = cross_gram(pair, w)
    norm = G.opnorm
    for k in range(17):
        probe = extremal_probe(G, k)
        assert linf_w_norm(probe, w) == pytest.approx(1, rel=1e-15)
        assert abs(G.apply(probe)[k]) * w.values[k] == pytest.approx(G.row_sums[k], rel=1e-12)
    assert brute_opnorm(G.entries, w.values) == pytest.approx(norm, rel=1e-12)
    A = rng.standard_normal((1000, 17)) + 1j * rng.standard_normal((1000, 17))
    A /= np.max(np.abs(A) * w.values, axis=1)[:, None]
    assert np.max(np.abs(A @ G.entries.T) * w.values) <= norm * (1 + 1e-12)


def test_coorbit_norm_examples(mercedes_pair):
    onb = Frame(np.eye(3))
    w = Weight([2.0, 0.5, 3.0])
    for l in range(3):
        assert coorbit_norm(DualPair(onb, onb), w, np.eye(3)[l]) == w.values[l]
    assert coorbit_norm(mercedes_pair, ONE, [0, 0]) == 0
    assert coorbit_norm(mercedes_pair, ONE, [1, 0]) == pytest.approx(SQ3 / 3, abs=1e-15)
    with pytest.raises(DimensionError):
        coorbit_norm(mercedes_pair, ONE, [1, 0, 0])


def test_fixed_point_residual_examples(mercedes_pair, rng):
    G = cross_gram(mercedes_pair, ONE)
    f = rng.standard_normal(2)
    a = analysis(mercedes_pair.dual, f)
    assert fixed_point_residual(G, a) <= 1e-10 * linf_w_norm(a, ONE)
    assert fixed_point_residual(G, np.zeros(3)) == 0
    # G delta_0 = (2/3, -1/3, -1/3): residual is max(1/3, 1/3, 1/3)
    assert fixed_point_residual(G, [1, 0, 0]) == pytest.approx(1 / 3, abs=1e-15)


def test_range_basis_examples(mercedes_pair, e1e1e2_pair):
    onb = Frame(np.eye(2))
    Q = range_basis(DualPair(onb, onb)).basis
    assert np.max(principal_angles(Q, np.eye(2))) < 1e-12

    space = range_basis(mercedes_pair)
    assert space.dimension == 2
    # orthogonal complement of the range is the null space of synthesis: (1,1,1)
    assert np.abs(space.basis.conj().T @ np.ones(3)).max() < 1e-14
    np.testing.assert_allclose(space.basis.conj().T @ space.basis, np.eye(2), atol=1e-14)

    Q = range_basis(e1e1e2_pair).basis
    expected = np.array([[1, 0], [1, 0], [0, np.sqrt(2)]]) / np.sqrt(2)
    assert np.max(principal_angles(Q, expected)) < 1e-12


def test_range_basis_rank_deficient():
    # a shape-valid pair whose dual has rank 1 in its analysis matrix cannot be built as a Frame,
    # so exercise the guard with a loose threshold instead
    pair = DualPair.canonical(Frame(np.diag([1.0, 1e-5])))
    with pytest.raises(ConsistencyError):
        range_basis(pair, rtol=1e-2)


def test_projection_identity_onb(onb_pair):
    rep = verify_projection_identity(onb_pair, ONE)
    assert rep.passed
    assert rep.range_residual == 0 and rep.idempotency_residual == 0 and rep.rank == 3


def test_projection_identity_random_corpus():
    rng = np.random.default_rng(1)
    for _ in range(200):
        d = int(rng.integers(1, 17))
        M = int(rng.integers(d, 65))
        pair = random_pair(rng, d, M)
        rep = verify_projection_identity(pair, Weight.polynomial(M, 1), tol=1e-9)
        assert rep.passed, rep


def test_projection_identity_corrupted(rng):
    pair = random_pair(rng, 4, 10)
    rep = verify_projection_identity(perturb_dual(pair, 0.1), ONE.constant(10), tol=1e-9)
    assert not rep.checks["range_identity"]
    assert not rep.passed


def test_eigenspace_is_range(rng):
    for d, M in [(1, 4), (3, 3), (4, 11), (10, 40)]:
        pair = random_pair(rng, d, M)
        G = cross_gram(pair, Weight.constant(M))
        E = fixed_point_eigenspace(G)
        assert E.shape[1] == d
        assert np.max(principal_angles(E, analysis_matrix(pair.dual))) <= 1e-8
        # every eigenvector for eigenvalue 1 from a general eigensolver lies in the range
        vals, vecs = np.linalg.eig(G.entries)
        space = range_basis(pair)
        for lam, v in zip(vals, vecs.T):
            if abs(lam - 1) < 1e-6:
                assert space.distance(v / np.linalg.norm(v)) < 1e-8


def test_psi_coefficient_bound_examples(onb_pair, mercedes_pair, rng):
    rep = psi_coefficient_bound(onb_pair, ONE)
    np.testing.assert_array_equal(rep.lhs, [1, 1, 1])
    np.testing.assert_array_equal(rep.rhs, [1, 1, 1])
    rep = psi_coefficient_bound(mercedes_pair, ONE)
    np.testing.assert_allclose(rep.lhs, [2 / 3] * 3, atol=1e-15)
    np.testing.assert_allclose(rep.rhs, [4 / 3] * 3, atol=1e-15)
    assert rep.passed
    pair = DualPair.canonical(materialize({"kind": "banded_decay", "n": 24}))
    w = Weight.polynomial(pair.M, 1)
    rep = psi_coefficient_bound(pair, w)
    # oracle: column l of G is C_dual psi_l
    direct = [linf_w_norm(analysis(pair.dual, pair.primal[l]), w) for l in range(pair.M)]
    np.testing.assert_allclose(rep.lhs, direct, rtol=1e-13)
    assert rep.passed and np.all(rep.margin >= 0)


def test_l1_majorant_examples(onb_pair, mercedes_pair):
    for k in range(3):
        m, total = l1_majorant(onb_pair, ONE, k, 1.0)
        np.testing.assert_array_equal(m, np.eye(3)[k])
        assert total == 1
    rep = l1_majorant(mercedes_pair, ONE, 0, 1.0)
    assert rep.total == pytest.approx(4 / 3, abs=1e-15)
    assert rep.bound == pytest.approx(4 / 3, abs=1e-15)
    assert rep.passed
    with pytest.raises(IndexError):
        l1_majorant(mercedes_pair, ONE, 3)


def test_l1_majorant_banded_truncations():
    totals = []
    for n in (16, 32, 64):
        pair = DualPair.canonical(materialize({"kind": "banded_decay", "n": n}))
        w = Weight.polynomial(pair.M, 1)
        rep = l1_majorant(pair, w, 0, 1.0)
        assert rep.passed
        totals.append(rep.total)
    # row 0 only sees a neighbourhood of the left boundary; totals stabilize
    assert abs(totals[2] - totals[1]) <= abs(totals[1] - totals[0]) + 1e-15


def test_majorant_dominates_products(rng):
    pair = random_pair(rng, 4, 12)
    w = Weight.exponential(12, 0.1)
    G = cross_gram(pair, w)
    for _ in range(10):
        f = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        nb = coorbit_norm(pair, w, f)
        coeff = analysis(pair.dual, f)
        for k in range(12):
            m = l1_majorant(pair, w, k, nb).sequence
            assert np.all(np.abs(coeff * G.entries[k]) <= m * (1 + 1e-12))


def test_partial_sum_lift_examples(mercedes_pair, rng):
    f = np.array([1.0, 0.0])
    alpha = analysis(mercedes_pair.dual, f)
    trace = partial_sum_lift(mercedes_pair, ONE, alpha)
    assert trace.bound == pytest.approx(SQ3 / 3 * 4 / 3, abs=1e-15)
    assert trace.passed
    np.testing.assert_allclose(trace.vectors[-1], f, atol=1e-15)

    zero = partial_sum_lift(mercedes_pair, ONE, np.zeros(3))
    assert np.all(zero.vectors == 0) and np.all(zero.cauchy == 0) and zero.passed

    pair = random_pair(rng, 6, 20)
    w = Weight.polynomial(20, 1)
    g = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    trace = partial_sum_lift(pair, w, analysis(pair.dual, g))
    assert trace.passed
    np.testing.assert_allclose(trace.vectors[-1], g, atol=1e-12)
    direct = [sum(analysis(pair.dual, g)[l] * pair.primal[l] for l in range(n + 1)) for n in range(20)]
    np.testing.assert_allclose(trace.vectors, direct, atol=1e-12)


def test_partial_sum_lift_custom_nesting(mercedes_pair):
    alpha = analysis(mercedes_pair.dual, [0.3, -2.0])
    trace = partial_sum_lift(mercedes_pair, ONE, alpha, nesting=[[2], [0, 2], [0, 1, 2]])
    assert trace.passed and trace.vectors.shape == (3, 2)


@pytest.mark.parametrize("nesting", [[[0, 1], [0]], [[0], [0, 1]], [[5]], []])
def test_partial_sum_lift_bad_nesting(mercedes_pair, nesting):
    alpha = analysis(mercedes_pair.dual, [1.0, 1.0])
    with pytest.raises(PreconditionError):
        partial_sum_lift(mercedes_pair, ONE, alpha, nesting=nesting)


def test_partial_sum_lift_rejects_non_fixed_point(mercedes_pair):
    with pytest.raises(PreconditionError):
        partial_sum_lift(mercedes_pair, ONE, [1, 0, 0])


def test_closedness(rng):
    pair = random_pair(rng, 3, 9)
    rep = closedness_check(pair, Weight.polynomial(9, 2), rng)
    assert rep.passed
    assert np.all(np.diff(rep.distances) < 0)


def test_weight_spread_warning(rng):
    pair = random_pair(rng, 2, 6)
    with pytest.warns(RuntimeWarning, match="spread"):
        rep = verify_projection_identity(pair, Weight.exponential(6, 5.0))
    assert rep.warnings


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10), st.integers(0, 2**32 - 1), st.floats(-2, 2))
def test_gram_properties(d, extra, seed, s):
    rng = np.random.default_rng(seed)
    M = d + extra
    pair = random_pair(rng, d, M)
    w = Weight.polynomial(M, s)
    G = cross_gram(pair, w)
    np.testing.assert_allclose(G.entries, analysis_matrix(pair.dual) @ pair.primal.vectors, atol=1e-12)
    Gm = G.entries
    assert np.linalg.norm(Gm @ Gm - Gm) <= 1e-9 * (1 + np.linalg.norm(Gm))
    for _ in range(10):
        f = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        a = analysis(pair.dual, f)
        assert fixed_point_residual(G, a) <= 1e-10 * linf_w_norm(a, w)
        assert coorbit_norm(pair, w, f) == linf_w_norm(a, w)
    assert coorbit_norm(pair, w, np.zeros(d)) == 0


def test_coorbit_norm_injective(rng):
    from coorbit import frame_bounds

    for d, M in [(2, 5), (6, 6), (8, 30)]:
        pair = random_pair(rng, d, M)
        w = Weight.polynomial(M, -1)
        A_dual, _ = frame_bounds(pair.dual)
        floor = np.sqrt(A_dual / M) * w.values.min()
        for _ in range(50):
            f = rng.standard_normal(d) + 1j * rng.standard_normal(d)
            f /= np.linalg.norm(f)
            # ||C f||_inf >= ||C f||_2 / sqrt(M) >= sqrt(A / M): zero norm forces f = 0
            assert coorbit_norm(pair, w, f) >= floor * (1 - 1e-12)
