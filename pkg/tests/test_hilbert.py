import io

import numpy as np
import pytest

from kronecker_triples.hilbert import (BlockOperator, ModeIndex, SectionVector, WindowTooLarge, apply_algebra,
                                       assemble, commutator, diff_ops, operator_difference, pi, to_dense,
                                       write_triplets)
from kronecker_triples.scalars import I, PhaseExponent, Phased


def coeff(vec, k, l, comp):
    return vec.coeffs.get(ModeIndex(k, l, comp), Phased())


def test_algebra_action(alg):
    e1 = SectionVector.basis(0, 0, 1)
    assert coeff(apply_algebra(alg.u1, e1), 1, 0, 1) == Phased.const(1)
    e3 = SectionVector.basis(0, 0, 3)
    assert apply_algebra(alg.v("T1"), e3).coeffs == {ModeIndex(0, 0, 3): Phased.const(1)}
    e2 = SectionVector.basis(1, 0, 2)
    out = apply_algebra(alg.v("T1"), e2)
    assert out.coeffs == {ModeIndex(1, 0, 2): Phased.phase(PhaseExponent.atom("a*T1"))}


def test_representation_is_multiplicative(alg):
    rng = np.random.default_rng(1)
    from kronecker_triples.algebra import random_element
    for _ in range(5):
        x, y = random_element(alg, rng), random_element(alg, rng)
        exact, _, _ = operator_difference(pi(x * y), pi(x) @ pi(y), 2)
        assert exact


def test_differentials(params):
    X, Y = params.X(2, -1), params.Y(2, -1)
    dL = diff_ops(params, "dL")
    out = dL.apply(SectionVector.basis(2, -1, 1))
    assert coeff(out, 2, -1, 2) == Phased.const(I * X)
    assert dL.apply(SectionVector.basis(2, -1, 2)).is_zero()
    assert diff_ops(params, "dH_star").apply(SectionVector.basis(2, -1, 1)).is_zero()
    dH = diff_ops(params, "dH")
    assert coeff(dH.apply(SectionVector.basis(2, -1, 1)), 2, -1, 3) == Phased.const(I * Y)
    with pytest.raises(ValueError):
        diff_ops(params, "dQ")


def test_differentials_square_to_zero(params):
    for name in ("dL", "dH", "dL_star", "dH_star"):
        op = diff_ops(params, name)
        assert operator_difference(op @ op, BlockOperator.zero(), 2)[0]


def test_qtilde_on_e1(params):
    Q = assemble(params, "Qtilde")
    k, l = 3, -2
    out = Q.apply(SectionVector.basis(k, l, 1))
    assert coeff(out, k, l, 2) == Phased.const(I * params.X(k, l))
    assert coeff(out, k, l, 3) == Phased.const(I * params.Y(k, l))


def test_qtilde_squares_to_laplacian(params):
    Q = assemble(params, "Qtilde")
    sq = Q @ Q
    for k, l in ((0, 1), (2, 3), (-4, 1)):
        lap = k * k + l * l
        f = sq.fiber(k, l)
        for i in range(4):
            for j in range(4):
                assert f[i, j] == Phased.const(lap if i == j else 0)


def test_qmixed_kernel_and_qh(params):
    Qm = assemble(params, "Qmixed")
    assert Qm.apply(SectionVector.basis(0, 0, 1)).is_zero()
    QH = assemble(params, "QH")
    ref = diff_ops(params, "dH") + diff_ops(params, "dH_star")
    assert operator_difference(QH, ref, 2)[0]


def test_commutator_examples(params, alg):
    Q = assemble(params, "Qtilde")
    assert operator_difference(commutator(Q, alg.v("T1")), BlockOperator.zero(), 3)[0]
    assert operator_difference(commutator(Q, alg.one), BlockOperator.zero(), 3)[0]
    c = commutator(Q, alg.u1).apply(SectionVector.basis(1, 1, 1))
    assert coeff(c, 2, 1, 2) == Phased.const(I * params.a)
    assert coeff(c, 2, 1, 3) == Phased.const(I * params.b)


def test_dense_hermiticity(params):
    d = to_dense(assemble(params, "Qtilde"), 3)
    assert np.abs(d.matrix - d.matrix.conj().T).max() < 1e-14
    dl = to_dense(diff_ops(params, "dL"), 3).matrix
    # the adjoint of dL is dL_star
    dls = to_dense(diff_ops(params, "dL_star"), 3).matrix
    assert np.abs(dl.conj().T - dls).max() < 1e-14
    assert np.array_equal(to_dense(BlockOperator.identity(), 1).matrix, np.eye(36))


def test_dense_boundary_and_limit(params, alg):
    d = to_dense(pi(alg.u1), 2)
    assert d.boundary.sum() > 0 and d.interior().sum() > 0
    with pytest.raises(WindowTooLarge):
        to_dense(assemble(params, "Qtilde"), 60)


def test_triplet_export(params):
    buf = io.StringIO()
    n = write_triplets(to_dense(assemble(params, "Qtilde"), 1), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("# mode ordering") and len(lines) == n + 2


def test_leakage_tracked(alg):
    out = pi(alg.u1).apply(SectionVector.basis(2, 0, 1), radius=2)
    assert out.is_zero() and out.leakage > 0
