import io
import math

import numpy as np
import pytest
import sympy

from kronecker_triples.hilbert import assemble, fiber_operator, window
from kronecker_triples.spectral import (SQRT_2PI, count_dirac, count_dirac_bruteforce, count_linear, count_torus,
                                        dirac_action, dirac_operator, dirac_operator_spectral, gamma,
                                        linear_eigenvalue_exact, linear_spectrum, mixed_lambda, mixed_spectrum,
                                        spectrum_rows, weyl_count, write_csv)


def test_linear_examples(params):
    assert linear_eigenvalue_exact(params, 3, 4) == 5
    sp = linear_spectrum(params, 0, 0)
    assert [p.eigenvalue for p in sp.pairs] == [0.0] * 4


def test_linear_eigenvectors_orthonormal(params):
    sp = linear_spectrum(params, 2, -3)
    V = np.array([[p.eigenvector.fiber(2, -3)[c] for c in range(4)] for p in sp.pairs])
    assert np.allclose(V @ V.conj().T, np.eye(4), atol=1e-12)


def test_linear_eigen_residuals(params):
    Q = assemble(params, "Qtilde")
    for k, l in window(3):
        for p in linear_spectrum(params, k, l).pairs:
            r = Q.apply(p.eigenvector) - p.eigenvector.scale(p.eigenvalue)
            assert r.max_abs({}) < 1e-12


def test_gamma_unimodular_and_det(params):
    for k, l in ((1, 0), (2, 5), (-3, 1)):
        ms = mixed_spectrum(params, k, l)
        assert abs(abs(ms.gamma_plus) - 1) < 1e-14 and abs(abs(ms.gamma_minus) - 1) < 1e-14
        assert abs(ms.change_of_basis_det() + 4 * ms.gamma_plus) < 1e-12
    assert gamma(params, 0, 0, "+").value == 1


def test_mixed_kernel(params):
    ms = mixed_spectrum(params, 0, 0)
    assert len(ms.pairs) == 4 and all(p.eigenvalue == 0 for p in ms.pairs)


def test_mixed_and_dirac_residuals(params):
    Qm = assemble(params, "Qmixed")
    D = dirac_operator(params)
    for k, l in window(3):
        for p in mixed_spectrum(params, k, l).pairs:
            assert (Qm.apply(p.eigenvector) - p.eigenvector.scale(p.eigenvalue)).max_abs({}) < 1e-11
            d = dirac_action(params, p.family, k, l, p.branch)
            assert abs(d.eigenvalue - math.copysign(math.sqrt(abs(p.eigenvalue)), p.eigenvalue)) < 1e-12
            assert (D.apply(d.eigenvector) - d.eigenvector.scale(d.eigenvalue)).max_abs({}) < 1e-11


def test_dirac_is_q_times_inverse_quartic_root(params):
    D = dirac_operator(params)
    for k, l in ((1, 2), (-3, 0), (4, -4)):
        assert np.abs(dirac_operator_spectral(params, k, l) - fiber_operator(D, k, l)).max() < 1e-12
    assert np.abs(fiber_operator(D, 0, 0)).max() == 0


def test_counts_against_bruteforce(params):
    def brute(R):
        n = int(R) + 1
        return 4 * sum(1 for k in range(-n, n + 1) for l in range(-n, n + 1) if k * k + l * l <= R * R)

    for R in (0.5, 1, 3.2, 10):
        assert count_linear(R) == brute(R)
    assert count_linear(10) == 1268
    assert count_torus(SQRT_2PI * 10) == 634
    assert count_torus(0.9 * SQRT_2PI) == 2
    for R in (1, 2.5, 5, 7.3):
        assert count_dirac(params, R) == count_dirac_bruteforce(params, R)


def test_weyl_exponents(params):
    assert abs(weyl_count("Qtilde", 200).fitted_exponent - 2) < 0.1
    assert abs(weyl_count("Dirac", 100, params).fitted_exponent - 3) < 0.15
    assert abs(weyl_count("torus", 200 * SQRT_2PI).fitted_exponent - 2) < 0.1
    with pytest.raises(ValueError):
        weyl_count("bogus", 50)


def test_spectrum_table(params):
    rows = spectrum_rows(params, "linear", 2)
    assert len(rows) == 4 * 25
    evs = [r[4] for r in rows]
    assert evs == sorted(evs)
    buf = io.StringIO()
    write_csv(rows, buf)
    assert buf.getvalue().splitlines()[0] == "k,l,family,branch,eigenvalue"
    d = spectrum_rows(params, "dirac", 1)
    for k, l, _, br, ev in d:
        lam = mixed_lambda(params, k, l)
        assert abs(abs(ev) - lam ** 0.5) < 1e-12


def test_exact_eigenvalue_identity():
    from fractions import Fraction
    from kronecker_triples.algebra import FoliationParams
    p = FoliationParams(Fraction(5, 13), Fraction(12, 13))
    for k, l in ((1, 1), (7, -2)):
        assert linear_eigenvalue_exact(p, k, l) == sympy.sqrt(k * k + l * l)
