"""Exact eigen-relations, with sympy as an independent oracle where it helps."""

import pytest
import sympy as sp
from oracles import sympy_pn, to_sympy

from bispectral.algebra import MPoly, Q, RatFn, paired_vars
from bispectral.diffop import make_standard
from bispectral.eigenring import (
    PSI,
    SIGMA,
    apply_op,
    bispectral_symbol,
    derive_pn,
    eigen_check,
    first_derivative_sum_terms,
    make_function,
    printed_pn,
    psi_phase_data,
    symmetry_check,
)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pn_matches_sympy(n):
    expected, _, _ = sympy_pn(n)
    assert not expected.has(sp.Symbol("P")) and not expected.has(sp.Symbol("A"))
    assert sp.simplify(to_sympy(derive_pn(n)) - expected) == 0


def test_pn_two_particles_closed_form():
    vars = paired_vars(2)
    z1, z2 = MPoly.gens(vars)[2:]
    want = RatFn.from_poly((z1 - z2) ** 2 * Q(1, 2) + z1 + z2)
    assert derive_pn(2) == want
    assert printed_pn(2) == RatFn.from_poly((z1 - z2) ** 2 * 2 + z1 + z2)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_psi_eigen_relations(n):
    psi = make_function(PSI, n)
    assert eigen_check(make_standard(n, "airy_sum"), psi, derive_pn(n)).passed
    zs = MPoly.gens(paired_vars(n))[n:]
    for i in range(n):
        for j in range(i + 1, n):
            r = eigen_check(make_standard(n, "diff_ij", i + 1, j + 1), psi, RatFn.from_poly(zs[i] - zs[j]))
            assert r.passed


def test_wrong_eigenvalue_is_caught():
    r = eigen_check(make_standard(2, "airy_sum"), make_function(PSI, 2), printed_pn(2))
    assert not r.passed and r.residual.terms


@pytest.mark.parametrize("n", [1, 2, 3])
def test_sigma_is_an_eigenfunction_of_the_airy_sum(n):
    zs = MPoly.gens(paired_vars(n))[n:]
    assert eigen_check(make_standard(n, "airy_sum"), make_function(SIGMA, n), RatFn.from_poly(sum(zs[1:], zs[0]))).passed


@pytest.mark.parametrize("n", [2, 3])
def test_first_derivative_terms_cancel(n):
    assert (1,) not in first_derivative_sum_terms(n).terms


def test_psi_data_is_symmetric():
    for n in (1, 2, 3):
        assert symmetry_check(psi_phase_data(n))


def test_bispectral_symbol_of_d2(d2):
    sym = bispectral_symbol(d2)
    vars = paired_vars(2)
    x1, x2, z1, z2 = MPoly.gens(vars)
    assert sym == RatFn((x1 - x2) * (z1 - z2) - 2, (x1 - x2) * (z1 - z2))
    assert symmetry_check(sym)


def test_d2_maps_psi_to_a_deformed_eigenfunction(d2):
    out = apply_op(d2, make_function(PSI, 2))
    assert eigen_check(make_standard(2, "deformed"), out, derive_pn(2)).passed


def test_symbol_requires_translation_invariance():
    with pytest.raises(ValueError):
        bispectral_symbol(make_standard(2, "airy_sum"))
