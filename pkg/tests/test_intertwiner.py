import pytest

from bispectral.algebra import MPoly, RatFn, x_vars
from bispectral.diffop import DiffOp, is_translation_invariant, make_standard
from bispectral.intertwiner import (
    AnsatzSpec,
    ResourceError,
    canonical_intertwiner,
    centralizer_search_first_order,
    homogeneous_subspace,
    intertwine_residual,
    known_intertwiner,
    solve_intertwiner,
    top_symbol,
    translation_invariant_subspace,
    vandermonde_symbol,
    verify_intertwine,
)


def test_one_particle_closed_form():
    vars = x_vars(1)
    x = MPoly.gens(vars)[0]
    L = make_standard(1, "laplacian")
    Lt = L - RatFn(MPoly.const(vars, 2), x * x)
    assert verify_intertwine(known_intertwiner(1), L, Lt)


def test_two_particle_solution_space():
    res = solve_intertwiner(make_standard(2, "laplacian"), make_standard(2, "cm"), AnsatzSpec(2, 1, 1, 1))
    assert res.dimension == 1
    assert res.solutions[0] == known_intertwiner(2)


def test_two_particle_airy_pair():
    D = known_intertwiner(2)
    assert verify_intertwine(D, make_standard(2, "airy_sum"), make_standard(2, "deformed"))
    res = solve_intertwiner(make_standard(2, "airy_sum"), make_standard(2, "deformed"), AnsatzSpec(2, 1, 1, 1))
    assert res.dimension == 1 and res.solutions[0] == D


def test_non_intertwiner_leaves_a_residual():
    D = DiffOp.partial(2, 1)
    assert not intertwine_residual(D, make_standard(2, "laplacian"), make_standard(2, "cm")).is_zero()


def test_empty_ansatz():
    res = solve_intertwiner(make_standard(2, "laplacian"), make_standard(2, "cm"), AnsatzSpec(2, 0, 0, 0))
    assert res.dimension == 0


def test_resource_cap():
    with pytest.raises(ResourceError) as info:
        solve_intertwiner(make_standard(3, "laplacian"), make_standard(3, "cm"), AnsatzSpec(3, 3, 6, 3), cap=10)
    assert info.value.dimension == AnsatzSpec(3, 3, 6, 3).dimension


def test_spec_validation_and_digest():
    with pytest.raises(ValueError):
        AnsatzSpec(2, -1, 0, 0)
    assert AnsatzSpec(2, 1, 1, 1).digest() == AnsatzSpec(2, 1, 1, 1).digest()
    assert AnsatzSpec(2, 1, 1, 1).digest() != AnsatzSpec(2, 1, 2, 1).digest()


def test_first_order_centralizer_is_trivial():
    basis = centralizer_search_first_order(make_standard(2, "deformed"), AnsatzSpec(2, 1, 1, 1))
    assert len(basis) == 1
    assert basis[0].order() == 0 and basis[0].terms[(0, 0)].is_constant()
    with pytest.raises(ValueError):
        centralizer_search_first_order(make_standard(2, "deformed"), AnsatzSpec(2, 2, 1, 1))


def test_subspace_filters_on_two_particles():
    D = known_intertwiner(2)
    extra = DiffOp.partial(2, 1)
    assert len(translation_invariant_subspace([D, extra])) == 1
    assert len(homogeneous_subspace([D], -1)) == 1
    assert homogeneous_subspace([D], 0) == []
    assert canonical_intertwiner([D], 2)[0] == D


def test_d3_properties(d3):
    assert not d3.is_zero()
    assert d3.order() == 3
    assert verify_intertwine(d3, make_standard(3, "laplacian"), make_standard(3, "cm"))
    assert verify_intertwine(d3, make_standard(3, "airy_sum"), make_standard(3, "deformed"))
    assert is_translation_invariant(d3)
    assert top_symbol(d3) == vandermonde_symbol(3)


def test_d3_certificate(d3_construction):
    c, _ = d3_construction
    cert = c.certificate
    assert cert["verified"]
    assert cert["canonical_dimension"] == 1
    assert cert["residuals"] == {"airy_sum->deformed": "zero operator", "laplacian->cm": "zero operator"}


def test_one_particle_airy_operator_has_no_rational_intertwiner():
    vars = x_vars(1)
    x = MPoly.gens(vars)[0]
    A = make_standard(1, "airy_sum")
    At = A - RatFn(MPoly.const(vars, 2), x * x)
    assert solve_intertwiner(A, At, AnsatzSpec(1, 2, 3, 3)).dimension == 0


def test_identity_does_not_intertwine():
    assert not verify_intertwine(DiffOp.identity(2), make_standard(2, "laplacian"), make_standard(2, "cm"))


def test_centralizers_of_free_and_airy_operators():
    def span_contains(basis, op):
        from bispectral.linalg import ExactMatrix, solve_linear_exact

        keys = sorted({(a, e) for b in basis + [op] for a, c in b.terms.items() for e in c.num.terms})
        if any(not c.den.is_constant() for b in basis + [op] for c in b.terms.values()):
            raise AssertionError("expected polynomial coefficients")

        def coord(b, key):
            a, e = key
            c = b.terms.get(a)
            return 0 if c is None else c.num.terms.get(e, 0) / c.den.constant_value()

        A = ExactMatrix.from_rows([[coord(b, k) for b in basis] for k in keys])
        return solve_linear_exact(A, [coord(op, k) for k in keys]).consistent

    lap = centralizer_search_first_order(make_standard(2, "laplacian"), AnsatzSpec(2, 1, 1, 0))
    assert span_contains(lap, DiffOp.partial(2, 1)) and span_contains(lap, DiffOp.partial(2, 2))
    H3 = centralizer_search_first_order(make_standard(3, "airy_sum"), AnsatzSpec(3, 1, 1, 0))
    assert span_contains(H3, make_standard(3, "diff_ij", 1, 3))
    assert span_contains(H3, make_standard(3, "diff_ij", 2, 3))
    assert span_contains(H3, DiffOp.identity(3))
