import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bispectral.algebra import MPoly, Q, RatFn, x_vars
from bispectral.diffop import (
    DiffOp,
    is_translation_invariant,
    make_standard,
    op_commutator,
    op_compose,
    op_symbol,
)

N = 2
VARS = x_vars(N)
X1, X2 = MPoly.gens(VARS)
COEFFS = [RatFn.const(VARS, 1), RatFn.from_poly(X1), RatFn.from_poly(X2 * X2 - X1),
          RatFn(MPoly.const(VARS, 1), X1 - X2), RatFn(X1, (X1 - X2) ** 2)]


@st.composite
def ops(draw, max_order=2):
    terms = {}
    for _ in range(draw(st.integers(1, 3))):
        a = (draw(st.integers(0, max_order)), draw(st.integers(0, max_order)))
        if sum(a) > max_order:
            continue
        terms[a] = draw(st.sampled_from(COEFFS)) * draw(st.integers(-3, 3))
    return DiffOp(N, terms)


slow = settings(max_examples=20, deadline=None)


@slow
@given(ops(), ops(), ops())
def test_composition_is_associative(a, b, c):
    assert op_compose(op_compose(a, b), c) == op_compose(a, op_compose(b, c))


@slow
@given(ops(1), ops(1), ops(1))
def test_jacobi_identity(a, b, c):
    total = (op_commutator(a, op_commutator(b, c))
             + op_commutator(b, op_commutator(c, a))
             + op_commutator(c, op_commutator(a, b)))
    assert total.is_zero()


@slow
@given(ops(), ops(), st.integers(-4, 4))
def test_symbol_is_linear(a, b, k):
    assert op_symbol(a * Q(k) + b).symbol == op_symbol(a).symbol * Q(k) + op_symbol(b).symbol


def test_leibniz_rule():
    d1 = DiffOp.partial(N, 1)
    f = RatFn(X1 * X2, X1 - X2)
    got = op_compose(d1, DiffOp.multiplication(N, f))
    assert got == DiffOp(N, {(1, 0): f, (0, 0): f.diff(0)})


def test_weyl_relation():
    d1 = DiffOp.partial(N, 1)
    x1 = DiffOp.multiplication(N, X1)
    assert op_commutator(d1, x1) == DiffOp.identity(N)


def test_standard_operators():
    lap = make_standard(2, "laplacian")
    assert lap.order() == 2 and len(lap.terms) == 2
    cm = make_standard(2, "cm")
    assert cm.coefficient((0, 0)) == RatFn(MPoly.const(VARS, -4), (X1 - X2) ** 2)
    diff = make_standard(2, "deformed") - make_standard(2, "airy_sum")
    assert diff == cm - lap
    with pytest.raises(ValueError):
        make_standard(1, "cm")
    with pytest.raises(ValueError):
        make_standard(2, "diff_ij", 1, 1)


def test_translation_invariance():
    # the Laplacian contains (sum d_i)^2, so only its coefficients are shift-invariant
    assert is_translation_invariant(make_standard(3, "cm"), shift_derivatives=False)
    assert not is_translation_invariant(make_standard(3, "cm"))
    assert is_translation_invariant(op_compose(make_standard(3, "diff_ij", 1, 2), make_standard(3, "diff_ij", 2, 3)))
    assert not is_translation_invariant(make_standard(3, "airy_sum"))
    assert not is_translation_invariant(DiffOp.partial(2, 1))


def test_json_round_trip():
    op = make_standard(3, "deformed") + DiffOp.partial(3, 2) * RatFn.from_poly(MPoly.gens(x_vars(3))[0])
    assert DiffOp.from_json(op.to_json()) == op


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        op_compose(DiffOp.partial(2, 1), DiffOp.partial(3, 1))
