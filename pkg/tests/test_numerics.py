import math

import mpmath
import numpy as np
import pytest

from bispectral import _accel
from bispectral.algebra import PoleError
from bispectral.diffop import DiffOp, make_standard
from bispectral.numerics import (
    DomainError,
    FloatRatFn,
    airy_ai,
    airy_ai_array,
    eval_function,
    fd_apply,
    fd_checks,
    safe_points,
    write_residuals_csv,
)

mpmath.mp.dps = 40


def maclaurin_oracle():
    """Ai(0) and Ai'(0) from their Gamma-function closed forms at 40 digits."""
    ai0 = 1 / (mpmath.power(3, mpmath.mpf(2) / 3) * mpmath.gamma(mpmath.mpf(2) / 3))
    aip0 = -1 / (mpmath.power(3, mpmath.mpf(1) / 3) * mpmath.gamma(mpmath.mpf(1) / 3))
    return ai0, aip0


def test_origin_constants():
    ai0, aip0 = maclaurin_oracle()
    assert abs(_accel.AI0 - float(ai0)) < 1e-16
    assert abs(-_accel.AIP0 - float(aip0)) < 1e-16
    a = airy_ai(0.0)
    assert a.ai == pytest.approx(float(ai0), abs=1e-16)
    assert a.ai_prime == pytest.approx(float(aip0), abs=1e-16)


@pytest.mark.parametrize("t", [-20.0, -9.5, -6.5, -3.0, -0.5, 0.7, 2.0, 5.9, 6.1, 8.0, 12.0])
def test_against_mpmath(t):
    a = airy_ai(t)
    ai = float(mpmath.airyai(t))
    aip = float(mpmath.airyai(t, derivative=1))
    scale = max(1.0, abs(ai))
    assert abs(a.ai - ai) <= 1e-10 * scale
    assert abs(a.ai_prime - aip) <= 1e-10 * max(1.0, abs(aip))


def test_methods_by_range():
    assert airy_ai(6.0).method == "series"
    assert airy_ai(6.5).method == "asymptotic_pos"
    assert airy_ai(-7.0).method == "asymptotic_neg"


def test_non_finite_arguments():
    for bad in (math.nan, math.inf, -math.inf):
        with pytest.raises(DomainError):
            airy_ai(bad)
    with pytest.raises(DomainError):
        airy_ai_array([0.0, math.nan])


def test_array_matches_scalar():
    t = np.linspace(-10, 10, 41).reshape(-1, 1)
    ai, aip = airy_ai_array(t)
    assert ai.shape == t.shape
    assert ai[7, 0] == airy_ai(t[7, 0]).ai


def test_float_ratfn_pole():
    D = make_standard(2, "cm")
    f = FloatRatFn(D.coefficient((0, 0)))
    assert f(np.array([[0.0, 1.0]]))[0] == pytest.approx(-4.0)
    with pytest.raises(PoleError):
        f(np.array([[1.0, 1.0]]))


def test_fd_apply_on_a_polynomial():
    # d1^2 + x1 d2 applied to x1^3 x2^2 at (0.5, -0.25)
    from bispectral.algebra import MPoly, RatFn, x_vars

    vars = x_vars(2)
    x1 = RatFn.from_poly(MPoly.gens(vars)[0])
    D = DiffOp(2, {(2, 0): 1, (0, 1): x1})
    p = np.array([0.5, -0.25])
    got = fd_apply(D, lambda v: v[0] ** 3 * v[1] ** 2, p)
    want = 6 * 0.5 * 0.0625 + 0.5 * 0.125 * 2 * -0.25
    assert got == pytest.approx(want, abs=1e-10)


def test_coincident_points_are_rejected(d2):
    with pytest.raises(PoleError, match="x1 = x2"):
        eval_function("psi_tilde", 2, [0.1, 0.1], [0.2, 0.3], d2)
    with pytest.raises(ValueError):
        eval_function("phi", 2, [0.1, 0.2], [0.2, 0.3])


def test_psi_tilde_equals_symbol_times_psi(d2):
    x, z = [0.3, -0.7], [0.1, 0.9]
    sym = ((x[0] - x[1]) * (z[0] - z[1]) - 2) / ((x[0] - x[1]) * (z[0] - z[1]))
    assert eval_function("psi_tilde", 2, x, z, d2) == pytest.approx(sym * eval_function("psi", 2, x, z), rel=1e-14)


def test_safe_points_respect_the_filters():
    rng = np.random.default_rng(1)
    pts = safe_points(3, 20, rng, min_gap=0.4)
    for x, z in pts:
        assert np.min(np.diff(np.sort(x))) >= 0.4 and np.min(np.diff(np.sort(z))) >= 0.4


def test_fd_checks_two_particles(d2, tmp_path):
    rows = fd_checks(2, d2, 20, np.random.default_rng(0))
    assert len(rows) == 20 * 4
    assert max(r.relative_error for r in rows) < 1e-5
    path = tmp_path / "res.csv"
    write_residuals_csv(path, rows)
    assert path.read_text().splitlines()[0] == "op,fn,x1,x2,z1,z2,lhs,rhs,relative_error"
