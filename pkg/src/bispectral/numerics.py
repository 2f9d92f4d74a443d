"""Double-precision Airy values, eigenfunction evaluation and finite differences.

These routines are an independent numeric check on the exact pipeline: the
symbolic results are evaluated at sample points and compared with
finite-difference applications of the same operators.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import _accel
from .algebra import MPoly, PoleError, RatFn
from .diffop import DiffOp

__all__ = [
    "AiryValue",
    "DomainError",
    "NumericResidual",
    "airy_ai",
    "airy_ai_array",
    "FloatRatFn",
    "RingEvaluator",
    "eval_function",
    "fd_apply",
    "safe_points",
    "residual",
    "write_residuals_csv",
    "fd_checks",
    "REL_FLOOR",
]

REL_FLOOR = 1e-300
FUNCTION_KINDS = ("psi", "sigma", "psi_tilde", "sigma_tilde")


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class AiryValue:
    t: float
    ai: float
    ai_prime: float
    method: str


def _method(t: float) -> str:
    if abs(t) <= _accel.SERIES_LIMIT:
        return "series"
    return "asymptotic_pos" if t > 0 else "asymptotic_neg"


def airy_ai(t: float) -> AiryValue:
    """Ai(t) and Ai'(t).

    Maclaurin series for ``|t| <= 6``, the exponential asymptotic form above
    and the oscillatory form below, each truncated at its smallest term.
    """
    t = float(t)
    if not math.isfinite(t):
        raise DomainError(f"Airy argument must be finite, got {t}")
    ai, aip = _accel.airy_kernel(np.array([t]))
    return AiryValue(t, float(ai[0]), float(aip[0]), _method(t))


def airy_ai_array(t) -> tuple:
    """Vectorized Ai and Ai' for an array of finite arguments."""
    t = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(t)):
        raise DomainError("Airy arguments must be finite")
    ai, aip = _accel.airy_kernel(t.ravel())
    return ai.reshape(t.shape), aip.reshape(t.shape)


# ----------------------------------------------------------------------
# float compilation of exact rational functions
# ----------------------------------------------------------------------
def _poly_arrays(p: MPoly):
    if not p.terms:
        return np.zeros((0, len(p.vars)), dtype=np.int64), np.zeros(0)
    items = sorted(p.terms.items())
    exps = np.array([e for e, _ in items], dtype=np.int64)
    coeffs = np.array([float(c) for _, c in items])
    return exps, coeffs


class FloatRatFn:
    """A RatFn compiled to coefficient arrays for fast float evaluation."""

    def __init__(self, f: RatFn):
        self.f = f
        self.vars = f.vars
        self.num = _poly_arrays(f.num)
        self.den = _poly_arrays(f.den)
        self.den_const = f.den.is_constant()

    def __call__(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        num = _accel.poly_eval(*self.num, pts)
        if self.den_const:
            return num / self.den[1][0]
        den = _accel.poly_eval(*self.den, pts)
        bad = den == 0
        if np.any(bad):
            row = pts[int(np.argmax(bad))]
            raise PoleError(f"coefficient denominator {self.f.den} vanishes at {row.tolist()}", factor=self.f.den)
        return num / den


class RingEvaluator:
    """Float evaluation of a ring element ``sum c_e R^e`` (without the base factor)."""

    def __init__(self, f):
        self.f = f
        self.n = f.n
        self.kappa = (1.0 / f.n) ** (1.0 / 3.0)
        self.terms = []
        for e, c in sorted(f.terms.items()):
            comps = [(i, FloatRatFn(a)) for i, a in enumerate(c.c) if not a.is_zero()]
            self.terms.append((np.array(e, dtype=np.int64), comps))

    def __call__(self, pts, gens) -> np.ndarray:
        """``pts``: (m, 2n) array of (x, z); ``gens``: (m, ngens) Riccati values."""
        pts = np.atleast_2d(pts)
        gens = np.atleast_2d(gens)
        total = np.zeros(pts.shape[0])
        for e, comps in self.terms:
            c = np.zeros(pts.shape[0])
            for i, fr in comps:
                c += fr(pts) * self.kappa**i
            if e.size:
                c = c * np.prod(gens ** e[None, :], axis=1)
            total += c
        return total


# ----------------------------------------------------------------------
# eigenfunctions
# ----------------------------------------------------------------------
def _check_distinct(v, label):
    for i in range(len(v)):
        for j in range(i + 1, len(v)):
            if v[i] == v[j]:
                raise PoleError(
                    f"coincident coordinates {label}{i + 1} = {label}{j + 1} = {v[i]}",
                    factor=f"{label}{i + 1} - {label}{j + 1}",
                )


def _psi_parts(n, x, z):
    kappa = (1.0 / n) ** (1.0 / 3.0)
    phase = sum((x[i] - x[j]) * (z[i] - z[j]) for i in range(n) for j in range(i + 1, n)) / n
    u = kappa * (float(np.sum(x)) + float(np.sum(z)))
    return phase, u


class _Tilde:
    """Compiled data for the tilde functions of one operator ``D``."""

    def __init__(self, D: DiffOp):
        from .eigenring import SIGMA, apply_op, bispectral_symbol, make_function

        self.D = D
        self.symbol = FloatRatFn(bispectral_symbol(D))
        self.sigma_ring = RingEvaluator(apply_op(D, make_function(SIGMA, D.n)))


_TILDE_CACHE: Dict[int, _Tilde] = {}


def _tilde(n, D):
    if D is None:
        from .store import get_dn

        D = get_dn(n)
    hit = _TILDE_CACHE.get(id(D))
    if hit is None or hit.D is not D:
        hit = _TILDE_CACHE[id(D)] = _Tilde(D)
    return hit


def eval_function(kind: str, n: int, x, z, D: Optional[DiffOp] = None) -> float:
    """Value of psi, sigma, psi~ or sigma~ at one point.

    The tilde variants use ``D`` when given and the cached D_n otherwise.
    """
    if kind not in FUNCTION_KINDS:
        raise ValueError(f"unknown function {kind!r}; choose from {FUNCTION_KINDS}")
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != (n,) or z.shape != (n,):
        raise ValueError(f"x and z must have length {n}")
    if kind == "psi" or kind == "psi_tilde":
        phase, u = _psi_parts(n, x, z)
        psi = math.exp(phase) * airy_ai(u).ai
        if kind == "psi":
            return psi
        _check_distinct(x, "x")
        _check_distinct(z, "z")
        pt = np.concatenate([x, z])[None, :]
        return float(_tilde(n, D).symbol(pt)[0]) * psi
    ai, aip = airy_ai_array(x + z)
    sigma = float(np.prod(ai))
    if kind == "sigma":
        return sigma
    _check_distinct(x, "x")
    _check_distinct(z, "z")
    pt = np.concatenate([x, z])[None, :]
    R = (aip / ai)[None, :]
    return float(_tilde(n, D).sigma_ring(pt, R)[0]) * sigma


# ----------------------------------------------------------------------
# finite differences
# ----------------------------------------------------------------------
# second-order central stencils for the k-th derivative: offsets and weights
_STENCILS = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}


def _mixed_partial(f: Callable, point: np.ndarray, alpha, h: float) -> float:
    for k in alpha:
        if k not in _STENCILS:
            raise ValueError(f"derivative order {k} is beyond the stencil table")
    stencils = [_STENCILS[k] for k in alpha]
    total = 0.0
    for combo in product(*(range(len(s[0])) for s in stencils)):
        w = 1.0
        shift = np.zeros_like(point)
        for v, (s, c) in enumerate(zip(stencils, combo)):
            w *= s[1][c]
            shift[v] = s[0][c] * h
        total += w * f(point + shift)
    return total / h ** sum(alpha)


def fd_apply(D: DiffOp, f: Callable, point, h: float = 1e-3) -> float:
    """Central-difference value of ``D[f]`` at ``point`` with Richardson extrapolation.

    ``f`` takes an array of the ``n`` spatial coordinates. The two step
    sizes ``h`` and ``h/2`` are combined as ``(4 F(h/2) - F(h)) / 3``.
    """
    point = np.asarray(point, dtype=np.float64)
    if point.shape != (D.n,):
        raise ValueError(f"point must have length {D.n}")
    coeffs = {a: float(FloatRatFn(c)(point[None, :])[0]) for a, c in D.terms.items()}

    def at(step):
        return sum(c * _mixed_partial(f, point, a, step) for a, c in coeffs.items())

    return (4.0 * at(h / 2) - at(h)) / 3.0


# ----------------------------------------------------------------------
# sampling and residual records
# ----------------------------------------------------------------------
def _min_gap(v):
    v = np.sort(v)
    return float(np.min(np.diff(v))) if v.size > 1 else math.inf


def safe_points(
    n: int,
    count: int,
    rng: np.random.Generator,
    *,
    low: float = -2.0,
    high: float = 2.0,
    min_gap: float = 0.3,
    min_airy: float = 1e-8,
    accept: Optional[Callable] = None,
    max_tries: int = 100000,
) -> List[tuple]:
    """Random (x, z) pairs away from coefficient poles and Airy zeros.

    Rejects coordinate gaps below ``min_gap`` in x or z and points where the
    psi or sigma Airy factor is below ``min_airy`` in magnitude. ``accept``
    adds a caller-specific filter.
    """
    out = []
    tries = 0
    kappa = (1.0 / n) ** (1.0 / 3.0)
    while len(out) < count:
        tries += 1
        if tries > max_tries:
            raise RuntimeError(f"only {len(out)} safe points found in {max_tries} draws")
        x = rng.uniform(low, high, n)
        z = rng.uniform(low, high, n)
        if _min_gap(x) < min_gap or _min_gap(z) < min_gap:
            continue
        args = np.concatenate([[kappa * (x.sum() + z.sum())], x + z])
        ai, _ = airy_ai_array(args)
        if np.min(np.abs(ai)) < min_airy:
            continue
        if accept is not None and not accept(x, z):
            continue
        out.append((x, z))
    return out


@dataclass(frozen=True)
class NumericResidual:
    op: str
    fn: str
    x: tuple
    z: tuple
    lhs: float
    rhs: float

    @property
    def relative_error(self) -> float:
        return abs(self.lhs - self.rhs) / max(abs(self.lhs), abs(self.rhs), REL_FLOOR)


def residual(op, fn, x, z, lhs, rhs) -> NumericResidual:
    return NumericResidual(op, fn, tuple(map(float, x)), tuple(map(float, z)), float(lhs), float(rhs))


def write_residuals_csv(path, rows: Sequence[NumericResidual]):
    n = len(rows[0].x) if rows else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["op", "fn"]
            + [f"x{i + 1}" for i in range(n)]
            + [f"z{i + 1}" for i in range(n)]
            + ["lhs", "rhs", "relative_error"]
        )
        for r in rows:
            w.writerow(
                [r.op, r.fn]
                + [repr(v) for v in r.x + r.z]
                + [repr(r.lhs), repr(r.rhs), repr(r.relative_error)]
            )


def fd_checks(
    n: int,
    D: Optional[DiffOp],
    count: int,
    rng: np.random.Generator,
    *,
    h: float = 1e-3,
    low: float = -2.0,
    high: float = 1.0,
    min_airy: float = 1e-2,
    min_eigenvalue: float = 0.5,
) -> List[NumericResidual]:
    """Finite-difference versions of the exact eigen-relations at ``count`` safe points.

    Covers ``H psi = p_n psi`` and ``d_ij psi = z_ij psi`` for every ``n``, and
    for ``n >= 2`` with ``D`` given, ``H~ psi~ = p_n psi~`` and
    ``H~ sigma~ = (sum z) sigma~``.

    The box stops at 1 because for large positive Airy arguments the
    Maclaurin sum cancels down to ``Ai``, leaving rounding noise near
    ``1e-16 * exp(2/3 t^1.5)``. A second difference divides that by ``h^2``.
    Points with an eigenvalue below ``min_eigenvalue`` in magnitude are
    skipped as well: there ``D f`` is a small difference of larger terms and
    a relative error says nothing about the identity.
    """
    from .diffop import make_standard
    from .eigenring import derive_pn

    pn = FloatRatFn(derive_pn(n))
    H = make_standard(n, "airy_sum")
    Ht = make_standard(n, "deformed") if n >= 2 else None
    rows = []

    def conditioned(x, z):
        p = float(pn(np.concatenate([x, z])[None, :])[0])
        return abs(p) >= min_eigenvalue and (n == 1 or abs(float(np.sum(z))) >= min_eigenvalue)

    points = safe_points(n, count, rng, low=low, high=high, min_airy=min_airy, accept=conditioned)
    for x, z in points:
        pt = np.concatenate([x, z])[None, :]
        p = float(pn(pt)[0])

        def fn(kind):
            return lambda xx: eval_function(kind, n, xx, z, D)

        psi = eval_function("psi", n, x, z)
        rows.append(residual("H", "psi", x, z, fd_apply(H, fn("psi"), x, h), p * psi))
        for i in range(n):
            for j in range(i + 1, n):
                Dij = make_standard(n, "diff_ij", i + 1, j + 1)
                rows.append(
                    residual(f"d{i + 1}{j + 1}", "psi", x, z, fd_apply(Dij, fn("psi"), x, h), (z[i] - z[j]) * psi)
                )
        if Ht is None or D is None:
            continue
        pt_val = eval_function("psi_tilde", n, x, z, D)
        rows.append(residual("H~", "psi_tilde", x, z, fd_apply(Ht, fn("psi_tilde"), x, h), p * pt_val))
        st_val = eval_function("sigma_tilde", n, x, z, D)
        rows.append(
            residual("H~", "sigma_tilde", x, z, fd_apply(Ht, fn("sigma_tilde"), x, h), float(np.sum(z)) * st_val)
        )
    return rows
