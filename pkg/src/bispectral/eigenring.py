"""Exact eigenvalue checks in a differentiation-closed ring over the Airy kernel.

An element ``g`` of the ring over a base function ``F`` stands for the
function ``g * F``, where ``g`` is a polynomial in Riccati generators with
coefficients in ``Q(x, z)[k]/(k^3 - 1/n)``:

* ``PSI``:   F = exp((1/n) sum_{i<j} x_ij z_ij) Ai(k sum (x_i + z_i)), one
  generator R = Ai'(u)/Ai(u) with u the Airy argument.
* ``SIGMA``: F = prod Ai(x_i + z_i), generators R_i = Ai'/Ai(x_i + z_i).
* ``EXP``:   F = exp(sum x_i z_i), no generators.

Differentiation never leaves the ring because d R = k (u - R^2) (PSI) and
d_k R_i = delta_ik ((x_i + z_i) - R_i^2) (SIGMA), so every eigenvalue claim
reduces to a zero test of a canonical polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Tuple

from .algebra import CubicExt, MPoly, Q, RatFn, paired_vars, swap_xz
from .diffop import DiffOp, is_translation_invariant, op_symbol

PSI, SIGMA, EXP = "PSI", "SIGMA", "EXP"
BASES = (PSI, SIGMA, EXP)

__all__ = [
    "PSI",
    "SIGMA",
    "EXP",
    "RiccatiFun",
    "EigenReport",
    "make_function",
    "differentiate",
    "apply_op",
    "eigen_check",
    "derive_pn",
    "printed_pn",
    "bispectral_symbol",
    "symmetry_check",
    "psi_phase_data",
    "first_derivative_sum_terms",
    "sigma_asymmetry_witness",
    "AsymmetryWitness",
]


def _ngens(base, n):
    return {PSI: 1, SIGMA: n, EXP: 0}[base]


class RiccatiFun:
    """``sum_e c_e R^e`` times the base eigenfunction; ``c_e`` are CubicExt."""

    __slots__ = ("base", "n", "terms")

    def __init__(self, base: str, n: int, terms: Dict[Tuple[int, ...], CubicExt]):
        if base not in BASES:
            raise ValueError(f"unknown base {base!r}")
        self.base = base
        self.n = n
        self.terms = {e: c for e, c in terms.items() if not c.is_zero()}

    @property
    def vars(self):
        return paired_vars(self.n)

    @property
    def ngens(self):
        return _ngens(self.base, self.n)

    def is_zero(self):
        return not self.terms

    def _same(self, other):
        if not isinstance(other, RiccatiFun) or other.base != self.base or other.n != self.n:
            raise ValueError("ring elements over different bases")

    def __add__(self, other):
        self._same(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return RiccatiFun(self.base, self.n, out)

    def __neg__(self):
        return RiccatiFun(self.base, self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "RiccatiFun":
        """Multiply by a scalar, RatFn over the paired variables, or CubicExt."""
        c = _as_ext(c, self.n)
        if c.is_zero():
            return RiccatiFun(self.base, self.n, {})
        return RiccatiFun(self.base, self.n, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, RiccatiFun):
            self._same(other)
            return RiccatiFun(self.base, self.n, _poly_mul(self.terms, other.terms))
        return self.scale(other)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, RiccatiFun):
            return NotImplemented
        return (self.base, self.n, self.terms) == (other.base, other.n, other.terms)

    def coefficient(self, exps) -> CubicExt:
        exps = tuple(exps)
        if exps in self.terms:
            return self.terms[exps]
        return CubicExt.const(self.n, self.vars, 0)

    def degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def swap(self):
        """Exchange x and z in every coefficient; the base functions are swap-invariant."""
        return RiccatiFun(self.base, self.n, {e: swap_xz(c) for e, c in self.terms.items()})

    def __repr__(self):
        parts = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(
                (f"R{i + 1}" if k == 1 else f"R{i + 1}^{k}") for i, k in enumerate(e) if k
            )
            parts.append(f"[{c}]" + (f"*{mono}" if mono else ""))
        return f"RiccatiFun({self.base}, n={self.n}: " + (" + ".join(parts) or "0") + ")"


def _as_ext(c, n) -> CubicExt:
    vars = paired_vars(n)
    if isinstance(c, CubicExt):
        return c
    if isinstance(c, MPoly):
        c = RatFn.from_poly(c)
    if isinstance(c, RatFn):
        if c.vars != vars:
            c = c.align(vars)
        return CubicExt.from_ratfn(n, c)
    return CubicExt.const(n, vars, c)


def _poly_mul(a, b):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(p + q for p, q in zip(ea, eb))
            t = ca * cb
            out[e] = out[e] + t if e in out else t
    return out


# ----------------------------------------------------------------------
# structure data: logarithmic derivatives and generator derivatives
# ----------------------------------------------------------------------
@lru_cache(maxsize=None)
def _structure(base: str, n: int):
    vars = paired_vars(n)
    gens = MPoly.gens(vars)
    xs, zs = gens[:n], gens[n:]
    ng = _ngens(base, n)
    zero_e = (0,) * ng
    ext = lambda p: _as_ext(p, n)  # noqa: E731
    kappa = CubicExt.kappa(n, vars)
    dlog = []
    dgen = []
    if base == EXP:
        for k in range(n):
            dlog.append({zero_e: ext(zs[k])})
            dgen.append([])
    elif base == SIGMA:
        for k in range(n):
            ek = tuple(1 if i == k else 0 for i in range(n))
            dlog.append({ek: ext(1)})
            row = []
            for i in range(n):
                if i == k:
                    e2 = tuple(2 if j == k else 0 for j in range(n))
                    row.append({zero_e: ext(xs[k] + zs[k]), e2: ext(-1)})
                else:
                    row.append({})
            dgen.append(row)
    else:
        zbar = RatFn.from_poly(sum(zs[1:], zs[0])) * Q(1, n)
        S = sum(xs[1:], xs[0]) + sum(zs, MPoly.zero(vars))
        kappa2 = kappa * kappa
        # d_k R = k (u - R^2) with u = k S, i.e. k^2 S - k R^2
        dR = {(0,): kappa2 * ext(S), (2,): -kappa}
        for k in range(n):
            dlog.append({(0,): ext(RatFn.from_poly(zs[k]) - zbar), (1,): kappa})
            dgen.append([dR])
    return dlog, dgen


def make_function(base: str, n: int) -> RiccatiFun:
    """The bare eigenfunction of the requested family (the constant 1 element)."""
    if n < 1:
        raise ValueError("n must be positive")
    if base not in BASES:
        raise ValueError(f"unknown base {base!r}")
    ng = _ngens(base, n)
    return RiccatiFun(base, n, {(0,) * ng: CubicExt.const(n, paired_vars(n), 1)})


def log_derivative(base: str, n: int, k: int) -> RiccatiFun:
    """d_k log F as a ring element (``k`` is 1-based)."""
    dlog, _ = _structure(base, n)
    return RiccatiFun(base, n, dict(dlog[k - 1]))


def differentiate(f: RiccatiFun, k: int) -> RiccatiFun:
    """Exact derivative in ``x_k`` (1-based), re-expressed in the ring."""
    if not 1 <= k <= f.n:
        raise ValueError(f"variable index {k} out of range 1..{f.n}")
    i = k - 1
    dlog, dgen = _structure(f.base, f.n)
    out: Dict[Tuple[int, ...], CubicExt] = {}

    def acc(e, c):
        if c.is_zero():
            return
        out[e] = out[e] + c if e in out else c

    for e, c in f.terms.items():
        acc(e, c.diff(i))
        for g, eg in enumerate(e):
            if not eg:
                continue
            dR = dgen[i][g]
            if not dR:
                continue
            lowered = e[:g] + (eg - 1,) + e[g + 1 :]
            for de, dc in dR.items():
                acc(tuple(p + q for p, q in zip(lowered, de)), dc * c * eg)
        for de, dc in dlog[i].items():
            acc(tuple(p + q for p, q in zip(e, de)), dc * c)
    return RiccatiFun(f.base, f.n, out)


def apply_op(D: DiffOp, f: RiccatiFun) -> RiccatiFun:
    """``D[f]`` term by term in normal order."""
    if D.n != f.n:
        raise ValueError(f"operator has n={D.n}, function has n={f.n}")
    vars = paired_vars(f.n)
    cache = {(0,) * f.n: f}

    def deriv(alpha):
        if alpha in cache:
            return cache[alpha]
        i = next(k for k, a in enumerate(alpha) if a)
        lower = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1 :]
        r = differentiate(deriv(lower), i + 1)
        cache[alpha] = r
        return r

    total = RiccatiFun(f.base, f.n, {})
    for alpha in sorted(D.terms, key=lambda a: (sum(a), a)):
        c = D.terms[alpha].align(vars)
        total = total + deriv(alpha).scale(c)
    return total


@dataclass
class EigenReport:
    op: str
    fn: str
    eigenvalue: RatFn
    residual: RiccatiFun
    passed: bool
    note: str = ""

    def to_json(self):
        return {
            "op": self.op,
            "fn": self.fn,
            "eigenvalue": self.eigenvalue.to_json(),
            "eigenvalue_str": str(self.eigenvalue),
            "pass": self.passed,
            "residual_terms": len(self.residual.terms),
            **({"note": self.note} if self.note else {}),
        }


def eigen_check(D: DiffOp, f: RiccatiFun, eig, *, op_id="D", fn_id="f") -> EigenReport:
    """Residual ``D[f] - eig * f``; passes iff it is identically zero."""
    vars = paired_vars(f.n)
    if isinstance(eig, MPoly):
        eig = RatFn.from_poly(eig)
    if not isinstance(eig, RatFn):
        eig = RatFn.const(vars, eig)
    eig = eig.align(vars)
    residual = apply_op(D, f) - f.scale(eig)
    return EigenReport(op_id, fn_id, eig, residual, residual.is_zero())


def _z_part(n):
    vars = paired_vars(n)
    return vars, MPoly.gens(vars)[n:]


def derive_pn(n: int) -> RatFn:
    """Eigenvalue of sum(d_i^2 - x_i) on psi, read off from the exact application."""
    from .diffop import make_standard

    H = make_standard(n, "airy_sum")
    out = apply_op(H, make_function(PSI, n))
    if set(out.terms) - {(0,)}:
        raise ArithmeticError("H psi is not a multiple of psi")
    c = out.coefficient((0,))
    p = c.as_ratfn()
    if any(i < n for i in p.num.occurring() + p.den.occurring()):
        raise ArithmeticError("eigenvalue depends on x")
    return p


def printed_pn(n: int) -> RatFn:
    """sum_j ((sum_i z_ij)^2 + z_j), transcribed without the 1/n^2 factor."""
    vars, zs = _z_part(n)
    total = MPoly.zero(vars)
    for j in range(n):
        s = MPoly.zero(vars)
        for i in range(n):
            s = s + zs[i] - zs[j]
        total = total + s * s + zs[j]
    return RatFn.from_poly(total)


def first_derivative_sum_terms(n: int) -> RiccatiFun:
    """``sum_j d_j^2 psi`` as a ring element; its R-linear part must vanish."""
    from .diffop import make_standard

    return apply_op(make_standard(n, "laplacian"), make_function(PSI, n))


def vandermonde_z(n: int) -> RatFn:
    vars, zs = _z_part(n)
    p = MPoly.const(vars, 1)
    for i in range(n):
        for j in range(i + 1, n):
            p = p * (zs[i] - zs[j])
    return RatFn.from_poly(p)


def bispectral_symbol(D: DiffOp) -> RatFn:
    """prod_{i<j}(z_i - z_j)^-1 times the symbol of ``D`` with zeta -> z."""
    if not is_translation_invariant(D):
        raise ValueError("operator is not a polynomial in d_i - d_j; it does not act on psi by multiplication")
    n = D.n
    sym = op_symbol(D).symbol
    vars = paired_vars(n)
    # rename zeta_i -> z_i: the variable tuples line up position by position
    renamed = RatFn(
        MPoly(vars, sym.num.terms, _trusted=True), MPoly(vars, sym.den.terms, _trusted=True), _normalized=True
    )
    if n < 2:
        return renamed
    return renamed / vandermonde_z(n)


def psi_phase_data(n: int):
    """The exponent and Airy argument that define psi."""
    vars = paired_vars(n)
    g = MPoly.gens(vars)
    xs, zs = g[:n], g[n:]
    expo = MPoly.zero(vars)
    for i in range(n):
        for j in range(i + 1, n):
            expo = expo + (xs[i] - xs[j]) * (zs[i] - zs[j])
    arg = sum(xs[1:], xs[0]) + sum(zs, MPoly.zero(vars))
    return RatFn.from_poly(expo) * Q(1, n), RatFn.from_poly(arg)


def symmetry_check(f) -> bool:
    """True iff exchanging x and z leaves ``f`` unchanged.

    ``f`` may be a RatFn, a CubicExt, a ring element (its coefficient
    polynomial, the base functions being symmetric) or a tuple of these.
    """
    if isinstance(f, (tuple, list)):
        return all(symmetry_check(g) for g in f)
    if isinstance(f, RiccatiFun):
        return f.swap() == f
    return swap_xz(f) == f


# ----------------------------------------------------------------------
# numeric witness that sigma~ has no symmetric z-rescaling
# ----------------------------------------------------------------------
@dataclass
class AsymmetryWitness:
    """Two points ``(x, z)``, ``(x2, z)`` where ``r = sigma~(x,z)/sigma~(z,x)`` differs.

    A symmetric product ``h(z) sigma~`` would force ``r(x, z) = h(x)/h(z)``,
    so ``r(x, z)/r(x2, z)`` would not depend on ``z``; ``z2`` is the second
    fiber used to test exactly that.
    """

    n: int
    ratio: RiccatiFun
    symbolic_symmetric: bool
    x: tuple
    x2: tuple
    z: tuple
    z2: tuple
    r: tuple  # r(x,z), r(x2,z), r(x,z2), r(x2,z2)
    relative_gap: float
    cross_gap: float

    @property
    def literal_passes(self):
        return self.relative_gap > 1e-3

    @property
    def cross_passes(self):
        return self.cross_gap > 1e-3

    def to_json(self):
        return {
            "n": self.n,
            "ratio_terms": len(self.ratio.terms),
            "ratio_symbolically_symmetric": self.symbolic_symmetric,
            "x": list(self.x),
            "x2": list(self.x2),
            "z": list(self.z),
            "z2": list(self.z2),
            "r": list(self.r),
            "relative_gap": self.relative_gap,
            "cross_gap": self.cross_gap,
        }


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def sigma_asymmetry_witness(n: int, D: DiffOp = None, *, seed: int = 0, low=-2.0, high=-1.0):
    """Numeric points showing that no function of z alone symmetrizes sigma~ = D[sigma].

    ``D`` defaults to the cached D_n. Points whose coordinates nearly
    coincide or whose Airy factors nearly vanish are resampled.
    """
    import numpy as np

    from .numerics import eval_function, safe_points

    if n < 2:
        raise ValueError("the witness needs n >= 2")
    if D is None:
        from .store import get_dn

        D = get_dn(n)
    ratio = apply_op(D, make_function(SIGMA, n))
    rng = np.random.default_rng(seed)
    gap = 0.5 if (high - low) / max(n - 1, 1) > 0.5 else 0.3

    def r(x, z):
        return eval_function("sigma_tilde", n, x, z, D) / eval_function("sigma_tilde", n, z, x, D)

    for _ in range(1000):
        (x, z), (x2, z2) = safe_points(n, 2, rng, low=low, high=high, min_gap=gap, min_airy=1e-3)
        vals = (r(x, z), r(x2, z), r(x, z2), r(x2, z2))
        if not all(np.isfinite(vals)) or min(abs(v) for v in vals) < 1e-8:
            continue
        rel = _rel(vals[0], vals[1])
        cross = _rel(vals[0] / vals[1], vals[2] / vals[3])
        return AsymmetryWitness(
            n,
            ratio,
            ratio.swap() == ratio,
            tuple(map(float, x)),
            tuple(map(float, x2)),
            tuple(map(float, z)),
            tuple(map(float, z2)),
            tuple(map(float, vals)),
            rel,
            cross,
        )
    raise RuntimeError("no usable witness points were found")
