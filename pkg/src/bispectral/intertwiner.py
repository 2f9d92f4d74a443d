"""Construction of intertwining operators by exact ansatz solving.

An operator ``D = sum_alpha P_alpha(x) / B(x)^k d^alpha`` with unknown
polynomial numerators is substituted into ``D o L - Lt o D = 0``. After
clearing the common power of ``B`` every monomial coefficient of every
derivative slot is one linear equation over the rationals, so the full
solution space comes out of a single sparse elimination.

``B`` is the Vandermonde product ``prod_{i<j} (x_i - x_j)``; for ``n = 1``
it is ``x1`` itself, which is the natural denominator of the
one-variable analogue ``d - 1/x``.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass
from itertools import combinations_with_replacement, product
from math import comb
from typing import Dict, List, Optional, Tuple

from .algebra import MPoly, Q, RatFn, x_vars
from .diffop import DiffOp, make_standard, op_compose, zeta_vars
from .linalg import SparseNullspace

log = logging.getLogger(__name__)

DEFAULT_CAP = 20000

__all__ = [
    "AnsatzSpec",
    "IntertwinerResult",
    "ResourceError",
    "known_intertwiner",
    "solve_intertwiner",
    "search_intertwiner",
    "verify_intertwine",
    "intertwine_residual",
    "centralizer_search_first_order",
    "translation_invariant_subspace",
    "top_symbol",
    "homogeneous_subspace",
    "canonical_intertwiner",
    "cv_weight",
    "default_spec",
]


class ResourceError(RuntimeError):
    def __init__(self, message, dimension):
        super().__init__(message)
        self.dimension = dimension


@dataclass(frozen=True)
class AnsatzSpec:
    n: int
    max_order: int
    num_degree: int
    den_exponent: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if min(self.max_order, self.num_degree, self.den_exponent) < 0:
            raise ValueError("ansatz bounds must be nonnegative")

    @property
    def dimension(self) -> int:
        n = self.n
        return comb(self.max_order + n, n) * comb(self.num_degree + n, n)

    def digest(self, tag: str = "") -> str:
        payload = json.dumps({"tag": tag, **asdict(self)}, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class IntertwinerResult:
    solutions: List[DiffOp]
    normalization: str
    spec: Optional[AnsatzSpec] = None
    equations: int = 0
    unknowns: int = 0

    @property
    def dimension(self):
        return len(self.solutions)


def default_spec(n: int) -> AnsatzSpec:
    if n == 2:
        return AnsatzSpec(2, 1, 1, 1)
    if n == 3:
        return AnsatzSpec(3, 3, 6, 3)
    return AnsatzSpec(n, n * (n - 1) // 2, 2 * n * (n - 1) // 2, n * (n - 1) // 2)


# ----------------------------------------------------------------------
# numerators over a power of the base denominator
# ----------------------------------------------------------------------
def base_denominator(n: int) -> MPoly:
    vars = x_vars(n)
    xs = MPoly.gens(vars)
    if n == 1:
        return xs[0]
    b = MPoly.const(vars, 1)
    for i in range(n):
        for j in range(i + 1, n):
            b = b * (xs[i] - xs[j])
    return b


class _Frac:
    """``num / B^e`` for the fixed base denominator ``B``; never reduced."""

    __slots__ = ("num", "e")

    def __init__(self, num: MPoly, e: int):
        self.num = num
        self.e = e


class _Ctx:
    def __init__(self, n):
        self.n = n
        self.vars = x_vars(n)
        self.B = base_denominator(n)
        self.dB = [self.B.diff(i) for i in range(n)]
        self._pow = {0: MPoly.const(self.vars, 1), 1: self.B}

    def Bpow(self, k):
        if k not in self._pow:
            self._pow[k] = self.Bpow(k - 1) * self.B
        return self._pow[k]

    def lift(self, f: _Frac, e: int) -> MPoly:
        if e < f.e:
            raise ValueError("cannot lower the denominator exponent")
        return f.num if e == f.e else f.num * self.Bpow(e - f.e)

    def diff(self, f: _Frac, i: int) -> _Frac:
        if f.e == 0:
            return _Frac(f.num.diff(i), 0)
        return _Frac(f.num.diff(i) * self.B - f.num.scale(f.e) * self.dB[i], f.e + 1)

    def from_ratfn(self, f: RatFn) -> _Frac:
        if f.den.is_constant():
            return _Frac(f.num.scale(1 / f.den.constant_value()), 0)
        limit = 2 * f.den.total_degree() + 2
        for e in range(1, limit + 1):
            q, r = self.Bpow(e).divmod(f.den)
            if not r:
                return _Frac(f.num * q, e)
        raise ValueError(
            f"coefficient denominator {f.den} does not divide a power of {self.B}"
        )


def _deriv_table(ctx: _Ctx, f: _Frac, max_order: int) -> Dict[Tuple[int, ...], _Frac]:
    n = ctx.n
    table = {(0,) * n: f}
    frontier = [(0,) * n]
    for _ in range(max_order):
        nxt = []
        for g in frontier:
            for i in range(n):
                h = g[:i] + (g[i] + 1,) + g[i + 1 :]
                if h not in table:
                    table[h] = ctx.diff(table[g], i)
                    nxt.append(h)
        frontier = nxt
    return table


def _multi_indices(n, max_order):
    out = []
    for total in range(max_order + 1):
        for combo in combinations_with_replacement(range(n), total):
            a = [0] * n
            for i in combo:
                a[i] += 1
            out.append(tuple(a))
    return out


def _monomials(n, degree):
    return _multi_indices(n, degree)


def _leq(g, a):
    return all(p <= q for p, q in zip(g, a))


def _residual_column(ctx, alpha, mono, k, Lf, Ltf, Lorder):
    """Residual ``c d^alpha o L - Lt o c d^alpha`` for ``c = x^mono / B^k`` as ``{out: _Frac}``."""
    vars = ctx.vars
    c = _Frac(MPoly(vars, {mono: Q(1)}, _trusted=True), k)
    acc: Dict[Tuple[int, ...], List[_Frac]] = {}

    def push(out, frac, mult):
        if frac.num.is_zero():
            return
        if mult != 1:
            frac = _Frac(frac.num.scale(mult), frac.e)
        acc.setdefault(out, []).append(frac)

    for beta, (a_tab) in Lf.items():
        for gamma, dg in a_tab.items():
            if not _leq(gamma, alpha):
                continue
            mult = 1
            for p, q in zip(alpha, gamma):
                mult *= comb(p, q)
            out = tuple(p - q + r for p, q, r in zip(alpha, gamma, beta))
            push(out, _Frac(c.num * dg.num, c.e + dg.e), mult)
    ctab = _deriv_table(ctx, c, Lorder)
    for beta, at in Ltf.items():
        for gamma in product(*(range(b + 1) for b in beta)):
            dc = ctab[gamma]
            mult = 1
            for p, q in zip(beta, gamma):
                mult *= comb(p, q)
            out = tuple(p - q + r for p, q, r in zip(beta, gamma, alpha))
            push(out, _Frac(at.num * dc.num, at.e + dc.e), -mult)
    return acc


def _prepare(ctx, L: DiffOp):
    """Coefficient derivative tables for ``L`` (as ``_Frac``) up to the order used."""
    return {beta: ctx.from_ratfn(c) for beta, c in L.terms.items()}


def solve_intertwiner(
    L: DiffOp, Lt: DiffOp, spec: AnsatzSpec, *, cap: int = DEFAULT_CAP, check: bool = True
) -> IntertwinerResult:
    """All ``D`` in the ansatz space with ``D o L = Lt o D``.

    An empty solution list means the ansatz space holds no intertwiner.
    """
    if L.n != Lt.n or L.n != spec.n:
        raise ValueError("L, Lt and the ansatz must share n")
    dim = spec.dimension
    if dim > cap:
        raise ResourceError(f"ansatz dimension {dim} exceeds the cap {cap}", dim)
    n = spec.n
    ctx = _Ctx(n)
    k = spec.den_exponent
    Lfr = _prepare(ctx, L)
    Ltfr = _prepare(ctx, Lt)
    Lorder = max(L.order(), Lt.order(), 0)
    Lf = {beta: _deriv_table(ctx, f, spec.max_order) for beta, f in Lfr.items()}

    alphas = _multi_indices(n, spec.max_order)
    monos = _monomials(n, spec.num_degree)
    unknowns = [(a, m) for a in alphas for m in monos]

    columns = {}
    emax = 0
    for u in unknowns:
        col = _residual_column(ctx, u[0], u[1], k, Lf, Ltfr, Lorder)
        columns[u] = col
        for fr in col.values():
            for f in fr:
                emax = max(emax, f.e)

    rows: Dict[Tuple, Dict] = {}
    for u, col in columns.items():
        for out, fracs in col.items():
            num = None
            for f in fracs:
                p = ctx.lift(f, emax)
                num = p if num is None else num + p
            for mono, coef in num.terms.items():
                rows.setdefault((out, mono), {})[u] = coef
    columns.clear()

    ns = SparseNullspace(unknowns)
    for key in sorted(rows, key=lambda r: (sum(r[0]), r[0], r[1]), reverse=True):
        ns.add_row(rows[key])
    basis = ns.basis()
    log.debug(
        "ansatz %s: %d unknowns, %d equations, rank %d, nullity %d",
        spec, len(unknowns), len(rows), ns.rank, len(basis),
    )

    Bk = ctx.Bpow(k)
    sols = []
    for vec in basis:
        terms: Dict[Tuple[int, ...], MPoly] = {}
        for (a, m), v in vec.items():
            t = MPoly(ctx.vars, {m: v}, _trusted=True)
            terms[a] = terms[a] + t if a in terms else t
        op = DiffOp(n, {a: RatFn(p, Bk) for a, p in terms.items() if not p.is_zero()})
        sols.append(op)
    sols, how = _normalize_solutions(sols)
    if check:
        for D in sols:
            if not verify_intertwine(D, L, Lt):
                raise AssertionError(f"solver returned a non-intertwiner: {D}")
    return IntertwinerResult(sols, how, spec, equations=len(rows), unknowns=len(unknowns))


def top_symbol(D: DiffOp) -> RatFn:
    """Principal symbol as a RatFn in ``x`` and ``zeta``."""
    n = D.n
    vars = x_vars(n) + zeta_vars(n)
    top = D.order()
    total = RatFn.const(vars, 0)
    for a, c in D.terms.items():
        if sum(a) == top:
            total = total + c.align(vars) * RatFn.from_poly(MPoly(vars, {(0,) * n + a: Q(1)}))
    return total


def vandermonde_symbol(n: int) -> RatFn:
    vars = x_vars(n) + zeta_vars(n)
    z = MPoly.gens(vars)[n:]
    p = MPoly.const(vars, 1)
    for i in range(n):
        for j in range(i + 1, n):
            p = p * (z[i] - z[j])
    return RatFn.from_poly(p)


def _normalize_solutions(sols: List[DiffOp]):
    """Scale basis elements: Vandermonde principal symbol where possible, else a monic leading term."""
    if not sols:
        return sols, "none (empty solution space)"
    out = []
    hits = 0
    for D in sols:
        ratio = None
        if D.n >= 2:
            ratio = top_symbol(D) / vandermonde_symbol(D.n)
            if not (ratio.is_constant() and ratio.constant_value() != 0):
                ratio = None
        if ratio is not None:
            D = D * (1 / ratio.constant_value())
            hits += 1
        else:
            _, c = D.sorted_terms()[0]
            D = D * (c.den.leading()[1] / c.num.leading()[1])
        out.append(D)
    if hits:
        return out, "principal symbol = prod_{i<j}(zeta_i - zeta_j)"
    return out, "monic leading coefficient"


def intertwine_residual(D: DiffOp, L: DiffOp, Lt: DiffOp) -> DiffOp:
    return op_compose(D, L) - op_compose(Lt, D)


def verify_intertwine(D: DiffOp, L: DiffOp, Lt: DiffOp) -> bool:
    """True iff ``D o L - Lt o D`` is exactly the zero operator."""
    return intertwine_residual(D, L, Lt).is_zero()


def known_intertwiner(n: int) -> DiffOp:
    """Closed forms: ``d - 1/x`` for n=1 and ``d_12 - 2/x_12`` for n=2."""
    vars = x_vars(n) if n in (1, 2) else None
    if n == 1:
        x = RatFn.var(vars, "x1")
        return DiffOp.partial(1, 1) - 1 / x
    if n == 2:
        x1, x2 = RatFn.var(vars, "x1"), RatFn.var(vars, "x2")
        return make_standard(2, "diff_ij", 1, 2) - 2 / (x1 - x2)
    raise ValueError(f"no closed form for n={n}; use solve_intertwiner/search_intertwiner")


def search_intertwiner(
    L: DiffOp, Lt: DiffOp, start: AnsatzSpec, *, cap: int = DEFAULT_CAP, max_rounds: int = 12
) -> IntertwinerResult:
    """Grow the ansatz until a nonzero intertwiner appears.

    Growth cycles through doubling the numerator degree, doubling the
    denominator exponent and raising the order by one. Raises
    ``ResourceError`` once the ansatz dimension would exceed ``cap``.
    """
    spec = start
    step = 0
    for _ in range(max_rounds):
        res = solve_intertwiner(L, Lt, spec, cap=cap)
        if res.solutions:
            return res
        log.info("no intertwiner in %s, growing", spec)
        kind = step % 3
        step += 1
        if kind == 0:
            spec = AnsatzSpec(spec.n, spec.max_order, max(1, 2 * spec.num_degree), spec.den_exponent)
        elif kind == 1:
            spec = AnsatzSpec(spec.n, spec.max_order, spec.num_degree, max(1, 2 * spec.den_exponent))
        else:
            spec = AnsatzSpec(spec.n, spec.max_order + 1, spec.num_degree, spec.den_exponent)
        if spec.dimension > cap:
            raise ResourceError(
                f"ansatz dimension {spec.dimension} exceeds the cap {cap}", spec.dimension
            )
    return res


def centralizer_search_first_order(A: DiffOp, spec: AnsatzSpec, *, cap: int = DEFAULT_CAP):
    """Basis of operators of order <= 1 in the ansatz space commuting with ``A``."""
    if spec.max_order != 1:
        raise ValueError("centralizer search is restricted to first-order ansatz spaces")
    return solve_intertwiner(A, A, spec, cap=cap).solutions


# ----------------------------------------------------------------------
# translation-invariant part of a solution space
# ----------------------------------------------------------------------
def _shift_images(D: DiffOp):
    """Images under the infinitesimal x-shift and derivative-shift generators."""
    n = D.n
    xs = {}
    for a, c in D.terms.items():
        s = sum((c.diff(i) for i in range(n)), RatFn.const(D.vars, 0))
        if s:
            xs[a] = s
    zs = {}
    for a, c in D.terms.items():
        for i in range(n):
            if a[i]:
                b = a[:i] + (a[i] - 1,) + a[i + 1 :]
                t = c * a[i]
                zs[b] = zs[b] + t if b in zs else t
    return xs, zs


def _weight_defects(D: DiffOp, weight: int):
    """Terms of ``D`` whose scaling weight deg(coefficient) - |alpha| differs from ``weight``."""
    out = {}
    for a, c in D.terms.items():
        dd = c.den.total_degree()
        if any(sum(e) != dd for e in c.den.terms):
            raise ValueError(f"denominator {c.den} is not homogeneous")
        bad = {e: v for e, v in c.num.terms.items() if sum(e) - dd - sum(a) != weight}
        if bad:
            out[a] = RatFn(MPoly(c.vars, bad, _trusted=True), c.den)
    return out


def _kernel_combinations(ops: List[DiffOp], images) -> List[DiffOp]:
    """Basis of combinations ``sum l_k ops[k]`` annihilated by the linear map ``images``.

    ``images(D)`` returns a dict slot -> RatFn, linear in ``D``.
    """
    if not ops:
        return []
    imgs = [images(D) for D in ops]
    slots = sorted({s for im in imgs for s in im})
    ns = SparseNullspace(range(len(ops)))
    for slot in slots:
        entries = [(k, im[slot]) for k, im in enumerate(imgs) if slot in im and im[slot]]
        if not entries:
            continue
        den = entries[0][1].den
        for _, f in entries[1:]:
            den = _lcm_poly(den, f.den)
        rows: Dict = {}
        for k, f in entries:
            num = f.num * den.divexact(f.den)
            for mono, coef in num.terms.items():
                rows.setdefault(mono, {})[k] = coef
        for r in rows.values():
            ns.add_row(r)
    out = []
    for vec in ns.basis():
        D = DiffOp.zero(ops[0].n)
        for k, v in sorted(vec.items()):
            D = D + ops[k] * v
        out.append(D)
    return _normalize_solutions(out)[0]


def translation_invariant_subspace(ops: List[DiffOp]) -> List[DiffOp]:
    """Combinations of ``ops`` that are polynomials in d_i - d_j with x_ij-rational coefficients."""

    def images(D):
        xs, zs = _shift_images(D)
        return {**{("x", a): f for a, f in xs.items()}, **{("z", a): f for a, f in zs.items()}}

    return _kernel_combinations(ops, images)


def homogeneous_subspace(ops: List[DiffOp], weight: int) -> List[DiffOp]:
    """Combinations of ``ops`` invariant under x -> t x, d -> d / t up to the factor t^weight."""
    return _kernel_combinations(ops, lambda D: _weight_defects(D, weight))


def cv_weight(n: int) -> int:
    """Scaling weight of the Chalykh-Veselov operator: minus its order n(n-1)/2 (1 for n=1)."""
    return -max(1, n * (n - 1) // 2)


def canonical_intertwiner(solutions: List[DiffOp], n: int) -> List[DiffOp]:
    """Translation-invariant solutions of the homogeneous weight of D_n, Vandermonde-normalized."""
    ti = translation_invariant_subspace(solutions)
    return homogeneous_subspace(ti, cv_weight(n))


def _lcm_poly(a: MPoly, b: MPoly) -> MPoly:
    from .algebra import poly_gcd

    g = poly_gcd(a, b)
    return a * b.divexact(g)
