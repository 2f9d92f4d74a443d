"""Linear partial differential operators with rational coefficients.

Operators are stored normal-ordered, ``sum_alpha c_alpha(x) d^alpha``, with
coefficients to the left. Composition follows ``(A @ B)[f] = A[B[f]]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import comb
from typing import Dict, Tuple

from .algebra import MPoly, RAT_TYPES, Q, RatFn, x_vars

Alpha = Tuple[int, ...]

__all__ = [
    "DiffOp",
    "OpSymbol",
    "op_compose",
    "op_commutator",
    "make_standard",
    "op_symbol",
    "is_translation_invariant",
    "translation_flags",
    "zeta_vars",
]


def zeta_vars(n):
    return tuple(f"zeta{i}" for i in range(1, n + 1))


def _alpha_key(a: Alpha):
    return (sum(a), a[::-1])


class DiffOp:
    __slots__ = ("n", "terms", "vars")

    def __init__(self, n: int, terms: Dict[Alpha, RatFn] = None):
        if n < 1:
            raise ValueError("operators need at least one variable")
        self.n = n
        self.vars = x_vars(n)
        clean = {}
        for a, c in (terms or {}).items():
            a = tuple(int(k) for k in a)
            if len(a) != n or any(k < 0 for k in a):
                raise ValueError(f"bad multi-index {a} for n={n}")
            if isinstance(c, MPoly):
                c = RatFn.from_poly(c)
            elif isinstance(c, RAT_TYPES):
                c = RatFn.const(self.vars, c)
            if c.vars != self.vars:
                raise ValueError(f"coefficient over {c.vars}, expected {self.vars}")
            if a in clean:
                c = clean[a] + c
            if c.is_zero():
                clean.pop(a, None)
            else:
                clean[a] = c
        self.terms = clean

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, n):
        return cls(n, {})

    @classmethod
    def identity(cls, n):
        return cls.multiplication(n, 1)

    @classmethod
    def multiplication(cls, n, f):
        return cls(n, {(0,) * n: f})

    @classmethod
    def partial(cls, n, i):
        """The derivative in the ``i``-th variable (1-based)."""
        a = [0] * n
        a[i - 1] = 1
        return cls(n, {tuple(a): 1})

    # queries ------------------------------------------------------------
    def order(self):
        return max((sum(a) for a in self.terms), default=-1)

    def is_zero(self):
        return not self.terms

    def coefficient(self, alpha) -> RatFn:
        return self.terms.get(tuple(alpha), RatFn.const(self.vars, 0))

    def _check(self, other):
        if not isinstance(other, DiffOp):
            raise TypeError(f"expected DiffOp, got {type(other).__name__}")
        if other.n != self.n:
            raise ValueError(f"dimension mismatch: n={self.n} vs n={other.n}")

    # linear structure ---------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (RatFn, MPoly) + RAT_TYPES):
            other = DiffOp.multiplication(self.n, other)
        self._check(other)
        terms = dict(self.terms)
        for a, c in other.terms.items():
            terms[a] = terms[a] + c if a in terms else c
        return DiffOp(self.n, terms)

    __radd__ = __add__

    def __neg__(self):
        return DiffOp(self.n, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (RatFn, MPoly) + RAT_TYPES):
            other = DiffOp.multiplication(self.n, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, c):
        """Left multiplication by a scalar or a coefficient function."""
        if isinstance(c, MPoly):
            c = RatFn.from_poly(c)
        if isinstance(c, RatFn) or isinstance(c, RAT_TYPES):
            return DiffOp(self.n, {a: v * c for a, v in self.terms.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        return op_compose(self, other)

    def __eq__(self, other):
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def sorted_terms(self):
        return [(a, self.terms[a]) for a in sorted(self.terms, key=_alpha_key, reverse=True)]

    def __repr__(self):
        parts = []
        for a, c in self.sorted_terms():
            d = "*".join(
                (f"d{i + 1}" if k == 1 else f"d{i + 1}^{k}") for i, k in enumerate(a) if k
            )
            cs = str(c)
            if not d:
                parts.append(f"({cs})")
            elif c == 1:
                parts.append(d)
            else:
                parts.append(f"({cs})*{d}")
        return "DiffOp(" + (" + ".join(parts) or "0") + ")"

    def to_json(self):
        return {
            "n": self.n,
            "terms": [{"alpha": list(a), "coeff": c.to_json()} for a, c in self.sorted_terms()],
        }

    @classmethod
    def from_json(cls, obj):
        n = int(obj["n"])
        return cls(n, {tuple(t["alpha"]): RatFn.from_json(t["coeff"]) for t in obj["terms"]})


class _DerivCache:
    """Memoized mixed partial derivatives of one coefficient."""

    def __init__(self, f: RatFn):
        self.f = f
        self.cache = {(0,) * len(f.vars): f}

    def get(self, gamma: Alpha) -> RatFn:
        if gamma in self.cache:
            return self.cache[gamma]
        i = next(k for k, g in enumerate(gamma) if g)
        lower = gamma[:i] + (gamma[i] - 1,) + gamma[i + 1 :]
        d = self.get(lower).diff(i)
        self.cache[gamma] = d
        return d


def op_compose(A: DiffOp, B: DiffOp) -> DiffOp:
    """Normal-ordered product ``A o B`` via the Leibniz rule."""
    A._check(B)
    n = A.n
    acc: Dict[Alpha, RatFn] = {}
    caches = {b: _DerivCache(cb) for b, cb in B.terms.items()}
    for a, ca in A.terms.items():
        for b, cb in B.terms.items():
            for gamma in product(*(range(k + 1) for k in a)):
                d = caches[b].get(gamma)
                if d.is_zero():
                    continue
                mult = 1
                for ai, gi in zip(a, gamma):
                    mult *= comb(ai, gi)
                out = tuple(ai - gi + bi for ai, gi, bi in zip(a, gamma, b))
                term = ca * d
                if mult != 1:
                    term = term * mult
                acc[out] = acc[out] + term if out in acc else term
    return DiffOp(n, acc)


def op_commutator(A: DiffOp, B: DiffOp) -> DiffOp:
    return op_compose(A, B) - op_compose(B, A)


def _pairs(n):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def pair_potential(n) -> RatFn:
    """sum_{i<j} 4 / (x_i - x_j)^2 over ``x1..xn``."""
    vars = x_vars(n)
    xs = MPoly.gens(vars)
    total = RatFn.const(vars, 0)
    for i, j in _pairs(n):
        total = total + RatFn(MPoly.const(vars, 4), (xs[i] - xs[j]) ** 2)
    return total


def make_standard(n: int, which: str, i: int = None, j: int = None) -> DiffOp:
    """Named operators.

    ``laplacian``  sum d_i^2
    ``cm``         laplacian - sum_{i<j} 4/(x_i-x_j)^2
    ``airy_sum``   sum (d_i^2 - x_i)
    ``deformed``   airy_sum - sum_{i<j} 4/(x_i-x_j)^2
    ``diff_ij``    d_i - d_j (1-based ``i``, ``j``)
    """
    if n < 1:
        raise ValueError("n must be positive")
    vars = x_vars(n)
    xs = MPoly.gens(vars)
    if which == "diff_ij":
        if i is None or j is None or not (1 <= i <= n and 1 <= j <= n) or i == j:
            raise ValueError(f"diff_ij needs distinct indices in 1..{n}, got {i}, {j}")
        return DiffOp.partial(n, i) - DiffOp.partial(n, j)
    if which in ("cm", "deformed") and n < 2:
        raise ValueError(f"{which} needs n >= 2: there are no pair terms for n=1")
    lap = DiffOp(n, {tuple(2 if k == m else 0 for k in range(n)): 1 for m in range(n)})
    if which == "laplacian":
        return lap
    if which == "cm":
        return lap - pair_potential(n)
    linear = RatFn.from_poly(sum(xs[1:], xs[0]))
    if which == "airy_sum":
        return lap - linear
    if which == "deformed":
        return lap - linear - pair_potential(n)
    raise ValueError(f"unknown operator {which!r}")


@dataclass(frozen=True)
class OpSymbol:
    n: int
    symbol: RatFn

    def __add__(self, other):
        return OpSymbol(self.n, self.symbol + other.symbol)


def op_symbol(A: DiffOp) -> OpSymbol:
    """Replace d_i by the commuting indeterminate ``zeta_i`` in normal order."""
    vars = x_vars(A.n) + zeta_vars(A.n)
    total = RatFn.const(vars, 0)
    for a, c in A.sorted_terms():
        c = c.align(vars)
        mono = MPoly(vars, {(0,) * A.n + a: Q(1)})
        total = total + c * RatFn.from_poly(mono)
    return OpSymbol(A.n, total)


def translation_flags(A: DiffOp):
    """(coefficients shift-invariant, symbol invariant under the derivative shift).

    The first flag checks ``sigma(x + t; zeta) = sigma(x; zeta)``, the second
    ``sigma(x; zeta + s) = sigma(x; zeta)``, with ``t``, ``s`` formal.
    """
    n = A.n
    sym = op_symbol(A).symbol
    ext = sym.vars + ("t", "s")
    base = sym.align(ext)
    t = MPoly.var(ext, "t")
    s = MPoly.var(ext, "s")
    gens = MPoly.gens(ext)
    xmap = {i: gens[i] + t for i in range(n)}
    zmap = {n + i: gens[n + i] + s for i in range(n)}
    x_ok = base.substitute(xmap) == base
    z_ok = base.substitute(zmap) == base
    return x_ok, z_ok


def is_translation_invariant(A: DiffOp, *, shift_derivatives: bool = True) -> bool:
    """Membership in the algebra of polynomials in d_i - d_j with x_ij-rational coefficients.

    With ``shift_derivatives=False`` only the coefficient shift is tested.
    """
    x_ok, z_ok = translation_flags(A)
    return x_ok and (z_ok or not shift_derivatives)
