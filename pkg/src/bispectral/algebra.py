"""Exact arithmetic: rationals, multivariate polynomials, rational functions.

Coefficients are ``gmpy2.mpq`` when gmpy2 is importable and
``fractions.Fraction`` otherwise; both expose ``numerator``/``denominator``
and mix freely with Python ints.

Monomials are compared in graded lexicographic order with the variable
order fixed by the polynomial's variable tuple (later variables are more
significant), so ``x1 < x2 < ... < z1 < ... < zn`` for the paired layout.
"""

from __future__ import annotations

import heapq
import math
import re
from fractions import Fraction
from functools import reduce
from typing import Dict, Mapping, Sequence, Tuple

try:
    from gmpy2 import mpq as _mpq
    from gmpy2 import mpz as _mpz

    def Q(value=0, den=None):
        if den is None:
            if isinstance(value, str):
                return _mpq(value.strip())
            return _mpq(value)
        return _mpq(value, den)

    RAT_TYPES = (type(_mpq(0)), type(_mpz(0)), int, Fraction)
except ImportError:  # pragma: no cover - exercised only without gmpy2
    def Q(value=0, den=None):
        if den is None:
            return Fraction(value)
        return Fraction(value, den)

    RAT_TYPES = (Fraction, int)

Monomial = Tuple[int, ...]

__all__ = [
    "Q",
    "AlignmentError",
    "PoleError",
    "MPoly",
    "RatFn",
    "CubicExt",
    "poly_gcd",
    "ratfn_normalize",
    "ratfn_eval",
    "swap_xz",
    "paired_vars",
    "x_vars",
    "rat_to_str",
    "rat_from_str",
]


class AlignmentError(ValueError):
    """Operands live over different variable lists."""


class PoleError(ZeroDivisionError):
    """A denominator vanished at an evaluation point."""

    def __init__(self, message, factor=None):
        super().__init__(message)
        self.factor = factor


def rat_to_str(q) -> str:
    q = Q(q)
    return f"{int(q.numerator)}/{int(q.denominator)}"


def rat_from_str(s: str):
    if not re.fullmatch(r"\s*-?\d+\s*(/\s*\d+\s*)?", s):
        raise ValueError(f"not a rational literal: {s!r}")
    return Q(s)


def x_vars(n: int) -> Tuple[str, ...]:
    return tuple(f"x{i}" for i in range(1, n + 1))


def paired_vars(n: int) -> Tuple[str, ...]:
    return x_vars(n) + tuple(f"z{i}" for i in range(1, n + 1))


def _grlex_key(e: Monomial):
    return (sum(e), e[::-1])


def _neg_key(e: Monomial):
    return (-sum(e), tuple(-k for k in reversed(e)))


class MPoly:
    """Sparse multivariate polynomial with rational coefficients.

    Instances are immutable by convention; ``terms`` maps exponent tuples to
    nonzero coefficients.

    >>> x1, x2 = MPoly.gens(("x1", "x2"))
    >>> (x1 + x2) * (x1 - x2) == x1**2 - x2**2
    True
    """

    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, vars: Sequence[str], terms: Mapping[Monomial, object] = None, _trusted=False):
        self.vars = tuple(vars)
        if _trusted:
            self.terms = terms
        else:
            nv = len(self.vars)
            clean = {}
            for e, c in (terms or {}).items():
                e = tuple(int(k) for k in e)
                if len(e) != nv or any(k < 0 for k in e):
                    raise ValueError(f"bad exponent vector {e} for variables {self.vars}")
                c = Q(c)
                if c:
                    clean[e] = clean.get(e, 0) + c
                    if not clean[e]:
                        del clean[e]
            self.terms = clean
        self._hash = None

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, vars):
        return cls(vars, {}, _trusted=True)

    @classmethod
    def const(cls, vars, c):
        vars = tuple(vars)
        c = Q(c)
        return cls(vars, {(0,) * len(vars): c} if c else {}, _trusted=True)

    @classmethod
    def var(cls, vars, name):
        vars = tuple(vars)
        i = vars.index(name)
        e = [0] * len(vars)
        e[i] = 1
        return cls(vars, {tuple(e): Q(1)}, _trusted=True)

    @classmethod
    def gens(cls, vars):
        return tuple(cls.var(vars, v) for v in vars)

    # basic queries ------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_value(self):
        if not self.terms:
            return Q(0)
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values()))

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=-1)

    def leading(self):
        """Leading (monomial, coefficient) under graded lex."""
        e = max(self.terms, key=_grlex_key)
        return e, self.terms[e]

    def occurring(self):
        """Indices of variables that actually occur."""
        nv = len(self.vars)
        seen = [False] * nv
        for e in self.terms:
            for i, k in enumerate(e):
                if k:
                    seen[i] = True
        return [i for i in range(nv) if seen[i]]

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    # alignment ----------------------------------------------------------
    def _check(self, other):
        if self.vars != other.vars:
            raise AlignmentError(f"variable lists differ: {self.vars} vs {other.vars}")

    def _coerce(self, other):
        if isinstance(other, MPoly):
            self._check(other)
            return other
        if isinstance(other, RAT_TYPES):
            return MPoly.const(self.vars, other)
        return NotImplemented

    def align(self, vars: Sequence[str]) -> "MPoly":
        """Re-express over ``vars``; every occurring variable must be kept."""
        vars = tuple(vars)
        if vars == self.vars:
            return self
        pos = {v: i for i, v in enumerate(vars)}
        for i in self.occurring():
            if self.vars[i] not in pos:
                raise AlignmentError(f"variable {self.vars[i]} missing from {vars}")
        idx = [(pos[v], i) for i, v in enumerate(self.vars) if v in pos]
        nv = len(vars)
        out = {}
        for e, c in self.terms.items():
            ne = [0] * nv
            for j, i in idx:
                ne[j] = e[i]
            out[tuple(ne)] = c
        return MPoly(vars, out, _trusted=True)

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.terms:
            return self
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v = v + c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return MPoly(self.vars, out, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return MPoly(self.vars, {e: -c for e, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = Q(c)
        if not c:
            return MPoly.zero(self.vars)
        return MPoly(self.vars, {e: v * c for e, v in self.terms.items()}, _trusted=True)

    def __mul__(self, other):
        if isinstance(other, RAT_TYPES):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.terms, other.terms
        if not a or not b:
            return MPoly.zero(self.vars)
        if len(a) < len(b):
            a, b = b, a
        out = {}
        get = out.get
        for eb, cb in b.items():
            for ea, ca in a.items():
                e = tuple(p + q for p, q in zip(ea, eb))
                v = get(e)
                out[e] = ca * cb if v is None else v + ca * cb
        return MPoly(self.vars, {e: c for e, c in out.items() if c}, _trusted=True)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = MPoly.const(self.vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def mul_monomial(self, m: Monomial, c=1):
        c = Q(c)
        return MPoly(
            self.vars,
            {tuple(p + q for p, q in zip(e, m)): v * c for e, v in self.terms.items()},
            _trusted=True,
        )

    def __eq__(self, other):
        if isinstance(other, MPoly):
            return self.vars == other.vars and self.terms == other.terms
        if isinstance(other, RAT_TYPES):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.terms.items())))
        return self._hash

    # calculus and evaluation -------------------------------------------
    def diff(self, i: int) -> "MPoly":
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                ne = list(e)
                ne[i] = k - 1
                out[tuple(ne)] = c * k
        return MPoly(self.vars, out, _trusted=True)

    def evaluate(self, values: Sequence):
        """Evaluate at ``values`` given in variable order (exact if rational)."""
        total = 0
        for e, c in self.terms.items():
            t = c
            for v, k in zip(values, e):
                if k:
                    t = t * v**k
            total = total + t
        return total

    def substitute(self, mapping: Mapping[int, "MPoly"], vars=None) -> "MPoly":
        """Replace variable ``i`` by ``mapping[i]`` (polynomials over ``vars``)."""
        vars = tuple(vars) if vars is not None else self.vars
        target = {}
        for i, p in mapping.items():
            if p.vars != vars:
                raise AlignmentError("substitution images must share the target variables")
            target[i] = p
        keep = [(vars.index(v), i) for i, v in enumerate(self.vars) if i not in target]
        powers: Dict[Tuple[int, int], MPoly] = {}
        result = MPoly.zero(vars)
        nv = len(vars)
        for e, c in self.terms.items():
            base = [0] * nv
            for j, i in keep:
                base[j] = e[i]
            term = MPoly(vars, {tuple(base): c}, _trusted=True)
            for i, p in target.items():
                k = e[i]
                if k:
                    key = (i, k)
                    if key not in powers:
                        powers[key] = p**k
                    term = term * powers[key]
            result = result + term
        return result

    def permute(self, perm: Sequence[int]) -> "MPoly":
        """Exponent ``e`` becomes ``e'`` with ``e'[perm[i]] = e[i]``."""
        nv = len(self.vars)
        out = {}
        for e, c in self.terms.items():
            ne = [0] * nv
            for i, k in enumerate(e):
                ne[perm[i]] = k
            out[tuple(ne)] = c
        return MPoly(self.vars, out, _trusted=True)

    # content / division -------------------------------------------------
    def rational_content(self):
        """Positive rational c with self/c having coprime integer coefficients."""
        if not self.terms:
            return Q(1)
        nums = [abs(int(c.numerator)) for c in self.terms.values()]
        dens = [int(c.denominator) for c in self.terms.values()]
        return Q(reduce(math.gcd, nums), reduce(_lcm, dens))

    def primitive(self) -> "MPoly":
        """Integer-primitive associate with positive leading coefficient."""
        if not self.terms:
            return self
        c = self.rational_content()
        if self.leading()[1] < 0:
            c = -c
        return self.scale(1 / c)

    def divexact(self, other: "MPoly") -> "MPoly":
        q, r = self.divmod(other)
        if r:
            raise ArithmeticError("inexact polynomial division")
        return q

    def divmod(self, other: "MPoly"):
        """Multivariate division by a single divisor under graded lex.

        The remainder is zero exactly when ``other`` divides ``self``.
        """
        self._check(other)
        if not other.terms:
            raise ZeroDivisionError("polynomial division by zero")
        le, lc = other.leading()
        inv_lc = 1 / lc
        oterms = list(other.terms.items())
        rem = dict(self.terms)
        heap = [(_neg_key(e), e) for e in rem]
        heapq.heapify(heap)
        quot = {}
        out_rem = {}
        while heap:
            _, e = heapq.heappop(heap)
            c = rem.pop(e, None)
            if c is None:
                continue
            if all(p >= q for p, q in zip(e, le)):
                m = tuple(p - q for p, q in zip(e, le))
                f = c * inv_lc
                quot[m] = f
                for oe, oc in oterms:
                    ne = tuple(p + q for p, q in zip(oe, m))
                    if ne == e:
                        continue
                    old = rem.get(ne)
                    if old is None:
                        rem[ne] = -f * oc
                        heapq.heappush(heap, (_neg_key(ne), ne))
                    else:
                        v = old - f * oc
                        if v:
                            rem[ne] = v
                        else:
                            del rem[ne]
            else:
                out_rem[e] = c
        return (
            MPoly(self.vars, quot, _trusted=True),
            MPoly(self.vars, out_rem, _trusted=True),
        )

    def divides(self, other: "MPoly") -> bool:
        return not other.divmod(self)[1]

    def coeffs_in(self, i: int) -> Dict[int, "MPoly"]:
        """Split into powers of variable ``i``; coefficients keep the full variable list."""
        parts: Dict[int, dict] = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                e = e[:i] + (0,) + e[i + 1 :]
            parts.setdefault(k, {})[e] = c
        return {k: MPoly(self.vars, t, _trusted=True) for k, t in parts.items()}

    # printing / serialization -------------------------------------------
    def __repr__(self):
        return f"MPoly({self.to_str()!r})"

    def to_str(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=_grlex_key, reverse=True):
            c = self.terms[e]
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, e) if k
            )
            cs = rat_to_str(c) if c.denominator != 1 else str(int(c.numerator))
            if not mono:
                parts.append(cs)
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{cs}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    __str__ = to_str

    def sorted_terms(self):
        return [(e, self.terms[e]) for e in sorted(self.terms, key=_grlex_key, reverse=True)]

    def to_json(self):
        return {
            "vars": list(self.vars),
            "terms": [[list(e), rat_to_str(c)] for e, c in self.sorted_terms()],
        }

    @classmethod
    def from_json(cls, obj):
        vars = obj["vars"]
        return cls(vars, {tuple(e): rat_from_str(c) for e, c in obj["terms"]})


def _lcm(a, b):
    return a // math.gcd(a, b) * b


# ----------------------------------------------------------------------
# gcd
# ----------------------------------------------------------------------
def _gcd_many(polys, vars) -> MPoly:
    """gcd of a family, smallest members first with a divisibility shortcut."""
    polys = sorted(polys, key=lambda c: (c.total_degree(), len(c.terms)))
    g = None
    for c in polys:
        if g is None:
            g = c
        elif not g.divides(c):
            g = poly_gcd(g, c)
        if g.is_constant():
            return MPoly.const(vars, 1)
    return g


def _content_in(p: MPoly, i: int) -> MPoly:
    return _gcd_many(p.coeffs_in(i).values(), p.vars)


def _prem(a: Dict[int, MPoly], b: Dict[int, MPoly], da: int, db: int, i: int, vars):
    """Pseudo-remainder of ``a`` by ``b`` viewed as polynomials in variable ``i``."""
    lc = b[db]
    a = dict(a)
    e = da - db + 1
    while da >= db and a:
        ca = a.get(da)
        if ca is None or ca.is_zero():
            a.pop(da, None)
            da -= 1
            continue
        shift = da - db
        new = {k: c * lc for k, c in a.items() if k != da}
        for k, cb in b.items():
            kk = k + shift
            if kk == da:
                continue
            v = new.get(kk, MPoly.zero(vars)) - ca * cb
            if v.is_zero():
                new.pop(kk, None)
            else:
                new[kk] = v
        a = new
        e -= 1
        da = max(a, default=-1)
    if e > 0:
        f = lc**e
        a = {k: c * f for k, c in a.items()}
    return a


def _assemble(parts: Dict[int, MPoly], i: int) -> MPoly:
    out = {}
    for k, c in parts.items():
        for e, v in c.terms.items():
            ne = e[:i] + (k,) + e[i + 1 :]
            out[ne] = v
    vars = next(iter(parts.values())).vars
    return MPoly(vars, out, _trusted=True)


_GCD_CACHE: Dict = {}
_GCD_CACHE_MAX = 20000


def poly_gcd(a: MPoly, b: MPoly) -> MPoly:
    """Greatest common divisor, returned integer-primitive with positive leading coefficient.

    Content extraction plus a recursive primitive polynomial remainder sequence.
    """
    a._check(b)
    key = (a, b)
    hit = _GCD_CACHE.get(key)
    if hit is not None:
        return hit
    g = _poly_gcd(a, b)
    if len(_GCD_CACHE) >= _GCD_CACHE_MAX:
        _GCD_CACHE.clear()
    _GCD_CACHE[key] = g
    return g


def _poly_gcd(a: MPoly, b: MPoly) -> MPoly:
    if a.is_zero():
        return b.primitive() if b else MPoly.const(a.vars, 1)
    if b.is_zero():
        return a.primitive()
    if a.is_constant() or b.is_constant():
        return MPoly.const(a.vars, 1)
    if len(a.terms) == 1 or len(b.terms) == 1:
        mono, other = (a, b) if len(a.terms) == 1 else (b, a)
        m = list(next(iter(mono.terms)))
        for e in other.terms:
            m = [min(p, q) for p, q in zip(m, e)]
        return MPoly(a.vars, {tuple(m): Q(1)}, _trusted=True)
    if a == b:
        return a.primitive()
    small, big = (a, b) if len(a.terms) <= len(b.terms) else (b, a)
    if small.divides(big):
        return small.primitive()

    va, vb = set(a.occurring()), set(b.occurring())
    only = (va ^ vb)
    if only:
        # a variable present in one argument only: the gcd divides every
        # coefficient of that argument with respect to all such variables
        p, q = (a, b) if (only & va) else (b, a)
        extra = sorted(only & set(p.occurring()))
        groups = {}
        for e, c in p.terms.items():
            key = tuple(e[k] for k in extra)
            ne = list(e)
            for k in extra:
                ne[k] = 0
            groups.setdefault(key, {})[tuple(ne)] = c
        coeffs = [MPoly(a.vars, t, _trusted=True) for t in groups.values()]
        return _gcd_many(coeffs + [q], a.vars).primitive()

    i = min(va, key=lambda k: min(a.degree_in(k), b.degree_in(k)))
    ca, cb = _content_in(a, i), _content_in(b, i)
    cont = poly_gcd(ca, cb)
    pa = a.divexact(ca) if not ca.is_constant() else a
    pb = b.divexact(cb) if not cb.is_constant() else b
    if pa.degree_in(i) < pb.degree_in(i):
        pa, pb = pb, pa
    A, B = pa.coeffs_in(i), pb.coeffs_in(i)
    da, db = max(A), max(B)
    vars = a.vars
    while True:
        R = _prem(A, B, da, db, i, vars)
        if not R:
            g = _assemble(B, i)
            break
        dr = max(R)
        if dr == 0:
            g = MPoly.const(vars, 1)
            break
        r = _assemble(R, i)
        cr = _content_in(r, i)
        if not cr.is_constant():
            r = r.divexact(cr)
        r = r.primitive()
        A, da = B, db
        B, db = r.coeffs_in(i), dr
    if not g.is_constant():
        cg = _content_in(g, i)
        if not cg.is_constant():
            g = g.divexact(cg)
    return (cont * g).primitive()


# ----------------------------------------------------------------------
# rational functions
# ----------------------------------------------------------------------
class RatFn:
    """Normalized quotient of polynomials.

    Canonical form: numerator and denominator have integer coefficients,
    share no common factor and no common integer content, and the
    denominator's leading coefficient is positive.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: MPoly, den: MPoly = None, _normalized=False):
        if den is None:
            den = MPoly.const(num.vars, 1)
        num._check(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if not _normalized:
            num, den = _normalize(num, den)
        self.num = num
        self.den = den
        self._hash = None

    @property
    def vars(self):
        return self.num.vars

    @classmethod
    def from_poly(cls, p: MPoly):
        return cls(p, MPoly.const(p.vars, 1))

    @classmethod
    def const(cls, vars, c):
        return cls(MPoly.const(vars, c), MPoly.const(vars, 1))

    @classmethod
    def var(cls, vars, name):
        return cls(MPoly.var(vars, name), MPoly.const(vars, 1), _normalized=True)

    def is_zero(self):
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def is_polynomial(self):
        return self.den.is_constant()

    def is_constant(self):
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self):
        return self.num.constant_value() / self.den.constant_value()

    def _coerce(self, other):
        if isinstance(other, RatFn):
            if other.vars != self.vars:
                raise AlignmentError(f"variable lists differ: {self.vars} vs {other.vars}")
            return other
        if isinstance(other, MPoly):
            return RatFn.from_poly(other)._coerce_self(self)
        if isinstance(other, RAT_TYPES):
            return RatFn.const(self.vars, other)
        return NotImplemented

    def _coerce_self(self, ref):
        if self.vars != ref.vars:
            raise AlignmentError(f"variable lists differ: {self.vars} vs {ref.vars}")
        return self

    def align(self, vars):
        return RatFn(self.num.align(vars), self.den.align(vars), _normalized=True)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.den == other.den:
            num = self.num + other.num
            return RatFn(*_normalize(num, self.den), _normalized=True)
        if self.den.is_constant() and other.den.is_constant():
            return RatFn(
                self.num * other.den.constant_value() + other.num * self.den.constant_value(),
                MPoly.const(self.vars, self.den.constant_value() * other.den.constant_value()),
            )
        g = poly_gcd(self.den, other.den)
        if g.is_constant():
            num = self.num * other.den + other.num * self.den
            den = self.den * other.den
        else:
            d1 = self.den.divexact(g)
            d2 = other.den.divexact(g)
            num = self.num * d2 + other.num * d1
            den = self.den * d2
            # any common factor of num and den already divides g
            return RatFn(*_normalize(num, den, hint=g), _normalized=True)
        return RatFn(*_normalize(num, den, coprime=True), _normalized=True)

    __radd__ = __add__

    def __neg__(self):
        return RatFn(-self.num, self.den, _normalized=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, RAT_TYPES):
            c = Q(other)
            if not c:
                return RatFn.const(self.vars, 0)
            return RatFn(self.num.scale(c), self.den)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return RatFn.const(self.vars, 0)
        if self.den.is_constant() and other.den.is_constant():
            return RatFn(self.num * other.num, self.den * other.den)
        # cross-cancel keeps the operands small
        g1 = poly_gcd(self.num, other.den)
        g2 = poly_gcd(other.num, self.den)
        n1 = self.num if g1.is_constant() else self.num.divexact(g1)
        d2 = other.den if g1.is_constant() else other.den.divexact(g1)
        n2 = other.num if g2.is_constant() else other.num.divexact(g2)
        d1 = self.den if g2.is_constant() else self.den.divexact(g2)
        return RatFn(*_normalize(n1 * n2, d1 * d2, coprime=True), _normalized=True)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RatFn(self.den, self.num)

    def __truediv__(self, other):
        if isinstance(other, RAT_TYPES):
            return self * (1 / Q(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return RatFn(self.num**k, self.den**k, _normalized=True)

    def __eq__(self, other):
        if isinstance(other, RatFn):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (MPoly,) + RAT_TYPES):
            try:
                other = self._coerce(other)
            except AlignmentError:
                return False
            return self == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def diff(self, i: int) -> "RatFn":
        if self.den.is_constant():
            return RatFn(self.num.diff(i), self.den, _normalized=False)
        D = self.den
        dD = D.diff(i)
        if dD.is_zero():
            # N coprime to D does not make dN coprime to D: (x1*x2 + 1)/x2 in x1
            return RatFn(*_normalize(self.num.diff(i), D), _normalized=True)
        h = poly_gcd(D, dD)
        D1 = D if h.is_constant() else D.divexact(h)
        D2 = dD if h.is_constant() else dD.divexact(h)
        num = self.num.diff(i) * D1 - self.num * D2
        return RatFn(*_normalize(num, D1 * D, hint=D), _normalized=True)

    def evaluate(self, values: Sequence):
        d = self.den.evaluate(values)
        if d == 0:
            raise PoleError(f"denominator {self.den} vanishes", factor=self.den)
        return self.num.evaluate(values) / d

    def substitute(self, mapping, vars=None):
        return RatFn(self.num.substitute(mapping, vars), self.den.substitute(mapping, vars))

    def permute(self, perm):
        return RatFn(self.num.permute(perm), self.den.permute(perm))

    def __repr__(self):
        return f"RatFn({self.to_str()!r})"

    def to_str(self):
        if self.den == 1:
            return self.num.to_str()
        return f"({self.num.to_str()})/({self.den.to_str()})"

    __str__ = to_str

    def to_json(self):
        return {
            "vars": list(self.vars),
            "num": [[list(e), rat_to_str(c)] for e, c in self.num.sorted_terms()],
            "den": [[list(e), rat_to_str(c)] for e, c in self.den.sorted_terms()],
        }

    @classmethod
    def from_json(cls, obj):
        vars = obj["vars"]
        num = MPoly(vars, {tuple(e): rat_from_str(c) for e, c in obj["num"]})
        den = MPoly(vars, {tuple(e): rat_from_str(c) for e, c in obj["den"]})
        return cls(num, den)


def _normalize(num: MPoly, den: MPoly, hint: MPoly = None, coprime=False):
    """Canonical form of ``num/den``.

    ``coprime`` skips the gcd when the caller knows there is no common
    factor; ``hint`` is a polynomial known to be divisible by any common factor.
    """
    if num.is_zero():
        return num, MPoly.const(num.vars, 1)
    g = None
    if not coprime and not den.is_constant():
        g = poly_gcd(num, den if hint is None else hint)
    if g is not None and not g.is_constant():
        num = num.divexact(g)
        den = den.divexact(g)
    nums = [abs(int(c.numerator)) for c in num.terms.values()] + [
        abs(int(c.numerator)) for c in den.terms.values()
    ]
    dens = [int(c.denominator) for c in num.terms.values()] + [
        int(c.denominator) for c in den.terms.values()
    ]
    k = Q(reduce(math.gcd, nums), reduce(_lcm, dens))
    if den.leading()[1] < 0:
        k = -k
    if k != 1:
        num = num.scale(1 / k)
        den = den.scale(1 / k)
    return num, den


def ratfn_normalize(num: MPoly, den: MPoly) -> RatFn:
    """Cancel common factors and fix the sign and scale of the denominator."""
    return RatFn(num, den)


def ratfn_eval(f: RatFn, point: Mapping[str, object]):
    """Exact value of ``f`` at ``point`` (a map from variable name to rational)."""
    missing = [v for i, v in enumerate(f.vars) if v not in point and i in set(f.num.occurring() + f.den.occurring())]
    if missing:
        raise KeyError(f"point does not bind {missing}")
    values = [Q(point[v]) if v in point else Q(0) for v in f.vars]
    d = f.den.evaluate(values)
    if d == 0:
        raise PoleError(
            f"pole: denominator factor {_vanishing_factor(f.den, values)} vanishes at {dict(point)}",
            factor=_vanishing_factor(f.den, values),
        )
    return f.num.evaluate(values) / d


def _vanishing_factor(den: MPoly, values):
    """Name a difference factor v_i - v_j of ``den`` that vanishes, if there is one."""
    vars = den.vars
    for i in range(len(vars)):
        for j in range(i + 1, len(vars)):
            if values[i] == values[j]:
                lin = MPoly.var(vars, vars[i]) - MPoly.var(vars, vars[j])
                if lin.divides(den):
                    return lin
    for i in range(len(vars)):
        if values[i] == 0:
            lin = MPoly.var(vars, vars[i])
            if lin.divides(den):
                return lin
    return den


# ----------------------------------------------------------------------
# cubic extension Q(x, z)[k] / (k^3 - 1/n)
# ----------------------------------------------------------------------
class CubicExt:
    """Element a0 + a1*k + a2*k^2 with k^3 = 1/n and RatFn components."""

    __slots__ = ("n", "c")

    def __init__(self, n: int, components):
        a0, a1, a2 = components
        self.n = int(n)
        self.c = (a0, a1, a2)
        if not (a0.vars == a1.vars == a2.vars):
            raise AlignmentError("components of a cubic extension element must share variables")

    @property
    def vars(self):
        return self.c[0].vars

    @classmethod
    def from_ratfn(cls, n, f: RatFn):
        z = RatFn.const(f.vars, 0)
        return cls(n, (f, z, z))

    @classmethod
    def kappa(cls, n, vars):
        z = RatFn.const(vars, 0)
        return cls(n, (z, RatFn.const(vars, 1), z))

    @classmethod
    def const(cls, n, vars, c):
        return cls.from_ratfn(n, RatFn.const(vars, c))

    def is_zero(self):
        return all(a.is_zero() for a in self.c)

    def __bool__(self):
        return not self.is_zero()

    def _coerce(self, other):
        if isinstance(other, CubicExt):
            if other.n != self.n:
                raise ValueError("cubic extensions over different n")
            if other.vars != self.vars:
                raise AlignmentError("cubic extension elements over different variables")
            return other
        if isinstance(other, (RatFn, MPoly)) or isinstance(other, RAT_TYPES):
            if isinstance(other, MPoly):
                other = RatFn.from_poly(other)
            elif not isinstance(other, RatFn):
                other = RatFn.const(self.vars, other)
            return CubicExt.from_ratfn(self.n, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return CubicExt(self.n, tuple(a + b for a, b in zip(self.c, other.c)))

    __radd__ = __add__

    def __neg__(self):
        return CubicExt(self.n, tuple(-a for a in self.c))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.c, other.c
        prod = [None] * 5
        for i in range(3):
            if a[i].is_zero():
                continue
            for j in range(3):
                if b[j].is_zero():
                    continue
                t = a[i] * b[j]
                prod[i + j] = t if prod[i + j] is None else prod[i + j] + t
        zero = RatFn.const(self.vars, 0)
        p = [x if x is not None else zero for x in prod]
        inv_n = Q(1, self.n)
        return CubicExt(self.n, (p[0] + p[3] * inv_n, p[1] + p[4] * inv_n, p[2]))

    __rmul__ = __mul__

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except (ValueError, AlignmentError):
            return False
        if other is NotImplemented:
            return other
        return self.c == other.c

    def __hash__(self):
        return hash((self.n, self.c))

    def diff(self, i):
        return CubicExt(self.n, tuple(a.diff(i) for a in self.c))

    def map(self, fn):
        return CubicExt(self.n, tuple(fn(a) for a in self.c))

    def as_ratfn(self) -> RatFn:
        if not (self.c[1].is_zero() and self.c[2].is_zero()):
            raise ValueError("element involves the cube root and is not rational")
        return self.c[0]

    def evaluate(self, values):
        k = (1.0 / self.n) ** (1.0 / 3.0)
        return sum(float(a.evaluate(values)) * k**i for i, a in enumerate(self.c) if a)

    def __repr__(self):
        return "CubicExt(" + " + ".join(
            f"({a})*k^{i}" for i, a in enumerate(self.c) if a
        ) + f"; k^3=1/{self.n})"


# ----------------------------------------------------------------------
# x <-> z involution
# ----------------------------------------------------------------------
def _swap_perm(vars):
    nv = len(vars)
    if nv % 2:
        raise ValueError(f"variables {vars} are not paired x/z")
    n = nv // 2
    if tuple(vars) != paired_vars(n):
        raise ValueError(f"variables {vars} are not of the form x1..x{n}, z1..z{n}")
    return [(i + n) % nv for i in range(nv)]


def swap_xz(f):
    """Exchange x_i and z_i in a RatFn, MPoly or CubicExt."""
    if isinstance(f, CubicExt):
        return f.map(swap_xz)
    perm = _swap_perm(f.vars)
    return f.permute(perm)
