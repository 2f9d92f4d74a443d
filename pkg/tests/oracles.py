"""Independent reference computations shared by the tests."""

import sympy as sp

from bispectral.algebra import RatFn


def sympy_pn(n):
    """H psi / psi computed by sympy with the Airy equation Ai'' = u Ai."""
    xs = sp.symbols(f"x1:{n + 1}")
    zs = sp.symbols(f"z1:{n + 1}")
    k = sp.Rational(1, n) ** sp.Rational(1, 3)
    u = k * sum(x + z for x, z in zip(xs, zs))
    phase = sp.Rational(1, n) * sum((xs[i] - xs[j]) * (zs[i] - zs[j]) for i in range(n) for j in range(i + 1, n))
    psi = sp.exp(phase) * sp.airyai(u)
    Hpsi = sum(sp.diff(psi, x, 2) - x * psi for x in xs)
    A, P = sp.symbols("A P")
    ratio = (Hpsi / psi).subs({sp.airyaiprime(u): P, sp.airyai(u): A})
    return sp.expand(sp.simplify(ratio)), xs, zs


def to_sympy(f: RatFn):
    syms = sp.symbols(" ".join(f.vars))
    env = dict(zip(f.vars, syms))

    def conv(p):
        return sum(sp.Rational(int(c.numerator), int(c.denominator))
                   * sp.Mul(*[env[v] ** e for v, e in zip(p.vars, exps)])
                   for exps, c in p.terms.items())

    return sp.together(conv(f.num) / conv(f.den))
