"""Numeric kernels with an optional numba backend.

Every kernel exists twice: a loop form compiled with ``numba.njit`` and a
vectorized numpy form. ``BISPECTRAL_NUMBA=0`` in the environment forces
the numpy forms; otherwise numba is used when it imports. Both forms are
kept numerically interchangeable (the test suite compares them).
"""

from __future__ import annotations

import math
import os

import numpy as np

AI0 = 0.355028053887817239  # Ai(0)
AIP0 = 0.258819403792806798  # -Ai'(0)
SERIES_LIMIT = 6.0
_SERIES_EPS = 1e-18
_ASYM_TERMS = 40


def _asym_coeffs(kmax=_ASYM_TERMS):
    u = np.empty(kmax)
    v = np.empty(kmax)
    u[0] = v[0] = 1.0
    for k in range(1, kmax):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
        v[k] = -(6 * k + 1) / (6 * k - 1) * u[k]
    return u, v


U_COEF, V_COEF = _asym_coeffs()


def _want_numba():
    flag = os.environ.get("BISPECTRAL_NUMBA", "1").strip().lower()
    if flag in ("0", "false", "no", "off"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


USE_NUMBA = _want_numba()
BACKEND = "numba" if USE_NUMBA else "numpy"


# ----------------------------------------------------------------------
# loop kernels (compiled when numba is active)
# ----------------------------------------------------------------------
def _airy_loop(t, U, V):
    m = t.shape[0]
    ai = np.empty(m)
    aip = np.empty(m)
    for idx in range(m):
        x = t[idx]
        if abs(x) <= SERIES_LIMIT:
            x3 = x * x * x
            # f, g and their derivatives, each with a Neumaier compensation
            f = 1.0
            fc = 0.0
            g = x
            gc = 0.0
            fp = 0.0
            fpc = 0.0
            gp = 1.0
            gpc = 0.0
            a = 1.0
            b = x
            ap = 0.5 * x * x
            bp = 1.0
            k = 1
            while True:
                a = a * x3 / ((3 * k - 1) * (3 * k))
                b = b * x3 / ((3 * k) * (3 * k + 1))
                if k > 1:
                    ap = ap * x3 / ((3 * k - 1) * (3 * k - 3))
                bp = bp * x3 / ((3 * k) * (3 * k - 2))
                s = f + a
                fc += (f - s) + a if abs(f) >= abs(a) else (a - s) + f
                f = s
                s = g + b
                gc += (g - s) + b if abs(g) >= abs(b) else (b - s) + g
                g = s
                s = fp + ap
                fpc += (fp - s) + ap if abs(fp) >= abs(ap) else (ap - s) + fp
                fp = s
                s = gp + bp
                gpc += (gp - s) + bp if abs(gp) >= abs(bp) else (bp - s) + gp
                gp = s
                big = max(abs(a), abs(b), abs(ap), abs(bp))
                if big < _SERIES_EPS or k > 200:
                    break
                k += 1
            ai[idx] = AI0 * (f + fc) - AIP0 * (g + gc)
            aip[idx] = AI0 * (fp + fpc) - AIP0 * (gp + gpc)
        elif x > 0:
            zeta = 2.0 / 3.0 * x**1.5
            su = 0.0
            sv = 0.0
            prev = math.inf
            zk = 1.0
            for k in range(U.shape[0]):
                term = U[k] / zk
                if term > prev:
                    break
                prev = term
                sgn = 1.0 if k % 2 == 0 else -1.0
                su += sgn * U[k] / zk
                sv += sgn * V[k] / zk
                zk *= zeta
            e = math.exp(-zeta) / (2.0 * math.sqrt(math.pi))
            q = x**0.25
            ai[idx] = e / q * su
            aip[idx] = -e * q * sv
        else:
            y = -x
            zeta = 2.0 / 3.0 * y**1.5
            ue = 0.0
            uo = 0.0
            ve = 0.0
            vo = 0.0
            prev = math.inf
            zk = 1.0
            for k in range(U.shape[0]):
                term = U[k] / zk
                if term > prev:
                    break
                prev = term
                sgn = 1.0 if (k // 2) % 2 == 0 else -1.0
                if k % 2 == 0:
                    ue += sgn * U[k] / zk
                    ve += sgn * V[k] / zk
                else:
                    uo += sgn * U[k] / zk
                    vo += sgn * V[k] / zk
                zk *= zeta
            th = zeta - math.pi / 4.0
            c = math.cos(th)
            s = math.sin(th)
            q = y**0.25
            r = 1.0 / math.sqrt(math.pi)
            ai[idx] = r / q * (c * ue + s * uo)
            aip[idx] = r * q * (s * ve - c * vo)
    return ai, aip


def _cm_rhs_loop(state, n):
    out = np.empty(2 * n)
    for i in range(n):
        out[i] = 2.0 * state[n + i]
        acc = 1.0
        for j in range(n):
            if j != i:
                d = state[i] - state[j]
                acc -= 8.0 / (d * d * d)
        out[n + i] = acc
    return out


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, :1] = [1 / 5]
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_B5 = _A[6].copy()
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _dopri_step_loop(state, n, h, A, E):
    m = 2 * n
    K = np.empty((7, m))
    K[0] = _cm_rhs_loop(state, n)
    tmp = np.empty(m)
    for s in range(1, 7):
        for q in range(m):
            acc = 0.0
            for r in range(s):
                acc += A[s, r] * K[r, q]
            tmp[q] = state[q] + h * acc
        K[s] = _cm_rhs_loop(tmp, n)
    # tmp now holds the 5th-order solution (row 6 of A is the b5 row)
    err = np.zeros(m)
    for q in range(m):
        acc = 0.0
        for r in range(7):
            acc += E[r] * K[r, q]
        err[q] = h * acc
    return tmp, err


def _poly_eval_loop(exps, coeffs, pts):
    p = pts.shape[0]
    m = exps.shape[0]
    k = exps.shape[1]
    out = np.zeros(p)
    for a in range(p):
        acc = 0.0
        for t in range(m):
            v = coeffs[t]
            for j in range(k):
                e = exps[t, j]
                if e:
                    v *= pts[a, j] ** e
            acc += v
        out[a] = acc
    return out


# ----------------------------------------------------------------------
# numpy forms
# ----------------------------------------------------------------------
def _neumaier_add(s, c, x):
    t = s + x
    big = np.abs(s) >= np.abs(x)
    c = c + np.where(big, (s - t) + x, (x - t) + s)
    return t, c


def _airy_series_np(x):
    x3 = x**3
    f, fc = np.ones_like(x), np.zeros_like(x)
    g, gc = x.copy(), np.zeros_like(x)
    fp, fpc = np.zeros_like(x), np.zeros_like(x)
    gp, gpc = np.ones_like(x), np.zeros_like(x)
    a, b = np.ones_like(x), x.copy()
    ap, bp = 0.5 * x * x, np.ones_like(x)
    k = 1
    while True:
        a = a * x3 / ((3 * k - 1) * (3 * k))
        b = b * x3 / ((3 * k) * (3 * k + 1))
        if k > 1:
            ap = ap * x3 / ((3 * k - 1) * (3 * k - 3))
        bp = bp * x3 / ((3 * k) * (3 * k - 2))
        f, fc = _neumaier_add(f, fc, a)
        g, gc = _neumaier_add(g, gc, b)
        fp, fpc = _neumaier_add(fp, fpc, ap)
        gp, gpc = _neumaier_add(gp, gpc, bp)
        big = np.max(np.abs(np.stack([a, b, ap, bp]))) if x.size else 0.0
        if big < _SERIES_EPS or k > 200:
            break
        k += 1
    return AI0 * (f + fc) - AIP0 * (g + gc), AI0 * (fp + fpc) - AIP0 * (gp + gpc)


def _truncation_mask(zeta):
    ks = np.arange(_ASYM_TERMS)
    terms = U_COEF[None, :] / zeta[:, None] ** ks[None, :]
    # keep terms up to (not including) the first increase
    rising = np.diff(terms, axis=1) > 0
    first = np.where(rising.any(axis=1), rising.argmax(axis=1) + 1, _ASYM_TERMS)
    return ks[None, :] < first[:, None], ks


def _airy_pos_np(x):
    zeta = 2.0 / 3.0 * x**1.5
    mask, ks = _truncation_mask(zeta)
    pw = zeta[:, None] ** ks[None, :]
    sgn = np.where(ks % 2 == 0, 1.0, -1.0)[None, :]
    su = np.sum(np.where(mask, sgn * U_COEF[None, :] / pw, 0.0), axis=1)
    sv = np.sum(np.where(mask, sgn * V_COEF[None, :] / pw, 0.0), axis=1)
    e = np.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    q = x**0.25
    return e / q * su, -e * q * sv


def _airy_neg_np(x):
    y = -x
    zeta = 2.0 / 3.0 * y**1.5
    mask, ks = _truncation_mask(zeta)
    pw = zeta[:, None] ** ks[None, :]
    sgn = np.where((ks // 2) % 2 == 0, 1.0, -1.0)[None, :]
    even = (ks % 2 == 0)[None, :]
    tu = np.where(mask, sgn * U_COEF[None, :] / pw, 0.0)
    tv = np.where(mask, sgn * V_COEF[None, :] / pw, 0.0)
    ue, uo = np.sum(np.where(even, tu, 0.0), axis=1), np.sum(np.where(even, 0.0, tu), axis=1)
    ve, vo = np.sum(np.where(even, tv, 0.0), axis=1), np.sum(np.where(even, 0.0, tv), axis=1)
    th = zeta - math.pi / 4.0
    c, s = np.cos(th), np.sin(th)
    q = y**0.25
    r = 1.0 / math.sqrt(math.pi)
    return r / q * (c * ue + s * uo), r * q * (s * ve - c * vo)


def _airy_np(t, U=None, V=None):
    ai = np.empty_like(t)
    aip = np.empty_like(t)
    for sel, fn in (
        (np.abs(t) <= SERIES_LIMIT, _airy_series_np),
        (t > SERIES_LIMIT, _airy_pos_np),
        (t < -SERIES_LIMIT, _airy_neg_np),
    ):
        if sel.any():
            ai[sel], aip[sel] = fn(t[sel])
    return ai, aip


def _cm_rhs_np(state, n):
    x, y = state[:n], state[n:]
    d = x[:, None] - x[None, :]
    np.fill_diagonal(d, np.inf)
    return np.concatenate([2.0 * y, 1.0 - np.sum(8.0 / d**3, axis=1)])


def _dopri_step_np(state, n, h, A, E):
    K = np.empty((7, state.size))
    K[0] = _cm_rhs_np(state, n)
    for s in range(1, 7):
        K[s] = _cm_rhs_np(state + h * (A[s, :s] @ K[:s]), n)
    new = state + h * (A[6, :6] @ K[:6])
    return new, h * (E @ K)


def _poly_eval_np(exps, coeffs, pts):
    if exps.shape[0] == 0:
        return np.zeros(pts.shape[0])
    mono = np.prod(pts[:, None, :] ** exps[None, :, :], axis=2)
    return mono @ coeffs


# ----------------------------------------------------------------------
# backend selection
# ----------------------------------------------------------------------
def _compile():
    from numba import njit

    global _cm_rhs_loop
    _cm_rhs_loop = njit(cache=True)(_cm_rhs_loop)
    return (
        njit(cache=True)(_airy_loop),
        _cm_rhs_loop,
        njit(cache=True)(_dopri_step_loop),
        njit(cache=True)(_poly_eval_loop),
    )


NUMPY_KERNELS = (_airy_np, _cm_rhs_np, _dopri_step_np, _poly_eval_np)
if USE_NUMBA:
    NUMBA_KERNELS = _compile()
    _airy_k, _rhs_k, _step_k, _poly_k = NUMBA_KERNELS
else:
    NUMBA_KERNELS = None
    _airy_k, _rhs_k, _step_k, _poly_k = NUMPY_KERNELS


def airy_kernel(t):
    t = np.ascontiguousarray(t, dtype=np.float64)
    return _airy_k(t, U_COEF, V_COEF)


def cm_rhs(state, n):
    return _rhs_k(np.ascontiguousarray(state, dtype=np.float64), n)


def dopri_step(state, n, h):
    return _step_k(np.ascontiguousarray(state, dtype=np.float64), n, float(h), _A, _E)


def poly_eval(exps, coeffs, pts):
    return _poly_k(
        np.ascontiguousarray(exps, dtype=np.int64),
        np.ascontiguousarray(coeffs, dtype=np.float64),
        np.ascontiguousarray(pts, dtype=np.float64),
    )
