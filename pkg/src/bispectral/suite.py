"""The verification suite behind ``bispectral verify``.

Each check records the identity it tests as a short anchor string. Checks
are assembled in a fixed order and sorted by id, and no timings are
stored, so equal inputs give byte-identical reports.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .algebra import MPoly, RatFn, paired_vars, x_vars
from .diffop import DiffOp, make_standard, op_commutator
from .eigenring import (
    PSI,
    SIGMA,
    apply_op,
    bispectral_symbol,
    derive_pn,
    eigen_check,
    first_derivative_sum_terms,
    make_function,
    printed_pn,
    sigma_asymmetry_witness,
    symmetry_check,
)
from .intertwiner import AnsatzSpec, centralizer_search_first_order, verify_intertwine

PASS, FAIL, SKIP = "pass", "fail", "skipped"


@dataclass
class Check:
    id: str
    anchor: str
    status: str
    detail: str = ""

    def to_json(self):
        return {"id": self.id, "anchor": self.anchor, "status": self.status, "detail": self.detail}


@dataclass
class VerificationSuiteReport:
    n: int
    seed: int
    checks: List[Check] = field(default_factory=list)
    eigen_reports: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.status != FAIL for c in self.checks)

    def to_json(self):
        return {
            "n": self.n,
            "seed": self.seed,
            "overall": PASS if self.passed else FAIL,
            "checks": [c.to_json() for c in sorted(self.checks, key=lambda c: c.id)],
            "eigen_reports": self.eigen_reports,
            "notes": self.notes,
        }


def _z_sum(n):
    vars = paired_vars(n)
    zs = MPoly.gens(vars)[n:]
    return RatFn.from_poly(sum(zs[1:], zs[0]))


def _z_diff(n, i, j):
    vars = paired_vars(n)
    zs = MPoly.gens(vars)[n:]
    return RatFn.from_poly(zs[i - 1] - zs[j - 1])


def _ok(flag):
    return PASS if flag else FAIL


def run_suite(
    n: int,
    *,
    seed: int = 0,
    numeric_points: int = 10,
    get_operator: Optional[Callable[[int], DiffOp]] = None,
) -> VerificationSuiteReport:
    """Run every exact and numeric check that applies to ``n`` particles.

    ``get_operator(n)`` supplies D_n (the default builds or loads it).
    """
    if get_operator is None:
        from .store import get_dn as get_operator

    rep = VerificationSuiteReport(n, seed)
    add = rep.checks.append
    H = make_standard(n, "airy_sum")
    psi = make_function(PSI, n)

    # eigenvalue of H on psi
    pn = derive_pn(n)
    r = eigen_check(H, psi, pn, op_id="H", fn_id="psi")
    rep.eigen_reports.append(r.to_json())
    add(Check("psi.H_eigen", "H psi = p_n(z) psi", _ok(r.passed), f"p_n = {pn}"))
    printed = printed_pn(n)
    rep.notes["p_n"] = {
        "computed": str(pn),
        "printed_formula": str(printed),
        "agree": pn == printed,
        "adjudication": "the exact symbolic application is authoritative"
        + ("" if pn == printed else "; the printed formula lacks the 1/n^2 factor on (sum_i z_ij)^2"),
    }
    s = first_derivative_sum_terms(n)
    lin = [e for e in s.terms if e == (1,)]
    add(Check("psi.first_derivative_cancels", "sum_j of the Ai' terms in sum d_j^2 psi vanishes",
              _ok(not lin), "R-linear coefficient is zero" if not lin else str(s.coefficient((1,)))))
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            r = eigen_check(make_standard(n, "diff_ij", i, j), psi, _z_diff(n, i, j),
                            op_id=f"d{i}{j}", fn_id="psi")
            rep.eigen_reports.append(r.to_json())
            add(Check(f"psi.diff_{i}{j}", "d_ij psi = z_ij psi", _ok(r.passed)))
    add(Check("psi.symmetric", "psi(x, z) = psi(z, x)", _ok(_psi_symmetric(n))))

    skip_reason = "skipped (n=1: no pair terms)"
    if n == 1:
        for cid, anchor in (
            ("hamiltonian.hyperplane", "H~ - Delta~ = -sum x_i"),
            ("intertwine.free", "D_n Delta = Delta~ D_n"),
            ("intertwine.airy", "D_n H = H~ D_n"),
            ("psi_tilde.eigen", "H~ psi~ = p_n(z) psi~"),
            ("psi_tilde.symmetric", "psi~(x, z) = psi~(z, x)"),
            ("sigma_tilde.eigen", "H~ sigma~ = (sum z_i) sigma~"),
            ("sigma_tilde.asymmetry", "no z-multiple of sigma~ is symmetric"),
        ):
            add(Check(cid, anchor, SKIP, skip_reason))
        rep.eigen_reports.sort(key=lambda d: (d["op"], d["fn"]))
        return rep

    Ht = make_standard(n, "deformed")
    diff = Ht - make_standard(n, "cm")
    xs = MPoly.gens(x_vars(n))
    add(Check("hamiltonian.hyperplane", "H~ - Delta~ = -sum x_i",
              _ok(diff == DiffOp.multiplication(n, -sum(xs[1:], xs[0])))))
    for k in range(1, n):
        c = op_commutator(make_standard(n, "diff_ij", k, n), H)
        add(Check(f"commute.d{k}{n}_H", "[d_in, H] = 0", _ok(c.is_zero())))

    D = get_operator(n)
    add(Check("intertwine.free", "D_n Delta = Delta~ D_n",
              _ok(verify_intertwine(D, make_standard(n, "laplacian"), make_standard(n, "cm"))),
              f"order {D.order()}, {len(D.terms)} terms"))
    add(Check("intertwine.airy", "D_n H = H~ D_n", _ok(verify_intertwine(D, H, Ht))))

    Dpsi = apply_op(D, psi)
    r = eigen_check(Ht, Dpsi, pn, op_id="H~", fn_id="D_n[psi]")
    rep.eigen_reports.append(r.to_json())
    add(Check("psi_tilde.eigen", "H~ psi~ = p_n(z) psi~", _ok(r.passed)))
    sym = bispectral_symbol(D)
    add(Check("psi_tilde.symmetric", "psi~(x, z) = psi~(z, x)", _ok(symmetry_check(sym)), str(sym) if n == 2 else ""))

    Dsig = apply_op(D, make_function(SIGMA, n))
    r = eigen_check(Ht, Dsig, _z_sum(n), op_id="H~", fn_id="D_n[sigma]")
    rep.eigen_reports.append(r.to_json())
    add(Check("sigma_tilde.eigen", "H~ sigma~ = (sum z_i) sigma~", _ok(r.passed)))
    w = sigma_asymmetry_witness(n, D, seed=seed)
    add(Check("sigma_tilde.asymmetry", "no z-multiple of sigma~ is symmetric",
              _ok(w.literal_passes and w.cross_passes and not w.symbolic_symmetric),
              f"ratio gap {w.relative_gap:.6g}, cross-ratio gap {w.cross_gap:.6g}"))
    rep.notes["sigma_witness"] = w.to_json()

    if n == 2:
        basis = centralizer_search_first_order(Ht, AnsatzSpec(2, 1, 1, 1))
        const = all(op.order() == 0 and all(c.is_constant() for c in op.terms.values()) for op in basis)
        add(Check("centralizer.first_order", "no first-order operator commutes with H~",
                  _ok(const), f"{len(basis)} basis element(s), all constant" if const else str(basis)))

    if numeric_points > 0:
        from .numerics import fd_checks

        rows = fd_checks(n, D, numeric_points, np.random.default_rng(seed))
        worst = max(row.relative_error for row in rows)
        add(Check("numeric.finite_difference", "finite-difference eigen-relations at random points",
                  _ok(worst < 1e-5), f"{len(rows)} residuals, worst relative error {worst:.3e}"))
    rep.eigen_reports.sort(key=lambda d: (d["op"], d["fn"]))
    return rep


def _psi_symmetric(n):
    from .eigenring import psi_phase_data

    return symmetry_check(psi_phase_data(n))
