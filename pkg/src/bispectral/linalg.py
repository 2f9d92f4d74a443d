"""Exact linear algebra over the rationals."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

from .algebra import Q


def _bits(q) -> int:
    return int(q.numerator).bit_length() + int(q.denominator).bit_length()


@dataclass(frozen=True)
class ExactMatrix:
    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0:
            raise ValueError("matrix dimensions must be positive")
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise ValueError("entry grid does not match the declared dimensions")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]):
        entries = tuple(tuple(Q(v) for v in r) for r in rows)
        return cls(len(entries), len(entries[0]) if entries else 0, entries)

    @classmethod
    def identity(cls, n):
        return cls.from_rows([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def matvec(self, v: Sequence) -> List:
        if len(v) != self.cols:
            raise ValueError("vector length does not match column count")
        return [sum((a * b for a, b in zip(r, v) if a), Q(0)) for r in self.entries]


@dataclass
class LinearSolution:
    """Affine solution set ``particular + span(null_basis)``.

    ``consistent`` is False (and ``particular`` None) when ``A v = b`` has no solution.
    """

    consistent: bool
    particular: Optional[List]
    null_basis: List[List] = field(default_factory=list)

    @property
    def unique(self):
        return self.consistent and not self.null_basis


def solve_linear_exact(A: ExactMatrix, b: Sequence) -> LinearSolution:
    """Gauss-Jordan elimination with smallest-bit-size pivoting."""
    if len(b) != A.rows:
        raise ValueError(f"right-hand side has length {len(b)}, expected {A.rows}")
    m, n = A.rows, A.cols
    M = [list(r) + [Q(v)] for r, v in zip(A.entries, b)]
    pivots = []
    r = 0
    for c in range(n):
        cand = [i for i in range(r, m) if M[i][c]]
        if not cand:
            continue
        p = min(cand, key=lambda i: _bits(M[i][c]))
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [v * inv for v in M[r]]
        for i in range(m):
            if i != r and M[i][c]:
                f = M[i][c]
                row_r = M[r]
                M[i] = [a - f * bb for a, bb in zip(M[i], row_r)]
        pivots.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if M[i][n]:
            return LinearSolution(False, None, [])
    particular = [Q(0)] * n
    for i, c in enumerate(pivots):
        particular[c] = M[i][n]
    pivot_set = set(pivots)
    basis = []
    for f in range(n):
        if f in pivot_set:
            continue
        v = [Q(0)] * n
        v[f] = Q(1)
        for i, c in enumerate(pivots):
            v[c] = -M[i][f]
        basis.append(v)
    return LinearSolution(True, particular, basis)


class SparseNullspace:
    """Incremental reduced row echelon form of a sparse homogeneous system.

    Rows are dicts ``column -> coefficient``; columns are arbitrary hashable
    keys. Rows are absorbed one at a time so the full matrix never needs to
    be materialized.
    """

    def __init__(self, columns: Iterable):
        self.columns = list(columns)
        self.pivots: Dict[object, Dict] = {}
        self._occ: Dict[object, set] = {}
        self.rank = 0

    def add_row(self, row: Dict):
        row = {k: Q(v) for k, v in row.items() if v}
        hits = [c for c in row if c in self.pivots]
        for c in hits:
            f = row.get(c)
            if not f:
                continue
            for k, v in self.pivots[c].items():
                nv = row.get(k, 0) - f * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
        if not row:
            return False
        piv = min(row, key=lambda k: (_bits(row[k]), len(self._occ.get(k, ()))))
        inv = 1 / row[piv]
        row = {k: v * inv for k, v in row.items()}
        # keep the form reduced: clear ``piv`` from earlier pivot rows
        for pc in list(self._occ.get(piv, ())):
            prow = self.pivots[pc]
            f = prow[piv]
            for k, v in row.items():
                nv = prow.get(k, 0) - f * v
                if nv:
                    if k not in prow:
                        self._occ.setdefault(k, set()).add(pc)
                    prow[k] = nv
                else:
                    if k in prow:
                        del prow[k]
                        self._occ[k].discard(pc)
        self._occ.pop(piv, None)
        self.pivots[piv] = row
        for k in row:
            if k != piv:
                self._occ.setdefault(k, set()).add(piv)
        self.rank += 1
        return True

    def basis(self) -> List[Dict]:
        """Null-space basis as sparse dicts, one per free column."""
        out = []
        for f in self.columns:
            if f in self.pivots:
                continue
            v = {f: Q(1)}
            for pc in self._occ.get(f, ()):
                v[pc] = -self.pivots[pc][f]
            out.append(v)
        return out
