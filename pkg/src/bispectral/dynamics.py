"""Classical n-particle system with Airy-type external force and its matrix form.

Positions ``x``, momenta ``y``, Hamiltonian

    H = sum (y_i^2 - x_i) - sum_{i<j} 4 / (x_i - x_j)^2,

so ``dx_i/dt = 2 y_i`` and ``dy_i/dt = 1 - sum_{j != i} 8 / (x_i - x_j)^3``.
The pair ``X = diag(x)``, ``Z_ii = y_i``, ``Z_ij = sqrt(2)/(x_i - x_j)``
gives ``H = tr(Z^2 - X)``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from . import _accel

__all__ = [
    "ParticleState",
    "CMPair",
    "Sample",
    "Trajectory",
    "CollisionError",
    "StepSizeError",
    "RankOneError",
    "DegeneracyError",
    "RANK_SHIFT",
    "cm_matrices",
    "rank_defect",
    "hamiltonian",
    "equations_of_motion",
    "integrals_of_motion",
    "involution",
    "dual_coordinates",
    "integrate",
    "preset",
    "PRESETS",
    "load_initial_state",
]

# [X, Z] has off-diagonal entries sqrt(2), so [X, Z] + sqrt(2) I = sqrt(2) * ones
RANK_SHIFT = math.sqrt(2.0)
RANK_TOL = 1e-8


class CollisionError(RuntimeError):
    def __init__(self, message, t=None, pair=None, trajectory=None):
        super().__init__(message)
        self.t = t
        self.pair = pair
        self.trajectory = trajectory


class StepSizeError(RuntimeError):
    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class RankOneError(ValueError):
    pass


class DegeneracyError(ValueError):
    pass


@dataclass(frozen=True)
class ParticleState:
    x: np.ndarray
    y: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64).copy()
        y = np.asarray(self.y, dtype=np.float64).copy()
        if x.ndim != 1 or x.shape != y.shape or x.size == 0:
            raise ValueError("x and y must be nonempty vectors of equal length")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self):
        return self.x.size

    def closest_pair(self):
        """(gap, i, j) for the closest pair of positions, 1-based indices."""
        if self.n < 2:
            return math.inf, None, None
        d = np.abs(self.x[:, None] - self.x[None, :])
        np.fill_diagonal(d, np.inf)
        i, j = np.unravel_index(np.argmin(d), d.shape)
        i, j = sorted((int(i), int(j)))
        return float(d[i, j]), i + 1, j + 1

    def as_vector(self):
        return np.concatenate([self.x, self.y])

    @classmethod
    def from_vector(cls, v, n, t):
        return cls(v[:n], v[n:], t)


@dataclass(frozen=True)
class CMPair:
    X: np.ndarray
    Z: np.ndarray

    @property
    def n(self):
        return self.X.shape[0]


def _require_distinct(s: ParticleState, threshold=0.0):
    gap, i, j = s.closest_pair()
    if gap <= threshold:
        raise CollisionError(
            f"particles {i} and {j} collide at t={s.t} (gap {gap:.3g})", t=s.t, pair=(i, j)
        )


def cm_matrices(s: ParticleState) -> CMPair:
    _require_distinct(s)
    d = s.x[:, None] - s.x[None, :]
    np.fill_diagonal(d, 1.0)
    Z = RANK_SHIFT / d
    np.fill_diagonal(Z, s.y)
    return CMPair(np.diag(s.x), Z)


def rank_defect(p: CMPair, shift: float = RANK_SHIFT) -> float:
    """sigma_2 / sigma_1 of ``[X, Z] + shift * I`` (0 for 1x1 matrices)."""
    M = p.X @ p.Z - p.Z @ p.X + shift * np.eye(p.n)
    if p.n < 2:
        return 0.0
    sv = np.linalg.svd(M, compute_uv=False)
    return float(sv[1] / sv[0]) if sv[0] > 0 else math.inf


def hamiltonian(s: ParticleState) -> float:
    _require_distinct(s)
    pot = 0.0
    for i in range(s.n):
        for j in range(i + 1, s.n):
            pot += 4.0 / (s.x[i] - s.x[j]) ** 2
    return float(np.sum(s.y**2 - s.x) - pot)


def equations_of_motion(s: ParticleState):
    """(dx/dt, dy/dt) from Hamilton's equations."""
    _require_distinct(s)
    v = _accel.cm_rhs(s.as_vector(), s.n)
    return v[: s.n], v[s.n :]


def integrals_of_motion(s: ParticleState) -> np.ndarray:
    """I_j = tr((Z^2 - X)^j) for j = 1..n; I_1 is the Hamiltonian."""
    p = cm_matrices(s)
    L = p.Z @ p.Z - p.X
    out = np.empty(s.n)
    P = np.eye(s.n)
    for j in range(s.n):
        P = P @ L
        out[j] = np.trace(P)
    return out


def involution(p: CMPair, *, tol: float = RANK_TOL) -> CMPair:
    """(X, Z) -> ((Z^T)^2 - X^T, Z^T)."""
    if rank_defect(p) > tol:
        raise RankOneError(f"input pair violates the rank-one condition (defect {rank_defect(p):.3g})")
    Zt = p.Z.T
    return CMPair(Zt @ Zt - p.X.T, Zt.copy())


def dual_coordinates(p: CMPair, *, gap_tol: float = 1e-8):
    """Sorted eigenvalues of the dual X and the diagonal of the dual Z in that eigenbasis."""
    dual = involution(p, tol=math.inf)
    w, V = np.linalg.eig(dual.X)
    if np.max(np.abs(w.imag)) > 1e-9 * max(1.0, np.max(np.abs(w.real))):
        raise DegeneracyError("dual X has non-real eigenvalues")
    w = w.real
    V = V.real
    order = np.argsort(w)
    w, V = w[order], V[:, order]
    if w.size > 1 and np.min(np.diff(w)) < gap_tol:
        raise DegeneracyError(f"dual spectrum is degenerate (gap {np.min(np.diff(w)):.3g})")
    for k in range(V.shape[1]):
        col = V[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-14)
        if nz.size and col[nz[0]] < 0:
            V[:, k] = -col
    ybar = np.diag(np.linalg.solve(V, dual.Z @ V))
    return w, ybar


# ----------------------------------------------------------------------
# trajectories
# ----------------------------------------------------------------------
@dataclass
class Sample:
    state: ParticleState
    energy: float
    integrals: np.ndarray
    rank_defect: float
    xbar: np.ndarray
    ybar: np.ndarray


def _sample(s: ParticleState) -> Sample:
    p = cm_matrices(s)
    try:
        xbar, ybar = dual_coordinates(p)
    except DegeneracyError:
        xbar = ybar = np.full(s.n, np.nan)
    return Sample(s, hamiltonian(s), integrals_of_motion(s), rank_defect(p), xbar, ybar)


@dataclass
class Trajectory:
    n: int
    samples: List[Sample] = field(default_factory=list)
    status: str = "complete"
    message: str = ""

    def append(self, s: Sample):
        if self.samples and not s.state.t > self.samples[-1].state.t:
            raise ValueError("trajectory times must increase strictly")
        self.samples.append(s)

    @property
    def times(self):
        return np.array([s.state.t for s in self.samples])

    def column(self, name):
        get = {
            "x": lambda s: s.state.x,
            "y": lambda s: s.state.y,
            "H": lambda s: s.energy,
            "I": lambda s: s.integrals,
            "rank_defect": lambda s: s.rank_defect,
            "xbar": lambda s: s.xbar,
            "ybar": lambda s: s.ybar,
        }[name]
        return np.array([get(s) for s in self.samples])

    def diagnostics(self) -> Dict[str, float]:
        """Worst-case conservation and linearity measures over the samples.

        Drifts are ``|q(t) - q(0)| / max(|q(0)|, 1)``. The ybar residual is the
        largest deviation from a least-squares line divided by
        ``max(max |ybar_k|, 1)``.
        """
        if not self.samples:
            return {}
        t = self.times
        H = self.column("H")
        I = self.column("I")
        xb = self.column("xbar")
        yb = self.column("ybar")
        out = {
            "samples": len(self.samples),
            "t_end": float(t[-1]),
            "energy_drift": float(np.max(np.abs(H - H[0])) / max(abs(H[0]), 1.0)),
            "max_rank_defect": float(np.max(self.column("rank_defect"))),
        }
        for j in range(self.n):
            out[f"I{j + 1}_drift"] = float(np.max(np.abs(I[:, j] - I[0, j])) / max(abs(I[0, j]), 1.0))
        out["xbar_drift"] = float(np.max(np.abs(xb - xb[0]) / np.maximum(np.abs(xb[0]), 1.0)))
        res = 0.0
        slopes = []
        if len(t) >= 2:
            A = np.vstack([np.ones_like(t), t]).T
            for k in range(self.n):
                coef, *_ = np.linalg.lstsq(A, yb[:, k], rcond=None)
                slopes.append(float(coef[1]))
                dev = np.max(np.abs(A @ coef - yb[:, k]))
                res = max(res, float(dev / max(np.max(np.abs(yb[:, k])), 1.0)))
        out["ybar_fit_residual"] = res
        out["ybar_slopes"] = slopes
        return out

    def to_csv(self, path):
        n = self.n
        header = (
            ["t"]
            + [f"x_{i}" for i in range(1, n + 1)]
            + [f"y_{i}" for i in range(1, n + 1)]
            + ["H"]
            + [f"I_{i}" for i in range(1, n + 1)]
            + ["rank_defect"]
            + [f"xbar_{i}" for i in range(1, n + 1)]
            + [f"ybar_{i}" for i in range(1, n + 1)]
        )
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for s in self.samples:
                row = [s.state.t, *s.state.x, *s.state.y, s.energy, *s.integrals, s.rank_defect, *s.xbar, *s.ybar]
                w.writerow([repr(float(v)) for v in row])


def integrate(
    s0: ParticleState,
    t_end: float,
    *,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    collision_threshold: float = 1e-3,
    h0: Optional[float] = None,
    h_min: float = 1e-14,
    max_steps: int = 1_000_000,
) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) integration, sampling every accepted step.

    Raises ``CollisionError`` (carrying the partial trajectory) once the
    smallest gap falls below ``collision_threshold``.
    """
    n = s0.n
    traj = Trajectory(n)
    gap, i, j = s0.closest_pair()
    if gap < collision_threshold:
        traj.status = "collision"
        traj.message = f"particles {i} and {j} closer than {collision_threshold} at t={s0.t}"
        raise CollisionError(traj.message, t=s0.t, pair=(i, j), trajectory=traj)
    traj.append(_sample(s0))
    if t_end <= s0.t:
        return traj
    v = s0.as_vector()
    t = s0.t
    h = h0 if h0 is not None else min(1e-3, t_end - t)
    steps = 0
    while t < t_end:
        steps += 1
        if steps > max_steps:
            traj.status = "aborted"
            traj.message = f"step limit {max_steps} reached at t={t}"
            raise StepSizeError(traj.message, trajectory=traj)
        h = min(h, t_end - t)
        new, err = _accel.dopri_step(v, n, h)
        scale = atol + rtol * np.maximum(np.abs(v), np.abs(new))
        enorm = float(np.sqrt(np.mean((err / scale) ** 2)))
        if enorm <= 1.0 and np.all(np.isfinite(new)):
            t = t_end if t + h >= t_end else t + h
            v = new
            s = ParticleState.from_vector(v, n, t)
            gap, i, j = s.closest_pair()
            if gap < collision_threshold:
                traj.status = "collision"
                traj.message = f"particles {i} and {j} closer than {collision_threshold} at t={t}"
                raise CollisionError(traj.message, t=t, pair=(i, j), trajectory=traj)
            traj.append(_sample(s))
            fac = 5.0 if enorm == 0 else min(5.0, max(0.2, 0.9 * enorm ** -0.2))
        else:
            fac = 0.2 if not np.isfinite(enorm) else max(0.2, 0.9 * enorm ** -0.25)
        h *= fac
        if h < h_min:
            traj.status = "aborted"
            traj.message = f"step size underflow at t={t}"
            raise StepSizeError(traj.message, trajectory=traj)
    return traj


# Outgoing initial data: the pair force is attractive, so separating
# momenta keep the particles apart over the test window. The n=3 data is
# also chosen so that the dual matrix has a real simple spectrum.
PRESETS = {
    (1, "free"): ([0.0], [0.0]),
    (2, "spread"): ([-1.0, 1.0], [-1.0, 1.0]),
    (3, "spread"): ([-3.0, 0.0, 3.0], [-2.0, 0.0, 2.5]),
}


def preset(n: int, name: str) -> ParticleState:
    key = (n, name)
    if key not in PRESETS:
        names = sorted(k[1] for k in PRESETS if k[0] == n)
        raise KeyError(f"no preset {name!r} for n={n}; available: {names}")
    x, y = PRESETS[key]
    return ParticleState(np.array(x), np.array(y))


def load_initial_state(path) -> ParticleState:
    with open(path) as fh:
        obj = json.load(fh)
    return ParticleState(np.array(obj["x"], dtype=float), np.array(obj["y"], dtype=float), obj.get("t", 0.0))
