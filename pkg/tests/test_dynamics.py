import json

import numpy as np
import pytest

from bispectral.dynamics import (
    RANK_SHIFT,
    CMPair,
    CollisionError,
    DegeneracyError,
    ParticleState,
    RankOneError,
    cm_matrices,
    dual_coordinates,
    equations_of_motion,
    hamiltonian,
    integrals_of_motion,
    integrate,
    involution,
    load_initial_state,
    preset,
    rank_defect,
)


def random_state(rng, n):
    x = np.sort(rng.uniform(-4, 4, n))
    while n > 1 and np.min(np.diff(x)) < 0.3:
        x = np.sort(rng.uniform(-4, 4, n))
    return ParticleState(x, rng.normal(size=n))


def test_single_particle_closed_form():
    traj = integrate(preset(1, "free"), 2.0)
    last = traj.samples[-1].state
    # x'' = 2, y' = 1 from rest at the origin
    assert last.x[0] == pytest.approx(4.0, abs=1e-12)
    assert last.y[0] == pytest.approx(2.0, abs=1e-12)
    d = traj.diagnostics()
    assert d["xbar_drift"] < 1e-12
    assert d["ybar_slopes"][0] == pytest.approx(1.0, abs=1e-12)


def test_forces_are_the_gradient_of_the_hamiltonian():
    rng = np.random.default_rng(0)
    s = random_state(rng, 3)
    dx, dy = equations_of_motion(s)
    eps = 1e-6
    for i in range(3):
        e = np.zeros(3)
        e[i] = eps
        dHdx = (hamiltonian(ParticleState(s.x + e, s.y)) - hamiltonian(ParticleState(s.x - e, s.y))) / (2 * eps)
        dHdy = (hamiltonian(ParticleState(s.x, s.y + e)) - hamiltonian(ParticleState(s.x, s.y - e))) / (2 * eps)
        assert dx[i] == pytest.approx(dHdy, rel=1e-7)
        assert dy[i] == pytest.approx(-dHdx, rel=1e-7)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_hamiltonian_is_the_trace(n):
    rng = np.random.default_rng(n)
    for _ in range(20):
        s = random_state(rng, n)
        p = cm_matrices(s)
        tr = np.trace(p.Z @ p.Z - p.X)
        assert tr == pytest.approx(hamiltonian(s), rel=1e-12, abs=1e-12)
        assert integrals_of_motion(s)[0] == pytest.approx(tr, rel=1e-12)


def test_rank_one_needs_the_shift():
    s = ParticleState([-1.0, 0.5, 2.0], [0.1, 0.2, -0.3])
    p = cm_matrices(s)
    assert rank_defect(p) < 1e-15
    # with the identity shift the commutator is not rank one
    assert rank_defect(p, shift=1.0) > 0.1
    assert RANK_SHIFT == pytest.approx(2**0.5)


def test_involution_round_trip():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 5))
        p = cm_matrices(random_state(rng, n))
        back = involution(involution(p))
        worst = max(worst, np.max(np.abs(back.X - p.X)) / max(1.0, np.max(np.abs(p.X))))
        worst = max(worst, np.max(np.abs(back.Z - p.Z)) / max(1.0, np.max(np.abs(p.Z))))
        q = involution(p)
        assert rank_defect(q) < 1e-10
    assert worst < 1e-12


def test_involution_rejects_off_constraint_pairs():
    with pytest.raises(RankOneError):
        involution(CMPair(np.diag([0.0, 1.0]), np.array([[0.0, 1.0], [2.0, 0.0]])))


def test_dual_coordinates_for_one_particle():
    s = ParticleState([0.7], [1.5])
    xbar, ybar = dual_coordinates(cm_matrices(s))
    assert xbar[0] == pytest.approx(1.5**2 - 0.7)
    assert ybar[0] == pytest.approx(1.5)


def test_complex_dual_spectrum():
    # equal momenta: Z^2 - X has off-diagonal entries +-2 sqrt(2) and a
    # diagonal gap of 1, so its eigenvalues are complex
    s = ParticleState([-0.5, 0.5], [1.0, 1.0])
    with pytest.raises(DegeneracyError):
        dual_coordinates(cm_matrices(s))


def test_collision_aborts_with_partial_trajectory():
    s = ParticleState([-0.2, 0.2], [0.5, -0.5])
    with pytest.raises(CollisionError) as info:
        integrate(s, 5.0)
    err = info.value
    assert err.trajectory.samples
    assert 0 < err.t < 5
    assert err.pair == (1, 2)


def test_csv_layout(tmp_path):
    traj = integrate(preset(2, "spread"), 0.5)
    path = tmp_path / "t.csv"
    traj.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x_1,x_2,y_1,y_2,H,I_1,I_2,rank_defect,xbar_1,xbar_2,ybar_1,ybar_2"
    row = [float(v) for v in lines[1].split(",")]
    assert row[0] == 0.0 and row[1:3] == [-1.0, 1.0]


def test_initial_state_file(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"x": [0.0, 2.0], "y": [1.0, -1.0]}))
    s = load_initial_state(path)
    assert s.n == 2 and list(s.y) == [1.0, -1.0]
    with pytest.raises(KeyError):
        preset(2, "nope")


def test_hamiltonian_hand_values():
    assert hamiltonian(ParticleState([2.0], [3.0])) == 7.0
    assert hamiltonian(ParticleState([0.0, 1.0], [0.0, 0.0])) == -5.0


def test_pair_forces_are_opposite():
    _, dy = equations_of_motion(ParticleState([0.3, 1.7], [0.0, 0.0]))
    # the external force contributes +1 to each particle
    assert (dy[0] - 1.0) == pytest.approx(-(dy[1] - 1.0), rel=1e-15)


def test_two_particle_energy_drift():
    d = integrate(preset(2, "spread"), 5.0).diagnostics()
    assert d["energy_drift"] < 1e-8 and d["I2_drift"] < 1e-7
