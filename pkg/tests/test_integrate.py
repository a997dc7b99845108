import math

import numpy as np
import pytest

from lingrid.integrate import (NormDriftError, PropagationSettings, numeric_smatrix, propagate,
                               propagate_between, unitarity_defect)
from lingrid.model import GridModel, TransitionMatrix, section_v_model
from lingrid.sweep import PRESET_REL_TOL
from lingrid.qda import ChannelParams, two_state_smatrix


def free_phases(grid):
    T = grid.duration
    ph = grid.potentials * T
    ph[grid.n1:] += 0.5 * grid.beta * (grid.t_plus ** 2 - grid.t_minus ** 2)
    return np.exp(-1j * ph)


@pytest.mark.parametrize("picture", ["interaction", "schrodinger"])
def test_uncoupled_phases(picture):
    grid = GridModel(n1=2, n2=2, v_horizontal=[-0.3, 0.1], v_slanted=[0.0, 0.25], beta=0.7,
                     coupling=np.zeros((2, 2)), t_minus=15.0, t_plus=22.0)
    S = numeric_smatrix(grid, PropagationSettings(rel_tol=1e-12, picture=picture)).matrix
    assert np.abs(S - np.diag(free_phases(grid))).max() < 1e-10


def test_scipy_oracle(ivp):
    grid = section_v_model(0.15, 1.0, m=1, t=20)
    S = numeric_smatrix(grid, PropagationSettings(rel_tol=1e-11)).matrix
    assert np.abs(S - ivp(grid)).max() < 1e-7


def test_two_state_against_closed_form():
    grid = GridModel(n1=1, n2=1, v_horizontal=[0.0], v_slanted=[0.0], beta=1.0,
                     coupling=[[1.0]], t_minus=100.0, t_plus=100.0)
    S = numeric_smatrix(grid).matrix
    ch = ChannelParams.make(0, 1.0, 0.0, 0.0, 1.0)
    A = two_state_smatrix(ch, 1.0, 100.0, 100.0, method="analytic").matrix
    assert np.abs(S - A).max() < 1e-6


@pytest.mark.parametrize("m,g0,dV,t", [(0, 5.0, 0.0, 100), (0, 5.0, 0.3, 50), (1, 0.5, 2.5e-3, 100),
                                       (4, 5.0, 0.8, 50), ("equal", 5.0, 0.5, 50)])
def test_norm_conservation(m, g0, dV, t):
    grid = section_v_model(dV, g0, m=m, t=t)
    phi0 = np.array([0.6, 0.0, 0.8j, 0.0])
    res = propagate(grid, phi0, PropagationSettings(rel_tol=PRESET_REL_TOL))
    assert abs(np.linalg.norm(res.phi) - 1.0) <= 1e-9
    assert res.norm_drift <= 1e-9


def test_default_defect():
    grid = section_v_model(0.2, 2.0, m=3, t=50)
    S = numeric_smatrix(grid)
    assert S.method == "numeric"
    assert S.info["unitarity_defect"] <= 1e-8
    assert S.info["unitarity_defect"] <= S.info["defect_bound"]


def test_pictures_agree():
    grid = section_v_model(0.1, 1.0, m=2, t=20)
    s_int = PropagationSettings(rel_tol=1e-10)
    s_sch = PropagationSettings(rel_tol=1e-10, picture="schrodinger")
    a = numeric_smatrix(grid, s_int).matrix
    b = numeric_smatrix(grid, s_sch).matrix
    assert np.abs(a - b).max() <= 5 * 1e-10 * grid.duration


def test_halving_tolerance():
    grid = section_v_model(0.05, 2.0, m=1, t=40)
    s = PropagationSettings(rel_tol=1e-8)
    S1, S2 = numeric_smatrix(grid, s), numeric_smatrix(grid, s.halved())
    dP = np.abs(np.abs(S1.matrix) ** 2 - np.abs(S2.matrix) ** 2).max()
    assert dP < S1.est_error


def test_time_reversal():
    grid = section_v_model(0.05, 1.0, m=3, t=30)
    s = PropagationSettings(rel_tol=1e-11)
    phi0 = np.array([0.5, 0.5j, -0.5, 0.5])
    fwd = propagate_between(grid, phi0, -30.0, 30.0, s)
    back = propagate_between(grid, fwd.phi, 30.0, -30.0, s)
    assert np.abs(back.phi - phi0).max() <= 10 * 1e-11 * grid.duration


def test_norm_drift_aborts():
    grid = section_v_model(0.05, 3.0, m=3, t=50)
    with pytest.raises(NormDriftError):
        propagate(grid, np.array([1, 0, 0, 0]), PropagationSettings(rel_tol=1e-6,
                                                                   drift_factor=1e-6))


def test_bad_inputs():
    grid = section_v_model(0.05, 1.0)
    with pytest.raises(ValueError):
        propagate(grid, np.zeros(4))
    with pytest.raises(ValueError):
        propagate(grid, np.ones(3))
    for kw in ({"rel_tol": 1e-14}, {"rel_tol": 1e-5}, {"abs_tol": 0}, {"picture": "heisenberg"}):
        with pytest.raises(ValueError):
            PropagationSettings(**kw)


def test_unitarity_defect():
    assert unitarity_defect(np.eye(3)) == 0
    U = np.eye(3, dtype=complex)
    U[:, 1] = 0
    assert unitarity_defect(U) >= 1
    tm = TransitionMatrix(matrix=np.eye(2), method="numeric", labels=(1, 2))
    assert unitarity_defect(tm) == 0
    with pytest.raises(ValueError):
        unitarity_defect(np.ones((2, 3)))


def test_reversed_interval_reflects_lz():
    # a single crossing traversed in either time direction has the same LZ probability
    grid = GridModel(n1=1, n2=1, v_horizontal=[0.0], v_slanted=[0.0], beta=1.0,
                     coupling=[[0.5]], t_minus=60.0, t_plus=60.0)
    fwd = propagate_between(grid, np.array([1, 0]), -60.0, 60.0).phi
    bwd = propagate_between(grid, np.array([1, 0]), 60.0, -60.0).phi
    assert abs(abs(fwd[0]) ** 2 - abs(bwd[0]) ** 2) < 1e-8
    assert abs(fwd[0]) ** 2 == pytest.approx(math.exp(-2 * math.pi * 0.25), abs=0.02)
