import numpy as np
import pytest
from scipy.integrate import solve_ivp


def hamiltonian(v_h, v_s, slope_h, slope_s, coupling):
    """H(t) for two sets of linear potentials with cross-set couplings."""
    n1, n2 = len(v_h), len(v_s)
    G = np.asarray(coupling, dtype=complex)

    def H(t):
        h = np.zeros((n1 + n2, n1 + n2), dtype=complex)
        h[:n1, n1:] = G
        h[n1:, :n1] = G.conj().T
        h[np.arange(n1), np.arange(n1)] = np.asarray(v_h) + slope_h * t
        h[n1 + np.arange(n2), n1 + np.arange(n2)] = np.asarray(v_s) + slope_s * t
        return h
    return H


def ivp_smatrix(H, n, t0, t1, rtol=1e-11, atol=1e-13):
    """Columns are the solutions of i phi' = H(t) phi started from basis states."""
    def rhs(t, y):
        return -1j * (H(t) @ y.reshape(n, n)).ravel()
    sol = solve_ivp(rhs, (t0, t1), np.eye(n, dtype=complex).ravel(), method="DOP853",
                    rtol=rtol, atol=atol)
    assert sol.success
    return sol.y[:, -1].reshape(n, n)


def grid_ivp_smatrix(grid, **kw):
    H = hamiltonian(grid.v_horizontal, grid.v_slanted, 0.0, grid.beta, grid.coupling)
    return ivp_smatrix(H, grid.n_states, -grid.t_minus, grid.t_plus, **kw)


@pytest.fixture
def ivp():
    return grid_ivp_smatrix


# one line per acceptance criterion, printed after the test session
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
