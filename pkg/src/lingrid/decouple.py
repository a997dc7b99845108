"""Singular value decomposition of the coupling and the decoupled-channel basis.

The coupling is factored as ``g_jk = sum_l conj(X[l, j]) g_l Y[l, k]``: rows of
``X`` (``n1 x n1``) and ``Y`` (``n2 x n2``) are the singular vectors.  The
amplitudes ``a = X phi_horizontal`` and ``b = Y phi_slanted`` then obey

    i a_l' = sum_l' Va[l, l'] a_l' + g_l b_l
    i b_l' = sum_l' Vb[l, l'] b_l' + beta t b_l + g_l a_l

with ``Va = X diag(V_j) X^H`` and ``Vb = Y diag(V_k) Y^H``.  Dropping the
off-diagonal parts of ``Va`` and ``Vb`` leaves independent two-state crossings.

Gauge: each row is fixed so its first nonzero component is real and
positive (the ``Y`` row of a coupled channel takes the phase of its ``X``
partner, keeping ``g_l`` real).  Rows with ``g_l = 0`` are further rotated so
the null-space blocks of ``Va`` and ``Vb`` are diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import GridModel

RANK_TOL = 1e-12
# components below this (rows have unit norm) do not set the row phase
_PHASE_TOL = 1e-8


class DecouplingError(RuntimeError):
    pass


@dataclass(frozen=True)
class DecoupledSystem:
    X: np.ndarray
    Y: np.ndarray
    g: np.ndarray  # length min(n1, n2), descending
    n: int
    Va: np.ndarray
    Vb: np.ndarray
    rank_tol: float = RANK_TOL

    @property
    def n1(self) -> int:
        return self.X.shape[0]

    @property
    def n2(self) -> int:
        return self.Y.shape[0]

    def g_padded(self, size: int | None = None) -> np.ndarray:
        """Singular values with zeros appended up to ``size`` (default max(n1, n2))."""
        size = max(self.n1, self.n2) if size is None else size
        out = np.zeros(size)
        k = min(size, len(self.g))
        out[:k] = self.g[:k]
        out[self.n:] = 0.0
        return out

    def reconstruct(self) -> np.ndarray:
        """``X^H diag(g) Y`` restricted to the ``n1 x n2`` coupling shape."""
        k = len(self.g)
        return self.X[:k].conj().T @ (self.g[:, None] * self.Y[:k])


def _row_phase(row: np.ndarray) -> complex:
    """Unit factor that makes the first significant entry of ``row`` real positive."""
    big = np.flatnonzero(np.abs(row) > _PHASE_TOL)
    if big.size == 0:
        return 1.0
    v = row[big[0]]
    return abs(v) / v


def _canonical_phases(X: np.ndarray, Y: np.ndarray, n: int):
    X = X.copy()
    Y = Y.copy()
    for l in range(X.shape[0]):
        ph = _row_phase(X[l])
        X[l] *= ph
        if l < n:
            Y[l] *= ph
    for l in range(n, Y.shape[0]):
        Y[l] *= _row_phase(Y[l])
    return X, Y


def effective_rank(g: np.ndarray, rank_tol: float = RANK_TOL) -> int:
    gmax = float(np.max(g, initial=0.0))
    if gmax == 0.0:
        return 0
    return int(np.count_nonzero(g > rank_tol * gmax))


def svd_couplings(coupling, rank_tol: float = RANK_TOL):
    """Return ``(X, Y, g, n)`` with ``coupling = X^H diag(g) Y``.

    ``g`` has length ``min(n1, n2)`` in descending order; ``n`` counts the
    singular values above ``rank_tol * max(g)``.
    """
    G = np.asarray(coupling, dtype=complex)
    if G.ndim != 2:
        raise ValueError(f"coupling must be a matrix, got shape {G.shape}")
    if not np.all(np.isfinite(G)):
        raise ValueError("coupling has non-finite entries")
    if not rank_tol > 0:
        raise ValueError("rank_tol must be positive")
    try:
        U, s, Vh = np.linalg.svd(G, full_matrices=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - tiny matrices
        raise DecouplingError(f"SVD failed: {exc}") from exc
    n = effective_rank(s, rank_tol)
    X, Y = _canonical_phases(U.conj().T, Vh, n)
    return X, Y, s, n


def _completion(v: np.ndarray) -> np.ndarray:
    """Unitary matrix whose first row is the unit vector ``v``."""
    Q, _ = np.linalg.qr(np.column_stack([v.conj(), np.eye(len(v))]))
    M = Q.conj().T
    M[0] = v
    return M


def separable_svd(xi, eta):
    """SVD of the rank-one coupling ``g_jk = conj(xi_j) eta_k``.

    The first rows are ``xi/|xi|`` and ``eta/|eta|`` and ``g_1 = |xi| |eta|``;
    the remaining rows are an orthonormal completion.
    """
    xi = np.asarray(xi, dtype=complex).ravel()
    eta = np.asarray(eta, dtype=complex).ravel()
    nx, ne = np.linalg.norm(xi), np.linalg.norm(eta)
    if nx == 0 or ne == 0:
        raise ValueError("separable coupling needs nonzero xi and eta")
    X = _completion(xi / nx)
    Y = _completion(eta / ne)
    g = np.zeros(min(len(xi), len(eta)))
    g[0] = nx * ne
    X, Y = _canonical_phases(X, Y, 1)
    return X, Y, g, 1


def _rotate_null_block(M: np.ndarray, V: np.ndarray, n: int) -> np.ndarray:
    """Rotate rows ``n:`` of ``M`` so that ``M diag(V) M^H`` is diagonal there."""
    if M.shape[0] - n < 2:
        return M
    M = M.copy()
    block = M[n:] @ (V[:, None] * M[n:].conj().T)
    _, Q = np.linalg.eigh(0.5 * (block + block.conj().T))  # ascending eigenvalues
    M[n:] = Q.conj().T @ M[n:]
    for l in range(n, M.shape[0]):
        M[l] *= _row_phase(M[l])
    return M


def null_space_gauge(grid: GridModel, X: np.ndarray, Y: np.ndarray, n: int):
    """Fix the free rotation of the uncoupled rows (``l >= n``) of ``X`` and ``Y``."""
    return (_rotate_null_block(X, grid.v_horizontal, n),
            _rotate_null_block(Y, grid.v_slanted, n))


def _transform(M: np.ndarray, V: np.ndarray) -> np.ndarray:
    T = M @ (V[:, None] * M.conj().T)
    return 0.5 * (T + T.conj().T)


def transformed_potentials(grid: GridModel, X: np.ndarray, Y: np.ndarray, n: int):
    """``(Va, Vb)`` in the decoupled basis after null-space gauge fixing."""
    if X.shape != (grid.n1, grid.n1) or Y.shape != (grid.n2, grid.n2):
        raise ValueError(f"X, Y shapes {X.shape}, {Y.shape} do not fit a "
                         f"{grid.n1}+{grid.n2} grid")
    X, Y = null_space_gauge(grid, X, Y, n)
    return _transform(X, grid.v_horizontal), _transform(Y, grid.v_slanted)


def decouple(grid: GridModel, rank_tol: float = RANK_TOL) -> DecoupledSystem:
    X, Y, g, n = svd_couplings(grid.coupling, rank_tol)
    X, Y = null_space_gauge(grid, X, Y, n)
    return DecoupledSystem(X=X, Y=Y, g=g, n=n,
                           Va=_transform(X, grid.v_horizontal),
                           Vb=_transform(Y, grid.v_slanted), rank_tol=rank_tol)


def _offdiag_sq(Vt: np.ndarray, V: np.ndarray) -> float:
    direct = float(np.sum(np.abs(Vt) ** 2) - np.sum(np.abs(np.diag(Vt)) ** 2))
    via_trace = float(np.sum(V ** 2) - np.sum(np.diag(Vt).real ** 2))
    if abs(direct - via_trace) > 1e-10 * max(1.0, float(np.sum(V ** 2))):
        raise DecouplingError(
            f"off-diagonal sums disagree ({direct:.3e} vs {via_trace:.3e}); "
            "transformation is not unitary")
    return max(direct, 0.0)


def offdiag_bound(grid: GridModel, Va: np.ndarray, Vb: np.ndarray):
    """``(lhs1, rhs1, lhs2, rhs2)``: sums of squared off-diagonal potentials and their bounds.

    ``lhs = sum_{l != l'} |V_ll'|^2`` never exceeds ``n ΔV^2 / 4`` for a set of
    ``n`` levels spread over ``ΔV``.
    """
    out = []
    for Vt, V in ((Va, grid.v_horizontal), (Vb, grid.v_slanted)):
        lhs = _offdiag_sq(Vt, V)
        spread = float(V.max() - V.min())
        rhs = len(V) * spread ** 2 / 4
        if lhs > rhs * (1 + 1e-10) + 1e-14:
            raise DecouplingError(f"off-diagonal sum {lhs:.6e} exceeds bound {rhs:.6e}")
        out += [lhs, rhs]
    return tuple(out)


def decoupled_amplitudes(X: np.ndarray, Y: np.ndarray, phi):
    """Map a state in the original basis to decoupled amplitudes ``(a, b)``."""
    phi = np.asarray(phi, dtype=complex)
    n1 = X.shape[0]
    if phi.shape[0] != n1 + Y.shape[0]:
        raise ValueError("state length does not match X, Y")
    return X @ phi[:n1], Y @ phi[n1:]


def gap_ratio(grid: GridModel, dec: DecoupledSystem) -> float:
    """``|ΔV1 / (Va[1,1] - Va[0,0])|``; infinite when the two diagonals coincide."""
    if dec.n1 < 2:
        raise ValueError("gap ratio needs at least two horizontal states")
    spread = float(grid.v_horizontal.max() - grid.v_horizontal.min())
    gap = float(dec.Va[1, 1].real - dec.Va[0, 0].real)
    if abs(gap) <= 1e-12 * max(spread, 1e-300):
        return float("inf")
    return abs(spread / gap)
