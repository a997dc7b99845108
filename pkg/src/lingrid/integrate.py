"""Direct numerical propagation of the coupled equations of a grid.

The reference solution against which the decoupled-channel approximation is
checked.  Integration uses an adaptive DOP853 pair from ``lingrid._core``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _core
from .model import GridModel, TransitionMatrix

PICTURES = ("interaction", "schrodinger")


class PropagationError(RuntimeError):
    pass


class NormDriftError(PropagationError):
    def __init__(self, drift, limit):
        super().__init__(f"norm drift {drift:.3e} exceeds {limit:.3e}; tighten rel_tol")
        self.drift = drift
        self.limit = limit


@dataclass(frozen=True)
class PropagationSettings:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    picture: str = "interaction"
    backend: str = "auto"
    max_steps: int = 50_000_000
    # abort when the norm drifts by more than this multiple of rel_tol
    drift_factor: float = 100.0

    def __post_init__(self):
        if not 1e-13 <= self.rel_tol <= 1e-6:
            raise ValueError(f"rel_tol must lie in [1e-13, 1e-6], got {self.rel_tol}")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if self.picture not in PICTURES:
            raise ValueError(f"picture must be one of {PICTURES}")

    def halved(self) -> "PropagationSettings":
        return PropagationSettings(
            rel_tol=max(self.rel_tol / 2, 1e-13), abs_tol=self.abs_tol / 2,
            max_step=self.max_step, picture=self.picture, backend=self.backend,
            max_steps=self.max_steps, drift_factor=self.drift_factor)


@dataclass(frozen=True)
class PropagationResult:
    phi: np.ndarray
    t_start: float
    t_end: float
    norm_drift: float
    n_steps: int
    n_rejected: int
    n_rhs: int


def _phases(grid: GridModel, t: float) -> np.ndarray:
    """Diagonal of the free propagator removed in the interaction picture."""
    v = grid.potentials
    ph = v * t
    ph[grid.n1:] += 0.5 * grid.beta * t * t
    return np.exp(-1j * ph)


def _initial_step(grid: GridModel, settings: PropagationSettings, t0, t1) -> float:
    rate = float(np.abs(grid.coupling).sum(axis=1).max(initial=0.0))
    if settings.picture == "schrodinger":
        rate += float(np.abs(grid.potentials).max()) + abs(grid.beta) * max(abs(t0), abs(t1))
    return 0.01 / max(rate, 1.0)


def propagate_between(grid: GridModel, phi0, t_start: float, t_end: float,
                      settings: PropagationSettings | None = None) -> PropagationResult:
    """Solve the grid equations from ``t_start`` to ``t_end`` (either direction).

    ``phi0`` is a state vector of length ``n1 + n2`` in canonical order, or an
    ``(n1 + n2, M)`` block of columns propagated together.
    """
    settings = settings or PropagationSettings()
    phi0 = np.asarray(phi0, dtype=complex)
    vector = phi0.ndim == 1
    block = phi0[:, None] if vector else phi0
    if block.shape[0] != grid.n_states:
        raise ValueError(f"state has {block.shape[0]} components, grid has {grid.n_states}")
    norms0 = np.linalg.norm(block, axis=0)
    if not np.all(norms0 > 0):
        raise ValueError("initial state must have nonzero norm")

    interaction = settings.picture == "interaction"
    y0 = block / _phases(grid, t_start)[:, None] if interaction else block
    kernel = _core.get_kernel(settings.backend)
    y, nacc, nrej, nfev, status = kernel.dop853(
        np.array(y0, order="C"), float(t_start), float(t_end), np.array(grid.potentials),
        float(grid.beta), grid.n1, np.array(grid.coupling, order="C"), interaction,
        settings.rel_tol, settings.abs_tol, settings.max_step,
        _initial_step(grid, settings, t_start, t_end), settings.max_steps)
    if status == 1:
        raise PropagationError(f"step size underflow near t in [{t_start}, {t_end}]")
    if status == 2:
        raise PropagationError(f"exceeded {settings.max_steps} steps")
    y = np.asarray(y)
    phi = y * _phases(grid, t_end)[:, None] if interaction else y

    drift = float(np.max(np.abs(np.linalg.norm(phi, axis=0) - norms0) / norms0))
    limit = settings.drift_factor * settings.rel_tol
    if drift > limit:
        raise NormDriftError(drift, limit)
    return PropagationResult(phi=phi[:, 0] if vector else phi, t_start=float(t_start),
                             t_end=float(t_end), norm_drift=drift, n_steps=int(nacc),
                             n_rejected=int(nrej), n_rhs=int(nfev))


def propagate(grid: GridModel, phi0, settings: PropagationSettings | None = None) -> PropagationResult:
    """Propagate ``phi0`` from ``-t_minus`` to ``t_plus``."""
    return propagate_between(grid, phi0, -grid.t_minus, grid.t_plus, settings)


def unitarity_defect(S) -> float:
    """``max |S^dagger S - I|`` for a square matrix or TransitionMatrix."""
    m = S.matrix if isinstance(S, TransitionMatrix) else np.asarray(S, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"need a square matrix, got shape {m.shape}")
    return float(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max())


def numeric_smatrix(grid: GridModel, settings: PropagationSettings | None = None) -> TransitionMatrix:
    """Transition matrix from propagating every basis state across the interval."""
    settings = settings or PropagationSettings()
    res = propagate(grid, np.eye(grid.n_states, dtype=complex), settings)
    defect = unitarity_defect(res.phi)
    h_norm = (float(np.abs(grid.potentials).max()) + float(np.linalg.norm(grid.coupling, 2))
              + abs(grid.beta) * max(grid.t_minus, grid.t_plus))
    return TransitionMatrix(
        matrix=res.phi, method="numeric", labels=grid.labels,
        fingerprint=grid.fingerprint(), est_error=max(defect, settings.rel_tol),
        info={"unitarity_defect": defect, "steps": res.n_steps,
              "rejected": res.n_rejected, "rhs_evaluations": res.n_rhs,
              "defect_bound": 10 * settings.rel_tol * grid.duration * h_norm,
              "picture": settings.picture},
    )
