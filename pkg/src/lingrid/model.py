"""Truncated linear potential grids.

A grid is a set of ``n1`` horizontal potentials ``V_j`` crossed by ``n2``
parallel slanted potentials ``V_{n1+k} + beta*t``, coupled only across the
two sets by the complex matrix ``g_jk`` and restricted to ``[-t_minus, t_plus]``
(units with hbar = 1).  States are stored in canonical order (each set sorted
ascending); ``labels`` keeps the caller's 1-based numbering so results can be
reported in the user's labels.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np


class GridError(ValueError):
    """Invalid grid description."""


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GridModel:
    n1: int
    n2: int
    v_horizontal: np.ndarray
    v_slanted: np.ndarray
    beta: float
    coupling: np.ndarray
    t_minus: float
    t_plus: float
    labels: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "v_horizontal", _frozen(self.v_horizontal, float))
        object.__setattr__(self, "v_slanted", _frozen(self.v_slanted, float))
        object.__setattr__(self, "coupling", _frozen(self.coupling, complex))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(1, self.n1 + self.n2 + 1)))
        _validate(self)

    @property
    def n_states(self) -> int:
        return self.n1 + self.n2

    @property
    def potentials(self) -> np.ndarray:
        """Time-independent parts of all potentials, canonical order."""
        return np.concatenate((self.v_horizontal, self.v_slanted))

    @property
    def duration(self) -> float:
        return self.t_minus + self.t_plus

    def crossing_times(self) -> np.ndarray:
        """``t_jk = (V_j - V_{n1+k}) / beta`` as an ``(n1, n2)`` array."""
        return (self.v_horizontal[:, None] - self.v_slanted[None, :]) / self.beta

    def canonical_index(self, label: int) -> int:
        """0-based canonical position of the user's 1-based state ``label``."""
        try:
            return self.labels.index(int(label))
        except ValueError:
            raise GridError(f"state label {label} not in 1..{self.n_states}") from None

    def in_set(self, label: int) -> int:
        """1 for a horizontal state, 2 for a slanted one."""
        return 1 if self.canonical_index(label) < self.n1 else 2

    def potential(self, label: int) -> float:
        return float(self.potentials[self.canonical_index(label)])

    def replace(self, **changes) -> "GridModel":
        fields = dict(
            n1=self.n1, n2=self.n2, v_horizontal=self.v_horizontal,
            v_slanted=self.v_slanted, beta=self.beta, coupling=self.coupling,
            t_minus=self.t_minus, t_plus=self.t_plus, labels=self.labels,
        )
        fields.update(changes)
        return GridModel(**fields)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for a in (self.v_horizontal, self.v_slanted, self.coupling):
            h.update(np.ascontiguousarray(a).tobytes())
        h.update(repr((self.n1, self.n2, float(self.beta), float(self.t_minus),
                       float(self.t_plus), self.labels)).encode())
        return h.hexdigest()[:16]


def _validate(grid: GridModel):
    if grid.n1 < 1 or grid.n2 < 1:
        raise GridError(f"need n1 >= 1 and n2 >= 1, got n1={grid.n1}, n2={grid.n2}")
    if grid.v_horizontal.shape != (grid.n1,) or grid.v_slanted.shape != (grid.n2,):
        raise GridError(
            f"dimension mismatch: {grid.v_horizontal.size} horizontal and "
            f"{grid.v_slanted.size} slanted energies for n1={grid.n1}, n2={grid.n2}")
    if grid.coupling.shape != (grid.n1, grid.n2):
        raise GridError(
            f"dimension mismatch: coupling is {grid.coupling.shape}, "
            f"expected ({grid.n1}, {grid.n2})")
    values = np.concatenate((grid.v_horizontal, grid.v_slanted,
                             grid.coupling.real.ravel(), grid.coupling.imag.ravel(),
                             [grid.beta, grid.t_minus, grid.t_plus]))
    if not np.all(np.isfinite(values)):
        raise GridError("non-finite entries in grid description")
    if grid.beta == 0:
        raise GridError("zero slope: beta must be nonzero")
    if not grid.t_minus + grid.t_plus > 0:
        raise GridError("empty time interval: need t_minus + t_plus > 0")
    if sorted(grid.labels) != list(range(1, grid.n_states + 1)):
        raise GridError(f"labels must be a permutation of 1..{grid.n_states}")
    if np.any(np.diff(grid.v_horizontal) < 0) or np.any(np.diff(grid.v_slanted) < 0):
        raise GridError("potentials must be in canonical ascending order; use build_grid")


@dataclass(frozen=True)
class TransitionLabel:
    """Transition ``from_state -> to_state`` in the user's 1-based labels."""

    from_state: int
    to_state: int

    def check(self, n_states: int):
        for s in (self.from_state, self.to_state):
            if not 1 <= s <= n_states:
                raise GridError(f"state {s} out of range 1..{n_states}")

    def __str__(self):
        return f"{self.from_state}to{self.to_state}"


@dataclass(frozen=True)
class TransitionMatrix:
    """Transition amplitudes ``S[to, from]`` between ``-t_minus`` and ``t_plus``.

    ``matrix`` is in canonical state order; ``labels[i]`` is the user label of
    canonical state ``i``.
    """

    matrix: np.ndarray
    method: str
    labels: tuple
    fingerprint: str = ""
    est_error: float = 0.0
    info: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix, complex))

    def amplitude(self, from_state: int, to_state: int) -> complex:
        i = self.labels.index(int(to_state))
        j = self.labels.index(int(from_state))
        return complex(self.matrix[i, j])

    def probability(self, label: TransitionLabel) -> float:
        return abs(self.amplitude(label.from_state, label.to_state)) ** 2

    def in_user_order(self) -> np.ndarray:
        """Matrix reindexed so row/column ``i`` is user state ``i + 1``."""
        order = [self.labels.index(s) for s in range(1, len(self.labels) + 1)]
        return self.matrix[np.ix_(order, order)]


def _complex_matrix(raw) -> np.ndarray:
    """Parse a coupling matrix given as complex numbers or ``[re, im]`` pairs."""
    if isinstance(raw, np.ndarray) and np.iscomplexobj(raw):
        out = raw.astype(complex)
    else:
        try:
            a = np.asarray(raw, dtype=float)
        except (TypeError, ValueError):
            try:
                out = np.asarray(raw, dtype=complex)
            except (TypeError, ValueError):
                raise GridError(f"cannot read coupling matrix from {raw!r}") from None
        else:
            out = a[..., 0] + 1j * a[..., 1] if a.ndim == 3 and a.shape[-1] == 2 else a
    if out.ndim != 2:
        raise GridError(f"coupling must be a 2-d matrix, got shape {np.shape(out)}")
    return np.asarray(out, dtype=complex)


def eq22_coupling(m: int, g0: float = 1.0) -> np.ndarray:
    """The 2x2 test coupling ``g0 [[1/1.2, 1], [1, 1.2 exp(i m pi/4)]]``."""
    return g0 * np.array([[1 / 1.2, 1.0], [1.0, 1.2 * np.exp(1j * m * np.pi / 4)]])


def equal_coupling(n1: int, n2: int, g0: float = 1.0) -> np.ndarray:
    return np.full((n1, n2), g0, dtype=complex)


def gap_levels(n: int, gap: float) -> np.ndarray:
    """``n`` equally spaced energies spanning ``gap``, centered on zero."""
    if n == 1:
        return np.zeros(1)
    return np.linspace(-gap / 2, gap / 2, n)


def _coupling_from_config(spec, n1, n2) -> np.ndarray:
    if isinstance(spec, Mapping):
        g0 = float(spec.get("g0", 1.0))
        preset = spec.get("preset")
        if preset is None:
            if "matrix" not in spec:
                raise GridError("coupling needs either 'matrix' or 'preset'")
            return g0 * _complex_matrix(spec["matrix"])
        if "matrix" in spec:
            raise GridError("coupling takes 'matrix' or 'preset', not both")
        if preset == "eq22":
            if (n1, n2) != (2, 2):
                raise GridError("coupling preset 'eq22' requires n1 = n2 = 2")
            return eq22_coupling(int(spec.get("m", 0)), g0)
        if preset == "equal":
            return equal_coupling(n1, n2, g0)
        raise GridError(f"unknown coupling preset {preset!r}")
    return _complex_matrix(spec)


def build_grid(config: Mapping, require_interior_crossings: bool = False) -> GridModel:
    """Validate a scenario ``grid`` section and return the canonical model.

    Keys: ``v_horizontal``/``v_slanted`` (or ``gap`` with ``n1``/``n2``),
    ``beta`` (default 1), ``coupling``, and ``t_minus``/``t_plus`` (or ``t``
    for a symmetric interval).  ``coupling`` is a matrix of complex numbers or
    ``[re, im]`` pairs, or a mapping ``{matrix=..., g0=...}`` /
    ``{preset="eq22", m=..., g0=...}`` / ``{preset="equal", g0=...}``.
    The returned grid's ``labels`` map canonical positions to the input order.
    """
    cfg = dict(config)
    if "gap" in cfg:
        n1 = int(cfg.get("n1", 2))
        n2 = int(cfg.get("n2", 2))
        vh = gap_levels(n1, float(cfg["gap"]))
        vs = gap_levels(n2, float(cfg["gap"]))
    else:
        try:
            vh = np.asarray(cfg["v_horizontal"], dtype=float).ravel()
            vs = np.asarray(cfg["v_slanted"], dtype=float).ravel()
        except KeyError as exc:
            raise GridError(f"missing grid key {exc.args[0]!r}") from None
        n1 = int(cfg.get("n1", vh.size))
        n2 = int(cfg.get("n2", vs.size))
    if vh.size != n1 or vs.size != n2:
        raise GridError(
            f"dimension mismatch: n1={n1}, n2={n2} but {vh.size} horizontal and "
            f"{vs.size} slanted energies")
    if "coupling" not in cfg:
        raise GridError("missing grid key 'coupling'")
    g = _coupling_from_config(cfg["coupling"], n1, n2)
    if g.shape != (n1, n2):
        raise GridError(f"dimension mismatch: coupling is {g.shape}, expected ({n1}, {n2})")

    if "t" in cfg:
        t_minus = t_plus = float(cfg["t"])
    else:
        try:
            t_minus = float(cfg["t_minus"])
            t_plus = float(cfg["t_plus"])
        except KeyError as exc:
            raise GridError(f"missing grid key {exc.args[0]!r}") from None
    beta = float(cfg.get("beta", 1.0))
    if beta == 0:
        raise GridError("zero slope: beta must be nonzero")

    p1 = np.argsort(vh, kind="stable")
    p2 = np.argsort(vs, kind="stable")
    labels = tuple(int(i) + 1 for i in p1) + tuple(n1 + int(k) + 1 for k in p2)
    grid = GridModel(
        n1=n1, n2=n2, v_horizontal=vh[p1], v_slanted=vs[p2], beta=beta,
        coupling=g[np.ix_(p1, p2)], t_minus=t_minus, t_plus=t_plus, labels=labels,
    )
    check_crossings(grid, require=require_interior_crossings)
    return grid


def check_crossings(grid: GridModel, require: bool = False) -> bool:
    """True when every crossing time lies strictly inside the interval."""
    tc = grid.crossing_times()
    inside = bool(np.all((tc > -grid.t_minus) & (tc < grid.t_plus)))
    if not inside:
        msg = (f"crossing times span [{tc.min():.4g}, {tc.max():.4g}], not all inside "
               f"(-{grid.t_minus:g}, {grid.t_plus:g})")
        if require:
            raise GridError(msg)
        warnings.warn(msg, stacklevel=3)
    return inside


def section_v_model(dV: float, g0: float, m=0, t: float = 100.0, beta: float = 1.0) -> GridModel:
    """The 2+2 test grid with both sets at ``(-dV/2, dV/2)``.

    ``m`` is the phase parameter of :func:`eq22_coupling`, or ``"equal"`` for
    all couplings equal to ``g0``.
    """
    g = equal_coupling(2, 2, g0) if m == "equal" else eq22_coupling(int(m), g0)
    v = gap_levels(2, dV)
    return GridModel(n1=2, n2=2, v_horizontal=v, v_slanted=v, beta=beta,
                     coupling=g, t_minus=t, t_plus=t)


def gauge_reduce(v1_slope: float, v2_slope: float, grid: GridModel) -> GridModel:
    """Map a grid whose sets have slopes ``(v1_slope, v2_slope)`` to canonical form.

    ``grid`` supplies energies, couplings and interval; its ``beta`` is ignored.
    Subtracting ``v1_slope * t`` from every diagonal element is a pure phase
    ``exp(i v1_slope t^2 / 2)`` common to all states, so probabilities are
    unchanged and the result has a horizontal first set and slope
    ``v2_slope - v1_slope``.
    """
    if v1_slope == v2_slope:
        raise GridError("equal slopes: the two sets never cross")
    return grid.replace(beta=float(v2_slope - v1_slope))


def rescale_beta(grid: GridModel, new_beta: float) -> GridModel:
    """Equivalent grid with slope ``new_beta`` (same transition probabilities).

    With ``s = sqrt(new_beta / beta)`` energies and couplings scale by ``s`` and
    times by ``1 / s``.
    """
    if not new_beta > 0:
        raise GridError(f"target slope must be positive, got {new_beta}")
    if not grid.beta > 0:
        raise GridError("rescaling needs a positive slope; reverse time first")
    s = math.sqrt(new_beta / grid.beta)
    return grid.replace(
        v_horizontal=grid.v_horizontal * s, v_slanted=grid.v_slanted * s,
        coupling=grid.coupling * s, beta=float(new_beta),
        t_minus=grid.t_minus / s, t_plus=grid.t_plus / s,
    )


def bandwidths(grid: GridModel) -> tuple[float, float]:
    """Energy spreads ``(V_n1 - V_1, V_{n1+n2} - V_{n1+1})`` of the two sets."""
    return (float(grid.v_horizontal[-1] - grid.v_horizontal[0]),
            float(grid.v_slanted[-1] - grid.v_slanted[0]))


def is_counterintuitive(grid: GridModel, label: TransitionLabel) -> bool:
    """Whether a within-set transition needs its crossings in reverse time order.

    A two-step path ``j -> k -> j'`` through a slanted state ``k`` is time
    ordered iff ``t_jk < t_j'k``, i.e. ``V_j < V_j'`` for ``beta > 0``; through
    a horizontal state the slanted pair ``k -> j -> k'`` needs ``V_k > V_k'``.
    All paths share the ordering, so the test reduces to an energy comparison.
    Equal energies give False in both directions.
    """
    label.check(grid.n_states)
    s_from, s_to = grid.in_set(label.from_state), grid.in_set(label.to_state)
    if s_from != s_to:
        raise GridError("counterintuitive is defined only within one set")
    v_from = grid.potential(label.from_state)
    v_to = grid.potential(label.to_state)
    if v_from == v_to:
        return False
    if s_from == 1:
        reverse = v_to < v_from
    else:
        reverse = v_to > v_from
    return reverse if grid.beta > 0 else not reverse
