"""Quasidegeneracy approximation.

Neglecting the off-diagonal transformed potentials splits the grid into
independent decoupled channels.  Channel ``l <= n`` is a two-state crossing
with coupling ``g_l``, exponent ``lam_l = g_l**2 / beta`` and crossing time
``t_l = (Va_ll - Vb_ll) / beta``, solved exactly by confluent hypergeometric
functions; the remaining channels only pick up phases.  The channel matrices
are rotated back to the original basis to give the full transition matrix.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .decouple import DecoupledSystem, decouple
from .integrate import PropagationSettings, numeric_smatrix, unitarity_defect
from .model import GridModel, TransitionMatrix
from .specfun import KummerConvergenceError, KummerQuery, kummer_m

__all__ = [
    "ChannelParams", "ChannelSMatrix", "CriteriaReport", "NoOscillation",
    "TransitionMatrix", "assemble_smatrix", "channel_params", "criteria_margin",
    "first_order_corrections", "fundamental_solutions", "oscillation_period",
    "qda_smatrix", "two_state_smatrix", "uncoupled_phase",
]

METHODS = ("auto", "analytic", "ode")
SPECFUN_TOL = 1e-10


class NoOscillation(ValueError):
    """The decoupled diagonal gap vanishes, so there is no interference period."""


@dataclass(frozen=True)
class ChannelParams:
    l: int
    g: float
    lam: float
    t_l: float
    va: float
    vb: float

    @classmethod
    def make(cls, l: int, g: float, va: float, vb: float, beta: float) -> "ChannelParams":
        return cls(l=l, g=float(g), lam=float(g) ** 2 / beta, t_l=(va - vb) / beta,
                   va=float(va), vb=float(vb))


def channel_params(dec: DecoupledSystem, beta: float) -> list[ChannelParams]:
    """Parameters of the coupled channels ``l < n``."""
    return [ChannelParams.make(l, dec.g[l], dec.Va[l, l].real, dec.Vb[l, l].real, beta)
            for l in range(dec.n)]


@dataclass(frozen=True)
class ChannelSMatrix:
    aa: complex
    ab: complex
    ba: complex
    bb: complex
    method: str
    est_error: float
    info: dict = field(default_factory=dict)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.aa, self.ab], [self.ba, self.bb]])


def _kummer_pair(a, b, z, rel_tol):
    """``M``, ``dM/dz`` and their relative error for one argument set."""
    r = kummer_m(KummerQuery(a, b, z, rel_tol))
    if not r.certified:
        raise KummerConvergenceError(
            f"1F1({a:.6g}, {b}, {z:.6g}) not certified to {rel_tol:g} "
            f"(estimate {r.est_error:.2e})")
    return r.value, r.deriv, r.est_error


def _fundamental(ch: ChannelParams, beta: float, t: float, rel_tol: float):
    """Fundamental pair at ``t`` and absolute error bounds for each entry."""
    tau = t - ch.t_l
    z = complex(0.0, -0.5 * beta * tau * tau)
    e = cmath.exp(complex(0.0, -ch.va * t))
    a1 = complex(0.0, -0.5 * ch.lam)
    m1, m1z, err1 = _kummer_pair(a1, 0.5, z, rel_tol)
    m2, m2z, err2 = _kummer_pair(a1 + 0.5, 1.5, z, rel_tol)
    ig = 1j / ch.g
    f1p = -1j * beta * tau * m1z
    f2p = m2 - 1j * beta * tau * tau * m2z
    A1, A2 = m1 * e, tau * m2 * e
    B1, B2 = ig * f1p * e, ig * f2p * e
    errs = (err1 * abs(m1), err2 * abs(tau * m2), err1 * abs(f1p) / ch.g,
            err2 * (abs(m2) + abs(beta * tau * tau * m2z)) / ch.g)
    return (A1, A2, B1, B2), errs


def fundamental_solutions(ch: ChannelParams, beta: float, t: float,
                          rel_tol: float = SPECFUN_TOL):
    """``(A1, A2, B1, B2)``: two independent solutions of the channel equations.

    ``(A_m, B_m)`` solves ``i A' = va A + g B``, ``i B' = (vb + beta t) B + g A``
    with ``A1(t_l) = exp(-i va t_l)``, ``A2(t_l) = 0``.  Raises
    :class:`KummerConvergenceError` when the special functions cannot be
    certified at ``t``.
    """
    if not ch.g > 0:
        raise ValueError("fundamental solutions need a coupled channel (g > 0)")
    return _fundamental(ch, beta, t, rel_tol)[0]


def _analytic_channel(ch: ChannelParams, beta, t_minus, t_plus, rel_tol) -> ChannelSMatrix:
    (a1p, a2p, b1p, b2p), ep = _fundamental(ch, beta, -t_minus, rel_tol)
    (a1f, a2f, b1f, b2f), ef = _fundamental(ch, beta, t_plus, rel_tol)
    D = a1p * b2p - a2p * b1p
    scale = max(abs(a1p), abs(a2p)) * max(abs(b1p), abs(b2p))
    if abs(D) < 1e-13 * scale:
        raise ArithmeticError(f"degenerate fundamental pair in channel {ch.l} (|D| = {abs(D):.3e})")
    S = np.array([[a1f * b2p - a2f * b1p, a2f * a1p - a1f * a2p],
                  [b1f * b2p - b2f * b1p, b2f * a1p - b1f * a2p]]) / D
    # first-order propagation of the entrywise bounds through the 2x2 products
    past = np.array([abs(a1p), abs(a2p), abs(b1p), abs(b2p)])
    fut = np.array([abs(a1f), abs(a2f), abs(b1f), abs(b2f)])
    ep, ef = np.array(ep), np.array(ef)
    cross = float((fut.sum() * ep.sum() + ef.sum() * past.sum()) / abs(D))
    d_err = float(2 * (ep * past[::-1]).sum() / abs(D))
    bound = cross + d_err * float(np.abs(S).max())
    defect = unitarity_defect(S)
    return ChannelSMatrix(*S.ravel(), method="analytic", est_error=max(bound, defect),
                          info={"unitarity_defect": defect, "wronskian": abs(D)})


def _ode_channel(ch: ChannelParams, beta, t_minus, t_plus,
                 settings: PropagationSettings | None) -> ChannelSMatrix:
    grid = GridModel(n1=1, n2=1, v_horizontal=[ch.va], v_slanted=[ch.vb], beta=beta,
                     coupling=[[ch.g]], t_minus=t_minus, t_plus=t_plus)
    tm = numeric_smatrix(grid, settings)
    S = tm.matrix
    return ChannelSMatrix(S[0, 0], S[0, 1], S[1, 0], S[1, 1], method="ode",
                          est_error=tm.est_error,
                          info={"unitarity_defect": tm.info["unitarity_defect"],
                                "steps": tm.info["steps"]})


def two_state_smatrix(ch: ChannelParams, beta: float, t_minus: float, t_plus: float,
                      method: str = "auto", rel_tol: float = SPECFUN_TOL,
                      settings: PropagationSettings | None = None) -> ChannelSMatrix:
    """Channel transition matrix from ``-t_minus`` to ``t_plus``.

    ``auto`` uses the closed form when both endpoint evaluations are certified
    and otherwise integrates the two-state equations.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    if not t_minus + t_plus > 0:
        raise ValueError("empty time interval")
    if not ch.g > 0:
        raise ValueError("uncoupled channel: use uncoupled_phase")
    if method == "ode":
        return _ode_channel(ch, beta, t_minus, t_plus, settings)
    try:
        return _analytic_channel(ch, beta, t_minus, t_plus, rel_tol)
    except KummerConvergenceError:
        if method == "analytic":
            raise
    return _ode_channel(ch, beta, t_minus, t_plus, settings)


def uncoupled_phase(v_ll: float, which: str, beta: float, t_minus: float, t_plus: float) -> complex:
    """Phase acquired by an uncoupled horizontal (``'a'``) or slanted (``'b'``) channel."""
    phase = v_ll * (t_minus + t_plus)
    if which == "b":
        phase += 0.5 * beta * (t_plus ** 2 - t_minus ** 2)
    elif which != "a":
        raise ValueError("which must be 'a' or 'b'")
    return cmath.exp(-1j * phase)


def assemble_smatrix(dec: DecoupledSystem, channel_s: list[ChannelSMatrix],
                     grid: GridModel) -> TransitionMatrix:
    """Rotate channel matrices and uncoupled phases back to the original basis."""
    n, n1, n2 = dec.n, dec.n1, dec.n2
    if len(channel_s) != n:
        raise ValueError(f"need {n} channel matrices, got {len(channel_s)}")
    tm, tp, beta = grid.t_minus, grid.t_plus, grid.beta
    sa = np.array([c.aa for c in channel_s]
                  + [uncoupled_phase(dec.Va[l, l].real, "a", beta, tm, tp) for l in range(n, n1)])
    sb = np.array([c.bb for c in channel_s]
                  + [uncoupled_phase(dec.Vb[l, l].real, "b", beta, tm, tp) for l in range(n, n2)])
    sab = np.array([c.ab for c in channel_s], dtype=complex)
    sba = np.array([c.ba for c in channel_s], dtype=complex)
    X, Y = dec.X, dec.Y
    Xh, Yh = X.conj().T, Y.conj().T
    S = np.empty((n1 + n2, n1 + n2), dtype=complex)
    S[:n1, :n1] = Xh @ (sa[:, None] * X)
    S[n1:, n1:] = Yh @ (sb[:, None] * Y)
    S[:n1, n1:] = Xh[:, :n] @ (sab[:, None] * Y[:n])
    S[n1:, :n1] = Yh[:, :n] @ (sba[:, None] * X[:n])
    est = sum(c.est_error for c in channel_s) + 1e-14
    return TransitionMatrix(
        matrix=S, method="qda", labels=grid.labels, fingerprint=grid.fingerprint(),
        est_error=est,
        info={"unitarity_defect": unitarity_defect(S),
              "channels": [c.method for c in channel_s], "rank": n})


def qda_smatrix(grid: GridModel, method: str = "auto", rel_tol: float = SPECFUN_TOL,
                settings: PropagationSettings | None = None,
                dec: DecoupledSystem | None = None) -> TransitionMatrix:
    """Transition matrix of ``grid`` in the quasidegeneracy approximation."""
    dec = dec or decouple(grid)
    chans = [two_state_smatrix(ch, grid.beta, grid.t_minus, grid.t_plus, method,
                               rel_tol, settings)
             for ch in channel_params(dec, grid.beta)]
    return assemble_smatrix(dec, chans, grid)


# -- applicability ---------------------------------------------------------

VERDICTS = ("satisfied", "marginal", "violated")


@dataclass(frozen=True)
class CriteriaReport:
    lhs: tuple  # (ΔV1 T, ΔV2 T)
    pairs: tuple  # (set, l, l', rhs, margin) per channel pair
    worst_margin: float
    corrections: tuple  # (|ΔS| matrix for set 1, same for set 2)
    max_correction: float
    verdict: str
    thresholds: tuple

    def lines(self) -> list[str]:
        out = [f"bandwidth x duration: set1 {self.lhs[0]:.6g}, set2 {self.lhs[1]:.6g}"]
        for s, l, lp, rhs, margin in self.pairs:
            out.append(f"set{s} channels ({l + 1},{lp + 1}): rhs {rhs:.6g} margin {margin:.6g}")
        out.append(f"worst margin {self.worst_margin:.6g} "
                   f"(satisfied <= {self.thresholds[0]:g}, marginal <= {self.thresholds[1]:g})")
        out.append(f"largest first-order correction {self.max_correction:.6g}")
        out.append(f"verdict: {self.verdict}")
        return out


def _verdict(margin: float, thresholds) -> str:
    if margin <= thresholds[0]:
        return "satisfied"
    if margin <= thresholds[1]:
        return "marginal"
    return "violated"


def asymptotic_window(grid: GridModel, dec: DecoupledSystem) -> bool:
    """Both interval ends lie outside every ``|t - t_l| <= g_l / beta`` transition zone."""
    b = abs(grid.beta)
    for ch in channel_params(dec, grid.beta):
        width = ch.g / b
        if abs(-grid.t_minus - ch.t_l) <= width or abs(grid.t_plus - ch.t_l) <= width:
            return False
    return True


def first_order_corrections(grid: GridModel, dec: DecoupledSystem):
    """Estimates of ``|ΔS_ll'|`` from the neglected off-diagonal potentials, per set.

    The endpoint amplitudes are taken with unit modulus, so these overestimate.
    Inside the asymptotic window the resonance denominator
    ``|1 + i lam_l' - i lam_l|`` is applied.
    """
    T = grid.duration
    window = asymptotic_window(grid, dec)
    out = []
    for V in (dec.Va, dec.Vb):
        size = V.shape[0]
        lam = dec.g_padded(size) ** 2 / abs(grid.beta)
        E = np.abs(V) * T
        np.fill_diagonal(E, 0.0)
        if window:
            E = E / np.abs(1 + 1j * (lam[None, :] - lam[:, None]))
        out.append(E)
    return tuple(out)


def criteria_margin(grid: GridModel, dec: DecoupledSystem | None = None,
                    thresholds=(0.2, 0.5)) -> CriteriaReport:
    """Compare ``ΔV T`` with ``1 + |g_l - g_l'| min(T, (g_l + g_l') / beta)`` for all pairs."""
    lo, hi = thresholds
    if not 0 <= lo <= hi:
        raise ValueError("thresholds must satisfy 0 <= satisfied <= marginal")
    dec = dec or decouple(grid)
    T = grid.duration
    b = abs(grid.beta)
    lhs = []
    pairs = []
    worst = 0.0
    for s, V, size in ((1, grid.v_horizontal, dec.n1), (2, grid.v_slanted, dec.n2)):
        x = float(V.max() - V.min()) * T
        lhs.append(x)
        g = dec.g_padded(size)
        for l in range(size):
            for lp in range(l + 1, size):
                rhs = 1.0 + abs(g[l] - g[lp]) * min(T, (g[l] + g[lp]) / b)
                margin = x / rhs
                pairs.append((s, l, lp, rhs, margin))
                worst = max(worst, margin)
    corr = first_order_corrections(grid, dec)
    max_corr = max(float(c.max(initial=0.0)) for c in corr)
    return CriteriaReport(lhs=tuple(lhs), pairs=tuple(pairs), worst_margin=worst,
                          corrections=corr, max_correction=max_corr,
                          verdict=_verdict(worst, thresholds), thresholds=(lo, hi))


def oscillation_period(dec: DecoupledSystem, dV: float, t_minus: float, t_plus: float) -> float:
    """Predicted interference period in ``ΔV``: ``2 pi |rho| / (t_minus + t_plus)``.

    ``rho = ΔV / (Va[1,1] - Va[0,0])`` for the decomposition ``dec`` of a grid
    with horizontal spread ``dV``.
    """
    if dec.n1 < 2:
        raise ValueError("need at least two horizontal states")
    gap = float(dec.Va[1, 1].real - dec.Va[0, 0].real)
    if dV == 0 or abs(gap) <= 1e-9 * abs(dV):
        raise NoOscillation("decoupled diagonal gap vanishes: no interference oscillation")
    return 2 * math.pi * abs(dV / gap) / (t_minus + t_plus)
