"""Pure numpy DOP853 propagator; fallback when the compiled core is absent.

Integrates ``i dY/dt = H(t) Y`` for the two-set linear grid, where ``Y`` is an
``(N, M)`` block of state columns.  In the interaction picture the diagonal
phases are removed analytically and only the chirped cross couplings remain.
"""

import math

import numpy as np

from . import tableau as tb

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_MAX_STEPS = 2


def _make_rhs(v, beta, n1, g, interaction):
    dv = v[:n1, None] - v[None, n1:]
    gh = g.conj().T
    v_top = v[:n1, None]
    v_bot = v[n1:, None]

    if interaction:
        def rhs(t, y):
            w = g * np.exp(1j * (dv * t - 0.5 * beta * t * t))
            top = -1j * (w @ y[n1:])
            bot = -1j * (w.conj().T @ y[:n1])
            return np.concatenate((top, bot))
    else:
        def rhs(t, y):
            top = -1j * (v_top * y[:n1] + g @ y[n1:])
            bot = -1j * ((v_bot + beta * t) * y[n1:] + gh @ y[:n1])
            return np.concatenate((top, bot))
    return rhs


def dop853(y0, t0, t1, v, beta, n1, g, interaction, rtol, atol, max_step,
           h0, max_steps):
    """Propagate ``y0`` from ``t0`` to ``t1``.

    Returns ``(y, n_accepted, n_rejected, n_rhs, status)``.
    """
    y = np.array(y0, dtype=complex, copy=True)
    v = np.asarray(v, dtype=float)
    g = np.asarray(g, dtype=complex)
    rhs = _make_rhs(v, beta, n1, g, interaction)

    size = y.size
    direction = 1.0 if t1 >= t0 else -1.0
    t = float(t0)
    K = np.empty((tb.N_STAGES + 1,) + y.shape, dtype=complex)
    K[0] = rhs(t, y)
    nfev = 1
    naccept = nreject = 0
    status = STATUS_OK
    h_abs = min(h0, max_step, abs(t1 - t0))

    while direction * (t - t1) < 0:
        min_step = 10 * abs(np.nextafter(t, direction * np.inf) - t)
        h_abs = min(h_abs, max_step)
        h_abs = max(h_abs, min_step)
        rejected = False
        while True:
            if h_abs < min_step:
                return y, naccept, nreject, nfev, STATUS_STEP_UNDERFLOW
            t_new = t + direction * h_abs
            if direction * (t_new - t1) > 0:
                t_new = t1
            h = t_new - t
            h_abs = abs(h)

            for s in range(1, tb.N_STAGES):
                dy = np.tensordot(tb.A[s, :s], K[:s], axes=1)
                K[s] = rhs(t + tb.C[s] * h, y + h * dy)
            y_new = y + h * np.tensordot(tb.B, K[:tb.N_STAGES], axes=1)
            K[tb.N_STAGES] = rhs(t + h, y_new)
            nfev += tb.N_STAGES

            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err5 = np.tensordot(tb.E5, K[:tb.N_STAGES], axes=1) / scale
            err3 = np.tensordot(tb.E3, K[:tb.N_STAGES], axes=1) / scale
            e5 = float(np.sum(err5.real ** 2 + err5.imag ** 2))
            e3 = float(np.sum(err3.real ** 2 + err3.imag ** 2))
            if e5 == 0.0 and e3 == 0.0:
                err = 0.0
            else:
                err = h_abs * e5 / math.sqrt((e5 + 0.01 * e3) * size)

            if err < 1.0:
                if err == 0.0:
                    factor = tb.MAX_FACTOR
                else:
                    factor = min(tb.MAX_FACTOR,
                                 tb.SAFETY * err ** tb.ERROR_EXPONENT)
                if rejected:
                    factor = min(1.0, factor)
                h_abs *= factor
                t = t_new
                y = y_new
                K[0] = K[tb.N_STAGES]
                naccept += 1
                break
            h_abs *= max(tb.MIN_FACTOR, tb.SAFETY * err ** tb.ERROR_EXPONENT)
            rejected = True
            nreject += 1

        if naccept >= max_steps and direction * (t - t1) < 0:
            status = STATUS_MAX_STEPS
            break

    return y, naccept, nreject, nfev, status
