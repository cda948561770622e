"""Adaptive Dormand-Prince 5(4) core for the two-level master equation.

The state is the Bloch-affine vector y = (rx, ry, rz, s) representing
rho = (s*I + rx*sx + ry*sy + rz*sz)/2, so Hermiticity and unit trace are
structural. Within one ramp segment the detuning is affine in local time,
A(tau) = a0 + slope*tau, and the equation of motion is

    rx' = -A*ry - gc*rx
    ry' =  A*rx + om*rz - gc*ry
    rz' = -om*ry + g1*(s - rz)
    s'  =  0

with om the angular Rabi frequency (rad/s), g1 the relaxation rate and
gc = g1/2 + 2*g2 the total coherence decay rate. The caller integrates one
segment at a time and passes the output times to land on exactly; the step
budget applies between consecutive output times.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["integrate_segment", "OK", "TOO_MANY_STEPS", "STEP_UNDERFLOW"]

OK = 0
TOO_MANY_STEPS = 1
STEP_UNDERFLOW = 2

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = (
    9017 / 3168,
    -355 / 33,
    46732 / 5247,
    49 / 176,
    -5103 / 18656,
)
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth-order minus embedded fourth-order weights
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


@njit(cache=True, inline="always")
def _rhs(t, y, om, a0, slope, g1, gc, out):
    a = a0 + slope * t
    out[0] = -a * y[1] - gc * y[0]
    out[1] = a * y[0] + om * y[2] - gc * y[1]
    out[2] = -om * y[1] + g1 * (y[3] - y[2])
    out[3] = 0.0


@njit(cache=True)
def integrate_segment(y0, t_end, om, a0, slope, g1, gc, rtol, atol, max_steps, t_eval):
    """March y from local time 0 to t_end, emitting y at each t_eval.

    Returns (y_eval, y_final, status, t_reached): y_eval has one row per
    t_eval entry; status is OK, TOO_MANY_STEPS or STEP_UNDERFLOW; t_reached
    is the local time reached (== t_end on success).
    """
    n_eval = t_eval.shape[0]
    out = np.empty((n_eval, 4))
    y = y0.copy()
    t = 0.0
    i_eval = 0
    while i_eval < n_eval and t_eval[i_eval] <= 0.0:
        for m in range(4):
            out[i_eval, m] = y[m]
        i_eval += 1
    if t_end <= 0.0:
        return out, y, OK, 0.0

    k1 = np.empty(4)
    k2 = np.empty(4)
    k3 = np.empty(4)
    k4 = np.empty(4)
    k5 = np.empty(4)
    k6 = np.empty(4)
    k7 = np.empty(4)
    ytmp = np.empty(4)
    ynew = np.empty(4)

    _rhs(t, y, om, a0, slope, g1, gc, k1)

    # initial step: crude Hairer-style guess, adapted within a few steps
    d0 = 0.0
    d1 = 0.0
    for m in range(4):
        sc = atol + rtol * abs(y[m])
        d0 += (y[m] / sc) ** 2
        d1 += (k1[m] / sc) ** 2
    d0 = np.sqrt(d0 / 4.0)
    d1 = np.sqrt(d1 / 4.0)
    if d1 > 1e-300 and d0 > 1e-300:
        h = 0.01 * d0 / d1
    else:
        h = t_end
    if h > t_end:
        h = t_end
    if h <= 0.0:
        h = t_end

    hmin = 1e-16 * t_end
    steps = 0  # attempts since the last emitted output time

    while t < t_end:
        if i_eval < n_eval:
            t_stop = t_eval[i_eval]
            if t_stop > t_end:
                t_stop = t_end
        else:
            t_stop = t_end

        clamped = False
        h_try = h
        if t + h_try >= t_stop:
            h_try = t_stop - t
            clamped = True
        if not clamped and h_try < hmin:
            return out, y, STEP_UNDERFLOW, t
        if h_try <= 0.0:
            # landed exactly on t_stop already (duplicate eval point)
            if i_eval < n_eval and t_eval[i_eval] <= t:
                for m in range(4):
                    out[i_eval, m] = y[m]
                i_eval += 1
                steps = 0
                continue
            h_try = hmin

        steps += 1
        if steps > max_steps:
            return out, y, TOO_MANY_STEPS, t

        # stages
        for m in range(4):
            ytmp[m] = y[m] + h_try * _A21 * k1[m]
        _rhs(t + _C2 * h_try, ytmp, om, a0, slope, g1, gc, k2)
        for m in range(4):
            ytmp[m] = y[m] + h_try * (_A31 * k1[m] + _A32 * k2[m])
        _rhs(t + _C3 * h_try, ytmp, om, a0, slope, g1, gc, k3)
        for m in range(4):
            ytmp[m] = y[m] + h_try * (_A41 * k1[m] + _A42 * k2[m] + _A43 * k3[m])
        _rhs(t + _C4 * h_try, ytmp, om, a0, slope, g1, gc, k4)
        for m in range(4):
            ytmp[m] = y[m] + h_try * (
                _A51 * k1[m] + _A52 * k2[m] + _A53 * k3[m] + _A54 * k4[m]
            )
        _rhs(t + _C5 * h_try, ytmp, om, a0, slope, g1, gc, k5)
        for m in range(4):
            ytmp[m] = y[m] + h_try * (
                _A61 * k1[m]
                + _A62 * k2[m]
                + _A63 * k3[m]
                + _A64 * k4[m]
                + _A65 * k5[m]
            )
        _rhs(t + h_try, ytmp, om, a0, slope, g1, gc, k6)
        for m in range(4):
            ynew[m] = y[m] + h_try * (
                _B1 * k1[m] + _B3 * k3[m] + _B4 * k4[m] + _B5 * k5[m] + _B6 * k6[m]
            )
        _rhs(t + h_try, ynew, om, a0, slope, g1, gc, k7)

        errnorm = 0.0
        for m in range(4):
            err = h_try * (
                _E1 * k1[m]
                + _E3 * k3[m]
                + _E4 * k4[m]
                + _E5 * k5[m]
                + _E6 * k6[m]
                + _E7 * k7[m]
            )
            ay = abs(y[m])
            an = abs(ynew[m])
            sc = atol + rtol * (ay if ay > an else an)
            errnorm += (err / sc) ** 2
        errnorm = np.sqrt(errnorm / 4.0)

        if errnorm <= 1.0:
            t = t_stop if clamped else t + h_try
            for m in range(4):
                y[m] = ynew[m]
                k1[m] = k7[m]
            if clamped and i_eval < n_eval and t_eval[i_eval] <= t:
                for m in range(4):
                    out[i_eval, m] = y[m]
                i_eval += 1
                steps = 0
                while i_eval < n_eval and t_eval[i_eval] <= t:
                    for m in range(4):
                        out[i_eval, m] = y[m]
                    i_eval += 1
            if not clamped:
                if errnorm == 0.0:
                    fac = 5.0
                else:
                    fac = 0.9 * errnorm ** (-0.2)
                    if fac > 5.0:
                        fac = 5.0
                    elif fac < 0.2:
                        fac = 0.2
                h = h_try * fac
        else:
            fac = 0.9 * errnorm ** (-0.2)
            if fac < 0.2:
                fac = 0.2
            h = h_try * fac

    # emit any trailing eval points at t_end (fp duplicates)
    while i_eval < n_eval:
        for m in range(4):
            out[i_eval, m] = y[m]
        i_eval += 1

    return out, y, OK, t
