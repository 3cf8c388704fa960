"""Pure-numpy implementation of the hot kernels.

Same subdivision rule and summation structure as the compiled core in
``_core.pyx``; either backend may be selected at import time.
"""
from __future__ import annotations

import numpy as np

from ..quadrature import (GAUSS_WEIGHTS, KRONROD_NODES, KRONROD_WEIGHTS,
                          QuadratureError)

# phase-law codes shared with the compiled core
LAW_ZERO = 0
LAW_INV3 = 1
LAW_INV4 = 2
LAW_LIGHT = 3
LAW_INV3_DERIV = 11
LAW_INV4_DERIV = 12
LAW_LIGHT_DERIV = 13


def _pot(law: int, hw: float, u: np.ndarray) -> np.ndarray:
    if law == LAW_ZERO:
        return np.zeros_like(u)
    if law == LAW_INV3:
        return (hw - u) ** -3.0 + (hw + u) ** -3.0
    if law == LAW_INV4:
        return (hw - u) ** -4.0 + (hw + u) ** -4.0
    if law == LAW_LIGHT:
        return np.cos(np.pi * u) ** 2
    if law == LAW_INV3_DERIV:
        return 3.0 * ((hw - u) ** -4.0 - (hw + u) ** -4.0)
    if law == LAW_INV4_DERIV:
        return 4.0 * ((hw - u) ** -5.0 - (hw + u) ** -5.0)
    if law == LAW_LIGHT_DERIV:
        return -np.pi * np.sin(2.0 * np.pi * u)
    raise ValueError(f"unknown phase law {law}")


def oscillatory_segments(segments, law, hw, pref1, sh1, pref2, sh2, lin,
                         abs_tol=1e-10, budget=2 ** 20):
    """Integrate exp(i*phase(u)) over the given segments.

    phase(u) = pref1*pot(u - sh1) + pref2*pot(u - sh2) + lin*u with the
    potential shape selected by ``law`` (scaled to period units; ``hw`` is
    the slit half-width in period units).
    """
    segments = np.asarray(segments, dtype=float)
    if segments.size == 0:
        return 0.0 + 0.0j
    widths = segments[:, 1] - segments[:, 0]
    keep = widths > 0.0
    segments = segments[keep]
    if segments.size == 0:
        return 0.0 + 0.0j
    span = float(np.sum(segments[:, 1] - segments[:, 0]))
    min_width = span * 2.0 ** -48

    def phase(u):
        p = lin * u
        if pref1 != 0.0:
            p = p + pref1 * _pot(law, hw, u - sh1)
        if pref2 != 0.0:
            p = p + pref2 * _pot(law, hw, u - sh2)
        return p

    intervals = segments
    total = 0.0 + 0.0j
    used = 0
    while intervals.size:
        used += len(intervals)
        if used > budget:
            raise QuadratureError(
                f"oscillatory quadrature budget of {budget} intervals exhausted")
        lo = intervals[:, 0]
        hi = intervals[:, 1]
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        u = mid[:, None] + half[:, None] * KRONROD_NODES[None, :]
        fv = np.exp(1j * phase(u.ravel())).reshape(u.shape)
        k15 = half * (fv @ KRONROD_WEIGHTS)
        g7 = half * (fv[:, 1::2] @ GAUSS_WEIGHTS)
        err = np.abs(k15 - g7)
        ok = (err <= abs_tol * (hi - lo) / span) | (hi - lo < min_width)
        total += k15[ok].sum()
        bad_lo = lo[~ok]
        bad_hi = hi[~ok]
        bad_mid = mid[~ok]
        if bad_lo.size:
            intervals = np.concatenate(
                [np.column_stack([bad_lo, bad_mid]),
                 np.column_stack([bad_mid, bad_hi])])
        else:
            break
    return complex(total)


def fresnel_transform(x_out, x_in, fields, coef, chunk=64):
    """out[o, s] = sum_i exp(i*coef*(x_out[o]-x_in[i])^2) * fields[i, s].

    Direct quadratic-phase kernel summation (no FFT): exact for aperiodic
    windows at O(N_out * N_in) cost.
    """
    x_out = np.asarray(x_out, dtype=float)
    x_in = np.asarray(x_in, dtype=float)
    fields = np.asarray(fields, dtype=complex)
    if fields.ndim == 1:
        fields = fields[:, None]
        squeeze = True
    else:
        squeeze = False
    out = np.empty((len(x_out), fields.shape[1]), dtype=complex)
    for start in range(0, len(x_out), chunk):
        xo = x_out[start:start + chunk]
        kern = np.exp(1j * coef * (xo[:, None] - x_in[None, :]) ** 2)
        out[start:start + chunk] = kern @ fields
    return out[:, 0] if squeeze else out
