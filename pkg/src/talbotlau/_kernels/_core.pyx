# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: adaptive oscillatory quadrature and the Fresnel
quadratic-phase transform.  Mirrors ``_fallback.py`` (same subdivision
rule, same law codes); results agree with the fallback up to summation
rounding."""
import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, M_PI
from libc.stdlib cimport free, malloc

cnp.import_array()

from ..quadrature import QuadratureError

cdef double[15] XK = [
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813]
cdef double[15] WK = [
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529]
cdef double[7] WG = [
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870]

cdef enum:
    LAW_ZERO = 0
    LAW_INV3 = 1
    LAW_INV4 = 2
    LAW_LIGHT = 3
    LAW_INV3_DERIV = 11
    LAW_INV4_DERIV = 12
    LAW_LIGHT_DERIV = 13


cdef inline double _pot(int law, double hw, double u) nogil:
    cdef double a, b
    if law == LAW_ZERO:
        return 0.0
    if law == LAW_INV3:
        a = hw - u
        b = hw + u
        return 1.0 / (a * a * a) + 1.0 / (b * b * b)
    if law == LAW_INV4:
        a = hw - u
        b = hw + u
        return 1.0 / (a * a * a * a) + 1.0 / (b * b * b * b)
    if law == LAW_LIGHT:
        a = cos(M_PI * u)
        return a * a
    if law == LAW_INV3_DERIV:
        a = hw - u
        b = hw + u
        return 3.0 * (1.0 / (a * a * a * a) - 1.0 / (b * b * b * b))
    if law == LAW_INV4_DERIV:
        a = hw - u
        b = hw + u
        return 4.0 * (1.0 / (a * a * a * a * a) - 1.0 / (b * b * b * b * b))
    if law == LAW_LIGHT_DERIV:
        return -M_PI * sin(2.0 * M_PI * u)
    return 0.0


cdef inline double _phase(int law, double hw, double pref1, double sh1,
                          double pref2, double sh2, double lin,
                          double u) nogil:
    cdef double p = lin * u
    if pref1 != 0.0:
        p += pref1 * _pot(law, hw, u - sh1)
    if pref2 != 0.0:
        p += pref2 * _pot(law, hw, u - sh2)
    return p


def oscillatory_segments(segments, int law, double hw, double pref1,
                         double sh1, double pref2, double sh2, double lin,
                         double abs_tol=1e-10, long budget=2 ** 20):
    """See ``_fallback.oscillatory_segments``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] segs = np.ascontiguousarray(
        np.asarray(segments, dtype=np.float64).reshape(-1, 2))
    cdef Py_ssize_t nseg = segs.shape[0]
    if nseg == 0:
        return 0.0 + 0.0j
    cdef double span = 0.0
    cdef Py_ssize_t i
    for i in range(nseg):
        if segs[i, 1] > segs[i, 0]:
            span += segs[i, 1] - segs[i, 0]
    if span <= 0.0:
        return 0.0 + 0.0j
    cdef double min_width = span * 2.0 ** -48

    # LIFO stack; depth is bounded by bisection depth + segment count
    cdef Py_ssize_t cap = 4096
    cdef double *stack_lo = <double *> malloc(cap * sizeof(double))
    cdef double *stack_hi = <double *> malloc(cap * sizeof(double))
    if stack_lo == NULL or stack_hi == NULL:
        free(stack_lo)
        free(stack_hi)
        raise MemoryError()
    cdef Py_ssize_t top = 0
    for i in range(nseg):
        if segs[i, 1] > segs[i, 0]:
            stack_lo[top] = segs[i, 0]
            stack_hi[top] = segs[i, 1]
            top += 1

    cdef double tot_re = 0.0, tot_im = 0.0
    cdef long used = 0
    cdef double lo, hi, mid, half, u, ph, fr, fi
    cdef double k15_re, k15_im, g7_re, g7_im, err_re, err_im
    cdef double[15] fre
    cdef double[15] fim
    cdef int k
    cdef bint over_budget = False
    cdef bint cramped = False
    with nogil:
        while top > 0:
            top -= 1
            lo = stack_lo[top]
            hi = stack_hi[top]
            used += 1
            if used > budget:
                over_budget = True
                break
            mid = 0.5 * (lo + hi)
            half = 0.5 * (hi - lo)
            k15_re = k15_im = g7_re = g7_im = 0.0
            for k in range(15):
                u = mid + half * XK[k]
                ph = _phase(law, hw, pref1, sh1, pref2, sh2, lin, u)
                fr = cos(ph)
                fi = sin(ph)
                fre[k] = fr
                fim[k] = fi
                k15_re += WK[k] * fr
                k15_im += WK[k] * fi
            for k in range(7):
                g7_re += WG[k] * fre[2 * k + 1]
                g7_im += WG[k] * fim[2 * k + 1]
            k15_re *= half
            k15_im *= half
            g7_re *= half
            g7_im *= half
            err_re = k15_re - g7_re
            err_im = k15_im - g7_im
            if (sqrt(err_re * err_re + err_im * err_im)
                    <= abs_tol * (hi - lo) / span) or (hi - lo < min_width):
                tot_re += k15_re
                tot_im += k15_im
            else:
                if top + 2 > cap:
                    cramped = True
                    break
                stack_lo[top] = lo
                stack_hi[top] = mid
                top += 1
                stack_lo[top] = mid
                stack_hi[top] = hi
                top += 1
    free(stack_lo)
    free(stack_hi)
    if over_budget:
        raise QuadratureError(
            f"oscillatory quadrature budget of {budget} intervals exhausted")
    if cramped:
        from . import _fallback
        return _fallback.oscillatory_segments(
            segments, law, hw, pref1, sh1, pref2, sh2, lin, abs_tol, budget)
    return tot_re + 1j * tot_im


def fresnel_transform(x_out, x_in, fields, double coef, chunk=64):
    """See ``_fallback.fresnel_transform``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xo = np.ascontiguousarray(
        np.asarray(x_out, dtype=np.float64))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xi = np.ascontiguousarray(
        np.asarray(x_in, dtype=np.float64))
    arr = np.asarray(fields, dtype=np.complex128)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[:, None]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] fld = np.ascontiguousarray(arr)
    cdef Py_ssize_t nout = xo.shape[0]
    cdef Py_ssize_t nin = xi.shape[0]
    cdef Py_ssize_t nsrc = fld.shape[1]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.zeros(
        (nout, nsrc), dtype=np.complex128)
    cdef Py_ssize_t o, i, s
    cdef double dx, ph, kr, ki
    cdef double fr, fi
    with nogil:
        for o in range(nout):
            for i in range(nin):
                dx = xo[o] - xi[i]
                ph = coef * dx * dx
                kr = cos(ph)
                ki = sin(ph)
                for s in range(nsrc):
                    fr = fld[i, s].real
                    fi = fld[i, s].imag
                    out[o, s].real += kr * fr - ki * fi
                    out[o, s].imag += kr * fi + ki * fr
    return out[:, 0] if squeeze else out
