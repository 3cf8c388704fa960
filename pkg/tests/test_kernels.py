"""Backend equivalence and contract tests for the hot kernels."""
import numpy as np
import pytest

from talbotlau._kernels import (_fallback, BACKEND, LAW_INV3, LAW_LIGHT,
                                LAW_ZERO, fresnel_transform,
                                oscillatory_segments)
from talbotlau.quadrature import QuadratureError, gk_adaptive

try:
    from talbotlau._kernels import _core
    HAVE_CORE = True
except ImportError:
    HAVE_CORE = False


def test_linear_phase_closed_form():
    # integral of exp(-2 pi i m u) over [-a, a] = sin(2 pi m a) / (pi m)
    m, a = 3, 0.31
    val = oscillatory_segments([(-a, a)], LAW_ZERO, 0.0, 0.0, 0.0, 0.0, 0.0,
                               -2.0 * np.pi * m)
    assert val == pytest.approx(np.sin(2 * np.pi * m * a) / (np.pi * m),
                                abs=1e-12)


def test_light_law_matches_direct_quadrature():
    phi0, m = 2.7, 2
    val = oscillatory_segments([(-0.5, 0.5)], LAW_LIGHT, 0.5, phi0, 0.0,
                               0.0, 0.0, -2.0 * np.pi * m)
    ref = gk_adaptive(lambda u: np.exp(1j * (phi0 * np.cos(np.pi * u) ** 2
                                             - 2 * np.pi * m * u)),
                      -0.5, 0.5, abs_tol=1e-13)
    assert val == pytest.approx(ref, abs=1e-10)


def test_inv3_law_matches_direct_quadrature():
    s, hw, m = 3e-5, 0.25, 4
    cut = 0.01
    val = oscillatory_segments([(-hw + cut, hw - cut)], LAW_INV3, hw, s, 0.0,
                               0.0, 0.0, -2.0 * np.pi * m)

    def integrand(u):
        return np.exp(1j * (s * ((hw - u) ** -3 + (hw + u) ** -3)
                            - 2 * np.pi * m * u))
    ref = gk_adaptive(integrand, -hw + cut, hw - cut, abs_tol=1e-13)
    assert val == pytest.approx(ref, abs=1e-10)


@pytest.mark.skipif(not HAVE_CORE, reason="compiled kernels unavailable")
def test_backends_agree():
    cases = [
        ([(-0.24, 0.24)], LAW_INV3, 0.25, 3e-5, 0.0, -3e-5, 0.1, -6 * np.pi),
        ([(-0.5, 0.5)], LAW_LIGHT, 0.5, 1.7, 0.2, -1.7, -0.2, -4 * np.pi),
        ([(-0.4, -0.1), (0.05, 0.3)], LAW_ZERO, 0.0, 0.0, 0.0, 0.0, 0.0,
         -10 * np.pi),
    ]
    for segs, law, hw, p1, s1, p2, s2, lin in cases:
        a = _core.oscillatory_segments(segs, law, hw, p1, s1, p2, s2, lin)
        b = _fallback.oscillatory_segments(segs, law, hw, p1, s1, p2, s2, lin)
        assert a == pytest.approx(b, abs=1e-13)


def test_budget_exhaustion_raises():
    with pytest.raises(QuadratureError):
        oscillatory_segments([(-0.2499, 0.2499)], LAW_INV3, 0.25, 1e3, 0.0,
                             0.0, 0.0, 0.0, abs_tol=1e-14, budget=8)


def test_fresnel_transform_matches_dense_matmul():
    rng = np.random.default_rng(7)
    x_in = np.linspace(-1.0, 1.0, 64)
    x_out = np.linspace(-0.5, 0.5, 17)
    fields = rng.normal(size=(64, 3)) + 1j * rng.normal(size=(64, 3))
    coef = 2.1
    kern = np.exp(1j * coef * (x_out[:, None] - x_in[None, :]) ** 2)
    ref = kern @ fields
    out = fresnel_transform(x_out, x_in, fields, coef)
    np.testing.assert_allclose(out, ref, atol=1e-12)
    if HAVE_CORE:
        np.testing.assert_allclose(
            _core.fresnel_transform(x_out, x_in, fields, coef), ref,
            atol=1e-12)
        np.testing.assert_allclose(
            _fallback.fresnel_transform(x_out, x_in, fields, coef), ref,
            atol=1e-12)


def test_backend_marker_is_sane():
    assert BACKEND in ("compiled", "numpy")
