"""Fringe formation in the symmetric three-grating setup.

The detector signal is a Fourier series in the lateral position of the
third grating; its coefficients combine the first/third-grating intensity
coefficients A_l with the second-grating product coefficients B_{l r}
(quantum, wavelength-dependent) or B_{l r}^(0) (classical).  Truncation
order doubles until the relative tail mass passes 1e-6.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional, Sequence, Tuple

import numpy as np

from . import gratings as _gr
from .constants import PLANCK
from .model import (BeamSpec, CoeffSet, Kinematics, ParticleSpec, Pattern,
                    SetupSpec, ValidationError, derive_kinematics)

__all__ = [
    "FringeResult", "NumericError", "intensity_coeffs", "quantum_B",
    "classical_B", "signal_coeffs", "density_pattern", "detector_signal",
    "visibility", "closed_form_visibility", "velocity_average",
    "fringes_at_velocity", "density_at_velocity",
]

TAIL_RATIO = 1e-6
MAX_ORDER_CAP = 1024
DEFAULT_ORDER = 16
DEFAULT_GRID = 512
NEGATIVITY_TOL = 1e-9


class NumericError(RuntimeError):
    """A numerical convergence check failed (exit code 3 in the CLI)."""


@dataclass(frozen=True)
class FringeResult:
    """Sampled detector signal and its coefficient representation."""
    signal_coeffs: CoeffSet        # term_l = conj(A_l)^2 B_{l r}
    pattern: Pattern               # S(x_s) over one period of d1
    visibility: float
    regime: Literal["quantum", "classical"]
    mean_level: float


def intensity_coeffs(grating1, kin: Kinematics | None = None,
                     max_order: int = DEFAULT_ORDER,
                     particle: ParticleSpec | None = None) -> CoeffSet:
    """Fourier coefficients A_l of |t1|^2 for the first (or third) grating.

    The eikonal phase drops out of the squared modulus, so only the
    transmitting width matters; with an active wall interaction that width
    is reduced by the opacity margins.
    """
    if grating1.kind != "binary":
        raise ValidationError("intensity coefficients need a binary grating")
    f_eff = grating1.open_fraction
    if grating1.interaction.law != "none" and kin is not None:
        prof = _gr.transmission_profile(grating1, kin, particle)
        f_eff = 2.0 * prof.open_halfwidth() / grating1.period
    orders = np.arange(-max_order, max_order + 1)
    vals = _gr.binary_coeff(f_eff, orders).astype(complex)
    stage = "ideal" if grating1.interaction.law == "none" else "interacting"
    return CoeffSet(values=tuple(vals), regime="quantum", stage=stage)


def quantum_B(m: int, btilde: CoeffSet, l_over_talbot: float) -> complex:
    """Truncated autocorrelation form of the quantum product coefficient.

    B_m = sum_j b_j conj(b_{j-m}) exp(i pi (m^2 - 2 j m)/2 * L/L_T) over
    the orders stored in ``btilde``.  The production path evaluates the
    analytically resummed series instead (gratings.quantum_product_coeff);
    this form converges to it as the stored order range grows.
    """
    arr = btilde.as_array()
    big_m = btilde.max_order
    j = np.arange(-big_m + max(0, m), big_m + 1 + min(0, m))
    vals = arr[j + big_m]
    vals_shift = arr[j - m + big_m]
    phase = np.exp(1j * np.pi * (m * m - 2.0 * j * m) / 2.0 * l_over_talbot)
    return complex(np.sum(vals * np.conj(vals_shift) * phase))


def classical_B(m: int, setup: SetupSpec, kin: Kinematics,
                particle: ParticleSpec | None = None) -> complex:
    """Classical product coefficient of the second grating (kick phase
    included when an interaction is active)."""
    return _gr.classical_product_coeff(setup.grating2, kin, setup.separation,
                                       m, particle)


def _product_coeff_fn(setup: SetupSpec, kin: Kinematics, regime: str,
                      particle: ParticleSpec | None) -> Callable[[int], complex]:
    ratio = setup.separation / kin.talbot_length
    if regime == "quantum":
        return lambda m: _gr.quantum_product_coeff(
            setup.grating2, kin, ratio, m, particle)
    if regime == "classical":
        return lambda m: _gr.classical_product_coeff(
            setup.grating2, kin, setup.separation, m, particle)
    raise ValidationError(f"regime: unknown regime {regime!r}")


def _stage_for(setup: SetupSpec) -> str:
    g2 = setup.grating2
    if g2.kind == "light":
        return "interacting"
    if g2.interaction.law == "none" or g2.thickness == 0.0:
        return "ideal"
    return "interacting"


def _build_terms(setup: SetupSpec, kin: Kinematics, regime: str,
                 particle: ParticleSpec | None, a_power: int,
                 max_order: int,
                 suppression: Optional[Callable[[int], complex]] = None
                 ) -> Tuple[CoeffSet, CoeffSet]:
    """Coefficient sets (terms, B-values) for the signal (a_power=2) or the
    density (a_power=1), growing the order until the tail test passes."""
    r = setup.period_ratio
    b_fn = _product_coeff_fn(setup, kin, regime, particle)
    order = max_order
    while True:
        a_set = intensity_coeffs(setup.grating1, kin, order, particle)
        b_vals = {}
        for ell in range(0, order + 1):
            b = b_fn(ell * r)
            if suppression is not None and ell != 0:
                b = b * suppression(ell * r)
            b_vals[ell] = b
        terms = np.empty(2 * order + 1, dtype=complex)
        for ell in range(0, order + 1):
            a = a_set.value(ell)
            t = np.conj(a) ** a_power * b_vals[ell]
            terms[order + ell] = t
            terms[order - ell] = np.conj(t)
        t0 = abs(terms[order])
        tail = abs(terms[-1])
        if t0 > 0.0 and tail / t0 < TAIL_RATIO:
            stage = _stage_for(setup) if suppression is None else "decohered"
            b_arr = np.empty(2 * order + 1, dtype=complex)
            for ell in range(0, order + 1):
                b_arr[order + ell] = b_vals[ell]
                b_arr[order - ell] = np.conj(b_vals[ell])
            return (CoeffSet(values=tuple(terms), regime=regime, stage=stage),
                    CoeffSet(values=tuple(b_arr), regime=regime, stage=stage))
        if order >= MAX_ORDER_CAP:
            raise NumericError(
                f"coefficient tail {tail / max(t0, 1e-300):.2e} above "
                f"{TAIL_RATIO} at order cap {MAX_ORDER_CAP}")
        order *= 2


def signal_coeffs(setup: SetupSpec, kin: Kinematics, regime: str = "quantum",
                  particle: ParticleSpec | None = None,
                  max_order: int = DEFAULT_ORDER,
                  suppression: Optional[Callable[[int], complex]] = None
                  ) -> CoeffSet:
    """Signal coefficient set: term_l = conj(A_l)^2 * B_{l r}."""
    terms, _ = _build_terms(setup, kin, regime, particle, 2, max_order,
                            suppression)
    return terms


def _sample_series(coeffs: CoeffSet, period: float, grid: int) -> Pattern:
    order = coeffs.max_order
    ell = np.arange(-order, order + 1)
    x = np.arange(grid) / grid * period
    phases = np.exp(2j * np.pi * np.outer(x / period, ell))
    vals = phases @ coeffs.as_array()
    series = np.real(vals)
    mean = float(np.real(coeffs.value(0)))
    if mean <= 0.0:
        raise ValidationError("series: nonpositive mean level")
    if series.min() < -NEGATIVITY_TOL * mean:
        raise NumericError(
            f"sampled series dips to {series.min():.3e} "
            f"(mean {mean:.3e}); truncation not converged")
    return Pattern(x=tuple(x), values=tuple(series), period=period)


def density_pattern(setup: SetupSpec, kin: Kinematics, regime: str = "quantum",
                    particle: ParticleSpec | None = None,
                    max_order: int = DEFAULT_ORDER, grid: int = DEFAULT_GRID,
                    suppression: Optional[Callable[[int], complex]] = None
                    ) -> Pattern:
    """Transverse density over one period d1 ahead of the third grating,
    normalized so the mean equals A_0 B_0."""
    terms, _ = _build_terms(setup, kin, regime, particle, 1, max_order,
                            suppression)
    return _sample_series(terms, setup.d1, grid)


def detector_signal(setup: SetupSpec, kin: Kinematics, regime: str = "quantum",
                    particle: ParticleSpec | None = None,
                    max_order: int = DEFAULT_ORDER, grid: int = DEFAULT_GRID,
                    suppression: Optional[Callable[[int], complex]] = None
                    ) -> FringeResult:
    """Modulated transmission behind the third grating versus its lateral
    position (third grating identical to the first)."""
    coeffs = signal_coeffs(setup, kin, regime, particle, max_order,
                           suppression)
    pattern = _sample_series(coeffs, setup.d1, grid)
    return FringeResult(signal_coeffs=coeffs, pattern=pattern,
                        visibility=pattern.visibility, regime=regime,
                        mean_level=pattern.mean_level)


def visibility(result: FringeResult) -> float:
    """(S_max - S_min) / (S_max + S_min) of the sampled signal."""
    return result.pattern.visibility


def closed_form_visibility(coeffs: CoeffSet) -> float:
    """Harmonic-sum visibility for symmetric gratings (extrema assumed at
    x_s = 0 and d1/2); cross-check against the sampled-grid value."""
    order = coeffs.max_order
    num = sum(np.real(coeffs.value(ell)) for ell in range(1, order + 1, 2))
    den = 0.5 * np.real(coeffs.value(0)) + sum(
        np.real(coeffs.value(ell)) for ell in range(2, order + 1, 2))
    if den <= 0.0:
        raise ValidationError("visibility: nonpositive mean transmission")
    return abs(num) / den


def fringes_at_velocity(setup: SetupSpec, particle: ParticleSpec, v_z: float,
                        regime: str = "quantum",
                        max_order: int = DEFAULT_ORDER, grid: int = DEFAULT_GRID,
                        suppression_builder=None) -> FringeResult:
    """Convenience wrapper: kinematics + optional decoherence + signal."""
    kin = derive_kinematics(particle, v_z, setup.d)
    suppression = None
    if suppression_builder is not None:
        suppression = suppression_builder(kin)
    return detector_signal(setup, kin, regime, particle, max_order, grid,
                           suppression)


def density_at_velocity(setup: SetupSpec, particle: ParticleSpec, v_z: float,
                        regime: str = "quantum",
                        max_order: int = DEFAULT_ORDER, grid: int = DEFAULT_GRID,
                        suppression_builder=None) -> Pattern:
    kin = derive_kinematics(particle, v_z, setup.d)
    suppression = None
    if suppression_builder is not None:
        suppression = suppression_builder(kin)
    return density_pattern(setup, kin, regime, particle, max_order, grid,
                           suppression)


# ---------------------------------------------------------------------------
# velocity averaging

def _velocity_nodes(beam: BeamSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes and normalized weights for the beam distribution."""
    if beam.kind == "delta":
        return np.array([beam.v_mean]), np.array([1.0])
    if beam.kind == "gaussian":
        lo = max(beam.v_mean - 4.0 * beam.v_sigma, 1e-6 * beam.v_mean)
        hi = beam.v_mean + 4.0 * beam.v_sigma
        x, w = np.polynomial.legendre.leggauss(beam.nodes)
        v = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x
        g = np.exp(-0.5 * ((v - beam.v_mean) / beam.v_sigma) ** 2)
        weights = w * g
    else:  # tabulated
        v = np.asarray(beam.table[0], dtype=float)
        g = np.asarray(beam.table[1], dtype=float)
        weights = np.empty_like(v)
        # trapezoid weights on the given grid
        dv = np.diff(v)
        weights[0] = dv[0] / 2.0
        weights[-1] = dv[-1] / 2.0
        weights[1:-1] = (dv[:-1] + dv[1:]) / 2.0
        weights = weights * g
    if beam.flux_weighted:
        weights = weights * v
    total = weights.sum()
    if total <= 0.0:
        raise ValidationError("beam: velocity weights sum to zero")
    return v, weights / total


def _averaged_coeffs(setup, particle, v_nodes, weights, regime, max_order,
                     suppression_builder) -> CoeffSet:
    ref_kin = derive_kinematics(particle, float(np.average(v_nodes,
                                                           weights=weights)),
                                setup.d)
    ref_supp = suppression_builder(ref_kin) if suppression_builder else None
    ref_terms, _ = _build_terms(setup, ref_kin, regime, particle, 2,
                                DEFAULT_ORDER, ref_supp)
    order = max(ref_terms.max_order, max_order)
    acc = np.zeros(2 * order + 1, dtype=complex)
    stage = ref_terms.stage
    for v, w in zip(v_nodes, weights):
        kin = derive_kinematics(particle, float(v), setup.d)
        supp = suppression_builder(kin) if suppression_builder else None
        terms, _ = _build_terms(setup, kin, regime, particle, 2, order, supp)
        arr = terms.as_array()
        m = terms.max_order
        if m > order:
            arr = arr[m - order:m + order + 1]
        acc += w * arr
        stage = terms.stage
    return CoeffSet(values=tuple(acc), regime=regime, stage=stage)


def velocity_average(setup: SetupSpec, particle: ParticleSpec, beam: BeamSpec,
                     regime: str = "quantum", max_order: int = DEFAULT_ORDER,
                     grid: int = DEFAULT_GRID, suppression_builder=None,
                     convergence_tol: float = 1e-4) -> FringeResult:
    """Signal averaged over the longitudinal velocity distribution.

    The averaged signal is sampled and the visibility extracted from it
    (never from per-velocity visibilities).  For gaussian beams the
    Gauss-Legendre node count is doubled once as a convergence check.
    """
    beam.validate()
    v, w = _velocity_nodes(beam)
    coeffs = _averaged_coeffs(setup, particle, v, w, regime, max_order,
                              suppression_builder)
    if beam.kind == "gaussian":
        from dataclasses import replace
        fine = replace(beam, nodes=2 * beam.nodes)
        v2, w2 = _velocity_nodes(fine)
        coeffs2 = _averaged_coeffs(setup, particle, v2, w2, regime, max_order,
                                   suppression_builder)
        n = min(coeffs.max_order, coeffs2.max_order)
        a1 = coeffs.as_array()[coeffs.max_order - n:coeffs.max_order + n + 1]
        a2 = coeffs2.as_array()[coeffs2.max_order - n:coeffs2.max_order + n + 1]
        mean = abs(coeffs2.value(0))
        if np.max(np.abs(a1 - a2)) > convergence_tol * mean:
            raise NumericError(
                "velocity grid not converged: doubling the node count moved "
                f"the averaged coefficients by more than {convergence_tol:g} "
                "of the mean level")
        coeffs = coeffs2
    pattern = _sample_series(coeffs, setup.d1, grid)
    return FringeResult(signal_coeffs=coeffs, pattern=pattern,
                        visibility=pattern.visibility, regime=regime,
                        mean_level=pattern.mean_level)
