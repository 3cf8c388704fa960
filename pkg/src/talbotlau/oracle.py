"""Independent validation of the coefficient fast path.

Direct Fresnel propagation through the grating stack: point sources across
the first-grating slits (incoherent, spanning the 2 d source period of the
fringe kernel), cell-averaged second-grating transmission on a tapered
window, and an O(N^2) quadratic-phase propagation to the detector plane.
Decoherence is unraveled as stochastic momentum kicks applied to the field
at the event plane; the exact paraxial composition algebra reduces a kick
at z to a source displacement (before the second grating) or a pattern
displacement (after it), which is what makes 10^4-trajectory runs cheap.
A literal field-level method is retained for cross-validation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .constants import HBAR
from .gratings import TransmissionProfile, transmission_profile
from .model import (Kinematics, ParticleSpec, Pattern, SetupSpec,
                    ValidationError)
from .decoherence import DecoherenceScenario
from .quadrature import gk_adaptive

__all__ = [
    "OracleConfig", "WindowError", "UnsupportedScenarioError", "CompareReport",
    "fresnel_propagate", "coherent_pattern_oracle", "mc_decohered_pattern",
    "compare", "window_convergence_check",
]


class WindowError(ValueError):
    """Field energy reaches the window boundary; results would alias."""


class UnsupportedScenarioError(ValueError):
    """The scenario's kick distribution is not a valid probability density."""


@dataclass(frozen=True)
class OracleConfig:
    """Discretization of the direct-propagation oracle."""
    window_periods: int = 64          # grating-2 periods across the window
    samples_per_period: int = 256
    source_points_per_slit: int = 32
    output_points: int = 512
    taper_periods: int = 6
    mc_events: int = 10000            # trajectories for the MC unraveling
    seed: int = 0

    def validate(self) -> "OracleConfig":
        if self.window_periods < 2 * self.taper_periods + 4:
            raise ValidationError("oracle.window_periods: window too small "
                                  "for the taper")
        for name in ("samples_per_period", "source_points_per_slit",
                     "output_points", "mc_events"):
            if getattr(self, name) < 1:
                raise ValidationError(f"oracle.{name}: must be positive")
        return self


@dataclass(frozen=True)
class CompareReport:
    l2_error: float                  # relative L2 over one period
    visibility_difference: float


# ---------------------------------------------------------------------------
# elementary propagation

def fresnel_propagate(field: np.ndarray, x_in: np.ndarray, x_out: np.ndarray,
                      distance: float, kin: Kinematics,
                      boundary_tol: float = 1e-6) -> np.ndarray:
    """Paraxial propagation of a compactly supported field by ``distance``.

    Direct quadrature of the quadratic-phase kernel on the sample grid,
    psi(x) = sqrt(p_z / (2 pi hbar i distance)) * sum dx exp(...) psi_0.
    """
    field = np.asarray(field, dtype=complex)
    x_in = np.asarray(x_in, dtype=float)
    if distance <= 0.0:
        raise ValidationError("fresnel_propagate: distance must be positive")
    peak = np.max(np.abs(field))
    if peak > 0.0 and max(abs(field[0]), abs(field[-1])) > boundary_tol * peak:
        raise WindowError("field magnitude at the window boundary exceeds "
                          f"{boundary_tol:g} of the peak")
    dx = x_in[1] - x_in[0]
    coef = kin.p_z / (2.0 * HBAR * distance)
    pref = np.sqrt(kin.p_z / (2.0 * math.pi * HBAR * distance)) \
        * np.exp(-1j * math.pi / 4.0) * dx
    out = _kernels.fresnel_transform(np.asarray(x_out, dtype=float), x_in,
                                     field, coef)
    return pref * out


# ---------------------------------------------------------------------------
# windowed second grating and the source-resolved pattern bank

def _window_grid(setup: SetupSpec, config: OracleConfig):
    d = setup.d
    n = config.window_periods * config.samples_per_period
    dx = d / config.samples_per_period
    xg = (np.arange(n) - n / 2 + 0.5) * dx
    return xg, dx


def _cell_averaged_transmission(profile: TransmissionProfile,
                                xg: np.ndarray, dx: float) -> np.ndarray:
    """Project t~ onto the grid cells: open-coverage times the averaged
    phase factor, with per-cell quadrature where the phase winds."""
    grating = profile.grating
    d = grating.period
    out = np.zeros(len(xg), dtype=complex)
    if grating.kind == "light":
        # smooth pure phase; midpoint sampling is adequate at the cell scale
        return np.exp(1j * profile.phase(xg))
    hw_t = profile.open_halfwidth()
    base = d * np.round(xg / d)
    lo = np.maximum(xg - dx / 2.0 - base, -hw_t)
    hi = np.minimum(xg + dx / 2.0 - base, hw_t)
    open_mask = hi > lo
    idx = np.nonzero(open_mask)[0]
    if idx.size == 0:
        return out
    has_phase = profile.grating.interaction.law != "none" and \
        profile.grating.thickness > 0.0
    if not has_phase:
        out[idx] = (hi[idx] - lo[idx]) / dx
        return out
    phases_lo = profile.phase(lo[idx])
    phases_hi = profile.phase(hi[idx])
    mids = 0.5 * (lo[idx] + hi[idx])
    phases_mid = profile.phase(mids)
    span = np.maximum(np.abs(phases_hi - phases_mid),
                      np.abs(phases_mid - phases_lo))
    for j, k in enumerate(idx):
        if span[j] < 0.15:
            out[k] = np.exp(1j * phases_mid[j]) * (hi[k] - lo[k]) / dx
        else:
            val = gk_adaptive(lambda x: np.exp(1j * profile.phase(x)),
                              lo[k], hi[k], abs_tol=1e-13)
            out[k] = val / dx
    return out


def _taper(xg: np.ndarray, setup: SetupSpec, config: OracleConfig) -> np.ndarray:
    half_window = config.window_periods * setup.d / 2.0
    tw = config.taper_periods * setup.d
    ax = np.abs(xg)
    taper = np.ones(len(xg))
    m = ax > (half_window - tw)
    taper[m] = 0.5 * (1.0 + np.cos(np.pi * (ax[m] - (half_window - tw)) / tw))
    return taper


@dataclass(frozen=True)
class _PatternBank:
    """Per-source-position fringe intensities, resolved over one source
    period (2 d) and one output period (d1)."""
    intensities: np.ndarray      # (output_points, n_bank)
    source_positions: np.ndarray
    slit_columns: np.ndarray     # bank columns inside first-grating slits
    x_out: np.ndarray
    d1: float
    source_span: float


def _build_bank(setup: SetupSpec, kin: Kinematics,
                particle: Optional[ParticleSpec],
                config: OracleConfig) -> _PatternBank:
    config.validate()
    d = setup.d
    d1 = setup.d1
    span = 2.0 * d                    # source periodicity of the fringe kernel
    xg, dx = _window_grid(setup, config)
    profile = transmission_profile(setup.grating2, kin, particle)
    t2 = _cell_averaged_transmission(profile, xg, dx) * _taper(xg, setup, config)

    f1 = setup.grating1.open_fraction
    per_d1 = int(math.ceil(config.source_points_per_slit / f1))
    n_bank = int(round(span / d1)) * per_d1
    xb = (np.arange(n_bank) + 0.5) / n_bank * span
    folded = np.abs((xb / d1 + 0.5) % 1.0 - 0.5)
    slit_columns = np.nonzero(folded < f1 / 2.0)[0]

    coef = kin.p_z / (2.0 * HBAR * setup.separation)
    psi1 = np.exp(1j * coef * (xg[:, None] - xb[None, :]) ** 2)
    fields = t2[:, None] * psi1
    x_out = np.arange(config.output_points) / config.output_points * d1
    intens = np.empty((config.output_points, n_bank))
    chunk = max(1, 2 ** 22 // len(xg))
    for start in range(0, config.output_points, chunk):
        xo = x_out[start:start + chunk]
        kern = np.exp(1j * coef * (xo[:, None] - xg[None, :]) ** 2)
        intens[start:start + chunk] = np.abs(kern @ fields) ** 2
    return _PatternBank(intensities=intens, source_positions=xb,
                        slit_columns=slit_columns, x_out=x_out, d1=d1,
                        source_span=span)


def _slit_sum(bank: _PatternBank, column_offset: float = 0.0) -> np.ndarray:
    """Incoherent sum over slit sources, displaced by a continuous offset
    (periodic linear interpolation across bank columns)."""
    n_bank = bank.intensities.shape[1]
    step = bank.source_span / n_bank
    shift = column_offset / step
    base = math.floor(shift)
    frac = shift - base
    cols_lo = (bank.slit_columns + base) % n_bank
    cols_hi = (bank.slit_columns + base + 1) % n_bank
    return ((1.0 - frac) * bank.intensities[:, cols_lo].sum(axis=1)
            + frac * bank.intensities[:, cols_hi].sum(axis=1))


def _as_pattern(x_out: np.ndarray, dens: np.ndarray, d1: float) -> Pattern:
    return Pattern(x=tuple(x_out), values=tuple(dens), period=d1)


def coherent_pattern_oracle(setup: SetupSpec, kin: Kinematics,
                            particle: Optional[ParticleSpec] = None,
                            config: OracleConfig = OracleConfig()) -> Pattern:
    """Transverse density at the third grating by direct propagation."""
    bank = _build_bank(setup, kin, particle, config)
    dens = _slit_sum(bank)
    return _as_pattern(bank.x_out, dens, bank.d1)


def window_convergence_check(setup: SetupSpec, kin: Kinematics,
                             particle: Optional[ParticleSpec],
                             config: OracleConfig,
                             tol: float = 1e-3) -> float:
    """L2 change of the coherent pattern under window/sampling doubling."""
    p1 = coherent_pattern_oracle(setup, kin, particle, config)
    big = replace(config, window_periods=2 * config.window_periods,
                  samples_per_period=2 * config.samples_per_period)
    p2 = coherent_pattern_oracle(setup, kin, particle, big)
    rep = compare(p1, p2)
    if rep.l2_error > tol:
        raise WindowError(f"oracle window not converged: L2 change "
                          f"{rep.l2_error:.2e} above {tol:g}")
    return rep.l2_error


# ---------------------------------------------------------------------------
# Monte-Carlo unraveling of decoherence events

def _kick_sampler(scenario: DecoherenceScenario, kin: Kinematics,
                  rng: np.random.Generator):
    """Inverse-CDF sampler for the transverse kick marginal of eta.

    The marginal density is the cosine transform of eta along x; it must
    be (numerically) nonnegative to admit a stochastic reading.
    """
    if scenario.mechanism == "thermal":
        raise UnsupportedScenarioError(
            "thermal kicks have a heavy-tailed marginal; the MC oracle "
            "supports collisional and custom scenarios")
    eta = scenario.eta
    probe = np.asarray(eta(np.array([0.0])))
    if np.max(np.abs(np.imag(probe))) > 1e-12:
        raise UnsupportedScenarioError("complex eta has no momentum-kick "
                                       "probability reading")
    # characteristic width: where eta first drops below 1/2
    grid = np.geomspace(1e-12, 1.0, 200)
    vals = np.real(np.asarray(eta(grid)))
    below = np.nonzero(vals < 0.5)[0]
    if below.size == 0:
        width = 1.0
    else:
        width = grid[below[0]]
    dx_max = width * 400.0
    dxs = np.linspace(0.0, dx_max, 2 ** 13)
    eta_tab = np.real(np.asarray(eta(dxs)))
    q_scale = HBAR / width
    qs = np.linspace(0.0, 12.0 * q_scale, 2 ** 10)
    # cosine transform -> symmetric marginal on q >= 0
    kernel = np.cos(np.outer(qs, dxs) / HBAR)
    rho = kernel @ (eta_tab * np.gradient(dxs)) / (math.pi * HBAR)
    if np.min(rho) < -0.02 * np.max(rho):
        raise UnsupportedScenarioError("eta transform is not a valid "
                                       "probability density")
    rho = np.clip(rho, 0.0, None)
    cdf = np.cumsum(rho)
    if cdf[-1] <= 0.0:
        raise UnsupportedScenarioError("eta transform has zero mass")
    cdf = cdf / cdf[-1]

    def sample(n: int) -> np.ndarray:
        u = rng.random(n)
        mags = np.interp(u, cdf, qs)
        signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        return signs * mags
    return sample


def _sample_events(scenario: DecoherenceScenario, length: float,
                   rng: np.random.Generator) -> np.ndarray:
    """Event positions from the inhomogeneous rate by thinning."""
    z_grid = np.linspace(0.0, length, 257)
    rates = np.asarray(scenario.rate_profile(z_grid), dtype=float)
    r_max = float(np.max(rates))
    if r_max <= 0.0:
        return np.empty(0)
    n_cand = rng.poisson(r_max * length)
    if n_cand == 0:
        return np.empty(0)
    z = rng.random(n_cand) * length
    accept = rng.random(n_cand) * r_max <= np.asarray(
        scenario.rate_profile(z), dtype=float)
    return z[accept]


def mc_decohered_pattern(setup: SetupSpec, kin: Kinematics,
                         scenario: DecoherenceScenario,
                         particle: Optional[ParticleSpec] = None,
                         config: OracleConfig = OracleConfig(),
                         seed: Optional[int] = None,
                         method: str = "reduced") -> Pattern:
    """Decohered density pattern from stochastic momentum-kick trajectories.

    Each trajectory samples event positions from R(z) and kicks from the
    eta marginal; ``method='reduced'`` applies the exact paraxial reduction
    of each kick to a source/pattern displacement, ``method='direct'``
    applies exp(i q x / hbar) to the field at the event plane (slow; meant
    for small cross-validation runs).  Trajectory intensities are averaged
    in a fixed order, so a given seed reproduces output bits.
    """
    rng = np.random.default_rng(config.seed if seed is None else seed)
    length = 2.0 * setup.separation
    full_localization = getattr(scenario.eta, "__qualname__", "").startswith(
        "_eta_full_localization")
    sampler = None
    if not full_localization:
        sampler = _kick_sampler(scenario, kin, rng)
    if method == "reduced":
        bank = _build_bank(setup, kin, particle, config)
        acc = np.zeros(config.output_points)
        for _ in range(config.mc_events):
            zs = _sample_events(scenario, length, rng)
            qs = sampler(len(zs)) if sampler is not None else None
            acc += _reduced_trajectory(bank, setup, kin, zs, qs, rng,
                                       full_localization)
        return _as_pattern(bank.x_out, acc / config.mc_events, bank.d1)
    if method == "direct":
        acc = None
        for _ in range(config.mc_events):
            zs = _sample_events(scenario, length, rng)
            qs = sampler(len(zs)) if sampler is not None else None
            if full_localization:
                raise UnsupportedScenarioError(
                    "the direct method needs finite kicks")
            events = sorted(zip(zs.tolist(), qs.tolist()))
            dens = _direct_pattern_with_events(setup, kin, particle, events,
                                               config)
            acc = dens if acc is None else acc + dens
        x_out = np.arange(config.output_points) / config.output_points * setup.d1
        return _as_pattern(x_out, acc / config.mc_events, setup.d1)
    raise ValidationError(f"method: unknown MC method {method!r}")


def _reduced_trajectory(bank: _PatternBank, setup: SetupSpec, kin: Kinematics,
                        zs: np.ndarray, qs: Optional[np.ndarray],
                        rng: np.random.Generator,
                        full_localization: bool) -> np.ndarray:
    L = setup.separation
    if full_localization:
        interior = (zs > 0.0) & (zs < 2.0 * L)
        if np.any(interior):
            sigma = rng.random() * bank.d1
        else:
            sigma = 0.0
        delta = 0.0
    else:
        pre = zs <= L
        delta = -np.sum(qs[pre] * zs[pre]) / kin.p_z
        sigma = np.sum(qs[~pre] * (2.0 * L - zs[~pre])) / kin.p_z
    dens = _slit_sum(bank, column_offset=delta)
    if sigma == 0.0:
        return dens
    # periodic linear interpolation of the output shift
    n = len(dens)
    shift = sigma / bank.d1 * n
    base = math.floor(shift)
    frac = shift - base
    rolled = np.roll(dens, base)
    return (1.0 - frac) * rolled + frac * np.roll(dens, base + 1)


def _direct_pattern_with_events(setup: SetupSpec, kin: Kinematics,
                                particle: Optional[ParticleSpec],
                                events: List[Tuple[float, float]],
                                config: OracleConfig) -> np.ndarray:
    """Literal field-level pipeline: propagate plane to plane, applying
    exp(i q x / hbar) at each event."""
    d = setup.d
    d1 = setup.d1
    L = setup.separation
    xg, dx = _window_grid(setup, config)
    profile = transmission_profile(setup.grating2, kin, particle)
    t2 = _cell_averaged_transmission(profile, xg, dx) * _taper(xg, setup, config)
    coef_of = lambda dist: kin.p_z / (2.0 * HBAR * dist)

    f1 = setup.grating1.open_fraction
    per_d1 = int(math.ceil(config.source_points_per_slit / f1))
    n_bank = int(round(2.0 * d / d1)) * per_d1
    xb = (np.arange(n_bank) + 0.5) / n_bank * (2.0 * d)
    folded = np.abs((xb / d1 + 0.5) % 1.0 - 0.5)
    sources = xb[folded < f1 / 2.0]
    x_out = np.arange(config.output_points) / config.output_points * d1

    # events at z = 0 or z = 2L only add constant or output phases
    planes = sorted((z, q) for z, q in events if 0.0 < z < 2.0 * L)
    pre = [(z, q) for z, q in planes if z <= L]
    post = [(z, q) for z, q in planes if z > L]
    acc = np.zeros(config.output_points)
    for x_s in sources:
        # analytic point-source wave up to the first plane of interest
        z_first = pre[0][0] if pre else L
        field = np.exp(1j * coef_of(z_first) * (xg - x_s) ** 2)
        z_cur = z_first
        for i, (z_e, q) in enumerate(pre):
            field = field * np.exp(1j * q * xg / HBAR)
            z_next = pre[i + 1][0] if i + 1 < len(pre) else L
            field = _free_hop(field, xg, z_next - z_cur, kin)
            z_cur = z_next
        field = t2 * field
        z_cur = L
        for z_e, q in post:
            field = _free_hop(field, xg, z_e - z_cur, kin)
            field = field * np.exp(1j * q * xg / HBAR)
            z_cur = z_e
        out = _quad_transform(field, xg, x_out, 2.0 * L - z_cur, kin) * dx
        acc += np.abs(out) ** 2
    return acc


def _free_hop(field: np.ndarray, xg: np.ndarray, dist: float,
              kin: Kinematics) -> np.ndarray:
    if dist <= 0.0:
        return field
    dx = xg[1] - xg[0]
    return _quad_transform(field, xg, xg, dist, kin) * dx * np.sqrt(
        kin.p_z / (2.0 * math.pi * HBAR * dist))


def _quad_transform(field: np.ndarray, x_in: np.ndarray, x_out: np.ndarray,
                    dist: float, kin: Kinematics) -> np.ndarray:
    coef = kin.p_z / (2.0 * HBAR * dist)
    chunk = max(1, 2 ** 22 // len(x_in))
    out = np.empty(len(x_out), dtype=complex)
    for start in range(0, len(x_out), chunk):
        xo = x_out[start:start + chunk]
        kern = np.exp(1j * coef * (xo[:, None] - x_in[None, :]) ** 2)
        out[start:start + chunk] = kern @ field
    return out


# ---------------------------------------------------------------------------
# pattern comparison

def compare(pattern_a: Pattern, pattern_b: Pattern) -> CompareReport:
    """Mean-normalized comparison over one period: relative L2 error and
    the visibility difference."""
    xa, va = pattern_a.as_arrays()
    xb, vb = pattern_b.as_arrays()
    mean_a = np.mean(va)
    mean_b = np.mean(vb)
    if mean_a <= 0.0 or mean_b <= 0.0:
        raise ValidationError("compare: patterns must have positive mean")
    na = va / mean_a
    # resample b onto a's grid, periodic in its own period
    phase = (xa % pattern_b.period) / pattern_b.period
    xb_frac = (xb % pattern_b.period) / pattern_b.period
    order = np.argsort(xb_frac)
    xb_sorted = xb_frac[order]
    vb_sorted = (vb / mean_b)[order]
    xb_ext = np.concatenate([xb_sorted, xb_sorted[:1] + 1.0])
    vb_ext = np.concatenate([vb_sorted, vb_sorted[:1]])
    nb = np.interp(phase, xb_ext, vb_ext)
    l2 = float(np.sqrt(np.mean((na - nb) ** 2)))
    return CompareReport(l2_error=l2,
                         visibility_difference=float(
                             pattern_a.visibility - pattern_b.visibility))
