"""Decoherence mechanisms: event rates, decoherence functions, and the
resulting suppression of fringe coefficients.

Each mechanism factorizes into a rate of independent environment events
along the beam line and a per-event decoherence function eta(dx) acting on
transverse coherences.  Fringe coefficients of order m pick up the factor
exp(-integral R(z) [1 - eta(-m (d/2) (L-|z-L|)/L_T)] dz); thermal emission
uses the wavelength-resolved form of the same integral.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Sequence, Tuple

import numpy as np

from .constants import (BOLTZMANN, ELECTRON_MASS, ELEMENTARY_CHARGE, HBAR,
                        SPEED_OF_LIGHT, VACUUM_PERMITTIVITY)
from .model import (CoeffSet, Kinematics, SetupSpec, ValidationError)
from .quadrature import gk_adaptive

__all__ = [
    "GasSpec", "AbsorptionModel", "ThermalSpec", "DecoherenceScenario",
    "eta_collisional", "sigma_total_vdw", "sigma_eff", "c6_slater_kirkwood",
    "collision_rate_profile", "collision_scenario", "thermal_spectral_rate",
    "cooling_profile", "thermal_scenario", "custom_scenario", "event_kernel",
    "suppression_exponent", "suppression_factor", "apply_decoherence",
    "reduced_visibility", "eta_thermal",
]

EXPONENT_ABS_TOL = 1e-12
OMEGA_TAIL_X = 60.0          # hbar w / kB T beyond which emission is negligible
THERMAL_Z_NODES = 64


@dataclass(frozen=True)
class GasSpec:
    """Background gas responsible for collisional decoherence."""
    mass: float                       # kg
    temperature: float                # K
    pressure: float                   # Pa
    polarizability: float = 0.0       # m^3 (volume units)
    valence_electrons: float = 0.0
    C6: Optional[float] = None        # J m^6 override
    model: Literal["isotropic", "full_localization", "tabulated"] = "isotropic"
    amplitude_table: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None

    def validate(self) -> "GasSpec":
        for name in ("mass", "temperature"):
            if getattr(self, name) <= 0.0:
                raise ValidationError(f"gas.{name}: must be positive")
        if self.pressure < 0.0:
            raise ValidationError("gas.pressure: must be nonnegative")
        if self.model == "tabulated":
            if self.amplitude_table is None:
                raise ValidationError("gas.amplitude_table: required for the "
                                      "tabulated model")
            cos_t, amp = self.amplitude_table
            if len(cos_t) < 2 or len(cos_t) != len(amp):
                raise ValidationError("gas.amplitude_table: needs two columns "
                                      "of equal length >= 2")
            if any(b <= a for a, b in zip(cos_t, cos_t[1:])):
                raise ValidationError("gas.amplitude_table: abscissa must be "
                                      "strictly increasing")
            if min(amp) < 0.0:
                raise ValidationError("gas.amplitude_table: amplitudes must "
                                      "be nonnegative")
        elif self.model not in ("isotropic", "full_localization"):
            raise ValidationError(f"gas.model: unknown model {self.model!r}")
        return self

    @property
    def thermal_velocity(self) -> float:
        """Most probable gas speed (2 kB T / m)^(1/2)."""
        return math.sqrt(2.0 * BOLTZMANN * self.temperature / self.mass)

    @property
    def thermal_momentum(self) -> float:
        return self.mass * self.thermal_velocity

    @property
    def number_density(self) -> float:
        return self.pressure / (BOLTZMANN * self.temperature)


@dataclass(frozen=True)
class AbsorptionModel:
    """Photon absorption cross section sigma_abs(omega)."""
    kind: Literal["constant", "power_law", "tabulated"] = "constant"
    sigma0: float = 0.0               # m^2
    exponent: float = 0.0
    omega0: float = 1.0               # rad/s reference for the power law
    table: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None

    def validate(self) -> "AbsorptionModel":
        if self.kind in ("constant", "power_law"):
            if self.sigma0 < 0.0:
                raise ValidationError("thermal.sigma0: must be nonnegative")
            if self.kind == "power_law" and self.omega0 <= 0.0:
                raise ValidationError("thermal.omega0: must be positive")
        elif self.kind == "tabulated":
            if self.table is None:
                raise ValidationError("thermal.table: required for the "
                                      "tabulated cross section")
            w, s = self.table
            if len(w) < 2 or len(w) != len(s):
                raise ValidationError("thermal.table: needs two columns of "
                                      "equal length >= 2")
            if any(b <= a for a, b in zip(w, w[1:])):
                raise ValidationError("thermal.table: abscissa must be "
                                      "strictly increasing")
            if min(s) < 0.0:
                raise ValidationError("thermal.table: cross sections must be "
                                      "nonnegative")
        else:
            raise ValidationError(f"thermal.kind: unknown kind {self.kind!r}")
        return self

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        if self.kind == "constant":
            return np.full_like(omega, self.sigma0)
        if self.kind == "power_law":
            return self.sigma0 * (omega / self.omega0) ** self.exponent
        w, s = self.table
        return np.interp(omega, w, s, left=0.0, right=0.0)


@dataclass(frozen=True)
class ThermalSpec:
    """Internal heat bath driving thermal photon emission."""
    T_star: float                     # K, microcanonical temperature
    heat_capacity: float              # J/K
    absorption: AbsorptionModel = field(default_factory=AbsorptionModel)
    enable_cooling: bool = False

    def validate(self) -> "ThermalSpec":
        if self.T_star <= 0.0:
            raise ValidationError("thermal.T_star: must be positive")
        if self.heat_capacity <= 0.0:
            raise ValidationError("thermal.heat_capacity: must be positive")
        self.absorption.validate()
        return self

    @property
    def dimensionless_heat_capacity(self) -> float:
        return self.heat_capacity / BOLTZMANN


@dataclass(frozen=True)
class DecoherenceScenario:
    """One environment mechanism: event rate along z plus its eta(dx).

    ``rate_profile`` takes z in [0, 2L] (vectorized) and returns events per
    meter.  ``eta`` takes transverse separations (vectorized) and returns
    the complex coherence survival per event.  Thermal scenarios carry the
    spectral machinery needed for the wavelength-resolved exponent.
    """
    mechanism: Literal["collisional", "thermal", "custom"]
    rate_profile: Callable
    eta: Callable
    thermal: Optional[ThermalSpec] = None
    v_z: float = 0.0
    temperature_profile: Optional[Callable] = None


# ---------------------------------------------------------------------------
# collisional pieces

def _eta_isotropic(thermal_momentum: float):
    """Maxwell-Boltzmann isotropic-scattering decoherence function.

    The momentum average of sinc^2(P dx / hbar) over the thermal magnitude
    distribution evaluates in closed form to (1 - exp(-a^2)) / a^2 with
    a = P_T dx / hbar.
    """
    def eta(dx):
        a = np.abs(np.asarray(dx, dtype=float)) * thermal_momentum / HBAR
        out = np.ones_like(a)
        small = a < 1e-6
        big = ~small
        ab = a[big]
        out[big] = -np.expm1(-ab * ab) / (ab * ab)
        out[small] = 1.0 - a[small] ** 2 / 2.0
        return out
    return eta


def _eta_full_localization():
    def eta(dx):
        dx = np.asarray(dx, dtype=float)
        return np.where(dx == 0.0, 1.0, 0.0)
    return eta


def _eta_tabulated(gas: GasSpec):
    cos_t = np.asarray(gas.amplitude_table[0], dtype=float)
    amp = np.asarray(gas.amplitude_table[1], dtype=float)
    # refine the angular grid for the trapezoid sum
    cos_fine = np.linspace(cos_t[0], cos_t[-1], 2048)
    amp_fine = np.interp(cos_fine, cos_t, amp)
    norm = np.trapz(amp_fine, cos_fine)
    if norm <= 0.0:
        raise ValidationError("gas.amplitude_table: zero total cross section")
    half_angle = np.sqrt(np.maximum((1.0 - cos_fine) / 2.0, 0.0))
    p_t = gas.thermal_momentum

    def eta(dx):
        dx = np.atleast_1d(np.asarray(dx, dtype=float))
        out = np.empty(len(dx))
        for i, d in enumerate(dx):
            def integrand(t):
                t = np.asarray(t)
                nu = 4.0 / math.sqrt(math.pi) * t * t * np.exp(-t * t)
                arg = np.outer(t, half_angle) * (2.0 * p_t * abs(d) / HBAR)
                sc = np.ones_like(arg)
                nz = arg != 0.0
                sc[nz] = np.sin(arg[nz]) / arg[nz]
                angular = np.trapz(sc * amp_fine[None, :], cos_fine, axis=1)
                return nu * angular / norm
            out[i] = np.real(gk_adaptive(integrand, 0.0, 6.0, abs_tol=1e-12))
        return out if out.size > 1 else float(out[0])
    return eta


def eta_collisional(delta_x, gas: GasSpec, model: Optional[str] = None):
    """Single-collision decoherence function at transverse separation dx.

    Momentum-transfer average over the thermal gas; the isotropic model
    uses the closed-form Maxwell-Boltzmann result, the full-localization
    model is the indicator at zero separation, and tabulated angular
    amplitudes are integrated numerically.
    """
    gas.validate()
    model = model or gas.model
    if model == "isotropic":
        fn = _eta_isotropic(gas.thermal_momentum)
    elif model == "full_localization":
        fn = _eta_full_localization()
    elif model == "tabulated":
        fn = _eta_tabulated(gas)
    else:
        raise ValidationError(f"gas.model: unknown model {model!r}")
    return fn(delta_x)


_SIGMA_PREFACTOR = math.pi ** 2 / (math.gamma(0.4) * math.sin(math.pi / 5.0))


def sigma_total_vdw(C6: float, v: float) -> float:
    """Total vdW cross section pi^2/(Gamma(2/5) sin(pi/5)) (3 pi C6/8 hbar v)^(2/5)."""
    if C6 <= 0.0 or v <= 0.0:
        raise ValidationError("sigma_total_vdw: C6 and v must be positive")
    return _SIGMA_PREFACTOR * (3.0 * math.pi * C6 / (8.0 * HBAR * v)) ** 0.4


def sigma_eff(v_p: float, gas: GasSpec, C6: float) -> float:
    """Velocity-averaged effective cross section, slow-particle asymptotics.

    sigma_eff = 4 pi Gamma(9/10) / (5 sin(pi/5)) (3 pi C6 / 2 hbar)^(2/5)
    * v_g^(3/5) / v_p * [1 + (1/5)(v_p/v_g)^2].
    """
    if v_p <= 0.0 or C6 <= 0.0:
        raise ValidationError("sigma_eff: v_p and C6 must be positive")
    v_g = gas.thermal_velocity
    if v_p >= v_g:
        warnings.warn(
            f"sigma_eff: v_p = {v_p:g} m/s is not small against the gas "
            f"velocity {v_g:g} m/s; the asymptotic form is out of regime",
            stacklevel=2)
    x = v_p / v_g
    pref = 4.0 * math.pi * math.gamma(0.9) / (5.0 * math.sin(math.pi / 5.0))
    return (pref * (3.0 * math.pi * C6 / (2.0 * HBAR)) ** 0.4
            * v_g ** 0.6 / v_p * (1.0 + 0.2 * x * x))


def c6_slater_kirkwood(gas: GasSpec, particle) -> float:
    """Slater-Kirkwood estimate of the particle-gas C6 from the static
    polarizabilities (volume units) and valence electron counts."""
    if gas.valence_electrons <= 0.0 or particle.valence_electrons <= 0.0:
        raise ValidationError("c6_slater_kirkwood: valence electron counts "
                              "must be positive")
    if gas.polarizability <= 0.0 or particle.static_polarizability <= 0.0:
        raise ValidationError("c6_slater_kirkwood: polarizabilities must be "
                              "positive")
    pref = 1.5 * ELEMENTARY_CHARGE * HBAR / math.sqrt(
        4.0 * math.pi * VACUUM_PERMITTIVITY * ELECTRON_MASS)
    a_g = gas.polarizability
    a_p = particle.static_polarizability
    return pref * a_g * a_p / (
        math.sqrt(a_g / gas.valence_electrons)
        + math.sqrt(a_p / particle.valence_electrons))


def collision_rate_profile(gas: GasSpec, sigma_effective: float):
    """Constant event rate per unit length, R(z) = n sigma_eff."""
    rate = gas.number_density * sigma_effective

    def profile(z):
        return np.full_like(np.asarray(z, dtype=float), rate)
    profile.rate = rate
    return profile


def collision_scenario(gas: GasSpec, particle, kin: Kinematics,
                       C6: Optional[float] = None) -> DecoherenceScenario:
    """Background-gas scenario at the given particle velocity."""
    gas.validate()
    if gas.mass > particle.mass / 10.0:
        warnings.warn("collision_scenario: gas mass is not small against the "
                      "particle mass; the heavy-particle limit degrades",
                      stacklevel=2)
    c6 = C6 if C6 is not None else (
        gas.C6 if gas.C6 is not None else c6_slater_kirkwood(gas, particle))
    sig = sigma_eff(kin.v_z, gas, c6)
    profile = collision_rate_profile(gas, sig)
    if gas.model == "isotropic":
        eta = _eta_isotropic(gas.thermal_momentum)
    elif gas.model == "full_localization":
        eta = _eta_full_localization()
    else:
        eta = _eta_tabulated(gas)
    return DecoherenceScenario(mechanism="collisional", rate_profile=profile,
                               eta=eta, v_z=kin.v_z)


def custom_scenario(rate_profile: Callable, eta: Callable) -> DecoherenceScenario:
    """User-supplied mechanism; both callables must be vectorized."""
    return DecoherenceScenario(mechanism="custom", rate_profile=rate_profile,
                               eta=eta)


# ---------------------------------------------------------------------------
# thermal pieces

def thermal_spectral_rate(omega, thermal: ThermalSpec,
                          temperature: Optional[float] = None):
    """Spectral photon emission rate R_w (per second per unit angular
    frequency): mode density times absorption cross section times the
    finite-bath statistical factor exp(-x - x^2 / (2 C_V')) with
    x = hbar w / kB T*."""
    T = thermal.T_star if temperature is None else temperature
    if T <= 0.0:
        raise ValidationError("thermal: temperature must be positive")
    omega = np.asarray(omega, dtype=float)
    x = HBAR * omega / (BOLTZMANN * T)
    cv = thermal.dimensionless_heat_capacity
    stat = np.exp(-x - x * x / (2.0 * cv))
    return omega ** 2 / (math.pi ** 2 * SPEED_OF_LIGHT ** 2) \
        * thermal.absorption(omega) * stat


def _emitted_power(thermal: ThermalSpec, T: float) -> float:
    """integral hbar w R_w dw (W) at internal temperature T."""
    omega_max = OMEGA_TAIL_X * BOLTZMANN * T / HBAR
    if thermal.absorption.kind == "tabulated":
        omega_max = min(omega_max, thermal.absorption.table[0][-1])

    def integrand(omega):
        return HBAR * np.asarray(omega) * thermal_spectral_rate(
            omega, thermal, T)

    scale = max(abs(float(integrand(np.array([
        BOLTZMANN * T / HBAR * 3.0]))[0])) * omega_max, 1e-300)
    return float(np.real(gk_adaptive(integrand, 0.0, omega_max,
                                     abs_tol=1e-10 * scale)))


def total_emission_rate(thermal: ThermalSpec, T: Optional[float] = None) -> float:
    """integral R_w dw (photons per second)."""
    T = thermal.T_star if T is None else T
    omega_max = OMEGA_TAIL_X * BOLTZMANN * T / HBAR
    if thermal.absorption.kind == "tabulated":
        omega_max = min(omega_max, thermal.absorption.table[0][-1])

    def integrand(omega):
        return thermal_spectral_rate(omega, thermal, T)
    scale = max(abs(float(integrand(np.array([
        BOLTZMANN * T / HBAR * 3.0]))[0])) * omega_max, 1e-300)
    return float(np.real(gk_adaptive(integrand, 0.0, omega_max,
                                     abs_tol=1e-10 * scale)))


def cooling_profile(thermal: ThermalSpec, v_z: float, length: float,
                    steps: int = 64, check_tol: float = 1e-6):
    """Internal temperature along the beam line under radiative cooling.

    Integrates dT/dz = -(1 / v_z C_V) integral hbar w R_w(w, T) dw with a
    fixed-step fourth-order Runge-Kutta scheme; a step-halving run must
    agree to ``check_tol`` relative.  Returns (z_table, T_table).
    """
    thermal.validate()
    if v_z <= 0.0 or length <= 0.0:
        raise ValidationError("cooling_profile: v_z and length must be positive")

    def rhs(T):
        if T <= 0.0:
            raise ValidationError("cooling_profile: temperature dropped to "
                                  "zero; model breakdown")
        return -_emitted_power(thermal, T) / (v_z * thermal.heat_capacity)

    def integrate(n):
        h = length / n
        z = np.linspace(0.0, length, n + 1)
        T = np.empty(n + 1)
        T[0] = thermal.T_star
        for i in range(n):
            k1 = rhs(T[i])
            k2 = rhs(T[i] + 0.5 * h * k1)
            k3 = rhs(T[i] + 0.5 * h * k2)
            k4 = rhs(T[i] + h * k3)
            T[i + 1] = T[i] + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if T[i + 1] <= 0.0:
                raise ValidationError("cooling_profile: temperature dropped "
                                      "below zero; model breakdown")
        return z, T

    z1, t1 = integrate(steps)
    z2, t2 = integrate(2 * steps)
    if np.max(np.abs(t2[::2] - t1)) > check_tol * thermal.T_star:
        raise ValidationError("cooling_profile: step-halving check failed; "
                              "increase the step count")
    return z2, t2


def eta_thermal(delta_x, thermal: ThermalSpec,
                temperature: Optional[float] = None):
    """Single-emission decoherence function: spectral average of
    sinc(dx * w / c)."""
    T = thermal.T_star if temperature is None else temperature
    omega_max = OMEGA_TAIL_X * BOLTZMANN * T / HBAR
    if thermal.absorption.kind == "tabulated":
        omega_max = min(omega_max, thermal.absorption.table[0][-1])
    total = total_emission_rate(thermal, T)
    if total <= 0.0:
        raise ValidationError("eta_thermal: zero emission rate")
    dx_arr = np.atleast_1d(np.asarray(delta_x, dtype=float))
    out = np.empty(len(dx_arr))
    for i, d in enumerate(dx_arr):
        if d == 0.0:
            out[i] = 1.0
            continue

        def integrand(omega):
            omega = np.asarray(omega)
            arg = np.abs(d) * omega / SPEED_OF_LIGHT
            sc = np.ones_like(arg)
            nz = arg != 0.0
            sc[nz] = np.sin(arg[nz]) / arg[nz]
            return thermal_spectral_rate(omega, thermal, T) * sc
        val = np.real(gk_adaptive(integrand, 0.0, omega_max,
                                  abs_tol=1e-12 * total * omega_max
                                  / max(omega_max, 1.0)))
        out[i] = val / total
    return out if out.size > 1 else float(out[0])


def thermal_scenario(thermal: ThermalSpec, kin: Kinematics, length: float
                     ) -> DecoherenceScenario:
    """Heat-radiation scenario; rates are per unit time and are divided by
    the longitudinal velocity inside the exponent."""
    thermal.validate()
    temperature_profile = None
    if thermal.enable_cooling:
        z_tab, t_tab = cooling_profile(thermal, kin.v_z, length)
        def temperature_profile(z):
            return np.interp(np.asarray(z, dtype=float), z_tab, t_tab)

    def rate_profile(z):
        # events per meter: total spontaneous rate / v_z
        z = np.asarray(z, dtype=float)
        if temperature_profile is None:
            return np.full_like(z, total_emission_rate(thermal) / kin.v_z)
        return np.array([total_emission_rate(thermal, float(t)) / kin.v_z
                         for t in np.atleast_1d(temperature_profile(z))])

    def eta(dx):
        return eta_thermal(dx, thermal)

    return DecoherenceScenario(mechanism="thermal", rate_profile=rate_profile,
                               eta=eta, thermal=thermal, v_z=kin.v_z,
                               temperature_profile=temperature_profile)


# ---------------------------------------------------------------------------
# suppression of fringe coefficients

def _path_separation(m: int, setup: SetupSpec, kin: Kinematics, u):
    """eta argument -m (d/2) u / L_T for distance-to-nearest-end u."""
    return -m * setup.d / 2.0 * np.asarray(u) / kin.talbot_length


def event_kernel(m: int, z: float, scenario: DecoherenceScenario,
                 setup: SetupSpec, kin: Kinematics) -> complex:
    """1 - eta at the path separation probed by an event at position z."""
    L = setup.separation
    u = L - abs(z - L)
    if scenario.mechanism == "thermal":
        T = (scenario.temperature_profile(z)
             if scenario.temperature_profile is not None else None)
        eta_val = eta_thermal(
            abs(_path_separation(m, setup, kin, u)), scenario.thermal,
            float(T) if T is not None else None)
        return 1.0 - eta_val
    return complex(1.0 - np.asarray(
        scenario.eta(_path_separation(m, setup, kin, u))).item())


def suppression_exponent(m: int, scenario: DecoherenceScenario,
                         setup: SetupSpec, kin: Kinematics,
                         abs_tol: float = EXPONENT_ABS_TOL) -> complex:
    """integral_0^{2L} R(z) [1 - eta(path separation at z)] dz.

    Exploits the symmetry of the path separation about the second grating.
    Thermal scenarios evaluate the wavelength-resolved double integral with
    the emission rate taken at the local internal temperature.
    """
    if m == 0:
        return 0.0 + 0.0j
    L = setup.separation
    if scenario.mechanism == "thermal":
        return _thermal_exponent(m, scenario, setup, kin)

    def integrand(u):
        u = np.asarray(u, dtype=float)
        rates = np.asarray(scenario.rate_profile(u)) + \
            np.asarray(scenario.rate_profile(2.0 * L - u))
        etas = np.asarray(scenario.eta(_path_separation(m, setup, kin, u)))
        return rates * (1.0 - etas)

    scale = max(float(np.abs(np.asarray(
        scenario.rate_profile(np.array([L]))))) * 2.0 * L, 1e-300)
    return complex(gk_adaptive(integrand, 0.0, L, abs_tol=abs_tol * scale))


def _thermal_exponent(m: int, scenario: DecoherenceScenario,
                      setup: SetupSpec, kin: Kinematics) -> complex:
    thermal = scenario.thermal
    L = setup.separation
    # Gauss-Legendre along the beam line; the inner frequency integral is
    # adaptive with the exponential emission tail bounding the domain.
    x, w = np.polynomial.legendre.leggauss(THERMAL_Z_NODES)
    z_nodes = L + L * x            # covers [0, 2L]
    z_weights = L * w
    total = 0.0
    for z, wz in zip(z_nodes, z_weights):
        T = (float(scenario.temperature_profile(z))
             if scenario.temperature_profile is not None else thermal.T_star)
        sep = abs(float(_path_separation(m, setup, kin, L - abs(z - L))))
        omega_max = OMEGA_TAIL_X * BOLTZMANN * T / HBAR
        if thermal.absorption.kind == "tabulated":
            omega_max = min(omega_max, thermal.absorption.table[0][-1])

        def integrand(omega):
            omega = np.asarray(omega)
            arg = sep * omega / SPEED_OF_LIGHT
            sc = np.ones_like(arg)
            nz = arg != 0.0
            sc[nz] = np.sin(arg[nz]) / arg[nz]
            return thermal_spectral_rate(omega, thermal, T) * (1.0 - sc)

        ref = total_emission_rate(thermal, T)
        inner = float(np.real(gk_adaptive(
            integrand, 0.0, omega_max, abs_tol=1e-12 * max(ref, 1e-300)
            * omega_max / max(omega_max, 1.0))))
        total += wz * inner
    return complex(total / scenario.v_z)


def suppression_factor(scenarios: Sequence[DecoherenceScenario],
                       setup: SetupSpec, kin: Kinematics) -> Callable[[int], complex]:
    """Per-order multiplier prod_s exp(-exponent_s(m)) for the fringe
    coefficients; hermitian in the order index."""
    cache: dict[int, complex] = {}

    def factor(m: int) -> complex:
        key = abs(m)
        if key not in cache:
            total = 0.0 + 0.0j
            for sc in scenarios:
                total += suppression_exponent(key, sc, setup, kin)
            cache[key] = np.exp(-total)
        val = cache[key]
        return val if m >= 0 else np.conj(val)
    return factor


def apply_decoherence(coeffs: CoeffSet, scenarios: Sequence[DecoherenceScenario],
                      setup: SetupSpec, kin: Kinematics) -> CoeffSet:
    """Multiply each coefficient by its per-mechanism survival factors."""
    if not scenarios:
        return coeffs
    factor = suppression_factor(scenarios, setup, kin)
    arr = coeffs.as_array()
    order = coeffs.max_order
    vals = tuple(arr[i] * factor(i - order) for i in range(len(arr)))
    return CoeffSet(values=vals, regime=coeffs.regime, stage="decohered")


def reduced_visibility(v0: float, scenario: DecoherenceScenario,
                       setup: SetupSpec, kin: Kinematics) -> float:
    """Sinusoidal-signal shortcut: V = V0 exp(-integral R [1 - eta(-d u/L_T)]).

    Valid when only the first signal harmonic matters (equal periods,
    open fraction near one half); the path separation is the one probed by
    the second-order coefficient.
    """
    L = setup.separation
    if scenario.mechanism == "thermal":
        exponent = _thermal_exponent(2, scenario, setup, kin)
        return float(v0 * math.exp(-float(np.real(exponent))))

    def integrand(u):
        u = np.asarray(u, dtype=float)
        rates = np.asarray(scenario.rate_profile(u)) + \
            np.asarray(scenario.rate_profile(2.0 * L - u))
        etas = np.asarray(scenario.eta(
            -setup.d * np.asarray(u) / kin.talbot_length))
        return rates * (1.0 - etas)

    scale = max(float(np.abs(np.asarray(
        scenario.rate_profile(np.array([L]))))) * 2.0 * L, 1e-300)
    exponent = gk_adaptive(integrand, 0.0, L, abs_tol=EXPONENT_ABS_TOL * scale)
    return float(v0 * math.exp(-float(np.real(exponent))))
