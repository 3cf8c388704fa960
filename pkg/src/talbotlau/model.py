"""Domain types and derived kinematics for the three-grating interferometer.

All quantities are SI; the config layer converts from lab units.  Types are
frozen dataclasses: validation happens once, after which instances can be
shared freely between workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Literal, Optional, Tuple

import numpy as np

from .constants import AMU, PLANCK

__all__ = [
    "ValidationError", "ParticleSpec", "BeamSpec", "MaterialInteraction",
    "LightGratingSpec", "GratingSpec", "SetupSpec", "Kinematics", "CoeffSet",
    "Pattern", "derive_kinematics", "validate_setup",
]

RELATIVE_SLACK = 1e-12


class ValidationError(ValueError):
    """A domain invariant is violated; the message carries the field path."""


def _require(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ValidationError(f"{path}: {message}")


@dataclass(frozen=True)
class ParticleSpec:
    """Interfering particle: mass and polarizabilities (volume units, m^3)."""
    mass: float                                  # kg
    static_polarizability: float = 0.0           # m^3
    dynamic_polarizability_at_laser: float = 0.0  # m^3
    valence_electrons: float = 0.0
    heat_capacity: float = 0.0                   # J/K
    initial_internal_temperature: float = 0.0    # K

    def validate(self) -> "ParticleSpec":
        _require(self.mass >= AMU * (1 - RELATIVE_SLACK), "particle.mass",
                 f"must be at least 1 amu, got {self.mass / AMU:g} amu")
        for name in ("static_polarizability", "dynamic_polarizability_at_laser",
                     "valence_electrons", "heat_capacity",
                     "initial_internal_temperature"):
            _require(getattr(self, name) >= 0.0, f"particle.{name}",
                     "must be nonnegative")
        return self


@dataclass(frozen=True)
class BeamSpec:
    """Longitudinal velocity distribution of the stationary beam."""
    kind: Literal["delta", "gaussian", "tabulated"] = "delta"
    v_mean: float = 0.0        # m/s (delta value or gaussian mean)
    v_sigma: float = 0.0       # m/s (gaussian width)
    table: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None
    flux_weighted: bool = False
    nodes: int = 64

    def validate(self) -> "BeamSpec":
        if self.kind == "delta":
            _require(self.v_mean > 0.0, "beam.v_mean", "must be positive")
        elif self.kind == "gaussian":
            _require(self.v_mean > 0.0, "beam.v_mean", "must be positive")
            _require(self.v_sigma > 0.0, "beam.v_sigma", "must be positive")
            _require(self.nodes >= 2, "beam.nodes", "needs at least 2 nodes")
        elif self.kind == "tabulated":
            _require(self.table is not None, "beam.table",
                     "tabulated distribution needs a table")
            v, w = self.table
            _require(len(v) == len(w) and len(v) >= 2, "beam.table",
                     "needs two columns of equal length >= 2")
            _require(all(b > a for a, b in zip(v, v[1:])), "beam.table",
                     "velocity abscissa must be strictly increasing")
            _require(min(v) > 0.0, "beam.table",
                     "distribution support must be strictly positive")
            _require(min(w) >= 0.0 and max(w) > 0.0, "beam.table",
                     "weights must be nonnegative and not all zero")
        else:
            raise ValidationError(f"beam.kind: unknown kind {self.kind!r}")
        return self


@dataclass(frozen=True)
class MaterialInteraction:
    """Dispersion-force law between the particle and the grating walls."""
    law: Literal["none", "vdw_c3", "retarded_c4"] = "none"
    C3: float = 0.0            # J m^3
    C4: float = 0.0            # J m^4
    wall_cutoff: float = 0.0   # m; 0 means the default period/2000
    # phase winding beyond this is treated as opaque (see gratings module)
    phase_cap: float = 2000.0 * math.pi  # rad

    def validate(self, path: str = "interaction") -> "MaterialInteraction":
        _require(self.law in ("none", "vdw_c3", "retarded_c4"), f"{path}.law",
                 f"unknown law {self.law!r}")
        _require(self.C3 >= 0.0, f"{path}.C3", "must be nonnegative")
        _require(self.C4 >= 0.0, f"{path}.C4", "must be nonnegative")
        _require(self.wall_cutoff >= 0.0, f"{path}.wall_cutoff",
                 "must be nonnegative")
        _require(self.phase_cap > 0.0, f"{path}.phase_cap", "must be positive")
        return self


@dataclass(frozen=True)
class LightGratingSpec:
    """Standing light wave acting as a pure phase grating."""
    laser_power: float         # W
    waist: float               # m
    laser_wavelength: float    # m

    def validate(self, path: str = "light") -> "LightGratingSpec":
        for name in ("laser_power", "waist", "laser_wavelength"):
            _require(getattr(self, name) > 0.0, f"{path}.{name}",
                     "must be positive")
        return self


@dataclass(frozen=True)
class GratingSpec:
    period: float              # m
    open_fraction: float = 0.5
    thickness: float = 0.0     # m
    kind: Literal["binary", "light"] = "binary"
    interaction: MaterialInteraction = field(default_factory=MaterialInteraction)
    light: Optional[LightGratingSpec] = None

    def validate(self, path: str = "grating") -> "GratingSpec":
        _require(self.period > 0.0, f"{path}.period", "must be positive")
        if self.kind == "binary":
            _require(0.0 < self.open_fraction < 1.0, f"{path}.open_fraction",
                     f"must lie in (0, 1), got {self.open_fraction!r}")
            _require(self.thickness >= 0.0, f"{path}.thickness",
                     "must be nonnegative")
            self.interaction.validate(f"{path}.interaction")
            cutoff = self.effective_wall_cutoff()
            _require(cutoff < self.open_fraction * self.period / 2.0,
                     f"{path}.interaction.wall_cutoff",
                     "must be smaller than the open slit half-width")
        elif self.kind == "light":
            _require(self.light is not None, f"{path}.light",
                     "light grating needs laser parameters")
            self.light.validate(f"{path}.light")
            half_wavelength = self.light.laser_wavelength / 2.0
            _require(abs(self.period - half_wavelength)
                     <= RELATIVE_SLACK * half_wavelength, f"{path}.period",
                     "must equal half the laser wavelength")
        else:
            raise ValidationError(f"{path}.kind: unknown kind {self.kind!r}")
        return self

    def effective_wall_cutoff(self) -> float:
        """Geometric opacity margin next to each wall (m)."""
        if self.interaction.wall_cutoff > 0.0:
            return self.interaction.wall_cutoff
        return self.period / 2000.0


@dataclass(frozen=True)
class SetupSpec:
    """Symmetric three-grating geometry: equal separations, d1 = 2 d2 / r."""
    grating1: GratingSpec
    grating2: GratingSpec
    grating3: GratingSpec
    separation: float          # m, distance between adjacent gratings
    period_ratio: int = 2      # r in d1 = 2 d2 / r

    def validate(self) -> "SetupSpec":
        self.grating1.validate("gratings.1")
        self.grating2.validate("gratings.2")
        self.grating3.validate("gratings.3")
        _require(self.separation > 0.0, "setup.separation", "must be positive")
        _require(self.period_ratio >= 1 and
                 self.period_ratio == int(self.period_ratio),
                 "setup.period_ratio", "must be a positive integer")
        d1_expected = 2.0 * self.grating2.period / self.period_ratio
        _require(abs(self.grating1.period - d1_expected)
                 <= RELATIVE_SLACK * d1_expected, "gratings.1.period",
                 f"must equal 2 d2 / r = {d1_expected!r}")
        _require(abs(self.grating3.period - self.grating1.period)
                 <= RELATIVE_SLACK * self.grating1.period, "gratings.3.period",
                 "must equal the first grating period")
        _require(self.grating1.kind == "binary", "gratings.1.kind",
                 "first grating must be absorptive (binary)")
        _require(self.grating3.kind == "binary", "gratings.3.kind",
                 "third grating must be absorptive (binary)")
        return self

    @property
    def d1(self) -> float:
        return self.grating1.period

    @property
    def d(self) -> float:
        return self.grating2.period


@dataclass(frozen=True)
class Kinematics:
    v_z: float                 # m/s
    p_z: float                 # kg m/s
    de_broglie_wavelength: float  # m
    talbot_length: float       # m (for the second grating period)


def derive_kinematics(particle: ParticleSpec, v_z: float, d: float) -> Kinematics:
    """Longitudinal kinematics: lambda = h / (m v_z), L_T = d^2 / lambda."""
    if v_z <= 0.0:
        raise ValidationError(f"v_z: must be positive, got {v_z!r}")
    if d <= 0.0:
        raise ValidationError(f"d: must be positive, got {d!r}")
    p_z = particle.mass * v_z
    wavelength = PLANCK / p_z
    return Kinematics(v_z=v_z, p_z=p_z, de_broglie_wavelength=wavelength,
                      talbot_length=d * d / wavelength)


def validate_setup(setup: SetupSpec) -> SetupSpec:
    """Check every invariant; returns the (already SI) setup unchanged."""
    return setup.validate()


@dataclass(frozen=True)
class CoeffSet:
    """Fourier coefficients indexed by order m in [-M, M]."""
    values: Tuple[complex, ...]
    regime: Literal["quantum", "classical"]
    stage: Literal["ideal", "interacting", "decohered"]

    def __post_init__(self):
        if len(self.values) % 2 != 1:
            raise ValidationError("coeffs: need an odd number of orders "
                                  "(symmetric range [-M, M])")

    @property
    def max_order(self) -> int:
        return (len(self.values) - 1) // 2

    def value(self, m: int) -> complex:
        if abs(m) > self.max_order:
            return 0.0 + 0.0j
        return self.values[m + self.max_order]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=complex)

    def is_hermitian(self, tol: float = 1e-9) -> bool:
        arr = self.as_array()
        scale = max(abs(arr[self.max_order]), 1e-300)
        return bool(np.all(np.abs(arr - np.conj(arr[::-1])) <= tol * scale))

    def with_stage(self, stage) -> "CoeffSet":
        return replace(self, stage=stage)


@dataclass(frozen=True)
class Pattern:
    """Sampled transverse density or detector signal over one period."""
    x: Tuple[float, ...]       # m
    values: Tuple[float, ...]  # arbitrary units
    period: float              # m

    def __post_init__(self):
        if len(self.x) != len(self.values) or len(self.x) < 2:
            raise ValidationError("pattern: x and values must match, length >= 2")

    @property
    def mean_level(self) -> float:
        return float(np.mean(self.values))

    @property
    def visibility(self) -> float:
        vmax = max(self.values)
        vmin = min(self.values)
        denom = vmax + vmin
        if denom <= 0.0:
            raise ValidationError("pattern: degenerate signal, max + min <= 0")
        return (vmax - vmin) / denom

    def as_arrays(self):
        return np.asarray(self.x), np.asarray(self.values)
