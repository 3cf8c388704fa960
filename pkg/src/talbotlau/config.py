"""Configuration ingestion: INI sections in lab units to SI domain specs.

Sections: [particle], [beam], [gratings.1..3], [setup], [gas], [thermal],
[numerics].  The full key reference lives in README.md; every violated
constraint is reported with its section.key path.  Tabulated inputs are
two-column CSV files (strictly increasing abscissa, linear interpolation)
resolved relative to the config file.
"""
from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

from .constants import (AMU, BOLTZMANN, MBAR, MEV_NM3, MEV_NM4, MEV_NM6, NM,
                        NM2, NM3, UM)
from .decoherence import AbsorptionModel, GasSpec, ThermalSpec
from .model import (BeamSpec, GratingSpec, LightGratingSpec,
                    MaterialInteraction, ParticleSpec, SetupSpec,
                    ValidationError)

__all__ = ["RunConfig", "Numerics", "load_config", "load_two_column_csv",
           "config_digest"]


@dataclass(frozen=True)
class Numerics:
    max_order: int = 16
    pattern_grid: int = 512
    oracle_window_periods: int = 64
    oracle_samples_per_period: int = 256
    oracle_source_points: int = 32
    oracle_output_points: int = 512
    mc_events: int = 10000


@dataclass(frozen=True)
class RunConfig:
    particle: ParticleSpec
    beam: BeamSpec
    setup: SetupSpec
    gas: Optional[GasSpec] = None
    thermal: Optional[ThermalSpec] = None
    numerics: Numerics = field(default_factory=Numerics)


def load_two_column_csv(path: Path) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """Two numeric columns, comma or whitespace separated; '#' comments."""
    xs, ys = [], []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"table {path}: {exc}") from exc
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ValidationError(f"table {path}:{ln}: expected two columns")
        try:
            xs.append(float(parts[0]))
            ys.append(float(parts[1]))
        except ValueError as exc:
            raise ValidationError(f"table {path}:{ln}: {exc}") from exc
    if len(xs) < 2:
        raise ValidationError(f"table {path}: needs at least two rows")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValidationError(f"table {path}: abscissa must be strictly "
                              "increasing")
    return tuple(xs), tuple(ys)


class _Section:
    def __init__(self, parser: configparser.ConfigParser, name: str,
                 base: Path):
        self.name = name
        self.base = base
        self._sec = parser[name] if parser.has_section(name) else None

    def exists(self) -> bool:
        return self._sec is not None

    def _raw(self, key: str, default=None, required=False):
        if self._sec is None or key not in self._sec:
            if required:
                raise ValidationError(f"{self.name}.{key}: missing required key")
            return default
        return self._sec.get(key)

    def get_float(self, key: str, default=None, required=False) -> Optional[float]:
        raw = self._raw(key, None, required)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError as exc:
            raise ValidationError(f"{self.name}.{key}: not a number: {raw!r}") \
                from exc

    def get_int(self, key: str, default=None) -> Optional[int]:
        raw = self._raw(key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError as exc:
            raise ValidationError(f"{self.name}.{key}: not an integer: {raw!r}") \
                from exc

    def get_str(self, key: str, default=None, required=False) -> Optional[str]:
        raw = self._raw(key, default, required)
        return raw if raw is None else raw.strip()

    def get_bool(self, key: str, default=False) -> bool:
        raw = self._raw(key)
        if raw is None:
            return default
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValidationError(f"{self.name}.{key}: not a boolean: {raw!r}")

    def get_table(self, key: str):
        raw = self._raw(key)
        if raw is None:
            return None
        return load_two_column_csv(self.base / raw.strip())


def _parse_particle(sec: _Section) -> ParticleSpec:
    return ParticleSpec(
        mass=sec.get_float("mass_amu", required=True) * AMU,
        static_polarizability=sec.get_float(
            "static_polarizability_nm3", 0.0) * NM3,
        dynamic_polarizability_at_laser=sec.get_float(
            "dynamic_polarizability_nm3", 0.0) * NM3,
        valence_electrons=sec.get_float("valence_electrons", 0.0),
        heat_capacity=sec.get_float("heat_capacity_kB", 0.0) * BOLTZMANN,
        initial_internal_temperature=sec.get_float(
            "internal_temperature_K", 0.0),
    ).validate()


def _parse_beam(sec: _Section) -> BeamSpec:
    kind = sec.get_str("kind", "delta")
    if kind == "delta":
        beam = BeamSpec(kind="delta", v_mean=sec.get_float("v_z_m_s",
                                                           required=True))
    elif kind == "gaussian":
        beam = BeamSpec(
            kind="gaussian",
            v_mean=sec.get_float("v_mean_m_s", required=True),
            v_sigma=sec.get_float("v_sigma_m_s", required=True),
            flux_weighted=sec.get_bool("flux_weighted"),
            nodes=sec.get_int("nodes", 64),
        )
    elif kind == "tabulated":
        beam = BeamSpec(kind="tabulated", table=sec.get_table("table"),
                        flux_weighted=sec.get_bool("flux_weighted"))
    else:
        raise ValidationError(f"beam.kind: unknown kind {kind!r}")
    return beam.validate()


def _parse_grating(sec: _Section) -> GratingSpec:
    kind = sec.get_str("kind", "binary")
    if kind == "light":
        light = LightGratingSpec(
            laser_power=sec.get_float("laser_power_W", required=True),
            waist=sec.get_float("waist_um", required=True) * UM,
            laser_wavelength=sec.get_float("laser_wavelength_um",
                                           required=True) * UM,
        )
        return GratingSpec(period=light.laser_wavelength / 2.0, kind="light",
                           light=light)
    law = sec.get_str("law", "none")
    interaction = MaterialInteraction(
        law=law,
        C3=sec.get_float("C3_meV_nm3", 0.0) * MEV_NM3,
        C4=sec.get_float("C4_meV_nm4", 0.0) * MEV_NM4,
        wall_cutoff=sec.get_float("wall_cutoff_nm", 0.0) * NM,
        phase_cap=sec.get_float("phase_cap_rad", 2000.0 * math.pi),
    )
    return GratingSpec(
        period=sec.get_float("period_um", required=True) * UM,
        open_fraction=sec.get_float("open_fraction", 0.5),
        thickness=sec.get_float("thickness_um", 0.0) * UM,
        kind="binary",
        interaction=interaction,
    )


def _parse_gas(sec: _Section) -> Optional[GasSpec]:
    if not sec.exists():
        return None
    c6_raw = sec.get_float("C6_meV_nm6")
    return GasSpec(
        mass=sec.get_float("mass_amu", required=True) * AMU,
        temperature=sec.get_float("temperature_K", required=True),
        pressure=sec.get_float("pressure_mbar", required=True) * MBAR,
        polarizability=sec.get_float("polarizability_nm3", 0.0) * NM3,
        valence_electrons=sec.get_float("valence_electrons", 0.0),
        C6=None if c6_raw is None else c6_raw * MEV_NM6,
        model=sec.get_str("model", "isotropic"),
        amplitude_table=sec.get_table("amplitude_table"),
    ).validate()


def _parse_thermal(sec: _Section) -> Optional[ThermalSpec]:
    if not sec.exists():
        return None
    kind = sec.get_str("absorption", "constant")
    if kind == "tabulated":
        absorption = AbsorptionModel(kind="tabulated",
                                     table=sec.get_table("table"))
    elif kind == "power_law":
        absorption = AbsorptionModel(
            kind="power_law",
            sigma0=sec.get_float("sigma0_nm2", required=True) * NM2,
            exponent=sec.get_float("exponent", required=True),
            omega0=sec.get_float("omega0_rad_s", required=True),
        )
    elif kind == "constant":
        absorption = AbsorptionModel(
            kind="constant",
            sigma0=sec.get_float("sigma0_nm2", required=True) * NM2,
        )
    else:
        raise ValidationError(f"thermal.absorption: unknown kind {kind!r}")
    return ThermalSpec(
        T_star=sec.get_float("T_star_K", required=True),
        heat_capacity=sec.get_float("heat_capacity_kB", required=True)
        * BOLTZMANN,
        absorption=absorption,
        enable_cooling=sec.get_bool("enable_cooling"),
    ).validate()


def _parse_numerics(sec: _Section) -> Numerics:
    if not sec.exists():
        return Numerics()
    return Numerics(
        max_order=sec.get_int("max_order", 16),
        pattern_grid=sec.get_int("pattern_grid", 512),
        oracle_window_periods=sec.get_int("oracle_window_periods", 64),
        oracle_samples_per_period=sec.get_int("oracle_samples_per_period", 256),
        oracle_source_points=sec.get_int("oracle_source_points", 32),
        oracle_output_points=sec.get_int("oracle_output_points", 512),
        mc_events=sec.get_int("mc_events", 10000),
    )


def load_config(path) -> RunConfig:
    """Parse and validate a run configuration file."""
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ValidationError(f"config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ValidationError(f"config {path}: {exc}") from exc
    base = path.parent

    particle = _parse_particle(_Section(parser, "particle", base))
    beam = _parse_beam(_Section(parser, "beam", base))
    gratings = []
    for i in (1, 2, 3):
        name = f"gratings.{i}"
        if not parser.has_section(name):
            raise ValidationError(f"{name}: missing section")
        gratings.append(_parse_grating(_Section(parser, name, base)))
    setup_sec = _Section(parser, "setup", base)
    setup = SetupSpec(
        grating1=gratings[0], grating2=gratings[1], grating3=gratings[2],
        separation=setup_sec.get_float("separation_m", required=True),
        period_ratio=setup_sec.get_int("period_ratio", 2),
    ).validate()
    return RunConfig(
        particle=particle,
        beam=beam,
        setup=setup,
        gas=_parse_gas(_Section(parser, "gas", base)),
        thermal=_parse_thermal(_Section(parser, "thermal", base)),
        numerics=_parse_numerics(_Section(parser, "numerics", base)),
    )


def config_digest(path) -> str:
    """SHA-256 of the config file bytes, for output provenance headers."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
