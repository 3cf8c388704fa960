"""Domain types, validation, and kinematics identities."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from talbotlau.constants import AMU, PLANCK, UM
from talbotlau.model import (BeamSpec, CoeffSet, GratingSpec, Kinematics,
                             MaterialInteraction, ParticleSpec, Pattern,
                             SetupSpec, ValidationError, derive_kinematics,
                             validate_setup)


def particle(mass_amu=1000.0):
    return ParticleSpec(mass=mass_amu * AMU).validate()


def symmetric_setup(f=0.5, d=1.0 * UM, r=2, separation=0.2, **g2_kwargs):
    d1 = 2.0 * d / r
    g1 = GratingSpec(period=d1, open_fraction=f)
    g2 = GratingSpec(period=d, open_fraction=f, **g2_kwargs)
    g3 = GratingSpec(period=d1, open_fraction=f)
    return SetupSpec(grating1=g1, grating2=g2, grating3=g3,
                     separation=separation, period_ratio=r)


def test_kinematics_matches_reference_geometry():
    # 1000 amu, d = 1 um, velocity tuned to a 5 pm wavelength
    wavelength = 5e-12
    p = particle()
    v_z = PLANCK / (p.mass * wavelength)
    kin = derive_kinematics(p, v_z, 1.0 * UM)
    assert kin.de_broglie_wavelength == pytest.approx(wavelength, rel=1e-12)
    assert kin.talbot_length == pytest.approx(0.2, rel=1e-12)


def test_talbot_length_quadratic_in_period():
    p = particle()
    kin1 = derive_kinematics(p, 100.0, 1.0 * UM)
    kin2 = derive_kinematics(p, 100.0, 2.0 * UM)
    assert kin2.talbot_length == pytest.approx(4.0 * kin1.talbot_length,
                                               rel=1e-12)


@given(v_z=st.floats(1.0, 1e4), d_um=st.floats(0.05, 50.0),
       mass_amu=st.floats(1.0, 1e7))
@settings(max_examples=200, deadline=None)
def test_kinematics_identities(v_z, d_um, mass_amu):
    kin = derive_kinematics(particle(mass_amu), v_z, d_um * UM)
    assert kin.de_broglie_wavelength * kin.p_z == pytest.approx(PLANCK,
                                                                rel=1e-12)
    assert kin.talbot_length * kin.de_broglie_wavelength == pytest.approx(
        (d_um * UM) ** 2, rel=1e-12)


def test_kinematics_rejects_nonpositive_inputs():
    with pytest.raises(ValidationError):
        derive_kinematics(particle(), -1.0, 1.0 * UM)
    with pytest.raises(ValidationError):
        derive_kinematics(particle(), 100.0, 0.0)


def test_setup_accepts_equal_periods():
    setup = symmetric_setup(r=2)
    checked = validate_setup(setup)
    assert checked.d1 == pytest.approx(checked.d, rel=1e-15)


def test_setup_rejects_bad_open_fraction():
    with pytest.raises(ValidationError, match="open_fraction"):
        symmetric_setup(f=1.2).validate()


def test_setup_rejects_period_mismatch():
    g1 = GratingSpec(period=1.0 * UM * (1 + 1e-9), open_fraction=0.5)
    g2 = GratingSpec(period=1.0 * UM, open_fraction=0.5)
    g3 = GratingSpec(period=1.0 * UM, open_fraction=0.5)
    setup = SetupSpec(grating1=g1, grating2=g2, grating3=g3, separation=0.2)
    with pytest.raises(ValidationError, match="period"):
        setup.validate()


def test_mass_floor():
    with pytest.raises(ValidationError, match="amu"):
        ParticleSpec(mass=0.5 * AMU).validate()


def test_wall_cutoff_must_fit_in_slit():
    g = GratingSpec(period=1.0 * UM, open_fraction=0.1,
                    interaction=MaterialInteraction(
                        law="vdw_c3", C3=1e-49, wall_cutoff=0.2 * UM))
    with pytest.raises(ValidationError, match="wall_cutoff"):
        g.validate()


def test_beam_validation():
    BeamSpec(kind="delta", v_mean=100.0).validate()
    BeamSpec(kind="gaussian", v_mean=100.0, v_sigma=10.0).validate()
    with pytest.raises(ValidationError):
        BeamSpec(kind="gaussian", v_mean=100.0, v_sigma=0.0).validate()
    with pytest.raises(ValidationError):
        BeamSpec(kind="tabulated", table=((1.0, 0.5), (1.0, 1.0))).validate()


def test_coeffset_accessors_and_hermiticity():
    cs = CoeffSet(values=(1 - 2j, 3.0, 1 + 2j), regime="quantum",
                  stage="ideal")
    assert cs.max_order == 1
    assert cs.value(1) == 1 + 2j
    assert cs.value(-1) == 1 - 2j
    assert cs.value(5) == 0.0
    assert cs.is_hermitian()
    bad = CoeffSet(values=(1 + 1j, 3.0, 1 + 2j), regime="quantum",
                   stage="ideal")
    assert not bad.is_hermitian()


def test_pattern_visibility():
    x = tuple(np.linspace(0.0, 1.0, 64, endpoint=False))
    vals = tuple(1.0 + 0.5 * np.cos(2 * np.pi * np.asarray(x)))
    pat = Pattern(x=x, values=vals, period=1.0)
    assert pat.visibility == pytest.approx(0.5, rel=1e-12)
    assert pat.mean_level == pytest.approx(1.0, rel=1e-12)


def test_light_grating_period_consistency():
    from talbotlau.model import LightGratingSpec
    light = LightGratingSpec(laser_power=1.0, waist=1e-3,
                             laser_wavelength=532e-9)
    good = GratingSpec(period=266e-9, kind="light", light=light)
    good.validate()
    bad = GratingSpec(period=300e-9, kind="light", light=light)
    with pytest.raises(ValidationError, match="period"):
        bad.validate()
