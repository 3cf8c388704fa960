"""Talbot-Lau matter-wave interference simulator.

Quantum and classical near-field fringes behind a symmetric three-grating
interferometer, with realistic grating interactions (van der Waals /
retarded walls, standing light waves), environmental decoherence
(background-gas collisions, thermal photon emission), and an independent
direct-propagation oracle for validation.
"""
from ._kernels import BACKEND
from .model import (BeamSpec, CoeffSet, GratingSpec, Kinematics,
                    LightGratingSpec, MaterialInteraction, ParticleSpec,
                    Pattern, SetupSpec, ValidationError, derive_kinematics,
                    validate_setup)
from .gratings import (binary_coeff, binary_product_coeff, casimir_c4,
                       classical_kick, classical_product_coeff,
                       dielectric_reduction, eikonal_phase, light_phase,
                       lifshitz_c3, modified_coeff_quantum,
                       quantum_product_coeff, slit_potential)
from .talbot import (FringeResult, NumericError, closed_form_visibility,
                     density_pattern, detector_signal, fringes_at_velocity,
                     intensity_coeffs, velocity_average, visibility)
from .decoherence import (AbsorptionModel, DecoherenceScenario, GasSpec,
                          ThermalSpec, apply_decoherence, c6_slater_kirkwood,
                          collision_scenario, cooling_profile,
                          custom_scenario, eta_collisional, eta_thermal,
                          reduced_visibility, sigma_eff, sigma_total_vdw,
                          suppression_exponent, suppression_factor,
                          thermal_scenario, thermal_spectral_rate)
from .oracle import (CompareReport, OracleConfig, coherent_pattern_oracle,
                     compare, fresnel_propagate, mc_decohered_pattern)
from .config import RunConfig, load_config

__version__ = "0.1.0"
