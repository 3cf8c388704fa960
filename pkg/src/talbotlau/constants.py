"""Physical constants (SI, CODATA 2018) and config-unit conversions.

Everything inside the package is SI.  Config files use the lab-friendly
units listed below (amu, nm, um, meV nm^3, mbar, ...) and are converted
exactly once, at the parsing boundary.
"""
import math

# exact / CODATA 2018
PLANCK = 6.62607015e-34          # J s
HBAR = PLANCK / (2.0 * math.pi)  # J s
SPEED_OF_LIGHT = 299792458.0     # m / s
BOLTZMANN = 1.380649e-23         # J / K
ELEMENTARY_CHARGE = 1.602176634e-19  # C
AMU = 1.66053906660e-27          # kg
ELECTRON_MASS = 9.1093837015e-31  # kg
VACUUM_PERMITTIVITY = 8.8541878128e-12  # F / m

EV = ELEMENTARY_CHARGE           # J
MEV = 1e-3 * EV                  # J

NM = 1e-9
UM = 1e-6

# config-unit -> SI multipliers
MEV_NM3 = MEV * NM ** 3          # C3: energy * length^3
MEV_NM4 = MEV * NM ** 4          # C4: energy * length^4
MEV_NM6 = MEV * NM ** 6          # C6: energy * length^6
NM2 = NM ** 2                    # absorption cross sections
NM3 = NM ** 3                    # polarizability volumes
MBAR = 100.0                     # Pa


def amu_to_kg(mass_amu: float) -> float:
    return mass_amu * AMU


def kg_to_amu(mass_kg: float) -> float:
    return mass_kg / AMU
