"""Physical constants (CODATA, via scipy) and unit helpers.

Energies are expressed as cyclic frequencies ``E / h`` in hertz throughout
the package. A Josephson energy quoted as "E_J = 9.127 GHz" therefore means
``E_J = h * 9.127e9 J``.
"""
from scipy import constants as _c

E_CHARGE = _c.e
PLANCK = _c.h
HBAR = _c.hbar
FLUX_QUANTUM = PLANCK / (2 * E_CHARGE)
REDUCED_FLUX_QUANTUM = FLUX_QUANTUM / (2 * _c.pi)

GHZ = 1e9
FF = 1e-15
PF = 1e-12
NH = 1e-9
PH = 1e-12


def charging_energy(capacitance: float) -> float:
    """``e^2 / (2C)`` in hertz."""
    return E_CHARGE**2 / (2 * capacitance) / PLANCK


def inductive_energy(inductance: float) -> float:
    """``(Phi_0 / 2 pi)^2 / L`` in hertz."""
    return REDUCED_FLUX_QUANTUM**2 / inductance / PLANCK
