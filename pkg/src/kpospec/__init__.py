"""Reflection spectroscopy of a two-photon-driven Kerr parametric oscillator.

Forward synthesis of reflection spectra from the rotating-frame Hamiltonian and
the Lindblad steady state, plus the inverse tools used on measured spectra:
drive-power calibration and single-resonance fitting.

All internal frequencies and rates are angular, in rad/us (2*pi*MHz).  Use
:func:`mhz` and :func:`to_mhz` at the boundaries.
"""

from kpospec.operators import (
    KpoParams,
    TWO_PI,
    annihilation,
    hamiltonian_rwa,
    mhz,
    number,
    parity,
    to_mhz,
)

__all__ = [
    "KpoParams",
    "TWO_PI",
    "annihilation",
    "hamiltonian_rwa",
    "mhz",
    "number",
    "parity",
    "to_mhz",
]

__version__ = "0.1.0"
