"""Truncated Fock-space operators and the rotating-frame KPO Hamiltonian."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from kpospec.errors import InvalidDimensionError

TWO_PI = 2.0 * np.pi

DEFAULT_DIM = 30


def mhz(f):
    """Ordinary frequency in MHz -> angular frequency in rad/us."""
    return TWO_PI * np.asarray(f, dtype=float) if np.ndim(f) else TWO_PI * float(f)


def to_mhz(w):
    """Angular frequency in rad/us -> ordinary frequency in MHz."""
    return np.asarray(w) / TWO_PI if np.ndim(w) else float(w) / TWO_PI


@dataclass(frozen=True)
class KpoParams:
    """Static device parameters, angular units (rad/us).

    delta      resonator minus half pump frequency
    chi        Kerr nonlinearity (positive; enters as -chi/2 a+a+aa)
    kappa_e    external (signal-line) loss rate
    kappa_i    internal loss rate
    gamma_phi  optional pure-dephasing rate, Lindblad operator a+a
    dim        Fock truncation
    """

    delta: float
    chi: float
    kappa_e: float
    kappa_i: float
    gamma_phi: float = 0.0
    dim: int = DEFAULT_DIM

    def __post_init__(self):
        if not self.chi > 0:
            raise ValueError(f"chi must be positive, got {self.chi}")
        for name in ("kappa_e", "kappa_i", "gamma_phi"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if int(self.dim) != self.dim or self.dim < 4:
            raise InvalidDimensionError(f"dim must be an integer >= 4, got {self.dim}")

    @property
    def kappa_total(self) -> float:
        return self.kappa_e + self.kappa_i

    @classmethod
    def from_mhz(cls, delta, chi, kappa_e, kappa_i, gamma_phi=0.0, dim=DEFAULT_DIM):
        return cls(
            delta=mhz(delta),
            chi=mhz(chi),
            kappa_e=mhz(kappa_e),
            kappa_i=mhz(kappa_i),
            gamma_phi=mhz(gamma_phi),
            dim=int(dim),
        )

    def replace(self, **changes) -> KpoParams:
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return KpoParams(**fields)


def annihilation(dim: int) -> np.ndarray:
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"annihilation operator needs dim >= 2, got {dim}")
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def number(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def parity(dim: int) -> np.ndarray:
    if int(dim) != dim or dim < 1:
        raise InvalidDimensionError(f"parity needs dim >= 1, got {dim}")
    return np.diag((-1.0) ** np.arange(dim)).astype(complex)


def hamiltonian_rwa(params: KpoParams, beta: float) -> np.ndarray:
    """Rotating-frame Hamiltonian (hbar = 1)::

        H = delta a+a - chi/2 a+a+aa + beta (a+a+ + aa)

    ``beta`` is the real two-photon drive amplitude.  A negative value is
    replaced by its magnitude: the rotation a -> i a flips the sign of the
    drive term and leaves every spectrum unchanged.
    """
    dim = params.dim
    beta = abs(float(beta))
    n = np.arange(dim, dtype=float)
    h = np.diag(n * params.delta - 0.5 * params.chi * n * (n - 1)).astype(complex)
    # <n+2|H|n> = beta sqrt((n+1)(n+2)), filled directly so the entries are exact
    pump = beta * np.sqrt((n[:-2] + 1) * (n[:-2] + 2))
    idx = np.arange(dim - 2)
    h[idx + 2, idx] = pump
    h[idx, idx + 2] = pump
    return h
