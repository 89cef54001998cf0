"""Lindblad generator with single-photon loss and its steady state.

Vectorization is column stacking, vec(A X B) = (B^T kron A) vec(X), so a
density matrix ``rho`` maps to ``rho.reshape(-1, order="F")``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from kpospec.eigensystem import LabeledEigensystem
from kpospec.errors import ConsistencyError, NonUniqueSteadyStateError
from kpospec.operators import KpoParams, annihilation, hamiltonian_rwa, number

RESIDUAL_TOL = 1e-9
_AUDIT_SEED = 20240601


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim, order="F")


def _dissipator(c: np.ndarray) -> np.ndarray:
    dim = c.shape[0]
    eye = np.eye(dim)
    cdc = c.conj().T @ c
    return np.kron(c.conj(), c) - 0.5 * np.kron(eye, cdc) - 0.5 * np.kron(cdc.T, eye)


@lru_cache(maxsize=8)
def _cached_dissipators(dim: int) -> tuple[np.ndarray, np.ndarray]:
    loss, deph = _dissipator(annihilation(dim)), _dissipator(number(dim))
    loss.flags.writeable = False
    deph.flags.writeable = False
    return loss, deph


def liouvillian(h: np.ndarray, loss_rate: float, dephasing_rate: float = 0.0) -> np.ndarray:
    """Superoperator of  d rho/dt = -i[H, rho] + loss D[a] rho + dephasing D[a+a] rho."""
    if loss_rate < 0 or dephasing_rate < 0:
        raise ValueError("rates must be non-negative")
    h = np.asarray(h, dtype=complex)
    dim = h.shape[0]
    eye = np.eye(dim)
    lv = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    loss, deph = _cached_dissipators(dim)
    if loss_rate > 0:
        lv += loss_rate * loss
    if dephasing_rate > 0:
        lv += dephasing_rate * deph
    return lv


def kpo_liouvillian(params: KpoParams, beta: float) -> np.ndarray:
    """Generator for the device: loss rate kappa_e + kappa_i, optional dephasing."""
    return liouvillian(hamiltonian_rwa(params, beta), params.kappa_total, params.gamma_phi)


@dataclass(frozen=True)
class SteadyStateDensity:
    rho: np.ndarray
    beta: float
    residual: float
    null_dim: int

    @property
    def dim(self) -> int:
        return self.rho.shape[0]


def steady_state(lv: np.ndarray, dim: int, beta: float = float("nan")) -> SteadyStateDensity:
    """Solve L vec(rho) = 0 with tr(rho) = 1.

    The first row of L is replaced by the trace functional and the square
    system is solved by LU.  Uniqueness is audited by solving the same
    factorized system for a random right-hand side: a second stationary state
    makes the bordered matrix singular and that solve fails its residual check.
    """
    lv = np.asarray(lv, dtype=complex)
    if lv.shape != (dim * dim, dim * dim):
        raise ConsistencyError(f"liouvillian shape {lv.shape} does not match dim={dim}")
    m = lv.copy()
    m[0, :] = vec(np.eye(dim))
    rhs = np.zeros(dim * dim, dtype=complex)
    rhs[0] = 1.0

    rng = np.random.default_rng(_AUDIT_SEED)
    probe = rng.standard_normal(dim * dim) + 1j * rng.standard_normal(dim * dim)
    try:
        with np.errstate(all="ignore"):
            lu = sla.lu_factor(m, check_finite=False)
            sol = sla.lu_solve(lu, np.column_stack([rhs, probe]), check_finite=False)
    except (sla.LinAlgError, ValueError) as exc:
        raise NonUniqueSteadyStateError(f"steady-state system is singular: {exc}") from exc

    audit = np.linalg.norm(m @ sol[:, 1] - probe) / np.linalg.norm(probe)
    if not np.all(np.isfinite(sol)) or not audit < 1e-6:
        raise NonUniqueSteadyStateError(
            "stationary state is not unique (bordered generator is singular; "
            f"audit residual {audit:.3e})"
        )

    rho = unvec(sol[:, 0], dim)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    residual = float(np.linalg.norm(lv @ vec(rho)))
    if residual > RESIDUAL_TOL:
        raise NonUniqueSteadyStateError(f"steady-state residual {residual:.3e} too large")
    return SteadyStateDensity(rho=rho, beta=float(beta), residual=residual, null_dim=1)


def solve_steady_state(params: KpoParams, beta: float) -> SteadyStateDensity:
    if not params.kappa_total > 0:
        raise ValueError("a unique steady state needs kappa_e + kappa_i > 0")
    return steady_state(kpo_liouvillian(params, beta), params.dim, beta=abs(float(beta)))


def populations(rho: SteadyStateDensity, sys: LabeledEigensystem) -> np.ndarray:
    """<n~|rho|n~> for every label n."""
    if rho.dim != sys.dim:
        raise ConsistencyError(f"dim mismatch: rho {rho.dim}, eigensystem {sys.dim}")
    if not np.isnan(rho.beta) and not np.isclose(rho.beta, sys.beta, rtol=1e-12, atol=1e-12):
        raise ConsistencyError(f"beta mismatch: rho {rho.beta}, eigensystem {sys.beta}")
    s = sys.states
    return np.real(np.einsum("in,ij,jn->n", s.conj(), rho.rho, s))
