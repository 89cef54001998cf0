"""Closed-form dressed-state picture near the two-photon resonance.

Restricted to Fock states |0>..|3>, the drive resonantly couples |0>,|2>
(splitting +-sqrt(2) beta) and off-resonantly couples |1>,|3> (an ac Stark
shift of +-3 beta^2/chi to lowest order).  Nothing here touches the
truncated-Fock machinery, so it doubles as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT2 = np.sqrt(2.0)
SQRT6 = np.sqrt(6.0)


def mixing_delta(beta: float, chi: float) -> float:
    """delta = (chi - sqrt(chi^2 + 6 beta^2)) / (sqrt(6) beta), limit 0 at beta = 0."""
    if beta == 0:
        return 0.0
    # rationalized form, no cancellation at small beta
    return -SQRT6 * beta / (chi + np.sqrt(chi**2 + 6.0 * beta**2))


@dataclass(frozen=True)
class DressedModel:
    beta: float
    chi: float
    rabi_split: float
    stark_exact_1: float
    stark_exact_3: float
    stark_approx_1: float
    stark_approx_3: float
    mixing_delta: float

    def dressed_states(self) -> tuple[np.ndarray, np.ndarray]:
        """|1'> and |3'> as vectors in the (|1>, |3>) basis."""
        d = self.mixing_delta
        norm = np.sqrt(1.0 + d * d)
        return np.array([1.0, -d]) / norm, np.array([d, 1.0]) / norm

    def stark_hamiltonian(self) -> np.ndarray:
        """Detuned |1>,|3> block in the frame where |0>,|2> are degenerate at 0."""
        c = SQRT6 * self.beta
        return np.array([[0.5 * self.chi, c], [c, -1.5 * self.chi]])


def dressed_model(beta: float, chi: float) -> DressedModel:
    if not chi > 0:
        raise ValueError("chi must be positive")
    if beta < 0:
        raise ValueError("beta must be non-negative")
    root = chi * np.sqrt(1.0 + 6.0 * beta**2 / chi**2)
    shift = 3.0 * beta**2 / chi
    return DressedModel(
        beta=beta,
        chi=chi,
        rabi_split=SQRT2 * beta,
        stark_exact_1=-0.5 * chi + root,
        stark_exact_3=-0.5 * chi - root,
        stark_approx_1=0.5 * chi + shift,
        stark_approx_3=-1.5 * chi - shift,
        mixing_delta=mixing_delta(beta, chi),
    )


TRANSITIONS = ("10", "01", "12", "21")


def analytic_transition_frequencies(delta_detuning: float, chi: float, beta: float) -> dict[str, float]:
    """Rotating-frame frequencies of the 1<-0, 0<-1, 1<-2 and 2<-1 lines.

    Keys are "mn" for w_mn = E_m - E_n.
    """
    if not chi > 0:
        raise ValueError("chi must be positive")
    shifted = delta_detuning + 3.0 * beta**2 / chi
    split = SQRT2 * beta
    return {
        "10": shifted - split,
        "01": -shifted + split,
        "12": shifted + split,
        "21": -shifted - split,
    }


def four_level_hamiltonian(delta_detuning: float, chi: float, beta: float) -> np.ndarray:
    diag = [0.0, delta_detuning, 2 * delta_detuning - chi, 3 * delta_detuning - 3 * chi]
    h = np.diag(diag)
    h[0, 2] = h[2, 0] = SQRT2 * beta
    h[1, 3] = h[3, 1] = SQRT6 * beta
    return h


def four_level_oracle(delta_detuning: float, chi: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Brute-force eigenpairs of the Hamiltonian restricted to |0>..|3>."""
    if not chi > 0:
        raise ValueError("chi must be positive")
    return np.linalg.eigh(four_level_hamiltonian(delta_detuning, chi, beta))


def oracle_transition_frequencies(delta_detuning: float, chi: float, beta: float) -> dict[str, float]:
    """The four lines from the 4x4 oracle, labeling states by dominant Fock weight."""
    w, v = four_level_oracle(delta_detuning, chi, beta)
    weights = np.abs(v) ** 2
    # even sector: |0~> is the upper of the pair when delta <= chi/2 (E_0 >= E_2 at beta=0)
    even = [j for j in range(4) if weights[0, j] + weights[2, j] > 0.5]
    odd = [j for j in range(4) if weights[1, j] + weights[3, j] > 0.5]
    e_even = sorted(w[even])
    upper_zero = delta_detuning <= 0.5 * chi
    e0, e2 = (e_even[1], e_even[0]) if upper_zero else (e_even[0], e_even[1])
    e1 = w[max(odd, key=lambda j: weights[1, j])]
    return {"10": e1 - e0, "01": e0 - e1, "12": e1 - e2, "21": e2 - e1}
