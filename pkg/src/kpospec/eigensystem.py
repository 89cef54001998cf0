"""Diagonalization of the KPO Hamiltonian with adiabatic Fock labels.

A labeled state |n~> is the eigenstate that is continuously connected to the
Fock state |n> as the drive amplitude is ramped up from zero.  Labels are
carried along an ascending beta grid by maximum overlap between neighbouring
grid points.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np

from kpospec.errors import (
    AmbiguousTrackingError,
    ContractViolation,
    TruncationEdgeError,
)
from kpospec.operators import KpoParams, annihilation, hamiltonian_rwa, mhz

MIN_OVERLAP = 0.7
TABLE_LABELS = 5  # labels 0..5 are tabulated for spectrum sums
DEFAULT_BETA_STEP = mhz(0.05)


def diagonalize(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (as columns).

    When ``h`` has no elements between the even and odd Fock sectors (true of
    the two-photon-driven Hamiltonian) each sector is diagonalized on its own,
    so every eigenvector has exact photon-number parity even where levels of
    opposite parity are (nearly) degenerate.
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ContractViolation(f"expected a square matrix, got shape {h.shape}")
    scale = max(np.abs(h).max(), 1.0)
    asym = np.abs(h - h.conj().T).max()
    if asym > 1e-9 * scale:
        raise ContractViolation(f"matrix is not Hermitian (max asymmetry {asym:.3e})")
    h = 0.5 * (h + h.conj().T)
    dim = h.shape[0]

    mixed = np.add.outer(np.arange(dim), np.arange(dim)) % 2 == 1
    if dim < 2 or np.any(h[mixed] != 0):
        return np.linalg.eigh(h)

    energies = np.empty(dim)
    vectors = np.zeros((dim, dim), dtype=complex)
    col = 0
    for start in (0, 1):
        idx = np.arange(start, dim, 2)
        w, v = np.linalg.eigh(h[np.ix_(idx, idx)])
        energies[col : col + len(idx)] = w
        vectors[idx, col : col + len(idx)] = v
        col += len(idx)
    order = np.argsort(energies, kind="stable")
    return energies[order], vectors[:, order]


def _fix_phase(states: np.ndarray) -> np.ndarray:
    # largest-magnitude component of each column made real positive
    states = states.copy()
    big = np.argmax(np.abs(states), axis=0)
    ph = states[big, np.arange(states.shape[1])]
    states /= ph / np.abs(ph)
    return states


@dataclass(frozen=True)
class LabeledEigensystem:
    """Eigenpairs indexed by adiabatic label.

    ``energies[n]`` and ``states[:, n]`` belong to |n~>; ``labels[n]`` is the
    position of that state in the ascending raw spectrum.  ``overlaps[n]`` is
    the matched overlap with the same label at the previous grid point (1 on
    the first point).
    """

    beta: float
    energies: np.ndarray
    states: np.ndarray
    labels: np.ndarray
    overlaps: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.energies)

    def state(self, n: int) -> np.ndarray:
        return self.states[:, n]

    def parities(self) -> np.ndarray:
        """Sign of <n~|P|n~> for every label; raises if a state has mixed parity."""
        weights = np.abs(self.states) ** 2
        p = weights[0::2].sum(axis=0) - weights[1::2].sum(axis=0)
        if np.any(np.abs(p) < 0.999):
            bad = int(np.argmin(np.abs(p)))
            raise ContractViolation(f"label {bad} has indefinite parity <P>={p[bad]:.4f}")
        return np.sign(p).astype(int)


def _from_raw(beta, energies, vectors, raw_for_label, overlaps) -> LabeledEigensystem:
    raw_for_label = np.asarray(raw_for_label, dtype=int)
    return LabeledEigensystem(
        beta=float(beta),
        energies=energies[raw_for_label].copy(),
        states=_fix_phase(vectors[:, raw_for_label]),
        labels=raw_for_label,
        overlaps=np.asarray(overlaps, dtype=float),
    )


def label_fock(beta: float, energies: np.ndarray, vectors: np.ndarray) -> LabeledEigensystem:
    """Label eigenstates by their dominant Fock component (use at beta = 0)."""
    dim = len(energies)
    weights = np.abs(vectors) ** 2
    raw_for_label = np.full(dim, -1)
    taken = np.zeros(dim, dtype=bool)
    for flat in np.argsort(-weights, axis=None, kind="stable"):
        n, j = divmod(int(flat), dim)
        if raw_for_label[n] >= 0 or taken[j]:
            continue
        raw_for_label[n] = j
        taken[j] = True
    return _from_raw(beta, energies, vectors, raw_for_label, np.ones(dim))


def match_labels(
    prev: LabeledEigensystem, beta: float, energies: np.ndarray, vectors: np.ndarray
) -> LabeledEigensystem:
    """Carry labels from ``prev`` onto a new raw eigensystem.

    Greedy one-to-one matching in descending |<new|prev_n>|.
    """
    dim = len(energies)
    overlap = np.abs(prev.states.conj().T @ vectors)  # [label, raw]
    raw_for_label = np.full(dim, -1)
    matched = np.zeros(dim)
    taken = np.zeros(dim, dtype=bool)
    remaining = dim
    for flat in np.argsort(-overlap, axis=None, kind="stable"):
        n, j = divmod(int(flat), dim)
        if raw_for_label[n] >= 0 or taken[j]:
            continue
        raw_for_label[n] = j
        matched[n] = overlap[n, j]
        taken[j] = True
        remaining -= 1
        if remaining == 0:
            break
    worst = int(np.argmin(matched))
    if matched[worst] < MIN_OVERLAP:
        raise AmbiguousTrackingError(prev.beta, beta, worst, matched[worst])
    return _from_raw(beta, energies, vectors, raw_for_label, matched)


def label_sweep(params: KpoParams, betas) -> list[LabeledEigensystem]:
    """Labeled eigensystems along an ascending beta grid starting at 0."""
    betas = np.asarray(betas, dtype=float)
    if betas.ndim != 1 or len(betas) == 0:
        raise ValueError("betas must be a non-empty 1-D sequence")
    if betas[0] != 0.0:
        raise ValueError("label_sweep needs betas[0] == 0 (labels are defined there)")
    if np.any(np.diff(betas) <= 0):
        raise ValueError("betas must be strictly ascending")
    out = []
    for beta in betas:
        w, v = diagonalize(hamiltonian_rwa(params, beta))
        if not out:
            out.append(label_fock(beta, w, v))
        else:
            out.append(match_labels(out[-1], beta, w, v))
    return out


def tracking_grid(beta_max: float, step: float = DEFAULT_BETA_STEP) -> np.ndarray:
    """Uniform grid 0..beta_max with spacing at most ``step``."""
    if beta_max <= 0:
        return np.zeros(1)
    n = max(int(np.ceil(beta_max / step - 1e-9)), 1)
    return np.linspace(0.0, beta_max, n + 1)


class LevelTracker:
    """Labeled eigensystems at arbitrary beta, anchored on a tracked grid.

    The grid sweep is done once; a query at any beta inside the grid is
    diagonalized directly and labeled by overlap with the nearest grid point
    at or below it.
    """

    def __init__(self, params: KpoParams, beta_max: float, step: float = DEFAULT_BETA_STEP):
        self.params = params
        self.grid = tracking_grid(beta_max, step)
        self.systems = label_sweep(params, self.grid)

    @property
    def beta_max(self) -> float:
        return float(self.grid[-1])

    def at(self, beta: float) -> LabeledEigensystem:
        beta = abs(float(beta))
        if beta > self.beta_max * (1 + 1e-12):
            raise ValueError(
                f"beta/2pi={beta / mhz(1):.6g} MHz outside the tracked range "
                f"(max {self.beta_max / mhz(1):.6g} MHz)"
            )
        k = bisect.bisect_right(self.grid.tolist(), beta) - 1
        anchor = self.systems[k]
        if beta == anchor.beta:
            return anchor
        w, v = diagonalize(hamiltonian_rwa(self.params, beta))
        return match_labels(anchor, beta, w, v)


def labeled_at(params: KpoParams, beta: float, step: float = DEFAULT_BETA_STEP) -> LabeledEigensystem:
    """Labeled eigensystem at a single beta, tracked from beta = 0."""
    return label_sweep(params, tracking_grid(abs(beta), step))[-1]


@dataclass(frozen=True)
class TransitionTable:
    """Pairwise transition data for labels 0..K-1.

    omega[m, n] = E_m - E_n,  x[m, n] = <m~|a+|n~>,  y[n] = <n~|a+a|n~>.
    ``populations`` is attached later from the steady state.
    """

    beta: float
    omega: np.ndarray
    x: np.ndarray
    y: np.ndarray
    populations: np.ndarray | None = None

    @property
    def size(self) -> int:
        return len(self.y)

    def with_populations(self, populations) -> TransitionTable:
        pops = np.asarray(populations, dtype=float)[: self.size]
        return TransitionTable(self.beta, self.omega, self.x, self.y, pops.copy())

    def pairs(self):
        """Ordered label pairs (m, n) with m != n."""
        k = self.size
        return [(m, n) for m in range(k) for n in range(k) if m != n]


def transition_table(sys: LabeledEigensystem, max_label: int = TABLE_LABELS) -> TransitionTable:
    if max_label < 0:
        raise ValueError("max_label must be non-negative")
    if max_label >= sys.dim - 2:
        raise TruncationEdgeError(
            f"max_label={max_label} reaches the truncation edge (dim={sys.dim}); "
            f"need max_label < dim - 2"
        )
    k = max_label + 1
    s = sys.states[:, :k]
    a = annihilation(sys.dim)
    x = s.conj().T @ a.conj().T @ s
    y = np.real(np.einsum("in,i,in->n", s.conj(), np.arange(sys.dim, dtype=float), s))
    e = sys.energies[:k]
    omega = e[:, None] - e[None, :]
    return TransitionTable(beta=sys.beta, omega=omega, x=x, y=y)
