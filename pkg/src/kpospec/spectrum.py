"""Reflection coefficient of the KPO, undriven and under the two-photon drive.

Under the drive, the reflection is a sum of one term per ordered pair of
adiabatic eigenstates,

    Gamma = 1 + sum_{m != n} xi_mn,
    xi_mn = kappa_e |X_mn|^2 (rho_mm - rho_nn)
            / (i (w - w_mn) + kappa_total (Y_mm + Y_nn) / 2),

with X_mn = <m~|a+|n~>, Y_nn = <n~|a+a|n~> and steady-state populations rho.
Probe frequencies are rotating-frame detunings w_ref - w_p/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from kpospec.eigensystem import (
    DEFAULT_BETA_STEP,
    TABLE_LABELS,
    LabeledEigensystem,
    LevelTracker,
    TransitionTable,
    transition_table,
)
from kpospec.errors import ConsistencyError, SingularTermError
from kpospec.operators import KpoParams, mhz
from kpospec.steadystate import SteadyStateDensity, populations, solve_steady_state

DEFAULT_MAX_LABEL = TABLE_LABELS
DEFAULT_WINDOW = (mhz(-30.0), mhz(30.0))
VISIBILITY_FRACTION = 0.01


def reflection_undriven(probe, omega_r: float, params: KpoParams):
    """Single-mode reflection 1 - ke / (i (w - w_r) + (ke + ki) / 2)."""
    if not params.kappa_total > 0:
        raise ValueError("kappa_e + kappa_i must be positive")
    probe = np.asarray(probe, dtype=float)
    g = 1.0 - params.kappa_e / (1j * (probe - omega_r) + 0.5 * params.kappa_total)
    return g if np.ndim(g) else complex(g)


@dataclass(frozen=True)
class XiTerm:
    """One transition's contribution.  ``linewidth`` is the real part of the
    denominator, kappa_total (Y_mm + Y_nn) / 2 (a half width)."""

    m: int
    n: int
    weight: float
    resonance: float
    linewidth: float
    value: complex | np.ndarray = field(repr=False)

    def evaluate(self, probe):
        probe = np.asarray(probe, dtype=float)
        den = 1j * (probe - self.resonance) + self.linewidth
        if self.weight == 0.0:
            return np.zeros_like(den) if np.ndim(den) else 0j
        if np.any(den == 0):
            raise SingularTermError(
                f"xi_{self.m}{self.n}: zero linewidth and probe exactly on resonance"
            )
        v = self.weight / den
        return v if np.ndim(v) else complex(v)


def _require_populations(table: TransitionTable) -> np.ndarray:
    if table.populations is None:
        raise ConsistencyError("transition table has no populations attached")
    return table.populations


def nominal_external(table: TransitionTable, params: KpoParams) -> np.ndarray:
    """-kappa_e |X_mn|^2 (rho_mm - rho_nn) for all pairs (zero diagonal)."""
    pops = _require_populations(table)
    k = -params.kappa_e * np.abs(table.x) ** 2 * (pops[:, None] - pops[None, :])
    np.fill_diagonal(k, 0.0)
    return k


def xi_term(table: TransitionTable, m: int, n: int, probe, params: KpoParams) -> XiTerm:
    pops = _require_populations(table)
    if table.y[m] < 0 or table.y[n] < 0:
        raise ConsistencyError("photon-number expectations must be non-negative")
    weight = params.kappa_e * abs(table.x[m, n]) ** 2 * (pops[m] - pops[n])
    term = XiTerm(
        m=m,
        n=n,
        weight=float(weight),
        resonance=float(table.omega[m, n]),
        linewidth=float(0.5 * params.kappa_total * (table.y[m] + table.y[n])),
        value=0j,
    )
    return XiTerm(**{**term.__dict__, "value": term.evaluate(probe)})


def reflection_from_table(probe, table: TransitionTable, params: KpoParams, max_label: int | None = None):
    """Gamma from a populated transition table, summed over labels <= max_label."""
    pops = _require_populations(table)
    k = table.size if max_label is None else max_label + 1
    if k > table.size:
        raise ConsistencyError(f"max_label={max_label} exceeds the tabulated labels")
    probe = np.asarray(probe, dtype=float)
    weight = params.kappa_e * np.abs(table.x[:k, :k]) ** 2 * (pops[:k, None] - pops[None, :k])
    width = 0.5 * params.kappa_total * (table.y[:k, None] + table.y[None, :k])
    m_idx, n_idx = np.nonzero(~np.eye(k, dtype=bool))
    w = weight[m_idx, n_idx]
    keep = w != 0.0
    m_idx, n_idx, w = m_idx[keep], n_idx[keep], w[keep]
    den = 1j * (probe[..., None] - table.omega[m_idx, n_idx]) + width[m_idx, n_idx]
    if np.any(den == 0):
        raise SingularTermError("a transition with zero linewidth is probed exactly on resonance")
    g = 1.0 + (w / den).sum(axis=-1)
    return g if np.ndim(g) else complex(g)


def reflection_driven(
    probe,
    sys: LabeledEigensystem,
    rho: SteadyStateDensity,
    params: KpoParams,
    max_label: int = DEFAULT_MAX_LABEL,
):
    if max_label > TABLE_LABELS:
        raise ConsistencyError(f"max_label must be <= {TABLE_LABELS}")
    table = transition_table(sys, TABLE_LABELS).with_populations(populations(rho, sys))
    return reflection_from_table(probe, table, params, max_label)


@dataclass(frozen=True)
class DrivenPoint:
    """Everything computed at one drive amplitude."""

    beta: float
    system: LabeledEigensystem
    steady: SteadyStateDensity
    table: TransitionTable
    populations: np.ndarray


def _check_axis(axis, name):
    axis = np.asarray(axis, dtype=float)
    if axis.ndim != 1 or len(axis) == 0:
        raise ValueError(f"{name} must be a non-empty 1-D sequence")
    if np.any(np.diff(axis) <= 0):
        raise ValueError(f"{name} must be strictly ascending")
    return axis


def driven_point(params: KpoParams, sys: LabeledEigensystem) -> DrivenPoint:
    rho = solve_steady_state(params, sys.beta)
    pops = populations(rho, sys)
    table = transition_table(sys, TABLE_LABELS).with_populations(pops)
    return DrivenPoint(beta=sys.beta, system=sys, steady=rho, table=table, populations=pops)


def simulate(params: KpoParams, beta_axis, step: float = DEFAULT_BETA_STEP) -> list[DrivenPoint]:
    """Labeled eigensystem, steady state and populated table at each beta.

    Labels come from one tracked sweep from 0 to max(beta_axis); each point is
    then independent of the others.
    """
    beta_axis = _check_axis(np.abs(beta_axis), "beta_axis")
    tracker = LevelTracker(params, float(beta_axis[-1]), step)
    return [driven_point(params, tracker.at(b)) for b in beta_axis]


@dataclass(frozen=True)
class SpectrumGrid:
    beta_axis: np.ndarray
    probe_axis: np.ndarray
    gamma: np.ndarray  # shape (len(beta_axis), len(probe_axis))


def spectrum_from_points(points, probe_axis, params: KpoParams, max_label: int = DEFAULT_MAX_LABEL) -> SpectrumGrid:
    probe_axis = _check_axis(probe_axis, "probe_axis")
    gamma = np.array([reflection_from_table(probe_axis, p.table, params, max_label) for p in points])
    return SpectrumGrid(
        beta_axis=np.array([p.beta for p in points]),
        probe_axis=probe_axis,
        gamma=gamma.reshape(len(points), len(probe_axis)),
    )


def sweep_grid(params: KpoParams, beta_axis, probe_axis, max_label: int = DEFAULT_MAX_LABEL) -> SpectrumGrid:
    return spectrum_from_points(simulate(params, beta_axis), probe_axis, params, max_label)


@dataclass
class TransitionVisibility:
    pair: tuple[int, int]
    kinds: set[str]
    betas: list[float]

    @property
    def beta_range(self) -> tuple[float, float]:
        return (min(self.betas), max(self.betas))


@dataclass
class SpectralFeature:
    """Visible transitions that stay within a linewidth of each other
    wherever they are visible together; they show up as one line."""

    pairs: list[tuple[int, int]]
    kinds: set[str]


@dataclass
class VisibilityReport:
    transitions: list[TransitionVisibility]
    features: list[SpectralFeature]

    @property
    def pairs(self) -> set[tuple[int, int]]:
        return {t.pair for t in self.transitions}

    @property
    def peak_features(self) -> list[SpectralFeature]:
        return [f for f in self.features if "peak" in f.kinds]


def default_threshold(params: KpoParams) -> float:
    return VISIBILITY_FRACTION * params.kappa_e


def visible_transitions(
    points,
    params: KpoParams,
    threshold: float | None = None,
    window: tuple[float, float] = DEFAULT_WINDOW,
) -> VisibilityReport:
    """Transitions whose nominal external loss exceeds ``threshold`` inside
    the probe window at some beta.

    A transition is a dip where rho_mm < rho_nn and an amplification peak
    where rho_mm > rho_nn.
    """
    if threshold is None:
        threshold = default_threshold(params)
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    lo, hi = window

    seen: dict[tuple[int, int], TransitionVisibility] = {}
    per_beta = []  # (kext matrix, visible mask, omega, fwhm)
    for p in points:
        kext = nominal_external(p.table, params)
        om = p.table.omega
        vis = (np.abs(kext) > threshold) & (om >= lo) & (om <= hi)
        fwhm = params.kappa_total * (p.table.y[:, None] + p.table.y[None, :])
        per_beta.append((kext, vis, om, fwhm))
        for m, n in zip(*np.nonzero(vis)):
            pair = (int(m), int(n))
            rec = seen.setdefault(pair, TransitionVisibility(pair, set(), []))
            rec.kinds.add("dip" if kext[m, n] > 0 else "peak")
            rec.betas.append(p.beta)

    order = sorted(seen)
    parent = {pair: pair for pair in order}

    def root(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, a in enumerate(order):
        for b in order[i + 1 :]:
            together = [
                (om, fwhm)
                for _, vis, om, fwhm in per_beta
                if vis[a] and vis[b]
            ]
            if together and all(
                abs(om[a] - om[b]) < max(fwhm[a], fwhm[b]) for om, fwhm in together
            ):
                parent[root(b)] = root(a)

    groups: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for pair in order:
        groups.setdefault(root(pair), []).append(pair)
    features = []
    for members in groups.values():
        kinds = set()
        for kext, vis, _, _ in per_beta:
            shown = [pr for pr in members if vis[pr]]
            if not shown:
                continue
            net = sum(kext[pr] for pr in shown)
            if abs(net) > threshold:
                kinds.add("dip" if net > 0 else "peak")
        features.append(SpectralFeature(pairs=members, kinds=kinds))
    return VisibilityReport(transitions=[seen[p] for p in order], features=features)
