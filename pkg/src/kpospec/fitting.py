"""Single-resonance fits and nominal loss rates.

An isolated line in a reflection spectrum is fitted to the bare-resonator
form

    Gamma(w) = 1 - ke / (i (w - w0) + (ke + ki) / 2)

whose ``ke`` and ``ki`` are *nominal* rates: ``ke`` turns negative on an
amplification peak.  The model predicts them from the eigensystem and the
steady state as

    ke~ = -kappa_e |X_mn|^2 (rho_mm - rho_nn)
    ki~ = kappa_total (Y_mm + Y_nn) + kappa_e |X_mn|^2 (rho_mm - rho_nn)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from kpospec.eigensystem import TransitionTable
from kpospec.errors import DegenerateDataError
from kpospec.operators import KpoParams
from kpospec.spectrum import (
    DrivenPoint,
    default_threshold,
    nominal_external,
    reflection_from_table,
    simulate,
)

MAX_ITER = 200
STEP_TOL = 1e-10
RESIDUAL_CEILING = 0.05
WINDOW_LINEWIDTHS = 5.0
OVERLAP_LINEWIDTHS = 3.0
WINDOW_SAMPLES = 201


@dataclass(frozen=True)
class ResonanceFit:
    omega_mn: float
    kappa_e_nominal: float
    kappa_i_nominal: float
    residual: float = float("nan")
    converged: bool = False
    iterations: int = 0


def lineshape(probe, omega_mn: float, kappa_e: float, kappa_i: float):
    probe = np.asarray(probe, dtype=float)
    return 1.0 - kappa_e / (1j * (probe - omega_mn) + 0.5 * (kappa_e + kappa_i))


def _model_and_jacobian(w, p):
    w0, ke, ki = p
    den = 1j * (w - w0) + 0.5 * (ke + ki)
    g = 1.0 - ke / den
    inv2 = 1.0 / den**2
    jac = np.column_stack([-1j * ke * inv2, -1.0 / den + 0.5 * ke * inv2, 0.5 * ke * inv2])
    return g, jac


def _residuals(w, data, p, amplitude_only):
    g, jac = _model_and_jacobian(w, p)
    if amplitude_only:
        mag = np.abs(g)
        r = mag - data
        j = np.real(np.conj(g)[:, None] * jac) / mag[:, None]
        return r, j
    r = g - data
    return np.concatenate([r.real, r.imag]), np.vstack([jac.real, jac.imag])


def initial_guess(probe, gamma, amplitude_only: bool = False) -> ResonanceFit:
    """Guess from the data: centre at the extremum, width at half depth,
    ke from the on-resonance value 1 - 2 ke / (ke + ki)."""
    probe = np.asarray(probe, dtype=float)
    gamma = np.asarray(gamma)
    mag = np.abs(gamma) if amplitude_only or np.iscomplexobj(gamma) else gamma
    dev = np.abs(mag - 1.0) if amplitude_only else np.abs(gamma - 1.0)
    k = int(np.argmax(dev))
    w0 = probe[k]
    half = dev >= 0.5 * dev[k]
    left, right = k, k
    while left > 0 and half[left - 1]:
        left -= 1
    while right < len(probe) - 1 and half[right + 1]:
        right += 1
    span = probe[right] - probe[left]
    step = np.median(np.diff(probe)) if len(probe) > 1 else 1.0
    total = max(span, 2 * step)
    if amplitude_only:
        on_res = mag[k]
    else:
        on_res = np.real(gamma[k])
    ke = 0.5 * (1.0 - on_res) * total
    return ResonanceFit(omega_mn=float(w0), kappa_e_nominal=float(ke), kappa_i_nominal=float(total - ke))


def fit_resonance(
    probe,
    gamma,
    initial: ResonanceFit | None = None,
    amplitude_only: bool = False,
) -> ResonanceFit:
    """Least-squares fit of the bare-resonator lineshape by damped Gauss-Newton.

    ``gamma`` is complex unless ``amplitude_only``, in which case it may be
    |Gamma| (real) or complex (its modulus is used).  Converges when the
    relative step drops below 1e-10 within 200 iterations; otherwise the
    best point so far is returned with ``converged=False``.  A converged fit
    must also have its centre inside the sampled range, a positive total
    width narrower than that range, and rms misfit below RESIDUAL_CEILING.
    """
    probe = np.asarray(probe, dtype=float)
    gamma = np.asarray(gamma)
    if len(probe) != len(gamma):
        raise ValueError("probe and gamma lengths differ")
    if len(probe) < 7:
        raise ValueError("need at least 7 samples")
    data = np.abs(gamma) if amplitude_only else gamma.astype(complex)
    if np.var(data) < 1e-14:
        raise DegenerateDataError("spectrum is flat; no resonance to fit")
    if initial is None:
        initial = initial_guess(probe, gamma, amplitude_only)

    p = np.array([initial.omega_mn, initial.kappa_e_nominal, initial.kappa_i_nominal], dtype=float)
    r, jac = _residuals(probe, data, p, amplitude_only)
    cost = float(r @ r)
    lam = 1e-3
    converged = False
    it = 0
    for it in range(1, MAX_ITER + 1):
        jtj = jac.T @ jac
        grad = jac.T @ r
        diag = np.diag(jtj).copy()
        diag[diag == 0] = 1.0
        improved = False
        for _ in range(60):
            try:
                step = -np.linalg.solve(jtj + lam * np.diag(diag), grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = p + step
            r_t, jac_t = _residuals(probe, data, trial, amplitude_only)
            cost_t = float(r_t @ r_t)
            if np.isfinite(cost_t) and cost_t <= cost:
                p, r, jac, cost = trial, r_t, jac_t, cost_t
                lam = max(lam / 3.0, 1e-12)
                improved = True
                break
            lam *= 4.0
        if not improved:
            # no descent direction left: at a minimum to working precision
            converged = True
            break
        if np.linalg.norm(step) <= STEP_TOL * (np.linalg.norm(p) + STEP_TOL):
            converged = True
            break

    rms = float(np.sqrt(cost / len(probe)))
    span = probe[-1] - probe[0]
    resolved = probe[0] <= p[0] <= probe[-1] and 0 < p[1] + p[2] < span
    converged = converged and resolved and rms < RESIDUAL_CEILING
    return ResonanceFit(
        omega_mn=float(p[0]),
        kappa_e_nominal=float(p[1]),
        kappa_i_nominal=float(p[2]),
        residual=rms,
        converged=bool(converged),
        iterations=it,
    )


@dataclass(frozen=True)
class NominalLossPrediction:
    pair: tuple[int, int]
    kappa_e_pred: float
    kappa_i_pred: float


def predict_nominal_losses(table: TransitionTable, params: KpoParams, pairs=None) -> list[NominalLossPrediction]:
    kext = nominal_external(table, params)
    if pairs is None:
        pairs = table.pairs()
    out = []
    for m, n in pairs:
        total = params.kappa_total * (table.y[m] + table.y[n])
        out.append(NominalLossPrediction((m, n), float(kext[m, n]), float(total - kext[m, n])))
    return out


@dataclass(frozen=True)
class LossComparisonRow:
    beta: float
    pair: tuple[int, int]
    fit: ResonanceFit
    prediction: NominalLossPrediction
    flag: str  # "" | "overlap" | "weak" | "nofit"

    @property
    def flagged(self) -> bool:
        return bool(self.flag)


def _overlap(point: DrivenPoint, pair, params: KpoParams, threshold: float) -> bool:
    table = point.table
    kext = nominal_external(table, params)
    m, n = pair
    width = params.kappa_total * (table.y[m] + table.y[n])
    for a, b in table.pairs():
        if (a, b) == pair or abs(kext[a, b]) <= threshold:
            continue
        if abs(table.omega[a, b] - table.omega[m, n]) < OVERLAP_LINEWIDTHS * width:
            return True
    return False


def compare_point(
    point: DrivenPoint,
    pair,
    params: KpoParams,
    amplitude_only: bool = False,
    threshold: float | None = None,
) -> LossComparisonRow:
    """Fit one line of the synthesized spectrum at ``point`` and set it
    beside the predicted nominal losses."""
    if threshold is None:
        threshold = default_threshold(params)
    pair = tuple(pair)
    m, n = pair
    table = point.table
    pred = predict_nominal_losses(table, params, [pair])[0]
    width = pred.kappa_e_pred + pred.kappa_i_pred
    w0 = table.omega[m, n]
    probe = np.linspace(w0 - WINDOW_LINEWIDTHS * width, w0 + WINDOW_LINEWIDTHS * width, WINDOW_SAMPLES)
    gamma = reflection_from_table(probe, table, params)

    flag = ""
    if abs(pred.kappa_e_pred) <= threshold:
        flag = "weak"
    elif _overlap(point, pair, params, threshold):
        flag = "overlap"
    guess = ResonanceFit(w0, pred.kappa_e_pred, pred.kappa_i_pred)
    try:
        fit = fit_resonance(probe, gamma, guess, amplitude_only)
    except DegenerateDataError:
        fit = ResonanceFit(float("nan"), float("nan"), float("nan"))
        flag = flag or "nofit"
    if not flag and not fit.converged:
        flag = "nofit"
    return LossComparisonRow(beta=point.beta, pair=pair, fit=fit, prediction=pred, flag=flag)


def loss_comparison_sweep(
    params: KpoParams,
    beta_axis,
    pairs,
    amplitude_only: bool = False,
    threshold: float | None = None,
    points: list[DrivenPoint] | None = None,
) -> list[LossComparisonRow]:
    if points is None:
        points = simulate(params, beta_axis)
    return [
        compare_point(pt, pair, params, amplitude_only, threshold)
        for pt in points
        for pair in pairs
    ]
