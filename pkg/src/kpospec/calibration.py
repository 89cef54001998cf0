"""Generator power -> on-chip drive amplitude, and line-attenuation fitting.

Flux modulation of amplitude i_amp shifts the resonator by
dw = |dw/di| i_amp, and the rotating-frame drive amplitude is beta = dw / 4.
The current follows from the on-chip power in dBm over the pump-line
impedance: i_amp = sqrt(2 / (Z0 * 1000)) * 10**(p_dbm / 20) amperes, the 1000
being the mW -> W factor of the dBm scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from kpospec.eigensystem import LevelTracker
from kpospec.operators import KpoParams, mhz

MICROAMP = 1e6  # A -> uA
DEFAULT_Z0 = 50.0
SEARCH_RANGE_DB = (-80.0, -30.0)
COARSE_STEP_DB = 0.5
REFINE_TOL_DB = 0.01
DEFAULT_BETA_LIMIT = mhz(20.0)
CURVATURE_FLOOR = 1e-8
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DriveLine:
    """domega_di in rad/us per uA (sign kept, only magnitude used)."""

    domega_di: float
    z0: float = DEFAULT_Z0
    attenuation_db: float = 0.0

    def __post_init__(self):
        if not self.z0 > 0:
            raise ValueError("z0 must be positive")

    def with_attenuation(self, attenuation_db: float) -> DriveLine:
        return DriveLine(self.domega_di, self.z0, float(attenuation_db))


def current_amplitude(p_dbm, z0: float = DEFAULT_Z0):
    """Peak ac current in amperes for an average power ``p_dbm`` into ``z0``."""
    return np.sqrt(2.0 / (z0 * 1000.0)) * 10.0 ** (np.asarray(p_dbm, dtype=float) / 20.0)


def power_to_beta(p_rt_dbm, line: DriveLine):
    p_kpo = np.asarray(p_rt_dbm, dtype=float) + line.attenuation_db
    i_amp = current_amplitude(p_kpo, line.z0) * MICROAMP
    beta = abs(line.domega_di) * i_amp / 4.0
    return beta if np.ndim(beta) else float(beta)


def beta_to_delta_omega(beta):
    if np.any(np.asarray(beta) < 0):
        raise ValueError("beta must be non-negative")
    return 4.0 * beta


def delta_omega_from_power(p_kpo_dbm, domega_di: float, z0: float = DEFAULT_Z0):
    """Frequency-modulation amplitude from on-chip power."""
    return abs(domega_di) * current_amplitude(p_kpo_dbm, z0) * MICROAMP


@dataclass(frozen=True)
class Observation:
    p_rt_dbm: float
    pair: tuple[int, int]
    omega: float  # measured w_mn, rotating frame


@dataclass(frozen=True)
class Residual:
    p_rt_dbm: float
    pair: tuple[int, int]
    measured: float
    model: float

    @property
    def value(self) -> float:
        return self.measured - self.model


@dataclass
class CalibrationResult:
    attenuation_db: float
    objective: float
    residuals: list[Residual]
    curvature: float
    search_interval: tuple[float, float]
    ill_conditioned: bool = False
    scan: list[tuple[float, float]] = field(default_factory=list, repr=False)


class TransitionModel:
    """Model transition frequencies w_mn(beta) with labels tracked up to a limit."""

    def __init__(self, params: KpoParams, beta_limit: float = DEFAULT_BETA_LIMIT):
        self.params = params
        self.tracker = LevelTracker(params, beta_limit)

    @property
    def beta_limit(self) -> float:
        return self.tracker.beta_max

    def omega(self, beta: float, pair: tuple[int, int]) -> float:
        sys = self.tracker.at(beta)
        m, n = pair
        return float(sys.energies[m] - sys.energies[n])


def _golden_section(f, a: float, b: float, tol: float):
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def fit_attenuation(
    observations,
    params: KpoParams,
    line: DriveLine,
    search_range: tuple[float, float] = SEARCH_RANGE_DB,
    beta_limit: float = DEFAULT_BETA_LIMIT,
    model: TransitionModel | None = None,
) -> CalibrationResult:
    """Attenuation minimizing sum (w_meas - w_model(beta(p_rt, R)))^2.

    Coarse scan at 0.5 dB, then golden-section refinement to 0.01 dB around
    the best scan point.  The upper end of ``search_range`` is lowered, if
    needed, so the largest implied beta stays inside ``beta_limit`` where the
    truncated model and its labels are valid.
    """
    obs = [o if isinstance(o, Observation) else Observation(o[0], tuple(o[1]), o[2]) for o in observations]
    if not obs:
        raise ValueError("fit_attenuation needs at least one observation")
    if model is None:
        model = TransitionModel(params, beta_limit)

    lo, hi = search_range
    p_max = max(o.p_rt_dbm for o in obs)
    beta_at_zero_db = power_to_beta(p_max, line.with_attenuation(0.0))
    if beta_at_zero_db > 0:
        hi = min(hi, 20.0 * math.log10(model.beta_limit / beta_at_zero_db))
    if hi <= lo:
        raise ValueError(
            f"no attenuation in {search_range} keeps beta below the model limit "
            f"at p_rt={p_max} dBm"
        )

    def residuals(r_db):
        ln = line.with_attenuation(r_db)
        out = []
        for o in obs:
            beta = power_to_beta(o.p_rt_dbm, ln)
            out.append(Residual(o.p_rt_dbm, o.pair, o.omega, model.omega(beta, o.pair)))
        return out

    def objective(r_db):
        return float(sum(r.value**2 for r in residuals(r_db)))

    n_steps = int(math.floor((hi - lo) / COARSE_STEP_DB + 1e-9))
    grid = [lo + k * COARSE_STEP_DB for k in range(n_steps + 1)]
    if grid[-1] < hi:
        grid.append(hi)
    scan = [(r, objective(r)) for r in grid]
    k_best = min(range(len(scan)), key=lambda k: scan[k][1])
    a = scan[max(k_best - 1, 0)][0]
    b = scan[min(k_best + 1, len(scan) - 1)][0]
    r_best, f_best = _golden_section(objective, a, b, REFINE_TOL_DB)
    if scan[k_best][1] < f_best:
        r_best, f_best = scan[k_best]

    h = COARSE_STEP_DB
    r_lo, r_hi = max(r_best - h, lo), min(r_best + h, hi)
    curvature = (objective(r_lo) - 2.0 * f_best + objective(r_hi)) / (0.5 * (r_hi - r_lo)) ** 2
    res = residuals(r_best)
    return CalibrationResult(
        attenuation_db=float(r_best),
        objective=float(sum(r.value**2 for r in res)),
        residuals=res,
        curvature=float(curvature),
        search_interval=(lo, hi),
        ill_conditioned=bool(curvature < CURVATURE_FLOOR),
        scan=scan,
    )


def synthetic_observations(
    params: KpoParams,
    line: DriveLine,
    powers_dbm,
    pairs,
    model: TransitionModel | None = None,
) -> list[Observation]:
    """Noiseless observations generated with ``line.attenuation_db``."""
    if model is None:
        model = TransitionModel(params)
    out = []
    for p in powers_dbm:
        beta = power_to_beta(p, line)
        for pair in pairs:
            out.append(Observation(float(p), tuple(pair), model.omega(beta, tuple(pair))))
    return out
