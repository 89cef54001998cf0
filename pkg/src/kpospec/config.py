"""INI run configuration and the shipped presets."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from kpospec.calibration import DEFAULT_Z0, DriveLine, power_to_beta
from kpospec.errors import ConfigError
from kpospec.operators import DEFAULT_DIM, KpoParams, mhz

PRESETS = ("delta_plus", "delta_zero", "delta_minus")

_SCHEMA = {
    "device": {
        "delta_mhz": True, "chi_mhz": True, "kappa_e_mhz": True, "kappa_i_mhz": True,
        "gamma_phi_mhz": False, "dim": False,
    },
    "drive": {
        "beta_min_mhz": False, "beta_max_mhz": False, "beta_steps": False,
        "power_min_dbm": False, "power_max_dbm": False, "power_steps": False,
        "domega_di_mhz_per_ua": False, "z0_ohm": False, "attenuation_db": False,
    },
    "probe": {"min_mhz": True, "max_mhz": True, "steps": True},
    "output": {"directory": False, "formats": False},
    "fit": {"pairs": False},
}
_OPTIONAL_SECTIONS = {"output", "fit"}


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError(f"grid steps must be >= 1, got {self.steps}")
        if self.steps > 1 and not self.stop > self.start:
            raise ConfigError(f"grid must be strictly ascending: {self.start} .. {self.stop}")

    def values(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration; numbers are kept in MHz / dBm as written."""

    delta_mhz: float
    chi_mhz: float
    kappa_e_mhz: float
    kappa_i_mhz: float
    probe: Grid
    gamma_phi_mhz: float = 0.0
    dim: int = DEFAULT_DIM
    beta_grid: Grid | None = None
    power_grid: Grid | None = None
    domega_di_mhz_per_ua: float | None = None
    z0_ohm: float = DEFAULT_Z0
    attenuation_db: float | None = None
    out_dir: str = "kpo_out"
    formats: tuple[str, ...] = ("csv",)
    fit_pairs: tuple[tuple[int, int], ...] | None = None
    source: str = field(default="", compare=False)

    def __post_init__(self):
        if (self.beta_grid is None) == (self.power_grid is None):
            raise ConfigError("[drive] needs exactly one of a beta grid or a power grid")
        if self.power_grid is not None and (self.domega_di_mhz_per_ua is None or self.attenuation_db is None):
            raise ConfigError("a power grid needs domega_di_mhz_per_ua and attenuation_db")
        if self.beta_grid is not None and self.beta_grid.start < 0:
            raise ConfigError("beta grid must be non-negative")
        self.params()  # validates device numbers

    def params(self) -> KpoParams:
        try:
            return KpoParams.from_mhz(
                self.delta_mhz, self.chi_mhz, self.kappa_e_mhz, self.kappa_i_mhz,
                gamma_phi=self.gamma_phi_mhz, dim=self.dim,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def line(self) -> DriveLine:
        if self.domega_di_mhz_per_ua is None:
            raise ConfigError("[drive] domega_di_mhz_per_ua is required for power conversion")
        return DriveLine(
            domega_di=mhz(self.domega_di_mhz_per_ua),
            z0=self.z0_ohm,
            attenuation_db=0.0 if self.attenuation_db is None else self.attenuation_db,
        )

    def beta_axis(self) -> np.ndarray:
        """Angular beta values of the drive grid."""
        if self.beta_grid is not None:
            return mhz(self.beta_grid.values())
        return np.asarray(power_to_beta(self.power_grid.values(), self.line()), dtype=float)

    def probe_axis(self) -> np.ndarray:
        return mhz(self.probe.values())

    def with_overrides(self, beta_mhz: float | None = None, dim: int | None = None) -> RunConfig:
        changes = dict(self.__dict__)
        if beta_mhz is not None:
            changes.update(beta_grid=Grid(float(beta_mhz), float(beta_mhz), 1), power_grid=None)
        if dim is not None:
            changes["dim"] = int(dim)
        return RunConfig(**changes)


def _parse_pairs(text: str) -> tuple[tuple[int, int], ...]:
    pairs = []
    for item in text.replace(";", ",").split(","):
        item = item.strip()
        if not item:
            continue
        try:
            m, n = (int(s) for s in item.split("-"))
        except ValueError:
            raise ConfigError(f"[fit] pairs: bad entry {item!r}, expected like 1-0") from None
        if m == n or m < 0 or n < 0:
            raise ConfigError(f"[fit] pairs: invalid pair {item!r}")
        pairs.append((m, n))
    if not pairs:
        raise ConfigError("[fit] pairs is empty")
    return tuple(pairs)


def _get(cp, section, key, kind=float, default=None):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key).strip()
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from None


def _grid(cp, prefix, unit):
    keys = [f"{prefix}_min_{unit}", f"{prefix}_max_{unit}", f"{prefix}_steps"]
    present = [cp.has_option("drive", k) for k in keys]
    if not any(present):
        return None
    if not all(present):
        missing = [k for k, p in zip(keys, present) if not p]
        raise ConfigError(f"[drive] incomplete {prefix} grid, missing {', '.join(missing)}")
    return Grid(_get(cp, "drive", keys[0]), _get(cp, "drive", keys[1]), _get(cp, "drive", keys[2], int))


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in cp.options(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
    for section, keys in _SCHEMA.items():
        if not cp.has_section(section):
            if section in _OPTIONAL_SECTIONS:
                continue
            raise ConfigError(f"missing section [{section}]")
        for key, required in keys.items():
            if required and not cp.has_option(section, key):
                raise ConfigError(f"missing required key {key!r} in [{section}]")

    beta_grid = _grid(cp, "beta", "mhz")
    power_grid = _grid(cp, "power", "dbm")
    if beta_grid is not None and power_grid is not None:
        raise ConfigError("[drive] gives both a beta grid and a power grid")

    formats = ("csv",)
    if cp.has_option("output", "formats"):
        formats = tuple(f.strip() for f in cp.get("output", "formats").split(",") if f.strip())
        bad = [f for f in formats if f != "csv"]
        if bad or not formats:
            raise ConfigError(f"[output] formats: unsupported {', '.join(bad) or 'empty list'}")
    pairs = _parse_pairs(cp.get("fit", "pairs")) if cp.has_option("fit", "pairs") else None

    return RunConfig(
        delta_mhz=_get(cp, "device", "delta_mhz"),
        chi_mhz=_get(cp, "device", "chi_mhz"),
        kappa_e_mhz=_get(cp, "device", "kappa_e_mhz"),
        kappa_i_mhz=_get(cp, "device", "kappa_i_mhz"),
        gamma_phi_mhz=_get(cp, "device", "gamma_phi_mhz", default=0.0),
        dim=_get(cp, "device", "dim", int, DEFAULT_DIM),
        probe=Grid(_get(cp, "probe", "min_mhz"), _get(cp, "probe", "max_mhz"), _get(cp, "probe", "steps", int)),
        beta_grid=beta_grid,
        power_grid=power_grid,
        domega_di_mhz_per_ua=_get(cp, "drive", "domega_di_mhz_per_ua"),
        z0_ohm=_get(cp, "drive", "z0_ohm", default=DEFAULT_Z0),
        attenuation_db=_get(cp, "drive", "attenuation_db"),
        out_dir=cp.get("output", "directory", fallback="kpo_out").strip(),
        formats=formats,
        fit_pairs=pairs,
        source=source,
    )


def preset_path(name: str):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return resources.files("kpospec.presets").joinpath(f"{name}.cfg")


def load_config(path) -> RunConfig:
    """Load a config file; a bare preset name (e.g. ``delta_plus``) also works."""
    p = Path(path)
    if not p.exists():
        stem = p.name[:-4] if p.name.endswith(".cfg") else p.name
        if str(path) in (stem, f"{stem}.cfg") and stem in PRESETS:
            return parse_config(preset_path(stem).read_text(encoding="utf-8"), source=stem)
        raise ConfigError(f"config file not found: {path}")
    return parse_config(p.read_text(encoding="utf-8"), source=str(p))


def load_preset(name: str) -> RunConfig:
    return parse_config(preset_path(name).read_text(encoding="utf-8"), source=name)
