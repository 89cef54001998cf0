"""``kpo`` command-line front end."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from kpospec import io
from kpospec.analytic import TRANSITIONS, analytic_transition_frequencies
from kpospec.calibration import (
    DriveLine,
    Observation,
    TransitionModel,
    fit_attenuation,
    power_to_beta,
    synthetic_observations,
)
from kpospec.config import RunConfig, load_config
from kpospec.eigensystem import TABLE_LABELS, LevelTracker
from kpospec.errors import KpoError
from kpospec.fitting import fit_resonance, loss_comparison_sweep
from kpospec.operators import mhz, to_mhz
from kpospec.spectrum import simulate, spectrum_from_points, visible_transitions

SUBCOMMANDS = ("spectrum", "levels", "steady", "transitions", "analytic", "fit", "calibrate")
CALIBRATION_PAIRS = ((1, 0), (0, 1))


def _tracker(cfg: RunConfig):
    betas = cfg.beta_axis()
    tracker = LevelTracker(cfg.params(), float(betas.max()))
    return betas, tracker


def cmd_spectrum(cfg, out, args):
    params = cfg.params()
    points = simulate(params, cfg.beta_axis())
    grid = spectrum_from_points(points, cfg.probe_axis(), params)
    return [io.write_csv(out / "spectrum.csv", io.SPECTRUM_HEADER, io.spectrum_rows(grid))]


def cmd_levels(cfg, out, args):
    betas, tracker = _tracker(cfg)
    systems = [tracker.at(b) for b in betas]
    return [io.write_csv(out / "levels.csv", io.LEVELS_HEADER, io.level_rows(systems, TABLE_LABELS))]


def cmd_steady(cfg, out, args):
    points = simulate(cfg.params(), cfg.beta_axis())
    return [
        io.write_csv(out / "populations.csv", io.POPULATIONS_HEADER, io.population_rows(points, TABLE_LABELS)),
        io.write_csv(out / "matrix_elements.csv", io.MATRIX_HEADER, io.matrix_rows(points, TABLE_LABELS)),
    ]


def cmd_transitions(cfg, out, args):
    params = cfg.params()
    probe = cfg.probe_axis()
    report = visible_transitions(
        simulate(params, cfg.beta_axis()), params, window=(float(probe[0]), float(probe[-1]))
    )
    return [io.atomic_write_text(out / "transitions.json", io.transitions_report(report))]


def cmd_analytic(cfg, out, args):
    betas, tracker = _tracker(cfg)
    rows = []
    for b in betas:
        ana = analytic_transition_frequencies(mhz(cfg.delta_mhz), mhz(cfg.chi_mhz), b)
        e = tracker.at(b).energies
        for t in TRANSITIONS:
            rows.append((to_mhz(b), "analytic", t, to_mhz(ana[t])))
        for t in TRANSITIONS:
            m, n = int(t[0]), int(t[1])
            rows.append((to_mhz(b), "numeric", t, to_mhz(e[m] - e[n])))
    return [io.write_csv(out / "analytic.csv", io.ANALYTIC_HEADER, rows)]


def cmd_fit(cfg, out, args):
    if args.spectrum is not None:
        probe, data, amp = io.read_spectrum(args.spectrum)
        fit = fit_resonance(probe, data, amplitude_only=amp or args.amp_only)
        return [io.atomic_write_text(out / "fit.txt", io.fit_text(fit))]
    params = cfg.params()
    points = simulate(params, cfg.beta_axis())
    pairs = cfg.fit_pairs
    if pairs is None:
        probe = cfg.probe_axis()
        pairs = visible_transitions(points, params, window=(float(probe[0]), float(probe[-1]))).pairs
    rows = loss_comparison_sweep(params, None, pairs, amplitude_only=args.amp_only, points=points)
    return [io.write_csv(out / "loss_comparison.csv", io.COMPARISON_HEADER, io.comparison_rows(rows))]


def _synthetic_powers(cfg: RunConfig, line: DriveLine) -> np.ndarray:
    if cfg.power_grid is not None:
        return cfg.power_grid.values()
    # invert the power-to-beta map on the nonzero beta grid points
    betas = cfg.beta_axis()
    betas = betas[betas > 0]
    ref = float(power_to_beta(0.0, line))
    return 20.0 * np.log10(betas / ref)


def cmd_calibrate(cfg, out, args):
    params = cfg.params()
    line = cfg.line()
    model = TransitionModel(params)
    written = []
    if args.observations is not None:
        obs = [Observation(p, pair, w) for p, pair, w in io.read_observations(args.observations)]
    else:
        obs = synthetic_observations(params, line, _synthetic_powers(cfg, line), CALIBRATION_PAIRS, model)
        written.append(io.write_observations(out / "observations_synthetic.csv", obs))
    result = fit_attenuation(obs, params, line, model=model)
    text = io.calibration_text(result)
    written.append(io.atomic_write_text(out / "calibration.txt", text))
    print(text.splitlines()[0])
    return written


COMMANDS = {
    "spectrum": cmd_spectrum,
    "levels": cmd_levels,
    "steady": cmd_steady,
    "transitions": cmd_transitions,
    "analytic": cmd_analytic,
    "fit": cmd_fit,
    "calibrate": cmd_calibrate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kpo", description="Kerr parametric oscillator spectroscopy toolkit")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="INI file or preset name (delta_plus, delta_zero, delta_minus)")
    parser.add_argument("--out", help="output directory (overrides [output] directory)")
    parser.add_argument("--beta-mhz", type=float, help="evaluate at a single beta/2pi in MHz")
    parser.add_argument("--dim", type=int, help="Fock truncation override")
    parser.add_argument("--amp-only", action="store_true", help="fit |Gamma| instead of complex Gamma")
    parser.add_argument("--observations", type=Path, help="calibrate: observations CSV")
    parser.add_argument("--spectrum", type=Path, help="fit: measured spectrum CSV")
    return parser


def run_subcommand(name: str, cfg: RunConfig, args: argparse.Namespace) -> list[Path]:
    if name not in COMMANDS:
        raise KpoError(f"unknown subcommand {name!r}")
    cfg = cfg.with_overrides(args.beta_mhz, args.dim)
    out = Path(args.out if args.out else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return COMMANDS[name](cfg, out, args)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        for path in run_subcommand(args.subcommand, cfg, args):
            print(f"wrote {path}")
    except (KpoError, ValueError, OSError) as exc:
        print(f"kpo {args.subcommand}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
