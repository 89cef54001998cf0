"""CSV/text export and ingestion.

Every number is written with 9 significant digits, '.' decimal separator and
'\\n' line endings; files are written to a temporary sibling and renamed into
place.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from kpospec.errors import IngestError
from kpospec.operators import mhz, to_mhz

LEVELS_HEADER = ("beta_mhz", "label", "energy_mhz", "overlap")
POPULATIONS_HEADER = ("beta_mhz", "label", "population")
MATRIX_HEADER = ("beta_mhz", "m_label", "n_label", "abs_x")
SPECTRUM_HEADER = ("beta_mhz", "probe_detuning_mhz", "re_gamma", "im_gamma", "abs_gamma")
ANALYTIC_HEADER = ("beta_mhz", "source", "transition", "freq_mhz")
OBSERVATIONS_HEADER = ("p_rt_dbm", "m_label", "n_label", "freq_mhz")
COMPARISON_HEADER = (
    "beta_mhz", "m_label", "n_label",
    "kappa_e_fit_mhz", "kappa_i_fit_mhz", "kappa_e_pred_mhz", "kappa_i_pred_mhz", "flag",
)


def fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if v == 0.0:
        v = 0.0  # no "-0"
    return f"{v:.9g}"


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows) -> Path:
    return atomic_write_text(path, csv_text(header, rows))


# row builders ---------------------------------------------------------------

def level_rows(systems, max_label: int):
    for sys in systems:
        for n in range(max_label + 1):
            yield (to_mhz(sys.beta), n, to_mhz(sys.energies[n]), sys.overlaps[n])


def population_rows(points, max_label: int):
    for pt in points:
        for n in range(max_label + 1):
            yield (to_mhz(pt.beta), n, pt.populations[n])


def matrix_rows(points, max_label: int):
    for pt in points:
        for m in range(max_label + 1):
            for n in range(max_label + 1):
                if m != n:
                    yield (to_mhz(pt.beta), m, n, abs(pt.table.x[m, n]))


def spectrum_rows(grid):
    for i, beta in enumerate(grid.beta_axis):
        for j, w in enumerate(grid.probe_axis):
            g = grid.gamma[i, j]
            yield (to_mhz(beta), to_mhz(w), g.real, g.imag, abs(g))


def comparison_rows(rows):
    for r in rows:
        yield (
            to_mhz(r.beta), r.pair[0], r.pair[1],
            to_mhz(r.fit.kappa_e_nominal), to_mhz(r.fit.kappa_i_nominal),
            to_mhz(r.prediction.kappa_e_pred), to_mhz(r.prediction.kappa_i_pred),
            r.flag,
        )


def transitions_report(report) -> str:
    """JSON text: one record per visible pair, then the merged spectral lines."""
    doc = {
        "transitions": [
            {
                "pair": list(t.pair),
                "type": sorted(t.kinds),
                "beta_min_mhz": float(fmt(to_mhz(t.beta_range[0]))),
                "beta_max_mhz": float(fmt(to_mhz(t.beta_range[1]))),
            }
            for t in report.transitions
        ],
        "features": [
            {"pairs": [list(p) for p in f.pairs], "type": sorted(f.kinds)}
            for f in report.features
        ],
        "count": len(report.features),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def calibration_text(result) -> str:
    lines = [
        f"attenuation_db={fmt(result.attenuation_db)}",
        f"objective_mhz2={fmt(result.objective / mhz(1.0) ** 2)}",
        f"curvature_mhz2_per_db2={fmt(result.curvature / mhz(1.0) ** 2)}",
        f"ill_conditioned={fmt(result.ill_conditioned)}",
        f"search_min_db={fmt(result.search_interval[0])}",
        f"search_max_db={fmt(result.search_interval[1])}",
        "",
        "p_rt_dbm,m_label,n_label,measured_mhz,model_mhz,residual_mhz",
    ]
    for r in result.residuals:
        lines.append(",".join(fmt(v) for v in (
            r.p_rt_dbm, r.pair[0], r.pair[1], to_mhz(r.measured), to_mhz(r.model), to_mhz(r.value),
        )))
    return "\n".join(lines) + "\n"


def fit_text(fit) -> str:
    return "\n".join([
        f"omega_mn_mhz={fmt(to_mhz(fit.omega_mn))}",
        f"kappa_e_nominal_mhz={fmt(to_mhz(fit.kappa_e_nominal))}",
        f"kappa_i_nominal_mhz={fmt(to_mhz(fit.kappa_i_nominal))}",
        f"residual={fmt(fit.residual)}",
        f"converged={fmt(fit.converged)}",
    ]) + "\n"


# ingestion ------------------------------------------------------------------

def _rows(path, expected_headers):
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(h.strip() for h in next(reader))
        except StopIteration:
            raise IngestError(path, 1, "empty file") from None
        if header not in expected_headers:
            raise IngestError(
                path, 1,
                f"unexpected header {','.join(header)!r}; expected "
                + " or ".join(repr(",".join(h)) for h in expected_headers),
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise IngestError(path, lineno, f"expected {len(header)} fields, got {len(row)}")
            yield header, lineno, row


def _number(path, lineno, text, kind=float):
    try:
        return kind(text.strip())
    except ValueError:
        raise IngestError(path, lineno, f"not a number: {text!r}") from None


def read_observations(path):
    """Observations CSV -> list of (p_rt_dbm, (m, n), omega) in angular units."""
    out = []
    for _, lineno, row in _rows(path, [OBSERVATIONS_HEADER]):
        p = _number(path, lineno, row[0])
        m = _number(path, lineno, row[1], int)
        n = _number(path, lineno, row[2], int)
        f = _number(path, lineno, row[3])
        out.append((p, (m, n), mhz(f)))
    if not out:
        raise IngestError(path, 2, "no observations")
    return out


def write_observations(path, observations) -> Path:
    rows = [(o.p_rt_dbm, o.pair[0], o.pair[1], to_mhz(o.omega)) for o in observations]
    return write_csv(path, OBSERVATIONS_HEADER, rows)


def read_spectrum(path):
    """Measured spectrum -> (probe angular frequencies, data, amplitude_only)."""
    complex_header = ("probe_freq_mhz", "re_gamma", "im_gamma")
    abs_header = ("probe_freq_mhz", "abs_gamma")
    probe, data, amp = [], [], None
    for header, lineno, row in _rows(path, [complex_header, abs_header]):
        amp = header == abs_header
        probe.append(mhz(_number(path, lineno, row[0])))
        if amp:
            data.append(_number(path, lineno, row[1]))
        else:
            data.append(complex(_number(path, lineno, row[1]), _number(path, lineno, row[2])))
    if not probe:
        raise IngestError(path, 2, "no samples")
    order = np.argsort(probe, kind="stable")
    return np.asarray(probe)[order], np.asarray(data)[order], bool(amp)
