"""Files: solution archives (JSON), CSV tables.

CSV output is byte-deterministic: 17 significant digits, '.' decimal point,
'\\n' line endings, no locale involvement.
"""
import json
import math

import numpy as np

from .petviashvili import ConvergenceTrace, WaveSolution
from .spectral import Grid, PeriodicField

ARCHIVE_VERSION = "1"


def fmt(value):
    """Locale-free text for one CSV cell."""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return "%d" % value
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return "%.17g" % v


def csv_text(header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write(csv_text(header, rows))


def read_csv(path):
    """Returns (header, rows) with numeric cells parsed as float."""
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        if not line:
            continue
        cells = []
        for cell in line.split(","):
            try:
                cells.append(float(cell))
            except ValueError:
                cells.append(cell)
        rows.append(cells)
    return header, rows


def _hex(x):
    return float(x).hex()


def solution_to_dict(sol):
    trace = sol.trace.summary() if sol.trace is not None else None
    if trace is not None:
        trace = {k: (_hex(v) if isinstance(v, float) else v) for k, v in trace.items()}
    return {
        "version": ARCHIVE_VERSION,
        "alpha": _hex(sol.alpha),
        "c": _hex(sol.c),
        "w": _hex(sol.w),
        "A": _hex(sol.A),
        "method": sol.method,
        "n_points": sol.phi.n_points,
        "samples": [_hex(v) for v in sol.phi.samples],
        "trace_summary": trace,
    }


def _unhex(v):
    return float.fromhex(v) if isinstance(v, str) else float(v)


def solution_from_dict(doc):
    if str(doc.get("version")) != ARCHIVE_VERSION:
        raise ValueError("unsupported archive version %r" % doc.get("version"))
    grid = Grid(int(doc["n_points"]))
    samples = np.array([_unhex(v) for v in doc["samples"]])
    phi = PeriodicField.from_samples(grid, samples)
    c, w = _unhex(doc["c"]), _unhex(doc["w"])
    psi = PeriodicField.from_samples(grid, (samples - (c - 1.0) + c * w) / (2.0 * c))
    trace = None
    ts = doc.get("trace_summary")
    if ts:
        trace = ConvergenceTrace()
        trace.append(_unhex(ts["final_error"]), _unhex(ts["final_m_defect"]), _unhex(ts["final_res"]))
        trace.archived_iters = int(ts["iters"])
    return WaveSolution(phi, psi, _unhex(doc["alpha"]), c, w, _unhex(doc["A"]), trace, doc["method"])


def save_solution(sol, path):
    with open(path, "w", encoding="ascii") as fh:
        json.dump(solution_to_dict(sol), fh, indent=1)
        fh.write("\n")


def load_solution(path):
    with open(path, "r", encoding="ascii") as fh:
        return solution_from_dict(json.load(fh))


def profile_rows(field):
    return list(zip(field.grid.x, field.samples))
