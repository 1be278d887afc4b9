"""CSV, plot-data and manifest writers.

Numbers are written with 17 significant digits so that files round-trip
exactly and reruns are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from fracqd.hyperbolic import MomentTrace
from fracqd.states import EvolutionTrace, WaveFunction

__all__ = [
    "config_hash",
    "emit_plotdata",
    "fmt",
    "write_csv",
    "write_manifest",
    "write_snapshot",
    "write_trace",
]


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return "nan"
    return "%.17g" % v


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_snapshot(path: Path, wf: WaveFunction) -> Path:
    return write_csv(path, ["x", "re", "im"], zip(wf.x, wf.samples.real, wf.samples.imag))


def _trace_columns(trace: EvolutionTrace):
    header = ["t", "norm"]
    cols = [trace.times, trace.norms]
    for name in sorted(trace.observables):
        v = np.asarray(trace.observables[name], dtype=complex)
        header += [f"{name}_re", f"{name}_im"]
        cols += [v.real, v.imag]
    return header, cols


def write_trace(path: Path, trace: EvolutionTrace) -> Path:
    header, cols = _trace_columns(trace)
    return write_csv(path, header, zip(*cols))


def emit_plotdata(trace: EvolutionTrace | MomentTrace, path) -> Path:
    """Whitespace-separated columns under a ``#`` header line."""
    if isinstance(trace, MomentTrace):
        header = ["t", "x2_re", "x2_im", "diverged"]
        cols = [trace.times, trace.x2_values.real, trace.x2_values.imag, trace.diverged]
    else:
        header, cols = _trace_columns(trace)
    path = Path(path)
    with path.open("w") as fh:
        fh.write("# " + " ".join(header) + "\n")
        for row in zip(*cols):
            fh.write(" ".join(fmt(v) for v in row) + "\n")
    return path


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def write_manifest(path: Path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path
