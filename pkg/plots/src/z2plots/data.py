"""Read-only access to run directories: CSV schemas and the lattice export."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

SWEEP_BASE_COLUMNS = ["g", "Z", "X", "H", "W_c1", "W_c2", "W_c3", "gauss", "V_x", "V_y"]
DOS_COLUMNS = ["g", "eigenvalue", "mass"]
SECTOR_COLUMNS = ["g", "labels", "E"]


class SchemaError(Exception):
    """A run file is missing or lacks a required column."""


class RunDir:
    """One sweep/sector output directory emitted by the simulation CLI."""

    def __init__(self, path):
        self.path = Path(path)
        if not self.path.is_dir():
            raise SchemaError(f"run directory {path} does not exist")
        self._lattice = None

    def _table(self, name, required):
        path = self.path / name
        if not path.exists():
            raise SchemaError(f"{path} is missing")
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{path} is empty (no header)")
            for col in required:
                if col not in header:
                    raise SchemaError(f"{path} lacks required column {col!r}")
            rows = list(reader)
        return header, rows

    @property
    def lattice(self) -> dict:
        if self._lattice is None:
            path = self.path / "lattice.json"
            if not path.exists():
                raise SchemaError(f"{path} is missing")
            self._lattice = json.loads(path.read_text())
        return self._lattice

    @property
    def dimension(self) -> int:
        return int(self.lattice["d"])

    @property
    def size(self) -> int:
        return int(self.lattice["L"])

    def sweep(self) -> dict:
        """Column arrays from sweep.csv (floats; nan for missing contours)."""
        header, rows = self._table("sweep.csv", SWEEP_BASE_COLUMNS)
        cols = {name: [] for name in header}
        for row in rows:
            for name, val in zip(header, row):
                cols[name].append(float(val))
        return {name: np.asarray(vals) for name, vals in cols.items()}

    def dos(self, basis: str) -> dict:
        """{g: (eigenvalues, masses)} from dos_z.csv or dos_x.csv."""
        name = {"Z": "dos_z.csv", "X": "dos_x.csv"}[basis]
        _, rows = self._table(name, DOS_COLUMNS)
        by_g: dict = {}
        for g, ev, mass in rows:
            by_g.setdefault(float(g), []).append((int(ev), float(mass)))
        out = {}
        for g, pairs in by_g.items():
            pairs.sort()
            out[g] = (
                np.array([ev for ev, _ in pairs]),
                np.array([m for _, m in pairs]),
            )
        return out

    def sectors(self) -> dict:
        """{label string: (g array, E array)} from sectors.csv."""
        _, rows = self._table("sectors.csv", SECTOR_COLUMNS)
        series: dict = {}
        for g, labels, e in rows:
            series.setdefault(labels, []).append((float(g), float(e)))
        out = {}
        for labels, pairs in series.items():
            pairs.sort()
            out[labels] = (
                np.array([g for g, _ in pairs]),
                np.array([e for _, e in pairs]),
            )
        return out


def fit_line(xs: np.ndarray, ys: np.ndarray):
    """Least-squares line (slope, intercept); small local reimplementation."""
    slope, intercept = np.polyfit(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), 1)
    return float(slope), float(intercept)


def pick_run(runs, d: int):
    """First run directory of the requested dimensionality, if any."""
    for run in runs:
        try:
            if run.dimension == d:
                return run
        except SchemaError:
            continue
    return None
