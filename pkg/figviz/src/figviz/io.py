"""Schema-checked readers for the run-directory CSV/JSON files.

Every reader validates the header columns it relies on and raises
:class:`SchemaError` naming the file and the offending column, so a renderer
failure always points at the exact input problem.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class SchemaError(ValueError):
    """An input file is missing or does not match its documented schema."""


def _require(path):
    if not os.path.exists(path):
        raise SchemaError(f"{path}: file not found")
    return path


def _read_csv(path, expected_prefix=None, skip_comments=True):
    """Header list plus float data rows; validates expected header columns."""
    _require(path)
    with open(path) as fh:
        line = fh.readline()
        while skip_comments and line.startswith("#"):
            line = fh.readline()
        header = [c.strip() for c in line.strip().split(",")]
        if expected_prefix is not None:
            for pos, name in enumerate(expected_prefix):
                got = header[pos] if pos < len(header) else "<missing>"
                if got != name:
                    raise SchemaError(
                        f"{path}: expected column {pos + 1} to be {name!r}, "
                        f"found {got!r}"
                    )
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise SchemaError(f"{path}: unparseable data rows ({exc})") from exc
    if data.size and data.shape[1] != len(header):
        raise SchemaError(
            f"{path}: {data.shape[1]} data columns for {len(header)} "
            "header columns"
        )
    return header, data


@dataclass(frozen=True)
class RunData:
    """Everything the renderers need from one run directory."""

    latent: Optional[np.ndarray]  # (n, d) ground-truth coordinates, or None
    eig_index: np.ndarray  # 1-based eigenvector indices, ascending
    eigenvalues: np.ndarray  # matching eigenvalues
    eigenvectors: np.ndarray  # (n, len(eig_index)) columns
    triplets: np.ndarray  # rows (i, j, k, score, eig_gap)
    criterion: Optional[np.ndarray]  # rows (k, i, j, eig_gap, score)
    groups: tuple  # two tuples of factor eigenvector indices
    timings: dict = field(default_factory=dict)

    def eigenvector(self, k: int) -> np.ndarray:
        pos = np.nonzero(self.eig_index == k)[0]
        if len(pos) == 0:
            raise SchemaError(f"eigenvectors.csv: no column phi_{k}")
        return self.eigenvectors[:, pos[0]]

    def eigenvalue(self, k: int) -> float:
        pos = np.nonzero(self.eig_index == k)[0]
        if len(pos) == 0:
            raise SchemaError(f"eigenvalues.csv: no row for index {k}")
        return float(self.eigenvalues[pos[0]])


def read_run(run_dir) -> RunData:
    """Load and cross-validate the files of a completed run directory."""
    header, eigval_rows = _read_csv(
        os.path.join(run_dir, "eigenvalues.csv"), ("index", "lambda")
    )
    eig_index = eigval_rows[:, 0].astype(int)
    eigenvalues = eigval_rows[:, 1]

    vec_path = os.path.join(run_dir, "eigenvectors.csv")
    header, eigenvectors = _read_csv(vec_path)
    expected = [f"phi_{k}" for k in eig_index]
    if header != expected:
        bad = next(
            (h for h, e in zip(header, expected) if h != e),
            header[len(expected):] or expected[len(header):],
        )
        raise SchemaError(f"{vec_path}: unexpected column {bad!r}")

    _, triplets = _read_csv(
        os.path.join(run_dir, "triplets.csv"),
        ("i", "j", "k", "score", "eig_gap"),
    )

    criterion = None
    crit_path = os.path.join(run_dir, "criterion.csv")
    if os.path.exists(crit_path):
        _, criterion = _read_csv(
            crit_path, ("k", "i", "j", "eig_gap", "score")
        )

    latent = None
    lat_path = os.path.join(run_dir, "latent.csv")
    if os.path.exists(lat_path):
        header, latent = _read_csv(lat_path)
        for pos, name in enumerate(header):
            if name != f"latent{pos + 1}":
                raise SchemaError(f"{lat_path}: unexpected column {name!r}")
        if latent.shape[0] != eigenvectors.shape[0]:
            raise SchemaError(
                f"{lat_path}: {latent.shape[0]} rows but eigenvectors.csv "
                f"has {eigenvectors.shape[0]}"
            )

    asg_path = _require(os.path.join(run_dir, "assignment.json"))
    with open(asg_path) as fh:
        assignment = json.load(fh)
    factors = assignment.get("factors")
    if (not isinstance(factors, list) or len(factors) != 2
            or not all(isinstance(g, list) for g in factors)):
        raise SchemaError(f"{asg_path}: 'factors' must be a pair of lists")
    groups = (tuple(int(k) for k in factors[0]),
              tuple(int(k) for k in factors[1]))
    for k in groups[0] + groups[1]:
        if k not in eig_index:
            raise SchemaError(
                f"{asg_path}: factor index {k} not in eigenvalues.csv"
            )

    timings = {}
    report_path = os.path.join(run_dir, "report.json")
    if os.path.exists(report_path):
        with open(report_path) as fh:
            timings = json.load(fh).get("timings", {})

    return RunData(latent, eig_index, eigenvalues, eigenvectors, triplets,
                   criterion, groups, timings)


def read_embedding(run_dir, factor: int):
    """Embedding coordinates and latent columns of embedding_factor{i}.csv."""
    path = os.path.join(run_dir, f"embedding_factor{factor}.csv")
    header, data = _read_csv(path)
    e_cols = [i for i, h in enumerate(header) if h.startswith("e")]
    lat_cols = [i for i, h in enumerate(header) if h.startswith("latent")]
    if sorted(e_cols + lat_cols) != list(range(len(header))):
        bad = next(h for i, h in enumerate(header)
                   if i not in e_cols + lat_cols)
        raise SchemaError(f"{path}: unexpected column {bad!r}")
    return data[:, e_cols], data[:, lat_cols]
