"""Plain-text persistence: CSV tables, chain files and JSON summaries.

All writers are deterministic: floats are rendered with full round-trip
precision, key order is fixed, and no locale- or time-dependent content
is emitted.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .model import Chain


class TableParseError(Exception):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


def read_table(path) -> tuple[list[str], np.ndarray]:
    """Read a comma-separated numeric table with a header row."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TableParseError("empty file") from None
        header = [h.strip() for h in header]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise TableParseError(
                    f"expected {len(header)} fields, found {len(row)}", lineno
                )
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise TableParseError(str(exc), lineno) from None
    if not rows:
        raise TableParseError("no data rows")
    return header, np.array(rows)


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_chain(path, chain: Chain) -> None:
    """One row per draw: iter, sigma2, omega, the indicator bits, beta."""
    m = len(chain)
    n_ind = chain.delta.shape[1]
    p = chain.beta.shape[1]
    ind_name = "delta" if chain.meta.get("kind") == "fusion" else "xi"
    header = (
        ["iter", "sigma2", "omega"]
        + [f"{ind_name}_{j + 1}" for j in range(n_ind)]
        + [f"beta_{j + 1}" for j in range(p)]
    )
    burn = chain.meta.get("burn_in", 0)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(m):
            cells = [str(burn + i + 1), _fmt(chain.sigma2[i]), _fmt(chain.omega[i])]
            cells += [str(int(b)) for b in chain.delta[i]]
            cells += [_fmt(v) for v in chain.beta[i]]
            fh.write(",".join(cells) + "\n")


def read_chain(path) -> dict[str, np.ndarray]:
    """Read a chain file back into column arrays keyed by prefix."""
    header, values = read_table(path)
    ind_cols = [i for i, h in enumerate(header) if h.startswith(("delta_", "xi_"))]
    beta_cols = [i for i, h in enumerate(header) if h.startswith("beta_")]
    return {
        "iter": values[:, header.index("iter")].astype(int),
        "sigma2": values[:, header.index("sigma2")],
        "omega": values[:, header.index("omega")],
        "indicator": values[:, ind_cols],
        "beta": values[:, beta_cols],
    }


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_summary(path_or_stream, payload: dict) -> None:
    text = json.dumps(_jsonable(payload), indent=2)
    if hasattr(path_or_stream, "write"):
        path_or_stream.write(text + "\n")
    else:
        Path(path_or_stream).write_text(text + "\n")


def read_summary(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
