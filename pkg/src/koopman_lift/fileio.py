"""File formats: snapshot CSV with a JSON sidecar, model JSON, and plain
CSV tables for scores, sweeps, and ROC curves.

Snapshots: `<name>.csv` has a header row
`trajectory_id,pair_index,x_1..x_n,y_1..y_n[,u_1..u_p]` and one row per
pair; values are written with 17 significant digits so doubles round-trip
exactly. The sidecar `<name>.json` holds ts, dimensions, and provenance.

Models: a single JSON document with the library spec, the coefficient
matrix (exact via repr round-trip), and summary diagnostics. Outputs are
deterministic: no timestamps, sorted keys.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import DataFormatError
from .koopman_main import SnapshotSet, VectorFieldModel

MODEL_FORMAT = "koopman-lift-model"


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_snapshots(path, data: SnapshotSet) -> Path:
    """Write a snapshot CSV plus its JSON sidecar; returns the CSV path."""
    path = Path(path)
    n, p, K = data.n, data.p, data.K
    tids = data.trajectory_ids if data.trajectory_ids is not None else np.zeros(K, int)
    pidx = data.pair_indices if data.pair_indices is not None else np.arange(K)
    header = (
        ["trajectory_id", "pair_index"]
        + [f"x_{j}" for j in range(1, n + 1)]
        + [f"y_{j}" for j in range(1, n + 1)]
        + [f"u_{j}" for j in range(1, p + 1)]
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for k in range(K):
            row = [str(int(tids[k])), str(int(pidx[k]))]
            row += [_fmt(v) for v in data.X[k]]
            row += [_fmt(v) for v in data.Y[k]]
            if p:
                row += [_fmt(v) for v in data.inputs[k]]
            w.writerow(row)

    provenance = {
        k: v for k, v in data.meta.items()
        if isinstance(v, (str, int, float, bool, dict, list))
    }
    sidecar = {
        "ts": data.ts,
        "n": n,
        "p": p,
        "k": K,
        "provenance": provenance,
    }
    with sidecar_path(path).open("w") as fh:
        json.dump(sidecar, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def read_snapshots(path) -> SnapshotSet:
    """Load a snapshot CSV and its sidecar back into a SnapshotSet."""
    path = Path(path)
    side = sidecar_path(path)
    if not path.exists():
        raise DataFormatError(f"snapshot file not found: {path}")
    if not side.exists():
        raise DataFormatError(f"sidecar not found: {side}")
    try:
        with side.open() as fh:
            meta = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"sidecar {side} is not valid JSON: {exc}") from exc
    try:
        ts, n, p = float(meta["ts"]), int(meta["n"]), int(meta["p"])
    except KeyError as exc:
        raise DataFormatError(f"sidecar {side} misses field {exc}") from exc
    if ts <= 0:
        raise DataFormatError(f"sidecar {side}: ts must be positive, got {ts}")

    expected = 2 + 2 * n + p
    tids, pidx, X, Y, U = [], [], [], [], []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataFormatError(f"{path}: empty file")
        if len(header) != expected:
            raise DataFormatError(
                f"{path}: header has {len(header)} columns, sidecar says {expected} "
                f"(n={n}, p={p})"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != expected:
                raise DataFormatError(
                    f"{path}: row {lineno} has {len(row)} fields, expected {expected}"
                )
            try:
                tids.append(int(row[0]))
                pidx.append(int(row[1]))
                vals = [float(v) for v in row[2:]]
            except ValueError as exc:
                raise DataFormatError(f"{path}: row {lineno}: {exc}") from exc
            X.append(vals[:n])
            Y.append(vals[n:2 * n])
            if p:
                U.append(vals[2 * n:])
    if not X:
        raise DataFormatError(f"{path}: no data rows")
    prov = meta.get("provenance", {})
    return SnapshotSet(
        X=np.array(X), Y=np.array(Y), ts=ts,
        inputs=np.array(U) if p else None,
        trajectory_ids=np.array(tids), pair_indices=np.array(pidx),
        meta=prov,
    )


def write_model(path, model: VectorFieldModel) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"format": MODEL_FORMAT, "version": 1}
    doc.update(model.to_dict())
    with path.open("w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def read_model(path) -> VectorFieldModel:
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"model file not found: {path}")
    try:
        with path.open() as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path} is not valid JSON: {exc}") from exc
    if doc.get("format") != MODEL_FORMAT:
        raise DataFormatError(f"{path}: not a {MODEL_FORMAT} document")
    try:
        return VectorFieldModel.from_dict(doc)
    except (KeyError, ValueError) as exc:
        raise DataFormatError(f"{path}: malformed model: {exc}") from exc


def write_table(path, header, rows) -> Path:
    """Plain CSV table; numeric cells get the 17-digit format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, float) else str(v) for v in row])
    return path
