"""Scoring identified models against ground truth: coefficient RMSE/NRMSE,
vector-field NRMSE, the central-difference baseline, and ROC/AUROC for
network reconstruction from coefficient magnitudes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedMetricError
from .koopman_dual import FieldSamples
from .koopman_main import SnapshotSet, VectorFieldModel


@dataclass
class CoefficientScore:
    rmse: float
    nrmse: float
    w_bar: float


@dataclass
class RocCurve:
    thresholds: np.ndarray  # descending, +inf first
    tpr: np.ndarray
    fpr: np.ndarray
    auroc: float


def _library_specs(model: VectorFieldModel):
    if model.per_state:
        return [d.to_spec() for d in model.library]
    return model.library.to_spec()


def coefficient_score(est: VectorFieldModel, truth: VectorFieldModel) -> CoefficientScore:
    """Root-mean-square coefficient error over all n * N_F slots, normalized
    by the mean magnitude of the nonzero true coefficients."""
    if _library_specs(est) != _library_specs(truth):
        raise ValueError("library mismatch: models must share the same ordered library")
    if est.W.shape != truth.W.shape:
        raise ValueError(f"coefficient shapes differ: {est.W.shape} vs {truth.W.shape}")
    diff = est.W - truth.W
    rmse = float(np.sqrt(np.mean(diff**2)))
    nz = np.abs(truth.W[truth.W != 0.0])
    if nz.size == 0:
        raise UndefinedMetricError("all true coefficients are zero; NRMSE undefined")
    w_bar = float(np.mean(nz))
    return CoefficientScore(rmse=rmse, nrmse=rmse / w_bar, w_bar=w_bar)


def field_nrmse(F_hat: FieldSamples, truth) -> float:
    """Normalized RMS vector-field error at the sample points.

    The first sample is always excluded (central differences cannot estimate
    it, and the same index range is used for every estimator so the curves
    stay comparable); rows the estimate marks invalid are excluded too.
    """
    truth = np.atleast_2d(np.asarray(truth, dtype=float))
    if truth.shape != F_hat.F_hat.shape:
        raise ValueError(f"shape mismatch: {F_hat.F_hat.shape} vs {truth.shape}")
    include = F_hat.valid.copy()
    include[0] = False
    if not np.any(include):
        raise UndefinedMetricError("no sample points left to score")
    diff = F_hat.F_hat[include] - truth[include]
    num = float(np.sqrt(np.mean(np.sum(diff**2, axis=1))))
    den = float(np.mean(np.linalg.norm(truth[include], axis=1)))
    if den == 0.0:
        raise UndefinedMetricError("mean field magnitude is zero; NRMSE undefined")
    return num / den


def finite_difference_baseline(data: SnapshotSet) -> FieldSamples:
    """Central differences along each trajectory:
    F(x_k) ~ (x_{k+1} - x_{k-1}) / (2 Ts).

    Uses each trajectory's pre-state sequence plus its final post-state, so
    every point except a trajectory's first gets an estimate. Rows without
    an estimate are marked invalid.
    """
    if data.trajectory_ids is None or data.pair_indices is None:
        raise ValueError("finite differences need trajectory ordering metadata")
    if data.meta.get("pair_layout", "chained") != "chained":
        raise ValueError("finite differences need chained (consecutive) snapshot pairs")
    F = np.full_like(data.X, np.nan)
    valid = np.zeros(data.K, dtype=bool)
    for tid in np.unique(data.trajectory_ids):
        rows = np.flatnonzero(data.trajectory_ids == tid)
        order = np.argsort(data.pair_indices[rows], kind="stable")
        rows = rows[order]
        L = rows.size
        if L < 2:
            raise ValueError(
                f"trajectory {tid} has {L + 1} points; central differences need >= 3"
            )
        idx = data.pair_indices[rows]
        if not np.array_equal(idx, np.arange(idx[0], idx[0] + L)):
            raise ValueError(f"trajectory {tid} has non-contiguous pair indices")
        series = np.vstack([data.X[rows], data.Y[rows[-1]]])  # L+1 points
        deriv = (series[2:] - series[:-2]) / (2.0 * data.ts)
        F[rows[1:]] = deriv
        valid[rows[1:]] = True
    return FieldSamples(F_hat=np.where(valid[:, None], F, 0.0), valid=valid)


_DEP_CACHE: dict = {}


def _dependency_pairs(library) -> tuple:
    """(entry_indices, state_indices) pairs for all entry dependencies."""
    key = id(library)
    cached = _DEP_CACHE.get(key)
    if cached is not None:
        return cached
    ent, sta = [], []
    for l, e in enumerate(library.entries()):
        for s in e.deps:
            ent.append(l)
            sta.append(s)
    pairs = (np.asarray(ent, dtype=int), np.asarray(sta, dtype=int))
    if len(_DEP_CACHE) > 64:
        _DEP_CACHE.clear()
    _DEP_CACHE[key] = pairs
    return pairs


def link_scores(est: VectorFieldModel, deps_fn=None) -> np.ndarray:
    """Directed link scores: score[i, j] = max |w_k^j| over library entries
    of state j that depend on state i.

    deps_fn optionally overrides the structural dependency rule; it maps a
    library Entry to an iterable of 0-based source states.
    """
    n = est.n
    scores = np.zeros((n, n))
    for j in range(n):
        lib = est.library_for_state(j)
        if deps_fn is None:
            ent, sta = _dependency_pairs(lib)
        else:
            ent, sta = [], []
            for l, e in enumerate(lib.entries()):
                for s in deps_fn(e):
                    ent.append(l)
                    sta.append(s)
            ent, sta = np.asarray(ent, dtype=int), np.asarray(sta, dtype=int)
        vals = np.abs(est.W[ent, j])
        np.maximum.at(scores[:, j], sta, vals)
    return scores


def network_roc(est: VectorFieldModel, adjacency_truth,
                include_self: bool = True, deps_fn=None) -> RocCurve:
    """ROC curve for thresholded link scores against the true adjacency
    (boolean, indexed [source, target]).

    Thresholds sweep every distinct score plus +/- infinity, so the curve is
    an exact step function from (0, 0) to (1, 1); AUROC is its trapezoidal
    area. include_self=False drops diagonal pairs from the evaluation
    (phase-coupling libraries carry no self links).
    """
    truth = np.asarray(adjacency_truth, dtype=bool)
    n = est.n
    if truth.shape != (n, n):
        raise ValueError(f"adjacency must be {n}x{n}, got {truth.shape}")
    scores = link_scores(est, deps_fn=deps_fn)
    if include_self:
        mask = np.ones((n, n), dtype=bool)
    else:
        mask = ~np.eye(n, dtype=bool)
    s = scores[mask]
    t = truth[mask]
    n_pos = int(np.sum(t))
    n_neg = int(t.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(
            f"AUROC undefined: truth has {n_pos} links and {n_neg} non-links"
        )
    thresholds = np.concatenate(([np.inf], np.unique(s)[::-1], [-np.inf]))
    tpr = np.empty(thresholds.size)
    fpr = np.empty(thresholds.size)
    for i, th in enumerate(thresholds):
        pred = s >= th
        tpr[i] = np.sum(pred & t) / n_pos
        fpr[i] = np.sum(pred & ~t) / n_neg
    auroc = float(np.trapz(tpr, fpr))
    return RocCurve(thresholds=thresholds, tpr=tpr, fpr=fpr, auroc=auroc)
