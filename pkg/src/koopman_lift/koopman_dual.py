"""Dual lifting method: identify the transfer operator in the K-dimensional
sample space (one coordinate per snapshot), log it to get generator action
at the samples, read off vector-field values there, and recover coefficients
by per-state sparse regression over a library.

Useful when the dictionary is larger than the dataset (N >= K), e.g. for
high-dimensional systems lifted with one Gaussian bump per sample point.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import numlin
from .bases import Dictionary
from .errors import AliasingError, BranchCutError, ConditioningError, SizeError
from .koopman_main import SnapshotSet, VectorFieldModel
from .sparse_reg import RegressionSpec, lasso


@dataclass
class DualGeneratorEstimate:
    """K x K generator representation in the sample space."""

    Ltilde: np.ndarray
    dictionary: Dictionary
    ts: float
    diagnostics: dict = field(default_factory=dict)


@dataclass
class FieldSamples:
    """Estimated vector-field values at the sample points x_k.

    valid marks rows where the estimate is defined (finite-difference
    baselines cannot estimate a trajectory's first point).
    """

    F_hat: np.ndarray
    valid: np.ndarray = None

    def __post_init__(self):
        self.F_hat = np.atleast_2d(np.asarray(self.F_hat, dtype=float))
        if self.valid is None:
            self.valid = np.ones(self.F_hat.shape[0], dtype=bool)
        else:
            self.valid = np.asarray(self.valid, dtype=bool)
            if self.valid.shape != (self.F_hat.shape[0],):
                raise ValueError("valid mask must have one entry per row")


def dual_generator(data: SnapshotSet, d: Dictionary,
                   rcond: float = numlin.DEFAULT_RCOND,
                   branch: str = "error") -> DualGeneratorEstimate:
    """Sample-space generator estimate logm(P_y pinv(P_x)) / Ts.

    Requires at least as many dictionary entries as snapshot pairs and full
    row rank of the lifted pre-state matrix (duplicate samples break it).
    """
    if d.n != data.n:
        raise ValueError(f"dictionary dimension {d.n} != state dimension {data.n}")
    K = data.K
    if d.size < K:
        raise SizeError(
            f"dual method needs N >= K basis functions; got N={d.size}, K={K}. "
            "Add basis functions (e.g. one bump per sample) or drop samples."
        )
    Px = d.evaluate(data.X)
    Py = d.evaluate(data.Y)
    pr = numlin.pinv(Px, rcond=rcond)
    diagnostics = {
        "pinv_rank": pr.rank,
        "pinv_condition": pr.condition,
        "pinv_cutoff": pr.cutoff,
        "lift_shape": Px.shape,
    }
    if pr.rank < K:
        if np.unique(data.X, axis=0).shape[0] < K:
            raise ConditioningError(
                f"duplicate sample points: the sample-space representation "
                f"is singular (row rank {pr.rank} < K={K})",
                rank=pr.rank, needed=K,
            )
        # smooth kernels routinely have numerical rank < K; work on the
        # retained sample subspace, like the main method does
        warnings.warn(
            f"lifted pre-state matrix has numerical row rank {pr.rank} < K={K} "
            f"(condition {pr.condition:.3e}); generator restricted to the "
            "retained sample subspace"
        )
    # Compress P_y pinv(P_x) onto the retained left-singular subspace; for
    # full row rank this is an orthogonal change of basis of the K x K matrix.
    M = (pr.u.T @ Py @ pr.vt.T) / pr.s[None, :]
    try:
        lr = numlin.logm_principal(M, on_negative_axis=branch)
    except BranchCutError as exc:
        raise AliasingError(
            "sample-space transfer matrix has eigenvalue(s) on the closed "
            "negative real axis; decrease the sampling period or adjust the "
            f"basis. Offending eigenvalues: {exc.eigenvalues}",
            eigenvalues=exc.eigenvalues,
        ) from exc
    if not lr.branch_ok:
        warnings.warn(
            "negative-real transfer eigenvalues replaced by their modulus in "
            "the sample-space logarithm (system aliasing)"
        )
    diagnostics.update(branch_ok=lr.branch_ok, strip_ok=lr.strip_ok,
                       spectrum=lr.spectrum)
    Ltilde = pr.u @ (lr.logm / data.ts) @ pr.u.T
    return DualGeneratorEstimate(
        Ltilde=Ltilde, dictionary=d, ts=data.ts, diagnostics=diagnostics,
    )


def field_samples(gen: DualGeneratorEstimate, data: SnapshotSet) -> FieldSamples:
    """Vector-field values at the samples: generator action on the
    coordinate functions, i.e. Ltilde @ X."""
    if gen.Ltilde.shape != (data.K, data.K):
        raise ValueError(
            f"generator is {gen.Ltilde.shape}, data has K={data.K} pairs"
        )
    return FieldSamples(F_hat=gen.Ltilde @ data.X)


def identify_dual(data: SnapshotSet, test: Dictionary, library,
                  reg: RegressionSpec | None = None,
                  rcond: float = numlin.DEFAULT_RCOND,
                  branch: str = "error",
                  workers: int = 1) -> VectorFieldModel:
    """Full dual pipeline: sample-space generator, field values at samples,
    then one penalized regression per state over the library.

    library: a Dictionary shared by all states or a list with one per state.
    reg: regression settings; the default resolves the penalty form from the
    problem shape (see sparse_reg.RegressionSpec.resolve).
    """
    if reg is None:
        reg = RegressionSpec()
    gen = dual_generator(data, test, rcond=rcond, branch=branch)
    fs = field_samples(gen, data)

    n = data.n
    if isinstance(library, (list, tuple)):
        libs = list(library)
        if len(libs) != n:
            raise ValueError(f"need one library per state: got {len(libs)} for n={n}")
        H_per_state = [lib.evaluate(data.X) for lib in libs]
        model_library = libs
    else:
        H = library.evaluate(data.X)
        H_per_state = [H] * n
        model_library = library

    def solve(j):
        return lasso(H_per_state[j], fs.F_hat[:, j], reg)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(solve, range(n)))
    else:
        results = [solve(j) for j in range(n)]

    W = np.column_stack([w for w, _ in results])
    reports = [r for _, r in results]
    diagnostics = {
        "pinv_rank": int(gen.diagnostics["pinv_rank"]),
        "pinv_condition": float(gen.diagnostics["pinv_condition"]),
        "branch_ok": bool(gen.diagnostics["branch_ok"]),
        "strip_ok": bool(gen.diagnostics["strip_ok"]),
        "regression_mode": reg.resolve(data.K, W.shape[0]).mode,
        "regression_sweeps": [r.sweeps for r in reports],
        "nonzeros_per_state": [r.nnz for r in reports],
    }
    model = VectorFieldModel(
        library=model_library, W=W, n=n, p=0,
        diagnostics=diagnostics, generator=gen,
    )
    return model
