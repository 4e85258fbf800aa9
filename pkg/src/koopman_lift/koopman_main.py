"""Main lifting method: identify a finite-dimensional transfer-operator
matrix from snapshot pairs by least squares in a monomial observable basis,
take the principal matrix logarithm to get the generator, and read the
vector-field coefficients out of the generator's degree-1 columns.

Supports three variants: plain polynomial fields, systems with known inputs
(identified over the input-augmented state with the inputs held between
snapshots), and non-polynomial fields handled by augmenting the monomial
basis with the library functions themselves.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import numlin
from .bases import (
    CompositeDictionary,
    Dictionary,
    MonomialDictionary,
    degree_one_index_map,
    has_duplicates,
    monomial_count,
)
from .errors import AliasingError, BranchCutError, ConditioningError, SizeError

log = logging.getLogger(__name__)


@dataclass
class SnapshotSet:
    """K paired state snapshots (x_k, y_k) one sampling period apart.

    inputs, when present, holds the per-pair input vector u_k associated
    with both ends of the pair (held constant over the interval).
    trajectory_ids/pair_indices record which trajectory each pair came from
    and its position along it; metrics that difference along trajectories
    need them. meta carries provenance (system name, noise levels, exact
    values for scoring).
    """

    X: np.ndarray
    Y: np.ndarray
    ts: float
    inputs: np.ndarray | None = None
    trajectory_ids: np.ndarray | None = None
    pair_indices: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.Y = np.atleast_2d(np.asarray(self.Y, dtype=float))
        if self.X.shape != self.Y.shape:
            raise ValueError(f"X {self.X.shape} and Y {self.Y.shape} must match")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.Y))):
            raise ValueError("non-finite snapshot values")
        if self.ts <= 0:
            raise ValueError(f"sampling period must be positive, got {self.ts}")
        if self.inputs is not None:
            self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
            if self.inputs.shape[0] != self.X.shape[0]:
                raise ValueError("inputs must have one row per snapshot pair")
            if not np.all(np.isfinite(self.inputs)):
                raise ValueError("non-finite input values")
        for name in ("trajectory_ids", "pair_indices"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=int)
                if v.shape != (self.X.shape[0],):
                    raise ValueError(f"{name} must be a length-K vector")
                setattr(self, name, v)

    @property
    def K(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    @property
    def p(self) -> int:
        return 0 if self.inputs is None else self.inputs.shape[1]


@dataclass
class GeneratorEstimate:
    """Square matrix approximating the generator on the lifted space."""

    L: np.ndarray
    dictionary: Dictionary
    ts: float
    diagnostics: dict = field(default_factory=dict)


@dataclass
class VectorFieldModel:
    """Identified vector field: column j of W holds the coefficients of
    state j's equation over the library.

    library is either one Dictionary shared by all states or a list with
    one Dictionary per state (all of equal size).
    """

    library: object
    W: np.ndarray
    n: int
    p: int = 0
    diagnostics: dict = field(default_factory=dict)
    generator: object = None

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=float)
        if isinstance(self.library, (list, tuple)):
            self.library = list(self.library)
            if len(self.library) != self.n:
                raise ValueError("per-state library list must have n entries")
            sizes = {d.size for d in self.library}
            if len(sizes) != 1:
                raise ValueError("per-state libraries must share one size")
        if self.W.shape != (self.n_features, self.n):
            raise ValueError(
                f"W has shape {self.W.shape}, expected ({self.n_features}, {self.n})"
            )

    @property
    def n_features(self) -> int:
        if isinstance(self.library, list):
            return self.library[0].size
        return self.library.size

    @property
    def per_state(self) -> bool:
        return isinstance(self.library, list)

    def library_for_state(self, j: int) -> Dictionary:
        """Library of state j (0-based)."""
        return self.library[j] if self.per_state else self.library

    def evaluate(self, points) -> np.ndarray:
        """Vector-field values at K points of the (augmented) state space."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.per_state:
            cols = [self.library[j].evaluate(pts) @ self.W[:, j] for j in range(self.n)]
            return np.column_stack(cols)
        return self.library.evaluate(pts) @ self.W

    def field(self):
        """Callable x -> F(x) for integration; autonomous models only."""
        if self.p:
            raise ValueError("model has input channels; not an autonomous field")

        def F(x):
            return self.evaluate(np.asarray(x, dtype=float)[None, :])[0]

        return F

    def to_dict(self) -> dict:
        if self.per_state:
            lib = {"per_state": [d.to_spec() for d in self.library]}
        else:
            lib = self.library.to_spec()
        return {
            "n": self.n,
            "p": self.p,
            "library": lib,
            "coefficients": [[float(v) for v in row] for row in self.W],
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VectorFieldModel":
        from .bases import dictionary_from_spec

        lib_spec = d["library"]
        if isinstance(lib_spec, dict) and "per_state" in lib_spec:
            library = [dictionary_from_spec(s) for s in lib_spec["per_state"]]
        else:
            library = dictionary_from_spec(lib_spec)
        return cls(
            library=library,
            W=np.asarray(d["coefficients"], dtype=float),
            n=int(d["n"]),
            p=int(d.get("p", 0)),
            diagnostics=d.get("diagnostics", {}),
        )


def generator_from_lifts(Px, Py, ts, rcond=numlin.DEFAULT_RCOND,
                         on_deficiency="project", branch="error"):
    """Estimate the generator matrix from lifted snapshot matrices.

    Computes the least-squares transfer matrix pinv(Px) @ Py, restricted to
    the numerically retained row subspace of Px when rank deficient, then its
    principal logarithm divided by the sampling period.

    on_deficiency: "project" works in the retained subspace (coefficients in
    unobserved directions come out zero, with a warning); "error" raises.
    branch: "error" aborts on negative-real transfer eigenvalues (system
    aliasing); "modulus" keeps the real part of the complex principal log
    (their log becomes log|lambda|), warning and recording branch_ok=False.
    Returns (L, diagnostics).
    """
    K, N = Px.shape
    pr = numlin.pinv(Px, rcond=rcond)
    diagnostics = {
        "pinv_rank": pr.rank,
        "pinv_condition": pr.condition,
        "pinv_cutoff": pr.cutoff,
        "lift_shape": (K, N),
    }
    if pr.rank < N:
        msg = (
            f"lifted data matrix is rank deficient: rank {pr.rank} of {N} "
            f"dictionary entries (condition {pr.condition:.3e}); coefficients in "
            "unobserved directions are set to zero"
        )
        if on_deficiency == "error":
            raise ConditioningError(msg, rank=pr.rank, needed=N)
        warnings.warn(msg)

    # Compress onto the retained right-singular subspace; for full rank this
    # is an orthogonal change of basis and gives logm(pinv(Px) @ Py) exactly.
    M = (pr.u.T @ Py @ pr.vt.T) / pr.s[:, None]
    try:
        lr = numlin.logm_principal(M, on_negative_axis=branch)
    except BranchCutError as exc:
        raise AliasingError(
            "transfer-matrix eigenvalue(s) on the closed negative real axis; "
            "the sampling period is too large for the principal logarithm "
            "(system aliasing). Decrease the sampling period or rescale the "
            f"data. Offending eigenvalues: {exc.eigenvalues}",
            eigenvalues=exc.eigenvalues,
        ) from exc
    if not lr.branch_ok:
        warnings.warn(
            "negative-real transfer eigenvalues replaced by their modulus in "
            "the logarithm (system aliasing in strongly contracted directions)"
        )
    L = pr.vt.T @ (lr.logm / ts) @ pr.vt
    diagnostics.update(
        branch_ok=lr.branch_ok,
        strip_ok=lr.strip_ok,
        spectrum=lr.spectrum,
    )
    return L, diagnostics


def _require_k_at_least(K: int, N: int, n: int, m: int):
    if K < N:
        raise SizeError(
            f"main method needs K >= N where N = (m+n)!/(m! n!) = "
            f"{monomial_count(n, m)} for n={n}, m={m}; got K={K}. "
            "Increase K (add snapshot pairs) or decrease m."
        )


def _json_safe_diag(diagnostics: dict) -> dict:
    spec = diagnostics.get("spectrum")
    out = {
        "pinv_rank": int(diagnostics["pinv_rank"]),
        "pinv_condition": float(diagnostics["pinv_condition"]),
        "branch_ok": bool(diagnostics["branch_ok"]),
        "strip_ok": bool(diagnostics["strip_ok"]),
    }
    if spec is not None and len(spec):
        out["spectrum_abs_range"] = [float(np.min(np.abs(spec))),
                                     float(np.max(np.abs(spec)))]
    return out


def identify_main(data: SnapshotSet, m: int, m_f: int,
                  rcond: float = numlin.DEFAULT_RCOND,
                  branch: str = "error") -> VectorFieldModel:
    """Identify a polynomial vector field of total degree <= m_f, lifting
    with monomials of total degree <= m (m >= m_f).
    """
    if data.inputs is not None:
        raise ValueError("data has input channels; use identify_main_with_inputs")
    if not (m >= m_f >= 0):
        raise ValueError(f"need m >= m_f >= 0, got m={m}, m_f={m_f}")
    n = data.n
    lift = MonomialDictionary(n, m)
    _require_k_at_least(data.K, lift.size, n, m)

    Px = lift.evaluate(data.X)
    Py = lift.evaluate(data.Y)
    L, diagnostics = generator_from_lifts(Px, Py, data.ts, rcond=rcond, branch=branch)
    gen = GeneratorEstimate(L=L, dictionary=lift, ts=data.ts, diagnostics=diagnostics)

    lmap = degree_one_index_map(lift)
    full = np.column_stack([L[:, lmap[j]] for j in range(1, n + 1)])
    n_f = monomial_count(n, m_f)
    W = full[:n_f]
    if m > m_f:
        dropped = full[n_f:]
        log.info("truncated %d coefficients of degree > %d (max |w| %.3e)",
                 dropped.size, m_f, np.max(np.abs(dropped)) if dropped.size else 0.0)
        diag_extra = {"truncated_coeff_max_abs": float(np.max(np.abs(dropped)))
                      if dropped.size else 0.0}
    else:
        diag_extra = {}

    model = VectorFieldModel(
        library=MonomialDictionary(n, m_f), W=W, n=n, p=0,
        diagnostics={**_json_safe_diag(diagnostics), **diag_extra},
        generator=gen,
    )
    return model


def identify_main_with_inputs(data: SnapshotSet, m: int, m_f: int,
                              rcond: float = numlin.DEFAULT_RCOND,
                              branch: str = "error") -> VectorFieldModel:
    """Identify a field in states and inputs over the augmented state (x, u).

    The inputs are treated as extra states with zero derivative; only the
    state rows are read out, so the returned coefficients describe
    d/dt x_j as a polynomial in (x, u).
    """
    if data.inputs is None:
        raise ValueError("data has no input channels; use identify_main")
    if not (m >= m_f >= 0):
        raise ValueError(f"need m >= m_f >= 0, got m={m}, m_f={m_f}")
    n, p = data.n, data.p
    dim = n + p
    lift = MonomialDictionary(dim, m)
    _require_k_at_least(data.K, lift.size, dim, m)

    Zx = np.hstack([data.X, data.inputs])
    Zy = np.hstack([data.Y, data.inputs])
    Px = lift.evaluate(Zx)
    Py = lift.evaluate(Zy)
    L, diagnostics = generator_from_lifts(Px, Py, data.ts, rcond=rcond, branch=branch)
    gen = GeneratorEstimate(L=L, dictionary=lift, ts=data.ts, diagnostics=diagnostics)

    lmap = degree_one_index_map(lift)
    full = np.column_stack([L[:, lmap[j]] for j in range(1, n + 1)])
    n_f = monomial_count(dim, m_f)
    W = full[:n_f]

    model = VectorFieldModel(
        library=MonomialDictionary(dim, m_f), W=W, n=n, p=p,
        diagnostics=_json_safe_diag(diagnostics), generator=gen,
    )
    return model


def identify_main_augmented(data: SnapshotSet, m: int,
                            extra: Dictionary | None,
                            rcond: float = numlin.DEFAULT_RCOND,
                            branch: str = "error") -> VectorFieldModel:
    """Identify a field over monomials of degree <= m plus extra library
    functions, lifting with the same augmented dictionary.

    With no extra functions this reduces to identify_main(data, m, m).
    """
    if data.inputs is not None:
        raise ValueError("data has input channels; use identify_main_with_inputs")
    n = data.n
    mono = MonomialDictionary(n, m)
    if extra is None or extra.size == 0:
        lift = mono
    else:
        if extra.n != n:
            raise ValueError(f"extra dictionary dimension {extra.n} != state dim {n}")
        lift = CompositeDictionary([mono, extra])
        if has_duplicates(lift):
            raise ValueError("extra dictionary duplicates monomial basis entries")
    if data.K < lift.size:
        raise SizeError(
            f"augmented main method needs K >= N_total = {lift.size} "
            f"({mono.size} monomials + {lift.size - mono.size} extra); got K={data.K}. "
            "Increase K (add snapshot pairs) or decrease m."
        )

    Px = lift.evaluate(data.X)
    Py = lift.evaluate(data.Y)
    L, diagnostics = generator_from_lifts(Px, Py, data.ts, rcond=rcond, branch=branch)
    gen = GeneratorEstimate(L=L, dictionary=lift, ts=data.ts, diagnostics=diagnostics)

    lmap = degree_one_index_map(lift)
    W = np.column_stack([L[:, lmap[j]] for j in range(1, n + 1)])
    model = VectorFieldModel(
        library=lift, W=W, n=n, p=0,
        diagnostics=_json_safe_diag(diagnostics), generator=gen,
    )
    return model


def vector_field_at_samples_main(gen: GeneratorEstimate, data: SnapshotSet) -> np.ndarray:
    """Vector-field values at the sample points from the generator estimate:
    column j is P_x @ (L e_l) with l the dictionary index of coordinate j.
    Returns a K x n matrix.
    """
    if gen.dictionary.n == data.n:
        pts = data.X
    elif data.inputs is not None and gen.dictionary.n == data.n + data.p:
        pts = np.hstack([data.X, data.inputs])
    else:
        raise ValueError(
            f"generator dictionary dimension {gen.dictionary.n} does not match "
            f"data ({data.n} states, {data.p} inputs)"
        )
    Px = gen.dictionary.evaluate(pts)
    lmap = degree_one_index_map(gen.dictionary)
    cols = [Px @ gen.L[:, lmap[j]] for j in range(1, data.n + 1)]
    return np.column_stack(cols)
