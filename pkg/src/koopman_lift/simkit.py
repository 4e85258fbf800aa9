"""Benchmark systems and data generation: exact fields with their declared
coefficient matrices, adaptive ODE integration, Euler-Maruyama SDE paths,
snapshot sampling with multiplicative measurement noise, state rescaling,
and random network generators.

Every system carries a ground-truth VectorFieldModel over a declared library
so identified models can be scored coefficient-by-coefficient, and (for the
network systems) a directed adjacency matrix indexed [source, target].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy.integrate import solve_ivp

from .bases import (
    CompositeDictionary,
    HillDictionary,
    MonomialDictionary,
    kuramoto_library,
)
from .errors import ConfigError, DivergenceError
from .koopman_main import SnapshotSet, VectorFieldModel

BLOWUP_NORM = 1e8
DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-11


@dataclass
class BenchmarkSystem:
    """A named dynamical system with exact field and exact coefficients.

    field: callable x -> dx/dt (plus an input argument when p > 0).
    truth: exact coefficients over the declared library.
    diffusion: per-component process-noise gains for stochastic systems.
    adjacency: boolean [source, target] ground-truth influence matrix.
    """

    name: str
    n: int
    field: object
    truth: VectorFieldModel
    default_box: np.ndarray
    p: int = 0
    input_fn: object = None
    diffusion: np.ndarray | None = None
    adjacency: np.ndarray | None = None
    params: dict = dataclass_field(default_factory=dict)

    def rhs(self):
        """Time-dependent right-hand side for the integrators."""
        if self.p:
            return lambda t, x: self.field(x, self.input_fn(t))
        return lambda t, x: self.field(x)


@dataclass
class SamplingPlan:
    """How to draw snapshot pairs: r trajectories from uniform initial
    conditions in a box, sampled every ts time units.

    pair_layout "chained" takes L+1 consecutive snapshots per trajectory and
    pairs neighbours (pairs share their interior points). "disjoint" takes
    2L snapshots and pairs them without reuse, which the sample-space (dual)
    method needs: reused points make its transfer matrix a shift operator
    with eigenvalues all around the origin, where no logarithm branch works.
    """

    ts: float
    pairs_per_trajectory: int
    trajectories: int
    box: np.ndarray
    seed: int
    em_dt: float | None = None
    pair_layout: str = "chained"

    def __post_init__(self):
        self.box = np.atleast_2d(np.asarray(self.box, dtype=float))
        if self.box.shape[1] != 2 or np.any(self.box[:, 1] < self.box[:, 0]):
            raise ConfigError(f"box must be rows of [lo, hi] intervals: {self.box}")
        if self.ts <= 0 or self.pairs_per_trajectory < 1 or self.trajectories < 1:
            raise ConfigError("sampling plan needs ts > 0 and positive counts")
        if self.pair_layout not in ("chained", "disjoint"):
            raise ConfigError(f"unknown pair_layout {self.pair_layout!r}")

    @property
    def K(self) -> int:
        return self.trajectories * self.pairs_per_trajectory


def integrate_ode(rhs, x0, t_eval, rtol: float = DEFAULT_RTOL,
                  atol: float = DEFAULT_ATOL) -> np.ndarray:
    """Adaptive RK45 solution sampled at t_eval; raises DivergenceError if
    the state norm passes 1e8."""
    t_eval = np.asarray(t_eval, dtype=float)
    x0 = np.asarray(x0, dtype=float)

    def blowup(t, x):
        return np.max(np.abs(x)) - BLOWUP_NORM

    blowup.terminal = True
    sol = solve_ivp(
        rhs, (float(t_eval[0]), float(t_eval[-1])), x0,
        method="RK45", t_eval=t_eval, rtol=rtol, atol=atol, events=blowup,
    )
    if sol.status == 1:  # blow-up event fired
        raise DivergenceError(
            f"trajectory escaped (|x| > {BLOWUP_NORM:g}) at t = {sol.t_events[0][0]:.6g}",
            time=float(sol.t_events[0][0]),
        )
    if not sol.success:
        raise DivergenceError(f"integration failed: {sol.message}")
    return sol.y.T


def integrate_sde(F, sigma_proc, x0, T: float, dt: float,
                  rng: np.random.Generator) -> np.ndarray:
    """Euler-Maruyama path of dx = F(x) dt + sigma dW on a fixed grid.

    sigma_proc broadcasts over components (scalar or per-component vector).
    Returns the path at times 0, dt, ..., T (inclusive).
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.shape[0]
    steps = int(round(T / dt))
    if not math.isclose(steps * dt, T, rel_tol=1e-9, abs_tol=1e-12):
        raise ConfigError(f"dt={dt} does not divide the horizon T={T}")
    sigma = np.broadcast_to(np.asarray(sigma_proc, dtype=float), (n,))
    sqrt_dt = math.sqrt(dt)
    path = np.empty((steps + 1, n))
    path[0] = x0
    x = x0.copy()
    for k in range(steps):
        noise = sigma * (sqrt_dt * rng.standard_normal(n))
        x = x + np.asarray(F(x), dtype=float) * dt + noise
        if np.max(np.abs(x)) > BLOWUP_NORM:
            raise DivergenceError(
                f"SDE path escaped (|x| > {BLOWUP_NORM:g}) at t = {(k + 1) * dt:.6g}",
                time=(k + 1) * dt,
            )
        path[k + 1] = x
    return path


def sample_snapshots(sys: BenchmarkSystem, plan: SamplingPlan,
                     sigma_meas: float) -> SnapshotSet:
    """Simulate r trajectories and collect consecutive snapshot pairs.

    Each snapshot is measured once with multiplicative Gaussian noise
    (x = exact * (1 + v), v ~ N(0, sigma_meas^2) per component), so the
    shared interior point of two consecutive pairs carries the same
    measurement. Exact values are kept in meta for scoring.
    """
    if plan.box.shape[0] != sys.n:
        raise ConfigError(
            f"box has {plan.box.shape[0]} rows for a {sys.n}-dimensional system"
        )
    L = plan.pairs_per_trajectory
    r = plan.trajectories
    chained = plan.pair_layout == "chained"
    n_snap = L + 1 if chained else 2 * L
    times = np.arange(n_snap) * plan.ts
    lo, hi = plan.box[:, 0], plan.box[:, 1]
    rhs = sys.rhs()

    children = np.random.SeedSequence(plan.seed).spawn(r)
    exact_paths = []
    noisy_paths = []
    for i in range(r):
        rng = np.random.default_rng(children[i])
        x0 = lo + rng.random(sys.n) * (hi - lo)
        try:
            if sys.diffusion is not None:
                dt = plan.em_dt if plan.em_dt is not None else plan.ts / 100.0
                sub = int(round(plan.ts / dt))
                if not math.isclose(sub * dt, plan.ts, rel_tol=1e-9, abs_tol=1e-12):
                    raise ConfigError(f"em_dt={dt} does not divide ts={plan.ts}")
                fine = integrate_sde(sys.field, sys.diffusion, x0,
                                     T=times[-1], dt=dt, rng=rng)
                exact = fine[::sub]
            else:
                exact = integrate_ode(rhs, x0, times)
        except DivergenceError as exc:
            raise DivergenceError(
                f"trajectory {i}: {exc}", time=exc.time
            ) from exc
        v = rng.standard_normal((n_snap, sys.n)) * sigma_meas
        noisy = exact * (1.0 + v)
        exact_paths.append(exact)
        noisy_paths.append(noisy)

    if chained:
        x_slice, y_slice = slice(None, -1), slice(1, None)
    else:
        x_slice, y_slice = slice(0, None, 2), slice(1, None, 2)
    X = np.vstack([z[x_slice] for z in noisy_paths])
    Y = np.vstack([z[y_slice] for z in noisy_paths])
    X_exact = np.vstack([z[x_slice] for z in exact_paths])
    Y_exact = np.vstack([z[y_slice] for z in exact_paths])
    trajectory_ids = np.repeat(np.arange(r), L)
    pair_indices = np.tile(np.arange(L), r)

    inputs = None
    if sys.p:
        u_rows = np.array([np.atleast_1d(sys.input_fn(t)) for t in times[x_slice]])
        inputs = np.vstack([u_rows] * r)

    meta = {
        "system": sys.name,
        "sigma_meas": float(sigma_meas),
        "sigma_proc": float(np.max(sys.diffusion)) if sys.diffusion is not None else 0.0,
        "seed": int(plan.seed),
        "pair_layout": plan.pair_layout,
        "X_exact": X_exact,
        "Y_exact": Y_exact,
        "system_params": dict(sys.params),
    }
    return SnapshotSet(
        X=X, Y=Y, ts=plan.ts, inputs=inputs,
        trajectory_ids=trajectory_ids, pair_indices=pair_indices, meta=meta,
    )


def rescale(data: SnapshotSet, alpha: float) -> SnapshotSet:
    """Divide all states by alpha (to bring data into the unit box).

    Multiplicative measurement noise commutes with the scaling, so the
    rescaled set has the same noise statistics.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if data.inputs is not None:
        raise ValueError("rescaling snapshot sets with input channels is not supported")
    meta = dict(data.meta)
    for key in ("X_exact", "Y_exact"):
        if key in meta:
            meta[key] = meta[key] / alpha
    meta["rescale_alpha"] = float(alpha) * meta.get("rescale_alpha", 1.0)
    return SnapshotSet(
        X=data.X / alpha, Y=data.Y / alpha, ts=data.ts, inputs=None,
        trajectory_ids=data.trajectory_ids, pair_indices=data.pair_indices,
        meta=meta,
    )


def unrescale_coefficients(model: VectorFieldModel, alpha: float) -> VectorFieldModel:
    """Map coefficients identified on (states / alpha) data back to original
    units: a monomial term of total degree d picked up a factor alpha^(d-1),
    so its coefficient is divided by alpha^(d-1).
    """
    if model.per_state:
        raise ValueError("unrescale supports a single shared monomial library only")
    degrees = [e.degree for e in model.library.entries()]
    if any(d is None for d in degrees):
        raise ValueError("unrescale is defined for monomial libraries only")
    factors = np.array([alpha ** (1 - d) for d in degrees])
    return VectorFieldModel(
        library=model.library, W=model.W * factors[:, None],
        n=model.n, p=model.p,
        diagnostics={**model.diagnostics, "rescale_alpha": float(alpha)},
        generator=model.generator,
    )


# ---------------------------------------------------------------------------
# benchmark systems


def _mono_key_index(lib: MonomialDictionary) -> dict:
    return {mi.exponents: i for i, mi in enumerate(lib.indices)}


def _mono_truth(n: int, m: int, terms: dict) -> VectorFieldModel:
    """terms[state (0-based)] = {exponent tuple: coefficient}."""
    lib = MonomialDictionary(n, m)
    idx = _mono_key_index(lib)
    W = np.zeros((lib.size, n))
    for j, tmap in terms.items():
        for expo, w in tmap.items():
            W[idx[tuple(expo)], j] = float(w)
    return VectorFieldModel(library=lib, W=W, n=n)


def vanderpol() -> BenchmarkSystem:
    """Self-sustained oscillator with a stable limit cycle."""

    def F(x):
        return np.array([x[1], (1.0 - x[0] ** 2) * x[1] - x[0]])

    truth = _mono_truth(2, 3, {
        0: {(0, 1): 1.0},
        1: {(0, 1): 1.0, (1, 0): -1.0, (2, 1): -1.0},
    })
    return BenchmarkSystem(
        name="vanderpol", n=2, field=F, truth=truth,
        default_box=np.array([[-1.0, 1.0], [-1.0, 1.0]]),
    )


def unstable() -> BenchmarkSystem:
    """Polynomial system with an unstable equilibrium at the origin."""

    def F(x):
        x1, x2 = x
        return np.array([
            3.0 * x1 + 0.5 * x2 - x1 * x2 + x2 ** 2 + 2.0 * x1 ** 3,
            0.5 * x1 + 4.0 * x2,
        ])

    truth = _mono_truth(2, 3, {
        0: {(1, 0): 3.0, (0, 1): 0.5, (1, 1): -1.0, (0, 2): 1.0, (3, 0): 2.0},
        1: {(1, 0): 0.5, (0, 1): 4.0},
    })
    return BenchmarkSystem(
        name="unstable", n=2, field=F, truth=truth,
        default_box=np.array([[-0.5, 0.5], [-0.5, 0.5]]),
    )


def lorenz() -> BenchmarkSystem:
    """Chaotic Lorenz system with the classic parameters."""

    def F(x):
        x1, x2, x3 = x
        return np.array([
            10.0 * (x2 - x1),
            x1 * (28.0 - x3) - x2,
            x1 * x2 - (8.0 / 3.0) * x3,
        ])

    truth = _mono_truth(3, 3, {
        0: {(1, 0, 0): -10.0, (0, 1, 0): 10.0},
        1: {(1, 0, 0): 28.0, (1, 0, 1): -1.0, (0, 1, 0): -1.0},
        2: {(1, 1, 0): 1.0, (0, 0, 1): -8.0 / 3.0},
    })
    return BenchmarkSystem(
        name="lorenz", n=3, field=F, truth=truth,
        default_box=np.array([[-20.0, 20.0]] * 3),
    )


def duffing_forced() -> BenchmarkSystem:
    """Duffing oscillator driven through a quadratic input channel,
    u(t) = cos(t). Identified over the augmented state (x1, x2, u)."""

    def F(x, u):
        x1, x2 = x
        return np.array([x2, x1 - x1 ** 3 - 0.2 * x2 + 0.2 * x1 ** 2 * u[0]])

    # truth over monomials in (x1, x2, u), total degree <= 3
    truth_lib = MonomialDictionary(3, 3)
    idx = _mono_key_index(truth_lib)
    W = np.zeros((truth_lib.size, 2))
    W[idx[(0, 1, 0)], 0] = 1.0
    W[idx[(1, 0, 0)], 1] = 1.0
    W[idx[(3, 0, 0)], 1] = -1.0
    W[idx[(0, 1, 0)], 1] = -0.2
    W[idx[(2, 0, 1)], 1] = 0.2
    truth = VectorFieldModel(library=truth_lib, W=W, n=2, p=1)

    return BenchmarkSystem(
        name="duffing_forced", n=2, field=F, truth=truth,
        default_box=np.array([[-1.0, 1.0], [-1.0, 1.0]]),
        p=1, input_fn=lambda t: np.array([math.cos(t)]),
    )


def duffing_stochastic(sigma_proc: float) -> BenchmarkSystem:
    """Duffing oscillator with white-noise forcing on the velocity equation."""

    def F(x):
        x1, x2 = x
        return np.array([x2, x1 - x1 ** 3 - 0.2 * x2])

    truth = _mono_truth(2, 3, {
        0: {(0, 1): 1.0},
        1: {(1, 0): 1.0, (3, 0): -1.0, (0, 1): -0.2},
    })
    return BenchmarkSystem(
        name="duffing_stochastic", n=2, field=F, truth=truth,
        default_box=np.array([[-1.0, 1.0], [-1.0, 1.0]]),
        diffusion=np.array([0.0, float(sigma_proc)]),
        params={"sigma_proc": float(sigma_proc)},
    )


def toggle_switch() -> BenchmarkSystem:
    """Four-state genetic toggle switch with saturating (Hill) production."""

    def F(x):
        x1, x2, x3, x4 = x
        return np.array([
            -x1 + 2.0 * x2,
            -x2 + 2.0 / (1.0 + x3 ** 2),
            -2.0 * x3 + 2.0 * x4,
            -2.0 * x4 + 1.0 / (1.0 + x1 ** 3),
        ])

    lib = CompositeDictionary([
        MonomialDictionary(4, 1),
        HillDictionary(4, ks=[1, 2, 3, 4], ls=[1, 2, 3]),
    ])
    key_idx = {e.key: i for i, e in enumerate(lib.entries())}

    def mono(*expo):
        return key_idx[("mono", tuple(expo))]

    W = np.zeros((lib.size, 4))
    W[mono(1, 0, 0, 0), 0] = -1.0
    W[mono(0, 1, 0, 0), 0] = 2.0
    W[mono(0, 1, 0, 0), 1] = -1.0
    W[key_idx[("hill", 3, 2)], 1] = 2.0
    W[mono(0, 0, 1, 0), 2] = -2.0
    W[mono(0, 0, 0, 1), 2] = 2.0
    W[mono(0, 0, 0, 1), 3] = -2.0
    W[key_idx[("hill", 1, 3)], 3] = 1.0
    truth = VectorFieldModel(library=lib, W=W, n=4)

    return BenchmarkSystem(
        name="toggle_switch", n=4, field=F, truth=truth,
        default_box=np.array([[0.0, 1.0]] * 4),
    )


def kuramoto(n: int, seed: int, coupling: float = 10.0,
             p_link: float = 0.3) -> BenchmarkSystem:
    """Network of phase oscillators with random natural frequencies on a
    weighted directed Erdos-Renyi graph.

    d theta_i/dt = omega_i + (C/n) sum_j A[i, j] sin(theta_j - theta_i).
    adjacency[source, target] marks A[target, source] != 0 (no self loops).
    """
    if n < 2:
        raise ValueError("kuramoto needs n >= 2")
    if not 0 < p_link <= 1:
        raise ValueError("p_link must be in (0, 1]")
    rng = np.random.default_rng(seed)
    omegas = rng.uniform(0.0, 0.1, size=n)
    links = rng.random((n, n)) < p_link
    np.fill_diagonal(links, False)
    weights = rng.uniform(0.0, 1.0, size=(n, n)) * links
    A = weights
    C = float(coupling)

    def F(theta):
        diff = theta[None, :] - theta[:, None]
        return omegas + (C / n) * np.einsum("ij,ij->i", A, np.sin(diff))

    libs = [kuramoto_library(n, i) for i in range(1, n + 1)]
    W = np.zeros((n, n))
    for i in range(n):  # state i, 0-based
        W[0, i] = omegas[i]
        lib = libs[i]
        for l, e in enumerate(lib.entries()):
            if e.key[0] == "sindiff":
                j = e.key[1] - 1  # source state, 0-based
                W[l, i] = (C / n) * A[i, j]
    truth = VectorFieldModel(library=libs, W=W, n=n)

    return BenchmarkSystem(
        name="kuramoto", n=n, field=F, truth=truth,
        default_box=np.array([[0.0, 2.0 * math.pi]] * n),
        adjacency=(A != 0.0).T.copy(),
        params={"n": n, "seed": int(seed), "coupling": C, "p_link": float(p_link)},
    )


def _poly_interaction_candidates(n: int) -> list:
    """Exponent tuples of total degree 2 or 3 touching at most two states."""
    out = []
    for k in range(n):
        e = [0] * n
        e[k] = 2
        out.append(tuple(e))
        e[k] = 3
        out.append(tuple(e))
        for l in range(k + 1, n):
            for pk, pl in ((1, 1), (2, 1), (1, 2)):
                e = [0] * n
                e[k], e[l] = pk, pl
                out.append(tuple(e))
    return out


def poly_network(n: int, n_inter: int, seed: int) -> BenchmarkSystem:
    """Network with a stabilizing linear self-term per state plus n_inter
    random quadratic/cubic interactions, each touching at most two states.

    Linear weights are uniform on [0, 1] and enter with a negative sign so
    the origin is locally stable; interaction coefficients are standard
    normal on monomials x_k^p x_l^q with p + q in {2, 3}.
    """
    if n < 2:
        raise ValueError("poly_network needs n >= 2")
    rng = np.random.default_rng(seed)
    w_lin = rng.uniform(0.0, 1.0, size=n)
    candidates = _poly_interaction_candidates(n)
    if n_inter > len(candidates):
        raise ValueError(f"n_inter={n_inter} exceeds {len(candidates)} candidate terms")

    targets, coeffs, expos = [], [], []
    for j in range(n):
        picks = rng.choice(len(candidates), size=n_inter, replace=False)
        c = rng.standard_normal(n_inter)
        for idx, cj in zip(picks, c):
            targets.append(j)
            coeffs.append(float(cj))
            expos.append(candidates[idx])

    # flatten to index arrays for fast field evaluation: each interaction is
    # x[v1]^p1 * x[v2]^p2 with v2 = v1, p2 = 0 for single-state terms
    v1 = np.empty(len(expos), dtype=int)
    p1 = np.empty(len(expos), dtype=int)
    v2 = np.zeros(len(expos), dtype=int)
    p2 = np.zeros(len(expos), dtype=int)
    for t, e in enumerate(expos):
        nz = [(k, p) for k, p in enumerate(e) if p > 0]
        v1[t], p1[t] = nz[0]
        if len(nz) > 1:
            v2[t], p2[t] = nz[1]
    targets_arr = np.asarray(targets, dtype=int)
    coeffs_arr = np.asarray(coeffs, dtype=float)

    def F(x):
        out = -w_lin * x
        vals = coeffs_arr * x[v1] ** p1 * x[v2] ** p2
        np.add.at(out, targets_arr, vals)
        return out

    lib = MonomialDictionary(n, 3)
    idx = _mono_key_index(lib)
    W = np.zeros((lib.size, n))
    for j in range(n):
        e = [0] * n
        e[j] = 1
        W[idx[tuple(e)], j] = -w_lin[j]
    for t in range(len(expos)):
        W[idx[expos[t]], targets_arr[t]] += coeffs_arr[t]
    truth = VectorFieldModel(library=lib, W=W, n=n)

    adjacency = np.zeros((n, n), dtype=bool)
    np.fill_diagonal(adjacency, True)  # source j -> target j via the linear term
    for t, e in enumerate(expos):
        for k, pw in enumerate(e):
            if pw > 0:
                adjacency[k, targets_arr[t]] = True

    return BenchmarkSystem(
        name="poly_network", n=n, field=F, truth=truth,
        default_box=np.array([[-0.5, 0.5]] * n),
        adjacency=adjacency,
        params={"n": n, "n_inter": int(n_inter), "seed": int(seed)},
    )


def random_networks(kind: str, params: dict, seed: int) -> BenchmarkSystem:
    """Generate a random benchmark network ('kuramoto' or 'poly_network')."""
    if kind == "kuramoto":
        return kuramoto(seed=seed, **params)
    if kind == "poly_network":
        return poly_network(seed=seed, **params)
    raise ValueError(f"unknown network kind {kind!r}")


def make_system(name: str, seed: int | None = None, **params) -> BenchmarkSystem:
    """Benchmark registry, addressable by name."""
    deterministic = {
        "vanderpol": vanderpol,
        "unstable": unstable,
        "lorenz": lorenz,
        "duffing_forced": duffing_forced,
        "toggle_switch": toggle_switch,
    }
    if name in deterministic:
        if params:
            raise ConfigError(f"system {name!r} takes no parameters: {params}")
        return deterministic[name]()
    if name == "duffing_stochastic":
        return duffing_stochastic(**params)
    if name in ("kuramoto", "poly_network"):
        if seed is None:
            raise ConfigError(f"system {name!r} needs a seed")
        return random_networks(name, params, seed)
    raise ConfigError(f"unknown system {name!r}")
