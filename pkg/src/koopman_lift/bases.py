"""Dictionaries of scalar observables and vector-field library functions.

A dictionary is an ordered, finite set of scalar functions on the state
space. Supported kinds: total-degree monomial bases, Gaussian radial basis
functions, Hill functions 1/(1+x_k^l), sine-difference libraries for phase
oscillators, and ordered composites of the above. Every kind is a concrete
serializable object (not a closure) so identified models can be written to
disk and reloaded.

State indices in public constructors and serialized specs are 1-based to
match the usual subscript notation; entry dependency sets returned by
``entries()`` use 0-based column indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, SizeError

# Hard cap on dictionary size; beyond this the dense lift matrices stop
# being representable anyway.
MAX_DICTIONARY_SIZE = 50_000_000


@dataclass(frozen=True)
class MultiIndex:
    """Exponent tuple of one monomial, e.g. (1, 0, 2) for x1 * x3^2."""

    exponents: tuple

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def label(self) -> str:
        if self.degree == 0:
            return "1"
        parts = []
        for j, e in enumerate(self.exponents):
            if e == 1:
                parts.append(f"x{j + 1}")
            elif e > 1:
                parts.append(f"x{j + 1}^{e}")
        return "*".join(parts)


@dataclass(frozen=True)
class Entry:
    """Metadata for one dictionary entry.

    key: hashable identity used for duplicate detection and model alignment.
    deps: 0-based state indices the entry depends on.
    degree: total degree for monomials, None otherwise.
    label: human-readable name.
    """

    key: tuple
    deps: frozenset
    degree: int | None
    label: str


def monomial_count(n: int, m: int) -> int:
    """Number of n-variate monomials of total degree <= m."""
    return math.comb(n + m, m)


def enumerate_monomials(n: int, m: int) -> list[MultiIndex]:
    """All multi-indices with sum of exponents <= m, graded lexicographic.

    Entries are sorted by total degree first; within a degree the index with
    the larger exponent on the earlier coordinate comes first. The first
    entry is the constant, and the degree-1 entries follow in state order.
    """
    if n < 1:
        raise ValueError(f"state dimension must be >= 1, got {n}")
    if m < 0:
        raise ValueError(f"max degree must be >= 0, got {m}")
    total = monomial_count(n, m)
    if total > MAX_DICTIONARY_SIZE:
        raise SizeError(
            f"monomial dictionary would have {total} entries "
            f"(n={n}, m={m}); refusing to enumerate beyond {MAX_DICTIONARY_SIZE}"
        )

    out = []

    # Build degree by degree: for each total degree d, enumerate exponent
    # tuples summing to exactly d in descending lexicographic order.
    def compositions(d, slots):
        if slots == 1:
            yield (d,)
            return
        for first in range(d, -1, -1):
            for rest in compositions(d - first, slots - 1):
                yield (first,) + rest

    for d in range(m + 1):
        for expo in compositions(d, n):
            out.append(MultiIndex(expo))
    assert len(out) == total
    return out


def _check_points(points: np.ndarray, n: int) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != n:
        raise ValueError(f"points have dimension {pts.shape[1]}, dictionary expects {n}")
    if not np.all(np.isfinite(pts)):
        bad = int(np.argwhere(~np.all(np.isfinite(pts), axis=1))[0, 0])
        raise NumericalError(f"non-finite state in row {bad}")
    return pts


class Dictionary:
    """Base class; concrete kinds implement evaluation and metadata."""

    kind = "abstract"
    n: int

    @property
    def size(self) -> int:
        raise NotImplementedError

    def entries(self) -> list[Entry]:
        raise NotImplementedError

    def evaluate(self, points) -> np.ndarray:
        """Evaluate all entries at the given K x n points; returns K x N."""
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, Dictionary) and self.to_spec() == other.to_spec()

    def __repr__(self):
        return f"<{type(self).__name__} n={self.n} N={self.size}>"


class MonomialDictionary(Dictionary):
    """All monomials of total degree <= m in graded lexicographic order."""

    kind = "monomial"

    def __init__(self, n: int, m: int):
        self.n = int(n)
        self.m = int(m)
        self.indices = enumerate_monomials(self.n, self.m)

    @property
    def size(self) -> int:
        return len(self.indices)

    def entries(self) -> list[Entry]:
        out = []
        for mi in self.indices:
            deps = frozenset(j for j, e in enumerate(mi.exponents) if e > 0)
            key = ("const",) if mi.degree == 0 else ("mono", mi.exponents)
            out.append(Entry(key=key, deps=deps, degree=mi.degree, label=mi.label()))
        return out

    def evaluate(self, points) -> np.ndarray:
        pts = _check_points(points, self.n)
        K = pts.shape[0]
        out = np.empty((K, self.size), order="F")
        for c, mi in enumerate(self.indices):
            col = np.ones(K)
            for j, e in enumerate(mi.exponents):
                if e == 1:
                    col = col * pts[:, j]
                elif e > 1:
                    col = col * pts[:, j] ** e
            out[:, c] = col
        return out

    def to_spec(self) -> dict:
        return {"kind": "monomial", "n": self.n, "m": self.m}


class GaussianRBFDictionary(Dictionary):
    """Gaussian bumps exp(-gamma * ||x - c||^2), one per center row."""

    kind = "rbf"

    def __init__(self, centers, gamma: float):
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        if centers.size == 0:
            raise ValueError("RBF dictionary needs at least one center")
        if not np.all(np.isfinite(centers)):
            raise NumericalError("non-finite RBF center")
        if gamma <= 0:
            raise ValueError(f"gamma must be positive, got {gamma}")
        self.centers = centers
        self.gamma = float(gamma)
        self.n = centers.shape[1]

    @property
    def size(self) -> int:
        return self.centers.shape[0]

    def entries(self) -> list[Entry]:
        all_states = frozenset(range(self.n))
        return [
            Entry(
                key=("rbf", self.gamma, tuple(c)),
                deps=all_states,
                degree=None,
                label=f"rbf(c{k + 1})",
            )
            for k, c in enumerate(self.centers)
        ]

    def evaluate(self, points) -> np.ndarray:
        pts = _check_points(points, self.n)
        # ||x - c||^2 = ||x||^2 + ||c||^2 - 2 x.c, kept in one BLAS call
        sq = (
            np.sum(pts**2, axis=1)[:, None]
            + np.sum(self.centers**2, axis=1)[None, :]
            - 2.0 * pts @ self.centers.T
        )
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-self.gamma * sq)

    def to_spec(self) -> dict:
        return {
            "kind": "rbf",
            "n": self.n,
            "gamma": self.gamma,
            "centers": [[float(v) for v in row] for row in self.centers],
        }


class HillDictionary(Dictionary):
    """Saturating functions 1/(1 + x_k^l) in (k, l) product order."""

    kind = "hill"

    def __init__(self, n: int, ks, ls):
        self.n = int(n)
        self.ks = [int(k) for k in ks]
        self.ls = [int(l) for l in ls]
        for k in self.ks:
            if not 1 <= k <= self.n:
                raise ValueError(f"state index {k} outside 1..{self.n}")
        for l in self.ls:
            if l < 1:
                raise ValueError(f"exponent must be >= 1, got {l}")
        self.pairs = [(k, l) for k in self.ks for l in self.ls]

    @property
    def size(self) -> int:
        return len(self.pairs)

    def entries(self) -> list[Entry]:
        return [
            Entry(
                key=("hill", k, l),
                deps=frozenset({k - 1}),
                degree=None,
                label=f"1/(1+x{k}^{l})",
            )
            for (k, l) in self.pairs
        ]

    def evaluate(self, points) -> np.ndarray:
        pts = _check_points(points, self.n)
        cols = [1.0 / (1.0 + pts[:, k - 1] ** l) for (k, l) in self.pairs]
        return np.column_stack(cols)

    def to_spec(self) -> dict:
        return {"kind": "hill", "n": self.n, "ks": self.ks, "ls": self.ls}


class SinDiffDictionary(Dictionary):
    """Phase-coupling library for one target state i: the constant, then
    sin(x_j - x_i) for every j != i in ascending j."""

    kind = "sindiff"

    def __init__(self, n: int, target: int):
        self.n = int(n)
        self.target = int(target)
        if not 1 <= self.target <= self.n:
            raise ValueError(f"target {target} outside 1..{self.n}")
        self.others = [j for j in range(1, self.n + 1) if j != self.target]

    @property
    def size(self) -> int:
        return self.n

    def entries(self) -> list[Entry]:
        out = [Entry(key=("const",), deps=frozenset(), degree=0, label="1")]
        i = self.target
        for j in self.others:
            out.append(
                Entry(
                    key=("sindiff", j, i),
                    deps=frozenset({j - 1, i - 1}),
                    degree=None,
                    label=f"sin(x{j}-x{i})",
                )
            )
        return out

    def evaluate(self, points) -> np.ndarray:
        pts = _check_points(points, self.n)
        i = self.target - 1
        cols = [np.ones(pts.shape[0])]
        cols += [np.sin(pts[:, j - 1] - pts[:, i]) for j in self.others]
        return np.column_stack(cols)

    def to_spec(self) -> dict:
        return {"kind": "sindiff", "n": self.n, "target": self.target}


class CompositeDictionary(Dictionary):
    """Concatenation of sub-dictionaries in the given order.

    No deduplication is performed; callers that require distinct entries
    must check (see ``has_duplicates``).
    """

    kind = "composite"

    def __init__(self, parts):
        parts = list(parts)
        if not parts:
            raise ValueError("composite needs at least one sub-dictionary")
        n = parts[0].n
        for p in parts:
            if p.n != n:
                raise ValueError("all sub-dictionaries must share the state dimension")
        self.parts = parts
        self.n = n

    @property
    def size(self) -> int:
        return sum(p.size for p in self.parts)

    def entries(self) -> list[Entry]:
        out = []
        for p in self.parts:
            out.extend(p.entries())
        return out

    def evaluate(self, points) -> np.ndarray:
        pts = _check_points(points, self.n)
        return np.hstack([p.evaluate(pts) for p in self.parts])

    def to_spec(self) -> dict:
        return {"kind": "composite", "parts": [p.to_spec() for p in self.parts]}


def has_duplicates(d: Dictionary) -> bool:
    keys = [e.key for e in d.entries()]
    return len(keys) != len(set(keys))


def eval_dictionary(d: Dictionary, x) -> np.ndarray:
    """Evaluate every entry of d at a single point; returns a length-N vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected a single n-vector, got shape {x.shape}")
    return d.evaluate(x[None, :])[0]


def eval_lift_matrix(d: Dictionary, points) -> np.ndarray:
    """Row k of the result is eval_dictionary(d, points[k]); shape K x N."""
    return d.evaluate(points)


def hill_dictionary(n: int, ks, ls) -> HillDictionary:
    """Hill functions 1/(1+x_k^l) over the (k, l) product grid."""
    return HillDictionary(n, ks, ls)


def kuramoto_library(n: int, i: int) -> SinDiffDictionary:
    """Library for phase-oscillator state i: {1} + {sin(x_j - x_i), j != i}."""
    return SinDiffDictionary(n, i)


def degree_one_index_map(d: Dictionary) -> dict:
    """Map state j (1-based) -> entry index l such that entry l is x_j.

    Defined only when the dictionary contains every degree-1 monomial.
    """
    mapping = {}
    for l, e in enumerate(d.entries()):
        if e.key[0] == "mono" and e.degree == 1:
            (j,) = [idx for idx, p in enumerate(e.key[1]) if p == 1]
            mapping.setdefault(j + 1, l)
    missing = [j for j in range(1, d.n + 1) if j not in mapping]
    if missing:
        raise ValueError(
            f"dictionary lacks degree-1 monomials for states {missing}; "
            "coefficient read-out requires all coordinate functions"
        )
    return mapping


def dictionary_from_spec(spec: dict, n: int | None = None, samples=None) -> Dictionary:
    """Build a dictionary from its serialized form.

    ``centers: "samples"`` in an RBF spec resolves to the provided sample
    matrix (one basis function per sample point).
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError(f"dictionary spec must be a mapping with a 'kind': {spec!r}")
    kind = spec["kind"]
    dim = spec.get("n", n)
    if kind == "monomial":
        if dim is None:
            raise ValueError("monomial spec needs the state dimension")
        return MonomialDictionary(dim, spec["m"])
    if kind == "rbf":
        centers = spec.get("centers", "samples")
        if isinstance(centers, str):
            if centers != "samples":
                raise ValueError(f"unknown RBF center rule {centers!r}")
            if samples is None:
                raise ValueError("RBF spec says centers='samples' but no samples given")
            centers = samples
        return GaussianRBFDictionary(centers, spec["gamma"])
    if kind == "hill":
        if dim is None:
            raise ValueError("hill spec needs the state dimension")
        return HillDictionary(dim, spec["ks"], spec["ls"])
    if kind == "sindiff":
        if dim is None:
            raise ValueError("sindiff spec needs the state dimension")
        return SinDiffDictionary(dim, spec["target"])
    if kind == "composite":
        return CompositeDictionary(
            [dictionary_from_spec(p, n=dim, samples=samples) for p in spec["parts"]]
        )
    raise ValueError(f"unknown dictionary kind {kind!r}")
