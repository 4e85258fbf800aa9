"""Dense linear-algebra kernels: truncated-SVD pseudoinverse, least squares,
and the principal matrix logarithm with branch diagnostics.

The logarithm delegates to scipy's Schur-based inverse scaling-and-squaring
implementation; this module adds the spectrum checks the estimators rely on
(no eigenvalue on the closed negative real axis, imaginary parts of the log
spectrum inside (-pi, pi)) and guarantees a real result for real input.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import BranchCutError, NumericalError

DEFAULT_RCOND = 1e-10
NEGATIVE_AXIS_TOL = 1e-12
IMAG_TRUNCATION_TOL = 1e-8


@dataclass
class PinvResult:
    """Moore-Penrose pseudoinverse with the SVD truncation record."""

    pinv: np.ndarray
    rank: int
    cutoff: float
    condition: float
    # retained decomposition, reused by the generator estimators
    u: np.ndarray = field(repr=False, default=None)
    s: np.ndarray = field(repr=False, default=None)
    vt: np.ndarray = field(repr=False, default=None)


@dataclass
class LogmResult:
    """Principal matrix logarithm plus the spectrum checks.

    branch_ok: no input eigenvalue on (or within tolerance of) the closed
        negative real axis.
    strip_ok: imaginary parts of the log spectrum strictly inside (-pi, pi).
    """

    logm: np.ndarray
    spectrum: np.ndarray
    branch_ok: bool
    strip_ok: bool


def pinv(A, rcond: float = DEFAULT_RCOND) -> PinvResult:
    """Pseudoinverse via SVD; singular values <= rcond * sigma_max are dropped."""
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise NumericalError("pinv: non-finite entries in input")
    try:
        u, s, vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"SVD failed on {A.shape[0]}x{A.shape[1]} matrix "
            f"(max |entry| {np.max(np.abs(A)):.3e})"
        ) from exc
    cutoff = rcond * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > cutoff))
    u_r, s_r, vt_r = u[:, :rank], s[:rank], vt[:rank]
    pinv_mat = (vt_r.T / s_r) @ u_r.T if rank else np.zeros((A.shape[1], A.shape[0]))
    condition = float(s_r[0] / s_r[-1]) if rank else np.inf
    return PinvResult(
        pinv=pinv_mat, rank=rank, cutoff=float(cutoff), condition=condition,
        u=u_r, s=s_r, vt=vt_r,
    )


def lstsq(A, B, rcond: float = DEFAULT_RCOND) -> np.ndarray:
    """Minimum-norm least-squares solution of A X ~= B (equal to pinv(A) B)."""
    B = np.asarray(B, dtype=float)
    if not np.all(np.isfinite(B)):
        raise NumericalError("lstsq: non-finite entries in right-hand side")
    return pinv(A, rcond=rcond).pinv @ B


def _offending_eigenvalues(spectrum: np.ndarray, tol: float) -> np.ndarray:
    """Eigenvalues on or within tol of the closed negative real axis."""
    re, im = spectrum.real, spectrum.imag
    on_axis = (re <= 0) & (np.abs(im) <= tol)
    near_origin = np.abs(spectrum) <= tol
    return spectrum[on_axis | near_origin]


def logm_principal(A, axis_tol: float = NEGATIVE_AXIS_TOL,
                   on_negative_axis: str = "error") -> LogmResult:
    """Principal matrix logarithm of a real square matrix.

    By default raises BranchCutError when any eigenvalue sits on the closed
    negative real axis (including zero, i.e. singular input), carrying the
    offending eigenvalues so the caller can decide how to surface the
    failure. With on_negative_axis="modulus", strictly negative real
    eigenvalues are tolerated by taking the real part of the complex
    principal logarithm (their log becomes log|lambda|); the result then has
    branch_ok=False and exp(logm) does not reproduce the input. Singular
    input is an error under either policy.
    """
    if on_negative_axis not in ("error", "modulus"):
        raise ValueError(f"unknown negative-axis policy {on_negative_axis!r}")
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"logm needs a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NumericalError("logm: non-finite entries in input")

    spectrum = np.linalg.eigvals(A)
    near_zero = spectrum[np.abs(spectrum) <= axis_tol]
    if near_zero.size:
        raise BranchCutError(
            "matrix logarithm undefined: (numerically) singular input, "
            f"eigenvalue(s) {', '.join(f'{z:.6g}' for z in near_zero[:5])}",
            eigenvalues=near_zero,
        )
    bad = _offending_eigenvalues(spectrum, axis_tol)
    branch_ok = bad.size == 0
    if not branch_ok and on_negative_axis == "error":
        raise BranchCutError(
            "principal matrix logarithm undefined: eigenvalue(s) on the closed "
            f"negative real axis: {', '.join(f'{z:.6g}' for z in bad[:5])}"
            + ("..." if bad.size > 5 else ""),
            eigenvalues=bad,
        )

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # scipy warns about estimated error
        L = scipy.linalg.logm(A.astype(complex) if not branch_ok else A)

    if np.iscomplexobj(L):
        if branch_ok:
            residue = float(np.max(np.abs(L.imag)))
            if residue > IMAG_TRUNCATION_TOL:
                raise NumericalError(
                    f"matrix logarithm has imaginary residue {residue:.3e} "
                    f"(> {IMAG_TRUNCATION_TOL:g}) despite a branch-clean spectrum"
                )
        L = L.real.copy()

    log_imag = np.angle(spectrum)
    strip_ok = bool(np.all(np.abs(log_imag) < np.pi))
    return LogmResult(logm=L, spectrum=spectrum, branch_ok=branch_ok, strip_ok=strip_ok)
