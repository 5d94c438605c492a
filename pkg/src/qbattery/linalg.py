"""Dense complex matrix arithmetic and Hermitian spectral calculus.

Everything heavier in the package (states, GKSL generators, free-energy
diagnostics) sits on the primitives defined here: commutators,
|A|^2 = A A^dag, a cyclic Jacobi eigensolver for Hermitian matrices, and
scalar functions lifted to matrices through the spectral decomposition.

Matrices are plain complex numpy arrays.  HermitianMatrix and Spectrum wrap
them where extra guarantees have to travel with the data: the symmetrization
defect recorded at construction, the ascending eigenvalue order, and the
phase convention that makes eigenvectors deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DimensionError, DomainError, ValidationError
from .tolerances import DEFAULT_TOLERANCES, ToleranceConfig

__all__ = [
    "dagger",
    "max_abs",
    "as_square_matrix",
    "commutator",
    "abs_sq",
    "HermitianMatrix",
    "Spectrum",
    "hermitian_eig",
    "matrix_function",
    "reconstruct",
]


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(np.asarray(a).T)


def max_abs(a) -> float:
    """Entrywise max norm ||A||_max = max_ij |a_ij|."""
    arr = np.asarray(a)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(arr)))


def as_square_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return a finite square complex array (d >= 1), copied."""
    arr = np.array(a, dtype=complex, copy=True)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise DimensionError(
            f"{name}: expected a square d x d array with d >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name}: non-finite entries")
    return arr


def _require_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")


def _require_finite(a: np.ndarray, context: str) -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{context}: non-finite entries in result")
    return a


def commutator(a, b) -> np.ndarray:
    """[A, B] = AB - BA."""
    a = as_square_matrix(a, "a")
    b = as_square_matrix(b, "b")
    _require_same_dim(a, b)
    return _require_finite(a @ b - b @ a, "commutator")


class HermitianMatrix:
    """Hermitian matrix, symmetrized to (M + M^dag)/2 at construction.

    The pre-symmetrization defect ||M - M^dag||_max is kept on the instance.
    Inputs whose defect exceeds the hermiticity tolerance (scaled by
    max(1, ||M||_max)) are rejected; `defect_tol` substitutes an absolute
    bound when given.
    """

    __slots__ = ("matrix", "defect")

    def __init__(self, matrix, *, tol: ToleranceConfig = DEFAULT_TOLERANCES,
                 defect_tol: float | None = None):
        m = as_square_matrix(matrix, "hermitian matrix")
        if defect_tol is None:
            defect_tol = tol.hermiticity * max(1.0, max_abs(m))
        defect = max_abs(m - dagger(m))
        if defect > defect_tol:
            raise ValidationError(
                f"hermiticity defect {defect:.3e} exceeds tolerance {defect_tol:.3e}")
        sym = 0.5 * (m + dagger(m))
        sym.flags.writeable = False
        self.matrix = sym
        self.defect = defect

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self):  # pragma: no cover
        return f"HermitianMatrix(dim={self.dim}, defect={self.defect:.2e})"


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a Hermitian matrix.

    `eigenvalues` ascend (exact ties keep the original diagonal order) and the
    columns of the unitary `eigenvectors` are the matching eigenvectors, each
    phased so its largest-magnitude component is real positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        vec = np.asarray(self.eigenvectors, dtype=complex)
        if lam.ndim != 1 or vec.shape != (lam.size, lam.size):
            raise DimensionError("spectrum shape mismatch")
        if lam.size > 1 and np.any(np.diff(lam) < 0):
            raise ValidationError("eigenvalues are not ascending")

    @property
    def dim(self) -> int:
        return self.eigenvalues.size


def reconstruct(spectrum: Spectrum) -> np.ndarray:
    """U diag(lambda) U^dag."""
    return (spectrum.eigenvectors * spectrum.eigenvalues) @ dagger(spectrum.eigenvectors)


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def hermitian_eig(m: HermitianMatrix, *, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> Spectrum:
    """Eigendecomposition by cyclic Jacobi rotations.

    Sweeps of complex plane rotations annihilate off-diagonal entries until
    the off-diagonal Frobenius norm falls below jacobi_offdiag * ||M||_F.
    Convergence is quadratic; exhausting the sweep budget raises
    ConvergenceError carrying the residual.  Output is deterministic:
    ascending eigenvalues with stable tie-breaking and phase-fixed
    eigenvectors.  Unitarity and reconstruction are verified before returning.
    """
    d = m.dim
    a = np.array(m.matrix, dtype=complex)
    v = np.eye(d, dtype=complex)
    fro = float(np.linalg.norm(m.matrix))
    target = tol.jacobi_offdiag * fro

    sweeps = 0
    off = _offdiag_norm(a)
    while off > target:
        if sweeps >= tol.jacobi_max_sweeps:
            raise ConvergenceError(
                f"Jacobi did not converge in {tol.jacobi_max_sweeps} sweeps: "
                f"off-diagonal norm {off:.3e} above target {target:.3e}",
                off_diagonal_norm=off)
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                diff = a[q, q].real - a[p, p].real
                if diff == 0.0:
                    t = 1.0
                else:
                    theta = diff / (2.0 * r)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                cp = c * np.conj(phase)
                sp = s * np.conj(phase)
                # A <- U^dag A U with the (p, q) plane rotation U
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - sp * col_q
                a[:, q] = s * col_p + cp * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - (s * phase) * row_q
                a[q, :] = s * row_p + (c * phase) * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vcol_p = v[:, p].copy()
                vcol_q = v[:, q].copy()
                v[:, p] = c * vcol_p - sp * vcol_q
                v[:, q] = s * vcol_p + cp * vcol_q
        sweeps += 1
        off = _offdiag_norm(a)

    values = np.real(np.diag(a)).astype(float)
    order = np.argsort(values, kind="stable")
    eigenvalues = values[order]
    vectors = v[:, order]

    # fix phases: largest-magnitude component real positive, lowest index wins ties
    for j in range(d):
        col = vectors[:, j]
        k = int(np.argmax(np.abs(col)))
        pivot = col[k]
        mag = abs(pivot)
        if mag > 0.0:
            vectors[:, j] = col * (np.conj(pivot) / mag)

    unitarity = max_abs(dagger(vectors) @ vectors - np.eye(d))
    if unitarity > tol.unitarity:
        raise ValidationError(f"eigenvector unitarity defect {unitarity:.3e}")
    residual = max_abs((vectors * eigenvalues) @ dagger(vectors) - m.matrix)
    if residual > tol.reconstruction * max(1.0, max_abs(m.matrix)):
        raise ValidationError(f"eigendecomposition residual {residual:.3e}")

    eigenvalues.flags.writeable = False
    vectors.flags.writeable = False
    return Spectrum(eigenvalues, vectors)


def matrix_function(m: HermitianMatrix, f: Callable[[float], float], *,
                    spectrum: Spectrum | None = None,
                    tol: ToleranceConfig = DEFAULT_TOLERANCES) -> HermitianMatrix:
    """Lift the real scalar function f to m through its eigendecomposition.

    f is evaluated on each eigenvalue; a raised ValueError / OverflowError /
    ZeroDivisionError or a non-finite result becomes DomainError reporting the
    offending eigenvalue.  Pass `spectrum` to reuse a cached decomposition.
    """
    eig = hermitian_eig(m, tol=tol) if spectrum is None else spectrum
    mapped = np.empty(eig.dim, dtype=float)
    for i, lam in enumerate(eig.eigenvalues):
        try:
            value = f(float(lam))
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise DomainError(f"f({lam!r}) undefined: {exc}", eigenvalue=float(lam)) from exc
        if not math.isfinite(value):
            raise DomainError(f"f({lam!r}) = {value!r} is not finite", eigenvalue=float(lam))
        mapped[i] = value
    out = (eig.eigenvectors * mapped) @ dagger(eig.eigenvectors)
    return HermitianMatrix(out, tol=tol)


def abs_sq(a, *, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> HermitianMatrix:
    """|A|^2 = A A^dag, verified positive semidefinite."""
    a = as_square_matrix(a, "a")
    prod = HermitianMatrix(a @ dagger(a), tol=tol)
    smallest = float(hermitian_eig(prod, tol=tol).eigenvalues[0])
    if smallest < -tol.psd * max(1.0, max_abs(prod.matrix)):
        raise ValidationError(f"|A|^2 has eigenvalue {smallest:.3e} below the PSD slack")
    return prod
