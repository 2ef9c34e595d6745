"""Dense complex linear algebra over finite-dimensional Hilbert spaces.

Validated operator/state helpers plus the eigendecomposition, tensor-product,
partial-trace and generator-exponential primitives everything else builds on.
All tolerances live in one policy record (``TOL``) so numeric contracts stay
uniform and testable across the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ValidationError(ValueError):
    """An input violates a structural invariant (dimension, Hermiticity, ...)."""


class NumericError(RuntimeError):
    """A numerical routine failed or the requested quantity is undefined."""


@dataclass(frozen=True)
class Tolerances:
    """Central numeric policy used by every structural check in the package."""

    herm: float = 1e-12           # max-abs deviation from the conjugate transpose
    psd: float = -1e-10           # smallest admissible eigenvalue of a PSD operator
    recon: float = 1e-10          # eigendecomposition reconstruction error
    trace: float = 1e-12          # deviation of a density-matrix trace from 1
    norm: float = 1e-12           # deviation of a state vector's squared norm from 1
    prob_sum: float = 1e-10       # deviation of per-setting outcome probabilities from 1
    weight_sum: float = 1e-12     # deviation of hidden-variable weights from 1
    no_signal: float = 1e-9       # max-abs deviation between setting marginals
    povm_identity: float = 1e-10  # max-abs deviation of summed POVM effects from identity
    qfi_eigen: float = 1e-12      # eigenvalue-pair cutoff in the QFI spectral sum
    prob_floor: float = 1e-14     # outcomes below this probability are dropped
    witness: float = 1e-9         # steering-detection threshold on the witness gap


TOL = Tolerances()


def as_complex_matrix(matrix, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D complex array, rejecting anything else."""
    out = np.asarray(matrix, dtype=complex)
    if out.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got shape {out.shape}")
    return out


def as_complex_vector(vector, name: str = "vector") -> np.ndarray:
    out = np.asarray(vector, dtype=complex)
    if out.ndim != 1:
        raise ValidationError(f"{name} must be 1-D, got shape {out.shape}")
    return out


def dagger(matrix: np.ndarray) -> np.ndarray:
    return matrix.conj().T


def require_hermitian(matrix, tol: float = TOL.herm, name: str = "operator") -> np.ndarray:
    """Validate Hermiticity within ``tol`` (max-abs) and return the operator."""
    out = as_complex_matrix(matrix, name)
    if out.shape[0] != out.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {out.shape}")
    dev = float(np.max(np.abs(out - dagger(out)))) if out.size else 0.0
    if dev > tol:
        raise ValidationError(f"{name} is not Hermitian: max |M - M^dag| = {dev:.3e} > {tol:.1e}")
    return out


def require_density_matrix(matrix, name: str = "density matrix") -> np.ndarray:
    """Validate a density matrix and return it symmetrized as (M + M^dag)/2.

    Rejects (rather than clips) negative eigenvalues below ``TOL.psd``;
    silent clipping would mask construction bugs upstream.
    """
    out = require_hermitian(matrix, name=name)
    out = (out + dagger(out)) / 2.0
    tr = complex(np.trace(out))
    if abs(tr - 1.0) > TOL.trace:
        raise ValidationError(f"{name} trace deviates from 1 by {abs(tr - 1.0):.3e}")
    lo = float(np.linalg.eigvalsh(out)[0])
    if lo < TOL.psd:
        raise ValidationError(f"{name} has negative eigenvalue {lo:.3e} below {TOL.psd:.1e}")
    return out


def require_state_vector(vector, name: str = "state vector") -> np.ndarray:
    """Validate unit squared norm within ``TOL.norm`` and return the vector."""
    out = as_complex_vector(vector, name)
    dev = abs(float(np.vdot(out, out).real) - 1.0)
    if dev > TOL.norm:
        raise ValidationError(f"{name} squared norm deviates from 1 by {dev:.3e}")
    return out


def require_dim(operator: np.ndarray, dim: int, name: str = "operator") -> np.ndarray:
    if operator.shape != (dim, dim):
        raise ValidationError(f"{name} has shape {operator.shape}, expected ({dim}, {dim})")
    return operator


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a Hermitian operator.

    ``eigenvalues`` ascending; ``eigenvectors`` holds the matching
    orthonormal eigenvectors as columns.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def hermitian_eig(operator, tol: float = TOL.herm) -> Spectrum:
    """Eigendecompose a Hermitian operator; eigenvalues come out ascending."""
    op = require_hermitian(operator, tol=tol)
    try:
        vals, vecs = np.linalg.eigh(op)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - hardware dependent
        raise NumericError(f"eigensolver failed to converge: {exc}") from exc
    return Spectrum(eigenvalues=vals, eigenvectors=vecs)


def tensor(*factors) -> np.ndarray:
    """Kronecker product of one or more matrices (dimensions multiply)."""
    if not factors:
        raise ValidationError("tensor() needs at least one factor")
    out = as_complex_matrix(factors[0], "tensor factor")
    for factor in factors[1:]:
        out = np.kron(out, as_complex_matrix(factor, "tensor factor"))
    return out


def partial_trace(rho, dims: tuple[int, int], keep) -> np.ndarray:
    """Trace out one subsystem of a bipartite operator.

    ``dims = (d_A, d_B)`` with the first factor as the slow index;
    ``keep`` is ``"A"``/``0`` or ``"B"``/``1``.
    """
    d_a, d_b = int(dims[0]), int(dims[1])
    mat = as_complex_matrix(rho, "rho")
    if mat.shape != (d_a * d_b, d_a * d_b):
        raise ValidationError(
            f"rho has shape {mat.shape}, expected ({d_a * d_b}, {d_a * d_b}) for dims {dims}"
        )
    four = mat.reshape(d_a, d_b, d_a, d_b)
    if keep in ("A", "a", 0):
        return np.einsum("ajbj->ab", four)
    if keep in ("B", "b", 1):
        return np.einsum("jajb->ab", four)
    raise ValidationError(f"keep must be 'A' or 'B', got {keep!r}")


def unitary_from_generator(generator, angle: float) -> np.ndarray:
    """exp(-i * angle * H) for Hermitian H, via its eigendecomposition."""
    spec = hermitian_eig(generator)
    phases = np.exp(-1j * float(angle) * spec.eigenvalues)
    v = spec.eigenvectors
    return (v * phases) @ dagger(v)


def outer(vector: np.ndarray) -> np.ndarray:
    """Rank-1 projector |v><v| of a (not necessarily normalized) vector."""
    v = as_complex_vector(vector)
    return np.outer(v, v.conj())
