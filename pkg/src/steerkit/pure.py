"""Pure-bipartite-state machinery: Schmidt decomposition, optimal steering
measurements, SU(d) generator bases, and the pure-state steering quantifiers.

The optimal-measurement constructions operate on the support of Bob's reduced
state; kernel directions of a rank-deficient reduced state are appended as
extra projective outcomes that occur with probability zero, keeping the POVM
complete.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .assemblage import Assemblage, assemblage_from_pure_state, conditional_qfi, conditional_variance
from .linalg import NumericError, ValidationError, dagger, require_hermitian
from .metrology import POVM, make_povm, qfi, variance
from .states import BipartitePureState

_SUPPORT_CUT = 1e-12


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Schmidt data: coefficients are the eigenvalues of Bob's reduced state.

    ``coefficients`` descending and summing to one; columns of ``basis_a`` /
    ``basis_b`` are the matched local Schmidt vectors.  Phases are absorbed
    into ``basis_a`` so that each Bob vector has its largest-magnitude entry
    real positive, making conjugation in the Schmidt basis well defined.
    """

    coefficients: np.ndarray
    basis_a: np.ndarray
    basis_b: np.ndarray

    @property
    def rank(self) -> int:
        return int(np.sum(self.coefficients > _SUPPORT_CUT))


def schmidt(state: BipartitePureState) -> SchmidtDecomposition:
    """Schmidt decomposition via SVD of the (d_A, d_B) amplitude matrix."""
    u, s, vh = np.linalg.svd(state.matrix, full_matrices=False)
    basis_b = vh.T.copy()  # column i holds amplitudes of Bob's i-th Schmidt ket
    basis_a = u.copy()
    for i in range(s.size):
        col = basis_b[:, i]
        pivot = int(np.argmax(np.abs(col)))
        mag = abs(col[pivot])
        if mag > 0:
            phase = col[pivot] / mag
            basis_b[:, i] = col / phase
            basis_a[:, i] = basis_a[:, i] * phase
    return SchmidtDecomposition(coefficients=s**2, basis_a=basis_a, basis_b=basis_b)


def _completion(columns: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal completion of the given orthonormal columns to C^dim."""
    r = columns.shape[1]
    if r == dim:
        return np.zeros((dim, 0), dtype=complex)
    null = scipy.linalg.null_space(dagger(columns))
    if null.shape[1] != dim - r:
        raise NumericError("failed to complete the measurement basis")  # pragma: no cover
    return null


def _steering_basis(sd: SchmidtDecomposition, bob_vectors: np.ndarray, d_a: int) -> np.ndarray:
    """Alice basis steering into the given Bob-side support vectors.

    ``bob_vectors`` holds coordinates in the Schmidt basis (support only) as
    columns; Alice's vector is the Schmidt-basis complex conjugate.
    """
    r = bob_vectors.shape[1]
    a_support = sd.basis_a[:, :r]
    alice = a_support @ bob_vectors.conj()
    rest = _completion(alice, d_a)
    return np.concatenate([alice, rest], axis=1)


def optimal_povm_qfi(state: BipartitePureState, h) -> POVM:
    """Alice's projective measurement achieving the conditional QFI on a pure state.

    Eigenvectors of X = sqrt(rho_B) H sqrt(rho_B) - <H> rho_B on the support
    are Fourier-combined so every steered conditional state has <H> equal to
    the reduced-state mean; the steered ensemble then attains the average QFI
    4 Var[rho_B, H] (the concave roof of the variance).
    """
    op = require_hermitian(h, name="H")
    if op.shape[0] != state.d_b:
        raise ValidationError(f"H acts on dimension {op.shape[0]}, Bob has {state.d_b}")
    sd = schmidt(state)
    r = sd.rank
    p = sd.coefficients[:r]
    b_support = sd.basis_b[:, :r]
    h_tilde = dagger(b_support) @ op @ b_support
    root = np.sqrt(p)
    x_op = (root[:, None] * h_tilde * root[None, :]) - float(np.dot(p, h_tilde.diagonal().real)) * np.diag(p)
    _, x_vecs = np.linalg.eigh((x_op + dagger(x_op)) / 2.0)
    k = np.arange(r)
    fourier = np.exp(2j * np.pi * np.outer(k, k) / r) / math.sqrt(r)
    combined = x_vecs @ fourier
    basis = _steering_basis(sd, combined, state.d_a)
    return make_povm(
        [np.outer(basis[:, i], basis[:, i].conj()) for i in range(state.d_a)],
        labels=[str(i) for i in range(state.d_a)],
        vectors=[basis[:, i] for i in range(state.d_a)],
    )


def optimal_povm_var(state: BipartitePureState, h) -> POVM:
    """Alice's projective measurement achieving the conditional variance.

    Eigenvectors of Y_ij = 2 sqrt(p_i p_j)/(p_i + p_j) H_ij in the reduced
    eigenbasis steer Bob into the convex-roof ensemble, whose average
    variance equals F_Q[rho_B, H] / 4.
    """
    op = require_hermitian(h, name="H")
    if op.shape[0] != state.d_b:
        raise ValidationError(f"H acts on dimension {op.shape[0]}, Bob has {state.d_b}")
    sd = schmidt(state)
    r = sd.rank
    p = sd.coefficients[:r]
    b_support = sd.basis_b[:, :r]
    h_tilde = dagger(b_support) @ op @ b_support
    pair = p[:, None] + p[None, :]
    weights = 2.0 * np.sqrt(np.outer(p, p)) / pair
    y_op = weights * h_tilde
    _, y_vecs = np.linalg.eigh((y_op + dagger(y_op)) / 2.0)
    basis = _steering_basis(sd, y_vecs, state.d_a)
    return make_povm(
        [np.outer(basis[:, i], basis[:, i].conj()) for i in range(state.d_a)],
        labels=[str(i) for i in range(state.d_a)],
        vectors=[basis[:, i] for i in range(state.d_a)],
    )


def optimal_assemblage(state: BipartitePureState, h) -> Assemblage:
    """Assemblage holding both optimal settings for the given generator."""
    return assemblage_from_pure_state(
        state,
        [("qfi-opt", optimal_povm_qfi(state, h)), ("var-opt", optimal_povm_var(state, h))],
    )


@dataclass(frozen=True)
class GeneratorBasis:
    """Hilbert-Schmidt orthonormal traceless Hermitian generators of SU(d)."""

    dim: int
    generators: tuple[np.ndarray, ...]

    def combine(self, coeffs: np.ndarray) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for c, g in zip(coeffs, self.generators):
            out += c * g
        return out


def gellmann_basis(d: int) -> GeneratorBasis:
    """Generalized Gell-Mann construction normalized to tr[H_i H_j] = delta_ij."""
    d = int(d)
    if d < 2:
        raise ValidationError(f"generator basis needs d >= 2, got {d}")
    gens: list[np.ndarray] = []
    for i in range(d):
        for j in range(i + 1, d):
            sym = np.zeros((d, d), dtype=complex)
            sym[i, j] = sym[j, i] = 1.0 / math.sqrt(2.0)
            gens.append(sym)
            antisym = np.zeros((d, d), dtype=complex)
            antisym[i, j] = -1j / math.sqrt(2.0)
            antisym[j, i] = 1j / math.sqrt(2.0)
            gens.append(antisym)
    for level in range(1, d):
        diag = np.zeros(d)
        diag[:level] = 1.0
        diag[level] = -level
        gens.append(np.diag(diag / math.sqrt(level * (level + 1))).astype(complex))
    return GeneratorBasis(dim=d, generators=tuple(gens))


def _check_distribution(p) -> np.ndarray:
    vec = np.asarray(p, dtype=float)
    if vec.ndim != 1 or vec.size == 0:
        raise ValidationError("need a nonempty probability vector")
    if float(vec.min()) < -1e-12 or abs(float(vec.sum()) - 1.0) > 1e-9:
        raise ValidationError(f"not a probability vector: min {vec.min()}, sum {vec.sum()}")
    return np.clip(vec, 0.0, None)


def s_max_pure(p) -> float:
    """Maximal witness violation of a pure state with Schmidt spectrum p.

    Equals the largest eigenvalue of diag(p) - p p^T.
    """
    vec = _check_distribution(p)
    m = np.diag(vec) - np.outer(vec, vec)
    return max(float(np.linalg.eigvalsh(m)[-1]), 0.0)


def s_avg_pure(p) -> float:
    """Sphere-averaged witness violation of a pure state with Schmidt spectrum p.

    sum_{i != j} p_i p_j (1 + 2/(p_i + p_j)), with 0/0 read as 0.
    """
    vec = _check_distribution(p)
    total = 0.0
    for i in range(vec.size):
        for j in range(vec.size):
            if i == j:
                continue
            pair = vec[i] + vec[j]
            if pair <= 0.0:
                continue
            total += vec[i] * vec[j] * (1.0 + 2.0 / pair)
    return total


def assemblage_delta(assemblage: Assemblage, h) -> float:
    """Witness gap Delta = cond_qfi/4 - cond_var for one generator."""
    cq, _ = conditional_qfi(assemblage, h)
    cv, _ = conditional_variance(assemblage, h)
    return cq / 4.0 - cv


def s_max_lower_bound(
    assemblage: Assemblage,
    n_samples: int = 2048,
    n_sweeps: int = 200,
    tol: float = 1e-8,
    seed: int = 0,
) -> float:
    """Sampled-and-refined lower bound on the maximal witness violation.

    Samples unit-norm traceless generators (standard-normal coefficients on a
    Gell-Mann basis, normalized), keeps the best, then runs a gradient-free
    coordinate search over the generator coefficients.  The result is a lower
    bound only; the exact optimum is known in closed form just for pure states.
    """
    basis = gellmann_basis(assemblage.d_b)
    n_gen = len(basis.generators)
    rng = np.random.default_rng(seed)

    def objective(coeffs: np.ndarray) -> float:
        return assemblage_delta(assemblage, basis.combine(coeffs))

    best_val = -np.inf
    best = None
    for _ in range(int(n_samples)):
        v = rng.standard_normal(n_gen)
        v /= np.linalg.norm(v)
        val = objective(v)
        if val > best_val:
            best_val, best = val, v
    for _ in range(int(n_sweeps)):
        improved = 0.0
        for axis in range(n_gen):
            direction = np.zeros(n_gen)
            direction[axis] = 1.0
            overlap = best[axis]
            tangent = direction - overlap * best
            norm = np.linalg.norm(tangent)
            if norm < 1e-12:
                continue
            tangent /= norm
            angles = np.linspace(-np.pi / 2, np.pi / 2, 17)[1:-1]
            for _ in range(12):  # bisection-style shrink around the best angle
                cands = []
                for a in angles:
                    cand = math.cos(a) * best + math.sin(a) * tangent
                    cands.append(cand / np.linalg.norm(cand))
                vals = [objective(cand) for cand in cands]
                top = int(np.argmax(vals))
                if vals[top] > best_val:
                    improved += vals[top] - best_val
                    best_val = vals[top]
                    best = cands[top]
                span = angles[-1] - angles[0]
                angles = np.linspace(-span / 8, span / 8, 9)
                if span < 1e-10:
                    break
        if improved < tol:
            break
    return max(best_val, 0.0)


def multi_generator_sum(assemblage: Assemblage, basis: GeneratorBasis) -> tuple[float, float]:
    """Summed conditional QFI over a generator basis and its LHS bound 4(d-1)."""
    if basis.dim != assemblage.d_b:
        raise ValidationError(f"basis dimension {basis.dim} != Bob dimension {assemblage.d_b}")
    value = 0.0
    for gen in basis.generators:
        cq, _ = conditional_qfi(assemblage, gen)
        value += cq
    return value, 4.0 * (basis.dim - 1)


def pure_multi_generator_value(p) -> float:
    """Closed-form basis-summed conditional QFI of a pure state: 4(d-1) + 4 sum_{i!=j} p_i p_j."""
    vec = _check_distribution(p)
    cross = float(np.sum(np.outer(vec, vec)) - np.sum(vec**2))
    return 4.0 * (vec.size - 1) + 4.0 * cross


def qubit_direction_gap(state: BipartitePureState, direction) -> float:
    """cond_qfi - 4 cond_var for H = n . sigma with both optimal settings."""
    if state.d_b != 2:
        raise ValidationError("the qubit gap identity needs d_B = 2")
    n = np.asarray(direction, dtype=float)
    if n.shape != (3,):
        raise ValidationError("direction must be a 3-vector")
    n = n / np.linalg.norm(n)
    paulis = [g * math.sqrt(2.0) for g in gellmann_basis(2).generators]
    h = sum(ni * gi for ni, gi in zip(n, paulis))
    asm = optimal_assemblage(state, h)
    cq, _ = conditional_qfi(asm, h)
    cv, _ = conditional_variance(asm, h)
    return cq - 4.0 * cv


def qubit_gap_identity(state: BipartitePureState, directions=None) -> tuple[float, float]:
    """Direction-independent gap identity for qubit Bob.

    Returns (lhs, rhs) with lhs the generator-direction average of
    cond_qfi - 4 cond_var over the supplied (or a default) direction grid and
    rhs = 8 (1 - tr[(rho_B)^2]).  Direction dependence beyond 1e-8 raises.
    """
    if directions is None:
        golden = np.pi * (3.0 - math.sqrt(5.0))
        directions = []
        for i in range(10):
            z = 1.0 - 2.0 * (i + 0.5) / 10.0
            r = math.sqrt(max(1.0 - z * z, 0.0))
            directions.append((r * math.cos(golden * i), r * math.sin(golden * i), z))
    gaps = np.asarray([qubit_direction_gap(state, n) for n in directions])
    if gaps.size > 1 and float(gaps.max() - gaps.min()) > 1e-8:
        raise NumericError(f"gap varies with direction by {gaps.max() - gaps.min():.3e}")
    reduced = state.reduced_b()
    purity = float(np.trace(reduced @ reduced).real)
    return float(gaps.mean()), 8.0 * (1.0 - purity)


def ancilla_invariance_check(state: BipartitePureState, ancilla_dim: int, tol: float = 1e-10) -> bool:
    """True iff s_max/s_avg are unchanged by appending a pure ancilla to Bob."""
    anc = int(ancilla_dim)
    if anc < 1:
        raise ValidationError(f"ancilla dimension must be >= 1, got {ancilla_dim}")
    base = schmidt(state).coefficients
    mat = state.matrix
    padded_mat = np.zeros((state.d_a, state.d_b * anc), dtype=complex)
    padded_mat[:, : state.d_b * anc : anc] = mat  # |b>|0>_anc occupies every anc-th column
    padded = BipartitePureState(dims=(state.d_a, state.d_b * anc), amplitudes=padded_mat.reshape(-1))
    grown = schmidt(padded).coefficients
    ok = abs(s_max_pure(base) - s_max_pure(grown)) <= tol
    ok &= abs(s_avg_pure(base) - s_avg_pure(grown)) <= tol
    return bool(ok)
