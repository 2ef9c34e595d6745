"""Constructors for the states and operators used throughout the worked examples.

Collective spin operators act on the (N+1)-dimensional symmetric sector with
basis index k counting excitations, so J_z |k> = (k - N/2) |k>.  Only the
GHZ-with-white-noise construction lives in the full 2^N qubit space (the
identity admixture is not symmetric-sector), capped at 12 qubits.

Quadrature convention: x = (a + a^dag)/sqrt(2), p = i(a^dag - a)/sqrt(2),
fixed by the vacuum variance Var[x] = 1/2.  Conventions vary between texts;
everything downstream (cat-state variances, Reid bounds) assumes this one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from math import comb, lgamma

import mpmath as mp
import numpy as np

from .linalg import TOL, ValidationError, as_complex_vector, dagger

# Above this particle number the double-precision overlap sum loses digits to
# cancellation; exact-integer / high-precision paths take over.
_DOUBLE_SUM_MAX = 30
# Snapping window for half-angle trig values; shifts the effective angle by
# O(1e-14), which perturbs the rotation by ~N/2 * 1e-14, well under test tolerances.
_TRIG_SNAP = 1e-14


@dataclass(frozen=True)
class SpinOperators:
    """Collective spin components on the symmetric sector of n qubits."""

    n_particles: int
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    @property
    def dim(self) -> int:
        return self.n_particles + 1


def spin_ops(n_particles: int) -> SpinOperators:
    """Jx, Jy, Jz of dimension n+1 with Jz eigenvalue (k - n/2) at index k."""
    n = int(n_particles)
    if n < 0:
        raise ValidationError(f"n_particles must be >= 0, got {n_particles}")
    d = n + 1
    m = np.arange(d) - n / 2.0
    j = n / 2.0
    raising = np.zeros((d, d))
    for k in range(d - 1):
        raising[k + 1, k] = math.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    jx = (raising + raising.T) / 2.0
    jy = (raising - raising.T) / 2j
    jz = np.diag(m).astype(complex)
    return SpinOperators(n_particles=n, jx=jx.astype(complex), jy=jy, jz=jz)


@dataclass(frozen=True)
class BipartitePureState:
    """A pure state on H_A (x) H_B stored as a flat amplitude vector.

    Index convention: amplitude of |a>|b> sits at a * d_B + b.  The optional
    label tuples carry physical basis annotations such as (N_A, k_A) sector
    labels for number-resolved splittings.
    """

    dims: tuple[int, int]
    amplitudes: np.ndarray
    basis_labels_a: tuple | None = None
    basis_labels_b: tuple | None = None

    def __post_init__(self):
        d_a, d_b = self.dims
        vec = as_complex_vector(self.amplitudes, "amplitudes")
        if vec.shape[0] != d_a * d_b:
            raise ValidationError(
                f"amplitude length {vec.shape[0]} does not match dims {self.dims}"
            )
        dev = abs(float(np.vdot(vec, vec).real) - 1.0)
        if dev > TOL.norm:
            raise ValidationError(f"state squared norm deviates from 1 by {dev:.3e}")

    @property
    def d_a(self) -> int:
        return self.dims[0]

    @property
    def d_b(self) -> int:
        return self.dims[1]

    @property
    def matrix(self) -> np.ndarray:
        """Amplitudes as a (d_A, d_B) matrix."""
        return np.asarray(self.amplitudes, dtype=complex).reshape(self.dims)

    def reduced_b(self) -> np.ndarray:
        m = self.matrix
        return m.T @ m.conj()

    def reduced_a(self) -> np.ndarray:
        m = self.matrix
        return m @ dagger(m)


# ---------------------------------------------------------------------------
# Rotation overlaps <k| exp(-i phi Jy) |k'>
# ---------------------------------------------------------------------------

def _sum_range(n: int, k: int, kp: int) -> tuple[int, int]:
    return max(0, kp - k), min(kp, n - k)


def _overlap_double(n: int, k: int, kp: int, c: float, s: float) -> float:
    # log-factorial stabilized direct sum; adequate below _DOUBLE_SUM_MAX
    lo, hi = _sum_range(n, k, kp)
    if lo > hi:
        return 0.0
    pref = 0.5 * (lgamma(k + 1) + lgamma(n - k + 1) + lgamma(kp + 1) + lgamma(n - kp + 1))
    total = 0.0
    for t in range(lo, hi + 1):
        ec = n + kp - k - 2 * t
        es = k - kp + 2 * t
        if (c == 0.0 and ec > 0) or (s == 0.0 and es > 0):
            continue
        log_term = pref - (
            lgamma(kp - t + 1) + lgamma(t + 1) + lgamma(k - kp + t + 1) + lgamma(n - k - t + 1)
        )
        sign = -1.0 if (k - kp + t) % 2 else 1.0
        total += sign * math.exp(log_term) * c**ec * s**es
    return total


def _overlap_equal_trig(n: int, k: int, kp: int, c: float, s: float) -> float:
    # |c| == |s| = sqrt(1/2): every term carries the same trig magnitude, so the
    # alternating factorial sum can be done in exact integer arithmetic.
    lo, hi = _sum_range(n, k, kp)
    if lo > hi:
        return 0.0
    acc = 0
    for t in range(lo, hi + 1):
        term = comb(kp, t) * comb(n - kp, k - kp + t)
        acc += -term if t % 2 else term
    if acc == 0:
        return 0.0
    log_mag = (
        n * math.log(math.sqrt(0.5))
        + 0.5 * (lgamma(k + 1) + lgamma(n - k + 1) - lgamma(kp + 1) - lgamma(n - kp + 1))
        + math.log(abs(acc))
    )
    sign = -1.0 if (k - kp) % 2 else 1.0
    if acc < 0:
        sign = -sign
    ec0 = n + kp - k - 2 * lo
    es0 = k - kp + 2 * lo
    if c < 0 and ec0 % 2:
        sign = -sign
    if s < 0 and es0 % 2:
        sign = -sign
    return sign * math.exp(log_mag)


def _overlap_axis(n: int, k: int, kp: int, c: float, s: float) -> float:
    # One of cos, sin of the half angle is (snapped to) zero: a single term survives.
    lo, hi = _sum_range(n, k, kp)
    if abs(s) < abs(c):  # s == 0: phi ~ 0 or 2*pi
        if k != kp:
            return 0.0
        return float(np.sign(c)) ** n
    # c == 0: phi ~ pi; need ec = 0 -> t = (n + kp - k) / 2
    twice = n + kp - k
    if twice % 2:
        return 0.0
    t = twice // 2
    if not lo <= t <= hi:
        return 0.0
    log_mag = 0.5 * (
        lgamma(k + 1) + lgamma(n - k + 1) + lgamma(kp + 1) + lgamma(n - kp + 1)
    ) - (lgamma(kp - t + 1) + lgamma(t + 1) + lgamma(k - kp + t + 1) + lgamma(n - k - t + 1))
    sign = -1.0 if (k - kp + t) % 2 else 1.0
    if s < 0 and n % 2:  # es = n here
        sign = -sign
    return sign * math.exp(log_mag)


def _overlap_mp(n: int, k: int, kp: int, phi: float) -> float:
    # Arbitrary-precision fallback: precision adapts until the alternating sum's
    # cancellation is resolved to well below double precision.
    lo, hi = _sum_range(n, k, kp)
    if lo > hi:
        return 0.0
    dps = 30 + int(0.32 * n)
    for _ in range(6):
        with mp.workdps(dps):
            half = mp.mpf(phi) / 2
            c, s = mp.cos(half), mp.sin(half)
            pref = mp.sqrt(
                mp.factorial(k) * mp.factorial(n - k) * mp.factorial(kp) * mp.factorial(n - kp)
            )
            total = mp.mpf(0)
            biggest = mp.mpf(0)
            for t in range(lo, hi + 1):
                ec = n + kp - k - 2 * t
                es = k - kp + 2 * t
                term = (
                    (-1) ** ((k - kp + t) % 2)
                    * c**ec
                    * s**es
                    / (
                        mp.factorial(kp - t)
                        * mp.factorial(t)
                        * mp.factorial(k - kp + t)
                        * mp.factorial(n - k - t)
                    )
                )
                total += term
                biggest = max(biggest, abs(term))
            if biggest == 0:
                return 0.0
            if total == 0:
                return 0.0  # cancellation below working precision: numerically zero
            cancel_digits = float(mp.log10(biggest / abs(total)))
            if cancel_digits < dps - 20:
                return float(pref * total)
        dps = int(cancel_digits) + 30
    raise ValidationError(f"rotation overlap did not stabilize at n={n}")  # pragma: no cover


def wigner_overlap(n_particles: int, k: int, k_prime: int, phi: float) -> float:
    """Matrix element <k| exp(-i phi Jy) |k'> on the n-particle symmetric sector.

    Evaluated by the finite factorial sum.  Log-gamma stabilization covers
    small n; for large n the sum alternates with catastrophic cancellation in
    doubles, so quarter-turn angles switch to exact integer arithmetic and
    all other angles to adaptive-precision arithmetic.
    """
    n = int(n_particles)
    k = int(k)
    kp = int(k_prime)
    if n < 0:
        raise ValidationError(f"n_particles must be >= 0, got {n_particles}")
    if not (0 <= k <= n and 0 <= kp <= n):
        raise ValidationError(f"indices k={k}, k'={kp} out of range for n={n}")
    c = math.cos(phi / 2.0)
    s = math.sin(phi / 2.0)
    if min(abs(c), abs(s)) < _TRIG_SNAP:
        return _overlap_axis(n, k, kp, c, s)
    if abs(abs(c) - abs(s)) < _TRIG_SNAP:
        root = math.sqrt(0.5)
        return _overlap_equal_trig(n, k, kp, math.copysign(root, c), math.copysign(root, s))
    if n <= _DOUBLE_SUM_MAX:
        return _overlap_double(n, k, kp, c, s)
    return _overlap_mp(n, k, kp, phi)


@lru_cache(maxsize=256)
def wigner_rotation_matrix(n_particles: int, phi: float) -> np.ndarray:
    """Full real orthogonal matrix W[k, k'] = <k| exp(-i phi Jy) |k'>.

    Cached: the split-Dicke experiments reuse the same quarter-turn rotation
    across many parameter values.  Uses W[k', k] = (-1)^(k-k') W[k, k'].
    """
    n = int(n_particles)
    d = n + 1
    out = np.zeros((d, d))
    for k in range(d):
        for kp in range(k, d):
            val = wigner_overlap(n, k, kp, phi)
            out[k, kp] = val
            if kp != k:
                out[kp, k] = val if (k - kp) % 2 == 0 else -val
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# GHZ states
# ---------------------------------------------------------------------------

def ghz_vector(n_qubits: int, phi: float) -> np.ndarray:
    """(|0...0> + e^{i phi} |1...1>)/sqrt(2) on the full 2^n space."""
    if n_qubits < 1:
        raise ValidationError(f"need at least one qubit, got {n_qubits}")
    vec = np.zeros(2**n_qubits, dtype=complex)
    vec[0] = 1.0 / math.sqrt(2.0)
    vec[-1] = np.exp(1j * phi) / math.sqrt(2.0)
    return vec


def ghz_state(n_total: int, phi: float = 0.0) -> BipartitePureState:
    """GHZ state of n_total qubits split as 1 (Alice) vs n_total - 1 (Bob)."""
    n = int(n_total)
    if n < 2:
        raise ValidationError(f"GHZ split needs n_total >= 2, got {n_total}")
    return BipartitePureState(dims=(2, 2 ** (n - 1)), amplitudes=ghz_vector(n, phi))


def collective_jz(n_qubits: int) -> np.ndarray:
    """J_z = (1/2) sum_i sigma_z^(i) on the full 2^n space, diagonal."""
    diag = [(n_qubits - 2 * bin(i).count("1")) / 2.0 for i in range(2**n_qubits)]
    return np.diag(np.asarray(diag, dtype=complex))


def ghz_white_noise(n_total: int, phi: float, p: float, max_qubits: int = 12) -> np.ndarray:
    """p |GHZ><GHZ| + (1-p) I/2^n as a dense density matrix."""
    n = int(n_total)
    if n < 2:
        raise ValidationError(f"GHZ needs n_total >= 2, got {n_total}")
    if n > max_qubits:
        raise ValidationError(f"dense GHZ mixture capped at {max_qubits} qubits, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p must be a probability, got {p}")
    vec = ghz_vector(n, phi)
    dim = 2**n
    return p * np.outer(vec, vec.conj()) + (1.0 - p) * np.eye(dim) / dim


# ---------------------------------------------------------------------------
# Split Dicke states
# ---------------------------------------------------------------------------

def dicke_bounds(k: int, n_a: int, n_b: int) -> tuple[int, int]:
    """Admissible range of Alice-side excitations for k total over (n_a, n_b)."""
    return max(0, k - n_b), min(k, n_a)


def split_dicke_fixed(k: int, n_a: int, n_b: int) -> BipartitePureState:
    """Dicke state of k excitations deterministically split over n_a : n_b atoms."""
    k, n_a, n_b = int(k), int(n_a), int(n_b)
    if n_a < 0 or n_b < 0 or n_a + n_b < 1:
        raise ValidationError(f"invalid particle numbers ({n_a}, {n_b})")
    if not 0 <= k <= n_a + n_b:
        raise ValidationError(f"k={k} out of range for {n_a + n_b} particles")
    lo, hi = dicke_bounds(k, n_a, n_b)
    amp = 1.0 / math.sqrt(hi - lo + 1)
    d_a, d_b = n_a + 1, n_b + 1
    vec = np.zeros(d_a * d_b, dtype=complex)
    for k_a in range(lo, hi + 1):
        vec[k_a * d_b + (k - k_a)] = amp
    return BipartitePureState(
        dims=(d_a, d_b),
        amplitudes=vec,
        basis_labels_a=tuple((n_a, j) for j in range(d_a)),
        basis_labels_b=tuple((n_b, j) for j in range(d_b)),
    )


def _log_binom(n: int, k: int) -> float:
    return lgamma(n + 1) - lgamma(k + 1) - lgamma(n - k + 1)


def partition_labels(n: int) -> tuple[tuple, ...]:
    """All (particle number, excitation) sector labels for one side of a split.

    Enumerates every (N_X, k_X) with 0 <= k_X <= N_X <= n; measurement bases
    that rotate within a particle-number sector are complete on this space.
    """
    return tuple((n_x, k_x) for n_x in range(n + 1) for k_x in range(n_x + 1))


def split_dicke_beamsplitter(k: int, n: int, p: float) -> BipartitePureState:
    """Dicke state with k excitations sent through a p : 1-p beam splitter.

    Both sides carry the full (particle number, excitations) sector basis;
    the amplitude on |N_A, k_A> (x) |n - N_A, k - k_A> is
    sqrt(C(k, k_A) C(n-k, N_A-k_A)) p^{N_A/2} (1-p)^{(n-N_A)/2}, with the
    binomials through log-gamma so n = 200 stays finite.
    """
    k, n = int(k), int(n)
    if n < 1 or not 0 <= k <= n:
        raise ValidationError(f"invalid Dicke parameters k={k}, n={n}")
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"splitting ratio must be in [0, 1], got {p}")
    labels = partition_labels(n)
    index = {lab: i for i, lab in enumerate(labels)}
    d = len(labels)
    mat = np.zeros((d, d), dtype=complex)
    for k_a in range(0, k + 1):
        for n_a in range(k_a, n - k + k_a + 1):
            if (p == 0.0 and n_a > 0) or (p == 1.0 and n_a < n):
                continue
            log_w = _log_binom(k, k_a) + _log_binom(n - k, n_a - k_a)
            if 0.0 < p < 1.0:
                log_w += n_a * math.log(p) + (n - n_a) * math.log1p(-p)
            mat[index[(n_a, k_a)], index[(n - n_a, k - k_a)]] = math.exp(0.5 * log_w)
    vec = mat.reshape(-1)
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > 1e-10:
        raise ValidationError(f"beam-splitter amplitudes normalize to {norm}, not 1")
    vec = vec / norm
    return BipartitePureState(
        dims=(d, d), amplitudes=vec, basis_labels_a=labels, basis_labels_b=labels
    )


# ---------------------------------------------------------------------------
# Truncated Fock space and hybrid cat states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FockSpace:
    """Truncated bosonic mode: indices 0 .. cutoff-1."""

    cutoff: int
    a_dagger: np.ndarray
    x: np.ndarray
    p: np.ndarray


def fock_space(cutoff: int) -> FockSpace:
    n = int(cutoff)
    if n < 2:
        raise ValidationError(f"Fock cutoff must be >= 2, got {cutoff}")
    a_dag = np.diag(np.sqrt(np.arange(1, n)), -1).astype(complex)
    a = a_dag.conj().T
    x = (a + a_dag) / math.sqrt(2.0)
    p = 1j * (a_dag - a) / math.sqrt(2.0)
    return FockSpace(cutoff=n, a_dagger=a_dag, x=x, p=p)


def default_fock_cutoff(alpha: float, tail: float = 1e-12, floor: int = 20) -> int:
    """Smallest cutoff whose truncated coherent tail mass stays below ``tail``."""
    lam = float(alpha) ** 2
    if lam == 0.0:
        return floor
    log_pmf = -lam  # Poisson pmf at 0, in logs
    cdf = math.exp(log_pmf)
    n = 1
    while 1.0 - cdf > tail:
        log_pmf += math.log(lam) - math.log(n)
        cdf += math.exp(log_pmf)
        n += 1
        if n > 100000:  # pragma: no cover - tail always closes long before this
            raise ValidationError("coherent tail mass failed to drop below threshold")
    return max(n, floor)


def coherent_amplitudes(alpha: float, cutoff: int) -> np.ndarray:
    """Truncated, renormalized coherent-state amplitudes for real alpha."""
    n = np.arange(int(cutoff))
    if alpha == 0.0:
        vec = np.zeros(int(cutoff), dtype=complex)
        vec[0] = 1.0
        return vec
    signs = np.sign(alpha) ** n
    log_mag = n * math.log(abs(alpha)) - 0.5 * np.array([lgamma(j + 1) for j in n])
    vec = signs * np.exp(log_mag - abs(alpha) ** 2 / 2.0)
    return (vec / np.linalg.norm(vec)).astype(complex)


def hybrid_cat(alpha: float, cutoff: int | None = None) -> BipartitePureState:
    """(|0>|alpha> + |1>|-alpha>)/sqrt(2) on qubit (x) truncated Fock space."""
    a = float(alpha)
    if a < 0:
        raise ValidationError(f"alpha must be >= 0, got {alpha}")
    if cutoff is None:
        cutoff = default_fock_cutoff(a)
    cutoff = int(cutoff)
    lam = a * a
    if lam > 0:
        # Poisson tail above the cutoff must be negligible or moments are off.
        log_tail_term = cutoff * math.log(lam) - lgamma(cutoff + 1) - lam
        if log_tail_term > math.log(1e-10):
            raise ValidationError(
                f"cutoff {cutoff} too small for alpha={a}: use default_fock_cutoff"
            )
    plus = coherent_amplitudes(a, cutoff)
    minus = coherent_amplitudes(-a, cutoff)
    joint = np.concatenate([plus, minus]) / math.sqrt(2.0)
    joint /= np.linalg.norm(joint)
    return BipartitePureState(dims=(2, cutoff), amplitudes=joint)
