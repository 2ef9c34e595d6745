"""Worked-example evaluations shared by the CLI and the acceptance tests.

Each ``*_rows`` function returns (header, rows) where every row pairs computed
quantities with the analytic reference value when one exists (empty cell
otherwise).  Parameter grids are evaluated in parallel (capped by the
STEERKIT_THREADS environment variable) and emitted in grid order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .assemblage import (
    Assemblage,
    assemblage_from_pure_state,
    assemblage_from_state,
    conditional_qfi,
    conditional_variance,
    steering_witness,
)
from .linalg import TOL, ValidationError
from .metrology import POVM, povm_from_basis, qfi, variance
from .pure import gellmann_basis, multi_generator_sum, optimal_povm_qfi, s_avg_pure, s_max_pure
from .sampling import epr_product_check
from .states import (
    BipartitePureState,
    dicke_bounds,
    fock_space,
    ghz_state,
    ghz_white_noise,
    hybrid_cat,
    collective_jz,
    spin_ops,
    split_dicke_fixed,
    wigner_rotation_matrix,
)


def thread_count() -> int:
    raw = os.environ.get("STEERKIT_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        n = min(os.cpu_count() or 1, 8)
    return n


def parallel_map(fn, items):
    """Order-preserving map over grid points, capped by STEERKIT_THREADS."""
    items = list(items)
    workers = thread_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Measurement settings for the worked examples
# ---------------------------------------------------------------------------

def qubit_basis_povm(axis: str) -> POVM:
    """Projective qubit measurement along z, x or y."""
    if axis == "z":
        basis = np.eye(2, dtype=complex)
    elif axis == "x":
        basis = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
    elif axis == "y":
        basis = np.array([[1, 1], [1j, -1j]], dtype=complex) / math.sqrt(2.0)
    else:
        raise ValidationError(f"unknown qubit axis {axis!r}")
    return povm_from_basis(basis, labels=[f"{axis}+", f"{axis}-"])


def ghz_assemblage(n_bob: int, phi: float = 0.0) -> Assemblage:
    """GHZ state of n_bob + 1 qubits with Alice measuring sigma_z or sigma_x."""
    state = ghz_state(n_bob + 1, phi)
    return assemblage_from_pure_state(
        state, [("sz", qubit_basis_povm("z")), ("sx", qubit_basis_povm("x"))]
    )


def ghz_noise_assemblage(n_bob: int, phi: float, p: float) -> Assemblage:
    rho = ghz_white_noise(n_bob + 1, phi, p)
    return assemblage_from_state(rho, (2, 2**n_bob), [qubit_basis_povm("z"), qubit_basis_povm("x")])


def spin_z_setting(n_particles: int) -> POVM:
    return povm_from_basis(
        np.eye(n_particles + 1, dtype=complex),
        labels=[f"k={j}" for j in range(n_particles + 1)],
    )


def spin_x_setting(n_particles: int) -> POVM:
    """Projectors onto |k>_x = exp(-i pi/2 Jy) |k>."""
    basis = np.asarray(wigner_rotation_matrix(n_particles, math.pi / 2.0), dtype=complex)
    return povm_from_basis(basis, labels=[f"k={j}" for j in range(n_particles + 1)])


def split_dicke_assemblage(k: int, n_a: int, n_b: int) -> Assemblage:
    state = split_dicke_fixed(k, n_a, n_b)
    return assemblage_from_pure_state(
        state, [("Jz", spin_z_setting(n_a)), ("Jx", spin_x_setting(n_a))]
    )


def cat_assemblage(alpha: float, cutoff: int | None = None) -> Assemblage:
    state = hybrid_cat(alpha, cutoff)
    return assemblage_from_pure_state(
        state,
        [("z", qubit_basis_povm("z")), ("x", qubit_basis_povm("x")), ("y", qubit_basis_povm("y"))],
    )


def bell_assemblage(phi: float = 0.0) -> Assemblage:
    return ghz_assemblage(1, phi)


def maximally_entangled_assemblage(d: int) -> tuple[Assemblage, BipartitePureState]:
    """|Phi_d> with one optimal setting per SU(d) generator."""
    amps = np.zeros(d * d, dtype=complex)
    for i in range(d):
        amps[i * d + i] = 1.0 / math.sqrt(d)
    state = BipartitePureState(dims=(d, d), amplitudes=amps)
    basis = gellmann_basis(d)
    settings = [(f"gen{i}", optimal_povm_qfi(state, g)) for i, g in enumerate(basis.generators)]
    return assemblage_from_pure_state(state, settings), state


# ---------------------------------------------------------------------------
# GHZ tables
# ---------------------------------------------------------------------------

def ghz_rows(n_values, phi: float = 0.0):
    header = ["n_bob", "cond_qfi", "cond_qfi_ref", "cond_var", "cond_var_ref", "delta", "steering"]

    def one(n_bob: int):
        asm = ghz_assemblage(n_bob, phi)
        jz = collective_jz(n_bob)
        report = steering_witness(asm, jz)
        return [n_bob, report.cond_qfi, float(n_bob**2), report.cond_var, 0.0, report.delta, int(report.steering)]

    return header, parallel_map(one, [int(n) for n in n_values])


def ghz_noise_closed_forms(n_bob: int, p: float) -> tuple[float, float]:
    """(conditional QFI, conditional variance) of the noisy GHZ settings."""
    d = 2.0**n_bob
    f = p * p * n_bob * n_bob / (p + 2.0 * (1.0 - p) / d)
    v = (1.0 - p) * n_bob / 4.0 + p * (1.0 - p) * n_bob * n_bob / 4.0
    return f, v


def ghz_noise_rows(n_values, p_values, phi: float = 0.0):
    header = [
        "n_bob",
        "p",
        "cond_qfi",
        "cond_qfi_ref",
        "cond_var",
        "cond_var_ref",
        "delta",
        "steering",
        "steering_asymptotic",
    ]
    grid = [(int(n), float(p)) for n in n_values for p in p_values]

    def one(point):
        n_bob, p = point
        asm = ghz_noise_assemblage(n_bob, phi, p)
        jz = collective_jz(n_bob)
        report = steering_witness(asm, jz)
        f_ref, v_ref = ghz_noise_closed_forms(n_bob, p)
        asymptotic = int(n_bob > (1.0 - p) / (p * p)) if p > 0 else 0
        return [n_bob, p, report.cond_qfi, f_ref, report.cond_var, v_ref, report.delta, int(report.steering), asymptotic]

    return header, parallel_map(one, grid)


# ---------------------------------------------------------------------------
# Split Dicke, fixed partition
# ---------------------------------------------------------------------------

def split_dicke_rows(n: int, k: int):
    """Per-outcome sensitivity table for the deterministically split Dicke state."""
    n, k = int(n), int(k)
    if n % 2:
        raise ValidationError("the split-Dicke table assumes an even split; n must be even")
    n_a = n_b = n // 2
    asm = split_dicke_assemblage(k, n_a, n_b)
    jz_b = spin_ops(n_b).jz
    twin = k * 2 == n
    rec = asm.setting("Jx")
    header = ["kind", "k_a", "p", "p_ref", "fq_cond", "fq_cond_ref"]
    rows = []
    for label, p, st in zip(rec.source_povm.labels, rec.probabilities, rec.states):
        k_a = int(label.split("=")[1])
        fq = qfi(st, jz_b)
        p_ref = 2.0 / (n + 2.0) if twin else ""
        fq_ref = (2.0 * k_a * (n - 2.0 * k_a) + n) / 2.0 if twin else ""
        rows.append(["outcome", k_a, float(p), p_ref, fq, fq_ref])
    report = steering_witness(asm, jz_b)
    lo, hi = dicke_bounds(k, n_a, n_b)
    var_ref = (hi - lo + 2) * (hi - lo) / 12.0
    summary_ref = n * (n + 4.0) / 12.0 if twin else ""
    rows.append(["summary:cond_qfi", "", "", "", report.cond_qfi, summary_ref])
    rows.append(["summary:cond_var", "", "", "", report.cond_var, 0.0])
    rows.append(["summary:var_reduced", "", "", "", report.var_reduced, var_ref])
    rows.append(["summary:qfi_reduced", "", "", "", report.qfi_reduced, 0.0])
    return header, rows


# ---------------------------------------------------------------------------
# Split Dicke through a beam splitter (block evaluation over number sectors)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PartitionQuantities:
    """Witness quantities of a beam-splitter split Dicke state."""

    n: int
    k: int
    p: float
    cond_var: float
    cond_qfi: float
    var_reduced: float
    var_reduced_ref: float
    qfi_reduced: float
    mean_jz: float
    mean_jz_ref: float


def _partition_sector_amplitudes(n: int, k: int, p: float, n_a: int) -> np.ndarray:
    """Real amplitudes over k_A = 0..n_a (zero outside the admissible window)."""
    amps = np.zeros(n_a + 1)
    lo, hi = dicke_bounds(k, n_a, n - n_a)
    if lo > hi:
        return amps
    if (p == 0.0 and n_a > 0) or (p == 1.0 and n_a < n):
        return amps
    for k_a in range(lo, hi + 1):
        log_w = (
            math.lgamma(k + 1) - math.lgamma(k_a + 1) - math.lgamma(k - k_a + 1)
            + math.lgamma(n - k + 1) - math.lgamma(n_a - k_a + 1) - math.lgamma(n - k - n_a + k_a + 1)
        )
        if 0.0 < p < 1.0:
            log_w += n_a * math.log(p) + (n - n_a) * math.log1p(-p)
        amps[k_a] = math.exp(0.5 * log_w)
    return amps


def split_dicke_partition_quantities(n: int, k: int, p: float) -> PartitionQuantities:
    """Sector-blocked evaluation of the partition-noise split Dicke example.

    Alice reads out (J_z or J_x) together with her particle number N_A;
    conditional states live in single (N_B = n - N_A) spin sectors, so the
    witness quantities decompose over sectors and n = 100 stays cheap.
    """
    n, k = int(n), int(k)
    if n < 1 or not 0 <= k <= n:
        raise ValidationError(f"invalid Dicke parameters k={k}, n={n}")
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"splitting ratio must be in [0, 1], got {p}")
    var_z = 0.0
    cond_qfi_x = 0.0
    m1_red = m2_red = 0.0
    qfi_red = 0.0
    total_weight = 0.0
    for n_a in range(0, n + 1):
        amps = _partition_sector_amplitudes(n, k, p, n_a)
        weights = amps**2
        sector_weight = float(weights.sum())
        if sector_weight < TOL.prob_floor:
            continue
        total_weight += sector_weight
        n_b = n - n_a
        k_a_vals = np.arange(n_a + 1)
        jz_vals = (k - k_a_vals) - n_b / 2.0  # J_z^B eigenvalue of |k - k_A>_{N_B}

        # J_z^A readout: conditional states are J_z^B eigenstates.
        var_z += float(np.dot(weights, jz_vals**2 - jz_vals * jz_vals))
        m1_red += float(np.dot(weights, jz_vals))
        m2_red += float(np.dot(weights, jz_vals**2))

        # Reduced state restricted to this sector is diagonal; its QFI block
        # enters with the sector weight.
        occupied = weights > 0.0
        if int(occupied.sum()) > 0:
            block = np.diag(weights[occupied] / sector_weight).astype(complex)
            h_block = np.diag(jz_vals[occupied]).astype(complex)
            qfi_red += sector_weight * qfi(block, h_block)

        # J_x^A readout: rotate the sector amplitudes with the quarter-turn
        # overlap matrix; conditional states stay pure.
        w = np.asarray(wigner_rotation_matrix(n_a, math.pi / 2.0))
        probs_x = (w * w).T @ weights
        m1 = (w * w).T @ (weights * jz_vals)
        m2 = (w * w).T @ (weights * jz_vals**2)
        live = probs_x > TOL.prob_floor
        cond_qfi_x += float(np.sum(4.0 * (m2[live] - m1[live] ** 2 / probs_x[live])))
    if abs(total_weight - 1.0) > 1e-9:
        raise ValidationError(f"sector weights sum to {total_weight}, not 1")
    mean_jz = m1_red
    var_red = m2_red - m1_red**2
    cond_var = min(var_z, cond_qfi_x / 4.0)  # J_x conditionals are pure: avg var = F/4
    return PartitionQuantities(
        n=n,
        k=k,
        p=float(p),
        cond_var=cond_var,
        cond_qfi=cond_qfi_x,
        var_reduced=var_red,
        var_reduced_ref=n / 4.0 * p * (1.0 - p),
        qfi_reduced=qfi_red,
        mean_jz=mean_jz,
        mean_jz_ref=(k - n / 2.0) * (1.0 - p),
    )


def split_dicke_partition_rows(n: int, p: float, k_values):
    header = [
        "k",
        "cond_var",
        "cond_var_ref",
        "cond_qfi",
        "var_reduced",
        "var_reduced_ref",
        "qfi_reduced",
        "qfi_reduced_ref",
    ]

    def one(k: int):
        q = split_dicke_partition_quantities(n, k, p)
        return [k, q.cond_var, 0.0, q.cond_qfi, q.var_reduced, q.var_reduced_ref, q.qfi_reduced, 0.0]

    return header, parallel_map(one, [int(k) for k in k_values])


# ---------------------------------------------------------------------------
# Hybrid cat table
# ---------------------------------------------------------------------------

def cat_rows(alphas):
    header = [
        "alpha",
        "cutoff",
        "cond_qfi_x",
        "cond_qfi_x_ref",
        "cond_var_x",
        "cond_var_x_ref",
        "cond_var_p",
        "cond_var_p_ref",
        "reid_lower_bound",
    ]

    def one(alpha: float):
        asm = cat_assemblage(alpha)
        cutoff = asm.d_b
        mode = fock_space(cutoff)
        cq_x, _ = conditional_qfi(asm, mode.x)
        cv_x, _ = conditional_variance(asm, mode.x)
        cv_p, _ = conditional_variance(asm, mode.p)
        return [
            alpha,
            cutoff,
            cq_x,
            4.0 * (2.0 * alpha**2 + 0.5),
            cv_x,
            0.5,
            cv_p,
            0.5 - 2.0 * alpha**2 * math.exp(-4.0 * alpha**2),
            1.0 / cv_p,
        ]

    return header, parallel_map(one, [float(a) for a in alphas])


# ---------------------------------------------------------------------------
# Pure-state quantifier tables (d = 3 simplex grid)
# ---------------------------------------------------------------------------

def quantify_rows(step: float = 0.01):
    header = ["x", "y", "s_max", "s_avg_scaled"]
    steps = int(round(1.0 / step))
    grid = []
    for i in range(steps + 1):
        for j in range(steps + 1 - i):
            grid.append((i, j))

    def one(point):
        i, j = point
        x = i * step
        y = j * step
        spectrum = np.array([x, y, max(1.0 - x - y, 0.0)])
        spectrum = spectrum / spectrum.sum()
        return [x, y, s_max_pure(spectrum), s_avg_pure(spectrum) / 8.0]

    return header, parallel_map(one, grid)


# ---------------------------------------------------------------------------
# Multi-generator table
# ---------------------------------------------------------------------------

def multigen_rows(d_values):
    header = ["d", "qfi_sum", "qfi_sum_ref", "lhs_bound", "violation"]

    def one(d: int):
        asm, _ = maximally_entangled_assemblage(d)
        value, bound = multi_generator_sum(asm, gellmann_basis(d))
        ref = 4.0 * (d - 1) + 4.0 * (1.0 - 1.0 / d)
        return [d, value, ref, bound, int(value > bound + TOL.witness)]

    return header, parallel_map(one, [int(d) for d in d_values])


# ---------------------------------------------------------------------------
# Estimator experiment (Bell-state strategy)
# ---------------------------------------------------------------------------

def estimate_run(theta: float = 0.01, shots: int = 10_000, reps: int = 200, seed: int = 0):
    """Canonical Bell-state estimator run: H = sigma_z/2 on Bob.

    Bob's reduced state is maximally mixed, so a fixed observable has no
    phase response; he flips the sign of sigma_y with Alice's sigma_x
    outcome, which restores unit response on each steered branch.
    """
    asm = bell_assemblage()
    paulis = [g * math.sqrt(2.0) for g in gellmann_basis(2).generators]
    h = paulis[2] / 2.0
    m = [paulis[1], -paulis[1]]
    check = epr_product_check(
        asm, h, m, theta_true=theta, n=shots, reps=reps, seed=seed, theta_setting="sx"
    )
    return check
