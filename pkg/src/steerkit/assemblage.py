"""Assemblages, conditional variance/QFI over settings, and steering witnesses.

An assemblage collects, per measurement setting of Alice, the outcome
probabilities together with Bob's conditional states.  Conditional states may
be stored as amplitude vectors (pure) or density matrices; the metrology
functionals dispatch on the array rank.

The max/min over settings ranges over the finitely many settings supplied by
the caller; analytically optimal settings for the worked examples are known
and included in their candidate lists.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import (
    TOL,
    NumericError,
    ValidationError,
    outer,
    require_density_matrix,
    require_hermitian,
    require_state_vector,
)
from .metrology import POVM, cfi, qfi, variance
from .states import BipartitePureState


@dataclass(frozen=True)
class SettingRecord:
    """One measurement setting: outcome probabilities and conditional states."""

    label: str
    probabilities: np.ndarray
    states: tuple[np.ndarray, ...]
    source_povm: POVM | None = None

    @property
    def n_outcomes(self) -> int:
        return len(self.states)

    def state_matrix(self, i: int) -> np.ndarray:
        st = self.states[i]
        return outer(st) if st.ndim == 1 else st

    def reduced(self) -> np.ndarray:
        out = np.zeros((self.states[0].shape[0],) * 2, dtype=complex)
        for p, st in zip(self.probabilities, self.states):
            out += p * (outer(st) if st.ndim == 1 else st)
        return out


@dataclass(frozen=True)
class Assemblage:
    """No-signalling collection of setting records over Bob's space."""

    d_b: int
    settings: tuple[SettingRecord, ...]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.settings)

    def setting(self, label: str) -> SettingRecord:
        for rec in self.settings:
            if rec.label == label:
                return rec
        raise ValidationError(f"no setting labelled {label!r}; have {self.labels}")

    def reduced_state(self) -> np.ndarray:
        return self.settings[0].reduced()


def make_assemblage(settings, d_b: int, validate: bool = True, validate_states: bool = True) -> Assemblage:
    """Validate probabilities, conditional states and no-signalling.

    Constructors that normalize conditional states out of sub-normalized
    blocks validate those blocks at their own scale (where roundoff is not
    amplified by 1/p) and pass ``validate_states=False``.
    """
    recs = []
    for rec in settings:
        probs = np.asarray(rec.probabilities, dtype=float)
        states = tuple(np.asarray(s, dtype=complex) for s in rec.states)
        if len(states) != len(probs) or len(states) == 0:
            raise ValidationError(f"setting {rec.label!r}: outcome count mismatch or empty")
        if validate:
            if float(probs.min()) < -TOL.prob_floor:
                raise ValidationError(f"setting {rec.label!r} has negative probability")
            dev = abs(float(probs.sum()) - 1.0)
            if dev > TOL.prob_sum:
                raise ValidationError(
                    f"setting {rec.label!r}: probabilities sum to {probs.sum():.12f}"
                )
            for i, st in enumerate(states):
                if st.shape[0] != d_b:
                    raise ValidationError(
                        f"setting {rec.label!r}, outcome {i}: dimension {st.shape[0]} != {d_b}"
                    )
                if not validate_states:
                    continue
                if st.ndim == 1:
                    require_state_vector(st, name=f"conditional state {rec.label}/{i}")
                else:
                    require_density_matrix(st, name=f"conditional state {rec.label}/{i}")
        recs.append(replace(rec, probabilities=probs, states=states))
    out = Assemblage(d_b=int(d_b), settings=tuple(recs))
    if validate and len(recs) > 1:
        first = recs[0].reduced()
        for rec in recs[1:]:
            dev = float(np.max(np.abs(rec.reduced() - first)))
            if dev > TOL.no_signal:
                raise ValidationError(
                    f"no-signalling violated: marginal of {rec.label!r} deviates from "
                    f"{recs[0].label!r} by {dev:.3e} (max-abs)"
                )
    return out


def _normalize_block(block: np.ndarray, p: float, name: str) -> np.ndarray:
    """Validate a sub-normalized conditional block at its own scale.

    Positivity is checked before dividing by p so roundoff on small-probability
    outcomes is not amplified into spurious rejections.
    """
    sym = (block + block.conj().T) / 2.0
    if float(np.max(np.abs(block - sym))) > 1e-12:
        raise ValidationError(f"{name} is not Hermitian")
    lo = float(np.linalg.eigvalsh(sym)[0])
    if lo < TOL.psd:
        raise ValidationError(f"{name} has negative weight {lo:.3e} below {TOL.psd:.1e}")
    cond = sym / p
    if abs(float(np.trace(cond).real) - 1.0) > TOL.trace:
        raise ValidationError(f"{name} fails to normalize")
    return cond


def assemblage_from_state(rho_ab, dims: tuple[int, int], povms) -> Assemblage:
    """Conditional states tr_A[(E_a (x) 1) rho] / p(a) for each POVM setting."""
    d_a, d_b = int(dims[0]), int(dims[1])
    rho = require_density_matrix(rho_ab, name="rho_AB")
    if rho.shape[0] != d_a * d_b:
        raise ValidationError(f"rho_AB dimension {rho.shape[0]} != {d_a} * {d_b}")
    four = rho.reshape(d_a, d_b, d_a, d_b)
    recs = []
    for idx, povm in enumerate(povms):
        if povm.dim != d_a:
            raise ValidationError(f"POVM {idx} acts on dimension {povm.dim}, Alice has {d_a}")
        probs, states = [], []
        for eff in povm.effects:
            block = np.einsum("ij,jbic->bc", eff, four)
            p = float(np.trace(block).real)
            if p < TOL.prob_floor:
                continue
            states.append(_normalize_block(block, p, "conditional state"))
            probs.append(p)
        recs.append(
            SettingRecord(
                label=f"setting{idx}", probabilities=np.asarray(probs), states=tuple(states),
                source_povm=povm,
            )
        )
    return make_assemblage(recs, d_b, validate_states=False)


def assemblage_from_pure_state(state: BipartitePureState, settings) -> Assemblage:
    """Fast path for pure global states: conditionals stay amplitude vectors.

    ``settings`` maps labels to POVMs; rank-1 POVMs (``vectors`` present)
    steer into pure conditional states via amplitude contraction, others fall
    back to dense conditional density matrices.
    """
    psi = state.matrix
    recs = []
    for label, povm in settings.items() if isinstance(settings, dict) else settings:
        if povm.dim != state.d_a:
            raise ValidationError(f"setting {label!r} acts on dimension {povm.dim}, Alice has {state.d_a}")
        probs, conds = [], []
        if povm.vectors is not None:
            for vec in povm.vectors:
                amp = vec.conj() @ psi
                p = float(np.vdot(amp, amp).real)
                if p < TOL.prob_floor:
                    continue
                probs.append(p)
                conds.append(amp / np.sqrt(p))
        else:
            for eff in povm.effects:
                block = np.einsum("ij,jb,ic->bc", eff, psi, psi.conj())
                p = float(np.trace(block).real)
                if p < TOL.prob_floor:
                    continue
                probs.append(p)
                conds.append(_normalize_block(block, p, "conditional state"))
        recs.append(
            SettingRecord(
                label=str(label), probabilities=np.asarray(probs), states=tuple(conds),
                source_povm=povm,
            )
        )
    return make_assemblage(recs, state.d_b, validate_states=False)


@dataclass(frozen=True)
class LHSModel:
    """Local-hidden-state model: p(lambda), sigma_lambda, and response p(a|X,lambda).

    ``responses`` maps setting labels to (n_outcomes, n_lambda) stochastic
    matrices whose columns are conditional distributions over outcomes.
    """

    weights: np.ndarray
    local_states: tuple[np.ndarray, ...]
    responses: dict[str, np.ndarray] = field(default_factory=dict)


def assemblage_from_lhs(model: LHSModel) -> Assemblage:
    """A(a, X) = sum_lambda p(a|X,lambda) p(lambda) sigma_lambda."""
    w = np.asarray(model.weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValidationError("weights must be a nonempty vector")
    if float(w.min()) < 0 or abs(float(w.sum()) - 1.0) > TOL.weight_sum:
        raise ValidationError(f"weights must form a distribution, sum = {w.sum():.15f}")
    sigmas = [require_density_matrix(s, name=f"local state {i}") for i, s in enumerate(model.local_states)]
    if len(sigmas) != w.size:
        raise ValidationError("weights and local states differ in length")
    d_b = sigmas[0].shape[0]
    recs = []
    for label, resp in model.responses.items():
        r = np.asarray(resp, dtype=float)
        if r.ndim != 2 or r.shape[1] != w.size:
            raise ValidationError(f"response for {label!r} must be (n_outcomes, {w.size})")
        if float(r.min()) < 0:
            raise ValidationError(f"response for {label!r} has negative entries")
        col_dev = float(np.max(np.abs(r.sum(axis=0) - 1.0)))
        if col_dev > TOL.weight_sum:
            raise ValidationError(f"response columns for {label!r} sum to 1 +/- {col_dev:.3e}")
        probs, states = [], []
        for a in range(r.shape[0]):
            p = float(np.dot(r[a], w))
            if p < TOL.prob_floor:
                continue
            mix = np.zeros((d_b, d_b), dtype=complex)
            for lam in range(w.size):
                mix += r[a, lam] * w[lam] * sigmas[lam]
            probs.append(p)
            states.append(_normalize_block(mix, p, f"conditional state {label}/{a}"))
        recs.append(SettingRecord(label=str(label), probabilities=np.asarray(probs), states=tuple(states)))
    if not recs:
        raise ValidationError("LHS model defines no settings")
    return make_assemblage(recs, d_b, validate_states=False)


def _state_variance(state: np.ndarray, h: np.ndarray) -> float:
    return variance(state, h)


def _state_qfi(state: np.ndarray, h: np.ndarray) -> float:
    return qfi(state, h)


def setting_average_variance(rec: SettingRecord, h: np.ndarray) -> float:
    return float(sum(p * _state_variance(st, h) for p, st in zip(rec.probabilities, rec.states)))


def setting_average_qfi(rec: SettingRecord, h: np.ndarray) -> float:
    return float(sum(p * _state_qfi(st, h) for p, st in zip(rec.probabilities, rec.states)))


def conditional_variance(assemblage: Assemblage, h) -> tuple[float, str]:
    """min over settings of sum_a p(a|X) Var[rho_a, H]; first setting wins ties."""
    op = require_hermitian(h, name="H")
    if not assemblage.settings:
        raise ValidationError("assemblage has no settings")
    best_val, best_label = None, None
    for rec in assemblage.settings:
        val = setting_average_variance(rec, op)
        if best_val is None or val < best_val:
            best_val, best_label = val, rec.label
    return best_val, best_label


def conditional_qfi(assemblage: Assemblage, h) -> tuple[float, str]:
    """max over settings of sum_a p(a|X) F_Q[rho_a, H]; first setting wins ties."""
    op = require_hermitian(h, name="H")
    if not assemblage.settings:
        raise ValidationError("assemblage has no settings")
    best_val, best_label = None, None
    for rec in assemblage.settings:
        val = setting_average_qfi(rec, op)
        if best_val is None or val > best_val:
            best_val, best_label = val, rec.label
    return best_val, best_label


@dataclass(frozen=True)
class WitnessReport:
    """All witness quantities for one (assemblage, generator) configuration."""

    cond_qfi: float
    cond_var: float
    delta: float
    qfi_reduced: float
    var_reduced: float
    argmax_setting: str
    argmin_setting: str
    steering: bool
    reid_lhs_rhs: tuple[float, float] | None = None
    s_max_pure: float | None = None
    s_avg_pure: float | None = None
    s_lower_bound: float | None = None


def steering_witness(assemblage: Assemblage, h, m=None) -> WitnessReport:
    """Evaluate the conditional QFI/variance gap; delta > tol flags steering.

    With ``m`` supplied the report also carries the inference-variance
    product and its commutator bound (the Reid pair).
    """
    op = require_hermitian(h, name="H")
    cq, argmax = conditional_qfi(assemblage, op)
    cv, argmin = conditional_variance(assemblage, op)
    delta = cq / 4.0 - cv
    reduced = assemblage.reduced_state()
    report = WitnessReport(
        cond_qfi=cq,
        cond_var=cv,
        delta=delta,
        qfi_reduced=qfi(reduced, op),
        var_reduced=variance(reduced, op),
        argmax_setting=argmax,
        argmin_setting=argmin,
        steering=bool(delta > TOL.witness),
        reid_lhs_rhs=None if m is None else reid_witness(assemblage, op, m),
    )
    return report


def reid_witness(assemblage: Assemblage, h, m) -> tuple[float, float]:
    """Inference-variance product vs the commutator bound |<[H, M]>|^2 / 4.

    Returns (lhs, rhs); lhs < rhs flags a Reid EPR paradox.  Also verifies
    the moment-bound chain |<[H,M]>|^2 / cond_var(M) <= cond_qfi(H) as an
    internal consistency check.
    """
    h = require_hermitian(h, name="H")
    m = require_hermitian(m, name="M")
    cv_h, _ = conditional_variance(assemblage, h)
    cv_m, _ = conditional_variance(assemblage, m)
    reduced = assemblage.reduced_state()
    comm_mean = complex(np.trace(reduced @ (h @ m - m @ h)))
    rhs = abs(comm_mean) ** 2 / 4.0
    lhs = cv_h * cv_m
    if cv_m > 1e-14:
        cq_h, _ = conditional_qfi(assemblage, h)
        if abs(comm_mean) ** 2 / cv_m > cq_h + TOL.witness:
            raise NumericError(
                "commutator lower bound exceeded the conditional QFI; numerics are inconsistent"
            )
    return lhs, rhs


def joint_cfi(assemblage: Assemblage, setting_label: str, povm_b: POVM, h) -> float:
    """Fixed-settings Fisher information sum_a p(a|X) F[povm_B, rho_a, H]."""
    op = require_hermitian(h, name="H")
    rec = assemblage.setting(setting_label)
    total = 0.0
    for p, st in zip(rec.probabilities, rec.states):
        total += p * cfi(povm_b, st, op)
    return total


def bounds_check(report: WitnessReport, tol: float = 1e-9) -> bool:
    """F_Q[rho_B] <= cond_qfi <= 4 Var[rho_B] and the mirrored variance chain."""
    vals = (
        report.qfi_reduced,
        report.cond_qfi,
        4.0 * report.var_reduced,
        4.0 * report.cond_var,
    )
    if not all(np.isfinite(v) for v in vals):
        return False
    ok = report.qfi_reduced <= report.cond_qfi + tol
    ok &= report.cond_qfi <= 4.0 * report.var_reduced + tol
    ok &= report.qfi_reduced <= 4.0 * report.cond_var + tol
    ok &= 4.0 * report.cond_var <= 4.0 * report.var_reduced + tol
    return bool(ok)


def mix_assemblages(first: Assemblage, second: Assemblage, weight: float) -> Assemblage:
    """Classical mixture weight * A1 + (1 - weight) * A2, outcome by outcome."""
    if not 0.0 <= weight <= 1.0:
        raise ValidationError(f"weight must be in [0, 1], got {weight}")
    if first.d_b != second.d_b or first.labels != second.labels:
        raise ValidationError("assemblages must share Bob dimension and setting labels")
    recs = []
    for rec1, rec2 in zip(first.settings, second.settings):
        if rec1.n_outcomes != rec2.n_outcomes:
            raise ValidationError(f"setting {rec1.label!r}: outcome counts differ")
        probs, states = [], []
        for i in range(rec1.n_outcomes):
            p = weight * rec1.probabilities[i] + (1.0 - weight) * rec2.probabilities[i]
            if p < TOL.prob_floor:
                continue
            blended = (
                weight * rec1.probabilities[i] * rec1.state_matrix(i)
                + (1.0 - weight) * rec2.probabilities[i] * rec2.state_matrix(i)
            )
            probs.append(p)
            states.append(_normalize_block(blended, p, f"mixed conditional {rec1.label}/{i}"))
        recs.append(SettingRecord(label=rec1.label, probabilities=np.asarray(probs), states=tuple(states)))
    return make_assemblage(recs, first.d_b, validate_states=False)
