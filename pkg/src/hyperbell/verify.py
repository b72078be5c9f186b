"""Self-verification suites behind ``hyperbell verify``.

Each check re-derives one structural invariant of the model from scratch and
reports a named pass/fail result.  The suite is deliberately redundant with
the unit tests: it runs from an installed package with no test dependencies,
as a quick integrity gate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import apparatus, elements
from .apparatus import LABELS, BellLabel, CoincidencePattern
from .qstate import (
    DIM,
    DensityOp,
    StateVector,
    apply_channel,
    apply_unitary,
    fidelity_pure,
    from_single_photon_bell_basis,
    make_basis_state,
    to_single_photon_bell_basis,
)

__all__ = ["CheckResult", "run_all_checks", "CHECK_NAMES"]

_SQ2 = math.sqrt(2.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _random_states(n: int, seed: int = 7) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(n, DIM)) + 1j * rng.normal(size=(n, DIM))
    return [v / np.linalg.norm(v) for v in raw]


def _sample_elements() -> list:
    fps = [
        elements.ModeFootprint("both", "r"),
        elements.ModeFootprint("A", "l"),
        elements.ModeFootprint("B", "both"),
    ]
    out = []
    for theta in (0.0, 0.3, math.pi / 4, 1.1):
        for fp in fps:
            out.append(elements.half_wave_plate(theta, fp))
    for phi in (0.0, 0.7, math.pi):
        out.append(elements.phase_plate(phi, elements.ModeFootprint("A", "l")))
    out.append(elements.beam_splitter())
    for eps in (-0.5, -0.2, 0.1, 0.5):
        out.append(elements.unbalanced_beam_splitter(eps))
    return out


def check_element_unitarity() -> tuple[bool, str]:
    worst = 0.0
    for u in _sample_elements():
        dev = float(np.max(np.abs(u.matrix.conj().T @ u.matrix - np.eye(DIM))))
        worst = max(worst, dev)
    return worst < 1e-12, f"max |U^dag U - I| = {worst:.2e}"


def check_channel_trace_preservation() -> tuple[bool, str]:
    worst = 0.0
    for v in np.linspace(0.0, 1.0, 11):
        worst = max(worst, elements.delay_dephasing_channel(v).completeness_defect())
    for p in np.linspace(0.0, 1.0, 11):
        worst = max(worst, elements.polarization_werner_channel(p).completeness_defect())
    return worst < 1e-10, f"max Kraus completeness defect = {worst:.2e}"


def check_channel_output_positivity() -> tuple[bool, str]:
    rho = apparatus.prepare_hyperentangled(BellLabel.PHI_PLUS).to_density()
    worst_eig, worst_tr, worst_herm = 0.0, 0.0, 0.0
    for ch in (
        elements.delay_dephasing_channel(0.3),
        elements.polarization_werner_channel(0.6),
    ):
        out = apply_channel(rho, ch).matrix
        worst_herm = max(worst_herm, float(np.max(np.abs(out - out.conj().T))))
        worst_tr = max(worst_tr, abs(float(np.real(np.trace(out))) - 1.0))
        worst_eig = max(worst_eig, max(0.0, -float(np.min(np.linalg.eigvalsh(out)))))
    ok = worst_herm < 1e-12 and worst_tr < 1e-12 and worst_eig < 1e-10
    return ok, f"hermiticity {worst_herm:.2e}, trace {worst_tr:.2e}, negativity {worst_eig:.2e}"


def check_basis_isometry() -> tuple[bool, str]:
    worst = 0.0
    for amps in _random_states(1000):
        coeffs = to_single_photon_bell_basis(StateVector(amps))
        worst = max(worst, abs(coeffs.norm() - 1.0))
    return worst < 1e-12, f"max norm drift over 1000 states = {worst:.2e}"


def check_basis_round_trip() -> tuple[bool, str]:
    worst = 0.0
    for amps in _random_states(200, seed=11):
        state = StateVector(amps)
        back = from_single_photon_bell_basis(to_single_photon_bell_basis(state))
        worst = max(worst, float(np.max(np.abs(back.amplitudes - state.amplitudes))))
    return worst < 1e-12, f"max amplitude drift = {worst:.2e}"


def check_fidelity_phase_invariance() -> tuple[bool, str]:
    state = apparatus.prepare_hyperentangled(BellLabel.PSI_MINUS)
    rho = state.to_density()
    base = fidelity_pure(rho, state)
    worst = 0.0
    for phase in (0.4, 1.3, math.pi):
        shifted = StateVector(np.exp(1j * phase) * state.amplitudes)
        worst = max(worst, abs(fidelity_pure(rho, shifted) - base))
        worst = max(worst, abs(fidelity_pure(shifted.to_density(), state) - base))
    return worst < 1e-12, f"max fidelity drift under phases = {worst:.2e}"


def check_wave_plate_involution() -> tuple[bool, str]:
    worst = 0.0
    for theta in (0.0, 0.2, math.pi / 4, 2.0):
        u = elements.half_wave_plate(theta, elements.ModeFootprint("both", "r")).matrix
        worst = max(worst, float(np.max(np.abs(u @ u - np.eye(DIM)))))
    return worst < 1e-12, f"max |U^2 - I| = {worst:.2e}"


def _single_photon_state(label: str, photon: str) -> StateVector:
    """One per-photon entangled basis state, the partner photon fixed at Hl."""
    mate = ("H", "l")
    sign = 1.0 if label.endswith("+") else -1.0
    if label.startswith("σ"):
        first, second = ("H", "l"), ("V", "r")
    else:
        first, second = ("V", "l"), ("H", "r")
    amps = np.zeros(DIM, dtype=np.complex128)

    def put(pol, mom, value):
        if photon == "A":
            idx = 8 * ("H", "V").index(pol) + 4 * ("l", "r").index(mom)
            idx += 2 * ("H", "V").index(mate[0]) + ("l", "r").index(mate[1])
        else:
            idx = 8 * ("H", "V").index(mate[0]) + 4 * ("l", "r").index(mate[1])
            idx += 2 * ("H", "V").index(pol) + ("l", "r").index(mom)
        amps[idx] = value

    put(*first, 1.0 / _SQ2)
    put(*second, sign / _SQ2)
    return StateVector(amps)


def check_transfer_plate_single_photon_action() -> tuple[bool, str]:
    """The 45-degree r-mode plate maps each per-photon entangled state to a
    fixed polarization times (l +/- r)/sqrt2."""
    plate = apparatus.phase_transfer_plate()
    worst = 0.0
    for photon in ("A", "B"):
        for label in ("σ+", "σ-", "τ+", "τ-"):
            out = apply_unitary(_single_photon_state(label, photon), plate)
            pol = "H" if label.startswith("σ") else "V"
            sign = 1.0 if label.endswith("+") else -1.0
            expected = np.zeros(DIM, dtype=np.complex128)
            for mom, amp in (("l", 1.0 / _SQ2), ("r", sign / _SQ2)):
                if photon == "A":
                    ref = make_basis_state(pol, mom, "H", "l")
                else:
                    ref = make_basis_state("H", "l", pol, mom)
                expected += amp * ref.amplitudes
            worst = max(worst, float(np.max(np.abs(out.amplitudes - expected))))
    return worst < 1e-12, f"max amplitude deviation over 8 states = {worst:.2e}"


def check_ancilla_phase_transfer() -> tuple[bool, str]:
    expected = {
        BellLabel.PHI_PLUS: (BellLabel.PSI_PLUS, 1),
        BellLabel.PHI_MINUS: (BellLabel.PSI_MINUS, -1),
        BellLabel.PSI_PLUS: (BellLabel.PHI_PLUS, 1),
        BellLabel.PSI_MINUS: (BellLabel.PHI_MINUS, -1),
    }
    for label, want in expected.items():
        got = apparatus.ancilla_phase_transfer(label)
        if got != want:
            return False, f"{label.value}: expected {want}, got {got}"
    return True, "phi/psi exchange with sign transfer confirmed"


def check_dephasing_semigroup() -> tuple[bool, str]:
    v, w = 0.8, 0.45
    rho = apparatus.prepare_hyperentangled(BellLabel.PSI_PLUS).to_density()
    composed = apply_channel(
        apply_channel(rho, elements.delay_dephasing_channel(v)),
        elements.delay_dephasing_channel(w),
    )
    direct = apply_channel(rho, elements.delay_dephasing_channel(v * w))
    worst = float(np.max(np.abs(composed.matrix - direct.matrix)))
    return worst < 1e-12, f"max matrix deviation = {worst:.2e}"


def check_visibility_curve() -> tuple[bool, str]:
    filt = elements.SpectralFilter()
    if elements.visibility(0.0, filt) != 1.0:
        return False, "visibility at zero delay is not exactly 1"
    grid = np.linspace(0.0, 3.0 * filt.coherence_scale_um, 1000)
    values = np.array([elements.visibility(x, filt) for x in grid])
    if np.any(np.diff(values) > 1e-15):
        return False, "gaussian visibility is not monotone nonincreasing"
    jumps = float(np.max(np.abs(np.diff(values))))
    return True, f"monotone on 1000-point grid, max step {jumps:.2e}"


def check_balanced_splitter_limit() -> tuple[bool, str]:
    same = np.array_equal(
        elements.unbalanced_beam_splitter(0.0).matrix, elements.beam_splitter().matrix
    )
    return same, "zero-imbalance splitter matches the balanced one bit-for-bit"


def check_detector_completeness() -> tuple[bool, str]:
    acc = sum(elements.pbs_detection_operators())
    dev = float(np.max(np.abs(acc - np.eye(DIM))))
    return dev < 1e-12, f"|sum P - I| = {dev:.2e}"


def check_decision_table_disjointness(
    table_mapping: Optional[dict] = None,
) -> tuple[bool, str]:
    mapping = table_mapping
    if mapping is None:
        mapping = dict(apparatus.decision_table().mapping)
    problem = apparatus.partition_defect(mapping)
    if problem:
        return False, problem
    return True, "16 patterns partition into four 4-sets"


def check_ideal_analyzer_determinism() -> tuple[bool, str]:
    table = apparatus.decision_table()
    noise = elements.NoiseParams()
    supports = []
    worst = 0.0
    for label in LABELS:
        rho = apparatus.prepare_hyperentangled(label).to_density()
        hist = apparatus.analyzer_probabilities_at_visibility(rho, 1.0, noise)
        support = {i for i in range(DIM) if hist.bins[i] > 1e-12}
        expected = {p.index for p in table.patterns_for(label)}
        if support != expected:
            return False, f"{label.value}: support {sorted(support)} != table"
        worst = max(worst, float(np.max(np.abs(hist.bins[sorted(support)] - 0.25))))
        supports.append(support)
    union = set().union(*supports)
    if len(union) != DIM or sum(len(s) for s in supports) != DIM:
        return False, "supports do not partition the 16 bins"
    return worst < 1e-12, f"probability deviation from 1/4: {worst:.2e}"


def check_product_decomposition_signs() -> tuple[bool, str]:
    expected = {
        BellLabel.PHI_PLUS: {("σ+", "τ+"): 0.5, ("σ-", "τ-"): -0.5,
                             ("τ+", "σ+"): 0.5, ("τ-", "σ-"): -0.5},
        BellLabel.PHI_MINUS: {("σ+", "τ-"): -0.5, ("σ-", "τ+"): 0.5,
                              ("τ+", "σ-"): 0.5, ("τ-", "σ+"): -0.5},
        BellLabel.PSI_PLUS: {("σ+", "σ+"): 0.5, ("σ-", "σ-"): -0.5,
                             ("τ+", "τ+"): 0.5, ("τ-", "τ-"): -0.5},
        BellLabel.PSI_MINUS: {("σ+", "σ-"): -0.5, ("σ-", "σ+"): 0.5,
                              ("τ+", "τ-"): 0.5, ("τ-", "τ+"): -0.5},
    }
    worst = 0.0
    for label, want in expected.items():
        coeffs = apparatus.single_photon_decomposition(
            apparatus.prepare_hyperentangled(label)
        )
        got = {k: v for k, v in coeffs.nonzero(tol=1e-12)}
        if set(got) != set(want):
            return False, f"{label.value}: support mismatch"
        for key, val in want.items():
            worst = max(worst, abs(got[key] - val))
    return worst < 1e-12, f"max coefficient deviation = {worst:.2e}"


def check_werner_fidelity_law() -> tuple[bool, str]:
    table = apparatus.decision_table()
    worst = 0.0
    for p in (0.0, 0.4, 0.852, 1.0):
        noise = elements.NoiseParams(pol_werner_p=p)
        for label in LABELS:
            rho = apparatus.prepare_hyperentangled(label).to_density()
            hist = apparatus.analyzer_probabilities_at_visibility(rho, 1.0, noise)
            fid = sum(hist.value(pt) for pt in table.patterns_for(label))
            worst = max(worst, abs(fid - (p + (1.0 - p) / 4.0)))
    return worst < 1e-12, f"max |F - (p + (1-p)/4)| = {worst:.2e}"


def check_dephasing_fidelity_law() -> tuple[bool, str]:
    table = apparatus.decision_table()
    rho = apparatus.prepare_hyperentangled(BellLabel.PSI_PLUS).to_density()
    noise = elements.NoiseParams()
    worst = 0.0
    for v in np.linspace(0.0, 1.0, 21):
        hist = apparatus.analyzer_probabilities_at_visibility(rho, float(v), noise)
        f_plus = sum(hist.value(pt) for pt in table.patterns_for(BellLabel.PSI_PLUS))
        f_minus = sum(hist.value(pt) for pt in table.patterns_for(BellLabel.PSI_MINUS))
        worst = max(worst, abs(f_plus - (1.0 + v) / 2.0), abs(f_minus - (1.0 - v) / 2.0))
    return worst < 1e-12, f"max deviation from (1 +/- V)/2 on 21 points = {worst:.2e}"


_CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("element-unitarity", check_element_unitarity),
    ("channel-trace-preservation", check_channel_trace_preservation),
    ("channel-output-positivity", check_channel_output_positivity),
    ("single-photon-basis-isometry", check_basis_isometry),
    ("single-photon-basis-round-trip", check_basis_round_trip),
    ("fidelity-phase-invariance", check_fidelity_phase_invariance),
    ("wave-plate-involution", check_wave_plate_involution),
    ("transfer-plate-single-photon-action", check_transfer_plate_single_photon_action),
    ("ancilla-phase-transfer", check_ancilla_phase_transfer),
    ("dephasing-semigroup", check_dephasing_semigroup),
    ("visibility-curve", check_visibility_curve),
    ("balanced-splitter-limit", check_balanced_splitter_limit),
    ("detector-completeness", check_detector_completeness),
    ("decision-table-disjointness", check_decision_table_disjointness),
    ("ideal-analyzer-determinism", check_ideal_analyzer_determinism),
    ("product-decomposition-signs", check_product_decomposition_signs),
    ("werner-fidelity-law", check_werner_fidelity_law),
    ("dephasing-fidelity-law", check_dephasing_fidelity_law),
]

CHECK_NAMES = tuple(name for name, _ in _CHECKS)


def _corrupted_mapping() -> dict:
    """A decision table with one pattern reassigned (breaks the partition)."""
    mapping = dict(apparatus.decision_table().mapping)
    first = CoincidencePattern.from_index(0)
    mapping[first] = mapping[first].phase_partner
    return mapping


def run_all_checks(corrupt_decision_table: bool = False) -> list[CheckResult]:
    """Run every named check; the corruption flag is a negative-control hook
    that feeds the disjointness check a deliberately broken table."""
    results = []
    for name, fn in _CHECKS:
        if name == "decision-table-disjointness" and corrupt_decision_table:
            ok, detail = check_decision_table_disjointness(_corrupted_mapping())
        else:
            ok, detail = fn()
        results.append(CheckResult(name=name, passed=ok, detail=detail))
    return results
