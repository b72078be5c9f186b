"""Source chain, analyzer pipeline and the coincidence decision table.

The analyzer identifies which of the four maximally entangled polarization
states was fed in, using the fixed momentum-pair state of the source as an
ancilla.  Three steps, all modeled here as explicit 16x16 linear algebra:

1. A half-wave plate at 45 degrees on both right-cone modes (the *phase
   transfer plate*) moves the +/- phase information of the polarization state
   onto the momentum ancilla, swapping the Phi and Psi families in the
   process.
2. The beam splitter maps the symmetric ancilla state to same-side photon
   pairs and the antisymmetric one to opposite-side pairs.
3. Polarizing beam splitters on every output port distinguish the Phi family
   (equal polarizations after step 1) from the Psi family.

Each of the 16 (port, polarization) coincidence patterns then points to
exactly one input label; :func:`decision_table` materializes that map and
:func:`analyzer_probabilities` produces the full Born-rule histogram,
including the bench noise knobs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from types import MappingProxyType
from typing import TYPE_CHECKING, Mapping

import numpy as np

from . import elements
from .qstate import (
    ATOL_SPECTRAL,
    DIM,
    SINGLE_PHOTON_BELL_LABELS,
    DensityOp,
    ElementUnitary,
    SinglePhotonBellCoeffs,
    StateVector,
    apply_channel,
    apply_unitary,
    to_single_photon_bell_basis,
)

if TYPE_CHECKING:  # pragma: no cover
    from .experiment import AnalyzerConfig

__all__ = [
    "BellLabel",
    "LABELS",
    "CoincidencePattern",
    "DecisionTable",
    "Histogram16",
    "DecompositionError",
    "AncillaLeakageError",
    "bell_polarization_vector",
    "hyperentangled_product",
    "source_chain",
    "prepare_hyperentangled",
    "phase_transfer_plate",
    "single_photon_decomposition",
    "decision_table",
    "classify",
    "analyzer_probabilities",
    "analyzer_probabilities_at_visibility",
    "bell_ancilla_factorization",
    "ancilla_phase_transfer",
]


class DecompositionError(ValueError):
    """A state failed to factor into (polarization Bell) x (ancilla qubit)."""


class AncillaLeakageError(ValueError):
    """A state carries momentum population outside the ancilla subspace."""


class BellLabel(Enum):
    """The four maximally entangled polarization states."""

    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"

    @property
    def sign(self) -> int:
        return 1 if self.value.endswith("+") else -1

    @property
    def family(self) -> str:
        """"phi" (equal polarizations) or "psi" (opposite polarizations)."""
        return self.value[:-1]

    @property
    def phase_partner(self) -> "BellLabel":
        """Same family, opposite sign."""
        other = self.family + ("-" if self.sign > 0 else "+")
        return BellLabel(other)

    @property
    def family_partner(self) -> "BellLabel":
        """Other family, same sign (the phase-transfer-plate image)."""
        other = ("psi" if self.family == "phi" else "phi") + self.value[-1]
        return BellLabel(other)


#: Canonical label order used for matrices and CSV columns.
LABELS = (BellLabel.PHI_PLUS, BellLabel.PHI_MINUS, BellLabel.PSI_PLUS, BellLabel.PSI_MINUS)

_PORTS = ("u", "v")
_POLS = ("H", "V")


@dataclass(frozen=True)
class CoincidencePattern:
    """One joint detector outcome: output port and polarization per photon."""

    port_a: str
    pol_a: str
    port_b: str
    pol_b: str

    def __post_init__(self) -> None:
        if self.port_a not in _PORTS or self.port_b not in _PORTS:
            raise ValueError("ports must be 'u' or 'v'")
        if self.pol_a not in _POLS or self.pol_b not in _POLS:
            raise ValueError("polarizations must be 'H' or 'V'")

    @property
    def index(self) -> int:
        """Histogram bin index; coincides with the basis index that has the
        port label in the momentum slot."""
        return (
            8 * _POLS.index(self.pol_a)
            + 4 * _PORTS.index(self.port_a)
            + 2 * _POLS.index(self.pol_b)
            + _PORTS.index(self.port_b)
        )

    @classmethod
    def from_index(cls, index: int) -> "CoincidencePattern":
        if not 0 <= index < DIM:
            raise ValueError(f"pattern index must lie in [0, {DIM}), got {index}")
        return cls(
            port_a=_PORTS[(index >> 2) & 1],
            pol_a=_POLS[(index >> 3) & 1],
            port_b=_PORTS[index & 1],
            pol_b=_POLS[(index >> 1) & 1],
        )

    @property
    def single_photon_pair(self) -> tuple[str, str]:
        """The per-photon entangled-basis outcomes this pattern detects.

        H maps to the sigma family and V to tau; port u carries the + sign and
        port v the - sign.
        """
        a = 2 * _POLS.index(self.pol_a) + _PORTS.index(self.port_a)
        b = 2 * _POLS.index(self.pol_b) + _PORTS.index(self.port_b)
        return (SINGLE_PHOTON_BELL_LABELS[a], SINGLE_PHOTON_BELL_LABELS[b])

    @classmethod
    def from_single_photon_pair(cls, label_a: str, label_b: str) -> "CoincidencePattern":
        a = SINGLE_PHOTON_BELL_LABELS.index(label_a)
        b = SINGLE_PHOTON_BELL_LABELS.index(label_b)
        return cls.from_index(4 * a + b)

    def port_pol_form(self) -> str:
        return f"({self.port_a},{self.pol_a};{self.port_b},{self.pol_b})"

    def __str__(self) -> str:
        return "".join(self.single_photon_pair)


ALL_PATTERNS = tuple(CoincidencePattern.from_index(i) for i in range(DIM))


@dataclass(frozen=True, eq=False)
class Histogram16:
    """Values over the 16 coincidence patterns (probabilities or counts)."""

    bins: np.ndarray

    def __post_init__(self) -> None:
        b = np.asarray(self.bins)
        if b.shape != (DIM,):
            raise ValueError(f"histogram needs {DIM} bins, got shape {b.shape}")
        if np.any(b < 0):
            raise ValueError("histogram bins must be nonnegative")
        b = b.copy()
        b.flags.writeable = False
        object.__setattr__(self, "bins", b)

    def total(self) -> float:
        return float(self.bins.sum())

    def value(self, pattern: CoincidencePattern) -> float:
        return float(self.bins[pattern.index])


@dataclass(frozen=True, eq=False)
class DecisionTable:
    """Total map from coincidence pattern to input label.

    Valid tables partition the 16 patterns into four 4-sets, one per label;
    the constructor enforces this, which is what makes the analyzer both
    deterministic and complete.
    """

    mapping: Mapping

    def __post_init__(self) -> None:
        problem = partition_defect(self.mapping)
        if problem:
            raise ValueError(f"invalid decision table: {problem}")
        object.__setattr__(self, "mapping", MappingProxyType(dict(self.mapping)))

    def label_for(self, pattern: CoincidencePattern) -> BellLabel:
        return self.mapping[pattern]

    def patterns_for(self, label: BellLabel) -> frozenset:
        return frozenset(p for p, lab in self.mapping.items() if lab is label)


def partition_defect(mapping: Mapping) -> str:
    """Empty string if the mapping is a valid 4x4 partition, else a reason."""
    if set(mapping.keys()) != set(ALL_PATTERNS):
        return "mapping is not total on the 16 patterns"
    counts = {label: 0 for label in LABELS}
    for label in mapping.values():
        if label not in counts:
            return f"unknown label {label!r}"
        counts[label] += 1
    bad = {lab.value: n for lab, n in counts.items() if n != 4}
    if bad:
        return f"labels must own exactly 4 patterns each, got {bad}"
    return ""


def bell_polarization_vector(label: BellLabel) -> np.ndarray:
    """The 4-vector of the label on the joint polarization factor (AA',BB')."""
    s = 1.0 / math.sqrt(2.0)
    vec = np.zeros(4, dtype=np.complex128)
    if label.family == "phi":
        vec[0] = s  # HH
        vec[3] = label.sign * s  # VV
    else:
        vec[1] = s  # HV
        vec[2] = label.sign * s  # VH
    return vec


_MOM_PAIR_PLUS = np.zeros(4, dtype=np.complex128)
_MOM_PAIR_PLUS[1] = _MOM_PAIR_PLUS[2] = 1.0 / math.sqrt(2.0)  # (l r + r l)/sqrt2


def _product_state(pol4: np.ndarray, mom4: np.ndarray) -> StateVector:
    amps = np.einsum("ac,bd->abcd", pol4.reshape(2, 2), mom4.reshape(2, 2)).reshape(-1)
    return StateVector(amps)


def hyperentangled_product(label: BellLabel) -> StateVector:
    """Textbook tensor product: (polarization Bell state) x (momentum pair)."""
    return _product_state(bell_polarization_vector(label), _MOM_PAIR_PLUS)


def phase_transfer_plate() -> ElementUnitary:
    """Half-wave plate at 45 degrees intercepting both right-cone modes.

    Swaps H and V on the r-mode amplitudes of both photons, which transfers
    the +/- phase of the polarization state onto the momentum ancilla while
    exchanging the Phi and Psi families.
    """
    return elements.half_wave_plate(math.pi / 4.0, elements.ModeFootprint.r_modes_both())


def source_chain(label: BellLabel) -> StateVector:
    """State produced by the modeled source elements, phases included.

    The crystal-plus-mirror source emits the phi-family states directly (the
    mirror position selects the + or - phase).  The psi-family states are
    obtained with a half-wave plate on the r modes; for psi- that plate also
    flips the momentum-pair phase, which a glass plate on the l_A mode
    restores, at the cost of a global phase.
    """
    pol = (
        bell_polarization_vector(BellLabel.PHI_PLUS)
        if label.sign > 0
        else bell_polarization_vector(BellLabel.PHI_MINUS)
    )
    state = _product_state(pol, _MOM_PAIR_PLUS)
    if label.family == "psi":
        state = apply_unitary(state, phase_transfer_plate())
        if label is BellLabel.PSI_MINUS:
            compensator = elements.phase_plate(
                math.pi, elements.ModeFootprint(photon="A", momentum="l")
            )
            state = apply_unitary(state, compensator)
    return state


def prepare_hyperentangled(label: BellLabel) -> StateVector:
    """The analyzer input state for ``label``.

    Returns the textbook product (fixed phase convention), after checking that
    the modeled source chain produces the same ray; the two can differ by a
    global phase, which the chain picks up when compensating the psi- case.
    """
    product = hyperentangled_product(label)
    chain = source_chain(label)
    overlap = abs(chain.overlap(product))
    if abs(overlap - 1.0) > 1e-9:
        raise RuntimeError(
            f"source chain disagrees with the direct product for {label.value}: "
            f"|overlap| = {overlap!r}"
        )
    return product


def single_photon_decomposition(state: StateVector) -> SinglePhotonBellCoeffs:
    """Expansion of a state over per-photon entangled-basis products.

    For the four analyzer input states every nonzero coefficient has magnitude
    1/2, and the 4-entry supports are pairwise disjoint across inputs; this is
    the whole discrimination argument in coefficient form.
    """
    return to_single_photon_bell_basis(state)


@lru_cache(maxsize=1)
def decision_table() -> DecisionTable:
    """Pattern -> label map induced by the analyzer.

    Derived from the coefficient supports of the four input states; the
    per-photon outcomes map to detector patterns via sigma/tau -> H/V and
    +/- -> port u/v.
    """
    mapping: dict[CoincidencePattern, BellLabel] = {}
    for label in LABELS:
        coeffs = single_photon_decomposition(prepare_hyperentangled(label))
        for (lab_a, lab_b), _ in coeffs.nonzero(tol=1e-9):
            mapping[CoincidencePattern.from_single_photon_pair(lab_a, lab_b)] = label
    return DecisionTable(mapping)


def classify(pattern: CoincidencePattern) -> BellLabel:
    """Input label assigned to a coincidence pattern (total function)."""
    return decision_table().label_for(pattern)


def momentum_leakage(rho: DensityOp) -> float:
    """Population on momentum configurations outside the ancilla subspace."""
    pops = rho.populations()
    leak = 0.0
    for idx in range(DIM):
        mom_a = (idx >> 2) & 1
        mom_b = idx & 1
        if mom_a == mom_b:
            leak += float(pops[idx])
    return leak


def analyzer_probabilities_at_visibility(
    rho: DensityOp, vis: float, noise: elements.NoiseParams
) -> Histogram16:
    """Coincidence probabilities with the ancilla coherence given directly.

    Pipeline order: polarization noise, phase transfer plate, ancilla
    dephasing, (possibly unbalanced) beam splitter, then the 16 detection
    projectors.  The returned bins sum to the squared detector efficiency.

    Raises
    ------
    AncillaLeakageError
        If the state entering the beam splitter carries more than 1e-10 of
        momentum population outside the ancilla subspace; such events have no
        detector pattern in this model, so they are an error rather than a
        silently dropped overflow.
    """
    rho = apply_channel(rho, elements.polarization_werner_channel(noise.pol_werner_p))
    rho = apply_unitary(rho, phase_transfer_plate())
    leak = momentum_leakage(rho)
    if leak > ATOL_SPECTRAL:
        raise AncillaLeakageError(
            f"momentum population outside the ancilla subspace: {leak:.3e}"
        )
    rho = apply_channel(rho, elements.delay_dephasing_channel(vis))
    rho = apply_unitary(rho, elements.unbalanced_beam_splitter(noise.bs_imbalance))
    probs = np.empty(DIM)
    for i, proj in enumerate(elements.pbs_detection_operators()):
        probs[i] = float(np.real(np.trace(proj @ rho.matrix)))
    if float(probs.min()) < -1e-14:
        raise RuntimeError(f"Born probability below -1e-14: {probs.min():.3e}")
    probs = np.clip(probs, 0.0, None)
    eta = noise.detector_efficiency
    return Histogram16(probs * eta * eta)


def analyzer_probabilities(rho: DensityOp, config: "AnalyzerConfig") -> Histogram16:
    """Coincidence probabilities for a state under a full bench configuration.

    The delay and filter fields set the ancilla coherence through
    :func:`~hyperbell.elements.visibility`; the remaining knobs are passed on
    unchanged.
    """
    vis = elements.visibility(config.delay_um, config.filter)
    return analyzer_probabilities_at_visibility(rho, vis, config.noise_params)


# Joint-momentum indices of the two ancilla configurations (l r and r l).
_C_COLS = (1, 2)


def bell_ancilla_factorization(state: StateVector, atol: float = 1e-10):
    """Factor a state as (polarization Bell state) x (ancilla qubit).

    Returns ``(label, sign)`` where ``sign`` is the relative phase (+1 or -1)
    between the two ancilla configurations.

    Raises
    ------
    DecompositionError
        If the state leaks outside the ancilla subspace, is not a product
        within ``atol``, or its factors are not a Bell state and a +/- ancilla
        state.
    """
    m = state.amplitudes.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    leak = float(np.linalg.norm(m[:, 0]) ** 2 + np.linalg.norm(m[:, 3]) ** 2)
    if leak > atol:
        raise DecompositionError(f"population outside the ancilla subspace: {leak:.3e}")
    n = m[:, list(_C_COLS)]
    u, s, vh = np.linalg.svd(n)
    if s.shape[0] > 1 and s[1] > atol:
        raise DecompositionError(
            f"state is not a (Bell) x (ancilla) product: second singular value {s[1]:.3e}"
        )
    pol = u[:, 0]
    anc = s[0] * vh[0, :]
    best = None
    for label in LABELS:
        overlap = abs(np.vdot(bell_polarization_vector(label), pol))
        if best is None or overlap > best[1]:
            best = (label, overlap)
    label, overlap = best
    if abs(overlap - 1.0) > math.sqrt(atol):
        raise DecompositionError(
            f"polarization factor is not a Bell state: best overlap {overlap!r}"
        )
    anc = anc / np.linalg.norm(anc)
    if abs(anc[0]) < atol:
        raise DecompositionError("ancilla factor has no weight on the l_A r_B branch")
    anc = anc * (anc[0].conjugate() / abs(anc[0]))
    target = 1.0 / math.sqrt(2.0)
    for sign in (1, -1):
        ref = np.array([target, sign * target])
        if np.max(np.abs(anc - ref)) <= math.sqrt(atol):
            return label, sign
    raise DecompositionError(f"ancilla factor is not a +/- state: {anc!r}")


def ancilla_phase_transfer(label: BellLabel) -> tuple[BellLabel, int]:
    """Polarization label and ancilla sign after the phase transfer plate.

    Feeding the prepared ``label`` state through the plate exchanges the
    families and moves the label's sign onto the ancilla:
    phi+- -> (psi+-, +-) and psi+- -> (phi+-, +-).
    """
    state = apply_unitary(prepare_hyperentangled(label), phase_transfer_plate())
    return bell_ancilla_factorization(state)
