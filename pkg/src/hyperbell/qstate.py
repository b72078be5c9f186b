"""Linear-algebra core for two-photon polarization/momentum states.

Everything in this package lives on a fixed 16-dimensional Hilbert space:
two photons (A and B), each carrying a polarization qubit and a linear-momentum
qubit.  The global computational basis is ordered as

    index = 8*polA + 4*momA + 2*polB + momB

with polarization ``H = 0``, ``V = 1`` and momentum modes ``l = 0``, ``r = 1``
(left/right emission cone mode).  After the analyzing beam splitter the
momentum slots are reused for the output-port labels ``u = 0``, ``v = 1``.

The module provides value-semantic wrappers (:class:`StateVector`,
:class:`DensityOp`, :class:`ElementUnitary`, :class:`KrausChannel`) plus the
two basis changes the analyzer relies on: the per-photon entangled
polarization/momentum basis (sigma/tau states) and the momentum-pair ancilla
qubit spanned by ``|l>_A |r>_B`` and ``|r>_A |l>_B``.

All values are immutable after construction and every operation is a pure
function, so instances are safe to share between threads or workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "DIM",
    "N_FACTORS",
    "ATOL_ALGEBRAIC",
    "ATOL_SPECTRAL",
    "SINGLE_PHOTON_BELL_LABELS",
    "Subsystem",
    "StateVector",
    "DensityOp",
    "ElementUnitary",
    "KrausChannel",
    "SinglePhotonBellCoeffs",
    "AncillaC",
    "ZeroVectorError",
    "NonCPTPError",
    "basis_index",
    "make_basis_state",
    "superpose",
    "apply_unitary",
    "apply_channel",
    "partial_trace",
    "fidelity_pure",
    "to_single_photon_bell_basis",
    "from_single_photon_bell_basis",
    "extract_ancilla_c",
]

#: Total dimension of the two-photon (pol x mom) x (pol x mom) space.
DIM = 16

#: Number of two-dimensional tensor factors.
N_FACTORS = 4

#: Tolerance for algebraic identities (norms, unitarity, hermiticity).
ATOL_ALGEBRAIC = 1e-12

#: Tolerance for spectral conditions (positivity, Kraus completeness).
ATOL_SPECTRAL = 1e-10

#: Outcome ordering for the per-photon entangled basis; "sigma" states carry
#: H on the l mode, "tau" states carry V on the l mode, the sign is the
#: relative phase of the r-mode component.
SINGLE_PHOTON_BELL_LABELS = ("σ+", "σ-", "τ+", "τ-")

_POL = {"H": 0, "V": 1}
_MOM = {"l": 0, "r": 1}


class ZeroVectorError(ValueError):
    """Raised when a superposition cancels to (numerically) zero."""


class NonCPTPError(ValueError):
    """Raised when a Kraus operator set fails trace preservation."""


class Subsystem(Enum):
    """The four tensor factors, in global ordering."""

    POL_A = 0
    MOM_A = 1
    POL_B = 2
    MOM_B = 3


def _max_abs(m: np.ndarray) -> float:
    return float(np.max(np.abs(m))) if m.size else 0.0


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class StateVector:
    """A normalized pure state of the two-photon system.

    Parameters
    ----------
    amplitudes : array_like
        16 complex amplitudes in the documented basis order.  The norm must
        already be 1 (within 1e-9); use :func:`superpose` to build normalized
        combinations.  Global phases are preserved, never stripped.
    """

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1).copy()
        if amps.shape != (DIM,):
            raise ValueError(f"state vector must have {DIM} amplitudes, got {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state vector must be normalized, got norm {norm!r}")
        object.__setattr__(self, "amplitudes", _freeze(amps))

    def norm(self) -> float:
        """2-norm of the amplitude vector (1 by construction)."""
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "StateVector") -> complex:
        """Inner product ``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_density(self) -> "DensityOp":
        """Rank-1 projector ``|psi><psi|`` as a :class:`DensityOp`."""
        return DensityOp(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityOp:
    """A density operator on the 16-dimensional space.

    Construction validates hermiticity (1e-12), unit trace (1e-12) and
    positive semidefiniteness (eigenvalues >= -1e-10); the stored matrix is
    the hermitized copy of the input.
    """

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (DIM, DIM):
            raise ValueError(f"density operator must be {DIM}x{DIM}, got {m.shape}")
        if _max_abs(m - m.conj().T) > ATOL_ALGEBRAIC:
            raise ValueError("density operator is not Hermitian within 1e-12")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > ATOL_ALGEBRAIC:
            raise ValueError(f"density operator trace must be 1, got {tr!r}")
        m = (m + m.conj().T) / 2.0
        if float(np.min(np.linalg.eigvalsh(m))) < -ATOL_SPECTRAL:
            raise ValueError("density operator has an eigenvalue below -1e-10")
        object.__setattr__(self, "matrix", _freeze(m))

    def populations(self) -> np.ndarray:
        """Diagonal of the density matrix (real, nonnegative up to 1e-10)."""
        return np.real(np.diagonal(self.matrix)).copy()


@dataclass(frozen=True, eq=False)
class ElementUnitary:
    """A 16x16 unitary together with its tensor-factor footprint.

    The footprint is derived from the matrix itself: a factor is outside the
    footprint exactly when the unitary factors as identity on it.
    """

    matrix: np.ndarray
    footprint: frozenset = frozenset()

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (DIM, DIM):
            raise ValueError(f"element unitary must be {DIM}x{DIM}, got {m.shape}")
        dev = _max_abs(m.conj().T @ m - np.eye(DIM))
        if dev > ATOL_ALGEBRAIC:
            raise ValueError(f"matrix is not unitary: max |U^dag U - I| = {dev:.3e}")
        object.__setattr__(self, "matrix", _freeze(m.copy()))
        object.__setattr__(self, "footprint", frozenset(_nontrivial_factors(m)))


def _nontrivial_factors(u: np.ndarray) -> Iterable[Subsystem]:
    """Factors on which ``u`` does not act as identity."""
    t = u.reshape((2,) * (2 * N_FACTORS))
    for sub in Subsystem:
        k = sub.value
        # Move the row and column axes of this factor to the front.
        v = np.moveaxis(t, (k, N_FACTORS + k), (0, 1))
        v = v.reshape(2, 2, -1)
        off = max(_max_abs(v[0, 1]), _max_abs(v[1, 0]))
        diag = _max_abs(v[0, 0] - v[1, 1])
        if off > ATOL_ALGEBRAIC or diag > ATOL_ALGEBRAIC:
            yield sub


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A CPTP map given by explicit Kraus operators on the full space."""

    operators: tuple

    def __post_init__(self) -> None:
        ops = []
        for k in self.operators:
            k = np.asarray(k, dtype=np.complex128)
            if k.shape != (DIM, DIM):
                raise ValueError(f"Kraus operators must be {DIM}x{DIM}, got {k.shape}")
            ops.append(_freeze(k.copy()))
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        object.__setattr__(self, "operators", tuple(ops))
        dev = self.completeness_defect()
        if dev > ATOL_SPECTRAL:
            raise NonCPTPError(f"Kraus set is not trace preserving: defect {dev:.3e}")

    def completeness_defect(self) -> float:
        """Max-abs deviation of ``sum_k K^dag K`` from the identity."""
        acc = np.zeros((DIM, DIM), dtype=np.complex128)
        for k in self.operators:
            acc += k.conj().T @ k
        return _max_abs(acc - np.eye(DIM))


@dataclass(frozen=True, eq=False)
class SinglePhotonBellCoeffs:
    """Expansion coefficients in the per-photon entangled basis.

    ``coeffs[a, b]`` multiplies the product of outcome ``a`` on photon A and
    outcome ``b`` on photon B, with outcomes ordered as
    :data:`SINGLE_PHOTON_BELL_LABELS`.
    """

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (4, 4):
            raise ValueError(f"coefficients must be 4x4, got {c.shape}")
        object.__setattr__(self, "coeffs", _freeze(c.copy()))

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def nonzero(self, tol: float = 1e-9):
        """Yield ``((label_a, label_b), coefficient)`` for entries above tol."""
        for a in range(4):
            for b in range(4):
                c = complex(self.coeffs[a, b])
                if abs(c) > tol:
                    labels = (SINGLE_PHOTON_BELL_LABELS[a], SINGLE_PHOTON_BELL_LABELS[b])
                    yield labels, c


@dataclass(frozen=True)
class AncillaC:
    """The momentum-pair ancilla content of a state.

    ``amp0``/``amp1`` weight the configurations ``|l>_A |r>_B`` and
    ``|r>_A |l>_B``; their squared magnitudes are the populations.  The
    relative phase ``amp1/amp0`` is meaningful only when the state factors
    into (polarization) x (ancilla); ``leakage`` is the population on the
    remaining momentum configurations.
    """

    amp0: complex
    amp1: complex
    leakage: float


def basis_index(pol_a: str, mom_a: str, pol_b: str, mom_b: str) -> int:
    """Global basis index for a (polA, momA, polB, momB) configuration."""
    try:
        return 8 * _POL[pol_a] + 4 * _MOM[mom_a] + 2 * _POL[pol_b] + _MOM[mom_b]
    except KeyError as exc:
        raise ValueError(f"invalid basis label {exc.args[0]!r}; use H/V and l/r") from exc


def make_basis_state(pol_a: str, mom_a: str, pol_b: str, mom_b: str) -> StateVector:
    """Computational basis vector for the given single-photon labels."""
    amps = np.zeros(DIM, dtype=np.complex128)
    amps[basis_index(pol_a, mom_a, pol_b, mom_b)] = 1.0
    return StateVector(amps)


def superpose(terms: Sequence[tuple]) -> StateVector:
    """Normalized linear combination of weighted states.

    Parameters
    ----------
    terms : sequence of (complex, StateVector)
        At least one term.  The result is renormalized exactly.

    Raises
    ------
    ZeroVectorError
        If the combination cancels below norm 1e-12.
    """
    if not terms:
        raise ValueError("superpose needs at least one term")
    acc = np.zeros(DIM, dtype=np.complex128)
    for coeff, state in terms:
        acc += complex(coeff) * state.amplitudes
    norm = np.linalg.norm(acc)
    if norm < ATOL_ALGEBRAIC:
        raise ZeroVectorError("superposition cancelled to the zero vector")
    return StateVector(acc / norm)


def apply_unitary(
    state: Union[StateVector, DensityOp], u: ElementUnitary
) -> Union[StateVector, DensityOp]:
    """``U|psi>`` for pure states or ``U rho U^dag`` for density operators."""
    if isinstance(state, StateVector):
        return StateVector(u.matrix @ state.amplitudes)
    if isinstance(state, DensityOp):
        return DensityOp(u.matrix @ state.matrix @ u.matrix.conj().T)
    raise TypeError(f"expected StateVector or DensityOp, got {type(state).__name__}")


def apply_channel(rho: DensityOp, channel: KrausChannel) -> DensityOp:
    """Apply ``sum_k K rho K^dag``.

    Raises
    ------
    NonCPTPError
        If the operator set violates trace preservation beyond 1e-10.
    """
    dev = channel.completeness_defect()
    if dev > ATOL_SPECTRAL:
        raise NonCPTPError(f"Kraus set is not trace preserving: defect {dev:.3e}")
    out = np.zeros((DIM, DIM), dtype=np.complex128)
    for k in channel.operators:
        out += k @ rho.matrix @ k.conj().T
    return DensityOp(out)


def partial_trace(rho: DensityOp, keep: Iterable[Subsystem]) -> np.ndarray:
    """Reduced density matrix on the kept factors (in global factor order).

    Returns a plain ``2^k x 2^k`` complex array; the wrapper types are
    reserved for the full 16-dimensional space.
    """
    kept = sorted({s.value for s in keep})
    if not kept:
        raise ValueError("keep must name at least one subsystem")
    t = rho.matrix.reshape((2,) * (2 * N_FACTORS))
    row = list("abcd")
    col = list("efgh")
    for k in range(N_FACTORS):
        if k not in kept:
            col[k] = row[k]
    out = "".join(row[k] for k in kept) + "".join(col[k] for k in kept)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    d = 2 ** len(kept)
    return reduced.reshape(d, d)


def fidelity_pure(rho: DensityOp, target: StateVector) -> float:
    """``<target| rho |target>`` as a real number in [0, 1].

    Insensitive to global phases of either argument.
    """
    val = complex(np.vdot(target.amplitudes, rho.matrix @ target.amplitudes))
    if abs(val.imag) > ATOL_ALGEBRAIC:
        raise ValueError(f"fidelity came out non-real: {val!r}")
    return min(max(val.real, 0.0), 1.0)


def _single_photon_bell_matrix() -> np.ndarray:
    """Rows are the per-photon entangled basis bras over (pol, mom)."""
    s = 1.0 / np.sqrt(2.0)
    # Per-photon basis order: Hl, Hr, Vl, Vr.
    return np.array(
        [
            [s, 0.0, 0.0, s],   # σ+ = (Hl + Vr)/sqrt2
            [s, 0.0, 0.0, -s],  # σ- = (Hl - Vr)/sqrt2
            [0.0, s, s, 0.0],   # τ+ = (Vl + Hr)/sqrt2
            [0.0, -s, s, 0.0],  # τ- = (Vl - Hr)/sqrt2
        ]
    )


_SPB = _single_photon_bell_matrix()
_SPB_TWO_PHOTON = np.kron(_SPB, _SPB)


def to_single_photon_bell_basis(state: StateVector) -> SinglePhotonBellCoeffs:
    """Expand a state in products of per-photon entangled basis states.

    The change of basis is unitary, so the coefficient matrix has unit
    Frobenius norm for a normalized input.
    """
    coeffs = (_SPB_TWO_PHOTON @ state.amplitudes).reshape(4, 4)
    return SinglePhotonBellCoeffs(coeffs)


def from_single_photon_bell_basis(coeffs: SinglePhotonBellCoeffs) -> StateVector:
    """Inverse of :func:`to_single_photon_bell_basis`."""
    amps = _SPB_TWO_PHOTON.T.conj() @ coeffs.coeffs.reshape(-1)
    return StateVector(amps)


def _pol_by_momentum_matrix(state: StateVector) -> np.ndarray:
    """Amplitudes as a (joint polarization) x (joint momentum) matrix."""
    t = state.amplitudes.reshape(2, 2, 2, 2)  # polA, momA, polB, momB
    return t.transpose(0, 2, 1, 3).reshape(4, 4)


# Joint-momentum column indices of the ancilla configurations.
_C0_COL = 1  # l_A r_B
_C1_COL = 2  # r_A l_B


def extract_ancilla_c(state: StateVector) -> AncillaC:
    """Project a state onto the momentum-pair ancilla qubit.

    The two ancilla weights aggregate over polarization: magnitudes are the
    square roots of the configuration populations, and the phase of ``amp1``
    relative to ``amp0`` is read off the polarization overlap between the two
    configuration branches (exact whenever the state is a polarization x
    ancilla product).
    """
    m = _pol_by_momentum_matrix(state)
    c0 = m[:, _C0_COL]
    c1 = m[:, _C1_COL]
    w0 = float(np.linalg.norm(c0))
    w1 = float(np.linalg.norm(c1))
    leakage = float(np.linalg.norm(m[:, 0]) ** 2 + np.linalg.norm(m[:, 3]) ** 2)
    if w0 > ATOL_ALGEBRAIC and w1 > ATOL_ALGEBRAIC:
        cross = complex(np.vdot(c0, c1))
        phase = cross / abs(cross) if abs(cross) > ATOL_ALGEBRAIC else 1.0
    else:
        phase = 1.0
    return AncillaC(amp0=complex(w0), amp1=complex(w1 * phase), leakage=leakage)
