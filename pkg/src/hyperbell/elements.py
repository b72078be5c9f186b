"""Optical elements and noise channels of the analyzer bench.

Constructors here return :class:`~hyperbell.qstate.ElementUnitary` or
:class:`~hyperbell.qstate.KrausChannel` values on the full 16-dimensional
space.  Conventions fixed by this package:

* Half-wave plate at angle ``theta`` applies the Jones matrix
  ``[[cos 2t, sin 2t], [sin 2t, -cos 2t]]`` to the polarization of each
  selected photon, restricted to the selected momentum branch.
* The beam splitter acts per photon on the momentum qubit as the real
  Hadamard ``l -> (u+v)/sqrt2``, ``r -> (u-v)/sqrt2``; the output-port labels
  ``u``/``v`` reuse the ``l``/``r`` index slots.
* The polarizing beam splitters transmit H and reflect V; detection is the
  projective measurement onto the 16 (pol, port) x (pol, port) outcomes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .qstate import DIM, ElementUnitary, KrausChannel

__all__ = [
    "FilterShape",
    "SpectralFilter",
    "ModeFootprint",
    "NoiseParams",
    "half_wave_plate",
    "phase_plate",
    "beam_splitter",
    "unbalanced_beam_splitter",
    "visibility",
    "delay_dephasing_channel",
    "polarization_werner_channel",
    "pbs_detection_operators",
]

_I2 = np.eye(2, dtype=np.complex128)
_PROJ_L = np.diag([1.0, 0.0]).astype(np.complex128)
_PROJ_R = np.diag([0.0, 1.0]).astype(np.complex128)


class FilterShape(Enum):
    GAUSSIAN = "gaussian"
    RECTANGULAR = "rectangular"


@dataclass(frozen=True)
class SpectralFilter:
    """Interference filter in front of the detectors.

    Parameters
    ----------
    center_nm : float
        Central wavelength (default 728 nm, degenerate type-I emission).
    fwhm_nm : float
        Full width at half maximum of the intensity profile.
    shape : FilterShape
        Spectral intensity profile; only the profile shape matters for the
        visibility curve.
    """

    center_nm: float = 728.0
    fwhm_nm: float = 6.0
    shape: FilterShape = FilterShape.GAUSSIAN

    def __post_init__(self) -> None:
        if not self.center_nm > 0:
            raise ValueError("filter center wavelength must be positive")
        if not self.fwhm_nm > 0:
            raise ValueError("filter bandwidth must be positive")
        if not self.fwhm_nm < self.center_nm:
            raise ValueError("filter bandwidth must be below the center wavelength")

    @property
    def coherence_scale_um(self) -> float:
        """Delay scale ``center^2 / fwhm`` in micrometers.

        The visibility argument is ``pi * delay / coherence_scale``; the curve
        depends on the delay only through this ratio.
        """
        return self.center_nm**2 / self.fwhm_nm / 1000.0


@dataclass(frozen=True)
class ModeFootprint:
    """Which photon(s) and which momentum branch an element intercepts."""

    photon: str = "both"  # "A" | "B" | "both"
    momentum: str = "both"  # "l" | "r" | "both"

    def __post_init__(self) -> None:
        if self.photon not in ("A", "B", "both"):
            raise ValueError(f"photon selector must be A, B or both, got {self.photon!r}")
        if self.momentum not in ("l", "r", "both"):
            raise ValueError(f"momentum selector must be l, r or both, got {self.momentum!r}")

    @classmethod
    def r_modes_both(cls) -> "ModeFootprint":
        """Both photons, right-cone modes only (the analyzer plate position)."""
        return cls(photon="both", momentum="r")

    def _selects(self) -> tuple[bool, bool, np.ndarray, np.ndarray]:
        sel_a = self.photon in ("A", "both")
        sel_b = self.photon in ("B", "both")
        if self.momentum == "l":
            p_sel, p_rest = _PROJ_L, _PROJ_R
        elif self.momentum == "r":
            p_sel, p_rest = _PROJ_R, _PROJ_L
        else:
            p_sel, p_rest = _I2, np.zeros((2, 2), dtype=np.complex128)
        return sel_a, sel_b, p_sel, p_rest


@dataclass(frozen=True)
class NoiseParams:
    """Imperfection knobs of the analysis bench.

    ``pol_werner_p`` mixes the polarization input with white noise,
    ``bs_imbalance`` shifts the beam-splitter intensity splitting away from
    50/50, and ``detector_efficiency`` thins all counts uniformly (it scales
    rates and cancels in fidelity ratios).
    """

    pol_werner_p: float = 1.0
    bs_imbalance: float = 0.0
    detector_efficiency: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.pol_werner_p <= 1.0:
            raise ValueError("pol_werner_p must lie in [0, 1]")
        if not -0.5 <= self.bs_imbalance <= 0.5:
            raise ValueError("bs_imbalance must lie in [-0.5, 0.5]")
        if not 0.0 < self.detector_efficiency <= 1.0:
            raise ValueError("detector_efficiency must lie in (0, 1]")


def _per_photon(op_a: np.ndarray, op_b: np.ndarray) -> np.ndarray:
    """Lift per-photon 4x4 operators (pol x mom each) to the full space."""
    return np.kron(op_a, op_b)


def _snap_tiny(x: float, tol: float = 1e-15) -> float:
    """Zero out trig dust so special angles (0, pi/4, ...) act exactly."""
    return 0.0 if abs(x) < tol else x


def half_wave_plate(theta: float, footprint: ModeFootprint) -> ElementUnitary:
    """Half-wave plate at ``theta`` radians on the selected modes.

    Applies the (involutive) Jones matrix to the polarization of each selected
    photon, on the selected momentum branch only; amplitudes outside the
    footprint are untouched.
    """
    c = _snap_tiny(math.cos(2.0 * theta))
    s = _snap_tiny(math.sin(2.0 * theta))
    jones = np.array([[c, s], [s, -c]], dtype=np.complex128)
    sel_a, sel_b, p_sel, p_rest = footprint._selects()

    def photon_op(selected: bool) -> np.ndarray:
        if not selected:
            return np.eye(4, dtype=np.complex128)
        return np.kron(jones, p_sel) + np.kron(_I2, p_rest)

    return ElementUnitary(_per_photon(photon_op(sel_a), photon_op(sel_b)))


def phase_plate(phi: float, footprint: ModeFootprint) -> ElementUnitary:
    """Thin glass plate: multiplies the selected momentum branch by e^{i phi}."""
    sel_a, sel_b, p_sel, p_rest = footprint._selects()
    phase = complex(_snap_tiny(math.cos(phi)), _snap_tiny(math.sin(phi)))

    def photon_op(selected: bool) -> np.ndarray:
        if not selected:
            return np.eye(4, dtype=np.complex128)
        return np.kron(_I2, phase * p_sel + p_rest)

    return ElementUnitary(_per_photon(photon_op(sel_a), photon_op(sel_b)))


def unbalanced_beam_splitter(epsilon: float) -> ElementUnitary:
    """Beam splitter with intensity transmissivity ``1/2 + epsilon``.

    Acts per photon on the momentum qubit as
    ``l -> sqrt(T) u + sqrt(1-T) v``, ``r -> sqrt(1-T) u - sqrt(T) v``;
    unitary for every admissible imbalance and equal to :func:`beam_splitter`
    at ``epsilon = 0``.
    """
    if not -0.5 <= epsilon <= 0.5:
        raise ValueError("beam-splitter imbalance must lie in [-0.5, 0.5]")
    t = math.sqrt(0.5 + epsilon)
    r = math.sqrt(0.5 - epsilon)
    mom = np.array([[t, r], [r, -t]], dtype=np.complex128)
    photon_op = np.kron(_I2, mom)
    return ElementUnitary(_per_photon(photon_op, photon_op))


def beam_splitter() -> ElementUnitary:
    """The balanced analyzer beam splitter (real Hadamard on each momentum qubit)."""
    return unbalanced_beam_splitter(0.0)


def visibility(delay_um: float, filt: SpectralFilter) -> float:
    """Ancilla coherence surviving a path delay of ``delay_um`` micrometers.

    This is the magnitude of the normalized Fourier transform of the filter's
    spectral intensity profile at the given delay: a Gaussian profile decays
    as a Gaussian, a rectangular one as ``|sinc|``.  ``visibility(0) == 1``
    exactly.
    """
    if delay_um < 0:
        raise ValueError("delay must be nonnegative")
    u = math.pi * (delay_um * 1e3) * filt.fwhm_nm / filt.center_nm**2
    if filt.shape is FilterShape.GAUSSIAN:
        return float(math.exp(-(u**2) / (4.0 * math.log(2.0))))
    return float(abs(np.sinc(u / math.pi)))


def _ancilla_sign_flip() -> np.ndarray:
    """Diagonal sign flip on the r_A l_B momentum configurations."""
    diag = np.ones(DIM)
    for idx in range(DIM):
        mom_a = (idx >> 2) & 1
        mom_b = idx & 1
        if (mom_a, mom_b) == (1, 0):
            diag[idx] = -1.0
    return np.diag(diag).astype(np.complex128)


_SIGN_FLIP = _ancilla_sign_flip()


def delay_dephasing_channel(v: float) -> KrausChannel:
    """Phase damping between the two momentum-pair configurations.

    Coherences between ``l_A r_B`` and ``r_A l_B`` are multiplied by ``v``;
    populations and the polarization factors are untouched.  Composing two of
    these multiplies the surviving coherences, so
    ``channel(v) o channel(w) == channel(v*w)``.
    """
    if not 0.0 <= v <= 1.0:
        raise ValueError("visibility must lie in [0, 1]")
    k0 = math.sqrt((1.0 + v) / 2.0) * np.eye(DIM, dtype=np.complex128)
    k1 = math.sqrt((1.0 - v) / 2.0) * _SIGN_FLIP
    return KrausChannel((k0, k1))


_PAULIS = (
    np.eye(2, dtype=np.complex128),
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)


def polarization_werner_channel(p: float) -> KrausChannel:
    """Isotropic polarization noise: ``rho_pol -> p rho_pol + (1-p) I/4``.

    Realized as a mixture of the 16 two-qubit Pauli products acting on the
    two polarization factors (identity on momentum).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("werner parameter must lie in [0, 1]")
    ops = []
    for i, pa in enumerate(_PAULIS):
        for j, pb in enumerate(_PAULIS):
            weight = (1.0 - p) / 16.0
            if i == 0 and j == 0:
                weight += p
            full = np.kron(np.kron(pa, _I2), np.kron(pb, _I2))
            ops.append(math.sqrt(weight) * full)
    return KrausChannel(tuple(ops))


def pbs_detection_operators() -> list[np.ndarray]:
    """The 16 rank-1 coincidence projectors ``|polA,portA,polB,portB><...|``.

    Ordered by the global basis index (port labels in the momentum slots);
    they sum to the identity.
    """
    ops = []
    for idx in range(DIM):
        proj = np.zeros((DIM, DIM), dtype=np.complex128)
        proj[idx, idx] = 1.0
        ops.append(proj)
    return ops
