"""Deterministic polarization Bell-state analysis with a momentum ancilla.

A small NumPy library that models a linear-optics analyzer for the four
maximally entangled polarization states of a photon pair.  The pair is
prepared entangled in both polarization and linear momentum; the fixed
momentum-pair state serves as an ancilla that makes the polarization
measurement complete and deterministic.  The package covers the state
algebra, the optical elements and their noise channels, the analyzer
pipeline with its 16-bin coincidence decision table, and seeded Monte Carlo
counting statistics, plus a CLI for running analyses and delay sweeps.
"""

from .apparatus import (
    ALL_PATTERNS,
    LABELS,
    AncillaLeakageError,
    BellLabel,
    CoincidencePattern,
    DecisionTable,
    DecompositionError,
    Histogram16,
    analyzer_probabilities,
    analyzer_probabilities_at_visibility,
    ancilla_phase_transfer,
    bell_polarization_vector,
    classify,
    decision_table,
    hyperentangled_product,
    phase_transfer_plate,
    prepare_hyperentangled,
    single_photon_decomposition,
    source_chain,
)
from .elements import (
    FilterShape,
    ModeFootprint,
    NoiseParams,
    SpectralFilter,
    beam_splitter,
    delay_dephasing_channel,
    half_wave_plate,
    pbs_detection_operators,
    phase_plate,
    polarization_werner_channel,
    unbalanced_beam_splitter,
    visibility,
)
from .experiment import (
    AnalyzerConfig,
    EmptyHistogramError,
    FidelityEstimate,
    SweepPoint,
    SweepResult,
    calibrate_pol_noise,
    fidelity_from_counts,
    run_full_analysis,
    simulate_counts,
    sweep_delay,
)
from .qstate import (
    DIM,
    SINGLE_PHOTON_BELL_LABELS,
    AncillaC,
    DensityOp,
    ElementUnitary,
    KrausChannel,
    NonCPTPError,
    SinglePhotonBellCoeffs,
    StateVector,
    Subsystem,
    ZeroVectorError,
    apply_channel,
    apply_unitary,
    extract_ancilla_c,
    fidelity_pure,
    from_single_photon_bell_basis,
    make_basis_state,
    partial_trace,
    superpose,
    to_single_photon_bell_basis,
)

__version__ = "0.1.0"
