"""Counting statistics on top of the analyzer pipeline.

Coincidence counting is modeled as a Poisson process: the total number of
events in an acquisition window is Poisson with mean
``efficiency^2 * rate * time`` and the events fall into the 16 bins
multinomially.  Sampling uses NumPy's seedable PCG64 generator
(``numpy.random.default_rng``) with the multinomial drawn by inverse CDF, so
identical (config, seed) pairs give bit-identical outputs.  Matrix rows and
sweep points each derive an independent stream from the base seed, which
keeps results order-independent when points are evaluated concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .apparatus import (
    LABELS,
    BellLabel,
    Histogram16,
    analyzer_probabilities,
    analyzer_probabilities_at_visibility,
    decision_table,
    prepare_hyperentangled,
)
from .elements import NoiseParams, SpectralFilter, visibility

__all__ = [
    "AnalyzerConfig",
    "FidelityEstimate",
    "SweepPoint",
    "SweepResult",
    "EmptyHistogramError",
    "simulate_counts",
    "fidelity_from_counts",
    "run_full_analysis",
    "sweep_delay",
    "calibrate_pol_noise",
]


class EmptyHistogramError(ValueError):
    """Raised when a fidelity is requested from a histogram with zero counts."""


@dataclass(frozen=True)
class AnalyzerConfig:
    """Full description of one analyzer run.

    Defaults are the ideal bench at zero delay with a 6 nm Gaussian filter at
    728 nm, 1000 events/s for 10 s, seed 0.
    """

    delay_um: float = 0.0
    filter: SpectralFilter = field(default_factory=SpectralFilter)
    pol_werner_p: float = 1.0
    bs_imbalance: float = 0.0
    detector_efficiency: float = 1.0
    count_rate_hz: float = 1000.0
    acquisition_s: float = 10.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.delay_um < 0:
            raise ValueError("delay_um must be nonnegative")
        # Range-checks the three noise knobs.
        self.noise_params
        if not self.count_rate_hz > 0:
            raise ValueError("count_rate_hz must be positive")
        if not self.acquisition_s > 0:
            raise ValueError("acquisition_s must be positive")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")

    @property
    def noise_params(self) -> NoiseParams:
        return NoiseParams(
            pol_werner_p=self.pol_werner_p,
            bs_imbalance=self.bs_imbalance,
            detector_efficiency=self.detector_efficiency,
        )


@dataclass(frozen=True)
class FidelityEstimate:
    """A classification fraction with its binomial standard error."""

    value: float
    std_error: float
    n_events: int


@dataclass(frozen=True)
class SweepPoint:
    """One delay setting: coherence, per-label estimates, and the closed-form
    (1 +/- V)/2 expectations for the injected label and its phase partner."""

    delay_um: float
    visibility: float
    fidelities: Mapping
    analytic_plus: float
    analytic_minus: float


@dataclass(frozen=True)
class SweepResult:
    """Delay sweep output for a fixed injected label."""

    input_label: BellLabel
    points: tuple


# Stream-domain tags so different sampling surfaces never share a stream.
STREAM_MATRIX = 1
STREAM_SWEEP = 2
STREAM_SINGLE = 3


def derive_stream(seed: int, domain: int, index: int) -> np.random.SeedSequence:
    """Independent child stream for (base seed, surface, point index)."""
    return np.random.SeedSequence(entropy=[int(seed), int(domain), int(index)])


def simulate_counts(probs: Histogram16, rate_hz: float, duration_s: float, seed) -> Histogram16:
    """Sample a counts histogram from a probability histogram.

    The total is Poisson with mean ``rate * time * sum(probs)`` (detector
    thinning is already inside the probabilities), and the bins are
    multinomial via inverse CDF.  ``seed`` may be an integer or a
    ``numpy.random.SeedSequence``; equal seeds give identical counts.
    """
    if not rate_hz > 0 or not duration_s > 0:
        raise ValueError("rate and duration must be positive")
    if rate_hz * duration_s < 1.0:
        raise ValueError("rate * duration must be at least one expected event")
    rng = np.random.default_rng(seed)
    total_prob = probs.total()
    n = int(rng.poisson(rate_hz * duration_s * total_prob))
    counts = np.zeros(16, dtype=np.int64)
    if n > 0:
        cdf = np.cumsum(probs.bins / total_prob)
        cdf[-1] = max(cdf[-1], 1.0)
        draws = np.searchsorted(cdf, rng.random(n), side="right")
        counts = np.bincount(np.minimum(draws, 15), minlength=16).astype(np.int64)
    return Histogram16(counts)


def fidelity_from_counts(counts: Histogram16, assumed_input: BellLabel) -> FidelityEstimate:
    """Fraction of events in the bins assigned to ``assumed_input``.

    The standard error is the binomial ``sqrt(F (1-F) / N)``; it reflects
    counting statistics only.
    """
    total = counts.total()
    if total <= 0:
        raise EmptyHistogramError("cannot estimate a fidelity from zero counts")
    in_set = sum(counts.value(p) for p in decision_table().patterns_for(assumed_input))
    f = in_set / total
    return FidelityEstimate(
        value=f,
        std_error=math.sqrt(f * (1.0 - f) / total),
        n_events=int(total),
    )


def run_full_analysis(config: AnalyzerConfig) -> dict:
    """Input-output fidelity matrix over the four labels.

    For each injected label the prepared state runs through the analyzer, a
    counts histogram is sampled, and the fraction classified as each label is
    estimated.  Rows are dicts keyed by output label; each row sums to 1
    because the decision table partitions the bins.
    """
    matrix = {}
    for i, label in enumerate(LABELS):
        probs = analyzer_probabilities(prepare_hyperentangled(label).to_density(), config)
        counts = simulate_counts(
            probs,
            config.count_rate_hz,
            config.acquisition_s,
            derive_stream(config.seed, STREAM_MATRIX, i),
        )
        matrix[label] = {out: fidelity_from_counts(counts, out) for out in LABELS}
    return matrix


def sweep_delay(
    config: AnalyzerConfig,
    delays_um: Sequence[float],
    input_label: BellLabel = BellLabel.PSI_PLUS,
) -> SweepResult:
    """Fidelity estimates versus path delay for one injected label.

    Each point carries the exact ancilla coherence ``V`` used for the
    histogram, sampled estimates for all four output labels, and the
    closed-form expectations ``(1+V)/2`` (injected label) and ``(1-V)/2``
    (its phase partner) that hold when only the delay knob is active.
    """
    if len(delays_um) == 0:
        raise ValueError("the delay list must not be empty")
    rho = prepare_hyperentangled(input_label).to_density()
    noise = config.noise_params
    points = []
    for i, delay in enumerate(delays_um):
        vis = visibility(float(delay), config.filter)
        probs = analyzer_probabilities_at_visibility(rho, vis, noise)
        counts = simulate_counts(
            probs,
            config.count_rate_hz,
            config.acquisition_s,
            derive_stream(config.seed, STREAM_SWEEP, i),
        )
        estimates = {out: fidelity_from_counts(counts, out) for out in LABELS}
        points.append(
            SweepPoint(
                delay_um=float(delay),
                visibility=vis,
                fidelities=estimates,
                analytic_plus=(1.0 + vis) / 2.0,
                analytic_minus=(1.0 - vis) / 2.0,
            )
        )
    return SweepResult(input_label=input_label, points=tuple(points))


def calibrate_pol_noise(target_avg_fidelity: float) -> float:
    """Werner parameter reproducing a target classification fidelity.

    Inverts the mixing law ``F = p + (1-p)/4``, so ``p = (4F - 1)/3``.  The
    admissible targets run from 1/4 (fully mixed) to 1 (ideal).
    """
    if not 0.25 <= target_avg_fidelity <= 1.0:
        raise ValueError("target fidelity must lie in [0.25, 1]")
    return (4.0 * target_avg_fidelity - 1.0) / 3.0
