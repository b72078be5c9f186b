"""Optical elements, noise channels and the visibility curve."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from hyperbell import apparatus
from hyperbell.elements import (
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
from hyperbell.qstate import (
    DIM,
    StateVector,
    apply_channel,
    apply_unitary,
    basis_index,
    make_basis_state,
    superpose,
)

SQ2 = math.sqrt(2.0)

# Regression constant for the gaussian visibility one coherence scale out
# (delay = center^2 / fwhm), frozen from the quadrature oracle below.
VISIBILITY_AT_COHERENCE_SCALE = 0.028447149087636


def oracle_visibility(delay_um, filt: SpectralFilter) -> float:
    """Magnitude of the normalized Fourier transform of the spectral
    intensity profile, by direct quadrature in the dimensionless detuning
    x = (frequency offset)/(fwhm); 2*u*x is the transform phase with
    u = pi * delay * fwhm_nm / center_nm^2."""
    u = math.pi * (delay_um * 1e3) * filt.fwhm_nm / filt.center_nm**2
    if filt.shape is FilterShape.GAUSSIAN:
        profile = lambda x: math.exp(-4.0 * math.log(2.0) * x * x)
        lim = 8.0
    else:
        profile = lambda x: 1.0
        lim = 0.5
    re, _ = quad(lambda x: profile(x) * math.cos(2.0 * u * x), -lim, lim, limit=400)
    im, _ = quad(lambda x: profile(x) * math.sin(2.0 * u * x), -lim, lim, limit=400)
    norm, _ = quad(profile, -lim, lim)
    return math.hypot(re, im) / norm


def mode_pair_state(sign: float) -> StateVector:
    """(|l r> + sign |r l>)/sqrt2 in momentum, both photons H."""
    return superpose(
        [
            (1 / SQ2, make_basis_state("H", "l", "H", "r")),
            (sign / SQ2, make_basis_state("H", "r", "H", "l")),
        ]
    )


# --- half-wave plate ---


def test_plate_at_45_flips_polarization_on_r_modes():
    plate = half_wave_plate(math.pi / 4, ModeFootprint.r_modes_both())
    out = apply_unitary(make_basis_state("H", "r", "H", "l"), plate)
    # photon B sits on the l mode, so only photon A flips
    expected = make_basis_state("V", "r", "H", "l")
    np.testing.assert_allclose(out.amplitudes, expected.amplitudes, atol=1e-12)


def test_plate_leaves_l_modes_untouched():
    plate = half_wave_plate(math.pi / 4, ModeFootprint.r_modes_both())
    state = make_basis_state("H", "l", "V", "l")
    out = apply_unitary(state, plate)
    np.testing.assert_allclose(out.amplitudes, state.amplitudes, atol=0)


def test_plate_at_zero_is_polarization_sign_flip():
    plate = half_wave_plate(0.0, ModeFootprint("A", "both"))
    h_state = make_basis_state("H", "l", "H", "l")
    v_state = make_basis_state("V", "l", "H", "l")
    np.testing.assert_allclose(
        apply_unitary(h_state, plate).amplitudes, h_state.amplitudes, atol=0
    )
    np.testing.assert_allclose(
        apply_unitary(v_state, plate).amplitudes, -v_state.amplitudes, atol=0
    )


@pytest.mark.parametrize("theta", [0.0, 0.2, math.pi / 4, 1.0, 2.7])
def test_plate_is_involution(theta):
    plate = half_wave_plate(theta, ModeFootprint.r_modes_both())
    np.testing.assert_allclose(plate.matrix @ plate.matrix, np.eye(DIM), atol=1e-12)


@pytest.mark.parametrize("photon", ["A", "B", "both"])
@pytest.mark.parametrize("momentum", ["l", "r", "both"])
def test_plate_identity_outside_footprint(photon, momentum):
    plate = half_wave_plate(0.9, ModeFootprint(photon, momentum))
    for idx in range(DIM):
        amps = np.zeros(DIM, dtype=complex)
        amps[idx] = 1.0
        out = apply_unitary(StateVector(amps), plate).amplitudes
        mom_a = "lr"[(idx >> 2) & 1]
        mom_b = "lr"[idx & 1]
        a_hit = photon in ("A", "both") and momentum in (mom_a, "both")
        b_hit = photon in ("B", "both") and momentum in (mom_b, "both")
        if not a_hit and not b_hit:
            np.testing.assert_allclose(out, amps, atol=0)


def test_single_photon_basis_states_map_to_separable_form():
    # The 45-degree r-mode plate turns each per-photon entangled state into
    # a fixed polarization times (l +/- r)/sqrt2, for either photon.
    plate = apparatus.phase_transfer_plate()
    cases = []
    for photon in ("A", "B"):
        for fam, pol in (("σ", "H"), ("τ", "V")):
            for sign_label, sign in (("+", 1.0), ("-", -1.0)):
                cases.append((photon, fam + sign_label, pol, sign))
    for photon, label, pol, sign in cases:
        first = ("H", "l") if label.startswith("σ") else ("V", "l")
        second = ("V", "r") if label.startswith("σ") else ("H", "r")
        if photon == "A":
            state = superpose(
                [
                    (1 / SQ2, make_basis_state(*first, "H", "l")),
                    (sign / SQ2, make_basis_state(*second, "H", "l")),
                ]
            )
            expected = superpose(
                [
                    (1 / SQ2, make_basis_state(pol, "l", "H", "l")),
                    (sign / SQ2, make_basis_state(pol, "r", "H", "l")),
                ]
            )
        else:
            state = superpose(
                [
                    (1 / SQ2, make_basis_state("H", "l", *first)),
                    (sign / SQ2, make_basis_state("H", "l", *second)),
                ]
            )
            expected = superpose(
                [
                    (1 / SQ2, make_basis_state("H", "l", pol, "l")),
                    (sign / SQ2, make_basis_state("H", "l", pol, "r")),
                ]
            )
        out = apply_unitary(state, plate)
        np.testing.assert_allclose(out.amplitudes, expected.amplitudes, atol=1e-12)


# --- phase plate ---


def test_pi_phase_on_l_a_swaps_mode_pair_sign():
    plate = phase_plate(math.pi, ModeFootprint("A", "l"))
    out = apply_unitary(mode_pair_state(-1.0), plate)
    target = mode_pair_state(+1.0)
    overlap = abs(np.vdot(out.amplitudes, target.amplitudes))
    assert abs(overlap - 1.0) < 1e-12


def test_zero_phase_plate_is_identity():
    plate = phase_plate(0.0, ModeFootprint("A", "l"))
    np.testing.assert_allclose(plate.matrix, np.eye(DIM), atol=0)


def test_pi_phase_applied_twice_is_identity_up_to_phase():
    plate = phase_plate(math.pi, ModeFootprint("A", "l"))
    state = mode_pair_state(-1.0)
    twice = apply_unitary(apply_unitary(state, plate), plate)
    overlap = abs(np.vdot(twice.amplitudes, state.amplitudes))
    assert abs(overlap - 1.0) < 1e-12


# --- beam splitter ---


def test_splitter_sends_symmetric_momentum_to_u():
    state = superpose(
        [
            (1 / SQ2, make_basis_state("H", "l", "H", "l")),
            (1 / SQ2, make_basis_state("H", "r", "H", "l")),
        ]
    )
    out = apply_unitary(state, beam_splitter())
    # photon A now sits entirely on port u; photon B (mode l) splits in two
    expected = superpose(
        [
            (1 / SQ2, make_basis_state("H", "l", "H", "l")),
            (1 / SQ2, make_basis_state("H", "l", "H", "r")),
        ]
    )
    np.testing.assert_allclose(out.amplitudes, expected.amplitudes, atol=1e-12)


def test_splitter_on_symmetric_mode_pair():
    out = apply_unitary(mode_pair_state(+1.0), beam_splitter())
    expected = superpose(
        [
            (1 / SQ2, make_basis_state("H", "l", "H", "l")),
            (-1 / SQ2, make_basis_state("H", "r", "H", "r")),
        ]
    )
    np.testing.assert_allclose(out.amplitudes, expected.amplitudes, atol=1e-12)


def test_splitter_on_antisymmetric_mode_pair():
    out = apply_unitary(mode_pair_state(-1.0), beam_splitter())
    expected = superpose(
        [
            (1 / SQ2, make_basis_state("H", "r", "H", "l")),
            (-1 / SQ2, make_basis_state("H", "l", "H", "r")),
        ]
    )
    overlap = abs(np.vdot(out.amplitudes, expected.amplitudes))
    assert abs(overlap - 1.0) < 1e-12


def test_unbalanced_splitter_matches_balanced_at_zero():
    np.testing.assert_array_equal(
        unbalanced_beam_splitter(0.0).matrix, beam_splitter().matrix
    )


def test_fully_unbalanced_splitter_passes_straight_through():
    u = unbalanced_beam_splitter(0.5)
    ell = make_basis_state("H", "l", "H", "l")
    np.testing.assert_allclose(apply_unitary(ell, u).amplitudes, ell.amplitudes, atol=0)
    r_state = make_basis_state("H", "r", "H", "l")
    np.testing.assert_allclose(
        apply_unitary(r_state, u).amplitudes, -r_state.amplitudes, atol=0
    )


def test_imbalance_degrades_classification():
    table = apparatus.decision_table()
    rho = apparatus.prepare_hyperentangled(apparatus.BellLabel.PSI_PLUS).to_density()
    hist = apparatus.analyzer_probabilities_at_visibility(
        rho, 1.0, NoiseParams(bs_imbalance=0.1)
    )
    fid = sum(hist.value(p) for p in table.patterns_for(apparatus.BellLabel.PSI_PLUS))
    assert fid < 1.0 - 1e-6


@pytest.mark.parametrize("eps", [-0.5, -0.3, 0.0, 0.12, 0.5])
def test_unbalanced_splitter_is_unitary(eps):
    u = unbalanced_beam_splitter(eps).matrix
    np.testing.assert_allclose(u.conj().T @ u, np.eye(DIM), atol=1e-12)


@pytest.mark.parametrize("eps", [-0.51, 0.7, 2.0])
def test_unbalanced_splitter_rejects_out_of_range(eps):
    with pytest.raises(ValueError):
        unbalanced_beam_splitter(eps)


# --- visibility ---


def test_visibility_is_one_at_zero_delay():
    assert visibility(0.0, SpectralFilter()) == 1.0
    assert visibility(0.0, SpectralFilter(shape=FilterShape.RECTANGULAR)) == 1.0


def test_visibility_vanishes_far_out():
    filt = SpectralFilter()
    assert visibility(20.0 * filt.coherence_scale_um, filt) < 1e-6


@pytest.mark.parametrize("delay_um", [0.0, 5.0, 17.3, 44.1653, 88.3307, 120.0])
def test_gaussian_visibility_matches_quadrature_oracle(delay_um):
    filt = SpectralFilter()
    assert abs(visibility(delay_um, filt) - oracle_visibility(delay_um, filt)) < 1e-12


@pytest.mark.parametrize("delay_um", [0.0, 20.0, 44.0, 88.0, 100.0, 176.0])
def test_rectangular_visibility_matches_quadrature_oracle(delay_um):
    filt = SpectralFilter(shape=FilterShape.RECTANGULAR)
    assert abs(visibility(delay_um, filt) - oracle_visibility(delay_um, filt)) < 1e-12


def test_visibility_regression_constant_at_coherence_scale():
    filt = SpectralFilter()
    delay = filt.coherence_scale_um
    assert abs(delay - 88.33066666666667) < 1e-9
    assert abs(visibility(delay, filt) - VISIBILITY_AT_COHERENCE_SCALE) < 1e-12
    assert abs(oracle_visibility(delay, filt) - VISIBILITY_AT_COHERENCE_SCALE) < 1e-12


def test_gaussian_visibility_monotone_and_continuous():
    filt = SpectralFilter()
    grid = np.linspace(0.0, 3.0 * filt.coherence_scale_um, 1000)
    values = np.array([visibility(x, filt) for x in grid])
    assert np.all(np.diff(values) <= 1e-15)
    assert np.max(np.abs(np.diff(values))) < 0.01  # no jumps on a fine grid


def test_visibility_rejects_negative_delay():
    with pytest.raises(ValueError):
        visibility(-1.0, SpectralFilter())


def test_spectral_filter_validation():
    with pytest.raises(ValueError):
        SpectralFilter(center_nm=-1.0)
    with pytest.raises(ValueError):
        SpectralFilter(fwhm_nm=0.0)
    with pytest.raises(ValueError):
        SpectralFilter(center_nm=5.0, fwhm_nm=6.0)


# --- dephasing channel ---


def test_dephasing_weights_at_half_visibility():
    rho = mode_pair_state(+1.0).to_density()
    out = apply_channel(rho, delay_dephasing_channel(0.5))
    expected = (
        0.75 * mode_pair_state(+1.0).to_density().matrix
        + 0.25 * mode_pair_state(-1.0).to_density().matrix
    )
    np.testing.assert_allclose(out.matrix, expected, atol=1e-12)


def test_full_dephasing_leaves_polarization_pure():
    from hyperbell.qstate import Subsystem, partial_trace

    rho = apparatus.prepare_hyperentangled(apparatus.BellLabel.PHI_MINUS).to_density()
    out = apply_channel(rho, delay_dephasing_channel(0.0))
    pol = partial_trace(out, {Subsystem.POL_A, Subsystem.POL_B})
    bell = apparatus.bell_polarization_vector(apparatus.BellLabel.PHI_MINUS)
    np.testing.assert_allclose(pol, np.outer(bell, bell.conj()), atol=1e-12)
    mom = partial_trace(out, {Subsystem.MOM_A, Subsystem.MOM_B})
    # joint momentum indices 1 (l r) and 2 (r l): coherence fully gone
    assert abs(mom[1, 2]) < 1e-12 and abs(mom[2, 1]) < 1e-12
    assert abs(mom[1, 1] - 0.5) < 1e-12 and abs(mom[2, 2] - 0.5) < 1e-12


def test_dephasing_semigroup_property():
    rng = np.random.default_rng(10)
    for v, w in ((0.9, 0.4), (0.3, 0.3), (1.0, 0.6), (0.0, 0.5)):
        raw = rng.normal(size=DIM) + 1j * rng.normal(size=DIM)
        rho = StateVector(raw / np.linalg.norm(raw)).to_density()
        once = apply_channel(apply_channel(rho, delay_dephasing_channel(v)),
                             delay_dephasing_channel(w))
        direct = apply_channel(rho, delay_dephasing_channel(v * w))
        np.testing.assert_allclose(once.matrix, direct.matrix, atol=1e-12)


@pytest.mark.parametrize("v", [-0.1, 1.1])
def test_dephasing_rejects_out_of_range(v):
    with pytest.raises(ValueError):
        delay_dephasing_channel(v)


# --- polarization noise ---


def test_werner_identity_at_p_one():
    rho = apparatus.prepare_hyperentangled(apparatus.BellLabel.PHI_PLUS).to_density()
    out = apply_channel(rho, polarization_werner_channel(1.0))
    np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-12)


def test_werner_fully_depolarizes_at_p_zero():
    state = apparatus.prepare_hyperentangled(apparatus.BellLabel.PHI_PLUS)
    out = apply_channel(state.to_density(), polarization_werner_channel(0.0))
    mom = np.zeros((4, 4), dtype=complex)
    mom[1, 1] = mom[2, 2] = mom[1, 2] = mom[2, 1] = 0.5  # symmetric mode pair
    # Build I_pol/4 x |mode pair><mode pair| directly in the global ordering.
    pol = np.eye(4, dtype=complex) / 4.0
    full = np.zeros((DIM, DIM), dtype=complex)
    for pa in range(2):
        for pb in range(2):
            for qa in range(2):
                for qb in range(2):
                    for ma in range(2):
                        for mb in range(2):
                            for na in range(2):
                                for nb in range(2):
                                    row = 8 * pa + 4 * ma + 2 * pb + mb
                                    col = 8 * qa + 4 * na + 2 * qb + nb
                                    full[row, col] = (
                                        pol[2 * pa + pb, 2 * qa + qb]
                                        * mom[2 * ma + mb, 2 * na + nb]
                                    )
    np.testing.assert_allclose(out.matrix, full, atol=1e-12)


def test_werner_calibration_reproduces_published_average():
    table = apparatus.decision_table()
    rho = apparatus.prepare_hyperentangled(apparatus.BellLabel.PHI_PLUS).to_density()
    hist = apparatus.analyzer_probabilities_at_visibility(
        rho, 1.0, NoiseParams(pol_werner_p=0.852)
    )
    fid = sum(hist.value(p) for p in table.patterns_for(apparatus.BellLabel.PHI_PLUS))
    assert abs(fid - 0.889) < 1e-12


@pytest.mark.parametrize("p", [-0.2, 1.01])
def test_werner_rejects_out_of_range(p):
    with pytest.raises(ValueError):
        polarization_werner_channel(p)


def test_noise_params_validation():
    with pytest.raises(ValueError):
        NoiseParams(pol_werner_p=1.5)
    with pytest.raises(ValueError):
        NoiseParams(bs_imbalance=0.6)
    with pytest.raises(ValueError):
        NoiseParams(detector_efficiency=0.0)


# --- detection projectors ---


def test_projectors_sum_to_identity():
    total = sum(pbs_detection_operators())
    np.testing.assert_allclose(total, np.eye(DIM), atol=1e-12)


def test_projector_probability_quarter():
    # (HV + VH)/sqrt2 polarization on same-port photons: the (u,H;u,V)
    # projector catches amplitude 1/2.
    state = superpose(
        [
            (0.5, make_basis_state("H", "l", "V", "l")),
            (0.5, make_basis_state("V", "l", "H", "l")),
            (-0.5, make_basis_state("H", "r", "V", "r")),
            (-0.5, make_basis_state("V", "r", "H", "r")),
        ]
    )
    proj = pbs_detection_operators()[basis_index("H", "l", "V", "l")]
    prob = float(np.real(np.vdot(state.amplitudes, proj @ state.amplitudes)))
    assert abs(prob - 0.25) < 1e-12


def test_projector_probabilities_never_negative():
    rng = np.random.default_rng(11)
    raw = rng.normal(size=DIM) + 1j * rng.normal(size=DIM)
    state = StateVector(raw / np.linalg.norm(raw))
    for proj in pbs_detection_operators():
        prob = float(np.real(np.vdot(state.amplitudes, proj @ state.amplitudes)))
        assert prob >= 0.0
