"""Receiver measurement chain: routing, conversion, decoding, sampling."""

import numpy as np
import pytest

import oracles
from depqkd import (
    DepLabel,
    DeviceOutcome,
    Family,
    Freq,
    JointState,
    LocalState,
    Photon,
    Pol,
    PolBasis,
    SeededGenerator,
    StateError,
    decode,
    dep_basis,
    device_measure,
    device_outcome_distribution,
    device_outcomes,
    device_projective_measurement,
    device_sample_counts,
    label_to_codeword,
    measure_single,
    port_of,
    wavelength_convert_global,
)
from depqkd.device import _FAMILY_BY_PORTS, _PARALLEL_MEANS_PLUS, convert_in_port
from depqkd.states import _SUPPORT


def random_joint(rng):
    vec = rng.normal(size=16) + 1j * rng.normal(size=16)
    return JointState(vec / np.linalg.norm(vec))


def test_port_routing_full_table():
    assert port_of(Photon.A, Pol.H, Freq.LOW) == 1
    assert port_of(Photon.A, Pol.V, Freq.HIGH) == 1
    assert port_of(Photon.A, Pol.H, Freq.HIGH) == 3
    assert port_of(Photon.A, Pol.V, Freq.LOW) == 3
    assert port_of(Photon.B, Pol.H, Freq.LOW) == 2
    assert port_of(Photon.B, Pol.V, Freq.HIGH) == 2
    assert port_of(Photon.B, Pol.H, Freq.HIGH) == 4
    assert port_of(Photon.B, Pol.V, Freq.LOW) == 4


def test_pair_supports_route_to_the_decoding_port_pair():
    # both product terms of a pair state land on one (port_a, port_b) pair,
    # and that pair is the one the decoder attributes to the family
    for label in DepLabel:
        ports_seen = set()
        for joint_index in _SUPPORT[label.family]:
            mode_a, mode_b = divmod(joint_index, 4)
            pa = port_of(Photon.A, Pol(mode_a // 2), Freq(mode_a % 2))
            pb = port_of(Photon.B, Pol(mode_b // 2), Freq(mode_b % 2))
            ports_seen.add((pa, pb))
        assert len(ports_seen) == 1
        assert _FAMILY_BY_PORTS[ports_seen.pop()] is label.family


def test_convert_in_port_maps_collected_modes_to_qubit_axes():
    out = convert_in_port(1, LocalState.mode(Pol.H, Freq.LOW))
    assert np.allclose(out, [1, 0])
    out = convert_in_port(1, LocalState.mode(Pol.V, Freq.HIGH))
    assert np.allclose(out, [0, 1])
    out = convert_in_port(3, LocalState.mode(Pol.H, Freq.HIGH))
    assert np.allclose(out, [1, 0])
    out = convert_in_port(4, LocalState.mode(Pol.V, Freq.LOW))
    assert np.allclose(out, [0, 1])
    mixed = LocalState(np.array([0.6, 0, 0, 0.8j]))
    assert np.allclose(convert_in_port(2, mixed), [0.6, 0.8j])


def test_convert_in_port_rejects_foreign_modes_and_unknown_ports():
    with pytest.raises(StateError):
        convert_in_port(1, LocalState.mode(Pol.H, Freq.HIGH))
    with pytest.raises(ValueError):
        convert_in_port(5, LocalState.mode(Pol.H, Freq.LOW))


def test_wavelength_convert_global_on_pair_states():
    sq2 = np.sqrt(2.0)
    phi = wavelength_convert_global(dep_basis(DepLabel.PHI_PLUS))
    assert np.allclose(phi.vec, [1 / sq2, 0, 0, 1 / sq2], atol=1e-12)
    psi_minus = wavelength_convert_global(dep_basis(DepLabel.PSI_MINUS))
    assert np.allclose(psi_minus.vec, [0, 1 / sq2, -1 / sq2, 0], atol=1e-12)
    gamma = wavelength_convert_global(dep_basis(DepLabel.GAMMA_PLUS))
    assert np.allclose(gamma.vec, [0, 1 / sq2, 1 / sq2, 0], atol=1e-12)
    upsilon = wavelength_convert_global(dep_basis(DepLabel.UPSILON_MINUS))
    assert np.allclose(upsilon.vec, [-1 / sq2, 0, 0, 1 / sq2], atol=1e-12)


def test_wavelength_convert_global_matches_frequency_erasure_oracle():
    rng = np.random.default_rng(31)
    for _ in range(25):
        s = random_joint(rng)
        expected = oracles.erase_frequency(s.vec)
        norm = np.linalg.norm(expected)
        if norm < 1e-6:
            continue
        assert np.allclose(
            wavelength_convert_global(s).vec, expected / norm, atol=1e-12
        )


def test_wavelength_convert_global_rejects_cancelling_amplitudes():
    vec = np.zeros(16, dtype=complex)
    vec[0] = 1 / np.sqrt(2)  # a (H, LOW),  b (H, LOW)
    vec[4] = -1 / np.sqrt(2)  # a (H, HIGH), b (H, LOW)
    with pytest.raises(StateError):
        wavelength_convert_global(JointState(vec))


def test_device_measurement_is_complete_and_orthonormal():
    meas = device_projective_measurement()
    meas.validate()
    total = sum(oracles.projector(rows) for _, rows in meas.outcomes)
    assert np.allclose(total, np.eye(16), atol=1e-12)
    assert len(device_outcomes()) == 16
    assert len(set(device_outcomes())) == 16
    for outcome in device_outcomes():
        assert outcome.port_a in (1, 3)
        assert outcome.port_b in (2, 4)
        assert outcome.x_a in (+1, -1)
        assert outcome.x_b in (+1, -1)


def test_device_distribution_matches_dense_projector_oracle():
    rng = np.random.default_rng(47)
    reference = dict()
    for outcome, proj in oracles.device_projectors():
        reference[outcome] = proj
    for _ in range(20):
        s = random_joint(rng)
        for outcome, prob in device_outcome_distribution(s):
            expected = oracles.born_probability(s.vec, reference[tuple(outcome)])
            assert prob == pytest.approx(expected, abs=1e-12)


def test_device_discriminates_all_eight_states_deterministically():
    for label in DepLabel:
        dist = device_outcome_distribution(dep_basis(label))
        support = [(o, p) for o, p in dist if p > 1e-12]
        assert len(support) == 2
        for outcome, prob in support:
            assert prob == pytest.approx(0.5, abs=1e-12)
            assert decode(outcome) == (label, label_to_codeword(label))
        signs = {outcome.x_a == outcome.x_b for outcome, _ in support}
        assert len(signs) == 1  # both branches agree on parallel vs opposite


def test_sign_rule_table_recomputed_from_amplitudes():
    # rebuild the parallel-signs-means-plus table instead of trusting it
    for family in Family:
        plus = dep_basis(DepLabel.of(family, +1))
        supported = [
            outcome
            for outcome, p in device_outcome_distribution(plus)
            if p > 1e-12
        ]
        parallel = {o.x_a == o.x_b for o in supported}
        assert parallel == {_PARALLEL_MEANS_PLUS[family]}
        minus = dep_basis(DepLabel.of(family, -1))
        supported = [
            outcome
            for outcome, p in device_outcome_distribution(minus)
            if p > 1e-12
        ]
        parallel = {o.x_a == o.x_b for o in supported}
        assert parallel == {not _PARALLEL_MEANS_PLUS[family]}


def test_decode_examples():
    assert decode(DeviceOutcome(1, 2, +1, +1)) == (DepLabel.PHI_PLUS, 2)
    assert decode(DeviceOutcome(1, 2, -1, -1)) == (DepLabel.PHI_PLUS, 2)
    assert decode(DeviceOutcome(1, 4, -1, +1)) == (DepLabel.PSI_MINUS, 1)
    assert decode(DeviceOutcome(3, 2, +1, -1)) == (DepLabel.GAMMA_MINUS, 7)
    assert decode(DeviceOutcome(3, 4, -1, -1)) == (DepLabel.UPSILON_PLUS, 4)


def test_device_measure_collapses_onto_the_outcome_vector():
    g = SeededGenerator(12, 0)
    meas = device_projective_measurement()
    rows = {outcome: vecs[0] for outcome, vecs in meas.outcomes}
    for _ in range(50):
        outcome, post = device_measure(dep_basis(DepLabel.GAMMA_MINUS), g)
        assert decode(outcome) == (DepLabel.GAMMA_MINUS, 7)
        assert np.allclose(post.vec, rows[outcome], atol=1e-12)


def test_device_sample_counts_equals_a_loop_of_single_measurements():
    state = dep_basis(DepLabel.PHI_MINUS)
    counts = device_sample_counts(state, 500, SeededGenerator(77, 4))
    g = SeededGenerator(77, 4)
    index_of = {o: i for i, o in enumerate(device_outcomes())}
    loop_counts = np.zeros(16, dtype=int)
    for _ in range(500):
        outcome, _ = device_measure(state, g)
        loop_counts[index_of[outcome]] += 1
    assert np.array_equal(counts, loop_counts)
    assert counts.sum() == 500


def test_measure_single_deterministic_cases():
    g = SeededGenerator(9, 0)
    for freq in (Freq.LOW, Freq.HIGH):
        comp, seen_freq = measure_single(
            LocalState.mode(Pol.V, freq), Photon.B, PolBasis.Z, g
        )
        assert (comp, seen_freq) == (1, freq)
        comp, seen_freq = measure_single(
            LocalState.diagonal(+1, freq), Photon.A, PolBasis.X, g
        )
        assert (comp, seen_freq) == (0, freq)
        comp, seen_freq = measure_single(
            LocalState.diagonal(-1, freq), Photon.B, PolBasis.X, g
        )
        assert (comp, seen_freq) == (1, freq)


def test_measure_single_mismatched_basis_is_unbiased():
    g = SeededGenerator(10, 0)
    n = 4000
    comps = [
        measure_single(LocalState.mode(Pol.H, Freq.HIGH), Photon.B, PolBasis.X, g)
        for _ in range(n)
    ]
    assert {freq for _, freq in comps} == {Freq.HIGH}
    ones = sum(comp for comp, _ in comps)
    assert ones / n == pytest.approx(0.5, abs=0.03)
