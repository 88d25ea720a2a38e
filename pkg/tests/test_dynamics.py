import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from ionpair import dynamics as dyn
from ionpair.atomic import QuadrupoleEnvironment, quadrupole_pairs
from ionpair.errors import ConfigError
from ionpair.noise import ShotNoiseDraw

ENV = QuadrupoleEnvironment(12.97, 0.0, 2.977 / 1.2)
PAIRS = quadrupole_pairs(ENV)
FRAME = math.pi / 2  # analysis pulses sit a quarter turn from the preparation axis

angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)
SX = np.array([[0, 1], [1, 0]], complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)


def qubit_pulse(area, phase):
    return expm(-0.5j * area * (math.cos(phase) * SX + math.sin(phase) * SY))


def embed(u2):
    U = np.eye(3, dtype=complex)
    U[:2, :2] = u2
    return U


def oracle_readout(psi4, t1, t2, phi1, phi2):
    """Two qubits in a 4-dim space: free phases, analysis pulses, <Z>, <Z>, <ZZ>."""
    phase = np.kron(np.diag([1, np.exp(-1j * t1)]), np.diag([1, np.exp(-1j * t2)]))
    U = np.kron(qubit_pulse(math.pi / 2, phi1 + FRAME), qubit_pulse(math.pi / 2, phi2 + FRAME))
    out = U @ phase @ psi4
    ev = lambda op: float(np.real(out.conj() @ op @ out))
    return ev(np.kron(SZ, np.eye(2))), ev(np.kron(np.eye(2), SZ)), ev(np.kron(SZ, SZ))


def engine_readout(state, t1, t2, phi1, phi2, leak_as="S"):
    rho = dyn.apply_phases(state.rho, dyn.phase_vectors(t1, t2))
    U1 = dyn.pulse_unitary(math.pi / 2, phi1 + FRAME)
    U2 = dyn.pulse_unitary(math.pi / 2, phi2 + FRAME)
    probs = dyn.outcome_probs(dyn.rotated_populations(rho, U1, U2), leak_as)
    z1, z2 = dyn.single_ion_z(probs)
    return float(z1), float(z2), float(dyn.parity(probs))


@given(st.floats(0.01, 2 * math.pi), angles)
def test_pulse_unitary_matches_matrix_exponential(area, phase):
    assert np.allclose(dyn.pulse_unitary(area, phase),
                       embed(qubit_pulse(area, phase)), atol=1e-12)


@given(angles, angles, angles, angles)
def test_product_readout_against_kron_oracle(t1, t2, phi1, phi2):
    # product state from +y pulses on |gg>
    prep = qubit_pulse(math.pi / 2, math.pi / 2) @ np.array([1, 0], complex)
    psi4 = np.kron(prep, prep)
    got = engine_readout(dyn.prepare(dyn.Product(), PAIRS), t1, t2, phi1, phi2)
    assert np.allclose(got, oracle_readout(psi4, t1, t2, phi1, phi2), atol=1e-12)
    # sign rule: <sigma_z> = -cos(theta + phi) for each ion
    assert got[0] == pytest.approx(-math.cos(t1 + phi1), abs=1e-12)


@given(angles, angles, angles, angles, st.booleans())
def test_bell_readout_against_kron_oracle(bphi, t1, t2, phi1, correlated):
    s = 1 / math.sqrt(2)
    psi4 = np.zeros(4, complex)
    if correlated:
        psi4[0], psi4[3] = s, s * np.exp(1j * bphi)
    else:
        psi4[1], psi4[2] = s, s * np.exp(1j * bphi)
    state = dyn.prepare(dyn.Bell(bphi, correlated), PAIRS)
    got = engine_readout(state, t1, t2, phi1, 0.0)
    assert np.allclose(got, oracle_readout(psi4, t1, t2, phi1, 0.0), atol=1e-12)


def test_bell_parity_tracks_preparation_phase():
    for phi in np.linspace(0, 2 * math.pi, 9):
        state = dyn.prepare(dyn.Bell(phi), PAIRS)
        assert engine_readout(state, 0, 0, 0, 0)[2] == pytest.approx(math.cos(phi), abs=1e-12)


def test_collective_dephasing_of_product_state():
    state = dyn.collective_dephase(dyn.prepare(dyn.Product(), PAIRS))
    psi_plus = np.zeros(9, complex)
    psi_plus[dyn.index(0, 1)] = psi_plus[dyn.index(1, 0)] = 1 / math.sqrt(2)
    want = 0.5 * np.outer(psi_plus, psi_plus)
    want[dyn.index(0, 0), dyn.index(0, 0)] += 0.25
    want[dyn.index(1, 1), dyn.index(1, 1)] += 0.25
    assert np.allclose(state.rho, want, atol=1e-15)
    dyn.check_state(state)


def random_state(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    rho = a @ a.conj().T
    return dyn.TwoIonState(rho / np.trace(rho), *PAIRS)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), angles, angles, st.floats(0, 3.0),
       st.floats(0.01, 2 * math.pi), angles, st.sampled_from([1, 2]), st.floats(0, 1))
def test_operations_preserve_valid_states(seed, t1, t2, wait, area, phase, ion, fid):
    state = random_state(seed)
    state = state.replace(dyn.apply_phases(state.rho, dyn.phase_vectors(t1, t2)))
    dyn.check_state(state, tol_trace=1e-10, tol_herm=1e-10)
    state = dyn.evolve(state, wait, ShotNoiseDraw(1e-7, 3.0, 0.0), ENV, 3.0)
    dyn.check_state(state, tol_trace=1e-10, tol_herm=1e-10)
    state = dyn.apply_pulse(state, dyn.PulseSpec(ion, area, phase))
    dyn.check_state(state, tol_trace=1e-10, tol_herm=1e-10)
    state = dyn.depolarize(state, ion, fid)
    dyn.check_state(state, tol_trace=1e-10, tol_herm=1e-10)
    state = dyn.collective_dephase(state)
    dyn.check_state(state, tol_trace=1e-10, tol_herm=1e-10)
    p = dyn.measure_probs(state)
    assert p.min() >= 0 and p.sum() == pytest.approx(1.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6), st.floats(0, 1), st.floats(0, 2.0))
def test_channels_are_linear(s1, s2, w, wait):
    a, b = random_state(s1).rho, random_state(s2).rho
    mix = w * a + (1 - w) * b

    def chan(r):
        r = dyn.apply_decay(r, *PAIRS, wait)
        return dyn._apply_local(r, dyn.depolarizing_kraus(0.9), 2)

    assert np.allclose(chan(mix), w * chan(a) + (1 - w) * chan(b), atol=1e-12)


def test_decay_moves_population_to_leaked_level():
    state = dyn.prepare(dyn.Bell(0.0), PAIRS)
    t = 0.4
    rho = dyn.apply_decay(state.rho, *PAIRS, t)
    # coherence |ge><eg| falls as exp(-2 t / tau) when both levels decay
    c = rho[dyn.index(0, 1), dyn.index(1, 0)]
    assert abs(c) == pytest.approx(0.5 * math.exp(-2 * t / 1.16), rel=1e-12)
    leaked = sum(rho[dyn.index(i, j), dyn.index(i, j)].real
                 for i in range(3) for j in range(3) if 2 in (i, j))
    assert leaked == pytest.approx(1 - math.exp(-2 * t / 1.16), rel=1e-12)


def test_leaked_population_readout():
    pops = np.zeros((3, 3))
    pops[2, 1] = 1.0  # ion 1 leaked, ion 2 upper
    assert np.allclose(dyn.outcome_probs(pops, "S"), [0, 1, 0, 0])
    assert np.allclose(dyn.outcome_probs(pops, "D"), [0, 0, 0, 1])
    with pytest.raises(ConfigError):
        dyn.outcome_probs(pops, "X")


def test_depolarizing_scales_bloch_vector():
    state = dyn.prepare(dyn.Product(), PAIRS)
    out = dyn.depolarize(state, 1, 0.8)
    # ion-1 <sigma_x> after a +y pulse is the lower-upper coherence
    full = out.rho.reshape(3, 3, 3, 3)
    red = np.einsum("ajbj->ab", full)
    assert 2 * red[0, 1].real == pytest.approx(0.8)


def test_state_immutable_and_validated():
    state = dyn.prepare(dyn.GroundGround(), PAIRS)
    with pytest.raises(ValueError):
        state.rho[0, 0] = 0
    with pytest.raises(ConfigError):
        dyn.TwoIonState(np.eye(4), *PAIRS)
    with pytest.raises(ConfigError):
        dyn.PulseSpec(3)
    with pytest.raises(ConfigError):
        dyn.PulseSpec(1, area=0)
    with pytest.raises(ConfigError):
        dyn.evolve(state, -1.0, ShotNoiseDraw(0, 0, 0), ENV, 0)
    assert state.purity() == pytest.approx(1.0)


def test_dfs_parity_independent_of_field_draws():
    state = dyn.prepare(dyn.Bell(0.0), PAIRS)
    ref = None
    for b_int in (0.0, 3e-7, -2e-5, 1e-3):
        s = dyn.evolve(state, 0.05, ShotNoiseDraw(b_int, 0.0, 0.0), ENV, 3.0)
        par = engine_readout(s, 0, 0, 0, 0)[2]
        ref = par if ref is None else ref
        assert abs(par - ref) < 1e-10


def brute_force_parity(bell_correlated, d1, d2, t, phi1, phi2, bphi=0.0):
    """9x9 propagation with an explicit Hamiltonian and Kronecker-product pulses."""
    P = np.diag([0.0, 1.0, 0.0])
    H = 2 * np.pi * (d1 * np.kron(P, np.eye(3)) + d2 * np.kron(np.eye(3), P))
    psi = np.zeros(9, complex)
    s = 1 / math.sqrt(2)
    if bell_correlated:
        psi[0], psi[4] = s, s * np.exp(1j * bphi)
    else:
        psi[1], psi[3] = s, s * np.exp(1j * bphi)
    psi = expm(-1j * H * t) @ psi
    U = np.kron(embed(qubit_pulse(math.pi / 2, phi1 + FRAME)),
                embed(qubit_pulse(math.pi / 2, phi2 + FRAME)))
    p = np.abs(U @ psi).reshape(3, 3) ** 2
    z = np.array([1, -1, 1])
    return float(z @ p @ z)


@pytest.mark.parametrize("correlated", [False, True])
def test_sign_rule_against_brute_force(correlated):
    d1, d2 = 41.0, 13.0
    ts = np.linspace(0, 0.2, 41)
    state = dyn.prepare(dyn.Bell(0.0, correlated), PAIRS)
    eng = [engine_readout(state, 2 * np.pi * d1 * t, 2 * np.pi * d2 * t, 0.0, 0.0)[2]
           for t in ts]
    ref = [brute_force_parity(correlated, d1, d2, t, 0.0, 0.0) for t in ts]
    assert np.allclose(eng, ref, atol=1e-12)
    f = abs(d1 + d2) if correlated else abs(d1 - d2)
    assert np.allclose(ref, np.cos(2 * np.pi * f * ts), atol=1e-12)


def test_decay_fitted_time_constant_is_half_lifetime():
    # exact engine probabilities (no sampling): phase-scan contrast vs wait
    from ionpair import analysis as an
    phases = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    waits = np.linspace(0, 2.0, 9)
    bell = dyn.prepare(dyn.Bell(0.0), PAIRS)
    contrast = []
    for w in waits:
        rho = dyn.apply_decay(bell.rho, *PAIRS, w)
        s = bell.replace(rho)
        par = [engine_readout(s, 0, 0, p, 0)[2] for p in phases]
        contrast.append(an.contrast_from_phase_scan(phases, par)["contrast"])
    fit = an.fit_exponential(waits, contrast)
    assert fit["tau"] == pytest.approx(1.16 / 2, rel=0.05)


def test_ee_population_decays_at_twice_the_rate():
    psi = np.zeros(9, complex)
    psi[dyn.index(1, 1)] = 1
    state = dyn.TwoIonState(np.outer(psi, psi), *PAIRS)
    out = dyn.evolve(state, 0.3, ShotNoiseDraw(0, 0, 0), ENV, 0.0)
    assert out.rho[dyn.index(1, 1), dyn.index(1, 1)].real == pytest.approx(
        math.exp(-2 * 0.3 / 1.16))


def test_zero_wait_is_identity():
    state = random_state(5)
    out = dyn.evolve(state, 0.0, ShotNoiseDraw(0.0, 10.0, 0.0), ENV, 3.0)
    assert np.allclose(out.rho, state.rho, atol=1e-15)


def test_product_overlap_and_reduced_states():
    state = dyn.prepare(dyn.Product(), PAIRS)
    psi_plus = np.zeros(9, complex)
    psi_plus[dyn.index(0, 1)] = psi_plus[dyn.index(1, 0)] = 1 / math.sqrt(2)
    assert np.real(psi_plus.conj() @ state.rho @ psi_plus) == pytest.approx(0.5)
    red = np.einsum("ajbj->ab", state.rho.reshape(3, 3, 3, 3))
    assert np.allclose(red[:2, :2], 0.5)  # equator: |x| = 1
    assert dyn.prepare(dyn.Bell(0.0), PAIRS).purity() == pytest.approx(1.0)


def test_collective_dephase_idempotent_and_keeps_dfs_bell():
    bell = dyn.prepare(dyn.Bell(0.4), PAIRS)
    assert np.array_equal(dyn.collective_dephase(bell).rho, bell.rho)
    once = dyn.collective_dephase(dyn.prepare(dyn.Product(), PAIRS))
    assert np.array_equal(dyn.collective_dephase(once).rho, once.rho)


@given(angles)
def test_dephased_product_parity_is_half_of_bell(phi):
    rp = dyn.collective_dephase(dyn.prepare(dyn.Product(), PAIRS))
    bell = dyn.prepare(dyn.Bell(0.0), PAIRS)
    assert engine_readout(rp, 0, 0, phi, 0)[2] == pytest.approx(
        0.5 * engine_readout(bell, 0, 0, phi, 0)[2], abs=1e-12)
    assert engine_readout(rp, 0, 0, 0, 0)[2] == pytest.approx(0.5)


def test_pi_half_pulses_compose_to_flip():
    state = dyn.prepare(dyn.GroundGround(), PAIRS)
    for _ in range(2):
        state = dyn.apply_pulse(state, dyn.PulseSpec(1, math.pi / 2, 0.0))
    assert np.allclose(dyn.measure_probs(state), [0, 0, 1, 0])
    assert np.allclose(dyn.measure_probs(dyn.prepare(dyn.GroundGround(), PAIRS)), [1, 0, 0, 0])


def test_singlet_invariant_and_triplet_flips_parity():
    s = 1 / math.sqrt(2)

    def pulsed(sign):
        psi = np.zeros(9, complex)
        psi[dyn.index(0, 1)], psi[dyn.index(1, 0)] = s, sign * s
        st_ = dyn.TwoIonState(np.outer(psi, psi.conj()), *PAIRS)
        for ion in (1, 2):
            st_ = dyn.apply_pulse(st_, dyn.PulseSpec(ion, math.pi / 2, 0.3))
        return psi, st_

    psi, singlet = pulsed(-1)
    assert np.real(psi.conj() @ singlet.rho @ psi) == pytest.approx(1.0)
    _, triplet = pulsed(+1)
    p = dyn.measure_probs(triplet)
    assert p[0] + p[3] == pytest.approx(1.0)  # only |gg>, |ee>: even parity


def test_fully_leaked_reads_bright():
    psi = np.zeros(9, complex)
    psi[dyn.index(2, 2)] = 1
    state = dyn.TwoIonState(np.outer(psi, psi), *PAIRS)
    assert np.allclose(dyn.measure_probs(state), [1, 0, 0, 0])
