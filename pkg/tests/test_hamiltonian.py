import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ghzsim.errors import ParameterError, SingularDetuningError
from ghzsim.hamiltonian import (
    CavitySet,
    CouplingSet,
    QutritSpectrum,
    StepParams,
    default_params,
    effective_h0,
    effective_hI,
    full_step1_hamiltonian,
    full_step2_hamiltonian,
    ideal_step1_hamiltonian,
    step1_generator,
)
from ghzsim.hilbert import HilbertSpaceSpec, basis_state, cavity_annihilation, qutrit_op
from ghzsim.params import GHz, MHz, SystemConfig

SPEC = HilbertSpaceSpec((2, 2, 2))
SMALL = HilbertSpaceSpec((1, 1, 1))
P1 = default_params(1)
P2 = default_params(2)


def element(H, spec, bra, ket):
    return H[spec.index(*bra), spec.index(*ket)]


def oracle_hamiltonian(t, p, spec):
    """Element-by-element construction straight from the term list.

    ``a_j |k><l|`` sends ``|l, n>`` to ``sqrt(n_j) |k, n - e_j>``; crosstalk
    ``a_k a_l^+`` sends ``|q, n>`` to ``sqrt(n_k (n_l + 1)) |q, n - e_k + e_l>``.
    """
    H = np.zeros((spec.dim, spec.dim), dtype=complex)
    labels = [
        (q, (n1, n2, n3))
        for q in "gef"
        for n1 in range(spec.fock_cutoffs[0] + 1)
        for n2 in range(spec.fock_cutoffs[1] + 1)
        for n3 in range(spec.fock_cutoffs[2] + 1)
    ]
    for (j, kl), g in p.qutrit_couplings().items():
        k, l = kl
        phase = np.exp(1j * p.detuning(j, kl) * t)
        for q, n in labels:
            if q != l or n[j - 1] == 0:
                continue
            m = list(n)
            m[j - 1] -= 1
            value = g * phase * math.sqrt(n[j - 1])
            H[spec.index(k, m), spec.index(q, n)] += value
            H[spec.index(q, n), spec.index(k, m)] += np.conj(value)
    for (k, l), g in p.couplings.cross.items():
        phase = np.exp(1j * p.cross_detuning(k, l) * t)
        for q, n in labels:
            if n[k - 1] == 0 or n[l - 1] == spec.fock_cutoffs[l - 1]:
                continue
            m = list(n)
            m[k - 1] -= 1
            m[l - 1] += 1
            value = g * phase * math.sqrt(n[k - 1] * (n[l - 1] + 1))
            H[spec.index(q, m), spec.index(q, n)] += value
            H[spec.index(q, n), spec.index(q, m)] += np.conj(value)
    return H


def with_cross(p, value):
    couplings = CouplingSet(
        p.couplings.g1, p.couplings.g2, p.couplings.g_r, dict(p.couplings.unwanted),
        {pair: value for pair in ((1, 2), (1, 3), (2, 3))},
    )
    return StepParams(p.step, p.spectrum, p.cavities, couplings)


# -- parameter types ----------------------------------------------------------


def test_spectrum_is_additive():
    s = QutritSpectrum(5 * GHz, 10 * GHz)
    assert s.omega_fg == pytest.approx(15 * GHz, rel=1e-15)
    with pytest.raises(ParameterError):
        QutritSpectrum(-1.0, 1.0)


def test_cavities_must_be_distinct_and_positive():
    with pytest.raises(ParameterError):
        CavitySet((1.0, 1.0, 2.0))
    with pytest.raises(ParameterError):
        CavitySet((0.0, 1.0, 2.0))
    with pytest.raises(ParameterError):
        CavitySet((1.0, 2.0, 3.0), (-1.0, 0.0, 0.0))


def test_quality_factor_of_cavity1():
    # kappa^-1 = 10 us at 14 GHz
    assert P1.cavities.Q[0] == pytest.approx(8.8e5, rel=0.01)


def test_couplings_must_be_nonnegative():
    with pytest.raises(ParameterError):
        CouplingSet(g1=-1.0)
    with pytest.raises(ParameterError):
        CouplingSet(cross={(2, 1): 1.0})


def test_step1_requires_equal_detunings():
    cav = CavitySet((14 * GHz, 9.5 * GHz, 1 * GHz))
    with pytest.raises(ParameterError, match="omega_fg - omega_c1"):
        StepParams(1, QutritSpectrum(5 * GHz, 10 * GHz), cav, CouplingSet(1.0, 1.0))


def test_step2_requires_resonance():
    cav = CavitySet((14 * GHz, 9 * GHz, 1.1 * GHz))
    with pytest.raises(ParameterError, match="resonant"):
        StepParams(2, QutritSpectrum(1 * GHz, 12 * GHz), cav, CouplingSet(1.0, 1.0, 1.0))


def test_unwanted_key_must_belong_to_step():
    with pytest.raises(ParameterError):
        StepParams(1, P1.spectrum, P1.cavities, CouplingSet(1.0, 1.0, unwanted={(1, "fg"): 1.0}))


# -- default parameters -------------------------------------------------------


def test_default_step1_detunings():
    assert P1.delta == pytest.approx(1 * GHz, rel=1e-12)
    assert P1.detuning(2, "fe") == pytest.approx(1 * GHz, rel=1e-12)


def test_default_step2_resonance():
    assert P2.detuning(3, "eg") == 0.0


def test_default_g_at_b8():
    assert P1.couplings.g1 / (2 * math.pi) == pytest.approx(125e6, rel=1e-12)
    assert P1.couplings.g2 == P1.couplings.g1


def test_default_cavity3_step1_detunings():
    assert P1.detuning(3, "fe") == pytest.approx(9 * GHz, rel=1e-12)
    assert P1.detuning(3, "fg") == pytest.approx(14 * GHz, rel=1e-12)
    assert P1.detuning(3, "eg") == pytest.approx(4 * GHz, rel=1e-12)


def test_default_ratios():
    g, gr = P1.couplings.g1, P1.couplings.g_r
    u1 = P1.couplings.unwanted
    assert gr == pytest.approx(200 * MHz)
    assert u1[(1, "eg")] == pytest.approx(0.1 * g)
    assert u1[(1, "fe")] == pytest.approx(g)
    assert u1[(2, "eg")] == pytest.approx(0.1 * g)
    assert u1[(2, "fg")] == pytest.approx(g)
    assert u1[(3, "eg")] == pytest.approx(0.1 * gr)
    assert u1[(3, "fe")] == u1[(3, "fg")] == pytest.approx(gr)
    u2 = P2.couplings.unwanted
    for kl in ("eg", "fg", "fe"):
        assert u2[(1, kl)] == pytest.approx(g)
        assert u2[(2, kl)] == pytest.approx(g)
    assert u2[(3, "fg")] == u2[(3, "fe")] == pytest.approx(gr)
    assert (3, "eg") not in u2


def test_default_params_rejects_bad_step():
    with pytest.raises(ParameterError):
        default_params(3)


# -- ideal step-1 Hamiltonian -------------------------------------------------


def test_ideal_element_cavity1():
    H = ideal_step1_hamiltonian(0.0, P1, SPEC)
    assert element(H, SPEC, ("f", (0, 1, 0)), ("g", (1, 1, 0))) == pytest.approx(P1.couplings.g1, rel=1e-15)


def test_ideal_element_cavity2_phase():
    t = 0.37e-9
    H = ideal_step1_hamiltonian(t, P1, SPEC)
    expected = P1.couplings.g2 * np.exp(1j * P1.delta * t)
    assert element(H, SPEC, ("f", (0, 0, 0)), ("e", (0, 1, 0))) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 20e-9))
def test_ideal_is_hermitian(t):
    H = ideal_step1_hamiltonian(t, P1, SPEC)
    assert np.max(np.abs(H - H.conj().T)) <= 1e-12 * np.linalg.norm(H, 2)


def _number(j, spec):
    a = cavity_annihilation(j, spec)
    return a.conj().T @ a


def test_ideal_conserves_excitations():
    # a1 S+_fg moves the qutrit g -> f and a2 S+_fe moves e -> f, each while
    # absorbing one photon: n1 + n2 + |f><f| is conserved
    N = _number(1, SPEC) + _number(2, SPEC) + qutrit_op(np.diag([0.0, 0.0, 1.0]), SPEC)
    for t in (0.0, 1.3e-9, 4.1e-9):
        H = ideal_step1_hamiltonian(t, P1, SPEC)
        comm = H @ N - N @ H
        assert np.linalg.norm(comm, 2) < 1e-10 * np.linalg.norm(H, 2) * np.linalg.norm(N, 2)


def test_weighted_excitation_number_is_not_conserved():
    # weighting |f><f| by 2 and |e><e| by 1 breaks the g <-> f term
    N = _number(1, SPEC) + _number(2, SPEC) + qutrit_op(np.diag([0.0, 1.0, 2.0]), SPEC)
    H = ideal_step1_hamiltonian(0.0, P1, SPEC)
    comm = H @ N - N @ H
    assert np.linalg.norm(comm, 2) > 0.1 * np.linalg.norm(H, 2)


# -- effective Hamiltonians ---------------------------------------------------


def test_stark_shift_element():
    H0 = effective_h0(P1, SPEC)
    g, d = P1.couplings.g1, P1.delta
    assert element(H0, SPEC, ("g", (1, 0, 0)), ("g", (1, 0, 0))) == pytest.approx(-g * g / d, rel=1e-12)


def test_stark_shift_leaves_f_alone_and_is_diagonal():
    H0 = effective_h0(P1, SPEC)
    f_block = np.diagonal(H0).reshape(3, -1)[2]
    assert np.all(f_block == 0)
    assert np.count_nonzero(H0 - np.diag(np.diagonal(H0))) == 0


def test_raman_coupling_element():
    HI = effective_hI(P1, SPEC)
    g, d = P1.couplings.g1, P1.delta
    assert element(HI, SPEC, ("g", (1, 0, 0)), ("e", (0, 1, 0))) == pytest.approx(-g * g / d, rel=1e-12)
    assert np.max(np.abs(HI - HI.conj().T)) == 0.0


def test_raman_rate_at_b8():
    g, d = P1.couplings.g1, P1.delta
    assert abs(g * g / d) / (2 * math.pi) == pytest.approx(15.625e6, rel=1e-12)


def test_raman_annihilates_vacuum():
    assert np.all(effective_hI(P1, SPEC) @ basis_state("g", (0, 0, 0), SPEC) == 0)


def test_raman_pair_eigenvalues():
    HI = effective_hI(P1, SPEC)
    idx = [SPEC.index("e", (0, 1, 0)), SPEC.index("g", (1, 0, 0))]
    block = HI[np.ix_(idx, idx)]
    g, d = P1.couplings.g1, P1.delta
    np.testing.assert_allclose(np.linalg.eigvalsh(block), [-g * g / d, g * g / d], rtol=1e-12)


def test_zero_detuning_is_singular():
    # exactly representable frequencies so that delta is exactly zero
    p = StepParams(1, QutritSpectrum(1.0, 2.0), CavitySet((3.0, 2.0, 10.0)), CouplingSet(1.0, 1.0))
    with pytest.raises(SingularDetuningError):
        effective_h0(p, SPEC)
    with pytest.raises(SingularDetuningError):
        effective_hI(p, SPEC)


# -- full Hamiltonians --------------------------------------------------------


@pytest.mark.parametrize("t", [0.0, 0.123e-9, 2.7e-9, 7.99e-9])
@pytest.mark.parametrize("step", [1, 2])
def test_full_matches_element_oracle(step, t):
    p = with_cross(P1 if step == 1 else P2, 0.4 * P1.couplings.g_r)
    H = (full_step1_hamiltonian if step == 1 else full_step2_hamiltonian)(t, p, SPEC)
    np.testing.assert_allclose(H, oracle_hamiltonian(t, p, SPEC), rtol=0, atol=1e-6 * P1.couplings.g1)


def test_full_with_unwanted_zeroed_equals_ideal():
    system = SystemConfig().without_unwanted()
    p1, _ = system.step_params(8.0)
    for t in (0.0, 1e-9, 3.3e-9):
        assert np.array_equal(full_step1_hamiltonian(t, p1, SPEC), ideal_step1_hamiltonian(t, p1, SPEC))


def test_crosstalk_element_13():
    p = with_cross(P1, 0.02 * P1.couplings.g_r)
    t = 0.8e-9
    H = full_step1_hamiltonian(t, p, SPEC)
    g13 = 0.02 * P1.couplings.g_r
    d13 = P1.cross_detuning(1, 3)
    # a1 a3^+ moves the photon from cavity 1 to cavity 3
    forward = element(H, SPEC, ("g", (0, 0, 1)), ("g", (1, 0, 0)))
    assert forward == pytest.approx(g13 * np.exp(1j * d13 * t), rel=1e-9)
    backward = element(H, SPEC, ("g", (1, 0, 0)), ("g", (0, 0, 1)))
    assert backward == pytest.approx(g13 * np.exp(-1j * d13 * t), rel=1e-9)


@pytest.mark.parametrize("step", [1, 2])
def test_full_hermitian_at_random_times(step):
    rng = np.random.default_rng(1234)
    p = with_cross(P1 if step == 1 else P2, P1.couplings.g_r)
    builder = full_step1_hamiltonian if step == 1 else full_step2_hamiltonian
    for t in rng.uniform(0, 10e-9, size=100):
        H = builder(t, p, SMALL)
        assert np.max(np.abs(H - H.conj().T)) < 1e-12 * np.linalg.norm(H, 2)


def test_step2_resonant_element_is_time_independent():
    for t in (0.0, 0.3e-9, 1.1e-9):
        H = full_step2_hamiltonian(t, P2, SPEC)
        assert element(H, SPEC, ("e", (0, 0, 0)), ("g", (0, 0, 1))) == pytest.approx(P2.couplings.g_r, rel=1e-12)


def test_step2_resonant_only_is_jaynes_cummings():
    system = SystemConfig().without_unwanted()
    _, p2 = system.step_params(8.0)
    H = full_step2_hamiltonian(0.5e-9, p2, SMALL)
    gr = p2.couplings.g_r
    for n12 in ((0, 0), (1, 0), (0, 1), (1, 1)):
        e0 = basis_state("e", (*n12, 0), SMALL)
        g1 = basis_state("g", (*n12, 1), SMALL)
        np.testing.assert_allclose(H @ e0, gr * g1, atol=1e-6)
        np.testing.assert_allclose(H @ g1, gr * e0, atol=1e-6)
    # |f> and |g,..,0> are dark
    assert np.all(H @ basis_state("f", (1, 1, 1), SMALL) == 0)
    assert np.all(H @ basis_state("g", (1, 1, 0), SMALL) == 0)


def test_generator_drops_zero_couplings():
    system = SystemConfig().without_unwanted()
    p1, _ = system.step_params(8.0)
    assert len(step1_generator(p1, SPEC)) == 2
    assert len(step1_generator(P1, SPEC)) == 7 + 2
