import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavitysim.field import FieldDensity, binomial_amplitudes, coherent_amplitudes, number_state
from cavitysim.model import AtomPrep, ModelParams, evolve_exact, initial_joint
from cavitysim.observables import (
    grid_axes, husimi_q, inversion, inversions_from_qubits, reduce_to_field, reduce_to_qubit,
    reduce_to_qubits, required_half_width, total_inversion,
)
from oracles import full_evolve, partial_trace_field, partial_trace_qubits

PARAM_SETS = [
    ModelParams(k=1, gamma1=1.0, gamma2=0.4, delta=0.2),
    ModelParams(k=2, gamma1=0.8, gamma2=0.3 + 0.3j, delta=-0.1, beta1_1=0.2, beta1_2=0.4,
                beta2_1=0.1, beta2_2=0.3),
    ModelParams(k=3, gamma1=1.0, gamma2=0.5),
]


@pytest.mark.parametrize("params", PARAM_SETS)
@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_partial_traces_match_naive_tensor(params, m):
    f = binomial_amplitudes(0.6, m)
    prep = AtomPrep(0.35, 1.05)
    for t in (0.0, 0.9, 4.2):
        rho = evolve_exact(prep, f, params, t)
        dense = full_evolve(prep, f, params, t, rho.n_photons)
        assert np.abs(reduce_to_qubits(rho) - partial_trace_field(dense, rho.n_photons)).max() < 1e-12
        assert np.abs(reduce_to_field(rho).matrix - partial_trace_qubits(dense, rho.n_photons)).max() < 1e-12


def test_initial_reduction_fig2_settings():
    rho = initial_joint(AtomPrep(0, math.pi / 4), binomial_amplitudes(0.2, 70), k=1)
    assert np.allclose(reduce_to_qubits(rho), np.diag([0.5, 0.5, 0, 0]), atol=1e-15)
    assert total_inversion(rho) == pytest.approx(0.25, abs=1e-15)


def test_pure_product_reduction_is_pure():
    rho = initial_joint(AtomPrep(0, math.pi / 2), number_state(3), k=1)
    q = reduce_to_qubits(rho)
    assert abs(np.trace(q @ q).real - 1) < 1e-15


def test_single_qubit_reductions():
    rho = initial_joint(AtomPrep(math.pi / 3, 0), binomial_amplitudes(0.5, 3), k=1)
    assert np.allclose(reduce_to_qubit(rho, 1), np.diag([0.25, 0.75]), atol=1e-15)
    assert np.allclose(reduce_to_qubit(rho, 2), np.diag([1, 0]), atol=1e-15)
    with pytest.raises(ValueError):
        reduce_to_qubit(rho, 3)


def test_single_qubit_is_partial_trace_of_pair():
    rho = evolve_exact(AtomPrep(0.4, 0.9), binomial_amplitudes(0.5, 5), PARAM_SETS[1], 2.0)
    q = reduce_to_qubits(rho).reshape(2, 2, 2, 2)
    assert np.abs(reduce_to_qubit(rho, 1) - np.trace(q, axis1=1, axis2=3)).max() < 1e-12
    assert np.abs(reduce_to_qubit(rho, 2) - np.trace(q, axis1=0, axis2=2)).max() < 1e-12


def test_inversion_values():
    f = binomial_amplitudes(0.5, 3)
    assert abs(inversion(initial_joint(AtomPrep(0, 0), f), 1) - 0.5) < 1e-15
    assert abs(inversion(initial_joint(AtomPrep(math.pi / 4, 0), f), 1)) < 1e-15
    assert abs(total_inversion(initial_joint(AtomPrep(0, 0), f)) - 0.5) < 1e-15
    assert abs(total_inversion(initial_joint(AtomPrep(0, math.pi / 2), f))) < 1e-15


def test_inversions_from_qubits_maximally_mixed():
    assert inversions_from_qubits(np.eye(4) / 4) == (0.0, 0.0, 0.0)


@settings(max_examples=20, deadline=None)
@given(t=st.floats(0, 50), th1=st.floats(-3.2, 3.2), th2=st.floats(-3.2, 3.2), eta=st.floats(0, 1))
def test_inversion_bounds_and_traces(t, th1, th2, eta):
    rho = evolve_exact(AtomPrep(th1, th2), binomial_amplitudes(eta, 6), PARAM_SETS[1], t)
    for which in (1, 2):
        assert abs(inversion(rho, which)) <= 0.5 + 1e-12
    assert abs(total_inversion(rho)) <= 0.5 + 1e-12
    q = reduce_to_qubits(rho)
    assert abs(np.trace(q).real - rho.trace()) < 1e-12
    assert np.linalg.eigvalsh(q).min() > -1e-9
    fd = reduce_to_field(rho)
    assert abs(fd.trace() - 1) < 1e-10
    assert fd.purity() <= 1 + 1e-12


def test_field_reduction_at_zero_is_initial_field():
    f = binomial_amplitudes(0.3, 8)
    fd = reduce_to_field(initial_joint(AtomPrep(0.2, 0.5), f, k=2))
    expected = np.zeros_like(fd.matrix)
    expected[:9, :9] = np.outer(f.amplitudes, f.amplitudes.conj())
    assert np.abs(fd.matrix - expected).max() < 1e-15


def test_husimi_vacuum():
    q = husimi_q(number_state(0).density(), np.array([0.0, 1.0]), np.array([0.0]))
    assert abs(q.values[0, 0] - 1 / math.pi) < 1e-15
    assert abs(q.values[0, 1] - math.exp(-1) / math.pi) < 1e-15


def test_husimi_number_state_ring(backend):
    m = 5
    x = np.linspace(-4, 4, 33)
    y = np.linspace(-3, 3, 25)
    q = husimi_q(number_state(m).density(), x, y)
    r2 = x[None, :] ** 2 + y[:, None] ** 2
    ref = np.exp(-r2) * r2 ** m / (math.pi * math.factorial(m))
    assert np.abs(q.values - ref).max() < 1e-14


def test_husimi_normalization_and_coverage():
    fd = binomial_amplitudes(0.5, 40).density()
    q = husimi_q(fd)
    assert q.coverage_ok
    assert 0.99 <= q.riemann_integral() <= 1.001
    assert q.values.min() >= -1e-12
    small = husimi_q(fd, *grid_axes(41, 3.0))
    assert not small.coverage_ok


def test_required_half_width():
    assert required_half_width(number_state(16).density()) == pytest.approx(7.0)


def test_husimi_accepts_plain_matrix():
    q = husimi_q(np.diag([1.0, 0.0]), np.zeros(1), np.zeros(1))
    assert abs(q.values[0, 0] - 1 / math.pi) < 1e-15


def test_coherent_state_husimi_peak():
    alpha = 1.5 + 0.5j
    q = husimi_q(coherent_amplitudes(alpha).density(), np.array([alpha.real]), np.array([alpha.imag]))
    assert abs(q.values[0, 0] - 1 / math.pi) < 1e-9
