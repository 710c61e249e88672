import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catamp.fock import (
    DensityOperator,
    FockState,
    ModeOperator,
    apply,
    basis,
    fidelity_pure,
    partial_trace,
    purity,
    tensor,
    vacuum,
)
from catamp.optics import beam_splitter, coherent_state, ladder


def random_state(seed, dim=6):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return FockState(v / np.linalg.norm(v), 1, dim)


def test_tensor_of_vacua_is_two_mode_vacuum():
    s = tensor(vacuum(5), vacuum(5))
    assert s.num_modes == 2
    assert s.tensor[0, 0] == 1
    assert np.count_nonzero(s.amplitudes) == 1


def test_tensor_orders_mode_zero_slowest():
    s = tensor(basis(1, 4), basis(0, 4))
    assert s.tensor[1, 0] == 1
    assert s.amplitudes[4] == 1


def test_tensor_of_coherent_states_factorizes():
    dim = 12
    a = coherent_state(1.0, dim).amplitudes
    s = tensor(coherent_state(1.0, dim), coherent_state(1.0, dim))
    n1, n2 = 3, 2
    expected = math.exp(-1) / math.sqrt(math.factorial(n1) * math.factorial(n2))
    # the truncated coherent state is renormalized, so compare against its own entries too
    assert s.tensor[n1, n2] == pytest.approx(a[n1] * a[n2], abs=1e-15)
    assert s.tensor[n1, n2].real == pytest.approx(expected, rel=1e-6)


def test_tensor_rejects_mismatched_dims():
    with pytest.raises(ValueError):
        tensor(vacuum(4), vacuum(5))


def test_partial_trace_of_product_vacuum():
    rho = partial_trace(tensor(vacuum(4), vacuum(4)), [0])
    assert np.allclose(rho.matrix, basis(0, 4).dm().matrix)


def test_partial_trace_of_bell_state_is_maximally_mixed():
    d = 3
    v = np.zeros(d * d, complex)
    v[0] = v[d + 1] = 1 / math.sqrt(2)
    rho = partial_trace(FockState(v, 2, d), [1])
    assert np.allclose(rho.matrix, np.diag([0.5, 0.5, 0.0]))
    assert purity(rho) == pytest.approx(0.5)


def test_partial_trace_density_matches_pure_route():
    s = tensor(random_state(1, 4), random_state(2, 4), random_state(3, 4))
    for keep in ([0], [2], [2, 0], [1, 2]):
        a = partial_trace(s, keep).matrix
        b = partial_trace(s.dm(), keep).matrix
        assert np.allclose(a, b, atol=1e-13)


def test_partial_trace_rejects_empty_keep():
    with pytest.raises(ValueError):
        partial_trace(tensor(vacuum(3), vacuum(3)), [])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10_000))
def test_tensor_then_trace_recovers_factor(s1, s2):
    a, b = random_state(s1), random_state(s2)
    for keep, ref in (([0], a), ([1], b)):
        rho = partial_trace(tensor(a, b), keep)
        assert fidelity_pure(ref, rho) == pytest.approx(1.0, abs=1e-10)
        assert rho.min_eigenvalue() >= -1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_fidelity_ignores_global_phase(seed, p1, p2):
    s = random_state(seed)
    rotated = FockState(s.amplitudes * np.exp(1j * p1), 1, s.dim)
    target = FockState(s.amplitudes * np.exp(1j * p2), 1, s.dim)
    assert fidelity_pure(target, rotated) == pytest.approx(1.0, abs=1e-12)
    assert fidelity_pure(target, rotated.dm()) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_pure_projectors_have_unit_purity(seed):
    assert purity(random_state(seed).dm()) == pytest.approx(1.0, abs=1e-10)


def test_purity_of_mixed_qubit():
    rho = DensityOperator(np.diag([0.5, 0.5, 0, 0]), 1, 4)
    assert purity(rho) == pytest.approx(0.5)
    assert purity(basis(0, 4).dm()) == pytest.approx(1.0)


def test_fidelity_of_subnormalized_density_renormalizes():
    rho = DensityOperator(0.3 * basis(1, 5).dm().matrix, 1, 5)
    assert rho.weight == pytest.approx(0.3)
    assert fidelity_pure(basis(1, 5), rho) == pytest.approx(1.0)


def test_apply_identity_and_ladder():
    s = random_state(7)
    eye = ModeOperator(np.eye(6), 1, 6)
    assert np.allclose(apply(eye, s).amplitudes, s.amplitudes)
    out = apply(ladder("annihilate", 6), basis(1, 6))
    assert np.allclose(out.amplitudes, basis(0, 6).amplitudes)


def test_apply_beam_splitter_on_coherent_pair():
    dim, alpha = 30, 1.0
    pair = tensor(coherent_state(alpha, dim), coherent_state(alpha, dim))
    out = apply(beam_splitter(1 / math.sqrt(2), 1 / math.sqrt(2), dim), pair, [0, 1])
    target = tensor(coherent_state(math.sqrt(2) * alpha, dim), vacuum(dim))
    assert fidelity_pure(target, out) > 1 - 1e-10


def test_apply_on_density_matches_pure():
    s = tensor(random_state(4, 5), random_state(5, 5))
    bs = beam_splitter(0.6, 0.8, 5)
    pure = apply(bs, s, [1, 0])
    mixed = apply(bs, s.dm(), [1, 0])
    assert np.allclose(mixed.matrix, pure.dm().matrix, atol=1e-12)
    assert mixed.is_psd()


def test_apply_rejects_bad_modes():
    with pytest.raises(IndexError):
        apply(ladder("create", 4), vacuum(4, 2), [2])
    with pytest.raises(ValueError):
        apply(beam_splitter(0.6, 0.8, 4), vacuum(4, 2), [0])


def test_density_operator_validation():
    with pytest.raises(ValueError):
        DensityOperator(np.array([[1, 1], [0, 0]]), 1, 2)
    rho = DensityOperator(np.diag([1.0, -0.5]), 1, 2)
    assert not rho.is_psd()


def test_state_json_round_trip():
    s = tensor(random_state(9, 3), random_state(10, 3))
    back = FockState.from_json(s.to_json())
    assert back.num_modes == 2 and back.dim == 3
    assert np.array_equal(back.amplitudes, s.amplitudes)


def test_leakage_reports_top_levels():
    assert basis(0, 6).leakage == 0
    assert basis(5, 6).leakage == pytest.approx(1.0)
    assert coherent_state(1.0, 30).leakage < 1e-15
