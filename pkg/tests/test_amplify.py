import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catamp.amplify import (
    EVEN,
    INV_SQRT2,
    ODD,
    CaStepConfig,
    DetectorModel,
    ca_step,
    ca_step_explicit,
    cascade_probability,
    detector_loss,
    expected_attempts,
    iterate_tree,
    load_config,
    loss_matrix,
    mixed_parity_step,
    success_prob_closed,
    with_accept,
)
from catamp.fock import DensityOperator, basis, fidelity_pure, vacuum
from catamp.optics import coherent_state, css_state, optimal_squeezing, squeezed_single_photon

AMPS = (0.5, INV_SQRT2, 1.0, math.sqrt(2))


def test_config_derives_splitter_and_aux_amplitude():
    cfg = CaStepConfig(0.6, 0.8)
    r, t = cfg.bs1
    assert r * r + t * t == pytest.approx(1.0)
    assert (r, t) == pytest.approx((0.8, 0.6))
    assert cfg.aux_amplitude == pytest.approx(2 * 0.6 * 0.8 / 1.0)
    assert CaStepConfig(1.0, 1.0).aux_amplitude == pytest.approx(math.sqrt(2))
    assert CaStepConfig(1.0, 1.0, gamma=0.3).aux_amplitude == 0.3
    with pytest.raises(ValueError):
        CaStepConfig(0.0, 1.0)
    with pytest.raises(ValueError):
        DetectorModel(0.0)


def test_success_probability_values():
    assert success_prob_closed(1, 1, ODD, ODD) == pytest.approx(0.2721, abs=1e-4)
    assert success_prob_closed(8, 8, EVEN, EVEN) == pytest.approx(0.5, abs=1e-12)
    floor = min(success_prob_closed(a, a, ODD, ODD) for a in np.linspace(0.01, 3, 600))
    assert floor >= 0.214


@pytest.mark.parametrize("a", AMPS)
@pytest.mark.parametrize("b", AMPS)
def test_simulated_probability_matches_closed_form(a, b):
    for pa in (EVEN, ODD):
        for pb in (EVEN, ODD):
            out = ca_step(css_state(a, pa), css_state(b, pb), CaStepConfig(a, b, pa, pb))
            assert out.prob == pytest.approx(success_prob_closed(a, b, pa, pb), abs=1e-6)


def test_ideal_step_outputs_bigger_cat():
    a = 1.0
    out = ca_step(css_state(a, ODD), css_state(a, ODD), CaStepConfig(a, a))
    assert out.amplitude == pytest.approx(math.sqrt(2))
    assert out.phase == pytest.approx(0.0)
    assert out.fidelity() == pytest.approx(1.0, abs=1e-10)
    assert out.output.weight == pytest.approx(out.prob)


@pytest.mark.filterwarnings("ignore::catamp.fock.TruncationWarning")
def test_fast_step_matches_literal_three_mode_route():
    d = 8
    rho = squeezed_single_photon(0.3, d).dm()
    for det in (DetectorModel(1.0), DetectorModel(0.6), DetectorModel(0.8, "resolving")):
        for accept in (None, {(1, 1)}, {(2, 1), (1, 2)}):
            cfg = CaStepConfig(0.6, 0.6, detector=det, accept=accept)
            fast = ca_step(rho, rho, cfg)
            slow = ca_step_explicit(rho, rho, cfg)
            assert np.abs(fast.output.matrix - slow.output.matrix).max() < 1e-12
            assert np.abs(fast.clicks - slow.clicks).max() < 1e-12


def test_click_table_bookkeeping():
    rho = squeezed_single_photon(optimal_squeezing(INV_SQRT2), 30)
    out = ca_step(rho, rho, CaStepConfig(INV_SQRT2, INV_SQRT2, detector=DetectorModel(0.7)))
    accepted = out.clicks[1:, 1:].sum()
    assert accepted == pytest.approx(out.prob, abs=1e-10)
    assert out.clicks.sum() <= 1 + 1e-10
    assert out.clicks.sum() == pytest.approx(1.0, abs=1e-6)


def test_resolving_detector_outcome_shares():
    a = INV_SQRT2
    rho = squeezed_single_photon(optimal_squeezing(a), 30)
    out = ca_step(rho, rho, CaStepConfig(a, a, detector=DetectorModel(1.0, "resolving")))
    assert out.share([(1, 1)]) == pytest.approx(0.60, abs=0.05)
    assert out.share([(2, 1), (1, 2)]) == pytest.approx(0.30, abs=0.05)
    one = ca_step(rho, rho, with_accept(CaStepConfig(a, a, detector=DetectorModel(1.0, "resolving")), [(1, 1)]))
    assert one.prob == pytest.approx(out.clicks[1, 1], abs=1e-12)


def test_phase_addition():
    a = 0.9
    for pa, pb in ((ODD, ODD), (EVEN, EVEN), (ODD, EVEN), (EVEN, ODD)):
        out = ca_step(css_state(a, pa), css_state(a, pb), CaStepConfig(a, a, pa, pb))
        want = (pa + pb) % (2 * math.pi)
        assert out.phase == pytest.approx(want)
        assert out.fidelity(css_state(out.amplitude, want)) == pytest.approx(1.0, abs=1e-9)
        assert out.fidelity(css_state(out.amplitude, want + math.pi)) < 0.5


def test_amplitude_argmax():
    a, b = 0.8, 0.6
    out = ca_step(css_state(a, ODD), css_state(b, EVEN), CaStepConfig(a, b, ODD, EVEN))
    cands = np.arange(0.8, 1.2001, 0.001)
    fids = [out.fidelity(css_state(c, ODD)) for c in cands]
    assert cands[int(np.argmax(fids))] == pytest.approx(1.0, abs=0.01)


def test_odd_plus_even_is_unambiguous():
    a = 1.0
    out = ca_step(css_state(a, ODD), css_state(a, EVEN), CaStepConfig(a, a, ODD, EVEN))
    assert out.fidelity(css_state(math.sqrt(2) * a, ODD)) == pytest.approx(1.0, abs=1e-10)


def test_mixed_parity_step_makes_amplitude_three():
    big, small = 2 * math.sqrt(2), 1.0
    out = mixed_parity_step(css_state(big, EVEN), big, EVEN, css_state(small, ODD), small, ODD)
    assert out.amplitude == pytest.approx(3.0)
    assert out.phase == pytest.approx(ODD)
    assert out.fidelity() > 0.99


def test_vacuum_inputs_give_vacuum_output():
    out = ca_step(vacuum(20), vacuum(20), CaStepConfig(1.0, 1.0))
    g = CaStepConfig(1.0, 1.0).aux_amplitude / math.sqrt(2)
    click = -math.expm1(-g * g)
    assert out.prob == pytest.approx(click**2, abs=1e-10)
    assert fidelity_pure(vacuum(20), out.output) == pytest.approx(1.0)


def test_degenerate_acceptance_raises():
    with pytest.raises(ValueError):
        ca_step(vacuum(10), vacuum(10), CaStepConfig(1.0, 1.0, gamma=1e-9))


@pytest.mark.parametrize("alpha,phase", [(INV_SQRT2, ODD), (1.0, ODD), (1.0, EVEN)])
def test_detector_efficiency_does_not_change_quality(alpha, phase):
    s = css_state(alpha, phase)
    fids, probs = [], []
    for eta in (0.1, 0.3, 0.5, 1.0):
        out = ca_step(s, s, CaStepConfig(alpha, alpha, phase, phase, detector=DetectorModel(eta)))
        fids.append(out.fidelity())
        probs.append(out.prob)
    assert max(fids) - min(fids) < 1e-8
    assert all(p < q for p, q in zip(probs, probs[1:]))


def test_detector_loss_on_single_photon():
    eta = 0.3
    rho = detector_loss(basis(1, 5).dm(), 0, eta)
    assert np.allclose(rho.matrix, np.diag([1 - eta, eta, 0, 0, 0]), atol=1e-14)
    assert np.allclose(detector_loss(basis(2, 5).dm(), 0, 1.0).matrix, basis(2, 5).dm().matrix)


def test_detector_loss_keeps_coherent_states_coherent():
    a, eta = 1.2, 0.5
    rho = detector_loss(coherent_state(a, 30).dm(), 0, eta)
    assert fidelity_pure(coherent_state(math.sqrt(eta) * a, 30), rho) == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 1.0), st.integers(1, 12))
def test_loss_matrix_columns_are_distributions(eta, n):
    lm = loss_matrix(eta, 13)
    assert lm[:, n].sum() == pytest.approx(1.0)
    assert lm[:, n] @ np.arange(13) == pytest.approx(eta * n)


def test_tree_probabilities():
    tree = iterate_tree(css_state(1.0, ODD), 1.0, ODD, 2)
    assert tree.total_prob == pytest.approx(0.027, abs=1e-3)
    assert [s.steps for s in tree.stages] == [2, 1]
    total, probs = cascade_probability(1.0, ODD, 2)
    assert tree.stage_probs == pytest.approx(probs, abs=1e-10)
    total4, _ = cascade_probability(0.5, ODD, 4)
    assert 2e-13 / 1.15 <= total4 <= 2e-13 * 1.15


def test_single_stage_from_odd_inputs_is_even():
    tree = iterate_tree(css_state(0.7, ODD), 0.7, ODD, 1)
    assert tree.final.phase == pytest.approx(EVEN)
    diag = tree.final.output.diagonal()
    assert diag[1::2].max() < 1e-15


def test_expected_attempts():
    assert expected_attempts([(1, 0.5)]) == pytest.approx(2.0)
    _, probs = cascade_probability(0.5, ODD, 4)
    stages = [(2 ** (4 - k), p) for k, p in enumerate(probs, 1)]
    assert expected_attempts(stages) == pytest.approx(138, abs=1)
    assert expected_attempts(stages, lambda s: 7.0) == 7.0


def test_load_config_shapes(tmp_path):
    doc = {"alpha_i": 0.5, "phases": math.pi, "stages": 3, "detector": {"efficiency": 0.8, "kind": "resolving"},
           "accept": [[1, 1], [2, 1]], "dim": 20}
    cfg = load_config(json.dumps(doc))
    assert cfg["phases"] == [math.pi, math.pi]
    assert cfg["detector"] == DetectorModel(0.8, "resolving")
    assert cfg["accept"] == frozenset({(1, 1), (2, 1)})
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"alpha_i": 1.0}))
    cfg = load_config(path)
    assert cfg["accept"] is None and cfg["dim"] == 30 and cfg["stages"] == 1


def test_mixed_inputs_are_accepted():
    p = 0.3
    s0 = basis(0, 20).dm().matrix
    s1 = squeezed_single_photon(0.2, 20).dm().matrix
    rho = DensityOperator(p * s0 + (1 - p) * s1, 1, 20)
    out = ca_step(rho, rho, CaStepConfig(0.6, 0.6))
    assert out.output.is_psd()
    assert 0 < out.prob < 1
