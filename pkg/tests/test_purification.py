import math

import numpy as np
import pytest

from catamp.fock import fidelity_pure, purity
from catamp.optics import css_state, optimal_squeezing, squeezed_single_photon
from catamp.purification import (
    HALF_CAT_R,
    SourceModel,
    alternate_arrangement,
    error_term_delta,
    error_term_state,
    matched_delta,
    mixed_sq_photon,
    purify_once,
    purify_sweep,
    symmetric_route,
)


@pytest.fixture(scope="module")
def sweep():
    return purify_sweep([0.0, 0.05, 0.1, 0.2, 0.25, 0.3, 0.4, 0.5], 2, 30)


def test_source_model_validation_and_alpha():
    with pytest.raises(ValueError):
        SourceModel(1.0, 0.1)
    m = SourceModel.for_alpha(0.1, 0.5)
    assert m.r == pytest.approx(optimal_squeezing(0.5))
    assert m.alpha == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("p", [0.0, 0.05, 0.25, 0.4])
def test_input_purity_is_sum_of_squares(p):
    rho = mixed_sq_photon(SourceModel.for_alpha(p, 0.5))
    assert purity(rho) == pytest.approx(p * p + (1 - p) ** 2, abs=1e-12)
    assert rho.weight == pytest.approx(1.0)


def test_pure_source_sweep_row(sweep):
    row = sweep[0]
    assert row.p == 0.0
    assert row.purity_in == pytest.approx(1.0)
    # different click outcomes herald slightly different states, so not exactly pure
    assert row.purity_1 > 0.999
    assert row.purity_2 > 0.999
    assert row.fid_in > 0.9999


def test_improvement_over_input(sweep):
    for row in sweep[1:]:
        assert row.fid_1 > row.fid_in and row.purity_1 > row.purity_in
        assert row.fid_2 > row.fid_in and row.purity_2 > row.purity_in


def test_quoted_sweep_points(sweep):
    rows = {r.p: r for r in sweep}
    assert rows[0.25].fid_in == pytest.approx(0.750, abs=0.01)
    assert rows[0.25].fid_1 == pytest.approx(0.941, abs=0.01)
    assert rows[0.05].fid_1 == pytest.approx(0.990, abs=0.01)
    assert rows[0.4].fid_2 == pytest.approx(0.72, abs=0.01)


def test_purify_once_matches_sweep(sweep):
    m = purify_once(SourceModel.for_alpha(0.25, 0.5))
    assert m.fidelity == pytest.approx({r.p: r for r in sweep}[0.25].fid_1, abs=1e-12)
    assert 0 < m.prob < 1


def test_sweep_is_deterministic_across_workers():
    a = purify_sweep([0.1, 0.3], 1, 20)
    b = purify_sweep([0.1, 0.3], 1, 20, workers=2)
    np.testing.assert_array_equal(np.array(a), np.array(b))
    with pytest.raises(ValueError):
        purify_sweep([0.6])


@pytest.mark.parametrize("p,tol", [(0.0, 1e-3), (0.05, 1e-2), (0.25, 1e-2), (0.4, 1e-2)])
def test_alternate_arrangement_agrees(p, tol):
    m = SourceModel.for_alpha(p, 0.5)
    s, alt = symmetric_route(m), alternate_arrangement(m)
    assert alt.amplitudes == pytest.approx((1 / math.sqrt(2), math.sqrt(0.75), 1.0))
    assert s.amplitudes[-1] == pytest.approx(1.0)
    assert abs(s.fidelity - alt.fidelity) < tol
    assert abs(s.purity - alt.purity) < 1e-2


def test_error_term_coefficient():
    assert error_term_delta(2) == pytest.approx(0.0129669, abs=5e-7)
    assert error_term_delta(0) == pytest.approx(0.0, abs=1e-3)


def test_error_term_state_fidelity_matches_squeezed_photon():
    d = matched_delta()
    assert d == pytest.approx(0.0147, abs=5e-4)
    target = css_state(1 / math.sqrt(2), math.pi)
    f_sq = fidelity_pure(target, squeezed_single_photon(HALF_CAT_R))
    assert fidelity_pure(target, error_term_state(d)) == pytest.approx(f_sq, abs=1e-10)
    v = error_term_state(d).amplitudes
    assert np.linalg.norm(v) == pytest.approx(1.0)
