import math
import warnings

import numpy as np
import pytest

from catamp.fock import DensityOperator, basis
from catamp.optics import css_state, optimal_squeezing, squeezed_single_photon
from catamp.wigner import (
    PhaseGrid,
    char_fn_numeric,
    char_fn_sq_photon,
    min_wigner,
    wigner_css,
    wigner_expm,
    wigner_numeric,
    wigner_point,
    wigner_sq_photon,
)

W0 = 2 / math.pi
GRID41 = PhaseGrid.square(4.0, 41)


@pytest.fixture(autouse=True)
def _quiet_fringe_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="grid step")
        yield


def test_grid_validation():
    with pytest.raises(ValueError):
        PhaseGrid(n_re=1)
    with pytest.raises(ValueError):
        PhaseGrid(z_re=(1.0, -1.0))


def test_characteristic_function_of_squeezed_photon():
    assert char_fn_sq_photon(0j, 0.7) == 1
    eta = 0.4 - 0.2j
    q = abs(eta) ** 2
    assert char_fn_sq_photon(eta, 0.0) == pytest.approx(math.exp(-q / 2) * (1 - q))
    r = 0.164
    num = char_fn_numeric(squeezed_single_photon(r, 40), 0.3 + 0j)
    assert num == pytest.approx(char_fn_sq_photon(0.3 + 0j, r), abs=1e-8)
    num = char_fn_numeric(squeezed_single_photon(r, 40), 0.2 + 0.5j)
    assert num == pytest.approx(char_fn_sq_photon(0.2 + 0.5j, r), abs=1e-8)


def test_parity_identity_at_origin():
    assert float(wigner_point(basis(0, 10), 0)) == pytest.approx(W0, abs=1e-12)
    assert float(wigner_point(basis(1, 10), 0)) == pytest.approx(-W0, abs=1e-12)
    assert wigner_sq_photon(0j, 0.0) == pytest.approx(-W0)
    assert wigner_css(0j, 1.0, -1) == pytest.approx(-W0)


def test_vacuum_is_positive_gaussian():
    field = wigner_numeric(basis(0, 10), GRID41)
    z = GRID41.points()
    assert np.allclose(field.values, W0 * np.exp(-2 * np.abs(z) ** 2), atol=1e-14)
    assert field.values.min() > 0


@pytest.mark.parametrize("alpha", [0.5, 1 / math.sqrt(2), 1.0, 2.0])
@pytest.mark.parametrize("phase,parity", [(0.0, 1), (math.pi, -1)])
def test_cat_wigner_matches_numeric(alpha, phase, parity):
    field = wigner_numeric(css_state(alpha, phase, 30), GRID41)
    assert np.abs(field.values - wigner_css(GRID41.points(), alpha, parity)).max() < 1e-6


@pytest.mark.parametrize("r", [0.083, 0.164, 0.313, 0.9])
def test_squeezed_photon_wigner_matches_numeric(r):
    field = wigner_numeric(squeezed_single_photon(r, 120), GRID41)
    assert np.abs(field.values - wigner_sq_photon(GRID41.points(), r)).max() < 1e-6


def test_fast_evaluator_matches_displaced_parity_oracle():
    rho = squeezed_single_photon(0.313, 20).dm()
    for z in (0.0, 0.4 + 0.3j, -0.9j, 1.1):
        assert float(wigner_point(rho, z)) == pytest.approx(wigner_expm(rho, z), abs=1e-12)
    mixed = DensityOperator(np.diag([0.3, 0.5, 0.2, 0, 0, 0]), 1, 6)
    assert float(wigner_point(mixed, 0.5j)) == pytest.approx(wigner_expm(mixed, 0.5j), abs=1e-12)


def test_normalization_and_bound():
    alpha = 2.0
    grid = PhaseGrid.square(alpha + 4, 241)
    for rho in (css_state(alpha, math.pi, 30), squeezed_single_photon(optimal_squeezing(1.0), 40)):
        field = wigner_numeric(rho, grid)
        assert field.integral() == pytest.approx(1.0, abs=1e-3)
        assert np.abs(field.values).max() <= W0 + 1e-6


def test_fringe_warning_on_coarse_grid():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        with pytest.raises(UserWarning, match="grid step"):
            wigner_numeric(css_state(2.0, 0.0, 30), PhaseGrid.square(4.0, 11))


def test_min_wigner_of_single_photon():
    z, w = min_wigner(basis(1, 10), PhaseGrid.square(2.0, 41))
    assert abs(z) < 1e-9
    assert w == pytest.approx(-W0, abs=1e-12)


def test_min_wigner_of_small_even_cat_is_slightly_negative():
    z, w = min_wigner(css_state(0.5, 0.0, 30), PhaseGrid.square(4.0, 161))
    # regression fixture: the minima sit on the imaginary axis
    assert w == pytest.approx(-0.0034302, abs=2e-6)
    assert abs(z.real) < 1e-9 and abs(abs(z.imag) - 1.2747) < 5e-3
    assert w >= -W0 - 1e-6


def test_csv_layout():
    grid = PhaseGrid((-1.0, 1.0), (0.0, 1.0), 3, 2)
    text = wigner_numeric(basis(0, 5), grid).to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == "z_re,z_im,w"
    assert len(lines) == 1 + 6
    assert lines[1].split(",")[:2] == ["-1", "0"]
    assert text == wigner_numeric(basis(0, 5), grid).to_csv()
