"""Acceptance criteria shared by ``verify-all`` and the test suite.

Each criterion is a function ``(dim, workers) -> list[Check]``.  Checks that
need more Fock levels than ``dim`` scale their truncation with it, so a
reduced ``dim`` degrades those checks rather than silently skipping them.
"""

from __future__ import annotations

import itertools
import math
import time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import experiments as ex
from .amplify import EVEN, INV_SQRT2, ODD, CaStepConfig, DetectorModel, ca_step, success_prob_closed
from .fock import DEFAULT_DIM, basis, fidelity_pure
from .optics import (
    css_fidelity_closed,
    css_state,
    optimal_squeezing,
    photon_subtract,
    squeeze_op,
    squeezed_single_photon,
    squeezed_vacuum,
)
from .purification import SourceModel, alternate_arrangement, purify_sweep, symmetric_route
from .qnd import QndConfig, fit_squeezing, heisenberg_residuals, qnd_postselect
from .report import Check
from .wigner import PhaseGrid, wigner_css, wigner_numeric, wigner_point, wigner_sq_photon


def c1_small_cats(dim: int, workers: int = 1) -> list[Check]:
    return ex.small_cat_checks()


def c2_closed_form(dim: int, workers: int = 1) -> list[Check]:
    a = "closed-form fidelity and optimal squeezing"
    worst = 0.0
    for r in np.linspace(0.02, 1.0, 20):
        sq = (squeeze_op(float(r), dim).matrix @ basis(1, dim).amplitudes)
        for alpha in np.linspace(0.1, 2.0, 20):
            cat = css_state(float(alpha), ODD, dim).amplitudes
            f_mat = abs(np.vdot(cat, sq)) ** 2
            worst = max(worst, abs(f_mat - css_fidelity_closed(float(r), float(alpha))))
    drift = 0.0
    for alpha in (0.5, INV_SQRT2, 1.0, 2.0):
        r = optimal_squeezing(alpha)
        f0 = css_fidelity_closed(r, alpha)
        drift = max(drift, *(abs(css_fidelity_closed(r + s, alpha) - f0) for s in (-1e-4, 1e-4)))
    return [
        Check("closed form vs matrix fidelity, 20x20 grid", 0.0, worst, 1e-6, a, "max"),
        Check("stationarity of optimal squeezing", 0.0, drift, 1e-6, a, "max"),
    ]


def c3_success_probability(dim: int, workers: int = 1) -> list[Check]:
    amps = (0.5, INV_SQRT2, 1.0, math.sqrt(2.0))
    worst = 0.0
    for (a, b), (pa, pb) in itertools.product(itertools.product(amps, amps), itertools.product((EVEN, ODD), repeat=2)):
        out = ca_step(css_state(a, pa, dim), css_state(b, pb, dim), CaStepConfig(a, b, pa, pb))
        worst = max(worst, abs(out.prob - success_prob_closed(a, b, pa, pb)))
    return [Check("simulated vs closed-form success probability", 0.0, worst, 1e-6,
                  "success probability for a single iteration", "max")] + ex.probability_floor_checks()


def c4_cascades(dim: int, workers: int = 1) -> list[Check]:
    return ex.cascade_checks(dim)


def c5_clicks(dim: int, workers: int = 1) -> list[Check]:
    return ex.click_checks(dim)


def c6_large_cats(dim: int, workers: int = 1) -> list[Check]:
    return ex.large_cat_checks(dim, workers)


def c7_purification(dim: int, workers: int = 1) -> list[Check]:
    grid = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5]
    checks = ex.purification_checks(purify_sweep(grid, 2, dim, alpha=0.5, workers=workers))
    gap_f = gap_p = 0.0
    for p in (0.0, 0.05, 0.25, 0.4):
        model = SourceModel.for_alpha(p, 0.5)
        s, alt = symmetric_route(model, dim), alternate_arrangement(model, dim)
        gap_f = max(gap_f, abs(s.fidelity - alt.fidelity))
        gap_p = max(gap_p, abs(s.purity - alt.purity))
    a = "alternate arrangement gives the same result"
    checks.append(Check("alternate vs symmetric fidelity", 0.0, gap_f, 1e-2, a, "max"))
    checks.append(Check("alternate vs symmetric purity", 0.0, gap_p, 1e-2, a, "max"))
    return checks


def c8_inefficiency(dim: int, workers: int = 1) -> list[Check]:
    spread, monotone = 0.0, True
    for alpha, phase in ((INV_SQRT2, ODD), (1.0, ODD), (1.0, EVEN)):
        s = css_state(alpha, phase, dim)
        fids, probs = [], []
        for eta in (0.1, 0.5, 1.0):
            out = ca_step(s, s, CaStepConfig(alpha, alpha, phase, phase, detector=DetectorModel(eta)))
            fids.append(out.fidelity())
            probs.append(out.prob)
        spread = max(spread, max(fids) - min(fids))
        monotone &= probs[0] < probs[1] < probs[2]
    a = "detector inefficiency does not affect quality"
    return [
        Check("fidelity spread across efficiencies", 0.0, spread, 1e-8, a, "max"),
        Check("success probability falls with efficiency", 1, float(monotone), 0, a, "bool"),
    ]


def c9_wigner(dim: int, workers: int = 1) -> list[Check]:
    grid = PhaseGrid.square(4.0, 41)
    z = grid.points()
    big = 4 * dim  # squeezed photons at r = 0.9 need far more levels than cats
    worst_cat = worst_sq = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for alpha in (0.5, INV_SQRT2, 1.0, 1.5, 2.0):
            for phase, parity in ((EVEN, 1), (ODD, -1)):
                num = wigner_numeric(css_state(alpha, phase, dim), grid).values
                worst_cat = max(worst_cat, float(np.abs(num - wigner_css(z, alpha, parity)).max()))
        for r in (0.083, 0.164, 0.313, 0.6, 0.9):
            num = wigner_numeric(squeezed_single_photon(r, big), grid).values
            worst_sq = max(worst_sq, float(np.abs(num - wigner_sq_photon(z, r)).max()))
    w0 = float(wigner_point(basis(1, dim), 0.0))
    a = "Wigner functions"
    return [
        Check("cat Wigner analytic vs numeric", 0.0, worst_cat, 1e-6, a, "max"),
        Check("squeezed-photon Wigner analytic vs numeric", 0.0, worst_sq, 1e-6, a, "max"),
        Check("single-photon Wigner at origin", -2 / math.pi, w0, 1e-9, a),
        ex.negativity_check(ex.negativity_sequence(0.5, 2, dim)),
    ]


def c10_qnd(dim: int, workers: int = 1) -> list[Check]:
    qdim = max(12, min(dim, 20))
    cfg = QndConfig(0.3, 0.05, qdim)
    rho, _ = qnd_postselect(1, cfg)
    r_fit, f = fit_squeezing(rho)
    worst = max(heisenberg_residuals(QndConfig(0.3, 0.05, qdim, pad=2 * qdim), margin=4).values())
    ln_k = math.log(cfg.kappa)
    a = "equivalent to squeezing a single photon"
    return [
        Check("best-fit fidelity r=0.3 delta=0.05", 0.999, f, 0.0, a, "min"),
        Check("fitted squeezing vs ln kappa", ln_k, r_fit, 0.02 * ln_k, a),
        Check("Heisenberg transforms on interior", 0.0, worst, 1e-4, "QND input-output relations", "max"),
    ]


def c11_subtraction(dim: int, workers: int = 1) -> list[Check]:
    big = 4 * dim
    worst = 1.0
    for r in (0.05, 0.164, 0.5, 1.0):
        sub, _ = photon_subtract(squeezed_vacuum(r, big))
        worst = min(worst, fidelity_pure(squeezed_single_photon(r, big), sub))
    return [Check("photon-subtracted squeezed vacuum vs squeezed photon", 1.0, worst, 1e-8,
                  "photon subtraction from squeezed vacuum")]


@dataclass(frozen=True)
class Criterion:
    number: int
    title: str
    fn: Callable[[int, int], list[Check]]


CRITERIA = [
    Criterion(1, "small cat fidelities", c1_small_cats),
    Criterion(2, "closed-form fidelity consistency", c2_closed_form),
    Criterion(3, "success probability closed form", c3_success_probability),
    Criterion(4, "cascade probabilities", c4_cascades),
    Criterion(5, "click-resolved outputs", c5_clicks),
    Criterion(6, "large cats from squeezed photons", c6_large_cats),
    Criterion(7, "purification", c7_purification),
    Criterion(8, "detector inefficiency invariance", c8_inefficiency),
    Criterion(9, "Wigner suite", c9_wigner),
    Criterion(10, "QND equivalence", c10_qnd),
    Criterion(11, "photon subtraction", c11_subtraction),
]


@dataclass(frozen=True)
class CriterionResult:
    criterion: Criterion
    checks: list[Check]
    seconds: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  criterion {self.criterion.number:2d} {self.criterion.title} ({self.seconds:.1f}s)"


def evaluate(criterion: Criterion, dim: int = DEFAULT_DIM, workers: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    checks = criterion.fn(dim, workers)
    return CriterionResult(criterion, checks, time.perf_counter() - t0)


def verify_all(dim: int = DEFAULT_DIM, workers: int = 1, echo: Callable[[str], None] | None = print):
    results = []
    for c in CRITERIA:
        res = evaluate(c, dim, workers)
        results.append(res)
        if echo:
            echo(res.line())
            for chk in res.checks:
                echo("    " + chk.line())
    return results
