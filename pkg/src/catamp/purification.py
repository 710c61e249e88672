"""Amplification of mixed squeezed photons from an imperfect single-photon source.

A source that fails with probability ``p`` emits vacuum, so after squeezing the
input is ``p S|0><0|S^dag + (1-p) S|1><1|S^dag``.  The squeezed vacuum and
squeezed photon have disjoint parity support, which makes the input purity
exactly ``p^2 + (1-p)^2``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

from .amplify import EVEN, ODD, CaOutcome, CaStepConfig, DetectorModel, ca_step
from .fock import DEFAULT_DIM, DensityOperator, FockState, fidelity_pure, purity
from .optics import (
    alpha_for_squeezing,
    css_fidelity_closed,
    css_state,
    optimal_squeezing,
    squeezed_single_photon,
    squeezed_vacuum,
)

HALF_CAT_R = 0.163725  # optimal squeezing for alpha = 1/sqrt(2)


@dataclass(frozen=True)
class SourceModel:
    """Photon-production inefficiency ``p`` and squeezing ``r`` of the source."""

    p: float
    r: float

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise ValueError("p must be in [0, 1)")

    @classmethod
    def for_alpha(cls, p: float, alpha: float) -> "SourceModel":
        return cls(p, optimal_squeezing(alpha))

    @property
    def alpha(self) -> float:
        """Cat amplitude this squeezing is optimal for."""
        return alpha_for_squeezing(self.r)


def mixed_sq_photon(model: SourceModel, dim: int = DEFAULT_DIM) -> DensityOperator:
    s0 = squeezed_vacuum(model.r, dim).amplitudes
    s1 = squeezed_single_photon(model.r, dim).amplitudes
    m = model.p * np.outer(s0, s0.conj()) + (1 - model.p) * np.outer(s1, s1.conj())
    return DensityOperator(m, 1, dim)


class Metrics(NamedTuple):
    fidelity: float
    purity: float
    prob: float


def _metrics(out: CaOutcome, target_alpha: float, target_phase: float) -> Metrics:
    tgt = css_state(target_alpha, target_phase, out.output.dim)
    return Metrics(fidelity_pure(tgt, out.output), purity(out.output), out.prob)


def purify_once(
    model: SourceModel, dim: int = DEFAULT_DIM, efficiency: float = 1.0
) -> Metrics:
    """One step on two independent mixed inputs, scored against CSS_+(sqrt2 alpha)."""
    return _symmetric(model, dim, efficiency, 1)[0]


def _symmetric(model: SourceModel, dim: int, efficiency: float, iterations: int) -> list[Metrics]:
    det = DetectorModel(efficiency)
    state, amp, ph = mixed_sq_photon(model, dim), model.alpha, ODD
    out = []
    for _ in range(iterations):
        step = ca_step(state, state, CaStepConfig(amp, amp, ph, ph, detector=det))
        out.append(_metrics(step, step.amplitude, step.phase))
        state, amp, ph = step.output, step.amplitude, step.phase
    return out


class SweepRow(NamedTuple):
    p: float
    purity_in: float
    purity_1: float
    purity_2: float
    fid_in: float
    fid_1: float
    fid_2: float


SWEEP_COLUMNS = SweepRow._fields


def _sweep_cell(p: float, alpha: float, iterations: int, dim: int, efficiency: float) -> SweepRow:
    model = SourceModel.for_alpha(p, alpha)
    rho = mixed_sq_photon(model, dim)
    fid_in = fidelity_pure(css_state(model.alpha, ODD, dim), rho)
    steps = _symmetric(model, dim, efficiency, iterations)
    nan = float("nan")
    second = steps[1] if iterations > 1 else Metrics(nan, nan, nan)
    return SweepRow(
        p, purity(rho), steps[0].purity, second.purity, fid_in, steps[0].fidelity, second.fidelity
    )


def purify_sweep(
    p_grid: Iterable[float],
    iterations: int = 2,
    dim: int = DEFAULT_DIM,
    *,
    alpha: float = 0.5,
    efficiency: float = 1.0,
    workers: int = 1,
) -> list[SweepRow]:
    """Purity and fidelity before and after one or two symmetric iterations.

    Fidelity references are the ideal cats at alpha, sqrt2 alpha and 2 alpha.
    """
    if iterations not in (1, 2):
        raise ValueError("iterations must be 1 or 2")
    grid = [float(p) for p in p_grid]
    if any(not 0.0 <= p <= 0.5 for p in grid):
        raise ValueError("p grid must lie in [0, 0.5]")
    args = [(p, alpha, iterations, dim, efficiency) for p in grid]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda a: _sweep_cell(*a), args))
    return [_sweep_cell(*a) for a in args]


@dataclass(frozen=True, eq=False)
class RouteResult:
    output: DensityOperator
    fidelity: float
    purity: float
    amplitudes: tuple[float, ...]
    phases: tuple[float, ...]
    step_fidelities: tuple[float, ...]


def symmetric_route(model: SourceModel, dim: int = DEFAULT_DIM, efficiency: float = 1.0) -> RouteResult:
    """Two rounds of pairwise amplification (four inputs in, one out)."""
    det = DetectorModel(efficiency)
    a = model.alpha
    rho = mixed_sq_photon(model, dim)
    s1 = ca_step(rho, rho, CaStepConfig(a, a, ODD, ODD, detector=det))
    s2 = ca_step(s1.output, s1.output, CaStepConfig(s1.amplitude, s1.amplitude, EVEN, EVEN, detector=det))
    return _route([s1, s2])


def alternate_arrangement(model: SourceModel, dim: int = DEFAULT_DIM, efficiency: float = 1.0) -> RouteResult:
    """Same four inputs combined as ((x, x), x), x instead of pairwise."""
    det = DetectorModel(efficiency)
    a = model.alpha
    rho = mixed_sq_photon(model, dim)
    steps = [ca_step(rho, rho, CaStepConfig(a, a, ODD, ODD, detector=det))]
    for _ in range(2):
        prev = steps[-1]
        cfg = CaStepConfig(prev.amplitude, a, prev.phase, ODD, detector=det)
        steps.append(ca_step(prev.output, rho, cfg))
    return _route(steps)


def _route(steps: list[CaOutcome]) -> RouteResult:
    fids = tuple(s.fidelity() for s in steps)
    last = steps[-1]
    return RouteResult(
        last.output,
        fids[-1],
        purity(last.output),
        tuple(s.amplitude for s in steps),
        tuple(s.phase for s in steps),
        fids,
    )


# error-term description of a squeezed photon near an odd cat


def error_term_delta(k: int, r: float = HALF_CAT_R, alpha: float = 1 / math.sqrt(2)) -> float:
    """Coefficient of |2k+1> in S(r)|1> scaled so its |1> part matches CSS_-(alpha).

    For alpha = 1/sqrt(2) this is
    e^{1/4} [tanh(r)^k (2k+1)! - k!] / (2^k k! sqrt((2k+1)!) sqrt(e-1)).
    """
    a2 = alpha * alpha
    pref = 2 * alpha * math.exp(-a2 / 2) / math.sqrt(2 * -math.expm1(-2 * a2))
    lf = gammaln(2 * k + 2)
    sq = math.tanh(r) ** k * math.exp(0.5 * lf - k * math.log(2) - gammaln(k + 1))
    cat = alpha ** (2 * k) * math.exp(-0.5 * lf)
    return pref * (sq - cat)


def error_term_state(delta: float, alpha: float = 1 / math.sqrt(2), level: int = 5, dim: int = DEFAULT_DIM) -> FockState:
    """N(|CSS_-(alpha)> + delta |level>)."""
    v = css_state(alpha, ODD, dim).amplitudes.copy()
    v[level] += delta
    return FockState(v / np.linalg.norm(v), 1, dim)


def matched_delta(
    fidelity: float | None = None, alpha: float = 1 / math.sqrt(2), level: int = 5, dim: int = DEFAULT_DIM
) -> float:
    """Positive delta giving the error-term state the requested cat fidelity.

    Defaults to the fidelity of the optimally squeezed photon.
    """
    if fidelity is None:
        fidelity = css_fidelity_closed(optimal_squeezing(alpha), alpha)
    cat = css_state(alpha, ODD, dim)

    def gap(d):
        return fidelity_pure(cat, error_term_state(d, alpha, level, dim)) - fidelity

    return brentq(gap, 1e-9, 1.0, xtol=1e-14)
