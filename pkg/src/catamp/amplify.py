"""Conditional cat-state amplification with beam splitters and click detectors.

One step takes cat-like states on modes a and b, mixes them on BS1 into
modes (f, g), mixes g with an auxiliary coherent field c on a balanced BS2
into detector modes (t1, t2), and keeps mode f when both detectors click.

Mode g never reaches the output, so BS2, the auxiliary field and the lossy
detectors collapse into one effective POVM element on g,
``E = sum_{n,m} w(n,m) K_nm^dag K_nm`` with ``K_nm = <n,m|BS2|.>|gamma>``.
The conditional output is ``Tr_g[(1 x E) rho_fg]``.  :func:`ca_step_explicit`
does the same thing literally on three modes and serves as a cross-check.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from .fock import (
    DEFAULT_DIM,
    DensityOperator,
    FockState,
    State,
    apply,
    as_density,
    fidelity_pure,
    partial_trace,
    purity,
    tensor,
)
from .optics import beam_splitter, coherent_state, css_state

MIN_PROB = 1e-15
ODD = math.pi
EVEN = 0.0
INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class DetectorModel:
    """Photodetector with quantum efficiency ``efficiency``.

    ``kind`` is ``"threshold"`` (click on any photons) or ``"resolving"``.
    """

    efficiency: float = 1.0
    kind: str = "threshold"

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError("efficiency must be in (0, 1]")
        if self.kind not in ("threshold", "resolving"):
            raise ValueError(f"unknown detector kind {self.kind!r}")


@dataclass(frozen=True)
class CaStepConfig:
    """Parameters of one amplification step.

    ``accept`` is ``None`` for click-click on both detectors, or an explicit
    set of detected (n, m) count pairs.  ``gamma`` defaults to
    2 alpha beta / sqrt(alpha^2 + beta^2).
    """

    alpha: float
    beta: float
    phi_a: float = ODD
    phi_b: float = ODD
    gamma: float | None = None
    detector: DetectorModel = field(default_factory=DetectorModel)
    accept: frozenset | None = None

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("input amplitudes must be positive")
        if self.accept is not None:
            object.__setattr__(self, "accept", frozenset(tuple(p) for p in self.accept))

    @property
    def amplitude(self) -> float:
        return math.hypot(self.alpha, self.beta)

    @property
    def bs1(self) -> tuple[float, float]:
        a = self.amplitude
        return self.beta / a, self.alpha / a

    @property
    def aux_amplitude(self) -> float:
        if self.gamma is not None:
            return self.gamma
        return 2.0 * self.alpha * self.beta / self.amplitude

    @property
    def output_phase(self) -> float:
        return (self.phi_a + self.phi_b) % (2 * math.pi)


@dataclass(frozen=True, eq=False)
class CaOutcome:
    """Heralded state on mode f and detector statistics.

    ``output`` has trace ``prob``.  ``clicks[n, m]`` is the probability of
    detecting n photons at t1 and m at t2, over all outcomes.
    """

    output: DensityOperator
    prob: float
    clicks: np.ndarray
    amplitude: float
    phase: float

    def state(self) -> DensityOperator:
        return self.output.normalized()

    def target(self) -> FockState:
        return css_state(self.amplitude, self.phase, self.output.dim)

    def fidelity(self, target: FockState | None = None) -> float:
        return fidelity_pure(target or self.target(), self.output)

    def purity(self) -> float:
        return purity(self.output)

    def share(self, pairs: Iterable[tuple[int, int]]) -> float:
        """Fraction of the accepted probability carried by ``pairs``."""
        return sum(self.clicks[n, m] for n, m in pairs) / self.prob


def loss_matrix(eta: float, dim: int) -> np.ndarray:
    """L[k, n] = P(detect k | n photons) = C(n,k) eta^k (1-eta)^(n-k)."""
    n = np.arange(dim)[None, :]
    k = np.arange(dim)[:, None]
    if eta >= 1.0:
        return np.eye(dim)
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = (
            gammaln(n + 1) - gammaln(k + 1) - gammaln(np.maximum(n - k, 0) + 1)
            + k * math.log(eta) + (n - k) * math.log1p(-eta)
        )
    return np.where(k <= n, np.exp(logp), 0.0)


def accept_mask(cfg: CaStepConfig, dim: int) -> np.ndarray:
    mask = np.zeros((dim, dim))
    if cfg.accept is None:
        mask[1:, 1:] = 1.0
    else:
        for n, m in cfg.accept:
            if 0 <= n < dim and 0 <= m < dim:
                mask[n, m] = 1.0
    return mask


def click_weights(cfg: CaStepConfig, dim: int) -> np.ndarray:
    """Acceptance weight for each pair of photon numbers reaching the detectors."""
    lm = loss_matrix(cfg.detector.efficiency, dim)
    return lm.T @ accept_mask(cfg, dim) @ lm


@lru_cache(maxsize=32)
def _aux_kraus(gamma: float, dim: int) -> np.ndarray:
    # K[(n, m), g] = sum_c <n, m|BS2|g, c> <c|gamma>
    bs2 = beam_splitter(INV_SQRT2, INV_SQRT2, dim).matrix.reshape(dim * dim, dim, dim)
    k = bs2 @ coherent_state(gamma, dim).amplitudes
    k.flags.writeable = False
    return k


def detector_loss(rho: State, mode: int, eta: float) -> DensityOperator:
    """Pure-loss channel on ``mode``: mix with a vacuum ancilla and trace it out."""
    if not 0.0 < eta <= 1.0:
        raise ValueError("efficiency must be in (0, 1]")
    rho = as_density(rho)
    if eta == 1.0:
        return rho
    d, m = rho.dim, rho.num_modes
    # BS(sqrt(1-eta), sqrt(eta)) keeps sqrt(eta) of the field in the mode
    bs = beam_splitter(math.sqrt(1 - eta), math.sqrt(eta), d).matrix.reshape(d, d, d, d)
    kraus = bs[:, :, :, 0]  # [out mode, out ancilla, in mode], ancilla in vacuum
    t = rho.tensor
    out = np.zeros_like(t)
    for j in range(d):
        kj = kraus[:, j, :]
        if not np.any(kj):
            continue
        tmp = np.moveaxis(np.tensordot(kj, t, axes=([1], [mode])), 0, mode)
        tmp = np.moveaxis(np.tensordot(kj.conj(), tmp, axes=([1], [m + mode])), 0, m + mode)
        out += tmp
    side = d**m
    return DensityOperator(out.reshape(side, side), m, d)


def _normalized_dm(state: State) -> np.ndarray:
    rho = as_density(state)
    w = rho.weight
    if w <= 0:
        raise ValueError("input state has zero weight")
    return rho.matrix / w


def ca_step(state_a: State, state_b: State, cfg: CaStepConfig) -> CaOutcome:
    """Run one amplification step and return the heralded output on mode f.

    Sub-normalized inputs (outputs of earlier steps) are renormalized first,
    so ``prob`` is the success probability of this step alone.
    """
    if state_a.dim != state_b.dim:
        raise ValueError("inputs have different truncation dims")
    if state_a.num_modes != 1 or state_b.num_modes != 1:
        raise ValueError("inputs must be single-mode")
    d = state_a.dim
    r, t = cfg.bs1
    b1 = beam_splitter(r, t, d).matrix
    if isinstance(state_a, FockState) and isinstance(state_b, FockState):
        psi = b1 @ np.kron(state_a.normalized().amplitudes, state_b.normalized().amplitudes)
        rho_fg = np.outer(psi, psi.conj())
    else:
        rho_ab = np.kron(_normalized_dm(state_a), _normalized_dm(state_b))
        rho_fg = b1 @ rho_ab @ b1.conj().T
    kraus = _aux_kraus(float(cfg.aux_amplitude), d)
    w = click_weights(cfg, d).ravel()
    povm = kraus.conj().T @ (w[:, None] * kraus)  # E[g, g']
    r4 = rho_fg.reshape(d, d, d, d)
    out = np.einsum("agbh,hg->ab", r4, povm)
    out = 0.5 * (out + out.conj().T)
    prob = float(np.trace(out).real)
    if prob < MIN_PROB:
        raise ValueError(f"acceptance probability {prob:.3g} is degenerate")
    rho_g = np.einsum("agah->gh", r4)
    true_counts = np.einsum("ng,gh,nh->n", kraus, rho_g, kraus.conj()).real.reshape(d, d)
    lm = loss_matrix(cfg.detector.efficiency, d)
    clicks = lm @ true_counts @ lm.T
    return CaOutcome(
        DensityOperator(out, 1, d), prob, clicks, cfg.amplitude, cfg.output_phase
    )


def ca_step_explicit(state_a: State, state_b: State, cfg: CaStepConfig) -> CaOutcome:
    """Literal three-mode version of :func:`ca_step` (slow; small dims only)."""
    d = state_a.dim
    r, t = cfg.bs1
    rho = tensor(
        as_density(state_a).normalized(),
        as_density(state_b).normalized(),
        coherent_state(cfg.aux_amplitude, d).dm(),
    )
    rho = apply(beam_splitter(r, t, d), rho, [0, 1])
    rho = apply(beam_splitter(INV_SQRT2, INV_SQRT2, d), rho, [1, 2])
    for mode in (1, 2):
        rho = detector_loss(rho, mode, cfg.detector.efficiency)
    mask = accept_mask(cfg, d)
    t3 = rho.tensor
    out = np.einsum("anmbnm,nm->ab", t3, mask)
    detected = partial_trace(rho, [1, 2]).diagonal().reshape(d, d)
    out_dm = DensityOperator(out, 1, d)
    return CaOutcome(out_dm, out_dm.weight, detected, cfg.amplitude, cfg.output_phase)


def success_prob_closed(alpha: float, beta: float, phi: float, phi2: float) -> float:
    """Click-click probability for ideal cat inputs and perfect detectors."""
    if alpha <= 0 or beta <= 0:
        raise ValueError("amplitudes must be positive")
    a2, b2 = alpha * alpha, beta * beta
    num = (-math.expm1(-2 * a2 * b2 / (a2 + b2))) ** 2 * (
        1 + math.cos(phi + phi2) * math.exp(-2 * (a2 + b2))
    )
    den = 2 * (1 + math.cos(phi) * math.exp(-2 * a2)) * (1 + math.cos(phi2) * math.exp(-2 * b2))
    return num / den


def mixed_parity_step(
    big: State,
    alpha_big: float,
    phase_big: float,
    small: State,
    alpha_small: float,
    phase_small: float,
    detector: DetectorModel | None = None,
    **overrides,
) -> CaOutcome:
    """Combine two cats of different size; the output amplitude is their hypot."""
    cfg = CaStepConfig(
        alpha_big, alpha_small, phase_big, phase_small,
        detector=detector or DetectorModel(), **overrides,
    )
    return ca_step(big, small, cfg)


@dataclass(frozen=True, eq=False)
class StageResult:
    stage: int
    outcome: CaOutcome
    steps: int  # parallel steps at this stage

    @property
    def prob(self) -> float:
        return self.outcome.prob

    @property
    def amplitude(self) -> float:
        return self.outcome.amplitude


@dataclass(frozen=True, eq=False)
class TreeResult:
    initial: State
    initial_amplitude: float
    initial_phase: float
    stages: list[StageResult]

    @property
    def final(self) -> CaOutcome:
        return self.stages[-1].outcome

    @property
    def stage_probs(self) -> list[float]:
        return [s.prob for s in self.stages]

    @property
    def total_prob(self) -> float:
        """Probability that every step of the tree succeeds at once (no memory)."""
        return math.prod(s.prob**s.steps for s in self.stages)

    def attempts(self, model: Callable | None = None) -> float:
        return expected_attempts([(s.steps, s.prob) for s in self.stages], model)


def iterate_tree(
    initial: State,
    alpha: float,
    phase: float,
    n_stages: int,
    detector: DetectorModel | None = None,
    accept: frozenset | None = None,
) -> TreeResult:
    """Feed identical copies pairwise through ``n_stages`` amplification steps.

    Stage k runs 2^(n_stages - k) steps in parallel; each consumes two copies
    of the previous stage's heralded output.
    """
    if n_stages < 1:
        raise ValueError("need at least one stage")
    detector = detector or DetectorModel()
    state, amp, ph = initial, alpha, phase
    stages = []
    for k in range(1, n_stages + 1):
        cfg = CaStepConfig(amp, amp, ph, ph, detector=detector, accept=accept)
        out = ca_step(state, state, cfg)
        stages.append(StageResult(k, out, 2 ** (n_stages - k)))
        state, amp, ph = out.output, out.amplitude, out.phase
    return TreeResult(initial, alpha, phase, stages)


def cascade_probability(alpha: float, phase: float, n_stages: int) -> tuple[float, list[float]]:
    """No-memory success probability of an ideal-cat tree from the closed form."""
    probs = []
    a, ph = alpha, phase
    for _ in range(n_stages):
        probs.append(success_prob_closed(a, a, ph, ph))
        a, ph = math.sqrt(2) * a, (2 * ph) % (2 * math.pi)
    total = math.prod(p ** (2 ** (n_stages - k - 1)) for k, p in enumerate(probs))
    return total, probs


def geometric_attempts(stages: Sequence[tuple[int, float]]) -> float:
    """Independent geometric trials: sum over stages of successes / probability."""
    return sum(n / p for n, p in stages)


def expected_attempts(stages: Sequence[tuple[int, float]], model: Callable | None = None) -> float:
    """Expected number of step attempts given (steps needed, probability) per stage."""
    return (model or geometric_attempts)(stages)


def load_config(source) -> dict:
    """Parse a step/tree JSON document.

    Shape: ``{alpha_i, phases, stages, detector: {efficiency, kind}, accept, dim}``.
    """
    if isinstance(source, (str, bytes)) and str(source).lstrip().startswith("{"):
        doc = json.loads(source)
    elif isinstance(source, dict):
        doc = dict(source)
    else:
        with open(source) as fh:
            doc = json.load(fh)
    det = doc.get("detector", {})
    phases = doc.get("phases", [ODD, ODD])
    if isinstance(phases, (int, float)):
        phases = [phases, phases]
    accept = doc.get("accept")
    if accept in (None, "click-click", "threshold"):
        accept = None
    else:
        accept = frozenset(tuple(int(x) for x in p) for p in accept)
    return {
        "alpha_i": float(doc["alpha_i"]),
        "phases": [float(p) for p in phases],
        "stages": int(doc.get("stages", 1)),
        "detector": DetectorModel(float(det.get("efficiency", 1.0)), det.get("kind", "threshold")),
        "accept": accept,
        "dim": int(doc.get("dim", DEFAULT_DIM)),
    }


def with_accept(cfg: CaStepConfig, pairs) -> CaStepConfig:
    return replace(cfg, accept=None if pairs is None else frozenset(pairs))


__all__ = [
    "CaOutcome",
    "CaStepConfig",
    "DetectorModel",
    "StageResult",
    "TreeResult",
    "ca_step",
    "ca_step_explicit",
    "cascade_probability",
    "detector_loss",
    "expected_attempts",
    "geometric_attempts",
    "iterate_tree",
    "load_config",
    "loss_matrix",
    "mixed_parity_step",
    "success_prob_closed",
]
