"""Coherent states, cat states, squeezers, beam splitters and closed forms.

Conventions: ``X = a + a^dag`` and ``Y = -i(a - a^dag)`` so the vacuum has
unit quadrature variance.  The squeezer ``S(r) = exp(-(r/2)(a^2 - a^dag^2))``
squeezes Y for r > 0, and the beam splitter maps
``|alpha>|beta> -> |t alpha + r beta>|-r alpha + t beta>``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.special import erfc, eval_genlaguerre, gammaln

from .fock import (
    DEFAULT_DIM,
    FockState,
    ModeOperator,
    State,
    TruncationError,
    TruncationWarning,
    apply,
)

COHERENT_WARN = 1e-8
COHERENT_MAX = 1e-3


@dataclass(frozen=True)
class CssSpec:
    """Cat state N(|alpha> + e^{i phi}|-alpha>); phi=0 even, phi=pi odd."""

    alpha: float
    phi: float = 0.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")

    def state(self, dim: int = DEFAULT_DIM) -> FockState:
        return css_state(self.alpha, self.phi, dim)


@dataclass(frozen=True)
class SqueezeSpec:
    r: float

    def __post_init__(self):
        if not math.isfinite(self.r):
            raise ValueError("squeezing must be finite")

    @property
    def variance(self) -> float:
        return squeezed_variance(self.r)


def _r(spec) -> float:
    return float(spec.r) if isinstance(spec, SqueezeSpec) else float(spec)


def coherent_leakage(alpha: complex, dim: int) -> float:
    """Poisson weight above the truncation, 1 - sum_{n<dim} |<n|alpha>|^2."""
    mean = abs(alpha) ** 2
    if mean == 0:
        return 0.0
    n = np.arange(dim)
    logp = -mean + n * math.log(mean) - gammaln(n + 1)
    return float(max(0.0, -np.expm1(np.log(np.exp(logp).sum()))))


def _poisson_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    amps = np.empty(dim, complex)
    amps[0] = math.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, dim):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    return amps


def coherent_state(
    alpha: complex, dim: int = DEFAULT_DIM, *, max_leakage: float = COHERENT_MAX
) -> FockState:
    """|alpha>, renormalized after truncation.

    Warns when the truncated tail exceeds 1e-8 and raises
    :class:`TruncationError` above ``max_leakage``.
    """
    leak = coherent_leakage(alpha, dim)
    if leak > max_leakage:
        raise TruncationError(
            f"coherent amplitude {alpha} leaks {leak:.2e} beyond dim {dim}"
        )
    if leak > COHERENT_WARN:
        warnings.warn(
            f"coherent amplitude {alpha} leaks {leak:.2e} at dim {dim}",
            TruncationWarning,
            stacklevel=2,
        )
    amps = _poisson_amplitudes(alpha, dim)
    return FockState(amps / np.linalg.norm(amps), 1, dim)


def css_norm(alpha: float, phi: float) -> float:
    """N_phi(alpha) with |N|^-2 = 2(1 + cos(phi) exp(-2 alpha^2))."""
    return 1.0 / math.sqrt(2.0 * (1.0 + math.cos(phi) * math.exp(-2.0 * alpha**2)))


def css_state(alpha: float, phi: float = 0.0, dim: int = DEFAULT_DIM) -> FockState:
    """N(|alpha> + e^{i phi}|-alpha>), normalized after truncation."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    leak = coherent_leakage(alpha, dim)
    if leak > COHERENT_MAX:
        raise TruncationError(f"cat amplitude {alpha} leaks {leak:.2e} beyond dim {dim}")
    # alpha^n / sqrt(n!) without the exp(-alpha^2/2) factor; it cancels on normalizing
    amps = np.empty(dim, complex)
    amps[0] = 1.0
    for n in range(1, dim):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    parity = np.where(np.arange(dim) % 2 == 0, 1.0, -1.0)
    amps = amps * (1.0 + np.exp(1j * phi) * parity)
    nrm = np.linalg.norm(amps)
    if nrm < 1e-300 or (alpha == 0 and abs(1 + np.exp(1j * phi)) < 1e-12):
        raise ValueError("cat state is the zero vector (odd cat at alpha = 0)")
    return FockState(amps / nrm, 1, dim)


def ladder(kind: str, dim: int = DEFAULT_DIM) -> ModeOperator:
    """Annihilation ('annihilate') or creation ('create') operator."""
    a = np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)
    if kind in ("annihilate", "a"):
        return ModeOperator(a, 1, dim)
    if kind in ("create", "adag"):
        return ModeOperator(a.T.copy(), 1, dim)
    raise ValueError(f"unknown ladder kind {kind!r}")


def quadratures(dim: int = DEFAULT_DIM) -> tuple[np.ndarray, np.ndarray]:
    """Truncated X = a + a^dag and Y = -i(a - a^dag)."""
    a = ladder("annihilate", dim).matrix
    ad = a.conj().T
    return a + ad, -1j * (a - ad)


def number_op(dim: int = DEFAULT_DIM) -> np.ndarray:
    return np.diag(np.arange(dim)).astype(complex)


def squeezed_variance(r: float) -> float:
    """Variance of the squeezed quadrature, V = exp(-2r)."""
    return math.exp(-2.0 * r)


def squeeze_op(spec, dim: int = DEFAULT_DIM, *, pad: int | None = None, max_r: float = 2.0) -> ModeOperator:
    """S(r) by matrix exponential on a padded space, cropped to ``dim``."""
    r = _r(spec)
    if abs(r) > max_r:
        raise ValueError(f"|r| = {abs(r)} exceeds the supported range {max_r}")
    if pad is None:
        pad = max(10, dim)
    big = dim + pad
    a = np.diag(np.sqrt(np.arange(1, big)), 1)
    gen = -0.5 * r * (a @ a - a.T @ a.T)
    u = expm(gen)[:dim, :dim].astype(complex)
    op = ModeOperator(u, 1, dim)
    return ModeOperator(u, 1, dim, op.unitarity_defect())


def squeezed_single_photon(spec, dim: int = DEFAULT_DIM) -> FockState:
    """S(r)|1> from its closed-form odd-photon expansion, renormalized."""
    r = _r(spec)
    t = math.tanh(r)
    amps = np.zeros(dim, complex)
    # log of sqrt((2n+1)!) / (2^n n!)
    for n in range((dim - 2) // 2 + 1):
        lvl = 2 * n + 1
        if lvl >= dim:
            break
        logc = 0.5 * gammaln(lvl + 1) - n * math.log(2) - gammaln(n + 1)
        amps[lvl] = (t**n if n else 1.0) * math.exp(logc) / math.cosh(r) ** 1.5
    return FockState(amps / np.linalg.norm(amps), 1, dim)


def squeezed_vacuum(spec, dim: int = DEFAULT_DIM) -> FockState:
    """S(r)|0> from its closed-form even-photon expansion, renormalized."""
    r = _r(spec)
    t = math.tanh(r)
    amps = np.zeros(dim, complex)
    for n in range((dim - 1) // 2 + 1):
        lvl = 2 * n
        if lvl >= dim:
            break
        logc = 0.5 * gammaln(lvl + 1) - n * math.log(2) - gammaln(n + 1)
        amps[lvl] = (t**n if n else 1.0) * math.exp(logc) / math.sqrt(math.cosh(r))
    return FockState(amps / np.linalg.norm(amps), 1, dim)


def css_fidelity_closed(r: float, alpha: float) -> float:
    """|<CSS_-(alpha)|S(r)|1>|^2 in closed form."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    a2 = alpha * alpha
    return (
        2.0 * a2 * math.exp(a2 * (math.tanh(r) - 1.0))
        / (math.cosh(r) ** 3 * -math.expm1(-2.0 * a2))
    )


def optimal_squeezing(alpha: float) -> float:
    """Squeezing that maximizes the odd-cat fidelity of S(r)|1>.

    Stationarity of the closed-form fidelity gives alpha^2 = (3/2) sinh(2r),
    i.e. cosh^2 r = 1/2 + sqrt(9 + 4 alpha^4) / 6.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    c2 = 0.5 + math.sqrt(9.0 + 4.0 * alpha**4) / 6.0
    return math.acosh(math.sqrt(c2))


def alpha_for_squeezing(r: float) -> float:
    """Inverse of :func:`optimal_squeezing`: alpha^2 = (3/2) sinh(2r)."""
    if r < 0:
        raise ValueError("r must be non-negative")
    return math.sqrt(1.5 * math.sinh(2.0 * r))


@lru_cache(maxsize=64)
def _bs_matrix(theta: float, dim: int) -> np.ndarray:
    # exact exponential of theta(a^dag b - a b^dag), block by total photon number
    u = np.zeros((dim * dim, dim * dim))
    for total in range(2 * dim - 1):
        k = np.arange(total + 1)
        g = np.zeros((total + 1, total + 1))
        up = np.sqrt((k[:-1] + 1) * (total - k[:-1]))  # a^dag b : k -> k+1
        g[k[1:], k[:-1]] = up
        g[k[:-1], k[1:]] = -up
        blk = expm(theta * g)
        keep = k[(k < dim) & (total - k < dim)]
        idx = keep * dim + (total - keep)
        u[np.ix_(idx, idx)] = blk[np.ix_(keep, keep)]
    u.flags.writeable = False
    return u


def beam_splitter(r: float, t: float, dim: int = DEFAULT_DIM) -> ModeOperator:
    """Two-mode beam splitter with reflectivity ``r`` and transmissivity ``t``."""
    if abs(r * r + t * t - 1.0) > 1e-12:
        raise ValueError(f"r^2 + t^2 = {r * r + t * t} != 1")
    theta = math.atan2(r, t)
    u = _bs_matrix(round(theta, 15), dim).astype(complex)
    # exact on total photon number < dim; columns above that lose weight to the crop
    return ModeOperator(u, 2, dim, ModeOperator(u, 2, dim).unitarity_defect())


def displacement_op(beta: complex, dim: int = DEFAULT_DIM, *, method: str = "exact", pad: int | None = None) -> ModeOperator:
    """D(beta) = exp(beta a^dag - beta* a) restricted to ``dim`` levels.

    ``method='exact'`` uses the Laguerre closed form for the matrix elements;
    ``method='expm'`` exponentiates on a padded space and crops.
    """
    if method == "expm":
        if pad is None:
            pad = max(10, dim, int(4 * abs(beta) ** 2) + 20)
        big = dim + pad
        a = np.diag(np.sqrt(np.arange(1, big)), 1).astype(complex)
        u = expm(beta * a.conj().T - np.conj(beta) * a)[:dim, :dim]
        return ModeOperator(u, 1, dim)
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    x = abs(beta) ** 2
    m = np.arange(dim)[:, None]
    n = np.arange(dim)[None, :]
    lo = np.minimum(m, n)
    k = np.abs(m - n)
    lag = eval_genlaguerre(lo, k, x)
    logf = 0.5 * (gammaln(lo + 1) - gammaln(lo + k + 1))
    pw = np.where(m >= n, beta ** k, (-np.conj(beta)) ** k)
    u = np.exp(logf - x / 2) * pw * lag
    return ModeOperator(u, 1, dim)


def photon_subtract(state: FockState) -> tuple[FockState, float]:
    """Normalized a|psi> and the norm ||a psi||.

    For S(r)|0> the norm equals sinh(r) under the squeezer convention above.
    """
    out = apply(ladder("annihilate", state.dim), state, 0)
    nrm = math.sqrt(out.norm)
    if nrm < 1e-14:
        raise ValueError("photon subtraction annihilates the state")
    return out.normalized(), nrm


def photon_add(state: FockState) -> tuple[FockState, float]:
    """Normalized a^dag|psi> and its norm (top level is lost to truncation)."""
    out = apply(ladder("create", state.dim), state, 0)
    nrm = math.sqrt(out.norm)
    if nrm < 1e-14:
        raise ValueError("photon addition produced the zero vector")
    return out.normalized(), nrm


def homodyne_error_prob(alpha: float) -> float:
    """Error of telling |alpha> from |-alpha> by homodyne sign: erfc(sqrt2 alpha)/2."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    return 0.5 * float(erfc(math.sqrt(2.0) * alpha))
