"""QND coupling with homodyne-window post-selection on the meter.

Modes are ordered (signal, meter).  The coupling ``exp(i c X_m Y_s)`` with
``c = sinh r`` gives ``Y_m -> Y_m + 2 sinh(r) Y_s`` and
``X_s -> X_s - 2 sinh(r) X_m`` while leaving ``Y_s`` and ``X_m`` alone.
Post-selecting the meter's Y quadrature near zero turns a single photon into
a squeezed single photon with ``exp(r') = kappa = sqrt(1 + 4 sigma sinh^2 r)``,
where ``sigma = 1`` is the vacuum meter's Y variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from .fock import DensityOperator, FockState, ModeOperator, fidelity_pure, partial_trace
from .optics import quadratures, squeezed_single_photon

MIN_ACCEPT = 1e-12
METER_VARIANCE = 1.0


@dataclass(frozen=True)
class QndConfig:
    r: float
    delta: float = 0.05
    dim: int = 20
    pad: int = 20

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("window half-width must be positive")
        if self.r < 0:
            raise ValueError("r must be non-negative")

    @property
    def coupling(self) -> float:
        return math.sinh(self.r)

    @property
    def kappa(self) -> float:
        return math.sqrt(1.0 + 4.0 * METER_VARIANCE * math.sinh(self.r) ** 2)


def _eig_quadratures(n: int):
    x, y = quadratures(n)
    ex, vx = np.linalg.eigh(x)
    ey, vy = np.linalg.eigh(y)
    return ex, vx, ey, vy


def _qnd_padded(cfg: QndConfig) -> tuple[np.ndarray, int]:
    """exp(i c Y_s X_m) on the padded two-mode space, via the quadrature eigenbases."""
    big = cfg.dim + cfg.pad
    ex, vx, ey, vy = _eig_quadratures(big)
    phase = np.exp(1j * cfg.coupling * np.outer(ey, ex))  # [signal y_i, meter x_j]
    v = np.kron(vy, vx)
    return (v * phase.ravel()) @ v.conj().T, big


def qnd_unitary(cfg: QndConfig) -> ModeOperator:
    """The coupling cropped to ``cfg.dim`` levels per mode (signal, meter)."""
    u, big = _qnd_padded(cfg)
    keep = (np.arange(cfg.dim)[:, None] * big + np.arange(cfg.dim)[None, :]).ravel()
    crop = u[np.ix_(keep, keep)]
    op = ModeOperator(crop, 2, cfg.dim)
    return ModeOperator(crop, 2, cfg.dim, op.unitarity_defect())


def heisenberg_residuals(cfg: QndConfig, margin: int = 4) -> dict[str, float]:
    """Relative error of the four quadrature transforms on the interior block.

    The interior keeps two-mode indices with both levels below dim - margin.
    """
    u, big = _qnd_padded(cfg)
    x, y = quadratures(big)
    n = cfg.dim - margin
    keep = (np.arange(n)[:, None] * big + np.arange(n)[None, :]).ravel()
    cols = u[:, keep].reshape(big, big, -1)  # U|k> for interior k, [signal, meter, k]

    def on_signal(op, t):
        return np.einsum("ij,jmk->imk", op, t)

    def on_meter(op, t):
        return np.einsum("ij,mjk->mik", op, t)

    s = 2.0 * cfg.coupling
    # U^dag A U restricted to interior columns, versus the expected linear map
    pulled = {
        "X_s": on_signal(x, cols),
        "X_m": on_meter(x, cols),
        "Y_s": on_signal(y, cols),
        "Y_m": on_meter(y, cols),
    }
    out = {}
    for name, t in pulled.items():
        got = u[:, keep].conj().T @ t.reshape(big * big, -1)
        xs_, ys_ = _local(x, n, "s"), _local(y, n, "s")
        xm_, ym_ = _local(x, n, "m"), _local(y, n, "m")
        ref = {"X_s": xs_ - s * xm_, "X_m": xm_, "Y_s": ys_, "Y_m": ym_ + s * ys_}[name]
        out[name] = float(np.max(np.abs(got - ref)) / np.max(np.abs(ref)))
    return out


def _local(op: np.ndarray, n: int, which: str) -> np.ndarray:
    small = op[:n, :n]
    eye = np.eye(n)
    return np.kron(small, eye) if which == "s" else np.kron(eye, small)


def quadrature_wavefunctions(q: np.ndarray, nmax: int) -> np.ndarray:
    """psi_n(q) for n < nmax under unit vacuum variance, shape (nmax, len(q)).

    psi_n(q) = (2 pi)^(-1/4) (2^n n!)^(-1/2) H_n(q / sqrt 2) exp(-q^2 / 4).
    """
    u = np.asarray(q, float) / math.sqrt(2.0)
    phi = np.zeros((nmax, u.size))
    phi[0] = math.pi**-0.25 * np.exp(-(u**2) / 2)
    if nmax > 1:
        phi[1] = math.sqrt(2.0) * u * phi[0]
    for n in range(1, nmax - 1):
        phi[n + 1] = math.sqrt(2.0 / (n + 1)) * u * phi[n] - math.sqrt(n / (n + 1)) * phi[n - 1]
    return phi * 2.0**-0.25


@lru_cache(maxsize=64)
def _window_x(delta: float, dim: int) -> np.ndarray:
    nodes, weights = np.polynomial.legendre.leggauss(max(200, 4 * dim))
    q = delta * nodes
    psi = quadrature_wavefunctions(q, dim)
    return (psi * (delta * weights)) @ psi.T


def quadrature_window_projector(delta: float, dim: int, quadrature: str = "y") -> ModeOperator:
    """POVM element for a quadrature reading inside (-delta, delta).

    For ``quadrature='x'`` the entries are the overlap integrals of the
    oscillator eigenfunctions over the window; the Y version is the same
    operator rotated by a quarter period, which multiplies entry (m, n) by
    i^(m-n).
    """
    if delta <= 0:
        raise ValueError("window half-width must be positive")
    mat = _window_x(float(delta), dim).astype(complex)
    if quadrature == "y":
        k = np.arange(dim)
        mat = mat * (1j) ** (k[:, None] - k[None, :])
    elif quadrature != "x":
        raise ValueError("quadrature must be 'x' or 'y'")
    return ModeOperator(mat, 1, dim)


def qnd_postselect(n_signal: int, cfg: QndConfig) -> tuple[DensityOperator, float]:
    """Couple |n>_s|0>_m, keep meter Y readings in (-delta, delta).

    Returns the normalized signal state and the acceptance probability.  The
    window integrates over readings, so the output is a (nearly pure) mixture.
    """
    if not 0 <= n_signal < cfg.dim:
        raise ValueError("signal photon number outside truncation")
    u, big = _qnd_padded(cfg)
    psi = u[:, n_signal * big].reshape(big, big)  # [signal, meter], meter in vacuum
    window = quadrature_window_projector(cfg.delta, big, "y").matrix
    rho_s = psi @ window.T @ psi.conj().T
    rho_s = 0.5 * (rho_s + rho_s.conj().T)
    prob = float(np.trace(rho_s).real)
    if prob < MIN_ACCEPT:
        raise ValueError(f"acceptance probability {prob:.3g} too small")
    rho_s = rho_s[: cfg.dim, : cfg.dim]
    return DensityOperator(rho_s / np.trace(rho_s).real, 1, cfg.dim), prob


def fit_squeezing(state, bounds: tuple[float, float] = (-1.0, 2.0)) -> tuple[float, float]:
    """Squeezing r' maximizing fidelity with S(r')|1>; returns (r', fidelity)."""
    dim = state.dim

    def loss(r):
        return -fidelity_pure(squeezed_single_photon(r, dim), state)

    res = minimize_scalar(loss, bounds=bounds, method="bounded", options={"xatol": 1e-10})
    return float(res.x), float(-res.fun)


@dataclass(frozen=True)
class WindowPoint:
    delta: float
    fidelity: float
    fitted_r: float
    acceptance: float


def window_sweep(r: float, deltas=(0.4, 0.2, 0.1, 0.05), dim: int = 20, n_signal: int = 1) -> list[WindowPoint]:
    rows = []
    for d in deltas:
        rho, p = qnd_postselect(n_signal, QndConfig(r, d, dim))
        r_fit, f = fit_squeezing(rho)
        rows.append(WindowPoint(d, f, r_fit, p))
    return rows


def extrapolated_squeezing(points: list[WindowPoint]) -> float:
    """Fit r'(delta) = a + b delta^2 and return the delta -> 0 intercept."""
    d2 = np.array([p.delta**2 for p in points])
    rs = np.array([p.fitted_r for p in points])
    b, a = np.polyfit(d2, rs, 1)
    return float(a)


def output_parity_leak(rho: DensityOperator, parity: int = 1) -> float:
    """Population on Fock levels of the wrong parity."""
    diag = rho.diagonal() / rho.weight
    wrong = np.arange(rho.dim) % 2 != parity % 2
    return float(diag[wrong].sum())


def signal_marginal(psi: FockState) -> DensityOperator:
    return partial_trace(psi, [0])
