"""Phase-space diagnostics: characteristic and Wigner functions, negativity.

The phase-space variable ``z = z_re + i z_im`` is the coherent amplitude, so
``|alpha>`` peaks at ``z = alpha`` and W is normalized to 1 over dz_re dz_im.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .fock import State, as_density
from .optics import displacement_op

W_BOUND = 2.0 / math.pi


@dataclass(frozen=True)
class PhaseGrid:
    z_re: tuple[float, float] = (-4.0, 4.0)
    z_im: tuple[float, float] = (-4.0, 4.0)
    n_re: int = 81
    n_im: int = 81

    def __post_init__(self):
        if self.n_re < 2 or self.n_im < 2:
            raise ValueError("grid needs at least two points per axis")
        for lo, hi in (self.z_re, self.z_im):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError("grid ranges must be finite with min < max")

    @classmethod
    def square(cls, half_width: float, n: int) -> "PhaseGrid":
        return cls((-half_width, half_width), (-half_width, half_width), n, n)

    @property
    def re_axis(self) -> np.ndarray:
        return np.linspace(*self.z_re, self.n_re)

    @property
    def im_axis(self) -> np.ndarray:
        return np.linspace(*self.z_im, self.n_im)

    def points(self) -> np.ndarray:
        """Complex z on the grid, shape (n_re, n_im)."""
        return self.re_axis[:, None] + 1j * self.im_axis[None, :]


@dataclass(frozen=True, eq=False)
class WignerField:
    grid: PhaseGrid
    values: np.ndarray  # values[i, j] = W(re_axis[i] + i im_axis[j])

    def integral(self) -> float:
        inner = np.trapezoid(self.values, self.grid.im_axis, axis=1)
        return float(np.trapezoid(inner, self.grid.re_axis))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["z_re", "z_im", "w"])
        for i, x in enumerate(self.grid.re_axis):
            for j, y in enumerate(self.grid.im_axis):
                w.writerow([f"{x:.17g}", f"{y:.17g}", f"{self.values[i, j]:.17g}"])
        return buf.getvalue()


def char_fn_sq_photon(eta: complex, r: float) -> complex:
    """Tr[S(r)|1><1|S(r)^dag D(eta)] with D(eta) = exp(eta a^dag - eta* a)."""
    er, ei = eta.real, eta.imag
    q = math.exp(-2 * r) * er**2 + math.exp(2 * r) * ei**2
    return complex(math.exp(-0.5 * q) * (1.0 - q))


def char_fn_numeric(rho: State, eta: complex) -> complex:
    rho = as_density(rho)
    return complex(np.trace(rho.matrix @ displacement_op(eta, rho.dim).matrix) / rho.weight)


def wigner_sq_photon(z, r: float):
    """Wigner function of S(r)|1>; Y-squeezed, so elongated along z_re."""
    z = np.asarray(z, complex)
    q = np.exp(-2 * r) * z.real**2 + np.exp(2 * r) * z.imag**2
    return W_BOUND * np.exp(-2 * q) * (4 * q - 1)


def wigner_css(z, alpha: float, parity: int | str = -1):
    """Wigner function of the even (parity=+1) or odd (parity=-1) cat state."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    s = _sign(parity)
    z = np.asarray(z, complex)
    e = math.exp(-2 * alpha**2)
    lobes = np.exp(-2 * np.abs(z) ** 2 - 2 * alpha**2) * 2 * np.cosh(4 * alpha * z.real)
    fringe = np.exp(-2 * np.abs(z) ** 2) * 2 * np.cos(4 * alpha * z.imag)
    return (lobes + s * fringe) / (math.pi * (1 + s * e))


def _sign(parity) -> int:
    if parity in (1, "+", "even"):
        return 1
    if parity in (-1, "-", "odd"):
        return -1
    raise ValueError(f"parity must be +1/-1, got {parity!r}")


def _wigner_points(rho: np.ndarray, z: np.ndarray) -> np.ndarray:
    """W at each complex point of ``z`` via displaced-parity Laguerre terms."""
    dim = rho.shape[0]
    beta = 2.0 * np.ravel(z)
    x = np.abs(beta) ** 2
    damp = np.exp(-x / 2)
    sign = (-1.0) ** np.arange(dim)
    n = np.arange(dim)
    total = np.zeros(beta.shape, float)
    diag = eval_genlaguerre(n[:, None], 0, x[None, :])
    total += (np.diag(rho).real * sign) @ diag
    bk = np.ones_like(beta)
    for k in range(1, dim):
        bk = bk * beta
        nn = n[: dim - k]
        coeff = np.diagonal(rho, k) * sign[: dim - k] * np.exp(
            0.5 * (gammaln(nn + 1) - gammaln(nn + k + 1))
        )
        lag = eval_genlaguerre(nn[:, None], k, x[None, :])
        total += 2 * np.real((coeff @ lag) * bk)
    return (W_BOUND * damp * total).reshape(np.shape(z))


def wigner_point(rho: State, z) -> np.ndarray:
    """Wigner function of a single-mode state at arbitrary points ``z``."""
    rho = as_density(rho)
    if rho.num_modes != 1:
        raise ValueError("Wigner evaluation needs a single-mode state")
    m = rho.matrix / rho.weight
    return _wigner_points(m, np.asarray(z, complex))


def wigner_numeric(rho: State, grid: PhaseGrid | None = None) -> WignerField:
    """W(z) = (2/pi) Tr[rho D(z) P D(z)^dag] with P the parity operator."""
    grid = grid or PhaseGrid()
    rho = as_density(rho)
    if rho.num_modes != 1:
        raise ValueError("Wigner evaluation needs a single-mode state")
    if rho.weight <= 0:
        raise ValueError("zero-weight density operator")
    m = rho.matrix / rho.weight
    mean_n = float(np.real(np.diag(m) @ np.arange(rho.dim)))
    if mean_n > 0:
        period = math.pi / (2 * math.sqrt(mean_n))
        step = (grid.z_im[1] - grid.z_im[0]) / (grid.n_im - 1)
        if step > period / 8:
            warnings.warn(
                f"grid step {step:.3g} resolves fringes of period {period:.3g} "
                "with fewer than 8 points",
                stacklevel=2,
            )
    return WignerField(grid, _wigner_points(m, grid.points()))


def wigner_expm(rho: State, z: complex) -> float:
    """Slow reference: explicit displaced parity with padded displacement."""
    rho = as_density(rho)
    d = rho.dim
    big = d + max(20, int(6 * abs(z) ** 2) + 20)
    disp = displacement_op(z, big, method="expm").matrix
    full = np.zeros((big, big), complex)
    full[:d, :d] = rho.matrix / rho.weight
    shifted = disp.conj().T @ full @ disp
    return float(W_BOUND * np.real(np.diag(shifted) @ (-1.0) ** np.arange(big)))


def min_wigner(rho: State, grid: PhaseGrid | None = None) -> tuple[complex, float]:
    """Most negative value of W, grid minimum refined by a local quadratic fit."""
    grid = grid or PhaseGrid()
    field = wigner_numeric(rho, grid)
    vals = field.values
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    xs, ys = grid.re_axis, grid.im_axis
    best_z = complex(xs[i], ys[j])
    best_w = float(vals[i, j])
    if 0 < i < len(xs) - 1 and 0 < j < len(ys) - 1:
        hx, hy = xs[1] - xs[0], ys[1] - ys[0]
        patch = vals[i - 1 : i + 2, j - 1 : j + 2]
        u, v = np.meshgrid([-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0], indexing="ij")
        design = np.stack(
            [np.ones(9), u.ravel(), v.ravel(), u.ravel() ** 2, u.ravel() * v.ravel(), v.ravel() ** 2],
            axis=1,
        )
        c = np.linalg.lstsq(design, patch.ravel(), rcond=None)[0]
        hess = np.array([[2 * c[3], c[4]], [c[4], 2 * c[5]]])
        if np.all(np.linalg.eigvalsh(hess) > 0):
            du, dv = np.clip(np.linalg.solve(hess, -c[1:3]), -1.0, 1.0)
            z = complex(xs[i] + du * hx, ys[j] + dv * hy)
            w = float(wigner_point(rho, z))
            if w < best_w:
                best_z, best_w = z, w
    return best_z, best_w

