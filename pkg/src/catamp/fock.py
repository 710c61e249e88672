"""Pure states, density operators and mode operators on truncated Fock spaces.

Multimode amplitudes are stored flat in row-major order with mode 0 slowest,
so a two-mode amplitude ``psi[n1, n2]`` lives at ``n1 * dim + n2``.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

DEFAULT_DIM = 30

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9


class TruncationError(ValueError):
    """Raised when a state does not fit the truncated Fock space."""


class TruncationWarning(UserWarning):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


def _infer_dim(size: int, num_modes: int) -> int:
    dim = int(round(size ** (1.0 / num_modes)))
    for d in (dim - 1, dim, dim + 1):
        if d > 0 and d**num_modes == size:
            return d
    raise ValueError(f"size {size} is not a perfect power for {num_modes} modes")


@dataclass(frozen=True, eq=False)
class FockState:
    """Ket over ``num_modes`` modes, each truncated to ``dim`` levels."""

    amplitudes: np.ndarray
    num_modes: int = 1
    dim: int = field(default=0)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        if self.num_modes < 1:
            raise ValueError("num_modes must be positive")
        dim = self.dim or _infer_dim(amps.size, self.num_modes)
        if amps.size != dim**self.num_modes:
            raise ValueError(
                f"expected {dim ** self.num_modes} amplitudes, got {amps.size}"
            )
        object.__setattr__(self, "amplitudes", _frozen(amps))
        object.__setattr__(self, "dim", dim)

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((self.dim,) * self.num_modes)

    @property
    def norm(self) -> float:
        """Squared norm <psi|psi>."""
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def leakage(self) -> float:
        """Weight in the top two Fock levels of any mode."""
        return truncation_leakage(self)

    def normalized(self) -> "FockState":
        n = self.norm
        if n <= 0:
            raise ValueError("cannot normalize the zero vector")
        return FockState(self.amplitudes / np.sqrt(n), self.num_modes, self.dim)

    def dm(self) -> "DensityOperator":
        a = self.amplitudes
        return DensityOperator(np.outer(a, a.conj()), self.num_modes, self.dim)

    def to_json(self) -> str:
        return json.dumps(
            {
                "num_modes": self.num_modes,
                "dim": self.dim,
                "re": self.amplitudes.real.tolist(),
                "im": self.amplitudes.imag.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "FockState":
        d = json.loads(text)
        amps = np.asarray(d["re"], float) + 1j * np.asarray(d["im"], float)
        return cls(amps, int(d["num_modes"]), int(d["dim"]))

    def __repr__(self):
        return f"FockState(num_modes={self.num_modes}, dim={self.dim}, norm={self.norm:.12g})"


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian PSD matrix; ``weight`` is its trace.

    Conditional states keep their heralding probability as the weight, and
    the metrics below renormalize internally.
    """

    matrix: np.ndarray
    num_modes: int = 1
    dim: int = field(default=0)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        dim = self.dim or _infer_dim(m.shape[0], self.num_modes)
        if m.shape[0] != dim**self.num_modes:
            raise ValueError("matrix side does not match dim**num_modes")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        object.__setattr__(self, "matrix", _frozen(m))
        object.__setattr__(self, "dim", dim)

    @property
    def weight(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def tensor(self) -> np.ndarray:
        return self.matrix.reshape((self.dim,) * (2 * self.num_modes))

    @property
    def leakage(self) -> float:
        return truncation_leakage(self)

    def normalized(self) -> "DensityOperator":
        w = self.weight
        if w <= 0:
            raise ValueError("zero-weight density operator")
        return DensityOperator(self.matrix / w, self.num_modes, self.dim)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def is_psd(self, tol: float = PSD_TOL) -> bool:
        return self.min_eigenvalue() >= -tol

    def diagonal(self) -> np.ndarray:
        return np.diagonal(self.matrix).real.copy()

    def __repr__(self):
        return f"DensityOperator(num_modes={self.num_modes}, dim={self.dim}, weight={self.weight:.12g})"


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """Matrix acting on ``arity`` consecutive-index modes.

    ``leakage`` is max|U^dag U - I| for unitaries (zero when not tracked).
    """

    matrix: np.ndarray
    arity: int = 1
    dim: int = field(default=0)
    leakage: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator matrix must be square")
        if self.arity not in (1, 2):
            raise ValueError("arity must be 1 or 2")
        dim = self.dim or _infer_dim(m.shape[0], self.arity)
        if m.shape[0] != dim**self.arity:
            raise ValueError("matrix side does not match dim**arity")
        object.__setattr__(self, "matrix", _frozen(m))
        object.__setattr__(self, "dim", dim)

    @property
    def dagger(self) -> "ModeOperator":
        return ModeOperator(self.matrix.conj().T, self.arity, self.dim, self.leakage)

    def unitarity_defect(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))

    def __matmul__(self, other: "ModeOperator") -> "ModeOperator":
        if (other.arity, other.dim) != (self.arity, self.dim):
            raise ValueError("operator shapes differ")
        return ModeOperator(
            self.matrix @ other.matrix, self.arity, self.dim, self.leakage + other.leakage
        )


State = Union[FockState, DensityOperator]


def basis(n: int, dim: int = DEFAULT_DIM) -> FockState:
    if not 0 <= n < dim:
        raise ValueError(f"level {n} outside truncation dim {dim}")
    v = np.zeros(dim, complex)
    v[n] = 1.0
    return FockState(v, 1, dim)


def vacuum(dim: int = DEFAULT_DIM, num_modes: int = 1) -> FockState:
    v = np.zeros(dim**num_modes, complex)
    v[0] = 1.0
    return FockState(v, num_modes, dim)


def as_density(state: State) -> DensityOperator:
    return state.dm() if isinstance(state, FockState) else state


def truncation_leakage(state: State) -> float:
    """Weight sitting in the two highest Fock levels of any mode."""
    d, m = state.dim, state.num_modes
    if isinstance(state, FockState):
        probs = np.abs(state.tensor) ** 2
    else:
        probs = np.diagonal(state.matrix).real.reshape((d,) * m)
    mask = np.zeros((d,) * m, bool)
    for k in range(m):
        idx = [slice(None)] * m
        idx[k] = slice(max(d - 2, 0), d)
        mask[tuple(idx)] = True
    total = probs.sum()
    return float(probs[mask].sum() / total) if total > 0 else 0.0


def tensor(*states) -> State:
    """Tensor product; mode order is the concatenation of the inputs."""
    if len(states) == 1 and isinstance(states[0], (list, tuple)):
        states = tuple(states[0])
    if not states:
        raise ValueError("nothing to tensor")
    dims = {s.dim for s in states}
    if len(dims) != 1:
        raise ValueError(f"mismatched truncation dims {sorted(dims)}")
    dim = dims.pop()
    modes = sum(s.num_modes for s in states)
    if all(isinstance(s, FockState) for s in states):
        amps = states[0].amplitudes
        for s in states[1:]:
            amps = np.kron(amps, s.amplitudes)
        return FockState(amps, modes, dim)
    mat = as_density(states[0]).matrix
    for s in states[1:]:
        mat = np.kron(mat, as_density(s).matrix)
    return DensityOperator(mat, modes, dim)


def partial_trace(rho: State, keep: Sequence[int]) -> DensityOperator:
    """Trace out every mode not listed in ``keep`` (kept in the given order)."""
    keep = list(keep)
    if not keep:
        raise ValueError("keep set must be nonempty")
    m, d = rho.num_modes, rho.dim
    if len(set(keep)) != len(keep) or any(not 0 <= k < m for k in keep):
        raise ValueError(f"invalid keep modes {keep} for {m} modes")
    gone = [k for k in range(m) if k not in keep]
    if isinstance(rho, FockState):
        t = np.transpose(rho.tensor, keep + gone).reshape(d ** len(keep), -1)
        return DensityOperator(t @ t.conj().T, len(keep), d)
    t = rho.tensor
    letters = string.ascii_letters
    rows = list(letters[:m])
    cols = list(letters[m : 2 * m])
    for k in gone:
        cols[k] = rows[k]
    out = "".join(rows[k] for k in keep) + "".join(cols[k] for k in keep)
    red = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    side = d ** len(keep)
    return DensityOperator(red.reshape(side, side), len(keep), d)


def _apply_left(op: np.ndarray, t: np.ndarray, axes: Sequence[int], dim: int) -> np.ndarray:
    """Contract ``op`` (dim^k x dim^k) into tensor axes ``axes``."""
    k = len(axes)
    rest = [a for a in range(t.ndim) if a not in axes]
    moved = np.transpose(t, list(axes) + rest)
    shape = moved.shape
    out = (op @ moved.reshape(dim**k, -1)).reshape(shape)
    return np.transpose(out, np.argsort(list(axes) + rest))


def apply(op: ModeOperator, state: State, target_modes: Sequence[int] | int = 0) -> State:
    """Embed ``op`` on ``target_modes`` (identity elsewhere) and act on ``state``.

    Density operators are conjugated, rho -> O rho O^dag.
    """
    if isinstance(target_modes, int):
        target_modes = [target_modes]
    target_modes = list(target_modes)
    if op.dim != state.dim:
        raise ValueError("operator and state dims differ")
    if len(target_modes) != op.arity:
        raise ValueError("operator arity does not match target modes")
    m = state.num_modes
    if len(set(target_modes)) != len(target_modes) or any(
        not 0 <= k < m for k in target_modes
    ):
        raise IndexError(f"target modes {target_modes} out of range for {m} modes")
    if isinstance(state, FockState):
        out = _apply_left(op.matrix, state.tensor, target_modes, state.dim)
        return FockState(out.ravel(), m, state.dim)
    t = _apply_left(op.matrix, state.tensor, target_modes, state.dim)
    t = _apply_left(op.matrix.conj(), t, [k + m for k in target_modes], state.dim)
    side = state.dim**m
    return DensityOperator(t.reshape(side, side), m, state.dim)


def fidelity_pure(target: FockState, state: State) -> float:
    """|<target|psi>|^2, or <target|rho|target>/Tr(rho) for density input."""
    if target.dim != state.dim or target.num_modes != state.num_modes:
        raise ValueError("target and state live in different spaces")
    t = target.amplitudes
    if isinstance(state, FockState):
        return float(abs(np.vdot(t, state.amplitudes)) ** 2)
    w = state.weight
    if w <= 0:
        raise ValueError("zero-weight density operator")
    return float(np.vdot(t, state.matrix @ t).real / w)


def purity(rho: State) -> float:
    """Tr(rho^2) of the weight-normalized operator."""
    if isinstance(rho, FockState):
        return 1.0
    w = rho.weight
    if w <= 0:
        raise ValueError("zero-weight density operator")
    m = rho.matrix / w
    return float(np.sum(np.abs(m) ** 2))


def expectation(op: np.ndarray, state: State) -> complex:
    if isinstance(state, FockState):
        a = state.amplitudes
        return complex(np.vdot(a, op @ a))
    return complex(np.trace(op @ state.matrix))
