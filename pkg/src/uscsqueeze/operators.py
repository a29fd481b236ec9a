"""Dense operator algebra on truncated Fock and few-level Hilbert spaces.

Conventions fixed for the whole package:

* tensor factors are ordered cavity first, atom second;
* the qubit basis is (|g>, |e>) = (0, 1);
* the three-level basis is (|s>, |g>, |e>) = (0, 1, 2);
* the bare basis index of |n> (x) |m> is ``n * atom_dim + m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

HERMITICITY_TOL = 1e-12

QUBIT_LABELS = ("g", "e")
THREE_LEVEL_LABELS = ("s", "g", "e")


class DimensionError(ValueError):
    """Invalid or mismatched Hilbert-space dimensions."""


@dataclass(frozen=True)
class SpaceSpec:
    """Ordered subsystem dimensions of a composite Hilbert space."""

    factors: tuple[int, ...]

    def __post_init__(self):
        factors = tuple(int(f) for f in self.factors)
        if not factors or any(f < 1 for f in factors):
            raise DimensionError(f"invalid space factors {self.factors}")
        object.__setattr__(self, "factors", factors)

    @property
    def total_dim(self) -> int:
        return math.prod(self.factors)

    def index(self, *levels: int) -> int:
        """Bare-basis index of the product state with the given factor levels."""
        if len(levels) != len(self.factors):
            raise DimensionError(f"expected {len(self.factors)} levels, got {len(levels)}")
        idx = 0
        for lvl, dim in zip(levels, self.factors):
            if not 0 <= lvl < dim:
                raise DimensionError(f"level {lvl} outside factor of dimension {dim}")
            idx = idx * dim + lvl
        return idx


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class QOperator:
    """Dense complex operator tagged with its composite space."""

    space: SpaceSpec
    mat: np.ndarray

    def __post_init__(self):
        mat = _freeze(self.mat)
        d = self.space.total_dim
        if mat.shape != (d, d):
            raise DimensionError(f"matrix shape {mat.shape} does not match space dim {d}")
        object.__setattr__(self, "mat", mat)

    def dag(self) -> "QOperator":
        return QOperator(self.space, self.mat.conj().T)

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return float(np.max(np.abs(self.mat - self.mat.conj().T))) <= tol

    def __add__(self, other: "QOperator") -> "QOperator":
        _require_same_space(self.space, other.space)
        return QOperator(self.space, self.mat + other.mat)

    def __sub__(self, other: "QOperator") -> "QOperator":
        _require_same_space(self.space, other.space)
        return QOperator(self.space, self.mat - other.mat)

    def __neg__(self) -> "QOperator":
        return QOperator(self.space, -self.mat)

    def __matmul__(self, other: "QOperator") -> "QOperator":
        _require_same_space(self.space, other.space)
        return QOperator(self.space, self.mat @ other.mat)

    def __mul__(self, scalar: complex) -> "QOperator":
        return QOperator(self.space, self.mat * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class StateVector:
    """Pure state on a composite space."""

    space: SpaceSpec
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = _freeze(self.amplitudes).reshape(-1)
        if amp.shape != (self.space.total_dim,):
            raise DimensionError(
                f"amplitude length {amp.shape[0]} does not match space dim {self.space.total_dim}"
            )
        object.__setattr__(self, "amplitudes", amp)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.space, self.amplitudes / n)

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state on a composite space."""

    space: SpaceSpec
    mat: np.ndarray

    def __post_init__(self):
        mat = _freeze(self.mat)
        d = self.space.total_dim
        if mat.shape != (d, d):
            raise DimensionError(f"matrix shape {mat.shape} does not match space dim {d}")
        object.__setattr__(self, "mat", mat)

    def validate(self, herm_tol: float = 1e-10, trace_tol: float = 1e-8,
                 eig_floor: float = -1e-7) -> None:
        """Raise if the state violates hermiticity, unit trace, or positivity slack."""
        herm = float(np.max(np.abs(self.mat - self.mat.conj().T)))
        if herm > herm_tol:
            raise ValueError(f"density matrix not Hermitian: deviation {herm:.3e}")
        tr = complex(np.trace(self.mat))
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"density matrix trace {tr} deviates from 1")
        w = np.linalg.eigvalsh(0.5 * (self.mat + self.mat.conj().T))
        if w[0] < eig_floor:
            raise ValueError(f"density matrix min eigenvalue {w[0]:.3e} below {eig_floor:.1e}")


def _require_same_space(a: SpaceSpec, b: SpaceSpec) -> None:
    if a != b:
        raise DimensionError(f"space mismatch: {a.factors} vs {b.factors}")


def basis_state(space: SpaceSpec, *levels: int) -> StateVector:
    """Product basis ket |levels[0], levels[1], ...> on the given space."""
    amp = np.zeros(space.total_dim, dtype=complex)
    amp[space.index(*levels)] = 1.0
    return StateVector(space, amp)


def identity(space_or_dim: Union[SpaceSpec, int]) -> QOperator:
    space = space_or_dim if isinstance(space_or_dim, SpaceSpec) else SpaceSpec((space_or_dim,))
    return QOperator(space, np.eye(space.total_dim, dtype=complex))


def annihilation(n_max: int) -> QOperator:
    """Photon annihilation operator on a Fock space truncated at n_max levels."""
    if n_max < 2:
        raise DimensionError(f"cavity truncation n_max={n_max} must be at least 2")
    mat = np.diag(np.sqrt(np.arange(1, n_max, dtype=float)), k=1)
    return QOperator(SpaceSpec((n_max,)), mat)


def two_level_ops() -> tuple[QOperator, QOperator, QOperator, QOperator]:
    """Qubit operators (sigma_x, sigma_z, sigma_+, sigma_-) in the (g, e) basis."""
    space = SpaceSpec((2,))
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sz = np.array([[-1, 0], [0, 1]], dtype=complex)
    sp = np.array([[0, 0], [1, 0]], dtype=complex)  # |e><g|
    return (QOperator(space, sx), QOperator(space, sz),
            QOperator(space, sp), QOperator(space, sp.conj().T))


def three_level_ops() -> Mapping[tuple[str, str], QOperator]:
    """Transition operators |alpha><beta| for the (s, g, e) cascade levels."""
    space = SpaceSpec((3,))
    ops = {}
    for i, alpha in enumerate(THREE_LEVEL_LABELS):
        for j, beta in enumerate(THREE_LEVEL_LABELS):
            mat = np.zeros((3, 3), dtype=complex)
            mat[i, j] = 1.0
            ops[(alpha, beta)] = QOperator(space, mat)
    return ops


def tensor(ops: Sequence[QOperator]) -> QOperator:
    """Kronecker product in the given factor order (cavity first by convention)."""
    if not ops:
        raise DimensionError("tensor of an empty operator list")
    mat = ops[0].mat
    factors: list[int] = list(ops[0].space.factors)
    for op in ops[1:]:
        mat = np.kron(mat, op.mat)
        factors.extend(op.space.factors)
    return QOperator(SpaceSpec(tuple(factors)), mat)


def embed(op: QOperator, space: SpaceSpec, factor: int) -> QOperator:
    """Lift a single-factor operator onto a composite space at the given slot."""
    if op.space.factors != (space.factors[factor],):
        raise DimensionError(
            f"operator dim {op.space.factors} does not fit factor {factor} of {space.factors}"
        )
    parts = [identity(d) if k != factor else op for k, d in enumerate(space.factors)]
    out = tensor(parts)
    return QOperator(space, out.mat)


def commutator(a: QOperator, b: QOperator) -> QOperator:
    return a @ b - b @ a


def expectation(state: Union[DensityMatrix, StateVector], op: QOperator) -> complex:
    """Tr(rho op) for density matrices, <psi|op|psi> for kets."""
    _require_same_space(state.space, op.space)
    if isinstance(state, StateVector):
        return complex(np.vdot(state.amplitudes, op.mat @ state.amplitudes))
    return complex(np.einsum("ij,ji->", state.mat, op.mat))
