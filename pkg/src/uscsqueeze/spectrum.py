"""Diagonalization with a fixed phase convention, and positive/negative
frequency decomposition of system operators in the dressed basis."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .models import RabiParams, build_rabi
from .operators import DimensionError, QOperator, SpaceSpec

DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues and phase-fixed eigenvectors of a system Hamiltonian.

    Column k of `states` is the dressed state |k~> expressed in the bare basis.
    Phase convention: the largest-magnitude amplitude of each column is real
    and positive (ties broken by lowest bare index). Near-degenerate groups
    (gap below DEGENERACY_TOL) are ordered by descending overlap with bare
    index 1, i.e. |0>(x)|e> on a cavity (x) atom space, and recorded in
    `degenerate_pairs`.
    """

    space: SpaceSpec
    energies: np.ndarray
    states: np.ndarray
    degenerate_pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        e = np.array(self.energies, dtype=float)
        v = np.array(self.states, dtype=complex)
        e.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "states", v)

    @property
    def dim(self) -> int:
        return self.energies.shape[0]

    def transition(self, j: int, k: int) -> float:
        """Transition frequency omega_k - omega_j."""
        return float(self.energies[k] - self.energies[j])

    def state(self, k: int) -> np.ndarray:
        return self.states[:, k]


def diagonalize(h: QOperator, degeneracy_tol: float = DEGENERACY_TOL) -> Spectrum:
    """Eigendecomposition with deterministic ordering and phases."""
    mat = h.mat
    herm = float(np.max(np.abs(mat - mat.conj().T)))
    if herm > 1e-10:
        raise ValueError(f"matrix is not Hermitian: max deviation {herm:.3e}")
    energies, states = np.linalg.eigh(mat)
    states = np.array(states)

    # Within near-degenerate groups eigh's basis choice is arbitrary; pin the
    # order by overlap with bare index 1 (|0,e> in cavity-first ordering).
    pairs: list[tuple[int, int]] = []
    ref = min(1, states.shape[0] - 1)
    start = 0
    while start < len(energies) - 1:
        stop = start
        while stop < len(energies) - 1 and energies[stop + 1] - energies[stop] < degeneracy_tol:
            stop += 1
        if stop > start:
            idx = np.arange(start, stop + 1)
            order = np.argsort(-np.abs(states[ref, idx]), kind="stable")
            states[:, idx] = states[:, idx[order]]
            energies[idx] = energies[idx[order]]
            pairs.extend((int(i), int(i + 1)) for i in range(start, stop))
        start = stop + 1

    # Phase fix: largest-magnitude amplitude real positive, lowest index on ties.
    for k in range(states.shape[1]):
        col = states[:, k]
        i = int(np.argmax(np.abs(col)))
        phase = np.angle(col[i])
        states[:, k] = col * np.exp(-1j * phase)

    return Spectrum(h.space, energies, states, tuple(pairs))


@dataclass(frozen=True)
class DressedDecomposition:
    """Split of a system operator into dressed-basis frequency components.

    x_plus collects the strictly off-diagonal elements X_ij = <i~|X|j~> with
    i < j (it annihilates the dressed ground state), x_minus is its adjoint,
    and x_diag holds the dressed-diagonal remainder; all three are expressed
    in the bare basis and sum back to the input operator.
    """

    x_plus: QOperator
    x_minus: QOperator
    x_diag: QOperator
    zero_point: float = 1.0

    @property
    def diag_norm(self) -> float:
        """Max-norm of the dressed-diagonal remainder (nonzero for broken parity)."""
        return float(np.max(np.abs(self.x_diag.mat)))

    def with_zero_point(self, x0: float) -> "DressedDecomposition":
        return replace(self, zero_point=x0)


def positive_part(x: QOperator, s: Spectrum) -> DressedDecomposition:
    """Decompose X into positive-frequency, negative-frequency, and diagonal parts."""
    if x.space != s.space:
        raise DimensionError(f"operator space {x.space.factors} does not match spectrum")
    v = s.states
    dressed = v.conj().T @ x.mat @ v
    upper = np.triu(dressed, 1)           # i < j: lowers dressed level, kills |0~>
    diag = np.diag(np.diag(dressed))
    x_plus = v @ upper @ v.conj().T
    x_diag = v @ diag @ v.conj().T
    return DressedDecomposition(
        x_plus=QOperator(x.space, x_plus),
        x_minus=QOperator(x.space, x_plus.conj().T),
        x_diag=QOperator(x.space, x_diag),
    )


def _atom_labels(dim: int) -> tuple[str, ...]:
    if dim == 2:
        return ("g", "e")
    if dim == 3:
        return ("s", "g", "e")
    return tuple(str(i) for i in range(dim))


def state_coefficients(s: Spectrum, k: int) -> list[tuple[str, int, complex]]:
    """Bare-basis amplitudes (atom label, photon number, coefficient) of |k~>."""
    if len(s.space.factors) != 2:
        raise DimensionError("state coefficients need a cavity (x) atom space")
    n_max, atom_dim = s.space.factors
    labels = _atom_labels(atom_dim)
    vec = s.state(k)
    return [(labels[m], n, complex(vec[n * atom_dim + m]))
            for n in range(n_max) for m in range(atom_dim)]


def ground_coefficients(s: Spectrum) -> list[tuple[str, int, complex]]:
    """Bare-basis expansion of the dressed ground state.

    For the parity-symmetric cavity-qubit model only even-excitation entries
    (g with even n, e with odd n) are nonzero; broken-parity models return
    all coefficients.
    """
    return state_coefficients(s, 0)


def effective_splitting(
    params: RabiParams,
    n_max: int,
    scan_range: tuple[float, float] = (1.6, 2.4),
    scan_points: int = 81,
    level_pair: tuple[int, int] = (2, 3),
    xtol: float = 1e-9,
) -> tuple[float, float]:
    """Locate the avoided crossing of two dressed levels against omega_q.

    Golden-section refinement of a coarse scan of the gap between the given
    level pair; returns (omega_q at the minimum, minimum gap). For the
    parity-symmetric model the crossing is exact and the gap tends to zero.
    """
    j, k = level_pair

    def gap(omega_q: float) -> float:
        h = build_rabi(replace(params, omega_q=float(omega_q)), n_max)
        w = np.linalg.eigvalsh(h.mat)
        return float(w[k] - w[j])

    qs = np.linspace(scan_range[0], scan_range[1], scan_points)
    gaps = np.array([gap(q) for q in qs])
    i = int(np.argmin(gaps))
    if i == 0 or i == len(qs) - 1:
        raise ValueError(
            f"no interior gap minimum in omega_q scan range {scan_range}; "
            f"edge value {gaps[i]:.3e} at {qs[i]:.4f}"
        )
    res = minimize_scalar(gap, bracket=(qs[i - 1], qs[i], qs[i + 1]),
                          method="golden", options={"xtol": xtol})
    return float(res.x), float(res.fun)
