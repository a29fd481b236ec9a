"""Intracavity and output-field quadrature variances, photon flux, and the
ground-state squeezing sweep.

Output variances are normally ordered: vacuum input contributes 0 and an
ideally squeezed quadrature reads -1. The `generalized` mode uses the dressed
positive/negative frequency components of the field quadrature; `standard`
substitutes the bare ladder operators (valid only far below the ultrastrong
regime).
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .dynamics import Trajectory
from .models import RabiParams, build_rabi
from .operators import (
    DensityMatrix,
    DimensionError,
    QOperator,
    StateVector,
    annihilation,
    embed,
    expectation,
)
from .spectrum import DressedDecomposition, diagonalize, positive_part

log = logging.getLogger(__name__)

REALITY_TOL = 1e-9
FLUX_FLOOR = -1e-9
DIAG_NOTE_TOL = 1e-9

MODES = ("generalized", "standard")


@dataclass(frozen=True)
class ReferenceFrame:
    """Homodyne reference: rotation Gamma(t) = omega t + phi.

    With omega equal to a coherence's transition frequency the corresponding
    contribution to the variances is frozen; phi selects the quadrature
    orientation, and phi -> phi + pi/2 maps one quadrature to the other.
    """

    omega: float
    phi: float = 0.0


@dataclass(frozen=True)
class VarianceRecord:
    """Normally-ordered output variances and photon flux at one time."""

    t: float
    s1n: float
    s2n: float
    flux: float
    mode: str


def ground_quadrature_variance(params: RabiParams, n_max: int) -> float:
    """Normally-ordered variance of q2 = i(a' - a) in the dressed ground state.

    Returns s2 - 1, i.e. 0 at the standard quantum limit and negative for a
    squeezed ground state.
    """
    if params.theta != 0.0:
        raise ValueError("ground quadrature variance is defined for the theta = 0 model")
    h = build_rabi(params, n_max)
    spec = diagonalize(h)
    ground = StateVector(h.space, spec.state(0))
    a = embed(annihilation(n_max), h.space, 0)
    q2 = 1j * (a.dag() - a)
    mean = expectation(ground, q2)
    second = expectation(ground, q2 @ q2)
    return float(second.real - mean.real ** 2) - 1.0


@dataclass(frozen=True)
class SweepResult:
    """Ground-state variance over a coupling x detuning grid, with its minimum."""

    couplings: np.ndarray
    detunings: np.ndarray
    values: np.ndarray  # shape (len(couplings), len(detunings))
    min_value: float
    min_coupling: float
    min_detuning: float


def _sweep_row(args: tuple[float, tuple[float, ...], int, float]) -> list[float]:
    coupling, detunings, n_max, omega_c = args
    row = []
    for delta in detunings:
        p = RabiParams(omega_q=omega_c + delta, coupling=coupling, omega_c=omega_c)
        row.append(ground_quadrature_variance(p, n_max))
    return row


def ground_variance_map(
    couplings: Sequence[float],
    detunings: Sequence[float],
    n_max: int,
    workers: int = 1,
    omega_c: float = 1.0,
) -> SweepResult:
    """Per-point ground-state variance sweep; rows may run in parallel workers.

    Results are assembled by grid index, so the output is identical for any
    worker count.
    """
    couplings = np.asarray(couplings, dtype=float)
    detunings = np.asarray(detunings, dtype=float)
    if couplings.size == 0 or detunings.size == 0:
        raise ValueError("sweep grid must be non-empty")
    tasks = [(float(c), tuple(float(d) for d in detunings), n_max, omega_c)
             for c in couplings]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        rows = [_sweep_row(t) for t in tasks]
    values = np.array(rows, dtype=float)
    flat = int(np.argmin(values))
    i, j = np.unravel_index(flat, values.shape)
    return SweepResult(
        couplings=couplings,
        detunings=detunings,
        values=values,
        min_value=float(values[i, j]),
        min_coupling=float(couplings[i]),
        min_detuning=float(detunings[j]),
    )


def _mode_ops(traj_space, decomp: DressedDecomposition, mode: str) -> tuple[np.ndarray, np.ndarray]:
    if mode == "generalized":
        if decomp.diag_norm > DIAG_NOTE_TOL:
            log.info(
                "dressed-diagonal remainder |x_diag| = %.3e excluded from the variances",
                decomp.diag_norm,
            )
        return decomp.x_plus.mat, decomp.x_minus.mat
    if mode == "standard":
        n_max = traj_space.factors[0]
        a = embed(annihilation(n_max), traj_space, 0)
        return a.mat, a.mat.conj().T
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def _trace_series(states: np.ndarray, m: np.ndarray) -> np.ndarray:
    return np.einsum("tij,ji->t", states, m)


def output_variances(
    traj: Trajectory,
    decomp: DressedDecomposition,
    frame: ReferenceFrame,
    mode: str = "generalized",
) -> list[VarianceRecord]:
    """Equal-time normally-ordered output variances along a trajectory.

    S1(t) = <x+,x+> e^{2i Gamma(t)} + <x-,x-> e^{-2i Gamma(t)} + 2 <x-,x+>
    with covariances <A,B> = <AB> - <A><B> evaluated on rho(t) and
    Gamma(t) = omega t + phi; S2 is S1 with phi advanced by pi/2. The input
    noise is already subtracted and the rate prefactor normalized away, so
    the dressed ground state yields exactly zero.
    """
    if decomp.x_plus.space != traj.space:
        raise DimensionError("decomposition space does not match trajectory")
    xp, xm = _mode_ops(traj.space, decomp, mode)
    states = traj.states
    t = traj.times

    m_p = _trace_series(states, xp)
    m_m = _trace_series(states, xm)
    z_pp = _trace_series(states, xp @ xp) - m_p * m_p
    z_mm = _trace_series(states, xm @ xm) - m_m * m_m
    flux_raw = _trace_series(states, xm @ xp)
    z_mp = flux_raw - m_m * m_p

    def s_of(phi: float) -> np.ndarray:
        gamma = frame.omega * t + phi
        s = z_pp * np.exp(2j * gamma) + z_mm * np.exp(-2j * gamma) + 2.0 * z_mp
        worst = float(np.max(np.abs(s.imag))) if s.size else 0.0
        if worst > REALITY_TOL:
            raise ValueError(
                f"variance has imaginary part {worst:.3e} (> {REALITY_TOL}); "
                "the frequency decomposition is inconsistent"
            )
        return s.real

    s1 = s_of(frame.phi)
    s2 = s_of(frame.phi + 0.5 * np.pi)
    flux = _validated_flux(flux_raw)
    return [
        VarianceRecord(float(t[i]), float(s1[i]), float(s2[i]), float(flux[i]), mode)
        for i in range(t.size)
    ]


def _validated_flux(flux_raw: np.ndarray) -> np.ndarray:
    worst_imag = float(np.max(np.abs(flux_raw.imag))) if flux_raw.size else 0.0
    if worst_imag > REALITY_TOL:
        raise ValueError(f"photon flux has imaginary part {worst_imag:.3e}")
    flux = flux_raw.real
    if flux.size and float(np.min(flux)) < FLUX_FLOOR:
        raise ValueError(f"photon flux {float(np.min(flux)):.3e} below {FLUX_FLOOR}")
    return flux


def photon_flux(traj: Trajectory, decomp: DressedDecomposition) -> np.ndarray:
    """Detected photon rate series <x- x+> (not the bare photon number)."""
    if decomp.x_plus.space != traj.space:
        raise DimensionError("decomposition space does not match trajectory")
    xm_xp = decomp.x_minus.mat @ decomp.x_plus.mat
    return _validated_flux(_trace_series(traj.states, xm_xp))


def state_variances(
    state: Union[DensityMatrix, StateVector],
    decomp: DressedDecomposition,
    frame: ReferenceFrame,
    mode: str = "generalized",
    t: float = 0.0,
) -> VarianceRecord:
    """Variances of a single state, as a one-point trajectory evaluation."""
    if isinstance(state, StateVector):
        state = state.to_density()
    traj = Trajectory(state.space, np.array([t]), state.mat[None, :, :])
    return output_variances(traj, decomp, frame, mode)[0]
