"""Dressed-picture Lindblad dissipators and fixed-step master-equation integration.

Jump operators connect dressed levels |j~><k~| (k > j, zero-temperature
downward transitions only) with rates proportional to the squared dressed
matrix elements of the channel operator. The integrator is classical RK4 over
the full time-dependent generator; when the jump sets share the spectrum of
the static Hamiltonian the generator is evaluated in the (time-independent)
dressed eigenbasis, which is algebraically identical to the bare-basis
evaluation and much cheaper, and trajectories are stored in the bare basis.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .models import DriveSpec
from .operators import DensityMatrix, DimensionError, QOperator, SpaceSpec, StateVector
from .spectrum import Spectrum, diagonalize

log = logging.getLogger(__name__)

RATE_FLOOR = 1e-14
STEP_SAFETY = 0.02

TRACE_TOL = 1e-6
HERM_TOL = 1e-8
EIG_FLOOR = -1e-6


class NumericalAbort(RuntimeError):
    """Integration produced NaN or left the physical state manifold."""


@dataclass(frozen=True)
class DissipationChannel:
    """A loss channel: system operator s (a, sigma_-, ...) with flat rate gamma_s.

    The flat spectral density folds the bath density of states and coupling
    into the single configured rate.
    """

    label: str
    system_op: QOperator
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"channel '{self.label}' rate {self.rate} must be >= 0")


@dataclass(frozen=True)
class Jump:
    """One dressed-basis jump |j~><k~| with its rate, expressed in the bare basis."""

    j: int
    k: int
    rate: float
    op: QOperator


@dataclass(frozen=True)
class JumpSet:
    """All retained jumps of one dissipation channel, tied to their dressed basis."""

    label: str
    basis: Spectrum
    jumps: tuple[Jump, ...]

    def transition_frequencies(self) -> np.ndarray:
        return np.array([self.basis.transition(j.j, j.k) for j in self.jumps])


def build_jumps(s: Spectrum, channel: DissipationChannel, cutoff: int) -> JumpSet:
    """Dressed jumps for one channel: rate gamma_s |<j~|(s + s')|k~>|^2, j < k < cutoff."""
    if channel.system_op.space != s.space:
        raise DimensionError("channel operator space does not match spectrum")
    if cutoff > s.dim:
        raise ValueError(f"cutoff {cutoff} exceeds total dimension {s.dim}")
    v = s.states
    sx = channel.system_op.mat
    c = v.conj().T @ (sx + sx.conj().T) @ v
    jumps = []
    for k in range(1, cutoff):
        for j in range(k):
            rate = channel.rate * float(abs(c[j, k]) ** 2)
            if rate < RATE_FLOOR:
                continue
            op = np.outer(v[:, j], v[:, k].conj())
            jumps.append(Jump(j, k, rate, QOperator(s.space, op)))
    return JumpSet(channel.label, s, tuple(jumps))


def levels_within(s: Spectrum, energy_window: float) -> int:
    """Number of dressed levels with energy at most E_ground + energy_window."""
    return int(np.searchsorted(s.energies, s.energies[0] + energy_window, side="right"))


def lindblad_rhs(
    rho: Union[DensityMatrix, np.ndarray],
    t: float,
    h0: QOperator,
    drive: Optional[DriveSpec],
    jumps: Sequence[JumpSet],
) -> np.ndarray:
    """Reference bare-basis right-hand side of the driven master equation.

    d rho/dt = -i [H0 + drive(t), rho] + sum_s sum_jk Gamma_s^jk D[|j~><k~|] rho
    with D[O] rho = O rho O' - (O'O rho + rho O'O)/2. Trace-free and
    Hermiticity-preserving by construction.
    """
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    d = h0.space.total_dim
    if mat.shape != (d, d):
        raise DimensionError(f"state shape {mat.shape} does not match space dim {d}")
    h = h0.mat
    if drive is not None:
        if drive.operator.space != h0.space:
            raise DimensionError("drive operator space does not match Hamiltonian")
        h = h + float(drive.coefficient(t)) * drive.operator.mat
    out = -1j * (h @ mat - mat @ h)
    for js in jumps:
        for jump in js.jumps:
            l = jump.op.mat
            ll = l.conj().T @ l
            out += jump.rate * (l @ mat @ l.conj().T - 0.5 * (ll @ mat + mat @ ll))
    return out


@dataclass(frozen=True)
class Trajectory:
    """Time grid and bare-basis density matrices from a master-equation run."""

    space: SpaceSpec
    times: np.ndarray
    states: np.ndarray  # shape (n_times, dim, dim)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        s = np.array(self.states, dtype=complex)
        t.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", s)

    def __len__(self) -> int:
        return self.times.shape[0]

    def density(self, i: int) -> DensityMatrix:
        return DensityMatrix(self.space, self.states[i])


def _omega_max_scale(h0: QOperator, drive: Optional[DriveSpec],
                     jumps: Sequence[JumpSet]) -> float:
    """Largest retained transition frequency (jump transitions and drive carriers)."""
    scales = [0.0]
    for js in jumps:
        freqs = js.transition_frequencies()
        if freqs.size:
            scales.append(float(np.max(np.abs(freqs))))
    if drive is not None:
        scales.extend(abs(p.carrier) for p in drive.pulses)
    scale = max(scales)
    if scale == 0.0:
        w = np.linalg.eigvalsh(h0.mat)
        scale = float(w[-1] - w[0])
    return scale


class _DressedGenerator:
    """Generator evaluated in the eigenbasis of the static Hamiltonian.

    Coherent part: elementwise phase matrix -i(E_i - E_j). Dissipator: jumps
    are elementary matrices there, so the whole sum reduces to a diagonal
    gain R @ diag(rho) plus an elementwise damping -(G_i + G_j)/2.
    """

    def __init__(self, spec: Spectrum, drive: Optional[DriveSpec],
                 jumps: Sequence[JumpSet]):
        dim = spec.dim
        e = spec.energies
        rates = np.zeros((dim, dim))
        for js in jumps:
            for jump in js.jumps:
                rates[jump.j, jump.k] += jump.rate
        outflow = rates.sum(axis=0)
        self.rates = rates
        self.has_gain = bool(rates.any())
        self.damp = (-1j * (e[:, None] - e[None, :])
                     - 0.5 * (outflow[:, None] + outflow[None, :]))
        self.v = spec.states
        self.drive = drive
        if drive is not None:
            self.w = self.v.conj().T @ drive.operator.mat @ self.v
        else:
            self.w = None
        self._diag = np.arange(dim)

    def to_internal(self, rho_bare: np.ndarray) -> np.ndarray:
        return self.v.conj().T @ rho_bare @ self.v

    def to_bare(self, rho: np.ndarray) -> np.ndarray:
        return self.v @ rho @ self.v.conj().T

    def rhs(self, rho: np.ndarray, t: float) -> np.ndarray:
        out = self.damp * rho
        if self.has_gain:
            out[self._diag, self._diag] += self.rates @ rho.diagonal()
        if self.w is not None:
            c = self.drive.coefficient_scalar(t)
            if c:
                out += (-1j * c) * (self.w @ rho - rho @ self.w)
        return out


class _BareGenerator:
    """Fallback generator in the bare basis (arbitrary jump operators)."""

    def __init__(self, h0: QOperator, drive: Optional[DriveSpec],
                 jumps: Sequence[JumpSet]):
        self.h0 = h0.mat
        self.drive = drive
        self.w = drive.operator.mat if drive is not None else None
        self.ops = [(jump.rate, jump.op.mat) for js in jumps for jump in js.jumps]
        dim = h0.space.total_dim
        anti = np.zeros((dim, dim), dtype=complex)
        for rate, l in self.ops:
            anti += rate * (l.conj().T @ l)
        self.anti = anti

    def to_internal(self, rho_bare: np.ndarray) -> np.ndarray:
        return np.array(rho_bare, dtype=complex)

    def to_bare(self, rho: np.ndarray) -> np.ndarray:
        return rho

    def rhs(self, rho: np.ndarray, t: float) -> np.ndarray:
        h = self.h0
        if self.w is not None:
            c = self.drive.coefficient_scalar(t)
            if c:
                h = h + c * self.w
        out = -1j * (h @ rho - rho @ h)
        for rate, l in self.ops:
            out += rate * (l @ rho @ l.conj().T)
        out -= 0.5 * (self.anti @ rho + rho @ self.anti)
        return out


def _pick_generator(h0, drive, jumps):
    specs = {id(js.basis): js.basis for js in jumps}
    if len(specs) > 1:
        distinct = list(specs.values())
        for other in distinct[1:]:
            if not np.array_equal(other.states, distinct[0].states):
                log.debug("jump sets carry different bases; using bare-basis generator")
                return _BareGenerator(h0, drive, jumps), False
    spec = next(iter(specs.values())) if specs else diagonalize(h0)
    # The dressed route is valid only if this spectrum diagonalizes H0.
    off = spec.states.conj().T @ h0.mat @ spec.states
    resid = float(np.max(np.abs(off - np.diag(spec.energies))))
    if resid > 1e-8 * max(1.0, float(np.max(np.abs(spec.energies)))):
        log.debug("spectrum does not match H0 (resid %.2e); using bare-basis generator", resid)
        return _BareGenerator(h0, drive, jumps), False
    return _DressedGenerator(spec, drive, jumps), True


def evolve(
    rho0: Union[DensityMatrix, StateVector],
    h0: QOperator,
    drive: Optional[DriveSpec],
    jumps: Sequence[JumpSet],
    t_grid: Sequence[float],
    step: Optional[float] = None,
    monitor: bool = True,
) -> Trajectory:
    """Integrate the driven master equation over an output time grid.

    The RK4 step must resolve the fastest retained oscillation: it is capped
    at STEP_SAFETY / omega_max_scale (and at the grid spacing); passing a
    larger step raises ValueError. Each output interval is covered by equal
    sub-steps so grid points are hit exactly. Trace, Hermiticity, and
    positivity are monitored at every output point (warnings only); NaN
    aborts with a diagnostic.
    """
    if isinstance(rho0, StateVector):
        rho0 = rho0.to_density()
    if rho0.space != h0.space:
        raise DimensionError("initial state space does not match Hamiltonian")
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ValueError("time grid must be a non-empty 1-D sequence")
    if times.size > 1 and np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")

    scale = _omega_max_scale(h0, drive, jumps)
    spacing = float(np.min(np.diff(times))) if times.size > 1 else math.inf
    cap = min(STEP_SAFETY / scale if scale > 0 else math.inf, spacing)
    if step is None:
        step = cap
    elif step > cap * (1.0 + 1e-9):
        raise ValueError(
            f"step {step:.3e} exceeds the resolution bound "
            f"min({STEP_SAFETY}/omega_max={STEP_SAFETY / scale:.3e}, grid spacing {spacing:.3e})"
        )
    if not math.isfinite(step) or step <= 0:
        raise ValueError(f"no finite positive step available (got {step})")

    if np.isnan(rho0.mat).any():
        raise NumericalAbort("initial state contains NaN")

    gen, fast = _pick_generator(h0, drive, jumps)
    rho = gen.to_internal(rho0.mat)
    dim = rho.shape[0]
    out = np.empty((times.size, dim, dim), dtype=complex)
    out[0] = gen.to_bare(rho)

    worst = {"trace": 0.0, "herm": 0.0, "min_eig": 0.0}

    def _check(idx: int, t: float, rho_int: np.ndarray):
        if np.isnan(rho_int).any():
            raise NumericalAbort(f"NaN in state at t={t:.6g} (step={step:.3e})")
        if not monitor:
            return
        tr_dev = abs(complex(np.trace(rho_int)) - 1.0)
        herm_dev = float(np.max(np.abs(rho_int - rho_int.conj().T)))
        min_eig = float(np.linalg.eigvalsh(0.5 * (rho_int + rho_int.conj().T))[0])
        worst["trace"] = max(worst["trace"], tr_dev)
        worst["herm"] = max(worst["herm"], herm_dev)
        worst["min_eig"] = min(worst["min_eig"], min_eig)
        if tr_dev > TRACE_TOL:
            log.warning("trace deviation %.3e at t=%.6g", tr_dev, t)
        if herm_dev > HERM_TOL:
            log.warning("hermiticity deviation %.3e at t=%.6g", herm_dev, t)
        if min_eig < EIG_FLOOR:
            log.warning("negative population %.3e at t=%.6g", min_eig, t)

    _check(0, float(times[0]), rho)

    n_total = 0
    for i in range(times.size - 1):
        t0, t1 = float(times[i]), float(times[i + 1])
        span = t1 - t0
        n_sub = max(1, math.ceil(span / step - 1e-12))
        h = span / n_sub
        t = t0
        for _ in range(n_sub):
            k1 = gen.rhs(rho, t)
            k2 = gen.rhs(rho + (0.5 * h) * k1, t + 0.5 * h)
            k3 = gen.rhs(rho + (0.5 * h) * k2, t + 0.5 * h)
            k4 = gen.rhs(rho + h * k3, t + h)
            rho = rho + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
            t += h
        n_total += n_sub
        _check(i + 1, t1, rho)
        out[i + 1] = gen.to_bare(rho)

    meta = {
        "step": float(step),
        "n_steps": int(n_total),
        "omega_max_scale": float(scale),
        "fast_path": bool(fast),
        "monitor": dict(worst) if monitor else None,
        "channel_rates": {js.label: sum(j.rate for j in js.jumps) for js in jumps},
    }
    return Trajectory(h0.space, times, out, meta)


def evolve_state(
    psi0: StateVector,
    h0: QOperator,
    drive: Optional[DriveSpec],
    t_span: tuple[float, float],
    step: float,
) -> StateVector:
    """Schroedinger propagation of a pure state (no dissipation), RK4.

    Used for fast pulse-area calibration; evaluated in the eigenbasis of the
    static Hamiltonian like the density-matrix path.
    """
    if psi0.space != h0.space:
        raise DimensionError("state space does not match Hamiltonian")
    spec = diagonalize(h0)
    v = spec.states
    e = spec.energies
    w = v.conj().T @ drive.operator.mat @ v if drive is not None else None

    def rhs(psi: np.ndarray, t: float) -> np.ndarray:
        out = (-1j * e) * psi
        if w is not None:
            c = drive.coefficient_scalar(t)
            if c:
                out = out + (-1j * c) * (w @ psi)
        return out

    t0, t1 = float(t_span[0]), float(t_span[1])
    n_sub = max(1, math.ceil((t1 - t0) / step - 1e-12))
    h = (t1 - t0) / n_sub
    psi = v.conj().T @ psi0.amplitudes
    t = t0
    for _ in range(n_sub):
        k1 = rhs(psi, t)
        k2 = rhs(psi + (0.5 * h) * k1, t + 0.5 * h)
        k3 = rhs(psi + (0.5 * h) * k2, t + 0.5 * h)
        k4 = rhs(psi + h * k3, t + h)
        psi = psi + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        t += h
    if np.isnan(psi).any():
        raise NumericalAbort(f"NaN in pure-state propagation at t={t:.6g}")
    return StateVector(psi0.space, v @ psi)
