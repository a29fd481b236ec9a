"""Hamiltonians for the cavity-qubit and cavity-cascade systems, plus pulsed drives.

All frequencies and rates are expressed in units of the cavity frequency
(omega_c = 1), times in units of 1/omega_c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

_SQRT_2PI = math.sqrt(2.0 * math.pi)

from .operators import (
    DimensionError,
    QOperator,
    SpaceSpec,
    annihilation,
    embed,
    identity,
    tensor,
    three_level_ops,
    two_level_ops,
)


@dataclass(frozen=True)
class RabiParams:
    """Cavity-qubit model with a tilted dipole coupling.

    theta = 0 recovers the parity-symmetric model; a nonzero mixing angle adds
    a longitudinal coupling component that breaks parity and opens the
    two-photon channel near omega_q = 2 omega_c.
    """

    omega_q: float
    coupling: float
    theta: float = 0.0
    omega_c: float = 1.0

    def __post_init__(self):
        if self.coupling < 0:
            raise ValueError(f"coupling {self.coupling} must be >= 0")
        if self.omega_q <= 0:
            raise ValueError(f"omega_q {self.omega_q} must be > 0")

    @property
    def detuning(self) -> float:
        return self.omega_q - self.omega_c


@dataclass(frozen=True)
class CascadeParams:
    """Cavity coupled to the upper (g <-> e) transition of a three-level ladder."""

    omega_s: float
    omega_g: float
    omega_e: float
    coupling: float
    omega_c: float = 1.0

    def __post_init__(self):
        if not self.omega_s < self.omega_g < self.omega_e:
            raise ValueError(
                f"level ordering requires omega_s < omega_g < omega_e, "
                f"got ({self.omega_s}, {self.omega_g}, {self.omega_e})"
            )
        if self.coupling < 0:
            raise ValueError(f"coupling {self.coupling} must be >= 0")

    @property
    def omega_gs(self) -> float:
        return self.omega_g - self.omega_s

    @property
    def omega_eg(self) -> float:
        return self.omega_e - self.omega_g


def build_rabi(params: RabiParams, n_max: int) -> QOperator:
    """H = w_c a'a + w_q s+s- + g (a + a')(cos(theta) sx + sin(theta) sz).

    The qubit term uses the s+s- form, so spectra agree with the sz/2 form up
    to a global constant; level spacings and eigenvectors are identical.
    """
    a = annihilation(n_max)
    sx, sz, sp, sm = two_level_ops()
    i_c = identity(n_max)
    i_q = identity(2)
    x = a + a.dag()
    dipole = np.cos(params.theta) * sx + np.sin(params.theta) * sz
    h = (params.omega_c * tensor([a.dag() @ a, i_q])
         + params.omega_q * tensor([i_c, sp @ sm])
         + params.coupling * tensor([x, dipole]))
    return h


def build_cascade(params: CascadeParams, n_max: int) -> QOperator:
    """H = w_c a'a + sum_alpha w_alpha |alpha><alpha| + g (a + a')(s_eg + s_ge).

    The |s> level does not couple to the cavity, so the matrix is exactly
    block-diagonal between the (s, n) sector and the (g/e, n) sector.
    """
    a = annihilation(n_max)
    ops = three_level_ops()
    i_c = identity(n_max)
    atom = (params.omega_s * ops[("s", "s")]
            + params.omega_g * ops[("g", "g")]
            + params.omega_e * ops[("e", "e")])
    dipole = ops[("e", "g")] + ops[("g", "e")]
    h = (params.omega_c * tensor([a.dag() @ a, identity(3)])
         + tensor([i_c, atom])
         + params.coupling * tensor([a + a.dag(), dipole]))
    return h


@dataclass(frozen=True)
class GaussianPulse:
    """Area-normalized Gaussian envelope with a cosine carrier.

    envelope(t) = amplitude * exp(-(t - center)^2 / (2 width^2)) / (width sqrt(2 pi)),
    so the time integral of the envelope equals `amplitude`.
    """

    amplitude: float
    center: float
    width: float
    carrier: float

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError(f"pulse width {self.width} must be > 0")

    def envelope(self, t):
        arg = (np.asarray(t, dtype=float) - self.center) / self.width
        return self.amplitude * np.exp(-0.5 * arg * arg) / (self.width * np.sqrt(2.0 * np.pi))


@dataclass(frozen=True)
class DriveSpec:
    """Sum of carrier-modulated Gaussian pulses acting through one Hermitian operator."""

    pulses: tuple[GaussianPulse, ...]
    operator: QOperator

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if not self.operator.is_hermitian(1e-10):
            raise ValueError("drive operator must be Hermitian")

    def coefficient(self, t):
        """Scalar drive strength sum_k E_k(t) cos(w_k t)."""
        if isinstance(t, float):
            return self.coefficient_scalar(t)
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for p in self.pulses:
            out = out + p.envelope(t) * np.cos(p.carrier * t)
        return out if out.shape else float(out)

    def coefficient_scalar(self, t: float) -> float:
        # math-library path; the integrator calls this several times per step
        out = 0.0
        for p in self.pulses:
            arg = (t - p.center) / p.width
            out += (p.amplitude * math.exp(-0.5 * arg * arg)
                    / (p.width * _SQRT_2PI) * math.cos(p.carrier * t))
        return out


def drive_term(spec: DriveSpec, t: float) -> QOperator:
    """Instantaneous drive Hamiltonian at time t."""
    if not np.isfinite(t):
        raise ValueError(f"time {t} must be finite")
    return float(spec.coefficient(t)) * spec.operator


def parity_operator(space: SpaceSpec) -> QOperator:
    """Excitation parity exp(i pi (a'a + s+s-)) on a cavity (x) qubit space.

    Diagonal with entries (-1)^(n + m); commutes with the theta = 0 model.
    """
    if len(space.factors) != 2 or space.factors[1] != 2:
        raise DimensionError(f"parity operator expects a cavity (x) qubit space, got {space.factors}")
    n_max = space.factors[0]
    signs = np.array([(-1.0) ** (n + m) for n in range(n_max) for m in range(2)])
    return QOperator(space, np.diag(signs.astype(complex)))
