"""Below-threshold degenerate OPO.

Two jobs: the squeezing spectrum of the vacuum-seeded cavity, and the
phase-sensitive amplification of a frequency-shifted coherent control
field, which is what makes coherent locking of the squeezed vacuum
possible.
"""

from __future__ import annotations

import math
import cmath
from dataclasses import dataclass, field

import numpy as np

from .exceptions import AboveThresholdError, DomainError
from .quadrature import QuadratureState


@dataclass(frozen=True)
class OpoParams:
    """OPO operating point.

    ``x`` is the pump amplitude normalized to threshold, sqrt(P / P_thr).
    ``gamma`` is the cavity half-linewidth (HWHM) in Hz. ``gain`` overrides
    the parametric gain derived from ``x`` when set.
    """

    x: float = 0.3
    gamma: float = 13.5e6
    eta_esc: float = 0.95
    fsr: float = 3.8e9
    gain: float | None = None

    def __post_init__(self):
        if self.x < 0:
            raise DomainError("pump parameter x must be non-negative")
        if self.x >= 1:
            raise AboveThresholdError(f"x = {self.x} is at or above threshold")
        if not self.gamma > 0:
            raise DomainError("gamma must be positive")
        if not 0 < self.eta_esc <= 1:
            raise DomainError("eta_esc must lie in (0, 1]")
        if self.gain is not None and self.gain < 1:
            raise DomainError("gain override must be >= 1")

    @classmethod
    def from_bandwidth(cls, bandwidth, fwhm=True, **kwargs):
        """Build from a cavity bandwidth, read as FWHM unless ``fwhm=False``."""
        return cls(gamma=bandwidth / 2.0 if fwhm else bandwidth, **kwargs)


@dataclass(frozen=True)
class ControlField:
    """Single sideband of complex amplitude ``alpha`` at ``detuning`` Hz from the carrier."""

    alpha: complex = 1.0
    detuning: float = 40e6
    phase_rel_pump: float = 0.0

    def __post_init__(self):
        if self.detuning == 0:
            raise DomainError("control field must be detuned from the carrier")


@dataclass(frozen=True)
class AmplifiedControlField:
    """Control field after the OPO.

    The slowly varying envelope (relative to the carrier) is
    ``a_plus * exp(i*W*t) + a_minus * exp(-i*W*t)`` with ``W = 2*pi*omega``.
    """

    a_plus: complex
    a_minus: complex
    omega: float
    gain: float
    phi: float
    alpha: complex = field(default=1.0)

    @property
    def amplified_gain(self):
        return math.sqrt(self.gain)

    @property
    def deamplified_gain(self):
        return 1.0 / math.sqrt(self.gain)

    def envelope(self, t):
        w = 2 * np.pi * self.omega * np.asarray(t, dtype=float)
        return self.a_plus * np.exp(1j * w) + self.a_minus * np.exp(-1j * w)


def _check_below_threshold(x):
    if x >= 1:
        raise AboveThresholdError(f"x = {x} is at or above threshold")
    if x < 0:
        raise DomainError("pump parameter x must be non-negative")


def parametric_gain(params):
    """Classical power gain of the amplified quadrature at zero sideband frequency."""
    if params.gain is not None:
        return params.gain
    _check_below_threshold(params.x)
    return ((1 + params.x) / (1 - params.x)) ** 2


def pump_for_gain(g):
    """Inverse of :func:`parametric_gain`."""
    if g < 1:
        raise DomainError("gain must be >= 1")
    r = math.sqrt(g)
    return (r - 1) / (r + 1)


def spectrum_variances(x, eta_esc, omega, gamma):
    """Squeezed and anti-squeezed variances, broadcasting over ``omega``."""
    _check_below_threshold(x)
    w2 = (np.asarray(omega, dtype=float) / gamma) ** 2
    # 1 - 4*eta*x/((1+x)^2 + w2), rearranged so nothing cancels near threshold
    v_sq = ((1 - x) ** 2 + 4 * x * (1 - eta_esc) + w2) / ((1 + x) ** 2 + w2)
    v_anti = 1.0 + eta_esc * 4 * x / ((1 - x) ** 2 + w2)
    return v_sq, v_anti


def squeezing_spectrum(params, omega):
    """Output state at sideband ``omega`` with the squeezed quadrature in ``v11``."""
    if omega < 0:
        raise DomainError("sideband frequency must be non-negative")
    v_sq, v_anti = spectrum_variances(params.x, params.eta_esc, omega, params.gamma)
    return QuadratureState(float(v_sq), float(v_anti), 0.0, omega)


def calibrate_pump(target_db, eta_total):
    """Pump parameter ``x`` giving ``target_db`` of low-frequency squeezing.

    ``eta_total`` is the full efficiency from the crystal to the detector.
    Solves ``eta_total * 4x / (1+x)**2 = 1 - V`` for the root below threshold.
    """
    v = 10 ** (target_db / 10)
    if not 0 < eta_total <= 1:
        raise DomainError("eta_total must lie in (0, 1]")
    y = (1 - v) / eta_total
    if y <= 0:
        return 0.0
    if y >= 1:
        raise DomainError(
            f"{target_db} dB is unreachable below threshold at efficiency {eta_total:.4f}"
        )
    return ((2 - y) - 2 * math.sqrt(1 - y)) / y


def amplify_control_field(field, g, phi=None):
    """Parametric (de)amplification of a single-sideband control field.

    The quadrature of the envelope along angle ``phi`` is amplified by
    ``sqrt(g)`` and the orthogonal one deamplified by ``1/sqrt(g)``. For
    ``phi = 0`` and real ``alpha`` the envelope is
    ``alpha * (sqrt(g) cos(Wt) + i sin(Wt) / sqrt(g))``.
    """
    if g < 1:
        raise DomainError("gain must be >= 1")
    if phi is None:
        phi = field.phase_rel_pump
    r = math.sqrt(g)
    ch = 0.5 * (r + 1 / r)
    sh = 0.5 * (r - 1 / r)
    alpha = complex(field.alpha)
    return AmplifiedControlField(
        a_plus=ch * alpha,
        a_minus=sh * cmath.exp(2j * phi) * alpha.conjugate(),
        omega=field.detuning,
        gain=g,
        phi=phi,
        alpha=alpha,
    )
