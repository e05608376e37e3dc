"""Gaussian quadrature states of a single sideband frequency.

Variances are in shot-noise units: the vacuum has ``v11 = v22 = 1``.
``v11`` belongs to the amplitude quadrature (angle 0), ``v22`` to the
phase quadrature (angle pi/2). Measuring at angle ``theta`` observes
``q1*cos(theta) + q2*sin(theta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError


@dataclass(frozen=True)
class QuadratureState:
    """Covariance of the (q1, q2) pair at sideband frequency ``omega`` (Hz)."""

    v11: float
    v22: float
    v12: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        if not (self.v11 > 0 and self.v22 > 0):
            raise DomainError(f"variances must be positive, got {self.v11}, {self.v22}")
        if self.v11 * self.v22 - self.v12 ** 2 <= 0:
            raise DomainError("covariance matrix is not positive-definite")

    @classmethod
    def from_matrix(cls, cov, omega=0.0):
        cov = np.asarray(cov, dtype=float)
        return cls(float(cov[0, 0]), float(cov[1, 1]), float(0.5 * (cov[0, 1] + cov[1, 0])), omega)

    @property
    def matrix(self):
        return np.array([[self.v11, self.v12], [self.v12, self.v22]])

    @property
    def determinant(self):
        return self.v11 * self.v22 - self.v12 ** 2

    def is_physical(self, tol=0.0):
        """True when the symmetrized uncertainty bound ``det >= 1`` holds."""
        return self.determinant >= 1.0 - tol


@dataclass(frozen=True)
class CarrierConfig:
    """Optical carrier and local oscillator.

    ``omega0`` is the optical frequency in Hz (1064 nm by default) and is
    only used to convert powers to photon rates.
    """

    omega0: float = 299_792_458.0 / 1064e-9
    lo_power: float = 88e-6

    def __post_init__(self):
        if not self.lo_power > 0:
            raise DomainError("lo_power must be positive")


def vacuum_state(omega=0.0):
    if omega < 0:
        raise DomainError(f"sideband frequency must be non-negative, got {omega}")
    return QuadratureState(1.0, 1.0, 0.0, omega)


def rotation_matrix(theta):
    """Rows are the measured quadrature at ``theta`` and its conjugate."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def rotate(state, theta):
    """Express ``state`` in quadrature axes rotated by ``theta``.

    The returned ``v11`` is the variance seen by a homodyne detector at
    angle ``theta``. The determinant is unchanged.
    """
    c, s = math.cos(theta), math.sin(theta)
    v11 = c * c * state.v11 + 2 * c * s * state.v12 + s * s * state.v22
    v22 = s * s * state.v11 - 2 * c * s * state.v12 + c * c * state.v22
    v12 = c * s * (state.v22 - state.v11) + (c * c - s * s) * state.v12
    return QuadratureState(v11, v22, v12, state.omega)


def apply_loss(state, eta):
    """Mix ``state`` with vacuum on a beamsplitter of power transmission ``eta``."""
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"transmission must lie in [0, 1], got {eta}")
    return QuadratureState(
        eta * state.v11 + (1.0 - eta),
        eta * state.v22 + (1.0 - eta),
        eta * state.v12,
        state.omega,
    )


def uncertainty_product(state):
    # reduces to v11*v22 for diagonal states
    return state.determinant


def variance_db(state, theta=0.0):
    """Noise at homodyne angle ``theta`` in dB relative to shot noise."""
    return 10.0 * math.log10(rotate(state, theta).v11)


def db_to_variance(db):
    return 10.0 ** (db / 10.0)


def squeezed_state(squeeze_db, omega=0.0, antisqueeze_db=None):
    """Diagonal state with ``squeeze_db`` (negative) in the amplitude quadrature.

    Without ``antisqueeze_db`` the state is pure (minimum uncertainty).
    """
    v_sq = db_to_variance(squeeze_db)
    v_anti = 1.0 / v_sq if antisqueeze_db is None else db_to_variance(antisqueeze_db)
    return QuadratureState(v_sq, v_anti, 0.0, omega)
