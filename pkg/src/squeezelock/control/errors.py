"""Lock-in demodulation and the analytic error signals.

Sign conventions (all error signals in this module):

* Each error has positive slope at its intended lock point. A servo closes
  the loop by *subtracting* its command from the controlled phase.
* Analytic errors are the in-phase amplitude of the relevant photocurrent
  tone. A unity-gain lock-in (:func:`demodulate`) returns half of that.
* Demodulation references are derived from the control-field drive, so
  they follow ``arg(alpha)``: once for the Omega reference, twice for 2*Omega.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ..exceptions import DomainError, SamplingError
from ..opo import amplify_control_field

# boxcar of length T has its -3 dB point at ~0.443/T
_BOXCAR_CORNER = 0.4429


@dataclass(frozen=True)
class DemodConfig:
    freq: float
    phase: float = 0.0
    lp_corner: float | None = None

    def __post_init__(self):
        if not self.freq > 0:
            raise DomainError("demodulation frequency must be positive")
        lp = self.freq / 10 if self.lp_corner is None else self.lp_corner
        if not 0 < lp < self.freq / 2:
            raise DomainError("lp_corner must lie in (0, freq/2)")
        object.__setattr__(self, "lp_corner", lp)


def demodulate(signal, sample_rate, cfg, t0=0.0):
    """Mix ``signal`` with ``cos(2*pi*freq*t + phase)`` and low-pass it.

    The low-pass is a moving average spanning a whole number of reference
    periods (the count closest to ``lp_corner``). It nulls every harmonic of
    ``freq`` exactly when ``sample_rate / freq`` is an integer. The output is
    the 'valid' part of the filter, one sample per fully covered window.
    """
    if sample_rate <= 2 * cfg.freq:
        raise SamplingError(
            f"sample rate {sample_rate} Hz does not resolve {cfg.freq} Hz"
        )
    x = np.asarray(signal, dtype=float)
    t = t0 + np.arange(x.size) / sample_rate
    mixed = x * np.cos(2 * np.pi * cfg.freq * t + cfg.phase)

    periods = max(1, round(_BOXCAR_CORNER * cfg.freq / cfg.lp_corner))
    n = int(round(periods * sample_rate / cfg.freq))
    if n > x.size:
        raise SamplingError("signal shorter than one low-pass window")
    csum = np.concatenate(([0.0], np.cumsum(mixed)))
    return (csum[n:] - csum[:-n]) / n


def pump_phase_error(field, g, phi, demod_phase=-math.pi / 2):
    """Error from direct detection of the reflected control field at 2*Omega.

    Equals ``(g - 1/g)/2 * |alpha|**2 * sin(2*phi)`` with the default
    reference phase: period pi, zero with positive slope at ``phi = 0``.
    """
    amp = amplify_control_field(field, g, phi)
    beat = amp.a_plus * amp.a_minus.conjugate()
    ref = 2 * cmath.phase(amp.alpha) + demod_phase
    return 2.0 * (beat * cmath.exp(-1j * ref)).real


def lo_phase_error(amplified, lo, theta_lo, demod_phase=math.pi, offset=0.0):
    """Error from the balanced homodyne difference current at Omega.

    ``amplified`` is the control field leaving the OPO
    (:class:`~squeezelock.opo.AmplifiedControlField`), ``lo`` a
    :class:`~squeezelock.quadrature.CarrierConfig`. With the pump locked at
    ``phi = 0`` the default reference gives
    ``-2*sqrt(P_lo)*|alpha|*sqrt(g)*cos(theta_lo - offset)``, which locks the
    LO onto the squeezed quadrature (``theta_lo = pi/2 + offset``).
    """
    theta = theta_lo - offset
    w = cmath.exp(-1j * theta) * amplified.a_plus + cmath.exp(1j * theta) * amplified.a_minus.conjugate()
    ref = cmath.phase(amplified.alpha) + demod_phase
    return 2.0 * math.sqrt(lo.lo_power) * (w * cmath.exp(-1j * ref)).real


def opo_length_error(detuning, fsr_linewidths=None):
    """Dispersive length error, ``Im[1 / (1 - i*d)]`` for detuning ``d`` in half-linewidths.

    Odd, zero on resonance, unit slope there.
    """
    d = np.asarray(detuning, dtype=float)
    if fsr_linewidths is not None and np.any(np.abs(d) >= fsr_linewidths):
        raise DomainError("detuning exceeds one free spectral range")
    out = d / (1.0 + d * d)
    return float(out) if out.ndim == 0 else out
