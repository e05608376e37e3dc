"""Balanced homodyne detection at baseband.

Absolute noise is expressed as the one-sided PSD of the balanced difference
photocurrent (A^2/Hz). Shot noise is linear in LO power, classical LO noise
quadratic, and electronic (dark) noise is fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import e as ELECTRON_CHARGE
from scipy.constants import h as PLANCK

from .exceptions import DomainError, NonPhysicalSubtractionError
from .quadrature import apply_loss, rotate
from .spectra import add_tone, estimate_psd, synthesize_segments

DEFAULT_CARRIER_HZ = 299_792_458.0 / 1064e-9


@dataclass(frozen=True)
class HomodyneConfig:
    """Homodyne detector.

    ``dark_noise_rel_shot_db`` and ``classical_noise_rel`` are quoted
    against the shot noise at ``reference_lo_power``. Electronic noise stays
    at that absolute level whatever the LO power; classical LO noise scales
    with the square of the LO power. ``hf_corner`` is a cosmetic calibration
    of the low-frequency roll-off. ``mains`` lists optional (freq_hz,
    amplitude) pickup tones, amplitudes in sqrt(shot PSD * Hz) at the
    reference power.
    """

    lo_power: float = 88e-6
    visibility: float = 0.943
    qe: float = 0.93
    dark_noise_rel_shot_db: float = -7.0
    hf_corner: float = 12.0
    classical_noise_rel: float = 0.0
    reference_lo_power: float = 88e-6
    omega0: float = DEFAULT_CARRIER_HZ
    mains: tuple = field(default_factory=tuple)

    def __post_init__(self):
        bad = []
        if not self.lo_power > 0:
            bad.append("lo_power")
        if not 0 <= self.visibility <= 1:
            bad.append("visibility")
        if not 0 < self.qe <= 1:
            bad.append("qe")
        if not self.hf_corner >= 0:
            bad.append("hf_corner")
        if not self.classical_noise_rel >= 0:
            bad.append("classical_noise_rel")
        if bad:
            raise DomainError("out-of-range homodyne settings: " + ", ".join(bad))


def effective_efficiency(cfg, extra_transmission=1.0):
    """Detection efficiency ``qe * visibility**2 * extra_transmission``."""
    if not 0 <= extra_transmission <= 1:
        raise DomainError("extra_transmission must lie in [0, 1]")
    if not (0 <= cfg.visibility <= 1 and 0 < cfg.qe <= 1):
        raise DomainError("visibility or quantum efficiency out of range")
    return cfg.qe * cfg.visibility ** 2 * extra_transmission


def shot_psd(cfg, lo_power=None):
    """Shot-noise PSD of the difference current, 2*e*I for the total LO photocurrent I."""
    p = cfg.lo_power if lo_power is None else lo_power
    current = cfg.qe * ELECTRON_CHARGE * p / (PLANCK * cfg.omega0)
    return 2.0 * ELECTRON_CHARGE * current


def classical_psd(cfg):
    return cfg.classical_noise_rel * shot_psd(cfg, cfg.reference_lo_power) * (cfg.lo_power / cfg.reference_lo_power) ** 2


def dark_psd(cfg):
    return 10 ** (cfg.dark_noise_rel_shot_db / 10) * shot_psd(cfg, cfg.reference_lo_power)


def detector_transfer(omega, hf_corner=12.0):
    """First-order high-pass magnitude: 1/sqrt(2) at the corner, 1 far above it."""
    f = np.asarray(omega, dtype=float)
    if np.any(f < 0):
        raise DomainError("frequency must be non-negative")
    if hf_corner == 0:
        out = np.ones_like(f)
    else:
        r = f / hf_corner
        out = r / np.sqrt(1.0 + r * r)
    return float(out) if out.ndim == 0 else out


def subtract_dark_noise(measured, dark):
    """Power-domain subtraction of electronic noise, bin by bin."""
    measured = np.asarray(measured, dtype=float)
    dark = np.asarray(dark, dtype=float)
    bad = np.flatnonzero(np.broadcast_to(measured <= dark, np.broadcast(measured, dark).shape))
    if bad.size:
        raise NonPhysicalSubtractionError(
            f"dark noise reaches the measured level in {bad.size} bin(s), first at index {bad[0]}"
        )
    out = measured - dark
    return float(out) if out.ndim == 0 else out


@dataclass
class HomodyneSpectrum:
    """One homodyne trace. ``corrected`` is dark-subtracted; ``relative`` is in shot-noise units."""

    freqs: np.ndarray
    raw: np.ndarray
    dark: np.ndarray
    corrected: np.ndarray
    relative: np.ndarray
    shot_level: float
    rbw: float
    averages: int


def homodyne_spectrum(variance, cfg, window, seed, stream=0, tones=()):
    """Measure one window of a homodyne trace and its dark-noise trace.

    ``variance`` is the quadrature variance at the detector (after all
    losses, in shot-noise units), a constant or a callable of frequency.
    ``tones`` are (freq, amplitude) signals in sqrt(shot PSD * Hz) units at
    the current LO power; they pass through the detector response like the
    noise. The dark trace comes from an independent record, as it would
    from blocking the beams.
    """
    s_shot = shot_psd(cfg)
    s_cl = classical_psd(cfg)
    s_dark = dark_psd(cfg)

    def optical(f):
        v = variance(f) if callable(variance) else variance
        return (v * s_shot + s_cl) * detector_transfer(f, cfg.hf_corner) ** 2

    fs = window.sample_rate
    segs = synthesize_segments(lambda f: optical(f) + s_dark, window, seed, stream=2 * stream)
    for freq, amp in tones:
        gain = detector_transfer(freq, cfg.hf_corner)
        add_tone(segs, freq, amp * gain * math.sqrt(s_shot), fs)
    ref = cfg.reference_lo_power
    for freq, amp in cfg.mains:
        add_tone(segs, freq, amp * math.sqrt(shot_psd(cfg, ref)), fs)
    raw = estimate_psd(segs, window)
    dark = estimate_psd(synthesize_segments(s_dark, window, seed, stream=2 * stream + 1), window)

    corrected = subtract_dark_noise(raw.power, dark.power)
    relative = corrected / (s_shot * detector_transfer(raw.freqs, cfg.hf_corner) ** 2)
    return HomodyneSpectrum(raw.freqs, raw.power, dark.power, corrected, relative, s_shot, window.rbw, window.averages)


@dataclass(frozen=True)
class VarianceMeasurement:
    """Window-averaged result of :func:`measure_variance`.

    ``raw_power`` is the mean measured PSD (A^2/Hz) including dark noise;
    ``power`` is the dark-subtracted PSD referred to the detector input
    (transfer function divided out). ``variance`` is ``power`` in shot-noise units and
    ``sigma`` its statistical standard error.
    """

    raw_power: float
    power: float
    variance: float
    sigma: float
    spectrum: HomodyneSpectrum


def measure_variance(state, theta_lo, cfg, window, seed, extra_transmission=1.0, stream=0):
    """Homodyne estimate of the quadrature variance of ``state`` at angle ``theta_lo``."""
    eta = effective_efficiency(cfg, extra_transmission)
    v = rotate(apply_loss(state, eta), theta_lo).v11
    spec = homodyne_spectrum(v, cfg, window, seed, stream)
    h2 = detector_transfer(spec.freqs, cfg.hf_corner) ** 2
    raw = float(np.mean(spec.raw))
    power = float(np.mean(spec.corrected / h2))
    variance = float(np.mean(spec.relative))
    sigma = float(np.std(spec.relative, ddof=1) / math.sqrt(spec.relative.size))
    return VarianceMeasurement(raw, power, variance, sigma, spec)
