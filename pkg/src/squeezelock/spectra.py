"""Colored Gaussian noise synthesis and averaged-periodogram spectra.

All spectra here are one-sided power spectral densities (units**2 / Hz).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

from .exceptions import DomainError, PlanningError

_DB_PER_NEPER_POWER = 10.0 / math.log(10.0)


@dataclass(frozen=True)
class SpectrumWindow:
    """One FFT window of a measurement plan: span, resolution bandwidth, averages."""

    f_start: float
    f_stop: float
    rbw: float
    averages: int

    def __post_init__(self):
        if not self.f_start < self.f_stop:
            raise DomainError("f_start must be below f_stop")
        if not 0 < self.rbw <= self.f_stop - self.f_start:
            raise DomainError("rbw must be positive and no wider than the span")
        if self.averages < 1:
            raise DomainError("averages must be >= 1")

    @property
    def nperseg(self):
        """Segment length at the default sample rate of about four times ``f_stop``."""
        return int(math.ceil(4.0 * self.f_stop / self.rbw))

    @property
    def sample_rate(self):
        # an integer number of bins per Hz keeps every span edge on a bin
        return self.nperseg * self.rbw

    @property
    def duration(self):
        return self.averages / self.rbw


class WindowPlan(tuple):
    """Ordered, contiguous, non-overlapping windows."""

    def __new__(cls, windows):
        windows = tuple(windows)
        if not windows:
            raise DomainError("a window plan needs at least one window")
        for a, b in zip(windows, windows[1:]):
            if not math.isclose(a.f_stop, b.f_start):
                raise DomainError(f"windows {a} and {b} are not contiguous")
        return super().__new__(cls, windows)

    @property
    def f_start(self):
        return self[0].f_start

    @property
    def f_stop(self):
        return self[-1].f_stop


def default_window_plan():
    """Five contiguous windows from 10 Hz to 10 kHz, coarser RBW at higher frequency."""
    return WindowPlan([
        SpectrumWindow(10.0, 50.0, 0.25, 100),
        SpectrumWindow(50.0, 200.0, 1.0, 100),
        SpectrumWindow(200.0, 800.0, 2.0, 400),
        SpectrumWindow(800.0, 3200.0, 4.0, 400),
        SpectrumWindow(3200.0, 10000.0, 16.0, 800),
    ])


@dataclass
class Spectrum:
    """Per-bin PSD estimate. ``sigma_db`` is the one-sigma scatter of a bin in dB."""

    freqs: np.ndarray
    power: np.ndarray
    rbw: float
    averages: int

    @property
    def sigma_db(self):
        return np.full(self.freqs.shape, _DB_PER_NEPER_POWER / math.sqrt(self.averages))

    def select(self, f_start, f_stop):
        keep = (self.freqs >= f_start) & (self.freqs < f_stop)
        return Spectrum(self.freqs[keep], self.power[keep], self.rbw, self.averages)


def _psd_values(target_psd, freqs):
    if callable(target_psd):
        values = np.asarray(target_psd(freqs), dtype=float)
    else:
        values = np.asarray(target_psd, dtype=float)
    values = np.broadcast_to(values, freqs.shape)
    if np.any(values < 0):
        raise DomainError("target PSD must be non-negative")
    return values


def _circular_noise(target_psd, n, sample_rate, rng):
    """One real series of ``n`` samples whose expected periodogram is ``target_psd``."""
    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate)
    psd = _psd_values(target_psd, freqs)
    scale = np.sqrt(psd * n * sample_rate / 4.0)
    spec = scale * (rng.standard_normal(freqs.size) + 1j * rng.standard_normal(freqs.size))
    spec[0] = 0.0
    if n % 2 == 0:
        spec[-1] = math.sqrt(2.0) * spec[-1].real
    return np.fft.irfft(spec, n)


def synthesize_noise(target_psd, duration, sample_rate, seed, rbw=None, averages=None):
    """Gaussian series of length ``duration`` with one-sided PSD ``target_psd``.

    ``target_psd`` is a constant or a callable of frequency (Hz). Passing
    ``rbw`` and ``averages`` checks that the series will support that
    estimate.
    """
    if rbw is not None:
        needed = (averages or 1) / rbw
        if duration < needed * (1 - 1e-12):
            raise PlanningError(f"{duration} s is too short; {needed} s needed for rbw {rbw} Hz")
    n = int(round(duration * sample_rate))
    if n < 2:
        raise PlanningError("duration too short for the sample rate")
    rng = np.random.default_rng(seed)
    return _circular_noise(target_psd, n, sample_rate, rng)


def segment_rng(seed, stream, index):
    """Independent generator for segment ``index`` of stream ``stream``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream), int(index)]))


def synthesize_segments(target_psd, window, seed, stream=0, sample_rate=None):
    """``window.averages`` independent segments, each exactly one FFT long.

    Returns an ``(averages, nperseg)`` array. Each segment has its own seed
    derived from ``(seed, stream, index)``, so the result does not depend on
    the order segments are produced in.
    """
    fs = window.sample_rate if sample_rate is None else sample_rate
    nperseg = int(round(fs / window.rbw))
    freqs = np.fft.rfftfreq(nperseg, d=1.0 / fs)
    psd = _psd_values(target_psd, freqs)
    out = np.empty((window.averages, nperseg))
    for i in range(window.averages):
        out[i] = _circular_noise(psd, nperseg, fs, segment_rng(seed, stream, i))
    return out


def add_tone(segments, freq, amplitude, sample_rate, phase=0.0):
    """Add a phase-continuous sinusoid to consecutive segments in place."""
    n_seg, nperseg = segments.shape
    t = np.arange(n_seg * nperseg).reshape(n_seg, nperseg) / sample_rate
    segments += amplitude * np.sin(2 * np.pi * freq * t + phase)
    return segments


def estimate_psd(series, window, sample_rate=None, averaging="power"):
    """Averaged periodogram over exactly ``window.averages`` non-overlapping segments.

    ``series`` is a 1-D record or a ready ``(segments, nperseg)`` array. Each
    segment is mean-removed and Hann-tapered; the density scaling divides by
    the window power, so white noise reads at its true level. ``averaging``
    is ``"power"`` (mean of |X|^2) or ``"rms"`` (mean of |X|, squared and
    corrected by 4/pi so Gaussian noise reads the same level). Bin spacing is
    ``window.rbw``; returned bins cover ``[f_start, f_stop)``.
    """
    fs = window.sample_rate if sample_rate is None else sample_rate
    nperseg = int(round(fs / window.rbw))
    x = np.asarray(series, dtype=float)
    if x.ndim == 1:
        needed = window.averages * nperseg
        if x.size < needed:
            raise PlanningError(
                f"{x.size} samples cannot give {window.averages} averages at rbw {window.rbw} Hz "
                f"({needed} needed)"
            )
        segs = x[:needed].reshape(window.averages, nperseg)
    else:
        if x.shape[1] != nperseg or x.shape[0] < window.averages:
            raise PlanningError(f"segment array {x.shape} does not match the window")
        segs = x[: window.averages]

    taper = get_window("hann", nperseg)
    segs = segs - segs.mean(axis=1, keepdims=True)
    spec = np.fft.rfft(segs * taper, axis=1)
    scale = 2.0 / (fs * np.sum(taper ** 2))
    if averaging == "power":
        power = scale * np.mean(np.abs(spec) ** 2, axis=0)
    elif averaging == "rms":
        power = scale * (4.0 / math.pi) * np.mean(np.abs(spec), axis=0) ** 2
    else:
        raise ValueError(f"unknown averaging mode {averaging!r}")
    power[0] /= 2.0
    if nperseg % 2 == 0:
        power[-1] /= 2.0
    freqs = np.fft.rfftfreq(nperseg, d=1.0 / fs)
    return Spectrum(freqs, power, window.rbw, window.averages).select(window.f_start, window.f_stop)


def to_db_rel(numerator, shot):
    numerator = np.asarray(numerator, dtype=float)
    shot = np.asarray(shot, dtype=float)
    if numerator.shape != shot.shape:
        raise DomainError("traces have different bins")
    if np.any(shot <= 0):
        raise DomainError("shot-noise reference must be positive in every bin")
    return 10.0 * np.log10(numerator / shot)
