"""Michelson interferometer on a dark fringe with squeezed-vacuum injection.

The arms are short single-bounce arms, so the static fringe model is enough
at audio frequencies. ``offset`` is half the differential round-trip phase,
so the dark-port power is ``P*R*(V*sin(offset)**2 + (1 - V)/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import h as PLANCK

from .control.servo import PIServo, ServoConfig
from .detection import DEFAULT_CARRIER_HZ, HomodyneConfig, effective_efficiency, homodyne_spectrum
from .exceptions import DomainError
from .quadrature import QuadratureState, apply_loss, vacuum_state
from .spectra import SpectrumWindow


@dataclass(frozen=True)
class MichelsonConfig:
    input_power: float = 1.5e-6
    mi_visibility: float = 0.999
    end_mirror_r: float = 0.9992
    arm_length: float = 0.04
    dither_freq: float = 66e3
    dither_depth: float = 0.01
    signal_freq: float = 3200.0
    signal_depth: float = 2e-5
    faraday_double_pass_transmission: float = 0.95
    homodyne_visibility: float = 0.907
    reference_visibility: float = 0.943
    window: SpectrumWindow = field(default_factory=lambda: SpectrumWindow(3000.0, 3400.0, 4.0, 200))
    offset_drift: float = 1e-4
    offset_rms_bound: float = 1e-3
    omega0: float = DEFAULT_CARRIER_HZ

    def __post_init__(self):
        bad = [
            name
            for name in (
                "mi_visibility",
                "end_mirror_r",
                "faraday_double_pass_transmission",
                "homodyne_visibility",
                "reference_visibility",
            )
            if not 0 <= getattr(self, name) <= 1
        ]
        if not self.window.f_start <= self.signal_freq < self.window.f_stop:
            bad.append("signal_freq")
        if not self.input_power > 0:
            bad.append("input_power")
        if bad:
            raise DomainError("out-of-range Michelson settings: " + ", ".join(bad))

    @property
    def faraday_single_pass(self):
        return math.sqrt(self.faraday_double_pass_transmission)


@dataclass(frozen=True)
class DarkPortReadout:
    """Dark-port field seen by the homodyne detector.

    ``signal_amplitude`` is the amplitude of the signal tone in the
    detected quadrature, in sqrt(shot PSD * Hz) units. ``state`` is the
    squeezed (or vacuum) field after the full loss budget.
    """

    carrier_leak_power: float
    signal_amplitude: float
    state: QuadratureState
    efficiency: float


def bright_port_power(cfg, offset):
    return cfg.input_power * cfg.end_mirror_r * 0.5 * (1.0 + cfg.mi_visibility * np.cos(2 * np.asarray(offset)))


def dark_port_output(cfg, arm_phase_offset, signal_depth, squeezed_input, homodyne=None):
    """Carrier leakage, signal and reflected squeezed field at the dark port.

    The injected field double-passes the Faraday isolator, reflects off the
    end mirrors and reaches the homodyne detector at its reduced visibility.
    The signal sidebands are born in the arms, so they pass the isolator once.
    """
    if abs(arm_phase_offset) > 0.1:
        raise DomainError("the readout model assumes a locked, near-dark fringe")
    hd = homodyne or HomodyneConfig(visibility=cfg.homodyne_visibility)
    p = cfg.input_power * cfg.end_mirror_r
    leak = p * (cfg.mi_visibility * math.sin(arm_phase_offset) ** 2 + 0.5 * (1.0 - cfg.mi_visibility))

    eta_sqz = effective_efficiency(hd, cfg.faraday_double_pass_transmission * cfg.end_mirror_r)
    eta_sig = effective_efficiency(hd, cfg.faraday_single_pass)
    photon_rate = p * eta_sig / (PLANCK * cfg.omega0)
    # tone mean-square over one-sided shot PSD is photon_rate * depth**2
    amplitude = math.sqrt(2.0 * photon_rate) * abs(signal_depth)
    return DarkPortReadout(leak, amplitude, apply_loss(squeezed_input, eta_sqz), eta_sqz)


def dither_lock_error(cfg, offset):
    """Lock-in output of the dithered bright port: ``-depth * dP_bright/d(offset)``.

    Odd in ``offset``, zero on the dark fringe, slope ``2*depth*P*R*V`` there.
    """
    return cfg.dither_depth * cfg.input_power * cfg.end_mirror_r * cfg.mi_visibility * np.sin(2 * np.asarray(offset))


def simulate_dither_lock(cfg, duration, seed, dt=1e-3, servo=None):
    """Hold the dark fringe against a random-walk arm drift; returns the residual offsets.

    The 66 kHz dither is evaluated analytically per servo step, well away
    from the audio analysis band.
    """
    rng = np.random.default_rng(seed)
    n = max(1, int(round(duration / dt)))
    slope = 2 * cfg.dither_depth * cfg.input_power * cfg.end_mirror_r * cfg.mi_visibility
    pi = PIServo(servo or ServoConfig(kp=0.0, ki=200.0, actuator_range=2.0, actuator_rate_limit=10.0))
    drift = np.cumsum(rng.standard_normal(n)) * cfg.offset_drift * math.sqrt(dt)
    out = np.empty(n)
    for k in range(n):
        offset = drift[k] - pi.command
        out[k] = offset
        pi.step(float(dither_lock_error(cfg, offset)) / slope, dt)
    return out


@dataclass
class MichelsonSpectrum:
    freqs: np.ndarray
    relative: np.ndarray
    rbw: float
    averages: int
    peak_db: float
    floor_db: float
    offset_rms: float
    squeezing: bool


def run_mi_scenario(cfg, squeezing, seed, source=None, homodyne=None, lock_duration=None, floor_guard=5):
    """Homodyne spectrum around the signal frequency with or without squeezing.

    ``source`` is the squeezed state as it leaves the OPO; the squeezed
    quadrature is in ``v11`` and is the one read out. The noise floor is the
    mean of all bins more than ``floor_guard`` bins from the signal.
    """
    hd = homodyne or HomodyneConfig(visibility=cfg.homodyne_visibility)
    duration = cfg.window.duration if lock_duration is None else lock_duration
    offsets = simulate_dither_lock(cfg, duration, seed)
    offset_rms = float(np.sqrt(np.mean(offsets ** 2)))

    state_in = source if (squeezing and source is not None) else vacuum_state(cfg.signal_freq)
    if squeezing and source is None:
        raise DomainError("squeezing requested without a source state")
    readout = dark_port_output(cfg, float(offsets[-1]), cfg.signal_depth, state_in, hd)
    # separate noise streams for the two runs, as two separate measurements
    stream = 1 if squeezing else 0
    spec = homodyne_spectrum(
        readout.state.v11, hd, cfg.window, seed, stream=stream, tones=[(cfg.signal_freq, readout.signal_amplitude)]
    )
    rel = spec.relative
    k = int(np.argmin(np.abs(spec.freqs - cfg.signal_freq)))
    mask = np.abs(np.arange(rel.size) - k) > floor_guard
    return MichelsonSpectrum(
        freqs=spec.freqs,
        relative=rel,
        rbw=spec.rbw,
        averages=spec.averages,
        peak_db=float(10 * np.log10(rel[k])),
        floor_db=float(10 * np.log10(np.mean(rel[mask]))),
        offset_rms=offset_rms,
        squeezing=squeezing,
    )
