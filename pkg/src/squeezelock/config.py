"""Experiment configuration: a flat ``section.key = value`` text format.

Example::

    # squeezing calibration
    opo.target_db = -4.0
    homodyne.lo_power = 88e-6
    plan.windows = 10:50:0.25:100, 50:200:1:100

Unknown keys and bad values are collected and reported together in a
:class:`~squeezelock.exceptions.ConfigSchemaError`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .control.lockchain import LockSchedule, LockSystem
from .control.servo import ServoConfig
from .detection import HomodyneConfig
from .exceptions import ConfigSchemaError, DomainError
from .michelson import MichelsonConfig
from .opo import ControlField, OpoParams
from .quadrature import CarrierConfig
from .spectra import SpectrumWindow, WindowPlan, default_window_plan

SCENARIOS = ("fig2", "fig3", "fig4", "lock-demo", "selftest")

# the stated full measurement time, shortened by --duration-scale
FULL_RUN_SECONDS = 1.5 * 3600.0


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _windows(text):
    out = []
    for chunk in text.split(","):
        parts = [p.strip() for p in chunk.split(":")]
        if len(parts) != 4:
            raise ValueError("window must be f_start:f_stop:rbw:averages")
        out.append((float(parts[0]), float(parts[1]), float(parts[2]), int(parts[3])))
    return tuple(out)


def _tones(text):
    if not text.strip():
        return ()
    out = []
    for chunk in text.split(","):
        f, a = chunk.split(":")
        out.append((float(f), float(a)))
    return tuple(out)


# dotted key -> (parser, default, description)
SCHEMA = {
    "run.scenario": (str, "fig3", "fig2 | fig3 | fig4 | lock-demo | selftest"),
    "run.seed": (int, 1, "master seed; every output is a function of (config, seed)"),
    "run.output_dir": (str, "out", "directory for CSV and summary files"),
    "run.duration_scale": (float, 1e-3, "fraction of the 1.5 h measurement to simulate for lock holding"),
    "carrier.omega0": (float, 299_792_458.0 / 1064e-9, "optical carrier frequency (Hz)"),
    "carrier.lo_power": (float, 88e-6, "nominal local-oscillator power (W)"),
    "opo.x": (float, 0.3, "pump amplitude over threshold; ignored when opo.calibrate is true"),
    "opo.calibrate": (_bool, True, "solve opo.x so the detected squeezing equals opo.target_db"),
    "opo.target_db": (float, -4.0, "detected low-frequency squeezing (dB rel. shot noise)"),
    "opo.bandwidth": (float, 27e6, "cavity linewidth (Hz)"),
    "opo.bandwidth_is_fwhm": (_bool, True, "read opo.bandwidth as FWHM (else as HWHM)"),
    "opo.eta_esc": (float, 0.95, "escape efficiency incl. intracavity loss"),
    "opo.fsr": (float, 3.8e9, "free spectral range (Hz, informational)"),
    "control.alpha": (float, 1.0, "control-field amplitude (normalized)"),
    "control.detuning": (float, 40e6, "AOM frequency shift of the control field (Hz)"),
    "control.pump_demod_freq": (float, 80e6, "direct-detection demodulation, twice the shift (informational)"),
    "control.length_demod_freq": (float, 153.8e6, "OPO length-lock sideband (informational)"),
    "control.polarization_offset": (float, 1.4e9, "s/p co-resonance offset (informational)"),
    "control.lo_offset": (float, 0.0, "LO lock point relative to the squeezed quadrature (rad)"),
    "homodyne.visibility": (float, 0.943, "homodyne fringe visibility"),
    "homodyne.qe": (float, 0.93, "photodiode quantum efficiency"),
    "homodyne.dark_noise_rel_shot_db": (float, -7.0, "electronic noise vs shot noise at the nominal LO power"),
    "homodyne.hf_corner": (float, 12.0, "detector low-frequency corner (Hz, cosmetic)"),
    "homodyne.classical_noise_rel": (float, 0.0, "classical LO noise vs shot noise at the nominal power"),
    "homodyne.mains": (_tones, (), "pickup tones freq:amplitude, comma separated; empty = off"),
    "michelson.input_power": (float, 1.5e-6, "laser power into the interferometer (W)"),
    "michelson.mi_visibility": (float, 0.999, "fringe visibility at the 50/50 beamsplitter"),
    "michelson.end_mirror_r": (float, 0.9992, "end-mirror power reflectivity"),
    "michelson.arm_length": (float, 0.04, "arm length (m, informational)"),
    "michelson.dither_freq": (float, 66e3, "dark-fringe dither frequency (Hz)"),
    "michelson.dither_depth": (float, 0.01, "dither depth (rad)"),
    "michelson.signal_freq": (float, 3200.0, "injected signal frequency (Hz)"),
    "michelson.signal_depth": (float, 2e-5, "signal phase-modulation depth (rad)"),
    "michelson.faraday_double_pass_transmission": (float, 0.95, "Faraday rotator double-pass transmission"),
    "michelson.homodyne_visibility": (float, 0.907, "homodyne visibility behind the interferometer"),
    "michelson.rbw": (float, 4.0, "analysis RBW (Hz)"),
    "michelson.averages": (int, 200, "analysis averages"),
    "michelson.span": (float, 400.0, "analysis span centred on the signal (Hz)"),
    "lock.dt": (float, 1e-3, "servo time step (s)"),
    "lock.timeout": (float, 10.0, "acquisition timeout (s)"),
    "lock.ki": (float, 50.0, "integral gain of all three loops (1/s)"),
    "lock.kp": (float, 0.0, "proportional gain of all three loops"),
    "lock.rms_threshold": (float, 0.02, "allowed residual rms while holding (rad or half-linewidths)"),
    "lock.phase_drift": (float, 0.03, "random-walk strength of both phases (rad/sqrt(s))"),
    "lock.length_drift": (float, 0.02, "random-walk strength of the OPO detuning (half-linewidths/sqrt(s))"),
    "lock.runs": (int, 5, "number of seeded acquisitions in lock-demo"),
    "plan.windows": (_windows, None, "override of the five-window plan: f_start:f_stop:rbw:averages, ..."),
}


@dataclass(frozen=True)
class ExperimentConfig:
    carrier: CarrierConfig = field(default_factory=CarrierConfig)
    opo: OpoParams = field(default_factory=OpoParams)
    control: ControlField = field(default_factory=ControlField)
    homodyne: HomodyneConfig = field(default_factory=HomodyneConfig)
    michelson: MichelsonConfig = field(default_factory=MichelsonConfig)
    plan: WindowPlan = field(default_factory=default_window_plan)
    lock_system: LockSystem = field(default_factory=LockSystem)
    lock_schedule: LockSchedule = field(default_factory=LockSchedule)
    target_db: float | None = -4.0
    lock_runs: int = 5
    seed: int = 1
    scenario: str = "fig3"
    output_dir: str = "out"
    duration_scale: float = 1e-3
    values: dict = field(default_factory=dict, compare=False)

    def with_overrides(self, **raw):
        merged = dict(self.values)
        merged.update({k: str(v) for k, v in raw.items()})
        return build_config(merged)


def parse_text(text):
    """Parse ``key = value`` lines into a dict of raw strings."""
    raw, bad = {}, []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            bad.append(f"line {lineno}")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        raw[key] = value
    if bad:
        raise ConfigSchemaError(bad, "lines without '=': " + ", ".join(bad))
    return raw


def build_config(raw):
    """Validate raw string values against :data:`SCHEMA` and assemble the config."""
    bad = [k for k in raw if k not in SCHEMA]
    v = {key: spec[1] for key, spec in SCHEMA.items()}
    for key, text in raw.items():
        if key not in SCHEMA:
            continue
        try:
            v[key] = SCHEMA[key][0](text) if isinstance(text, str) else text
        except (TypeError, ValueError):
            bad.append(key)
    if v["run.scenario"] not in SCENARIOS:
        bad.append("run.scenario")
    if bad:
        raise ConfigSchemaError(sorted(set(bad)))

    def section(prefix, build):
        try:
            return build()
        except (DomainError, ValueError) as exc:
            keys = sorted(k for k in raw if k.startswith(prefix + ".")) or [prefix]
            raise ConfigSchemaError(keys, f"invalid {prefix} settings ({exc}): " + ", ".join(keys)) from exc

    carrier = section("carrier", lambda: CarrierConfig(v["carrier.omega0"], v["carrier.lo_power"]))
    opo = section(
        "opo",
        lambda: OpoParams.from_bandwidth(
            v["opo.bandwidth"],
            fwhm=v["opo.bandwidth_is_fwhm"],
            x=v["opo.x"],
            eta_esc=v["opo.eta_esc"],
            fsr=v["opo.fsr"],
        ),
    )
    control = section("control", lambda: ControlField(v["control.alpha"], v["control.detuning"], 0.0))
    homodyne = section(
        "homodyne",
        lambda: HomodyneConfig(
            lo_power=v["carrier.lo_power"],
            visibility=v["homodyne.visibility"],
            qe=v["homodyne.qe"],
            dark_noise_rel_shot_db=v["homodyne.dark_noise_rel_shot_db"],
            hf_corner=v["homodyne.hf_corner"],
            classical_noise_rel=v["homodyne.classical_noise_rel"],
            reference_lo_power=v["carrier.lo_power"],
            omega0=v["carrier.omega0"],
            mains=v["homodyne.mains"],
        ),
    )

    def mi():
        f0, span = v["michelson.signal_freq"], v["michelson.span"]
        window = SpectrumWindow(f0 - span / 2, f0 + span / 2, v["michelson.rbw"], v["michelson.averages"])
        return MichelsonConfig(
            input_power=v["michelson.input_power"],
            mi_visibility=v["michelson.mi_visibility"],
            end_mirror_r=v["michelson.end_mirror_r"],
            arm_length=v["michelson.arm_length"],
            dither_freq=v["michelson.dither_freq"],
            dither_depth=v["michelson.dither_depth"],
            signal_freq=f0,
            signal_depth=v["michelson.signal_depth"],
            faraday_double_pass_transmission=v["michelson.faraday_double_pass_transmission"],
            homodyne_visibility=v["michelson.homodyne_visibility"],
            reference_visibility=v["homodyne.visibility"],
            window=window,
            omega0=v["carrier.omega0"],
        )

    michelson = section("michelson", mi)
    plan = default_window_plan()
    if v["plan.windows"] is not None:
        plan = section("plan", lambda: WindowPlan(SpectrumWindow(*w) for w in v["plan.windows"]))

    def lock():
        servo = ServoConfig(kp=v["lock.kp"], ki=v["lock.ki"])
        system = LockSystem(
            opo=opo,
            control=control,
            carrier=carrier,
            length_servo=replace(servo, actuator_range=40.0),
            pump_servo=servo,
            lo_servo=servo,
            drift=(v["lock.length_drift"], v["lock.phase_drift"], v["lock.phase_drift"]),
            lo_offset=v["control.lo_offset"],
        )
        thr = v["lock.rms_threshold"]
        if v["run.duration_scale"] <= 0:
            raise ValueError("duration_scale must be positive")
        schedule = LockSchedule(
            dt=v["lock.dt"],
            timeout=v["lock.timeout"],
            hold_duration=FULL_RUN_SECONDS * v["run.duration_scale"],
            rms_threshold=(thr, thr, thr),
            seed=v["run.seed"],
        )
        if not (schedule.dt > 0 and schedule.timeout > 0 and v["lock.runs"] >= 1):
            raise ValueError("lock timing must be positive")
        return system, schedule

    lock_system, lock_schedule = section("lock", lock)
    if v["run.duration_scale"] <= 0:
        raise ConfigSchemaError(["run.duration_scale"])

    return ExperimentConfig(
        carrier=carrier,
        opo=opo,
        control=control,
        homodyne=homodyne,
        michelson=michelson,
        plan=plan,
        lock_system=lock_system,
        lock_schedule=lock_schedule,
        target_db=v["opo.target_db"] if v["opo.calibrate"] else None,
        lock_runs=v["lock.runs"],
        seed=v["run.seed"],
        scenario=v["run.scenario"],
        output_dir=v["run.output_dir"],
        duration_scale=v["run.duration_scale"],
        values={k: (raw[k] if isinstance(raw[k], str) else str(raw[k])) for k in raw},
    )


def load_config(path=None, **overrides):
    raw = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            raw = parse_text(fh.read())
    raw.update({k: str(val) for k, val in overrides.items() if val is not None})
    return build_config(raw)


def default_config_text():
    """The full schema with defaults, as a commented config file."""
    lines = []
    for key, (parser, default, doc) in SCHEMA.items():
        lines.append(f"# {doc}")
        if default is None:
            lines.append(f"# {key} =")
        else:
            if parser is _tones:
                text = ", ".join(f"{f:g}:{a:g}" for f, a in default)
            elif isinstance(default, bool):
                text = "true" if default else "false"
            else:
                text = repr(default) if isinstance(default, float) else str(default)
            lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"

