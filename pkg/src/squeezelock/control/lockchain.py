"""Sequential lock acquisition of the OPO length, pump phase and LO phase.

The RF error signals are evaluated analytically once per servo step. The
lock monitor compares the true (simulated) residuals against thresholds,
standing in for the DC photodiode levels an operator would watch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..opo import ControlField, OpoParams, amplify_control_field
from ..quadrature import CarrierConfig
from .errors import lo_phase_error, opo_length_error, pump_phase_error
from .servo import PIServo, ServoConfig

LOOPS = ("opo_length", "pump_phase", "lo_phase")
UNLOCKED, ACQUIRING, LOCKED = 0, 1, 2
STATUS_NAMES = {UNLOCKED: "unlocked", ACQUIRING: "acquiring", LOCKED: "locked"}


@dataclass(frozen=True)
class LockSystem:
    """Plant and controllers.

    ``drift`` holds random-walk strengths (unit/sqrt(s)) of the free-running
    length detuning (half-linewidths) and of the two phases (rad).
    ``length_to_phase`` couples residual OPO detuning into the squeezed
    quadrature angle; zero by default since the length-lock field does not
    disturb the squeezed mode.
    """

    opo: OpoParams = field(default_factory=OpoParams)
    control: ControlField = field(default_factory=ControlField)
    carrier: CarrierConfig = field(default_factory=CarrierConfig)
    length_servo: ServoConfig = field(default_factory=lambda: ServoConfig(kp=0.0, ki=50.0, actuator_range=40.0))
    pump_servo: ServoConfig = field(default_factory=ServoConfig)
    lo_servo: ServoConfig = field(default_factory=ServoConfig)
    drift: tuple = (0.02, 0.03, 0.03)
    lo_offset: float = 0.0
    length_to_phase: float = 0.0


@dataclass(frozen=True)
class LockSchedule:
    dt: float = 1e-3
    timeout: float = 10.0
    hold_duration: float = 5.4
    lock_threshold: tuple = (0.05, 0.05, 0.05)
    lock_hold_time: float = 0.05
    unlock_factor: float = 10.0
    rms_threshold: tuple = (0.02, 0.02, 0.02)
    initial: str = "random"
    seed: int = 0


@dataclass
class LockTrajectory:
    times: np.ndarray
    status: np.ndarray
    residual: np.ndarray
    lock_times: dict
    all_locked_time: float | None
    hold_rms: dict
    unlock_events: int
    converged: bool
    report: str

    def final_state(self):
        return {name: STATUS_NAMES[int(s)] for name, s in zip(LOOPS, self.status[-1])}

    def ordering_respected(self):
        locked = self.status == LOCKED
        return bool(np.all(~locked[:, 2] | locked[:, 1]) and np.all(~locked[:, 1] | locked[:, 0]))


def _wrap(a, period):
    return (a + 0.5 * period) % period - 0.5 * period


def _nominal_slopes(system):
    g = ((1 + system.opo.x) / (1 - system.opo.x)) ** 2
    a2 = abs(complex(system.control.alpha)) ** 2
    pump = (g - 1 / g) * a2
    lo = 2 * math.sqrt(system.carrier.lo_power) * math.sqrt(a2) * math.sqrt(g)
    return pump, lo


def acquire_locks(system, schedule):
    """Run the lock chain and return its trajectory.

    Each loop engages only once its parent is locked, and drops (taking its
    children with it) when the parent unlocks. Failing to lock everything
    within ``schedule.timeout`` is reported in the result, not raised.
    """
    if system.opo.x <= 0:
        raise ValueError("the pump loop needs parametric gain (x > 0)")
    rng = np.random.default_rng(schedule.seed)
    dt = schedule.dt
    n_max = int(math.ceil((schedule.timeout + schedule.hold_duration) / dt))

    if schedule.initial == "random":
        free = np.array([
            rng.uniform(-3.0, 3.0),
            rng.uniform(-math.pi, math.pi),
            rng.uniform(-math.pi, math.pi),
        ])
        status = [UNLOCKED, UNLOCKED, UNLOCKED]
        noisy = True
    elif schedule.initial == "locked":
        free = np.array([0.0, 0.0, 0.5 * math.pi + system.lo_offset])
        status = [LOCKED, LOCKED, LOCKED]
        noisy = False
    else:
        raise ValueError(f"unknown initial condition {schedule.initial!r}")
    steps = rng.standard_normal((n_max, 3)) * (np.asarray(system.drift) * math.sqrt(dt))
    if not noisy:
        steps[:] = 0.0

    servos = [PIServo(system.length_servo), PIServo(system.pump_servo), PIServo(system.lo_servo)]
    slope_pump, slope_lo = _nominal_slopes(system)
    x0 = system.opo.x
    ctrl, carrier = system.control, system.carrier
    thresh = schedule.lock_threshold
    hold_steps = max(1, int(round(schedule.lock_hold_time / dt)))
    good_count = [0, 0, 0]
    lock_times = {name: None for name in LOOPS}
    if schedule.initial == "locked":
        lock_times = {name: 0.0 for name in LOOPS}

    status_log = np.zeros((n_max, 3), dtype=np.int8)
    resid_log = np.zeros((n_max, 3))
    all_locked_at = 0 if all(s == LOCKED for s in status) else None
    unlock_events = 0
    n = n_max

    for k in range(n_max):
        free += steps[k]
        d = free[0] - servos[0].command
        phi = free[1] - servos[1].command
        theta = free[2] - servos[2].command
        x_eff = x0 / (1.0 + d * d)
        g_eff = ((1 + x_eff) / (1 - x_eff)) ** 2

        # pump axes phi and phi + pi are the same squeezing ellipse
        phi_w = _wrap(phi, math.pi)
        resid = (
            d,
            phi_w,
            _wrap(theta - system.lo_offset - 0.5 * math.pi - phi_w - system.length_to_phase * d, 2 * math.pi),
        )

        for i in range(3):
            parent_ok = i == 0 or status[i - 1] == LOCKED
            if not parent_ok:
                if status[i] == LOCKED:
                    unlock_events += 1
                status[i] = UNLOCKED
                good_count[i] = 0
                continue
            if status[i] == UNLOCKED:
                status[i] = ACQUIRING
                servos[i].reset()
            if i == 0:
                err = opo_length_error(d)
            elif i == 1:
                err = pump_phase_error(ctrl, g_eff, phi) / slope_pump
            else:
                amp = amplify_control_field(ctrl, g_eff, phi)
                err = lo_phase_error(amp, carrier, theta, offset=system.lo_offset) / slope_lo
            servos[i].step(err, dt)

            r = abs(resid[i])
            if status[i] == ACQUIRING:
                good_count[i] = good_count[i] + 1 if r < thresh[i] else 0
                if good_count[i] >= hold_steps:
                    status[i] = LOCKED
                    if lock_times[LOOPS[i]] is None:
                        lock_times[LOOPS[i]] = (k + 1) * dt
            elif status[i] == LOCKED and r > schedule.unlock_factor * thresh[i]:
                status[i] = UNLOCKED
                good_count[i] = 0
                unlock_events += 1

        status_log[k] = status
        resid_log[k] = resid
        if all_locked_at is None:
            if all(s == LOCKED for s in status):
                all_locked_at = k
            elif (k + 1) * dt >= schedule.timeout:
                n = k + 1
                break
        elif (k - all_locked_at) * dt >= schedule.hold_duration:
            n = k + 1
            break

    times = (np.arange(n) + 1) * dt
    status_log, resid_log = status_log[:n], resid_log[:n]
    hold_rms = {}
    converged = all_locked_at is not None
    if converged:
        window = resid_log[all_locked_at:]
        for i, name in enumerate(LOOPS):
            hold_rms[name] = float(np.sqrt(np.mean(window[:, i] ** 2)))
        held = bool(np.all(status_log[all_locked_at:] == LOCKED))
        quiet = all(hold_rms[name] < schedule.rms_threshold[i] for i, name in enumerate(LOOPS))
        converged = held and quiet
        report = (
            f"all loops locked at t={times[all_locked_at]:.3f} s; "
            + ", ".join(f"{name} rms={hold_rms[name]:.2e}" for name in LOOPS)
            + ("" if held else "; lock lost during hold")
        )
    else:
        report = "acquisition failed after {:.1f} s: {}".format(
            schedule.timeout,
            ", ".join(f"{name}={STATUS_NAMES[s]}" for name, s in zip(LOOPS, status)),
        )

    return LockTrajectory(
        times=times,
        status=status_log,
        residual=resid_log,
        lock_times=lock_times,
        all_locked_time=None if all_locked_at is None else float(times[all_locked_at]),
        hold_rms=hold_rms,
        unlock_events=unlock_events,
        converged=converged,
        report=report,
    )
