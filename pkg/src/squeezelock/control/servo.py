"""PI servo driving a range- and slew-limited phase actuator (a PZT mirror)."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class ServoConfig:
    """``actuator_range`` is the total throw, centred on zero; commands live in +-range/2."""

    kp: float = 0.0
    ki: float = 50.0
    actuator_range: float = 20 * math.pi
    actuator_rate_limit: float = 200.0
    setpoint: float = 0.0

    def __post_init__(self):
        if not self.actuator_range > 0:
            raise ValueError("actuator_range must be positive")
        if not self.actuator_rate_limit > 0:
            raise ValueError("actuator_rate_limit must be positive")
        if not (math.isfinite(self.kp) and math.isfinite(self.ki)):
            raise ValueError("servo gains must be finite")


@dataclass(frozen=True)
class ServoState:
    integral: float = 0.0
    command: float = 0.0


def _pi_update(integral, command, error, cfg, dt):
    half = 0.5 * cfg.actuator_range
    e = error - cfg.setpoint
    new_integral = min(max(integral + cfg.ki * e * dt, -half), half)
    raw = cfg.kp * e + new_integral
    if abs(raw) > half and raw * e > 0:
        new_integral = integral
        raw = cfg.kp * e + integral
    target = min(max(raw, -half), half)
    max_step = cfg.actuator_rate_limit * dt
    return new_integral, command + min(max(target - command, -max_step), max_step)


def servo_step(state, error, cfg, dt):
    """One PI update. Returns ``(command, new_state)``.

    Integration is frozen while the output sits on the range limit and the
    error would push it further out (conditional-integration anti-windup).
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    integral, command = _pi_update(state.integral, state.command, error, cfg, dt)
    return command, replace(state, integral=integral, command=command)


class PIServo:
    """Stateful wrapper around :func:`servo_step`."""

    def __init__(self, cfg=None):
        self.cfg = cfg or ServoConfig()
        self.integral = 0.0
        self.command = 0.0

    @property
    def state(self):
        return ServoState(self.integral, self.command)

    def reset(self, command=None):
        # keep the actuator where it is unless told otherwise
        if command is not None:
            self.command = command
        self.integral = self.command

    def step(self, error, dt):
        self.integral, self.command = _pi_update(self.integral, self.command, error, self.cfg, dt)
        return self.command
