"""Coherent control: demodulation, error signals, servos and the lock chain."""

from .errors import DemodConfig, demodulate, lo_phase_error, opo_length_error, pump_phase_error
from .lockchain import (
    ACQUIRING,
    LOCKED,
    LOOPS,
    UNLOCKED,
    LockSchedule,
    LockSystem,
    LockTrajectory,
    acquire_locks,
)
from .servo import PIServo, ServoConfig, ServoState, servo_step

__all__ = [
    "ACQUIRING",
    "LOCKED",
    "LOOPS",
    "UNLOCKED",
    "DemodConfig",
    "LockSchedule",
    "LockSystem",
    "LockTrajectory",
    "PIServo",
    "ServoConfig",
    "ServoState",
    "acquire_locks",
    "demodulate",
    "lo_phase_error",
    "opo_length_error",
    "pump_phase_error",
    "servo_step",
]
