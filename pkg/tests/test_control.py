import cmath
import math

import numpy as np
import pytest

import oracles
from squeezelock.control import (
    LOCKED,
    DemodConfig,
    LockSchedule,
    LockSystem,
    PIServo,
    ServoConfig,
    ServoState,
    acquire_locks,
    demodulate,
    lo_phase_error,
    opo_length_error,
    pump_phase_error,
    servo_step,
)
from squeezelock.exceptions import DomainError, SamplingError
from squeezelock.opo import ControlField, amplify_control_field
from squeezelock.quadrature import CarrierConfig


def brute_force_pump_error(field, g, phi, demod_phase=-math.pi / 2):
    amp = amplify_control_field(field, g, phi)
    _, current = oracles.direct_detection_current(amp.a_plus, amp.a_minus)
    cfg = DemodConfig(2.0, 2 * cmath.phase(complex(field.alpha)) + demod_phase)
    return 2.0 * demodulate(current, oracles.sample_rate(), cfg).mean()


def brute_force_lo_error(amp, lo_power, theta, demod_phase=math.pi):
    _, current = oracles.balanced_homodyne_current(amp.a_plus, amp.a_minus, lo_power, theta)
    cfg = DemodConfig(1.0, cmath.phase(complex(amp.alpha)) + demod_phase)
    return 2.0 * demodulate(current, oracles.sample_rate(), cfg).mean()


def random_case(rng):
    alpha = complex(*rng.normal(size=2))
    field = ControlField(alpha=alpha, detuning=1.0)
    return field, rng.uniform(1.0, 10.0), rng.uniform(-math.pi, math.pi)


def test_pump_error_matches_time_domain_photocurrent():
    rng = np.random.default_rng(1)
    for _ in range(25):
        field, g, phi = random_case(rng)
        scale = 2 * abs(field.alpha) ** 2 * (g - 1 / g) / 2 + 1e-12
        assert pump_phase_error(field, g, phi) == pytest.approx(brute_force_pump_error(field, g, phi), abs=1e-9 * scale)


def test_lo_error_matches_time_domain_homodyne_current():
    rng = np.random.default_rng(2)
    for _ in range(25):
        field, g, phi = random_case(rng)
        amp = amplify_control_field(field, g, phi)
        p, theta = rng.uniform(0.2, 3.0), rng.uniform(-math.pi, math.pi)
        expected = brute_force_lo_error(amp, p, theta)
        scale = 2 * math.sqrt(p) * abs(field.alpha) * math.sqrt(g)
        got = lo_phase_error(amp, CarrierConfig(lo_power=p), theta)
        assert got == pytest.approx(expected, abs=1e-9 * scale)


def test_pump_error_closed_form_and_lock_point():
    field = ControlField(alpha=1.0)
    for phi in np.linspace(-1.5, 1.5, 7):
        assert pump_phase_error(field, 4.0, phi) == pytest.approx(15 / 8 * math.sin(2 * phi))
    # positive slope through zero, period pi
    assert pump_phase_error(field, 4.0, 0.01) > 0 > pump_phase_error(field, 4.0, -0.01)
    assert pump_phase_error(field, 4.0, 0.2) == pytest.approx(pump_phase_error(field, 4.0, 0.2 + math.pi))


def test_pump_error_vanishes_without_gain():
    assert pump_phase_error(ControlField(alpha=1.0), 1.0, 0.4) == pytest.approx(0.0, abs=1e-15)


def test_lo_error_locks_on_squeezed_quadrature():
    amp = amplify_control_field(ControlField(alpha=0.8), 4.0, 0.0)
    lo = CarrierConfig(lo_power=2.0)
    for theta in np.linspace(-3, 3, 9):
        expected = -2 * math.sqrt(2.0) * 0.8 * 2.0 * math.cos(theta)
        assert lo_phase_error(amp, lo, theta) == pytest.approx(expected)
    assert lo_phase_error(amp, lo, math.pi / 2) == pytest.approx(0.0, abs=1e-12)
    assert lo_phase_error(amp, lo, math.pi / 2 + 0.01) > 0
    assert lo_phase_error(amp, lo, 1.0, offset=0.3) == pytest.approx(lo_phase_error(amp, lo, 0.7))


def test_lo_error_linear_in_control_amplitude():
    lo = CarrierConfig()
    e1 = lo_phase_error(amplify_control_field(ControlField(alpha=1.0), 3.0, 0.1), lo, 0.4)
    e2 = lo_phase_error(amplify_control_field(ControlField(alpha=2.0), 3.0, 0.1), lo, 0.4)
    assert e2 == pytest.approx(2 * e1)


def test_length_error_shape():
    d = np.linspace(-5, 5, 101)
    e = opo_length_error(d)
    assert e == pytest.approx(-opo_length_error(-d))
    h = 1e-6
    assert (opo_length_error(h) - opo_length_error(-h)) / (2 * h) == pytest.approx(1.0, rel=1e-9)
    assert np.argmax(e) == np.argmin(np.abs(d - 1.0))


def test_demodulator_recovers_half_amplitude_and_rejects_harmonics():
    fs, f = 1000.0, 10.0
    t = np.arange(4000) / fs
    x = 3.0 * np.cos(2 * np.pi * f * t + 0.3) + 5.0 * np.cos(2 * np.pi * 3 * f * t) + 2.0
    out = demodulate(x, fs, DemodConfig(f, 0.3))
    assert out == pytest.approx(np.full(out.shape, 1.5), abs=1e-12)


def test_demodulator_errors():
    with pytest.raises(SamplingError):
        demodulate(np.zeros(100), 15.0, DemodConfig(10.0))
    with pytest.raises(DomainError):
        DemodConfig(10.0, lp_corner=6.0)
    with pytest.raises(SamplingError):
        demodulate(np.zeros(10), 1000.0, DemodConfig(10.0))


@pytest.mark.parametrize("kp,ki,k", [(0.0, 50.0, 1.0), (0.5, 50.0, 1.0), (0.0, 20.0, 2.0), (0.2, 10.0, 3.0)])
def test_closed_loop_settling_matches_first_order_prediction(kp, ki, k):
    # static plant: error = k * (free - command); kp*k < 1 keeps the sampled loop stable
    cfg = ServoConfig(kp=kp, ki=ki, actuator_range=1e3, actuator_rate_limit=1e6)
    dt, free = 1e-5, 0.5
    servo = PIServo(cfg)
    t = 0.0
    while abs(free - servo.command) > 0.01 * free and t < 10.0:
        servo.step(k * (free - servo.command), dt)
        t += dt
    tau = (1 + kp * k) / (ki * k)
    assert t == pytest.approx(tau * math.log(100 / (1 + kp * k)), rel=0.2)


def test_servo_respects_range_slew_and_antiwindup():
    cfg = ServoConfig(kp=0.0, ki=100.0, actuator_range=2.0, actuator_rate_limit=5.0)
    servo = PIServo(cfg)
    cmds = [servo.step(10.0, 1e-3) for _ in range(2000)]
    steps = np.diff([0.0] + cmds)
    assert np.max(np.abs(steps)) <= 5.0 * 1e-3 + 1e-15
    assert max(cmds) == pytest.approx(1.0)
    # no wind-up: reversing the error moves the output off the rail at once
    before = servo.command
    servo.step(-10.0, 1e-3)
    assert servo.command < before


def test_functional_step_matches_stateful():
    cfg = ServoConfig(kp=0.3, ki=40.0)
    state, servo = ServoState(), PIServo(cfg)
    for e in np.sin(np.arange(50)):
        cmd, state = servo_step(state, e, cfg, 1e-3)
        assert cmd == servo.step(e, 1e-3)
    with pytest.raises(ValueError):
        servo_step(state, 0.0, cfg, 0.0)


def test_lock_chain_is_deterministic_and_ordered():
    system = LockSystem()
    sched = LockSchedule(seed=7, hold_duration=1.0)
    a = acquire_locks(system, sched)
    b = acquire_locks(system, sched)
    assert np.array_equal(a.residual, b.residual) and np.array_equal(a.status, b.status)
    assert a.converged, a.report
    assert a.ordering_respected()
    order = [a.lock_times[n] for n in ("opo_length", "pump_phase", "lo_phase")]
    assert order == sorted(order)


def test_lock_chain_from_locked_start_stays_locked():
    traj = acquire_locks(LockSystem(), LockSchedule(initial="locked", hold_duration=1.0))
    assert traj.converged
    assert traj.unlock_events == 0
    assert np.all(traj.status[-1] == LOCKED)


def test_lock_chain_reports_failure_without_integrator():
    dead = ServoConfig(kp=0.0, ki=0.0)
    system = LockSystem(length_servo=dead)
    traj = acquire_locks(system, LockSchedule(seed=3, timeout=1.0))
    assert not traj.converged
    assert "opo_length" in traj.report
