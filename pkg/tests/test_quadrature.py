import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import beamsplitter_loss, sample_quadratures
from squeezelock.exceptions import DomainError
from squeezelock.quadrature import (
    QuadratureState,
    apply_loss,
    db_to_variance,
    rotate,
    squeezed_state,
    uncertainty_product,
    vacuum_state,
    variance_db,
)

angles = st.floats(-2 * math.pi, 2 * math.pi)
etas = st.floats(0.0, 1.0)


@st.composite
def physical_states(draw):
    r = draw(st.floats(0.0, 2.0))
    extra = draw(st.floats(1.0, 3.0))
    theta = draw(angles)
    return rotate(QuadratureState(math.exp(-2 * r) * extra, math.exp(2 * r)), theta)


def test_vacuum_is_identity_and_invariant():
    vac = vacuum_state(100.0)
    assert (vac.v11, vac.v22, vac.v12) == (1.0, 1.0, 0.0)
    assert rotate(vac, 0.7).matrix == pytest.approx(np.eye(2))
    assert apply_loss(vac, 0.3).matrix == pytest.approx(np.eye(2))


def test_rotation_example_off_diagonal():
    out = rotate(QuadratureState(0.4, 2.5, 0.0), math.pi / 4)
    assert out.v11 == pytest.approx(1.45)
    assert out.v22 == pytest.approx(1.45)
    assert out.v12 == pytest.approx(1.05)


def test_rotation_matches_sampled_quadratures():
    rng = np.random.default_rng(3)
    state = QuadratureState(0.4, 2.5, 0.3)
    theta = 0.9
    x = sample_quadratures(state.matrix, 400_000, rng)
    measured = x[:, 0] * math.cos(theta) + x[:, 1] * math.sin(theta)
    assert rotate(state, theta).v11 == pytest.approx(measured.var(), rel=0.01)


def test_loss_matches_beamsplitter_sampling():
    rng = np.random.default_rng(4)
    state = squeezed_state(-6.0)
    x = beamsplitter_loss(sample_quadratures(state.matrix, 400_000, rng), 0.7, rng)
    out = apply_loss(state, 0.7)
    assert np.cov(x.T) == pytest.approx(out.matrix, rel=0.015, abs=0.005)


def test_loss_endpoints():
    s = squeezed_state(-4.0)
    assert apply_loss(s, 1.0) == s
    assert apply_loss(s, 0.0).matrix == pytest.approx(np.eye(2))


@pytest.mark.parametrize("eta", [-0.1, 1.1])
def test_loss_rejects_out_of_range(eta):
    with pytest.raises(DomainError):
        apply_loss(vacuum_state(), eta)


def test_non_positive_covariance_rejected():
    with pytest.raises(DomainError):
        QuadratureState(1.0, 1.0, 2.0)


def test_db_conversion_round_trip():
    assert variance_db(squeezed_state(-4.0)) == pytest.approx(-4.0)
    assert db_to_variance(-10.0) == pytest.approx(0.1)


def test_measured_state_below_minimum_uncertainty_is_flagged():
    s = QuadratureState(0.398, 2.512)
    assert uncertainty_product(s) < 1
    assert not s.is_physical()


@settings(max_examples=200, deadline=None)
@given(physical_states(), angles, angles)
def test_rotations_compose(state, a, b):
    assert rotate(rotate(state, a), b).matrix == pytest.approx(rotate(state, a + b).matrix, rel=1e-9, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(physical_states(), etas, etas)
def test_losses_compose(state, a, b):
    two = apply_loss(apply_loss(state, a), b)
    assert two.matrix == pytest.approx(apply_loss(state, a * b).matrix, rel=1e-9, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(physical_states(), angles, etas)
def test_rotation_and_loss_commute_and_preserve_physicality(state, theta, eta):
    a = apply_loss(rotate(state, theta), eta)
    b = rotate(apply_loss(state, eta), theta)
    assert a.matrix == pytest.approx(b.matrix, rel=1e-9, abs=1e-12)
    assert uncertainty_product(a) >= 1 - 1e-9
    assert uncertainty_product(rotate(state, theta)) == pytest.approx(uncertainty_product(state), rel=1e-9)
