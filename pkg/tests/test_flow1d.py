import math
from fractions import Fraction as Q

import pytest
from hypothesis import given
from hypothesis import strategies as st

from signed_ce.ce_residual import GraphField
from signed_ce.errors import BracketFailure, DomainViolation, NotMonotoneRun
from signed_ce.flow1d import (
    Characteristic,
    ContinuousField1D,
    F_of,
    Piece,
    branch_characteristic,
    characteristic_csv,
    constant_characteristic,
    endpoint_divergence,
    flow,
    logistic_closed_form,
    logistic_field,
    pair_atoms,
    pushforward,
    shifted_piece,
    transport_test,
    verify_characteristic,
)
from signed_ce.pwl import runs, stage_function
from signed_ce.stagegen import build

LOG = logistic_field()


def test_F_examples():
    assert F_of(LOG, 0.5, 0.75) == pytest.approx(math.log(3), abs=1e-12)
    assert F_of(LOG, 0.5, 0.5) == 0
    assert F_of(LOG, 0.5, 0.1) == pytest.approx(-math.log(9), abs=1e-12)
    with pytest.raises(DomainViolation):
        F_of(LOG, 0.5, 1.0)


def test_flow_examples():
    assert flow(LOG, 0, 0.3) == 0.3
    assert flow(LOG, math.log(3), 0.5) == pytest.approx(0.75, abs=1e-12)
    assert flow(LOG, -math.log(3), 0.5) == pytest.approx(0.25, abs=1e-12)
    with pytest.raises(DomainViolation):
        flow(LOG, 1.0, 0.0)


def test_flow_cannot_reach_clamped_boundary():
    with pytest.raises(BracketFailure):
        flow(LOG, 40.0, 0.5)


@given(st.floats(-5, 5), st.floats(0.02, 0.98))
def test_flow_matches_closed_form(t, x):
    assert flow(LOG, t, x) == pytest.approx(logistic_closed_form(t, x), abs=1e-10)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.05, 0.95))
def test_semigroup(s, t, x):
    assert flow(LOG, s + t, x) == pytest.approx(flow(LOG, s, flow(LOG, t, x)), abs=1e-10)


def test_flow_of_a_non_logistic_field():
    cf = ContinuousField1D(lambda x: math.sin(x), 0.0, math.pi, 1.0, math.pi / 2, "sine")
    # F(x) = log tan(x/2), so X(t, pi/2) = 2 atan(e^t)
    for t in (-1.5, 0.4, 2.0):
        assert flow(cf, t, math.pi / 2) == pytest.approx(2 * math.atan(math.exp(t)), abs=1e-10)
    with pytest.raises(ValueError):
        ContinuousField1D(lambda x: x, 0.0, 1.0, 1.0, 2.0)


def test_endpoint_divergence():
    rows = endpoint_divergence(LOG)
    lefts = [r[1] for r in rows]
    rights = [r[2] for r in rows]
    assert all(a > b for a, b in zip(lefts, lefts[1:]))
    assert all(a < b for a, b in zip(rights, rights[1:]))
    assert rights[-1] == pytest.approx(math.log((1 - 1e-6) / 1e-6), rel=1e-8)


def test_pushforward_and_pairing():
    atoms = [(0.25, 1.0), (0.5, -2.0)]
    moved = pushforward(LOG, atoms, math.log(3))
    assert moved[0][0] == pytest.approx(0.5, abs=1e-12)
    assert moved[1][0] == pytest.approx(0.75, abs=1e-12)
    assert [w for _, w in moved] == [1.0, -2.0]
    assert pair_atoms(moved, lambda x: 1.0) == -1.0
    assert pushforward(LOG, [], 1.0) == []


def test_transport_residual_small():
    omega = lambda x: math.exp(-((x - 0.6) ** 2) / 0.02)  # noqa: E731
    r = transport_test(LOG, omega, 1.0, [(0.3, 1.0), (0.7, -0.5)])
    assert abs(r) <= 1e-8


def test_transport_with_no_data_or_support_away_from_atoms():
    assert transport_test(LOG, math.cos, 1.0, []) == 0.0
    omega = lambda x: 0.0 if x < 0.9 else (x - 0.9) ** 4  # noqa: E731
    assert abs(transport_test(LOG, omega, 0.5, [(0.2, 1.0)])) <= 1e-12


# -- characteristics of the stage field ---------------------------------------------


def f_(K):
    return stage_function(build(K))


def test_constant_characteristic_is_exact():
    gf = GraphField(f_(1))
    assert verify_characteristic(constant_characteristic(Q(1, 2)), gf) == 0
    assert verify_characteristic(constant_characteristic(0), gf) == 0


def test_branch_examples():
    f = f_(1)
    gf = GraphField(f)
    up = branch_characteristic(f, Q(1, 12), Q(1, 3))
    assert up.knots == (0, Q(25, 12), Q(7, 3), 4)
    assert up(Q(9, 4)) == Q(1, 4)
    assert verify_characteristic(up, gf) == 0
    down = branch_characteristic(f, Q(5, 12), Q(7, 12))
    assert down.pieces[0].x_start == Q(7, 12)
    assert down.pieces[1].slope == -1
    assert down(4) == Q(5, 12)
    assert verify_characteristic(down, gf) == 0


def test_branch_rejects_mixed_intervals():
    with pytest.raises(NotMonotoneRun):
        branch_characteristic(f_(1), Q(1, 3), Q(6, 10))
    with pytest.raises(ValueError):
        branch_characteristic(f_(1), Q(1, 2), Q(1, 3))


def test_negative_control_detected():
    f = f_(1)
    gamma = branch_characteristic(f, 0, Q(5, 12))
    bad = shifted_piece(gamma, 1, Q(1, 100))
    assert verify_characteristic(bad, GraphField(f)) > 0


def test_speed_limit_violation():
    gamma = Characteristic((Piece(Q(0), Q(4), Q(0), 2),))
    assert verify_characteristic(gamma, GraphField(f_(0))) >= 1


@st.composite
def branch_inputs(draw):
    K = draw(st.integers(0, 6))
    f = f_(K)
    a, b, _ = draw(st.sampled_from(runs(f)))
    u = draw(st.fractions(0, 1, max_denominator=50))
    v = draw(st.fractions(0, 1, max_denominator=50))
    x, y = sorted((a + (b - a) * u, a + (b - a) * v))
    return f, x, y


@given(branch_inputs())
def test_random_branches_are_exact(data):
    f, x, y = data
    gamma = branch_characteristic(f, x, y)
    assert verify_characteristic(gamma, GraphField(f)) == 0
    assert {gamma(0), gamma(4)} <= {x, y}


def test_characteristic_csv():
    lines = characteristic_csv(branch_characteristic(f_(0), Q(1, 4), Q(1, 2))).splitlines()
    assert lines[0] == "t,x,t_float,x_float"
    assert lines[1:] == [
        "0/1,1/4,0,0.25",
        "9/4,1/4,2.25,0.25",
        "5/2,1/2,2.5,0.5",
        "4/1,1/2,4,0.5",
    ]


def test_characteristic_validation():
    with pytest.raises(ValueError):
        Characteristic(())
    with pytest.raises(ValueError):
        Characteristic((Piece(Q(0), Q(1), Q(0), 0), Piece(Q(2), Q(3), Q(0), 0)))
