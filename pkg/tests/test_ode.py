import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stasis_cycles import builtin
from stasis_cycles.errors import MaxStepsExceeded, TransversalityError, ValidityError
from stasis_cycles.field import VectorField
from stasis_cycles.ode import (
    IntegratorConfig,
    SwitchSchedule,
    dynamics_residual,
    flow,
    flow_variational,
    relaxed_trajectory,
    switched_trajectory,
    time_to_hyperplane,
)

from conftest import BUILTIN_NAMES, RAW_FIELDS, rk4_oracle

RK4 = IntegratorConfig(method="rk4")


def test_flow_closed_forms(lr):
    np.testing.assert_allclose(flow(lr.f2, (1, 0), math.log(2)), (2, 0), atol=1e-9)
    np.testing.assert_allclose(flow(lr.f1, (-1, 0), 0.5), (-0.5, 0), atol=1e-15)
    x0 = np.array([0.3, -0.2])
    assert np.array_equal(flow(lr.f2, x0, 0.0), x0)


def test_negative_time_is_reverse_flow(lr):
    np.testing.assert_allclose(flow(lr.f2, (2, 1), -math.log(2)), (1, 0.5), atol=1e-10)


@pytest.mark.parametrize("x0", [(0.4, -0.3), (-1, 2)])
def test_flow_variational_closed_forms(lr, x0):
    _, psi = flow_variational(lr.f2, x0, 1.0)
    np.testing.assert_allclose(psi, math.e * np.eye(2), atol=1e-8)
    _, psi = flow_variational(lr.f1, x0, -0.7)
    np.testing.assert_allclose(psi, np.eye(2), atol=1e-14)
    x, psi = flow_variational(lr.f2, x0, 0.0)
    assert np.array_equal(psi, np.eye(2)) and np.allclose(x, x0)


def test_rk4_halving_ratio(lr):
    errs = []
    for h in (0.1, 0.05):
        x = flow(lr.f2, (1.0, 0.0), 1.0, IntegratorConfig(method="rk4", h=h))
        errs.append(abs(x[0] - math.e))
    assert 14 <= errs[0] / errs[1] <= 18


def test_dp45_matches_independent_rk4_on_nonlinear_field():
    f = VectorField.from_strings(["x2", "-sin(x1) - 0.1*x2"])
    raw = lambda x: np.array([x[1], -math.sin(x[0]) - 0.1 * x[1]])
    np.testing.assert_allclose(flow(f, (1.0, 0.0), 3.0), rk4_oracle(raw, (1.0, 0.0), 3.0), atol=1e-10)


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_flow_matches_oracle(name):
    pair = builtin(name)
    x0 = np.linspace(0.1, 0.3, pair.dim)
    for f, raw in zip((pair.f1, pair.f2), RAW_FIELDS[name]):
        np.testing.assert_allclose(flow(f, x0, 0.8), rk4_oracle(raw, x0, 0.8), atol=1e-10)


times = st.floats(min_value=-1, max_value=1, allow_nan=False)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(BUILTIN_NAMES), st.integers(1, 2), times, times)
def test_flow_composition_and_reversibility(name, which, a, b):
    pair = builtin(name)
    f = pair.field(which)
    x = np.linspace(-0.4, 0.5, pair.dim)
    np.testing.assert_allclose(flow(f, flow(f, x, a), b), flow(f, x, a + b), atol=1e-8)
    np.testing.assert_allclose(flow(f, flow(f, x, a), -a), x, atol=1e-8)


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_variational_matches_finite_differences(name):
    pair = builtin(name)
    x0 = np.linspace(0.2, -0.3, pair.dim)
    h = 1e-5
    for f in (pair.f1, pair.f2):
        _, psi = flow_variational(f, x0, 0.9)
        fd = np.empty_like(psi)
        for j in range(pair.dim):
            e = np.zeros(pair.dim)
            e[j] = h
            fd[:, j] = (flow(f, x0 + e, 0.9) - flow(f, x0 - e, 0.9)) / (2 * h)
        assert np.max(np.abs(psi - fd)) <= 1e-5 * max(1.0, np.max(np.abs(psi)))


def test_switched_segment_cycle(lr):
    traj = switched_trajectory(lr, (-1, 0), SwitchSchedule(((1, 0.5), (2, math.log(2)))))
    np.testing.assert_allclose(traj.end, (-1, 0), atol=1e-6)
    assert np.all(np.diff(traj.t) > 0)
    assert np.max(np.diff(traj.t)) <= 1e-3 + 1e-15
    assert traj.t[-1] == pytest.approx(0.5 + math.log(2), abs=1e-15)
    assert dynamics_residual(lr, traj) <= 1e-4
    # labels switch exactly at the switching time
    k = int(np.searchsorted(traj.t, 0.5))
    assert traj.seg[k - 1] == 1 and traj.seg[k] == 2


def test_switched_endpoint_is_flow_composition(ps):
    sched = SwitchSchedule(((2, 0.3), (1, 0.2), (2, 0.1)))
    traj = switched_trajectory(ps, (0.1, 0.2), sched)
    x = (0.1, 0.2)
    for i, d in sched:
        x = flow(ps.field(i), x, d)
    np.testing.assert_allclose(traj.end, x, atol=1e-14)


def test_switched_degenerate_pair(dg):
    traj = switched_trajectory(dg, (0, 0), [(1, 1.0), (2, 1.0)])
    np.testing.assert_allclose(traj.end, (0, 0), atol=1e-13)


def test_schedule_validation():
    with pytest.raises(ValueError):
        SwitchSchedule(())
    with pytest.raises(ValueError):
        SwitchSchedule(((1, 0.0),))
    with pytest.raises(ValueError):
        SwitchSchedule(((3, 1.0),))
    with pytest.raises(ValueError):
        SwitchSchedule.parse("1:0.5,2")
    assert SwitchSchedule.parse("1:0.5, 2:0.25").segments == ((1, 0.5), (2, 0.25))


@pytest.mark.parametrize("pair_name, x0", [("SYS-LR", (-1, 0)), ("SYS-PS", (0, 0))])
def test_relaxed_stays_at_stasis(pair_name, x0):
    pair = builtin(pair_name)
    traj = relaxed_trajectory(pair, x0, 0.5, (0, 10))
    assert np.max(np.abs(traj.x - np.asarray(x0))) <= 1e-8
    assert traj.seg[0] == 0.5


def test_relaxed_endpoint_weight_is_f1(lr):
    traj = relaxed_trajectory(lr, (0.2, 0.3), 0.0, (0, 1.5))
    np.testing.assert_allclose(traj.end, flow(lr.f1, (0.2, 0.3), 1.5), atol=1e-14)
    with pytest.raises(ValueError):
        relaxed_trajectory(lr, (0, 0), 1.5, (0, 1))


def test_rk4_sampling_and_max_steps(lr):
    traj = switched_trajectory(lr, (1, 1), [(2, 0.5)], IntegratorConfig(method="rk4", h=0.01))
    assert len(traj) == 51
    np.testing.assert_allclose(traj.end, (math.exp(0.5),) * 2, rtol=1e-9)
    with pytest.raises(MaxStepsExceeded):
        flow(lr.f2, (1, 1), 1.0, IntegratorConfig(method="rk4", h=1e-3, max_steps=10))
    with pytest.raises(MaxStepsExceeded):
        flow(lr.f2, (1, 1), 1.0, IntegratorConfig(max_steps=3))


def test_trajectory_csv(lr):
    traj = switched_trajectory(lr, (-1, 0), [(1, 0.002), (2, 0.001)])
    buf = io.StringIO()
    traj.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,x1,x2,seg"
    assert len(lines) == len(traj) + 1
    assert lines[1] == "0,-1,0,1"
    assert lines[-1].endswith(",2")
    assert float(lines[2].split(",")[1]) == pytest.approx(-0.999, abs=1e-15)


def test_time_to_hyperplane_examples(lr, ps):
    assert time_to_hyperplane(lr.f1, (-0.5, 0.3), (1, 0), (-1, 0)) == pytest.approx(0.5, abs=1e-14)
    assert time_to_hyperplane(lr.f1, (-1, 0.7), (1, 0), (-1, 0)) == 0.0
    with pytest.raises(TransversalityError):
        time_to_hyperplane(lr.f1, (0.2, 0.3), (0, 1), (0, 0))
    with pytest.raises(ValidityError):
        time_to_hyperplane(lr.f1, (3, 0), (1, 0), (0, 0), t_max=1.0)


def test_time_to_hyperplane_curved_flow():
    # rotation: from angle 0.5 on the unit circle back to the x1 axis takes 0.5
    f = VectorField.from_strings(["-x2", "x1"])
    x = (math.cos(0.5), math.sin(0.5))
    tau = time_to_hyperplane(f, x, (0, 1), (1, 0))
    assert tau == pytest.approx(0.5, abs=1e-11)
    landing = flow(f, x, -tau)
    assert abs(landing[1]) <= 1e-12


@pytest.mark.parametrize("t", [5e-324, -5e-324, 1e-300, 1e-14])
def test_tiny_time_spans(lr, t):
    np.testing.assert_allclose(flow(lr.f2, (0.1, 0.2), t), (0.1, 0.2), atol=1e-13)
    _, psi = flow_variational(lr.f2, (0.1, 0.2), t)
    np.testing.assert_allclose(psi, np.eye(2), atol=1e-13)
