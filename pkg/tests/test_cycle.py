import json
import math

import numpy as np
import pytest

from stasis_cycles import builtin, find_stasis_fixed_lambda
from stasis_cycles.cycle import (
    TwoCycle,
    check_theorem1_hypotheses,
    cycle_family,
    find_loop,
    find_two_cycle_direct,
    find_two_cycle_reduced,
    g_map,
    make_chart,
    reduced_action,
    stasis_in_cycle_check,
    verify_two_cycle,
)
from stasis_cycles.errors import (
    DegenerateCycle,
    DegenerateStasis,
    NotPlanar,
    SingularJacobian,
    ValidityError,
    ZeroField,
)
from stasis_cycles.field import VectorField
from stasis_cycles.ode import flow, switched_trajectory
from stasis_cycles.report import dumps

from conftest import RAW_FIELDS, rk4_oracle

DELTAS = [0.2, 0.1, 0.05, 0.025]


def _ball(rng, center, radius, count):
    pts = []
    while len(pts) < count:
        v = rng.uniform(-radius, radius, center.size)
        if np.linalg.norm(v) <= radius:
            pts.append(center + v)
    return pts


# a curved f1, so the chart is not just a translation
CURVED = VectorField.from_strings(["1 + 0.3*x2^2", "0.5*sin(x1)"])


@pytest.mark.parametrize("which", ["SYS-LR", "SYS-PS", "SYS-3D", "SYS-DG", "curved"])
def test_chart_round_trip_and_conjugacy(which):
    if which == "curved":
        f1, base = CURVED, np.zeros(2)
    else:
        pair = builtin(which)
        f1, base = pair.f1, np.zeros(pair.dim)
        if which == "SYS-LR":
            base = np.array([-1.0, 0.0])
    chart = make_chart(f1, base)
    E, n = chart.basis, chart.normal
    np.testing.assert_allclose(E.T @ E, np.eye(base.size - 1), atol=1e-15)
    np.testing.assert_allclose(E.T @ n, 0, atol=1e-15)
    rng = np.random.default_rng(11)
    for p in _ball(rng, base, 0.2, 100):
        c = chart.to_chart(p)
        assert np.linalg.norm(chart.from_chart(c[0], c[1:]) - p) <= 1e-9
        t = rng.uniform(-0.1, 0.1)
        shifted = chart.to_chart(flow(f1, p, t))
        expected = c + np.eye(base.size)[0] * t
        assert np.max(np.abs(shifted - expected)) <= 1e-8


def test_chart_examples(lr, dg):
    chart = make_chart(lr.f1, (-1, 0))
    np.testing.assert_allclose(chart.to_chart((-0.8, 0.1)), (0.2, 0.1 * chart.basis[1, 0]), atol=1e-14)
    assert abs(chart.basis[1, 0]) == 1
    np.testing.assert_allclose(chart.from_chart(0.0, chart.to_chart((-1, 0))[1:]), (-1, 0), atol=1e-15)
    chart = make_chart(dg.f1, (0, 0))
    c = chart.to_chart((0.3, -0.25))
    assert c[0] == pytest.approx(0.3, abs=1e-14) and abs(c[1]) == pytest.approx(0.25, abs=1e-14)
    with pytest.raises(ValidityError):
        chart.to_chart((2.0, 0.0))
    with pytest.raises(ZeroField):
        make_chart(lr.f2, (0, 0))


def test_reduced_action_lr_closed_form(lr, lr_stasis):
    A = reduced_action(lr, lr_stasis)
    sign = A.chart.basis[1, 0]  # y is +-x2 depending on the Householder sign
    for a in (-0.3, -0.1, 0.0, 0.15, 0.3):
        for t in (-0.25, 0.0, 0.1, 0.25):
            assert A(sign * a, t)[0] == pytest.approx(sign * a * math.exp(t), abs=1e-9)
    y = np.array([0.17])
    assert np.max(np.abs(A(y, 0.0) - y)) <= 1e-10


def test_reduced_action_ps_is_stationary(ps, ps_stasis, sys3d, sys3d_stasis):
    for pair, s in [(ps, ps_stasis), (sys3d, sys3d_stasis)]:
        assert check_theorem1_hypotheses(reduced_action(pair, s)).stationarity_norm <= 1e-7


def test_reduced_action_rejects_degenerate(dg):
    s = find_stasis_fixed_lambda(dg, (0, 0), 0.5)
    with pytest.raises(DegenerateStasis):
        reduced_action(dg, s)
    with pytest.raises(DegenerateStasis):
        find_two_cycle_reduced(dg, s, 0.1)


def test_g_map_examples(lr, lr_stasis):
    A = reduced_action(lr, lr_stasis)
    sign = A.chart.basis[1, 0]
    assert sign * g_map(A, sign * 0.2, 0.1)[0] == pytest.approx(0.2 * math.sinh(0.1) / 0.1, abs=1e-9)
    assert g_map(A, 0.0, 0.17)[0] == pytest.approx(0, abs=1e-12)
    assert sign * g_map(A, sign * 0.2, 0.0)[0] == pytest.approx(0.2, abs=1e-6)
    with pytest.raises(ValidityError):
        g_map(A, 0.0, 10.0)


def test_g_map_jacobian_richardson(lr, lr_stasis, ps, ps_stasis):
    # central differences at h and 2h agree to O(h^2)
    for pair, s in [(lr, lr_stasis), (ps, ps_stasis)]:
        A = reduced_action(pair, s)
        y = np.array([0.05])
        cols = []
        for h in (1e-4, 2e-4):
            cols.append((g_map(A, y + h, 0.1) - g_map(A, y - h, 0.1)) / (2 * h))
        J1, J2 = cols
        assert abs(J1[0] - J2[0]) <= 1e-4 * max(1.0, abs(J1[0]))
    # on SYS-LR the Jacobian has the closed form sinh(d)/d
    A = reduced_action(lr, lr_stasis)
    J = (g_map(A, 1e-4, 0.1) - g_map(A, -1e-4, 0.1)) / 2e-4
    assert J[0] == pytest.approx(math.sinh(0.1) / 0.1, rel=1e-6)


def test_find_loop_lr(lr, lr_stasis):
    A = reduced_action(lr, lr_stasis)
    loop = find_loop(A, 0.2, 0.1)
    assert abs(loop.z[0]) <= 1e-10
    assert loop.residual <= 1e-9
    assert loop.period == 0.2 and loop.tau0 == -0.1
    assert loop.jacobian_sigma_min == pytest.approx(math.sinh(0.1) / 0.1, rel=1e-6)


class _ConstantAction:
    dim = 1
    t_max = 1.0

    def __call__(self, y, t):
        return np.atleast_1d(np.asarray(y, dtype=float))


def test_find_loop_constant_action_is_singular():
    with pytest.raises(SingularJacobian):
        find_loop(_ConstantAction(), 0.3, 0.1)


def test_find_loop_ps_against_independent_integration(ps, ps_stasis):
    A = reduced_action(ps, ps_stasis)
    loop = find_loop(A, 0.0, 0.1)
    assert loop.residual <= 1e-9
    # f1 is a unit translation in x1, so the section is x1 = 0 and Psi reads x2
    f2 = RAW_FIELDS["SYS-PS"][1]
    p = A.point(loop.z)
    assert abs(p[0]) <= 1e-14
    plus = rk4_oracle(f2, p, 0.1)
    minus = rk4_oracle(lambda x: -f2(x), p, 0.1)
    assert abs(plus[1] - minus[1]) <= 1e-9


def test_reduced_cycle_lr(lr, lr_stasis):
    c = find_two_cycle_reduced(lr, lr_stasis, 0.25)
    np.testing.assert_allclose(c.start, (-math.exp(0.25), 0), atol=1e-6)
    assert c.kappa == pytest.approx(2 * math.sinh(0.25), abs=1e-6)
    assert c.t2 == 0.5
    assert c.amplitude == pytest.approx(math.exp(0.25) - 1, abs=1e-6)
    assert 0 < c.kappa < c.period
    assert c.closure_residual <= 1e-7 and c.dynamics_residual <= 1e-4
    assert c.section_gap <= 1e-8


def test_reduced_cycle_ps_encloses_origin(ps, ps_stasis):
    c = find_two_cycle_reduced(ps, ps_stasis, 0.1)
    np.testing.assert_allclose(c.start, (-math.sinh(0.1), math.cosh(0.1) - 1), atol=1e-8)
    assert c.kappa == pytest.approx(2 * math.sinh(0.1), abs=1e-8)
    assert c.section_gap <= 1e-8
    # independent replay through the builtin right-hand sides
    f1, f2 = RAW_FIELDS["SYS-PS"]
    end = rk4_oracle(f2, rk4_oracle(f1, c.start, c.kappa), c.t2)
    assert np.linalg.norm(end - c.start) <= 1e-7
    res = stasis_in_cycle_check(ps, c)
    assert res.contains and np.linalg.norm(res.witness.x) <= 1e-10


def test_direct_cycle_lr(lr, lr_stasis):
    c = find_two_cycle_direct(lr, lr_stasis, 0.5)
    np.testing.assert_allclose(c.start, (-1, 0), atol=1e-8)
    assert c.kappa == pytest.approx(1 - math.exp(-0.5), abs=1e-8)
    c = find_two_cycle_direct(lr, lr_stasis, math.log(2))
    assert c.kappa == pytest.approx(0.5, abs=1e-8)
    with pytest.raises(ValueError):
        find_two_cycle_direct(lr, lr_stasis, 0.0)


def test_direct_cycle_ps_needs_offset_anchor(ps, ps_stasis):
    d = 0.1
    with pytest.raises(DegenerateCycle):
        find_two_cycle_direct(ps, ps_stasis, 2 * d)
    c = find_two_cycle_direct(ps, ps_stasis, 2 * d, anchor=(-math.sinh(d), 0))
    assert c.kappa == pytest.approx(2 * math.sinh(d), abs=1e-8)
    assert verify_two_cycle(ps, c).passed


def test_reduced_and_direct_pass_same_verification(lr, lr_stasis, ps, ps_stasis):
    cycles = [
        (lr, find_two_cycle_reduced(lr, lr_stasis, 0.2)),
        (lr, find_two_cycle_direct(lr, lr_stasis, 0.4)),
        (ps, find_two_cycle_reduced(ps, ps_stasis, 0.2)),
        (ps, find_two_cycle_direct(ps, ps_stasis, 0.4, anchor=(-math.sinh(0.2), 0))),
    ]
    for pair, c in cycles:
        rep = verify_two_cycle(pair, c)
        assert rep.passed and rep.closure_residual <= 1e-7


def test_families_shrink(lr, lr_stasis, ps, ps_stasis):
    fam = cycle_family(lr, lr_stasis, DELTAS)
    eps = [m.amplitude for m in fam]
    np.testing.assert_allclose(eps, [math.exp(d) - 1 for d in DELTAS], atol=1e-6)
    for pair, s in [(lr, lr_stasis), (ps, ps_stasis)]:
        eps = [m.amplitude for m in cycle_family(pair, s, DELTAS)]
        assert all(b < a for a, b in zip(eps, eps[1:]))
        assert eps[3] < eps[0] / 4
    with pytest.raises(ValueError):
        cycle_family(lr, lr_stasis, [])
    with pytest.raises(ValueError):
        cycle_family(lr, lr_stasis, [0.1, 0.2])


def test_family_cold_start_matches_warm(ps, ps_stasis):
    warm = cycle_family(ps, ps_stasis, DELTAS)
    cold = cycle_family(ps, ps_stasis, DELTAS, warm_start=False)
    for a, b in zip(warm, cold):
        assert a.amplitude == pytest.approx(b.amplitude, abs=1e-9)


def test_verify_detects_tampering(lr, lr_stasis):
    c = find_two_cycle_reduced(lr, lr_stasis, 0.25)
    assert verify_two_cycle(lr, c).closure_residual <= 1e-7
    bad = TwoCycle.from_dict({**c.to_dict(), "kappa": c.kappa + 0.1})
    rep = verify_two_cycle(lr, bad)
    assert not rep.closure_ok and not rep.passed
    neg = TwoCycle.from_dict({**c.to_dict(), "kappa": 0.0})
    rep = verify_two_cycle(lr, neg)
    assert not rep.ordering_ok and not rep.passed


def test_q1(lr, lr_stasis, ps, ps_stasis, sys3d, sys3d_stasis):
    c = find_two_cycle_reduced(lr, lr_stasis, 0.25)
    res = stasis_in_cycle_check(lr, c)
    assert res.contains
    np.testing.assert_allclose(res.witness.x, (-1, 0), atol=1e-10)
    c = find_two_cycle_reduced(ps, ps_stasis, 0.1)
    res = stasis_in_cycle_check(ps, c, use_reference=False)
    assert res.contains and res.interior_samples >= 100
    assert abs(res.witness.x[0]) <= 1e-10  # on the stasis curve x1 = 0
    c3 = find_two_cycle_direct(sys3d, sys3d_stasis, 0.2, anchor=(-math.sinh(0.1), 0, 0))
    with pytest.raises(NotPlanar):
        stasis_in_cycle_check(sys3d, c3)


def test_q1_segment_search_without_reference(lr, lr_stasis):
    c = find_two_cycle_reduced(lr, lr_stasis, 0.25)
    res = stasis_in_cycle_check(lr, c, use_reference=False)
    assert res.contains and res.method == "segment"
    assert abs(res.witness.x[1]) <= 1e-10
    assert -math.exp(0.25) - 1e-6 <= res.witness.x[0] <= -math.exp(-0.25) + 1e-6


def test_two_cycle_json_round_trip(ps, ps_stasis):
    c = find_two_cycle_reduced(ps, ps_stasis, 0.1)
    text = dumps(c.to_dict(samples=5))
    data = json.loads(text)
    assert set(data) >= {"start", "kappa", "t2", "period", "closure_residual", "amplitude", "stasis", "samples"}
    assert len(data["samples"]) == 5
    back = TwoCycle.from_dict(data)
    assert back.kappa == c.kappa and np.array_equal(back.start, c.start)
    assert dumps(back.to_dict()) == dumps(c.to_dict())
    replay = switched_trajectory(ps, back.start, back.schedule)
    assert np.linalg.norm(replay.end - back.start) <= 1e-7
