"""Free-energy, transition-curve and convexity tests."""

import math

import numpy as np
import pytest

from graphentropy import errors
from graphentropy.ergm import (
    ErgmParams,
    convexity_report,
    find_transition,
    psi_constant,
    psi_full,
    slice_second_derivative,
    slice_second_derivative_fd,
    transition_curve,
    verify_t_le_e_cubed,
)
from graphentropy.graphon import rate_value
from graphentropy.optimize import OptimConfig, closed_form_upper

FAST = OptimConfig(m=8, multistart_count=4)


def test_params_must_be_finite():
    with pytest.raises(errors.ValueOutOfRange):
        ErgmParams(math.inf, 0.0)


def test_psi_constant_zero_field():
    out = psi_constant(ErgmParams(0.0, 0.0))
    assert out["psi_er"] == pytest.approx(0.5 * math.log(2.0), abs=1e-10)
    assert len(out["u_star"]) == 1
    assert out["u_star"][0] == pytest.approx(0.5, abs=1e-8)


def test_psi_constant_strong_field_pushes_to_one():
    out = psi_constant(ErgmParams(50.0, 0.0))
    assert out["u_star"][-1] > 0.999


def test_psi_full_zero_field():
    res = psi_full(ErgmParams(0.0, 0.0), FAST)
    assert res.psi == pytest.approx(0.5 * math.log(2.0), abs=1e-8)
    assert res.maximizer_densities.e == pytest.approx(0.5, abs=1e-6)
    assert not res.degenerate
    # psi equals the functional evaluated on its maximizer
    g = res.maximizer
    e, t = res.maximizer_densities.e, res.maximizer_densities.t
    val = -float(np.mean(rate_value(g.values)))
    assert res.psi == pytest.approx(val + 0.0 * e + 0.0 * t, abs=1e-10)


def test_psi_full_constant_maximizer_for_positive_beta2():
    res = psi_full(ErgmParams(0.3, 0.8), FAST)
    spread = float(np.ptp(res.maximizer.values))
    assert spread < 1e-6
    assert res.psi >= psi_constant(ErgmParams(0.3, 0.8))["psi_er"] - 1e-8


def test_psi_majorizes_constant_family():
    params = ErgmParams(-0.7, 1.3)
    res = psi_full(params, FAST)
    us = np.linspace(0.0, 1.0, 1000)
    vals = -rate_value(us) + params.beta1 * us + params.beta2 * us ** 3
    assert res.psi >= float(np.max(vals)) - 1e-8


def test_psi_convex_along_beta_line():
    b1s = np.linspace(-1.0, 1.0, 9)
    psis = [psi_constant(ErgmParams(float(b), 0.5))["psi_er"] for b in b1s]
    second = np.diff(psis, 2)
    assert np.all(second >= -1e-8)


def test_maximizer_triangle_bound():
    report = verify_t_le_e_cubed(
        [ErgmParams(b1, -2.0) for b1 in (-1.0, 0.0, 1.0)], FAST
    )
    assert report["violations"] == []
    assert report["max_excess"] <= 1e-6


def test_maximizer_bound_escapes_upper_boundary_start():
    cfg = OptimConfig(m=8, multistart_count=2, warm_start=closed_form_upper(0.5, 8))
    report = verify_t_le_e_cubed([ErgmParams(0.0, 1.0)], cfg)
    assert report["violations"] == []


def test_transition_exists_above_critical_coupling():
    b1c, u_low, u_high = find_transition(1.0)
    assert u_high - u_low > 1e-3
    # tied maximizers are both Erdos-Renyi: triangle density is the cube
    ps = psi_constant(ErgmParams(b1c, 1.0))
    assert abs(ps["u_star"][0] - u_low) < 1e-6
    assert abs(ps["u_star"][-1] - u_high) < 1e-6


def test_no_transition_below_critical_coupling():
    # the scalar family has a unique maximizer throughout for weak coupling
    with pytest.raises(errors.NoTransitionFound):
        find_transition(0.5)


def test_transition_curve_rows_monotone():
    rows = transition_curve(0.8, 2.0, 4)
    assert len(rows) == 4
    b1s = [r[1] for r in rows]
    assert all(b1s[i] > b1s[i + 1] for i in range(len(b1s) - 1))
    for _, b1c, u_low, u_high in rows:
        assert u_high - u_low > 1e-3


def test_transition_curve_domain_guard():
    with pytest.raises(errors.ValueOutOfRange):
        transition_curve(-1.0, 1.0, 3)
    with pytest.raises(errors.ValueOutOfRange):
        find_transition(-0.6)


def test_convexity_report_sign_change():
    rep = convexity_report(300)
    assert 0.0 < rep.c1 <= rep.c2 < 0.125
    ts = np.array([t for t, _ in rep.second_derivative_samples])
    d2 = np.array([d for _, d in rep.second_derivative_samples])
    assert np.all(d2[ts < rep.c1 - 1e-9] < 0.0)
    assert np.all(d2[ts > rep.c2 + 1e-9] > 0.0)


def test_convexity_exact_matches_finite_differences():
    for t in (0.02, 0.05, 0.08, 0.11):
        ex = float(slice_second_derivative(t))
        fd = slice_second_derivative_fd(t)
        assert fd == pytest.approx(ex, rel=1e-6)
