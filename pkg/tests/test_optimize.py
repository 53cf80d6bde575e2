"""Constrained entropy solver and closed-form tests."""

import math

import numpy as np
import pytest

from graphentropy import errors
from graphentropy.graphon import DensityPair, Motif, constant_graphon, rate_value
from graphentropy.optimize import (
    OptimConfig,
    closed_form_half,
    closed_form_upper,
    crease_scan,
    el_residual,
    estimate_multipliers,
    f_minus,
    maximize_entropy,
)

FAST = OptimConfig(m=8, multistart_count=2)


# ---------------------------------------------------------------------------
# Closed forms


def test_closed_form_half_reference_point():
    sol = closed_form_half(0.124)
    assert sol.epsilon == pytest.approx(0.1, rel=1e-12)
    assert sol.s_value == pytest.approx(-rate_value(0.6), abs=1e-15)
    assert sol.beta2 == pytest.approx(-math.log(0.6 / 0.4) / 0.06, rel=1e-12)
    assert sol.beta1 == pytest.approx(-0.75 * sol.beta2, rel=1e-12)


def test_closed_form_half_endpoint_betas_diverge():
    sol = closed_form_half(0.125)
    assert sol.epsilon == 0.0
    assert not sol.beta_finite
    assert math.isinf(sol.beta1)


def test_closed_form_upper_densities():
    g = closed_form_upper(0.25, 16)
    assert float(np.mean(g.values)) == pytest.approx(0.25, abs=1e-12)


def test_f_minus_half_is_one():
    fm = f_minus(0.5)
    assert fm.f_minus == pytest.approx(1.0, abs=1e-9)
    assert fm.linear_constant_below == pytest.approx(2.0, abs=1e-8)
    assert fm.linear_constant_above == pytest.approx(0.4, abs=1e-9)


def test_f_minus_bounded_by_curvature():
    for e in (0.2, 0.4, 0.6, 0.8):
        fm = f_minus(e)
        assert 0.0 < fm.f_minus <= 1.0 / (4.0 * e * (1.0 - e)) + 1e-12


# ---------------------------------------------------------------------------
# Euler-Lagrange residuals


def test_el_residual_vanishes_on_bipodal_family():
    for eps in (0.05, 0.1, 0.2, 0.4):
        sol = closed_form_half(0.125 - eps ** 3)
        g = sol.graphon(8)
        assert el_residual(g, sol.beta1, sol.beta2).sup_norm < 1e-10


def test_estimate_multipliers_recovers_betas():
    sol = closed_form_half(0.124)
    fit = estimate_multipliers(sol.graphon(8))
    assert fit["beta1"] == pytest.approx(sol.beta1, abs=1e-6)
    assert fit["beta2"] == pytest.approx(sol.beta2, abs=1e-6)


def test_estimate_multipliers_degenerate_on_constant():
    with pytest.raises(errors.DegenerateFit):
        estimate_multipliers(constant_graphon(0.5, 4))


# ---------------------------------------------------------------------------
# Solver


def test_er_curve_hits_ceiling():
    for e in (0.3, 0.5, 0.7):
        res = maximize_entropy(DensityPair(e=e, t=e ** 3), Motif.triangle(), FAST)
        assert res.converged
        assert res.s_value == pytest.approx(-rate_value(e), abs=1e-6)


def test_below_crease_matches_closed_form():
    res = maximize_entropy(DensityPair(e=0.5, t=0.124), Motif.triangle(), FAST)
    sol = closed_form_half(0.124)
    assert res.converged
    assert res.s_value == pytest.approx(sol.s_value, abs=1e-4)
    assert res.beta1 == pytest.approx(sol.beta1, abs=1e-3)
    assert res.beta2 == pytest.approx(sol.beta2, abs=1e-3)


def test_solution_never_beats_ceiling():
    res = maximize_entropy(DensityPair(e=0.5, t=0.11), Motif.triangle(), FAST)
    assert res.s_value <= -rate_value(0.5) + 1e-9


def test_achieved_densities_within_tolerance():
    res = maximize_entropy(DensityPair(e=0.5, t=0.13), Motif.triangle(), FAST)
    assert abs(res.achieved.e - 0.5) <= FAST.constraint_tol
    assert abs(res.achieved.t - 0.13) <= FAST.constraint_tol


def test_infeasible_region_pre_check():
    with pytest.raises(errors.Infeasible):
        maximize_entropy(DensityPair(e=0.5, t=0.4), Motif.triangle(), FAST)
    with pytest.raises(errors.Infeasible):
        maximize_entropy(DensityPair(e=0.7, t=0.2), Motif.triangle(), FAST)


def test_star_below_jensen_floor_infeasible():
    with pytest.raises(errors.Infeasible):
        maximize_entropy(DensityPair(e=0.5, t=0.0525), Motif.star(4), FAST)


def test_star_above_floor_converges():
    res = maximize_entropy(DensityPair(e=0.5, t=0.0725), Motif.star(4), FAST)
    assert res.converged
    assert res.s_value <= -rate_value(0.5) + 1e-9


def test_warm_start_used():
    sol = closed_form_half(0.124)
    cfg = OptimConfig(m=8, multistart_count=0, ansatz_set=(),
                      warm_start=sol.graphon(8))
    res = maximize_entropy(DensityPair(e=0.5, t=0.124), Motif.triangle(), cfg)
    assert res.converged
    assert res.s_value == pytest.approx(sol.s_value, abs=1e-8)


def test_config_validation():
    with pytest.raises(errors.ValueOutOfRange):
        OptimConfig(constraint_tol=-1.0)
    with pytest.raises(errors.ValueOutOfRange):
        OptimConfig(penalty_growth=0.5)


# ---------------------------------------------------------------------------
# Crease scan


def test_crease_scan_quotients_split():
    scan = crease_scan(0.5, Motif.triangle(), deltas=[1e-3, 3e-3, 1e-2], config=FAST)
    assert scan.s_on_curve == pytest.approx(-rate_value(0.5), abs=1e-15)
    assert len(scan.left_slopes) == 3
    assert len(scan.right_slopes) == 3
    # the lower branch drops much faster than the upper branch
    assert min(scan.left_slopes) > 2.0 * max(scan.right_slopes)
    assert scan.bound_checks["all_hold"]
