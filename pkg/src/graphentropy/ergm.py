"""Exponential-family free energy over graphons and its transition structure.

The free energy psi(b1, b2) is the maximum of -I(g) + b1 e(g) + b2 t(g) over
step graphons.  On the regime treated here the maximizers are constant, so the
scalar family phi(u) = -I0(u) + b1 u + b2 u^3 carries the transition curve;
the full graphon maximization is kept as an independent cross-check and for
the t <= e^3 bound verification.  The convexity analysis of the e = 1/2
entropy slice lives here too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize as sp_opt

from .errors import NoTransitionFound, NotConverged, SignPatternUnexpected, ValueOutOfRange
from .graphon import (
    CLAMP,
    DensityPair,
    Graphon,
    Motif,
    constant_graphon,
    motif_density,
    rate_derivative,
    rate_second_derivative,
    rate_value,
    resample,
)
from .optimize import OptimConfig, _make_problem, _proj, _spg_box


@dataclass(frozen=True)
class ErgmParams:
    beta1: float
    beta2: float

    def __post_init__(self):
        if not (math.isfinite(self.beta1) and math.isfinite(self.beta2)):
            raise ValueOutOfRange("parameters must be finite")


@dataclass
class FreeEnergyResult:
    psi: float
    maximizer: Graphon
    maximizer_densities: DensityPair
    degenerate: bool
    secondary_densities: DensityPair | None


@dataclass
class ConvexityReport:
    c1: float
    c2: float
    second_derivative_samples: list  # (t, s''(1/2, t)) pairs


# ---------------------------------------------------------------------------
# Constant-graphon reduction


def _phi(u, beta1, beta2):
    return -rate_value(u) + beta1 * u + beta2 * u ** 3


def _scalar_maximizers(beta1, beta2, grid_points=10_000, tie_tol=1e-8):
    """All local maximizers of phi on [0,1] within tie_tol of the global max."""
    us = np.linspace(CLAMP, 1.0 - CLAMP, grid_points)
    ph = _phi(us, beta1, beta2)
    # local maxima on the grid, endpoints included
    inner = np.zeros(grid_points, dtype=bool)
    inner[1:-1] = (ph[1:-1] >= ph[:-2]) & (ph[1:-1] >= ph[2:])
    inner[0] = ph[0] >= ph[1]
    inner[-1] = ph[-1] >= ph[-2]
    cands = []
    for i in np.flatnonzero(inner):
        lo = us[max(i - 1, 0)]
        hi = us[min(i + 1, grid_points - 1)]
        res = sp_opt.minimize_scalar(
            lambda u: -_phi(u, beta1, beta2),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        cands.append((float(res.x), float(-res.fun)))
    best = max(v for _, v in cands)
    tied = sorted(u for u, v in cands if v >= best - tie_tol)
    # dedupe near-identical roots from adjacent grid cells
    u_star = []
    for u in tied:
        if not u_star or u - u_star[-1] > 1e-7:
            u_star.append(u)
    return best, u_star


def psi_constant(params: ErgmParams) -> dict:
    """Free energy restricted to constant graphons; lists all tied maximizers."""
    psi_er, u_star = _scalar_maximizers(params.beta1, params.beta2)
    return {"psi_er": psi_er, "u_star": u_star}


# ---------------------------------------------------------------------------
# Full graphon maximization


def psi_full(params: ErgmParams, config: OptimConfig | None = None,
             motif: Motif | None = None) -> FreeEnergyResult:
    """Unconstrained box maximization of -I + b1 e + b2 t by multistart SPG.

    Raises NotConverged (with .result carrying the best candidate) when no
    start meets the stationarity tolerance.
    """
    if config is None:
        config = OptimConfig()
    if motif is None:
        motif = Motif.triangle()
    b1, b2 = params.beta1, params.beta2
    m = config.m
    dens_grad = _make_problem(motif, m)

    def obj_grad(a):
        t_val, d = dens_grad(a)
        f = float(np.mean(rate_value(a))) - b1 * float(np.mean(a)) - b2 * t_val
        return f, rate_derivative(a) - b1 - b2 * d

    rng = np.random.default_rng(config.seed)
    starts = []
    if config.warm_start is not None:
        starts.append(resample(config.warm_start, m).values.copy())
    for u in psi_constant(params)["u_star"]:
        starts.append(np.full((m, m), u))
    for u in (0.1, 0.5, 0.9):
        starts.append(np.full((m, m), u))
    for _ in range(max(config.multistart_count // 2, 2)):
        r = rng.uniform(0.05, 0.95, size=(m, m))
        starts.append(0.5 * (r + r.T))

    runs = []
    for a0 in starts:
        a, f, _, pg = _spg_box(
            _proj(a0), obj_grad, 0.3 * config.kkt_tol, config.max_inner_iterations
        )
        e_val = float(np.mean(a))
        t_val, _ = dens_grad(a)
        runs.append((-f, e_val, t_val, pg, a))
    runs.sort(key=lambda r: -r[0])
    psi, e_val, t_val, pg, a = runs[0]
    degenerate = False
    secondary = None
    for psi2, e2, t2, _, _ in runs[1:]:
        if psi - psi2 <= 1e-7 and max(abs(e2 - e_val), abs(t2 - t_val)) > 1e-3:
            degenerate = True
            secondary = DensityPair(e=e2, t=t2)
            break
    result = FreeEnergyResult(
        psi=psi,
        maximizer=Graphon(values=a.copy()),
        maximizer_densities=DensityPair(e=e_val, t=t_val),
        degenerate=degenerate,
        secondary_densities=secondary,
    )
    if pg > config.kkt_tol:
        raise NotConverged(f"projected gradient {pg:.3g} above tolerance", result)
    return result


def verify_t_le_e_cubed(grid, config: OptimConfig | None = None) -> dict:
    """Check t(maximizer) <= e(maximizer)^3 + 1e-6 across a parameter grid."""
    if config is None:
        config = OptimConfig()
    rows = []
    violations = []
    for params in grid:
        try:
            res = psi_full(params, config)
        except NotConverged as exc:
            res = exc.result
        e_val, t_val = res.maximizer_densities.e, res.maximizer_densities.t
        excess = t_val - e_val ** 3
        rows.append((params.beta1, params.beta2, e_val, t_val, excess))
        if excess > 1e-6:
            violations.append(rows[-1])
    return {
        "points": rows,
        "violations": violations,
        "max_excess": max(r[4] for r in rows) if rows else -math.inf,
    }


# ---------------------------------------------------------------------------
# Transition curve


def find_transition(beta2, beta1_bracket=(-20.0, 20.0), tol=1e-13) -> tuple:
    """Bisect on beta1 for the jump of the scalar-family maximizer at fixed beta2.

    Returns (beta1_critical, u_low, u_high).  Raises NoTransitionFound when the
    maximizer varies continuously (no first-order jump at this beta2).
    """
    if beta2 <= -0.5:
        raise ValueOutOfRange(f"beta2={beta2} outside the treated regime (> -1/2)")

    def top(b1):
        # strict global argmax; ties resolved by magnitude so the bisection
        # locates the exact value crossing, not the tie-tolerance shoulder
        _, us = _scalar_maximizers(b1, beta2, tie_tol=1e-15)
        return us[-1]

    lo, hi = beta1_bracket
    u_lo, u_hi = top(lo), top(hi)
    if u_hi - u_lo < 1e-3:
        raise NoTransitionFound(f"maximizer does not jump on the bracket at beta2={beta2}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if top(mid) - u_lo < 0.5 * (u_hi - u_lo):
            lo = mid
        else:
            hi = mid
    b1c = 0.5 * (lo + hi)
    u_low, u_high = top(lo), top(hi)
    if u_high - u_low <= 1e-3:
        raise NoTransitionFound(f"jump at beta2={beta2} below threshold")
    gap = abs(_phi(u_low, b1c, beta2) - _phi(u_high, b1c, beta2))
    if gap > 1e-9:
        raise NoTransitionFound(f"tied-value gap {gap:.3g} too large at beta2={beta2}")
    return b1c, u_low, u_high


def transition_curve(beta2_min, beta2_max, steps) -> list:
    """Sampled first-order transition curve; rows (beta2, beta1_critical, u_low, u_high).

    beta2 values without a jump are skipped (reported by absence, not error);
    raises NoTransitionFound only when no sampled beta2 has one.
    """
    if steps < 2:
        raise ValueOutOfRange("steps must be >= 2")
    if beta2_min <= -0.5:
        raise ValueOutOfRange("beta2 range must stay above -1/2")
    rows = []
    for beta2 in np.linspace(beta2_min, beta2_max, steps):
        try:
            b1c, u_low, u_high = find_transition(float(beta2))
        except NoTransitionFound:
            continue
        rows.append((float(beta2), b1c, u_low, u_high))
    if not rows:
        raise NoTransitionFound(
            f"no first-order jump found for beta2 in [{beta2_min}, {beta2_max}]"
        )
    return rows


# ---------------------------------------------------------------------------
# Convexity of the e = 1/2 entropy slice


def slice_second_derivative(t):
    """Exact s''(1/2, t) for the closed-form slice s = -I0(1/2 + eps(t))."""
    t = np.asarray(t, dtype=float)
    eps = (0.125 - t) ** (1.0 / 3.0)
    u = 0.5 + eps
    return -(eps * rate_second_derivative(u) - 2.0 * rate_derivative(u)) / (9.0 * eps ** 5)


def _slice_value(t):
    return -rate_value(0.5 + (0.125 - t) ** (1.0 / 3.0))


def slice_second_derivative_fd(t, h=None):
    """Fourth-order central-difference s''(1/2, t); validation path."""
    if h is None:
        h = min(1e-4, 0.4 * t, 0.4 * (0.125 - t))
    f = _slice_value
    return (-f(t - 2 * h) + 16 * f(t - h) - 30 * f(t) + 16 * f(t + h) - f(t + 2 * h)) / (
        12 * h ** 2
    )


def convexity_report(samples=400) -> ConvexityReport:
    """Locate the concave-to-convex change of s(1/2, t) on (0, 1/8)."""
    if samples < 100:
        raise ValueOutOfRange("need at least 100 samples")
    ts = np.linspace(1e-4, 0.125 - 1e-6, samples)
    d2 = slice_second_derivative(ts)
    signs = np.sign(d2)
    changes = np.flatnonzero(signs[:-1] != signs[1:])
    if d2[0] >= 0 or d2[-1] <= 0 or len(changes) != 1:
        raise SignPatternUnexpected(
            f"expected a single concave-to-convex change, got {len(changes)} crossings"
        )
    i = int(changes[0])
    root = float(
        sp_opt.brentq(lambda t: float(slice_second_derivative(t)), ts[i], ts[i + 1],
                      xtol=1e-14)
    )
    return ConvexityReport(
        c1=root,
        c2=root,
        second_derivative_samples=list(zip(ts.tolist(), d2.tolist())),
    )
