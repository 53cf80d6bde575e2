"""Constrained entropy maximization over step graphons.

The core solver maximizes -I(g) subject to e(g) = e and t(H, g) = t by an
augmented-Lagrangian outer loop with a spectral projected-gradient inner loop
on the symmetric box [CLAMP, 1-CLAMP]^(m x m).  Closed forms for the e = 1/2
family and the upper boundary, Euler-Lagrange residuals, multiplier fits and
the crease scans live alongside it.

The reported entropy value is always -I of an explicitly feasible iterate, so
it is a rigorous lower bound for the true value; the ceiling -I0(e) (constant
graphon) is used both as a sanity invariant and as an early-exit test on the
Erdos-Renyi curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize as sp_opt
from scipy import stats as sp_stats

from . import region
from .errors import DegenerateFit, Infeasible, ValueOutOfRange
from .graphon import (
    CLAMP,
    DensityPair,
    Graphon,
    Motif,
    bipodal_graphon,
    constant_graphon,
    motif_density,
    motif_gradient,
    rate_derivative,
    rate_function,
    rate_second_derivative,
    rate_value,
    resample,
)

_BOX_LO = CLAMP
_BOX_HI = 1.0 - CLAMP

DEFAULT_ANSATZ = ("constant", "checkerboard", "upper_corner", "bipodal_random")


@dataclass(frozen=True)
class OptimConfig:
    m: int = 16
    multistart_count: int = 12
    max_outer_iterations: int = 60
    max_inner_iterations: int = 2000
    constraint_tol: float = 1e-6
    kkt_tol: float = 1e-5
    penalty_initial: float = 10.0
    penalty_growth: float = 4.0
    seed: int = 0
    ansatz_set: tuple = DEFAULT_ANSATZ
    warm_start: Graphon | None = None

    def __post_init__(self):
        if self.constraint_tol <= 0 or self.kkt_tol <= 0:
            raise ValueOutOfRange("tolerances must be positive")
        if self.penalty_growth <= 1:
            raise ValueOutOfRange("penalty_growth must exceed 1")


@dataclass
class EntropyResult:
    g_star: Graphon
    s_value: float
    target: DensityPair
    achieved: DensityPair
    beta1: float
    beta2: float
    el_residual_norm: float
    converged: bool
    multistart_values: list


@dataclass
class ELResidualField:
    residuals: np.ndarray
    h_field: np.ndarray
    sup_norm: float


@dataclass
class BipodalSolution:
    epsilon: float
    c_eigenvalue: float
    s_value: float
    beta1: float
    beta2: float
    beta_finite: bool

    def graphon(self, m) -> Graphon:
        if self.epsilon == 0.0:
            return constant_graphon(0.5, m)
        return bipodal_graphon(
            0.5, 0.5 - self.epsilon, 0.5 + self.epsilon, 0.5 - self.epsilon, m
        )


@dataclass
class CreaseBoundConstants:
    e: float
    f_minus: float
    linear_constant_below: float
    linear_constant_above: float
    power_constant: float
    x_argmin: float


# ---------------------------------------------------------------------------
# f_-(e) and closed forms


def _f_ratio(e, x):
    """f(e, x) = [I0(e+x) - x I0'(e) - I0(e)] / x^2 with a stable small-x path."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-4
    xs = x[~small]
    out[~small] = (rate_value(e + xs) - xs * rate_derivative(e) - rate_value(e)) / xs ** 2
    if np.any(small):
        d2 = rate_second_derivative(e)
        d3 = 0.5 * (-1.0 / e ** 2 + 1.0 / (1.0 - e) ** 2)
        d4 = 1.0 / e ** 3 + 1.0 / (1.0 - e) ** 3
        xt = x[small]
        out[small] = d2 / 2.0 + d3 * xt / 6.0 + d4 * xt ** 2 / 24.0
    return out


def f_minus(e, grid_points=100_000) -> CreaseBoundConstants:
    """Infimum of f(e, x) over x in [-e, 1-e], by grid scan plus local polish."""
    if not (0.0 < e < 1.0):
        raise ValueOutOfRange(f"e={e} outside (0,1)")
    xs = np.linspace(-e, 1.0 - e, grid_points)
    fs = _f_ratio(e, xs)
    i = int(np.argmin(fs))
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, grid_points - 1)]
    res = sp_opt.minimize_scalar(
        lambda x: float(_f_ratio(e, np.array([x]))[0]),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-10},
    )
    fm = min(float(fs[i]), float(res.fun))
    xmin = float(res.x) if res.fun <= fs[i] else float(xs[i])
    return CreaseBoundConstants(
        e=e,
        f_minus=fm,
        linear_constant_below=fm / e,
        linear_constant_above=fm / (3.0 * e + 1.0),
        power_constant=fm,
        x_argmin=xmin,
    )


def closed_form_half(t) -> BipodalSolution:
    """Exact optimizer family at e = 1/2 for t <= 1/8.

    epsilon = (1/8 - t)^(1/3); the entropy value is -I0(1/2 + epsilon) and the
    multipliers satisfy beta1 = -(3/4) beta2.  At epsilon = 0 and epsilon = 1/2
    the multipliers diverge and are reported as signed infinities.
    """
    if not (0.0 <= t <= 0.125):
        raise ValueOutOfRange(f"t={t} outside [0, 1/8]")
    eps = (0.125 - t) ** (1.0 / 3.0)
    s_val = -rate_value(0.5 + eps)
    tiny = 1e-12
    if eps < tiny or eps > 0.5 - tiny:
        return BipodalSolution(
            epsilon=eps,
            c_eigenvalue=-eps,
            s_value=s_val,
            beta1=math.inf,
            beta2=-math.inf,
            beta_finite=False,
        )
    beta2 = -math.log((0.5 + eps) / (0.5 - eps)) / (6.0 * eps ** 2)
    return BipodalSolution(
        epsilon=eps,
        c_eigenvalue=-eps,
        s_value=s_val,
        beta1=-0.75 * beta2,
        beta2=beta2,
        beta_finite=True,
    )


def closed_form_upper(e, m) -> Graphon:
    """Upper-boundary optimizer: 1 on [0, sqrt(e))^2, 0 elsewhere (grid-rounded)."""
    if not (0.0 <= e <= 1.0):
        raise ValueOutOfRange(f"e={e} outside [0,1]")
    mc = min(max(int(round(math.sqrt(e) * m)), 0), m)
    a = np.zeros((m, m))
    a[:mc, :mc] = 1.0
    return Graphon(values=a)


# ---------------------------------------------------------------------------
# Euler-Lagrange residuals and multiplier estimation


def el_residual(g: Graphon, beta1, beta2, motif: Motif | None = None) -> ELResidualField:
    """Field -I0'(g) + beta1 + beta2 * h on the blocks; h is the first-variation
    field of t(H, g) (3 * int g g for triangles)."""
    if motif is None:
        motif = Motif.triangle()
    h = motif_gradient(g, motif)
    res = -rate_derivative(g.values) + beta1 + beta2 * h
    return ELResidualField(residuals=res, h_field=h, sup_norm=float(np.max(np.abs(res))))


def estimate_multipliers(g: Graphon, motif: Motif | None = None) -> dict:
    """Least-squares (beta1, beta2) minimizing the Euler-Lagrange residual."""
    if motif is None:
        motif = Motif.triangle()
    h = motif_gradient(g, motif)
    hv = h.ravel()
    if float(np.std(hv)) < 1e-10 * max(1.0, float(np.mean(np.abs(hv)))):
        raise DegenerateFit("first-variation field is constant; beta2 unidentifiable")
    y = rate_derivative(g.values).ravel()
    x = np.column_stack([np.ones_like(hv), hv])
    coef, *_ = np.linalg.lstsq(x, y, rcond=None)
    beta1, beta2 = float(coef[0]), float(coef[1])
    res = el_residual(g, beta1, beta2, motif)
    return {"beta1": beta1, "beta2": beta2, "residual_norm": res.sup_norm}


# ---------------------------------------------------------------------------
# Problem kernels


def _make_problem(motif: Motif, m):
    """Return dens_grad(A) -> (t, D) with fast paths for triangles and stars."""
    if motif == Motif.triangle():

        def dens_grad(a):
            a2 = a @ a
            return float(np.sum(a2 * a)) / m ** 3, 3.0 * a2 / m

        return dens_grad
    if motif.edges == frozenset((1, j) for j in range(2, motif.ell + 1)):
        k = motif.k

        def dens_grad(a):
            r = np.mean(a, axis=1)
            rp = r ** (k - 1)
            d = 0.5 * k * (rp[:, None] + rp[None, :])
            return float(np.mean(r ** k)), d

        return dens_grad

    def dens_grad(a):
        g = Graphon(values=a.copy())
        return motif_density(g, motif), motif_gradient(g, motif)

    return dens_grad


def _proj(a):
    return np.clip(a, _BOX_LO, _BOX_HI)


def _dot(x, y):
    return float(np.mean(x * y))


def _spg_box(a, obj_grad, tol, max_iter):
    """Nonmonotone spectral projected gradient on the clamped box.

    obj_grad(A) -> (f, G) with the mean-convention gradient; returns the final
    iterate, value, gradient and projected-gradient sup norm.
    """
    f, g = obj_grad(a)
    step = 1.0 / max(1.0, float(np.max(np.abs(g))))
    hist = [f]
    pg = float(np.max(np.abs(a - _proj(a - g))))
    for _ in range(max_iter):
        pg = float(np.max(np.abs(a - _proj(a - g))))
        if pg <= tol:
            break
        d = _proj(a - step * g) - a
        gd = _dot(g, d)
        if gd >= -1e-18:
            step = 1.0
            d = _proj(a - step * g) - a
            gd = _dot(g, d)
            if gd >= -1e-18:
                break
        fref = max(hist[-10:])
        alpha = 1.0
        while True:
            an = a + alpha * d
            fn, gn = obj_grad(an)
            if fn <= fref + 1e-4 * alpha * gd or alpha < 1e-12:
                break
            alpha *= 0.5
        s = an - a
        y = gn - g
        sy = _dot(s, y)
        step = min(max(_dot(s, s) / sy, 1e-8), 1e8) if sy > 1e-18 else 1.0
        a, f, g = an, fn, gn
        hist.append(f)
    return a, f, g, pg


def _ls_multipliers(a, d):
    """Least-squares (lam1, lam2) solving I0'(a) = lam1 + lam2 * d over the
    interior blocks; None when too few interior blocks or d is constant."""
    interior = (a > 1e-6) & (a < 1.0 - 1e-6)
    if np.sum(interior) < 3:
        return None
    hv = d[interior].ravel()
    if float(np.std(hv)) < 1e-8 * max(1.0, float(np.mean(np.abs(hv)))):
        return None
    y = rate_derivative(a[interior]).ravel()
    x = np.column_stack([np.ones_like(hv), hv])
    coef, *_ = np.linalg.lstsq(x, y, rcond=None)
    if not np.all(np.isfinite(coef)):
        return None
    return coef


@dataclass
class _RunRecord:
    a_final: np.ndarray
    lam: np.ndarray
    viol: float
    pg: float
    converged: bool
    best_s: float  # best -I over feasible iterates (-inf if none)
    best_a: np.ndarray | None


def _lagrangian_pg(a, d, lam):
    """Projected sup-norm of the Lagrangian gradient I0'(a) - lam1 - lam2 d."""
    g = rate_derivative(a) - lam[0] - lam[1] * d
    return float(np.max(np.abs(a - _proj(a - g))))


def _solve_constrained(a0, target: DensityPair, motif: Motif, cfg: OptimConfig):
    m = cfg.m
    dens_grad = _make_problem(motif, m)
    te, tt = target.e, target.t
    rho = cfg.penalty_initial
    best = {"s": -math.inf, "a": None}
    a = _proj(np.array(a0, dtype=float))
    # seed the multipliers from the Euler-Lagrange fit at the start; for an
    # ansatz that is already the optimizer this makes it a fixed point of the
    # first inner solve instead of a point the penalty term drags away from
    _, d0 = dens_grad(a)
    fit0 = _ls_multipliers(a, d0)
    lam = fit0 if fit0 is not None else np.zeros(2)

    def make_obj(lam, rho):
        def obj_grad(a):
            i_val = float(np.mean(rate_value(a)))
            e_val = float(np.mean(a))
            t_val, d = dens_grad(a)
            c = np.array([e_val - te, t_val - tt])
            lam_eff = lam - rho * c
            f = i_val - float(lam @ c) + 0.5 * rho * float(c @ c)
            g = rate_derivative(a) - lam_eff[0] - lam_eff[1] * d
            if max(abs(c[0]), abs(c[1])) <= cfg.constraint_tol and -i_val > best["s"]:
                best["s"] = -i_val
                best["a"] = a.copy()
            return f, g

        return obj_grad

    # Multiplier updates: prefer the least-squares fit of the Euler-Lagrange
    # equations at the current iterate (stable even where the dual iteration
    # is ill-behaved, e.g. the convex stretch of s(1/2, t)); fall back to the
    # Hestenes-Powell update when the fit is degenerate.  The penalty grows
    # only while the violation stagnates and is capped.
    pg = math.inf
    viol = math.inf
    prev_viol = math.inf
    stall = 0
    for outer in range(cfg.max_outer_iterations):
        inner_tol = max(0.3 * cfg.kkt_tol, min(1e-2, 0.5 ** outer))
        a, _, _, pg = _spg_box(a, make_obj(lam, rho), inner_tol, cfg.max_inner_iterations)
        e_val = float(np.mean(a))
        t_val, d = dens_grad(a)
        c = np.array([e_val - te, t_val - tt])
        viol = float(np.max(np.abs(c)))
        if viol <= cfg.constraint_tol and pg <= cfg.kkt_tol:
            break
        fit = _ls_multipliers(a, d)
        if fit is not None:
            lam = fit
        else:
            # Hestenes-Powell step, trust-region capped so it cannot run away
            # in lockstep with a growing penalty
            dl = -rho * c
            cap = 10.0 * (1.0 + float(np.linalg.norm(lam)))
            n = float(np.linalg.norm(dl))
            if n > cap:
                dl *= cap / n
            lam = lam + dl
        if viol > 0.25 * prev_viol and viol > cfg.constraint_tol:
            rho = min(rho * cfg.penalty_growth, 1e8)
            stall += 1
        else:
            stall = 0
        if stall >= 8:  # violation no longer responding to the penalty
            break
        prev_viol = min(prev_viol, viol)
    converged = viol <= cfg.constraint_tol and pg <= cfg.kkt_tol
    # certify at the best feasible iterate: if the Euler-Lagrange fit there is
    # projected-stationary, report that point even when the final AL iterate
    # wandered off (this rescues exact ansatz starts in the convex stretch)
    if not converged and best["a"] is not None:
        ab = best["a"]
        tb, db = dens_grad(ab)
        violb = max(abs(float(np.mean(ab)) - te), abs(tb - tt))
        fitb = _ls_multipliers(ab, db)
        if fitb is not None and violb <= cfg.constraint_tol:
            pgb = _lagrangian_pg(ab, db, fitb)
            if pgb <= cfg.kkt_tol:
                a, lam, viol, pg, converged = ab.copy(), fitb, violb, pgb, True
    return _RunRecord(
        a_final=a,
        lam=lam,
        viol=viol,
        pg=pg,
        converged=converged,
        best_s=best["s"],
        best_a=best["a"],
    )


# ---------------------------------------------------------------------------
# Start generation


def _starts(target: DensityPair, motif: Motif, cfg: OptimConfig):
    m = cfg.m
    e, t = target.e, target.t
    k = motif.k
    rng = np.random.default_rng(cfg.seed)
    starts = []
    if cfg.warm_start is not None:
        starts.append(("warm", resample(cfg.warm_start, m).values.copy()))
    for name in cfg.ansatz_set:
        if name == "constant":
            starts.append(("constant", np.full((m, m), float(e))))
        elif name == "checkerboard":
            # rank-one bipodal perturbation of g_e; exact optimizer family at e=1/2
            x = abs(e ** k - t) ** (1.0 / 3.0)
            x = min(x, e - 0.01, 1.0 - e - 0.01)
            if x > 0:
                sign = -1.0 if t <= e ** k else 1.0
                alpha = np.ones(m)
                alpha[: m // 2] = -1.0
                starts.append(
                    ("checkerboard", _proj(e + sign * x * np.outer(alpha, alpha)))
                )
        elif name == "upper_corner":
            corner = closed_form_upper(e, m).values
            denom = e ** 1.5 - e ** k
            theta = (t - e ** k) / denom if abs(denom) > 1e-12 else 0.0
            theta = min(max(theta, 0.05), 1.0)
            starts.append(("upper_corner", _proj(theta * corner + (1 - theta) * e)))
        elif name == "bipodal_random":
            c = rng.uniform(0.15, 0.85)
            p = rng.uniform(0.05, 0.95, size=3)
            starts.append(
                ("bipodal_random", bipodal_graphon(c, p[0], p[1], p[2], m).values.copy())
            )
    for i in range(cfg.multistart_count):
        if i % 2 == 0:
            c = rng.uniform(0.15, 0.85)
            p = rng.uniform(0.05, 0.95, size=3)
            starts.append((f"random{i}", bipodal_graphon(c, p[0], p[1], p[2], m).values.copy()))
        else:
            r = rng.uniform(0.05, 0.95, size=(m, m))
            starts.append((f"random{i}", 0.5 * (r + r.T)))
    return starts


# ---------------------------------------------------------------------------
# Public solver


def maximize_entropy(target: DensityPair, motif: Motif | None = None,
                     config: OptimConfig | None = None) -> EntropyResult:
    """Maximize -I(g) subject to e(g) = target.e and t(H, g) = target.t.

    Runs every configured ansatz plus random restarts and returns the best
    feasible iterate.  Raises Infeasible when every start misses the
    constraint tolerance by more than 10x.
    """
    if motif is None:
        motif = Motif.triangle()
    if config is None:
        config = OptimConfig()
    if motif == Motif.triangle():
        cls = region.classify(target.e, target.t, tol=config.constraint_tol)
        if cls in (region.RegionClass.OUTSIDE_UPPER, region.RegionClass.BELOW_ENVELOPE):
            raise Infeasible(
                f"target ({target.e},{target.t}) classified {cls.value} for the triangle model"
            )
    ceiling = -rate_value(target.e)
    dens_grad = _make_problem(motif, config.m)
    multistart_values = []
    best = None  # (s, index, record)
    runs = []
    for idx, (_, a0) in enumerate(_starts(target, motif, config)):
        rec = _solve_constrained(a0, target, motif, config)
        runs.append(rec)
        multistart_values.append(rec.best_s)
        if rec.best_a is not None and (best is None or rec.best_s > best[0] + 1e-15):
            best = (rec.best_s, idx, rec)
        # the constant graphon is the unconstrained-in-t maximizer at fixed e,
        # so nothing can beat the ceiling; stop once it is hit
        if rec.converged and rec.best_s >= ceiling - 1e-9:
            break
    if best is None:
        min_viol = min(r.viol for r in runs)
        if min_viol > 10.0 * config.constraint_tol:
            extra = ""
            if motif == Motif.triangle():
                extra = f"; region class {region.classify(target.e, target.t).value}"
            raise Infeasible(
                f"no start reached constraint tolerance (best violation {min_viol:.3g})"
                + extra
            )
        # feasible region grazed but not entered within tolerance
        rec = min(runs, key=lambda r: r.viol)
        g_star = Graphon(values=rec.a_final.copy())
        e_val = float(np.mean(rec.a_final))
        t_val, _ = dens_grad(rec.a_final)
        return EntropyResult(
            g_star=g_star,
            s_value=-rate_function(g_star),
            target=target,
            achieved=DensityPair(e=min(max(e_val, 0.0), 1.0), t=min(max(t_val, 0.0), 1.0)),
            beta1=float(rec.lam[0]),
            beta2=float(rec.lam[1]),
            el_residual_norm=el_residual(g_star, rec.lam[0], rec.lam[1], motif).sup_norm,
            converged=False,
            multistart_values=multistart_values,
        )
    _, _, rec = best
    g_star = Graphon(values=rec.best_a.copy())
    e_val = float(np.mean(rec.best_a))
    t_val, _ = dens_grad(rec.best_a)
    beta1, beta2 = float(rec.lam[0]), float(rec.lam[1])
    try:
        fit = estimate_multipliers(g_star, motif)
        el_norm = fit["residual_norm"]
    except DegenerateFit:
        el_norm = el_residual(g_star, beta1, beta2, motif).sup_norm
    return EntropyResult(
        g_star=g_star,
        s_value=float(best[0]),
        target=target,
        achieved=DensityPair(e=e_val, t=t_val),
        beta1=beta1,
        beta2=beta2,
        el_residual_norm=el_norm,
        converged=rec.converged,
        multistart_values=multistart_values,
    )


# ---------------------------------------------------------------------------
# Crease scan


@dataclass
class CreasePoint:
    delta: float
    t: float
    s: float | None
    status: str  # ok | infeasible | not_converged
    quotient: float | None


@dataclass
class CreaseScanResult:
    e: float
    motif: Motif
    s_on_curve: float
    below: list
    above: list
    left_slopes: list
    right_slopes: list
    left_exponent_fit: dict | None
    bound_checks: dict | None


def _power_fit(deltas, drops):
    """log-log regression drop ~ C * delta^p."""
    ld = np.log(np.asarray(deltas))
    lr = np.log(np.asarray(drops))
    fit = sp_stats.linregress(ld, lr)
    return {
        "exponent": float(fit.slope),
        "exponent_stderr": float(fit.stderr),
        "constant": float(math.exp(fit.intercept)),
        "intercept_stderr": float(fit.intercept_stderr),
    }


def crease_scan(e, motif: Motif | None = None, deltas=None,
                config: OptimConfig | None = None) -> CreaseScanResult:
    """One-sided behavior of s(e, t) around the curve t = e^k.

    Marches away from the curve on each side with warm-started continuation and
    reports difference quotients, a log-log exponent fit for the lower branch,
    and the f_-(e) lower-bound checks (triangle motif only).
    """
    if motif is None:
        motif = Motif.triangle()
    if config is None:
        config = OptimConfig()
    if deltas is None:
        deltas = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2]
    if not (0.0 < e < 1.0):
        raise ValueOutOfRange(f"e={e} outside (0,1)")
    k = motif.k
    t0 = e ** k
    s0 = -rate_value(e)
    deltas = sorted(float(d) for d in deltas)

    def march(side):
        points = []
        warm = constant_graphon(e, config.m)
        for d in deltas:
            t = t0 - d if side == "below" else t0 + d
            if not (0.0 <= t <= 1.0):
                points.append(CreasePoint(d, t, None, "infeasible", None))
                continue
            cfg = replace(config, warm_start=warm)
            try:
                res = maximize_entropy(DensityPair(e=e, t=t), motif, cfg)
            except Infeasible:
                points.append(CreasePoint(d, t, None, "infeasible", None))
                continue
            status = "ok" if res.converged else "not_converged"
            q = (s0 - res.s_value) / d
            points.append(CreasePoint(d, t, res.s_value, status, q))
            warm = res.g_star
        return points

    below = march("below")
    above = march("above")
    left_slopes = [p.quotient for p in below if p.s is not None]
    right_slopes = [p.quotient for p in above if p.s is not None]

    fit = None
    ok_below = [(p.delta, s0 - p.s) for p in below if p.s is not None and s0 - p.s > 0]
    if len(ok_below) >= 3:
        fit = _power_fit([d for d, _ in ok_below], [r for _, r in ok_below])

    bounds = None
    if motif == Motif.triangle():
        fm = f_minus(e)
        checks_below = [
            (p.delta, (s0 - p.s) + 1e-6 >= fm.power_constant * p.delta ** (2.0 / 3.0)
             and (s0 - p.s) + 1e-6 >= fm.linear_constant_below * p.delta)
            for p in below if p.s is not None
        ]
        checks_above = [
            (p.delta, (s0 - p.s) + 1e-6 >= fm.linear_constant_above * p.delta)
            for p in above if p.s is not None
        ]
        bounds = {
            "f_minus": fm,
            "below": checks_below,
            "above": checks_above,
            "all_hold": all(b for _, b in checks_below + checks_above),
        }

    return CreaseScanResult(
        e=e,
        motif=motif,
        s_on_curve=float(s0),
        below=below,
        above=above,
        left_slopes=left_slopes,
        right_slopes=right_slopes,
        left_exponent_fit=fit,
        bound_checks=bounds,
    )
