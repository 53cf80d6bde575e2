"""Command-line interface binding all modules.

Machine-readable results go to stdout or --out; diagnostics go to stderr.
Exit codes: 0 success, 2 invalid arguments, 3 infeasible target, 4 not
converged, 5 internal invariant violation.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import replace

import numpy as np

from . import census as census_mod
from . import ergm as ergm_mod
from . import phase as phase_mod
from . import region as region_mod
from . import spectral as spectral_mod
from .errors import (
    FormatError,
    GraphEntropyError,
    Infeasible,
    NoTransitionFound,
    NotConverged,
    ValueOutOfRange,
)
from .graphon import (
    DensityPair,
    Graphon,
    Motif,
    motif_density,
    motif_gradient,
    rate_value,
    read_motif,
)
from .optimize import (
    OptimConfig,
    closed_form_half,
    el_residual,
    estimate_multipliers,
    maximize_entropy,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_NOT_CONVERGED = 4
EXIT_INVARIANT = 5


def _sanitize(obj):
    """JSON-safe copy: numpy to native, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _sanitize(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(payload, out_path):
    _emit(json.dumps(_sanitize(payload), indent=2, sort_keys=True) + "\n", out_path)


def _parse_motif(text) -> Motif:
    if text == "triangle":
        return Motif.triangle()
    if text.startswith("star:"):
        return Motif.star(int(text.split(":", 1)[1]))
    return read_motif(text)


def _load_config(args) -> OptimConfig:
    base = {}
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
        if doc.get("version") != 1:
            raise FormatError(f"unsupported config version {doc.get('version')!r}")
        base = dict(doc.get("optim", {}))
    cfg = OptimConfig(**base)
    if getattr(args, "m", None):
        cfg = replace(cfg, m=args.m)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _threads(args) -> int:
    if args.threads in (None, "auto"):
        return 1
    return max(int(args.threads), 1)


def _entropy_payload(res):
    return {
        "s": res.s_value,
        "target": {"e": res.target.e, "t": res.target.t},
        "achieved": {"e": res.achieved.e, "t": res.achieved.t},
        "beta1": res.beta1,
        "beta2": res.beta2,
        "el_residual_norm": res.el_residual_norm,
        "converged": res.converged,
        "multistart_values": res.multistart_values,
        "graphon": res.g_star.values,
    }


# ---------------------------------------------------------------------------
# Subcommand handlers


def _cmd_entropy(args):
    cfg = _load_config(args)
    motif = _parse_motif(args.motif)
    res = maximize_entropy(DensityPair(e=args.e, t=args.t), motif, cfg)
    _emit_json(_entropy_payload(res), args.out)
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def _cmd_scan(args):
    with open(args.spec) as fh:
        doc = json.load(fh)
    cfg = _load_config(args)
    if "optim" in doc:
        cfg = replace(OptimConfig(**doc["optim"]),
                      seed=cfg.seed if args.seed is not None else doc["optim"].get("seed", 0))
    spec = phase_mod.ScanSpec(
        e_grid=[float(x) for x in doc["e_grid"]],
        t_grid=[float(x) for x in doc["t_grid"]],
        relative=bool(doc.get("relative", True)),
        motif=_parse_motif(doc.get("motif", "triangle")),
        config=cfg,
    )
    table = phase_mod.phase_diagram_scan(spec)
    buf = io.StringIO()
    buf.write("e,t,s,beta1,beta2,converged,el_residual,status\n")
    for r in table:
        buf.write(
            f"{r.e!r},{r.t!r},{r.s!r},{r.beta1!r},{r.beta2!r},"
            f"{int(r.converged)},{r.el_residual!r},{r.status}\n"
        )
    _emit(buf.getvalue(), args.out)
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(phase_mod.render_svg(table, "heatmap"))
    return EXIT_OK


def _cmd_crease(args):
    cfg = _load_config(args)
    motif = _parse_motif(args.motif)
    e_values = [float(x) for x in args.e.split(",")]
    verdicts = phase_mod.crease_report(e_values, motif, cfg)
    payload = []
    for v in verdicts:
        payload.append({
            "e": v.e,
            "left_quotient": v.left_quotient,
            "right_quotient": v.right_quotient,
            "separation_sigma": v.separation_sigma,
            "crease_detected": v.crease_detected,
            "one_sided": v.one_sided,
            "left_exponent_fit": v.scan.left_exponent_fit,
            "bounds_all_hold": None if v.scan.bound_checks is None
            else v.scan.bound_checks["all_hold"],
        })
    _emit_json(payload, args.out)
    return EXIT_OK


def _cmd_region(args):
    rows = region_mod.boundary_table(args.samples)
    buf = io.StringIO()
    buf.write("e,upper,er,envelope\n")
    for e, up, er, env in rows:
        buf.write(f"{e!r},{up!r},{er!r},{env!r}\n")
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _cmd_ergm(args):
    cfg = _load_config(args)
    if args.curve:
        rows = ergm_mod.transition_curve(args.beta2_min, args.beta2_max, args.steps)
        buf = io.StringIO()
        buf.write("beta2,beta1_critical,u_low,u_high\n")
        for b2, b1, ul, uh in rows:
            buf.write(f"{b2!r},{b1!r},{ul!r},{uh!r}\n")
        _emit(buf.getvalue(), args.out)
        if args.svg:
            with open(args.svg, "w") as fh:
                fh.write(phase_mod.render_svg(rows, "curves"))
        return EXIT_OK
    if args.verify_thm5:
        grid = [ergm_mod.ErgmParams(b1, b2)
                for b1 in np.linspace(-3, 3, 7) for b2 in np.linspace(-3, 3, 7)]
        report = ergm_mod.verify_t_le_e_cubed(grid, cfg)
        _emit_json({"max_excess": report["max_excess"],
                    "violations": report["violations"],
                    "points": report["points"]}, args.out)
        return EXIT_OK if not report["violations"] else EXIT_INVARIANT
    if args.grid:
        vals = [float(x) for x in args.grid.split(",")]
        if len(vals) != 6:
            raise ValueOutOfRange("--grid needs b1lo,b1hi,n1,b2lo,b2hi,n2")
        b1s = np.linspace(vals[0], vals[1], int(vals[2]))
        b2s = np.linspace(vals[3], vals[4], int(vals[5]))
        buf = io.StringIO()
        buf.write("beta1,beta2,psi,e,t,degenerate\n")
        for b1 in b1s:
            for b2 in b2s:
                try:
                    r = ergm_mod.psi_full(ergm_mod.ErgmParams(float(b1), float(b2)), cfg)
                except NotConverged as exc:
                    r = exc.result
                d = r.maximizer_densities
                buf.write(f"{float(b1)!r},{float(b2)!r},{r.psi!r},{d.e!r},{d.t!r},"
                          f"{int(r.degenerate)}\n")
        _emit(buf.getvalue(), args.out)
        return EXIT_OK
    raise ValueOutOfRange("ergm needs one of --grid, --curve, --verify-thm5")


def _cmd_census(args):
    table = census_mod.enumerate_census(
        args.n, allow_large=args.allow_large, threads=_threads(args)
    )
    buf = io.StringIO()
    buf.write("n,edges,triangles,count\n")
    for (ec, tc) in sorted(table.counts):
        buf.write(f"{table.n},{ec},{tc},{table.counts[(ec, tc)]}\n")
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _cmd_census_compare(args):
    cfg = _load_config(args)
    table = census_mod.enumerate_census(args.n, threads=_threads(args))
    points = []
    with open(args.points) as fh:
        header = fh.readline().strip().split(",")
        if header[:2] != ["e", "t"]:
            raise FormatError("points file needs an e,t header")
        for line in fh:
            if not line.strip():
                continue
            e, t = (float(x) for x in line.strip().split(",")[:2])
            points.append(DensityPair(e=e, t=t))

    def reference(p):
        try:
            return maximize_entropy(p, Motif.triangle(), cfg).s_value
        except Infeasible:
            return -math.inf

    report = census_mod.compare_to_variational(table, points, args.alpha, reference)
    _emit_json(report, args.out)
    return EXIT_OK


def _cmd_verify(args):
    cfg = _load_config(args)
    rng = np.random.default_rng(cfg.seed)
    checks = []

    def check(name, fn):
        try:
            ok = bool(fn())
            detail = ""
        except Exception as exc:  # a failing invariant must not abort the suite
            ok, detail = False, f" ({exc})"
        checks.append((name, ok, detail))

    def trace_inequality():
        for _ in range(200):
            m = int(rng.integers(2, 17))
            r = rng.uniform(-1, 1, size=(m, m))
            if not spectral_mod.verify_trace_inequality(0.5 * (r + r.T))["holds"]:
                return False
        v = rng.uniform(-1, 1, size=8)
        rep = spectral_mod.verify_trace_inequality(np.outer(v, v))
        return rep["rank_one"] and rep["gap"] < 1e-10

    def gradient_checks():
        for motif in (Motif.triangle(), Motif.star(4)):
            for _ in range(10):
                m = 6
                r = rng.uniform(0.1, 0.9, size=(m, m))
                a = 0.5 * (r + r.T)
                g = Graphon(values=a)
                d = motif_gradient(g, motif)
                i, j = int(rng.integers(m)), int(rng.integers(m))
                h = 1e-6
                ap = a.copy(); am = a.copy()
                if i == j:
                    ap[i, j] += h; am[i, j] -= h
                    scale = 1.0
                else:
                    ap[i, j] += h; ap[j, i] += h
                    am[i, j] -= h; am[j, i] -= h
                    scale = 2.0
                fd = (motif_density(Graphon(values=ap), motif)
                      - motif_density(Graphon(values=am), motif)) / (2 * h)
                exact = scale * d[i, j] / m ** 2
                if abs(fd - exact) > 1e-6 * max(1.0, abs(exact)):
                    return False
        return True

    def closed_forms():
        for eps in (0.05, 0.1, 0.2, 0.4):
            sol = closed_form_half(0.125 - eps ** 3)
            g = sol.graphon(16)
            if el_residual(g, sol.beta1, sol.beta2).sup_norm > 1e-10:
                return False
            fit = estimate_multipliers(g)
            if abs(fit["beta1"] - sol.beta1) > 1e-6 or abs(fit["beta2"] - sol.beta2) > 1e-6:
                return False
        return True

    def region_geometry():
        if region_mod.classify(0.7, 0.2) is not region_mod.RegionClass.BELOW_ENVELOPE:
            return False
        for e in (0.2, 0.5, 0.8):
            if not (region_mod.lower_envelope(e) <= region_mod.er_curve(e)
                    <= region_mod.upper_boundary(e)):
                return False
        return abs(region_mod.touch_point(1) - 0.5) < 1e-15

    def census_hand():
        t3 = census_mod.enumerate_census(3)
        return t3.counts == {(0, 0): 1, (1, 0): 3, (2, 0): 3, (3, 1): 1}

    def convexity_paths():
        for t in (0.02, 0.05, 0.09, 0.12):
            ex = float(ergm_mod.slice_second_derivative(t))
            fd = ergm_mod.slice_second_derivative_fd(t)
            if abs(ex - fd) > 1e-4 * max(1.0, abs(ex)):
                return False
        rep = ergm_mod.convexity_report(200)
        return 0.0 < rep.c1 <= rep.c2 < 0.125

    def er_ceiling():
        small = replace(cfg, m=8, multistart_count=2)
        for e in (0.3, 0.5, 0.7):
            res = maximize_entropy(DensityPair(e=e, t=e ** 3), Motif.triangle(), small)
            if abs(res.s_value + float(rate_value(e))) > 1e-6:
                return False
        return True

    check("trace_inequality", trace_inequality)
    check("gradient_checks", gradient_checks)
    check("closed_form_agreement", closed_forms)
    check("region_geometry", region_geometry)
    check("census_hand_enumeration", census_hand)
    check("convexity_derivative_paths", convexity_paths)
    check("er_curve_ceiling", er_ceiling)

    buf = io.StringIO()
    for name, ok, detail in checks:
        buf.write(f"{'PASS' if ok else 'FAIL'} {name}{detail}\n")
    all_ok = all(ok for _, ok, _ in checks)
    buf.write(f"{'PASS' if all_ok else 'FAIL'} overall\n")
    _emit(buf.getvalue(), args.out)
    return EXIT_OK if all_ok else EXIT_INVARIANT


# ---------------------------------------------------------------------------
# Argument parsing


def _global_flags(p, suppress):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=d, help="RNG seed (u64)")
    p.add_argument("--threads", default=d, help="worker count or 'auto'")
    p.add_argument("--out", default=d, help="machine-output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=d)
    p.add_argument("--config", default=d, help="JSON config file, version 1")


def _build_parser():
    p = argparse.ArgumentParser(
        prog="graphentropy",
        description="Entropy of large dense graphs under edge and motif constraints.",
    )
    _global_flags(p, suppress=False)
    # accepted both before and after the subcommand; the subparser copies use
    # SUPPRESS defaults so they never clobber values parsed up front
    shared = argparse.ArgumentParser(add_help=False)
    _global_flags(shared, suppress=True)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("entropy", parents=[shared], help="constrained entropy maximization")
    sp.add_argument("--e", type=float, required=True)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--motif", default="triangle")
    sp.add_argument("--m", type=int, default=None)
    sp.set_defaults(handler=_cmd_entropy)

    sp = sub.add_parser("scan", parents=[shared], help="phase-diagram scan from a spec file")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--svg", default=None)
    sp.set_defaults(handler=_cmd_scan)

    sp = sub.add_parser("crease", parents=[shared], help="one-sided analysis around t = e^k")
    sp.add_argument("--e", required=True, help="comma-separated e values")
    sp.add_argument("--motif", default="triangle")
    sp.set_defaults(handler=_cmd_crease)

    sp = sub.add_parser("region", parents=[shared], help="boundary curves table")
    sp.add_argument("--samples", type=int, required=True)
    sp.set_defaults(handler=_cmd_region)

    sp = sub.add_parser("ergm", parents=[shared], help="free energy and transition curve")
    sp.add_argument("--grid", default=None, help="b1lo,b1hi,n1,b2lo,b2hi,n2")
    sp.add_argument("--curve", action="store_true")
    sp.add_argument("--beta2-min", type=float, default=0.6)
    sp.add_argument("--beta2-max", type=float, default=2.0)
    sp.add_argument("--steps", type=int, default=8)
    sp.add_argument("--verify-thm5", action="store_true")
    sp.add_argument("--svg", default=None)
    sp.set_defaults(handler=_cmd_ergm)

    sp = sub.add_parser("census", parents=[shared], help="exact labeled-graph census")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--allow-large", action="store_true", help="permit n=8")
    sp.set_defaults(handler=_cmd_census)

    sp = sub.add_parser("census-compare", parents=[shared], help="finite-n entropy vs the solver")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--points", required=True, help="CSV with e,t header")
    sp.set_defaults(handler=_cmd_census_compare)

    sp = sub.add_parser("verify", parents=[shared], help="run the cross-module invariant suite")
    sp.set_defaults(handler=_cmd_verify)
    return p


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.handler(args)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NotConverged as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except NoTransitionFound as exc:
        print(f"no transition: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueOutOfRange, FormatError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GraphEntropyError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
