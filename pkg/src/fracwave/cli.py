"""Command-line interface.

Exit codes: 0 success, 2 solver failure, 3 invalid input or failed
validation, 4 file errors.
"""
import argparse
import json
import math
import sys

import numpy as np

from . import evolution as ev
from . import io, oracles, stability
from .errors import SolverError, ValidationFailed
from .petviashvili import SolverConfig, solve_resolved, solve_wave, solve_wave_at_speed
from .spectral import Grid, PeriodicField, sobolev_norm

EXIT_OK, EXIT_SOLVER, EXIT_INVALID, EXIT_IO = 0, 2, 3, 4
CURVE_HEADER = ("n", "error", "m_defect", "res")


def _speed(c):
    if not c > 0.5:
        raise ValueError("c = %r: periodic waves exist only for c > 1/2 (existence bound c > 1/2)" % c)
    return c


def _config(args):
    return SolverConfig(n_points=args.n, max_iters=args.max_iters, tol_error=args.tol,
                        tol_m=args.tol, tol_res=args.tol_res)


def _dump(obj, path=None):
    text = json.dumps(obj, indent=1, sort_keys=True, allow_nan=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(text)


def _persist_trace(trace, path):
    if trace is not None and path:
        io.write_csv(path, CURVE_HEADER, trace.rows())


def solve_any(alpha, c, cfg, method="auto", n_max=16384):
    """Petviashvili at speed c, falling back to Newton continuation."""
    if method in ("auto", "petviashvili"):
        try:
            return solve_resolved(c, alpha, cfg, n_max)
        except SolverError:
            if method == "petviashvili":
                raise
    return stability.NewtonBranch(alpha).solve(c)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_solve(args):
    cfg = _config(args)
    if args.w is not None:
        sol = solve_wave(args.w, args.alpha, cfg)
    else:
        sol = solve_any(args.alpha, _speed(args.c), cfg, args.method)
    io.save_solution(sol, args.out)
    if args.profile:
        io.write_csv(args.profile, ("x", "phi"), io.profile_rows(sol.phi))
    _dump({"alpha": sol.alpha, "c": sol.c, "w": sol.w, "A": sol.A, "method": sol.method,
           "n_points": sol.phi.n_points, "residual": sol.residual(), "archive": args.out})
    return EXIT_OK


def sweep_summary(table, c_star):
    ok = table.ok_rows()
    summary = {"alpha": table.alpha, "rows": len(table.rows), "solved": len(ok),
               "failed": [{"c": r.c, "error": r.error} for r in table.rows if not r.ok],
               "methods": {m: sum(r.method == m for r in ok) for m in ("petviashvili", "newton")},
               "c_star": c_star, "settings": table.settings}
    for name in ("A", "Aprime", "d", "Bc", "gamma"):
        col = [getattr(r, name) for r in ok if np.isfinite(getattr(r, name))]
        summary[name] = {"min": min(col), "max": max(col)} if col else None
    folds = []
    for a, b in zip(ok, ok[1:]):
        if np.sign(a.d) != np.sign(b.d) or a.n_neg != b.n_neg:
            folds.append({"c_lo": a.c, "c_hi": b.c, "d_lo": a.d, "d_hi": b.d,
                          "n_neg_lo": a.n_neg, "n_neg_hi": b.n_neg})
    summary["folds"] = folds
    summary["verdicts"] = {v: sum(r.verdict == v for r in ok) for v in ("stable", "unstable", "degenerate")}
    return summary


def cmd_sweep(args):
    cfg = _config(args)
    table = stability.sweep(args.alpha, (_speed(args.c_min), args.c_max), args.steps, cfg,
                            h=args.h, jobs=args.jobs)
    c_star = None if args.no_refine else stability.critical_speed(table, cfg)
    table.to_csv(args.out)
    _dump(sweep_summary(table, c_star), args.summary)
    if args.summary:
        _dump({"c_star": c_star, "csv": args.out, "summary": args.summary})
    return EXIT_OK


def cmd_stability(args):
    sol = io.load_solution(args.archive)
    branch = stability.branch_for(sol.method, sol.alpha, SolverConfig(n_points=sol.phi.n_points))
    a_prime, _ = stability.aprime_stencil(branch, sol, args.h, richardson=True)
    rep = stability.report(sol, a_prime)
    _dump({"alpha": sol.alpha, "c": sol.c, "A": sol.A, "Aprime": a_prime, "d": rep.d,
           "Bc": rep.b_c, "gamma": rep.gamma, "det_s0": rep.det_s0,
           "det_s0_corrected": rep.det_s0_corrected, "n_neg": rep.n_neg, "n_zero": rep.n_zero,
           "verdict": rep.verdict, "eigen_tail": [float(v) for v in rep.eigen_tail],
           "kernel_residual": rep.kernel_residual, "K_op": rep.K_op, "zero_tol": rep.zero_tol})
    return EXIT_OK


def _differences(u, v):
    d = u.samples - v.samples
    return float(np.max(np.abs(d))), float(math.sqrt(2.0 * math.pi * np.mean(d * d)))


def cmd_oracle(args):
    grid = Grid(args.n)
    if args.kind == "small_amplitude":
        out = {"kind": args.kind, "alpha": args.alpha, "a": args.a}
        rows = []
        for a in (args.a, 0.5 * args.a):
            prof = oracles.small_amplitude_phi(a, args.alpha, grid)
            rows.append({"a": a, "c": prof.c, "residual": prof.residual(), "warning": prof.warning})
        out["levels"] = rows
        out["ratio"] = rows[0]["residual"] / rows[1]["residual"] if rows[1]["residual"] else math.nan
        out["expected_ratio"] = 8.0
        _dump(out)
        return EXIT_OK
    alpha = 2.0 if args.kind == "dnoidal" else 1.0
    c = _speed(args.c)
    exact = oracles.dnoidal_profile(c, grid) if args.kind == "dnoidal" else oracles.rbo_profile(c, grid)
    try:
        sol = solve_wave_at_speed(c, alpha, _config(args))
    except SolverError as exc:
        _persist_trace(exc.trace, args.curves)
        raise
    _persist_trace(sol.trace, args.curves)
    sup, l2 = _differences(sol.phi, exact.field)
    e, m, r = sol.trace.final()
    _dump({"kind": args.kind, "alpha": alpha, "c": c, "w": sol.w, "A": sol.A, "A_exact": exact.A,
           "sup_diff": sup, "l2_diff": l2, "iters": sol.trace.iters,
           "final_error": e, "final_m_defect": m, "final_res": r, "curves": args.curves})
    return EXIT_OK


def cmd_evolve(args):
    sol = io.load_solution(args.archive)
    g = sol.grid
    if args.zero:
        u0 = PeriodicField.constant(g, 0.0)
    else:
        u0 = PeriodicField.from_samples(g, sol.phi.samples + args.perturb_eps * np.cos(args.perturb_mode * g.x))
    record = []
    if args.zero:
        state = ev.evolve(ev.EvolutionState(u0, 0.0, args.dt, sol.alpha, stride=args.stride), args.T)
        drift = sobolev_norm(state.u, 0.5 * sol.alpha)
    else:
        drift, state = ev.orbital_drift(u0, sol, args.T, args.dt, args.stride, record)
    io.write_csv(args.ledger, ev.LEDGER_HEADER, state.ledger)
    if args.drift:
        io.write_csv(args.drift, ("t", "rho"), record)
    L = np.array(state.ledger)
    P0, M0 = L[0, 2], L[0, 3]
    _dump({"alpha": sol.alpha, "c": sol.c, "T": state.t, "dt": args.dt, "drift": drift,
           "P_rel_drift": float(np.max(np.abs(L[:, 2] - P0)) / abs(P0)) if P0 else float(np.max(np.abs(L[:, 2]))),
           "M_drift": float(np.max(np.abs(L[:, 3] - M0))),
           "E_rel_drift": float(np.max(np.abs(L[:, 1] - L[0, 1])) / abs(L[0, 1])) if L[0, 1] else 0.0,
           "ledger": args.ledger})
    return EXIT_OK


def cmd_validate(args):
    from . import acceptance
    results = acceptance.run(args.only, stream=sys.stdout)
    if args.report:
        _dump([r.as_dict() for r in results], args.report)
    if not all(r.passed for r in results):
        raise ValidationFailed("%d of %d criteria failed" % (sum(not r.passed for r in results), len(results)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _solver_opts(p, n=1024):
    p.add_argument("--n", type=int, default=n, help="grid points (power of two)")
    p.add_argument("--tol", type=float, default=1e-13, help="Error and |1-M| tolerance")
    p.add_argument("--tol-res", type=float, default=1e-10)
    p.add_argument("--max-iters", type=int, default=5000)


def build_parser():
    p = argparse.ArgumentParser(prog="fracwave", description="Periodic waves of the fractional BBM equation.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="compute one wave")
    s.add_argument("--alpha", type=float, required=True)
    grp = s.add_mutually_exclusive_group(required=True)
    grp.add_argument("--c", type=float)
    grp.add_argument("--w", type=float, help="solve at fixed w instead of fixed speed")
    s.add_argument("--method", choices=("auto", "petviashvili", "newton"), default="auto")
    s.add_argument("--out", default="solution.json")
    s.add_argument("--profile", help="x,phi CSV")
    s.add_argument("--trace", help="iteration curves CSV written on solver failure")
    _solver_opts(s)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("sweep", help="tabulate a branch and its stability indicators")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--c-min", type=float, required=True)
    s.add_argument("--c-max", type=float, required=True)
    s.add_argument("--steps", type=int, default=30)
    s.add_argument("--h", type=float, default=1e-3, help="stencil half-width for A'(c)")
    s.add_argument("--jobs", type=int, default=None)
    s.add_argument("--no-refine", action="store_true", help="skip the c* refinement")
    s.add_argument("--out", default="sweep.csv")
    s.add_argument("--summary", help="summary JSON (stdout when omitted)")
    _solver_opts(s)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("stability", help="stability report for an archived wave")
    s.add_argument("archive")
    s.add_argument("--h", type=float, default=1e-3)
    s.set_defaults(func=cmd_stability)

    s = sub.add_parser("oracle", help="compare against closed-form waves")
    s.add_argument("--kind", choices=oracles.KINDS, required=True)
    s.add_argument("--c", type=float, default=1.2181)
    s.add_argument("--alpha", type=float, default=0.75, help="small_amplitude only")
    s.add_argument("--a", type=float, default=0.05, help="small_amplitude only")
    s.add_argument("--curves", help="per-iteration n,error,m_defect,res CSV")
    _solver_opts(s, 4096)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("evolve", help="time-evolve an archived wave")
    s.add_argument("archive")
    s.add_argument("--T", type=float, default=10.0)
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--perturb-mode", type=int, default=2)
    s.add_argument("--perturb-eps", type=float, default=0.0)
    s.add_argument("--zero", action="store_true", help="evolve zero initial data")
    s.add_argument("--stride", type=int, default=100)
    s.add_argument("--ledger", default="ledger.csv")
    s.add_argument("--drift", help="t,rho CSV")
    s.set_defaults(func=cmd_evolve)

    s = sub.add_parser("validate", help="run the acceptance criteria")
    s.add_argument("--only", type=int, nargs="*", help="criterion numbers")
    s.add_argument("--report", help="JSON results")
    s.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SolverError as exc:
        _persist_trace(exc.trace, getattr(args, "trace", None) or getattr(args, "curves", None))
        print("fracwave: solver failed: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        print("fracwave: I/O error: %s" % exc, file=sys.stderr)
        return EXIT_IO
    except (ValidationFailed, ValueError) as exc:
        print("fracwave: invalid: %s" % exc, file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
