"""Acceptance checks, one function per criterion.

Each check returns a :class:`Result`; :func:`run` prints one PASS/FAIL line
per criterion.  Sweeps are cached so that criteria sharing a branch do not
recompute it.
"""
import math
import sys
import tempfile
import time
from dataclasses import dataclass, field as dfield

import numpy as np
from scipy.integrate import quad

from . import elliptic, evolution, io, newton, oracles, spectral, stability
from .errors import SolverError
from .petviashvili import SolverConfig, solve_wave_at_speed
from .spectral import Grid, PeriodicField

# (c_min, c_max, steps) per alpha
SWEEPS = {
    2.0: (0.55, 2.0, 30),
    1.0: (0.55, 2.0, 20),
    0.55: (0.65, 2.0, 20),
    0.45: (0.55, 2.5, 40),
    0.5: (0.55, 1.5, 20),
}
C_STAR = {0.45: 0.953, 0.5: 0.67}

_sweeps = {}
_t_start = [None]


@dataclass
class Result:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    checks: dict = dfield(default_factory=dict)

    def line(self):
        return "[%s] %2d %s: %s (%.1f s)" % ("PASS" if self.passed else "FAIL", self.number,
                                             self.name, self.detail, self.seconds)

    def as_dict(self):
        return {"number": self.number, "name": self.name, "passed": bool(self.passed),
                "detail": self.detail, "seconds": self.seconds,
                "checks": {k: bool(v) for k, v in self.checks.items()}}


def _result(number, name, checks, detail, t0):
    return Result(number, name, all(checks.values()), detail, time.perf_counter() - t0, checks)


def sweep_for(alpha):
    """Cached (table, seconds) for one of the reference sweeps."""
    if alpha not in _sweeps:
        lo, hi, steps = SWEEPS[alpha]
        t0 = time.perf_counter()
        table = stability.sweep(alpha, (lo, hi), steps)
        _sweeps[alpha] = (table, time.perf_counter() - t0)
    return _sweeps[alpha]


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def check_1():
    t0 = time.perf_counter()
    c = 1.2181
    sol = solve_wave_at_speed(c, 2.0, SolverConfig(n_points=4096))
    secs = time.perf_counter() - t0
    e, m, r = sol.trace.final()
    exact = oracles.dnoidal_profile(c, sol.grid)
    diff = float(np.max(np.abs(sol.phi.samples - exact.field.samples)))
    checks = {"error": e <= 1e-10, "m_defect": m <= 1e-10, "res": r <= 1e-10,
              "sup_diff": diff <= 1e-6, "runtime": secs <= 10.0}
    return _result(1, "dnoidal oracle", checks,
                   "Error=%.1e |1-M|=%.1e RES=%.1e sup diff=%.1e" % (e, m, r, diff), t0)


def check_2():
    t0 = time.perf_counter()
    c = 1.2192
    sol = solve_wave_at_speed(c, 1.0, SolverConfig(n_points=512))
    secs = time.perf_counter() - t0
    exact = oracles.rbo_profile(c, sol.grid)
    diff = float(np.max(np.abs(sol.phi.samples - exact.field.samples)))
    speed_gap = abs(sol.c - 1.0 / (3.0 - sol.w))
    checks = {"sup_diff": diff <= 1e-6, "speed_relation": speed_gap <= 1e-8, "runtime": secs <= 5.0}
    return _result(2, "rBO oracle", checks,
                   "sup diff=%.1e |c-(3-w)^-1|=%.1e" % (diff, speed_gap), t0)


def check_3():
    t0 = time.perf_counter()
    t1, s1 = sweep_for(1.0)
    t2, s2 = sweep_for(2.0)
    rows1 = t1.ok_rows()
    err1 = max(abs(r.A - (4 * r.c * r.c - 2 * r.c)) for r in rows1)
    rel2 = max(abs(r.A - elliptic.integration_constant_alpha2(elliptic.modulus_from_speed(r.c))) / abs(r.A)
               for r in t2.ok_rows())
    checks = {"alpha1_rows": len(rows1) == 20 and len(t1.rows) == 20, "alpha1_A": err1 <= 1e-6,
              "alpha2_rows": len(t2.ok_rows()) == len(t2.rows), "alpha2_A": rel2 <= 1e-6,
              "runtime": s1 + s2 <= 120.0}
    return _result(3, "A(c) curves", checks,
                   "alpha=1 max|A-(4c^2-2c)|=%.1e, alpha=2 max rel err=%.1e, sweeps %.0f s"
                   % (err1, rel2, s1 + s2), t0)


def check_4():
    t0 = time.perf_counter()
    checks, parts = {}, []
    for alpha in (1.0, 2.0, 0.55):
        table, secs = sweep_for(alpha)
        d = table.column("d")
        checks["alpha%g_d_negative" % alpha] = len(d) == len(table.rows) and bool(np.all(d < 0))
        checks["alpha%g_runtime" % alpha] = secs <= 300.0
        parts.append("alpha=%g max d=%.3g" % (alpha, d.max()))
    for alpha, target in C_STAR.items():
        table, secs = sweep_for(alpha)
        t1 = time.perf_counter()
        c_star = stability.critical_speed(table)
        secs += time.perf_counter() - t1
        ok = c_star is not None and abs(c_star - target) <= 0.01
        checks["alpha%g_c_star" % alpha] = ok
        checks["alpha%g_runtime" % alpha] = secs <= 300.0
        parts.append("alpha=%g c*=%s (target %.3f)" % (alpha, "none" if c_star is None else "%.5f" % c_star, target))
    return _result(4, "d signs and critical speeds", checks, "; ".join(parts), t0)


def check_5():
    t0 = time.perf_counter()
    alpha = 0.45
    failures = []
    for c in np.linspace(0.55, 1.75, 7):
        try:
            sol = solve_wave_at_speed(c, alpha, SolverConfig())
            failures.append("converged at c=%.3f" % sol.c)
        except SolverError:
            pass
    table, _ = sweep_for(alpha)
    gap = [r for r in table.rows if r.c < 1.8]
    newton_ok = all(r.ok and r.method == "newton" for r in gap)
    worst = max((r.extras.get("residual", math.inf) for r in gap), default=math.inf)
    checks = {"petviashvili_fails": not failures, "newton_fills": newton_ok,
              "newton_residual": worst <= 1e-10}
    return _result(5, "Petviashvili gap", checks,
                   "petviashvili %s in (0.5,1.8); newton rows=%d max residual=%.1e"
                   % ("fails" if not failures else ", ".join(failures), len(gap), worst), t0)


def check_6():
    t0 = time.perf_counter()
    bad = []
    n = 0
    for alpha in SWEEPS:
        table, _ = sweep_for(alpha)
        for r in table.ok_rows():
            if not abs(r.d) > 1e-4:
                continue
            n += 1
            want = 1 if r.d < 0 else 2
            kr = r.extras.get("kernel_residual", math.inf)
            if r.n_neg != want or r.n_zero != 1 or not kr <= 1e-6:
                bad.append("alpha=%g c=%.4g n=(%d,%d) d=%.3g kr=%.1e" % (alpha, r.c, r.n_neg, r.n_zero, r.d, kr))
    checks = {"counts": not bad and n > 0}
    return _result(6, "eigen-count consistency", checks,
                   "%d rows checked%s" % (n, "" if not bad else "; mismatches: " + "; ".join(bad[:5])), t0)


def computed_small_amplitude(alpha, a=0.1, K=64):
    """(c, d, A') on the computed branch at amplitude parameter ``a``."""
    c = oracles.small_amplitude_speed(a, alpha, corrected=True)
    sol = newton.newton_solve(c, alpha, newton.small_amplitude_seed(c, alpha, K), tol=1e-13)
    b = newton.coefficients_of(sol, K)
    ap = newton.aprime_exact(b, c, alpha)
    return c, stability.d_value(c, sol.A, ap), ap


def check_7():
    t0 = time.perf_counter()
    checks, parts = {}, []
    for alpha in (0.75, 1.0, 2.0):
        for a in (0.05, 0.1):
            c, d, ap = computed_small_amplitude(alpha, a)
            d_ref, ap_ref = oracles.small_amplitude_d(alpha), oracles.small_amplitude_aprime(alpha)
            rd, ra = abs(d - d_ref) / abs(d_ref), abs(ap - ap_ref) / abs(ap_ref)
            checks["d_alpha%g_a%g" % (alpha, a)] = rd <= 0.1
            checks["Aprime_alpha%g_a%g" % (alpha, a)] = ra <= 0.1
            if a == 0.1:
                parts.append("alpha=%g: d=%.4g vs %.4g, A'=%.4g vs %.4g" % (alpha, d, d_ref, ap, ap_ref))
    lo, hi = oracles.small_amplitude_d(0.29), oracles.small_amplitude_d(0.30)
    checks["root_bracket"] = lo * hi < 0
    checks["zero_at_half"] = oracles.small_amplitude_d(0.5) == 0.0
    parts.append("formula d(0.29)=%.3g d(0.30)=%.3g d(1/2)=%g" % (lo, hi, oracles.small_amplitude_d(0.5)))
    return _result(7, "small-amplitude formulas", checks, "; ".join(parts), t0)


def check_8():
    t0 = time.perf_counter()
    bad, n = [], 0
    for alpha in SWEEPS:
        table, _ = sweep_for(alpha)
        for r in table.ok_rows():
            if r.verdict != "stable":
                continue
            n += 1
            if not (r.A > r.c - 0.5 and r.Aprime + r.Bc / math.pi > 0):
                bad.append("alpha=%g c=%.4g A=%.4g c-1/2=%.4g" % (alpha, r.c, r.A, r.c - 0.5))
    checks = {"bound": not bad and n > 0}
    return _result(8, "stability-bound property", checks,
                   "%d stable rows, %d violations%s" % (n, len(bad), "" if not bad else ": " + "; ".join(bad[:4])), t0)


def check_9():
    t0 = time.perf_counter()
    checks, parts = {}, []
    cfg = SolverConfig(n_points=256)
    sol2 = solve_wave_at_speed(1.2181, 2.0, cfg)
    err, _ = evolution.transport_error(sol2, 10.0, 1e-3)
    checks["transport"] = err <= 1e-5
    parts.append("transport %.1e" % err)
    for alpha in (1.0, 2.0):
        sol = sol2 if alpha == 2.0 else solve_wave_at_speed(1.2192, alpha, cfg)
        st = evolution.evolve(evolution.EvolutionState(sol.phi, 0.0, 1e-3, alpha, stride=100), 10.0)
        L = np.array(st.ledger)
        dP = float(np.max(np.abs(L[:, 2] - L[0, 2])) / abs(L[0, 2]))
        dM = float(np.max(np.abs(L[:, 3] - L[0, 3])) / max(abs(L[0, 3]), 1.0))
        checks["conserved_alpha%g" % alpha] = dP <= 1e-8 and dM <= 1e-8
        parts.append("alpha=%g dP=%.1e dM=%.1e" % (alpha, dP, dM))
    for alpha in (1.5, 2.0):
        sol = sol2 if alpha == 2.0 else solve_wave_at_speed(1.2181, alpha, cfg)
        g = sol.grid
        u0 = PeriodicField.from_samples(g, sol.phi.samples + 0.01 * np.cos(2.0 * g.x))
        rho, _ = evolution.orbital_drift(u0, sol, 50.0, 1e-3)
        checks["drift_alpha%g" % alpha] = rho <= 0.1
        parts.append("alpha=%g drift %.3g" % (alpha, rho))
    return _result(9, "conservation and orbital drift", checks, "; ".join(parts), t0)


def _property_checks():
    rng = np.random.default_rng(7)
    g = Grid(64)
    out = {}
    co = np.zeros(33, dtype=complex)
    co[1:21] = rng.normal(size=20) + 1j * rng.normal(size=20)
    u = PeriodicField.from_coeffs(g, co)
    parseval = abs(spectral.integrate(u * u) - 2 * np.pi * np.sum(g.weights * np.abs(u.coeffs) ** 2))
    out["parseval"] = parseval <= 1e-10 * spectral.integrate(u * u)
    a, b = 0.7, 1.1
    lhs = spectral.fractional_derivative(spectral.fractional_derivative(u, a), b).samples
    rhs = spectral.fractional_derivative(u, a + b).samples
    out["semigroup"] = float(np.max(np.abs(lhs - rhs))) <= 1e-10 * float(np.max(np.abs(rhs)))
    p = spectral.zero_mean_project(u + 3.0)
    out["projection"] = abs(p.mean()) <= 1e-14 and np.allclose(spectral.zero_mean_project(p).samples, p.samples,
                                                              rtol=0, atol=1e-14)
    # Jacobian vs central differences
    K, c, alpha = 16, 0.8, 1.3
    bvec = newton.small_amplitude_seed(c, alpha, K) + 0.01 * rng.normal(size=K) / np.arange(1, K + 1) ** 2
    J = newton.jacobian(bvec, c, alpha)
    h = 1e-6
    fd = np.column_stack([(newton.residual_F(bvec + h * e, c, alpha) - newton.residual_F(bvec - h * e, c, alpha))
                          / (2 * h) for e in np.eye(K)])
    out["jacobian_fd"] = float(np.max(np.abs(J - fd))) <= 1e-6
    # elliptic integrals against quadrature
    worst = 0.0
    for kappa in (0.1, 0.5, 0.9, 0.99):
        Kq = quad(lambda t: 1.0 / math.sqrt(1 - (kappa * math.sin(t)) ** 2), 0, math.pi / 2, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
        Eq = quad(lambda t: math.sqrt(1 - (kappa * math.sin(t)) ** 2), 0, math.pi / 2, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
        worst = max(worst, abs(elliptic.complete_elliptic_K(kappa) - Kq), abs(elliptic.complete_elliptic_E(kappa) - Eq))
    out["elliptic_quad"] = worst <= 1e-11
    # archive round trip
    sol = solve_wave_at_speed(1.2181, 2.0, SolverConfig(n_points=128))
    with tempfile.TemporaryDirectory() as tmp:
        path = tmp + "/w.json"
        io.save_solution(sol, path)
        back = io.load_solution(path)
    out["archive_roundtrip"] = (np.array_equal(back.phi.samples, sol.phi.samples)
                                and (back.c, back.w, back.A, back.alpha) == (sol.c, sol.w, sol.A, sol.alpha))
    return out


def check_10():
    t0 = time.perf_counter()
    checks = _property_checks()
    total = time.perf_counter() - (_t_start[0] or t0)
    checks["validate_runtime"] = total <= 600.0
    failed = [k for k, v in checks.items() if not v]
    return _result(10, "property suites", checks,
                   "%d checks, %s; elapsed %.0f s" % (len(checks), "all hold" if not failed else "failed: " + ", ".join(failed), total), t0)


CHECKS = {1: check_1, 2: check_2, 3: check_3, 4: check_4, 5: check_5,
          6: check_6, 7: check_7, 8: check_8, 9: check_9, 10: check_10}


def check(number):
    if _t_start[0] is None:
        _t_start[0] = time.perf_counter()
    t0 = time.perf_counter()
    try:
        return CHECKS[number]()
    except Exception as exc:  # a crash is a failed criterion, reported as such
        return Result(number, CHECKS[number].__name__, False, "%s: %s" % (type(exc).__name__, exc),
                      time.perf_counter() - t0)


def run(numbers=None, stream=sys.stdout):
    _t_start[0] = time.perf_counter()
    results = []
    for n in numbers or sorted(CHECKS):
        res = check(n)
        if stream is not None:
            print(res.line(), file=stream, flush=True)
        results.append(res)
    return results
