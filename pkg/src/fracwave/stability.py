"""Spectral stability indicators along a branch of waves.

For a wave phi with speed c the linearisation is L = c D^alpha + c - 1 - phi,
L~ = L / c.  The quantities tracked per speed are

    A(c)       integration constant, (1/4pi) int phi^2
    d          1 + 2A - c - c A'(c)          (sign of d fixes n(L~) in {1, 2})
    B_c        (1/2) int c (D^{alpha/2} phi)^2 + (c - 1) phi^2
    gamma      int phi^3
    S(0)       2x2 constraint matrix on {1, (D^alpha + 1) phi}

and the verdict follows from n(L~) - n(S(0)) - z(S(0)) == 0.
"""
import concurrent.futures as cf
import math
import os
from dataclasses import dataclass, field as dfield, replace
from typing import Optional

import numpy as np

from . import newton as nt
from .errors import (DegenerateD, InconsistentSpacing, SolverError, SpeedUnreachable)
from .io import csv_text, read_csv, write_csv
from .kernels import symmetric_eigenvalues, trig_operator
from .petviashvili import SolverConfig, WaveSolution, solve_resolved
from .spectral import (TWO_PI, PeriodicField, b_functional, check_alpha, derivative,
                       fractional_symbol, inner)

TABLE_HEADER = ("c", "w", "A", "Aprime", "d", "Bc", "gamma", "detS0sign", "n_neg", "n_zero", "method")
DEGENERATE_D = 1e-8


# ---------------------------------------------------------------------------
# operator and eigen-counts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorMatrix:
    matrix: np.ndarray
    alpha: float
    c: float
    K: int
    scaling: str = "L"

    @property
    def size(self):
        return self.matrix.shape[0]


def _phi_modes(phi, M):
    """phi_hat(m), m = 0..M, zero-padded past the grid's Nyquist mode."""
    out = np.zeros(M + 1, dtype=complex)
    co = np.array(phi.coeffs)
    co[-1] = 0.0
    m = min(M + 1, co.shape[0])
    out[:m] = co[:m]
    return out


def assemble_operator(phi, c, alpha, K=128, scaling="L"):
    """Matrix of c D^alpha + c - 1 - phi (or that over c) on the orthonormal basis
    {1, cos kx, sin kx}/norm, k = 1..K."""
    alpha = check_alpha(alpha)
    if scaling not in ("L", "L_tilde"):
        raise ValueError("scaling must be 'L' or 'L_tilde'")
    k = np.arange(K + 1, dtype=float)
    symbol = c * k ** alpha + c - 1.0
    ph = _phi_modes(phi, 2 * K)
    m = trig_operator(symbol, ph.real, -ph.imag)
    if scaling == "L_tilde":
        m = m / c
    return OperatorMatrix(m, alpha, float(c), int(K), scaling)


def operator_K(phi, K_min=128, K_max=1024, tail_tol=1e-8):
    """Smallest power-of-two truncation whose neglected phi modes are below
    ``tail_tol`` relative to the largest one (capped at ``K_max``)."""
    mag = np.abs(np.asarray(phi.coeffs)[1:-1])
    top = mag.max() if mag.size else 0.0
    K = K_min
    while K < K_max:
        rest = mag[K:]
        if top == 0.0 or rest.size == 0 or rest.max() <= tail_tol * top:
            break
        K *= 2
    return K


def default_zero_tol(op):
    tol = 1e-6 * (1.0 + op.c * op.K ** op.alpha)
    return tol / op.c if op.scaling == "L_tilde" else tol


def operator_eigenvalues(op):
    """All eigenvalues; an even phi decouples the cosine and sine blocks."""
    a = op.matrix
    K = op.K
    cross = a[1:K + 1, K + 1:]
    if not np.any(cross) or np.max(np.abs(cross)) <= 1e-15 * np.max(np.abs(a)):
        ev = np.concatenate((symmetric_eigenvalues(a[:K + 1, :K + 1]),
                             symmetric_eigenvalues(a[K + 1:, K + 1:])))
        return np.sort(ev)
    return symmetric_eigenvalues(a)


def eigen_counts(op, zero_tol=None):
    """(n_neg, n_zero, six smallest eigenvalues)."""
    tol = default_zero_tol(op) if zero_tol is None else zero_tol
    ev = operator_eigenvalues(op)
    n_neg = int(np.sum(ev < -tol))
    n_zero = int(np.sum(np.abs(ev) <= tol))
    return n_neg, n_zero, ev[:6].copy()


def apply_operator(phi, u, c, alpha, scaling="L"):
    """(c D^alpha + c - 1 - phi) u pseudospectrally on the common grid."""
    sym = c * fractional_symbol(u.grid, alpha) + c - 1.0
    lin = PeriodicField.from_coeffs(u.grid, u.coeffs * sym).samples
    out = PeriodicField.from_samples(u.grid, lin - phi.samples * u.samples)
    return out / c if scaling == "L_tilde" else out


def kernel_residual(phi, c, alpha, op_norm):
    """||L~ phi'|| / (||L~|| ||phi'||) in L^2."""
    dphi = derivative(phi)
    r = apply_operator(phi, dphi, c, alpha, "L_tilde")
    nd = math.sqrt(inner(dphi, dphi))
    if nd == 0.0:
        return 0.0
    return math.sqrt(inner(r, r)) / (op_norm * nd)


# ---------------------------------------------------------------------------
# indicators
# ---------------------------------------------------------------------------

def gamma_of(phi):
    """int phi^3 over one period."""
    u = phi.samples
    return TWO_PI * float(np.mean(u * u * u))


def d_value(c, A, a_prime):
    return 1.0 + 2.0 * A - c - c * a_prime


def _central(rows, attr):
    lo, mid, hi = rows
    h1, h2 = mid.c - lo.c, hi.c - mid.c
    if not (h1 > 0.0 and h2 > 0.0) or abs(h1 - h2) > 1e-9 * max(h1, h2):
        raise InconsistentSpacing("stencil speeds %r, %r, %r are not equally spaced"
                                  % (lo.c, mid.c, hi.c))
    if len({r.method for r in rows}) != 1:
        raise InconsistentSpacing("stencil rows mix methods %s" % sorted({r.method for r in rows}))
    return (getattr(hi, attr) - getattr(lo, attr)) / (hi.c - lo.c)


def indicator_d(rows):
    """d at the middle of three equally spaced rows, A' by central difference."""
    mid = rows[1]
    return d_value(mid.c, mid.A, _central(rows, "A"))


def det_s0(d, a_prime, b_c, c):
    """Tabulated closed form (4 pi^2 / (c d)) (A' + B_c / pi)."""
    if abs(d) < DEGENERATE_D:
        raise DegenerateD("d = %.3e: fold point, S(0) is singular" % d)
    return 4.0 * math.pi ** 2 / (c * d) * (a_prime + b_c / math.pi)


def gamma_prime_identity(c, A, gamma):
    """gamma'(c) = 3 (8 pi A + gamma) / c.

    Differentiating int phi^3 along the branch with the profile equation
    gives the plus sign; :func:`gamma_prime_identity_tabulated` keeps the
    tabulated minus sign for comparison.
    """
    return 3.0 * (8.0 * math.pi * A + gamma) / c


def gamma_prime_identity_tabulated(c, A, gamma):
    return 3.0 * (8.0 * math.pi * A - gamma) / c


def gamma_prime_crosscheck(phi, c, A, rows):
    """(central-difference gamma', identity gamma') at the middle row."""
    return _central(rows, "gamma"), gamma_prime_identity(c, A, gamma_of(phi))


def s0_matrix(c, d, A, a_prime, gamma):
    """Closed-form S(0), entries <L~^{-1} f_i, f_j>, f = (1, (D^alpha + 1) phi)."""
    if abs(d) < DEGENERATE_D:
        raise DegenerateD("d = %.3e: fold point, S(0) is singular" % d)
    gp = gamma_prime_identity(c, A, gamma)
    s11 = -TWO_PI * c / d
    s12 = TWO_PI * c * a_prime / d
    s22 = -TWO_PI * a_prime - gp / 6.0 - TWO_PI * c * a_prime ** 2 / d
    return np.array([[s11, s12], [s12, s22]])


def det_s0_closed(c, d, A, a_prime, b_c):
    """det S(0) = (4 pi^2 / d) (c A' + 2A + B_c / pi)."""
    if abs(d) < DEGENERATE_D:
        raise DegenerateD("d = %.3e: fold point, S(0) is singular" % d)
    return 4.0 * math.pi ** 2 / d * (c * a_prime + 2.0 * A + b_c / math.pi)


def s0_by_inversion(phi, c, alpha, K=None):
    """S(0) by solving L~ u = f on the even (cosine) subspace."""
    alpha = check_alpha(alpha)
    K = phi.n_points // 4 if K is None else K
    op = assemble_operator(phi, c, alpha, K, "L_tilde")
    block = op.matrix[:K + 1, :K + 1]
    # orthonormal cosine coordinates of 1 and (D^alpha + 1) phi
    k = np.arange(K + 1, dtype=float)
    ph = _phi_modes(phi, K).real
    f1 = np.zeros(K + 1)
    f1[0] = math.sqrt(TWO_PI)
    f2 = np.empty(K + 1)
    f2[0] = math.sqrt(TWO_PI) * ph[0]
    f2[1:] = 2.0 * math.sqrt(math.pi) * ph[1:]
    f2 *= k ** alpha + 1.0
    F = np.column_stack((f1, f2))
    U = np.linalg.solve(block, F)
    S = U.T @ F
    return 0.5 * (S + S.T)


def verdict_from(n_neg, n_zero, d, s0):
    if abs(d) < DEGENERATE_D or n_zero != 1 or s0 is None:
        return "degenerate"
    ev = np.linalg.eigvalsh(s0)
    scale = max(np.max(np.abs(ev)), 1e-300)
    z0 = int(np.sum(np.abs(ev) <= 1e-12 * scale))
    n0 = int(np.sum(ev < -1e-12 * scale))
    return "stable" if n_neg - n0 - z0 == 0 else "unstable"


@dataclass
class StabilityReport:
    n_neg: int
    n_zero: int
    d: float
    a_prime: float
    b_c: float
    gamma: float
    det_s0: float
    verdict: str
    eigen_tail: np.ndarray
    det_s0_corrected: float = math.nan
    s0: Optional[np.ndarray] = None
    kernel_residual: float = math.nan
    op_norm: float = math.nan
    zero_tol: float = math.nan
    K_op: int = 0


def report(sol, a_prime, K_op=None, zero_tol=None):
    """Stability report for one wave given A'(c); K_op defaults to
    :func:`operator_K`."""
    phi, c, alpha, A = sol.phi, sol.c, sol.alpha, sol.A
    K_op = operator_K(phi) if K_op is None else K_op
    op = assemble_operator(phi, c, alpha, K_op, "L_tilde")
    tol = default_zero_tol(op) if zero_tol is None else zero_tol
    ev = operator_eigenvalues(op)
    n_neg = int(np.sum(ev < -tol))
    n_zero = int(np.sum(np.abs(ev) <= tol))
    op_norm = float(np.max(np.abs(ev)))
    d = d_value(c, A, a_prime)
    b_c = b_functional(phi, c, alpha)
    gamma = gamma_of(phi)
    try:
        det_pub = det_s0(d, a_prime, b_c, c)
        s0 = s0_matrix(c, d, A, a_prime, gamma)
        det_cor = det_s0_closed(c, d, A, a_prime, b_c)
    except DegenerateD:
        det_pub, s0, det_cor = 0.0, None, 0.0
    return StabilityReport(n_neg, n_zero, d, a_prime, b_c, gamma, det_pub,
                           verdict_from(n_neg, n_zero, d, s0), ev[:6].copy(), det_cor, s0,
                           kernel_residual(phi, c, alpha, op_norm), op_norm, tol, K_op)


# ---------------------------------------------------------------------------
# branch solvers used by the sweep
# ---------------------------------------------------------------------------

class PetviashviliBranch:
    method = "petviashvili"

    def __init__(self, alpha, cfg, n_max=16384):
        self.alpha = check_alpha(alpha)
        self.cfg = cfg
        self.n_max = max(n_max, cfg.n_points)

    def solve(self, c, near=None):
        if near is None:
            return solve_resolved(c, self.alpha, self.cfg, self.n_max)
        # neighbours are solved on the grid of the solution they perturb
        cfg = replace(self.cfg, n_points=near.phi.n_points)
        return solve_resolved(c, self.alpha, cfg, self.n_max, guess=near.psi, w0=near.w)


class NewtonBranch:
    method = "newton"

    def __init__(self, alpha, K=128, K_max=4096, tol=1e-11, tail_tol=1e-13):
        self.alpha = check_alpha(alpha)
        self.K, self.K_max, self.tol, self.tail_tol = K, K_max, tol, tail_tol

    def solve(self, c, near=None):
        if near is None:
            # walk in from the bifurcation point
            speeds = [0.5 + 1e-3, c] if c > 0.5 + 1e-3 else [c]
            return nt.continuation(self.alpha, speeds, self.K, K_max=self.K_max,
                                   tol=self.tol, tail_tol=self.tail_tol)[-1]
        K = near.phi.n_points // 4
        b = near.phi.cosine_coefficients(K)
        # first-order predictor along the branch tangent
        try:
            b = b + (c - near.c) * nt.tangent(b, near.c, self.alpha)
        except SolverError:
            pass
        return nt.newton_resolved(c, self.alpha, b, self.tol, 50, self.K_max, self.tail_tol)


def branch_for(method, alpha, cfg, newton_K=128, K_max=4096, n_max=16384):
    if method == "petviashvili":
        return PetviashviliBranch(alpha, cfg, n_max)
    return NewtonBranch(alpha, newton_K, K_max)


def aprime_stencil(branch, sol, h, richardson=False):
    """Central-difference A'(c) from neighbour solves at c -+ h (and c -+ h/2)."""
    c = sol.c

    def D(step):
        lo = branch.solve(c - step, sol)
        hi = branch.solve(c + step, sol)
        return (hi.A - lo.A) / (hi.c - lo.c), lo, hi

    d1, lo, hi = D(h)
    if not richardson:
        return d1, (lo, hi)
    d2, _, _ = D(0.5 * h)
    return (4.0 * d2 - d1) / 3.0, (lo, hi)


# ---------------------------------------------------------------------------
# table
# ---------------------------------------------------------------------------

@dataclass
class Row:
    c: float
    w: float = math.nan
    A: float = math.nan
    Aprime: float = math.nan
    d: float = math.nan
    Bc: float = math.nan
    gamma: float = math.nan
    detS0sign: int = 0
    n_neg: int = -1
    n_zero: int = -1
    method: str = "failed"
    error: Optional[str] = None
    verdict: Optional[str] = None
    solution: Optional[WaveSolution] = dfield(default=None, repr=False)
    report: Optional[StabilityReport] = dfield(default=None, repr=False)
    extras: dict = dfield(default_factory=dict, repr=False)

    @property
    def ok(self):
        return self.error is None and self.solution is not None

    def values(self):
        return [getattr(self, name) for name in TABLE_HEADER]


@dataclass
class ContinuationTable:
    alpha: float
    rows: list = dfield(default_factory=list)
    settings: dict = dfield(default_factory=dict)

    def column(self, name, only_ok=True):
        return np.array([getattr(r, name) for r in self.rows if r.ok or not only_ok])

    def ok_rows(self):
        return [r for r in self.rows if r.ok]

    def to_csv(self, path=None):
        text = csv_text(TABLE_HEADER, [r.values() for r in self.rows])
        if path is not None:
            write_csv(path, TABLE_HEADER, [r.values() for r in self.rows])
        return text

    @classmethod
    def from_csv(cls, path, alpha=math.nan):
        header, cells = read_csv(path)
        if tuple(header) != TABLE_HEADER:
            raise ValueError("unexpected table header %r" % (header,))
        rows = []
        for vals in cells:
            kw = dict(zip(header, vals))
            for key in ("detS0sign", "n_neg", "n_zero"):
                kw[key] = int(kw[key])
            kw["method"] = str(kw["method"])
            rows.append(Row(**kw))
        return cls(alpha, rows)


def _jobs(jobs=None):
    env = os.environ.get("FRACWAVE_JOBS")
    if env:
        return max(1, int(env))
    if jobs:
        return max(1, int(jobs))
    return os.cpu_count() or 1


def _pv_job(args):
    c, alpha, cfg, n_max = args
    try:
        return solve_resolved(c, alpha, cfg, n_max), None
    except (SolverError, ValueError) as exc:
        return None, "%s: %s" % (type(exc).__name__, exc)


def map_jobs(func, items, jobs=None):
    """Order-preserving map over a process pool (serial when jobs == 1)."""
    n = _jobs(jobs)
    items = list(items)
    if n <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    with cf.ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))


def _fill_row(row, branch, h, K_op, richardson_below=0.1):
    sol = row.solution
    a_prime, (lo, hi) = aprime_stencil(branch, sol, h)
    d = d_value(sol.c, sol.A, a_prime)
    if abs(d) < richardson_below:
        a_prime, (lo, hi) = aprime_stencil(branch, sol, h, richardson=True)
    rep = report(sol, a_prime, K_op)
    row.extras["K_op"] = rep.K_op
    row.w, row.A, row.Aprime, row.d = sol.w, sol.A, a_prime, rep.d
    row.Bc, row.gamma = rep.b_c, rep.gamma
    row.detS0sign = int(np.sign(rep.det_s0))
    row.n_neg, row.n_zero = rep.n_neg, rep.n_zero
    row.verdict = rep.verdict
    row.report = rep
    row.extras.update(gamma_fd=(gamma_of(hi.phi) - gamma_of(lo.phi)) / (hi.c - lo.c),
                      gamma_identity=gamma_prime_identity(sol.c, sol.A, rep.gamma),
                      residual=sol.residual(), kernel_residual=rep.kernel_residual,
                      det_s0_corrected=rep.det_s0_corrected)
    return row


def sweep(alpha, c_range, steps, cfg=SolverConfig(), h=1e-3, K_op=None, jobs=None,
          newton_K=128, K_max=4096, n_max=16384, newton_start=None):
    """Tabulate the branch over ``steps`` equally spaced speeds.

    Phase 1 tries Petviashvili at every speed (in parallel).  Phase 2 runs
    Newton continuation from the small-amplitude end through the speeds that
    failed.  Phase 3 (serial) computes the indicator columns from local
    stencils at c -+ h.
    """
    alpha = check_alpha(alpha)
    lo, hi = map(float, c_range)
    if not 0.5 < lo <= hi:
        raise ValueError("sweep range must lie in (1/2, inf), got %r" % (c_range,))
    speeds = np.linspace(lo, hi, steps) if steps > 1 else np.array([lo])
    table = ContinuationTable(alpha, [Row(float(c)) for c in speeds],
                              dict(h=h, K_op=K_op, n_points=cfg.n_points, newton_K=newton_K,
                                   K_max=K_max, n_max=n_max))
    for row, (sol, err) in zip(table.rows, map_jobs(_pv_job, [(r.c, alpha, cfg, n_max) for r in table.rows], jobs)):
        if sol is not None:
            row.solution, row.method = sol, "petviashvili"
        else:
            row.extras["petviashvili_error"] = err
            row.error = err

    failed = [r for r in table.rows if r.solution is None]
    if failed:
        start = newton_start if newton_start is not None else min(0.5 + 1e-3, failed[0].c)
        targets = ([start] if start < failed[0].c else []) + [r.c for r in failed]
        try:
            sols = nt.continuation(alpha, targets, newton_K, K_max=K_max)
            sols = sols[len(targets) - len(failed):]
            for r, s in zip(failed, sols):
                r.solution, r.method, r.error = s, "newton", None
        except SolverError:
            # walk row by row so that one bad speed does not sink the rest
            prev = None
            for r in failed:
                try:
                    s = NewtonBranch(alpha, newton_K, K_max).solve(r.c, prev)
                    r.solution, r.method, r.error, prev = s, "newton", None, s
                except SolverError as exc:
                    r.error = "%s: %s" % (type(exc).__name__, exc)

    for row in table.rows:
        if row.solution is None:
            continue
        try:
            _fill_row(row, branch_for(row.method, alpha, cfg, newton_K, K_max, n_max), h, K_op)
        except (SolverError, ValueError) as exc:
            row.error = "%s: %s" % (type(exc).__name__, exc)
    return table


def critical_speed(table, cfg=None, tol_d=1e-6, max_steps=60):
    """Refine the first sign change of d in ``table`` by bisection.

    Returns None when d keeps one sign over the successfully solved rows.
    """
    rows = [r for r in table.ok_rows() if np.isfinite(r.d)]
    bracket = None
    for a, b in zip(rows, rows[1:]):
        if a.d == 0.0:
            return a.c
        if np.sign(a.d) != np.sign(b.d):
            bracket = (a, b)
            break
    if bracket is None:
        return None
    s = table.settings
    cfg = cfg or SolverConfig(n_points=s.get("n_points", 1024))
    h = s.get("h", 1e-3)

    def make(method):
        return branch_for(method, table.alpha, cfg, s.get("newton_K", 128),
                          s.get("K_max", 4096), s.get("n_max", 16384))

    a, b = bracket
    ca, cb, da = a.c, b.c, a.d
    near_a, near_b = a, b
    best_c, best_d = (a.c, a.d) if abs(a.d) < abs(b.d) else (b.c, b.d)
    for _ in range(max_steps):
        if abs(best_d) <= tol_d or cb - ca < 1e-12:
            break
        # secant (regula falsi) guess, kept inside the middle of the bracket
        t = da / (da - near_b.d)
        t = min(max(t, 0.1), 0.9)
        cm = ca + t * (cb - ca)
        src = near_a if abs(cm - near_a.c) <= abs(cm - near_b.c) else near_b
        branch = make(src.method)
        try:
            sol = branch.solve(cm, src.solution)
        except SpeedUnreachable:
            branch = make("newton")
            sol = branch.solve(cm, src.solution)
        row = Row(cm, solution=sol, method=branch.method)
        ap, _ = aprime_stencil(branch, sol, h, richardson=True)
        row.A, row.Aprime, row.d = sol.A, ap, d_value(cm, sol.A, ap)
        if abs(row.d) < abs(best_d):
            best_c, best_d = cm, row.d
        if np.sign(row.d) == np.sign(da):
            ca, da, near_a = cm, row.d, row
        else:
            cb, near_b = cm, row
    return best_c
