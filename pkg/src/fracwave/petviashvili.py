"""Petviashvili iteration for the positive-form wave equation

    D^alpha psi + w psi - psi^2 = 0,

followed by recovery of the zero-mean wave phi and its (c, A).

The iterate is kept as Fourier coefficients; samples are only formed for the
pointwise square.  The residual is evaluated from those coefficients too:
re-transforming the samples would multiply round-off by |k|^alpha and put a
floor of ~1e-9 under RES on fine grids.
"""
import math
from dataclasses import dataclass, field as dfield, replace
from typing import Optional

import numpy as np

from .errors import (DivergenceDetected, MaxItersExceeded, SingularSpeed,
                     SpeedUnreachable, TrivialCollapse, ValidationFailed)
from .oracles import initial_guess_psi
from .spectral import Grid, PeriodicField, check_alpha, resample, shift

METHODS = ("petviashvili", "newton", "hybrid")


@dataclass(frozen=True)
class SolverConfig:
    nu: float = 2.0
    max_iters: int = 5000
    tol_error: float = 1e-13
    tol_m: float = 1e-13
    tol_res: float = 1e-10
    n_points: int = 1024
    # divergence: Error grows by more than `growth` over `window` iterations
    window: int = 50
    growth: float = 10.0

    def __post_init__(self):
        if not 1.0 < self.nu < 3.0:
            raise ValueError("nu must lie in (1, 3), got %r" % self.nu)
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive, got %r" % self.max_iters)
        for name in ("tol_error", "tol_m", "tol_res"):
            if not getattr(self, name) > 0.0:
                raise ValueError("%s must be positive" % name)
        Grid(self.n_points)

    @property
    def grid(self):
        return Grid(self.n_points)


@dataclass
class ConvergenceTrace:
    error: list = dfield(default_factory=list)
    m_defect: list = dfield(default_factory=list)
    res: list = dfield(default_factory=list)
    asymmetry: float = 0.0
    # iteration count of a trace restored from an archive summary
    archived_iters: Optional[int] = None

    def append(self, error, m_defect, res):
        self.error.append(float(error))
        self.m_defect.append(float(m_defect))
        self.res.append(float(res))

    @property
    def iters(self):
        return self.archived_iters if self.archived_iters is not None else len(self.error)

    def final(self):
        if not self.error:
            return (math.nan, math.nan, math.nan)
        return self.error[-1], self.m_defect[-1], self.res[-1]

    def summary(self):
        e, m, r = self.final()
        return {"final_error": e, "final_m_defect": m, "final_res": r, "iters": self.iters}

    def rows(self):
        """(n, Error, |1 - M|, RES) with n starting at 1."""
        return [(i + 1, e, m, r) for i, (e, m, r) in enumerate(zip(self.error, self.m_defect, self.res))]


@dataclass(frozen=True)
class WaveSolution:
    phi: PeriodicField
    psi: PeriodicField
    alpha: float
    c: float
    w: float
    A: float
    trace: Optional[ConvergenceTrace]
    method: str = "petviashvili"

    @property
    def grid(self):
        return self.phi.grid

    def residual(self):
        """Sup norm of c D^alpha phi + (c-1) phi - phi^2/2 + A."""
        from .oracles import ode_residual
        return ode_residual(self.phi, self.c, self.A, self.alpha).sup()


def _symbol(grid, alpha, w):
    return grid.k.astype(float) ** alpha + w


def iterate_psi(w, alpha, psi0, cfg=SolverConfig()):
    """Run the stabilised fixed-point iteration from ``psi0``.

    Returns ``(psi, trace)``; ``psi`` is coefficient-backed.
    """
    alpha = check_alpha(alpha)
    if not w > 0.0:
        raise ValueError("the iteration needs w > 0, got %r" % w)
    grid = psi0.grid
    sym = _symbol(grid, alpha, w)
    wt = grid.weights
    ph = np.array(psi0.coeffs)
    ph[-1] = 0.0
    if not np.any(ph):
        raise ValueError("initial iterate is identically zero")
    even = np.max(np.abs(ph.imag)) <= 1e-14 * np.max(np.abs(ph))
    trace = ConvergenceTrace()
    u = grid.inverse(ph)
    for it in range(cfg.max_iters):
        sq = grid.forward(u * u)
        sq[-1] = 0.0
        den = np.sum(wt * (sq * np.conj(ph)).real)
        num = np.sum(wt * sym * np.abs(ph) ** 2)
        M = num / den if den != 0.0 else math.inf
        res = np.max(np.abs(grid.inverse(sym * ph - sq)))
        new = M ** cfg.nu * sq / sym
        unew = grid.inverse(new)
        err = np.max(np.abs(unew - u))
        trace.append(err, abs(1.0 - M), res)
        if not (np.isfinite(err) and np.isfinite(M)):
            raise DivergenceDetected("iterate became non-finite at n = %d" % (it + 1), trace)
        if even:
            trace.asymmetry = max(trace.asymmetry, float(np.max(np.abs(new.imag))))
        ph, u = new, unew
        if err <= cfg.tol_error and abs(1.0 - M) <= cfg.tol_m and res <= cfg.tol_res:
            return PeriodicField.from_coeffs(grid, ph), trace
        if it >= cfg.window:
            past = trace.error[it - cfg.window]
            if err > cfg.growth * past and err > 1e-8:
                raise DivergenceDetected(
                    "Error grew from %.3e to %.3e over %d iterations"
                    % (past, err, cfg.window), trace)
    raise MaxItersExceeded("no convergence in %d iterations (Error %.3e, |1-M| %.3e, RES %.3e)"
                           % ((cfg.max_iters,) + trace.final()), trace)


def recover_speed(psi, w):
    """c = (1 - w + (1/pi) int psi)^{-1}."""
    den = 1.0 - w + 2.0 * psi.mean()
    if abs(den) < 1e-12:
        raise SingularSpeed("speed denominator %.3e vanishes" % den)
    return 1.0 / den


def recover_A(c, w):
    return 0.5 * (c * c * w * w - (c - 1.0) ** 2)


def phi_from_psi(psi, c, w):
    """Invert the positive-form transformation (sqrt((c-1)^2 + 2A) = c w)."""
    coeffs = 2.0 * c * np.array(psi.coeffs)
    coeffs[0] += c - 1.0 - c * w
    return PeriodicField.from_coeffs(psi.grid, coeffs)


def crest_offset(u):
    """Location y of the global maximum of ``u``, refined off-grid.

    Grid argmax followed by Newton steps on the trigonometric interpolant's
    derivative.
    """
    grid = u.grid
    j = int(np.argmax(u.samples))
    y = grid.x[j]
    k = grid.k.astype(float)
    c = np.array(u.coeffs) * grid.weights
    c[-1] = 0.0
    for _ in range(8):
        e = np.exp(1j * k * y)
        d1 = np.sum((1j * k * c * e).real)
        d2 = np.sum((-k * k * c * e).real)
        if d2 >= 0.0:
            break
        step = d1 / d2
        y -= step
        if abs(step) < 1e-15:
            break
    return y


def center(u, tol=1e-13):
    """Translate so the crest sits at x = 0; returns (field, offset)."""
    y = crest_offset(u)
    if abs(y) <= tol:
        return u, 0.0
    return shift(u, -y), y


def check_solution(sol, tol=1e-10):
    c, w, A = sol.c, sol.w, sol.A
    w_back = math.sqrt((c - 1.0) ** 2 + 2.0 * A) / c
    if abs(w_back - w) > tol * abs(w):
        raise ValidationFailed("w inconsistent with (c, A): %r vs %r" % (w_back, w))
    A_back = recover_A(c, w)
    if abs(A_back - A) > tol * max(abs(A), 1.0):
        raise ValidationFailed("A inconsistent with (c, w): %r vs %r" % (A_back, A))
    scale = max(1.0, sol.phi.sup())
    if abs(sol.phi.mean()) > tol * scale:
        raise ValidationFailed("phi has mean %.3e" % sol.phi.mean())
    return sol


def _psi_at(w, alpha, cfg, guess, collapse_tol):
    grid = cfg.grid
    if guess is None:
        guess = initial_guess_psi(0.2, alpha, grid)
    elif guess.n_points != grid.n_points:
        guess = resample(guess, grid)
    psi, trace = iterate_psi(w, alpha, guess, cfg)
    spread = float(np.ptp(psi.samples))
    if spread <= collapse_tol * max(1.0, abs(psi.mean())):
        raise TrivialCollapse("iteration settled on the constant state (spread %.2e)" % spread, trace)
    return psi, trace


def _finish(psi, trace, w, alpha):
    psi, _ = center(psi)
    c = recover_speed(psi, w)
    if c <= 0.0:
        raise SingularSpeed("w = %.6g gives 1/c = %.3e <= 0, not a physical wave"
                            % (w, 1.0 / c), trace)
    A = recover_A(c, w)
    phi = phi_from_psi(psi, c, w)
    return check_solution(WaveSolution(phi, psi, alpha, c, w, A, trace, "petviashvili"))


def solve_wave(w, alpha, cfg=SolverConfig(), guess=None, collapse_tol=1e-8):
    """Petviashvili solve at fixed w; returns a centred WaveSolution."""
    alpha = check_alpha(alpha)
    psi, trace = _psi_at(w, alpha, cfg, guess, collapse_tol)
    return _finish(psi, trace, w, alpha)


def solve_wave_at_speed(c, alpha, cfg=SolverConfig(), guess=None, w0=None,
                        tol=1e-12, max_steps=60, collapse_tol=1e-8):
    """Secant iteration over w > 1 so that the recovered speed equals ``c``.

    The secant runs on 1/c(w) = 1 - w + 2 mean(psi), which stays smooth where
    c(w) itself blows up.  Raises :class:`SpeedUnreachable` if no admissible
    w reproduces ``c``.
    """
    alpha = check_alpha(alpha)
    c = float(c)
    if not c > 0.5:
        raise ValueError("periodic waves exist only for c > 1/2, got c = %r" % c)
    target = 1.0 / c
    w_floor = 1.0 + 1e-9
    if w0 is None:
        w0 = max(3.0 - 1.0 / c, 1.05)
    w0 = max(w0, 1.0 + 1e-3)

    def run(w, g):
        try:
            psi, trace = _psi_at(w, alpha, cfg, g, collapse_tol)
        except TrivialCollapse as exc:
            raise SpeedUnreachable(
                "waves collapse to the constant state at w = %.6g before reaching "
                "c = %r" % (w, c), exc.trace)
        return psi, trace, 1.0 - w + 2.0 * psi.mean() - target

    psi0, tr0, f0 = run(w0, guess)
    w1 = w0 + (0.05 if f0 > 0.0 else -0.05) * (w0 - 1.0 + 0.1)
    psi1, tr1, f1 = run(w1, psi0)
    for _ in range(max_steps):
        if abs(f1) <= tol * target:
            return _finish(psi1, tr1, w1, alpha)
        if f1 == f0:
            break
        w2 = w1 - f1 * (w1 - w0) / (f1 - f0)
        if not np.isfinite(w2):
            break
        w2 = min(w2, w1 + 4.0 * abs(w1 - w0) + 1.0)
        if w2 <= w_floor:
            w2 = 1.0 + 0.25 * (w1 - 1.0)
            if w2 - 1.0 < 1e-8:
                break
        psi2, tr2, f2 = run(w2, psi1)
        w0, f0 = w1, f1
        w1, f1, psi1, tr1 = w2, f2, psi2, tr2
    raise SpeedUnreachable("no w > 1 reproduces c = %r (last w = %.6g, 1/c defect %.3e)"
                           % (c, w1, f1))


def spectral_tail(u):
    """Largest |coefficient| over the top eighth of the non-constant modes,
    relative to the largest one."""
    mag = np.abs(np.asarray(u.coeffs)[1:-1])
    top = mag.max() if mag.size else 0.0
    if top == 0.0:
        return 0.0
    return float(mag[-max(mag.size // 8, 1):].max() / top)


def solve_resolved(c, alpha, cfg=SolverConfig(), n_max=16384, tail_tol=1e-13, guess=None, w0=None):
    """:func:`solve_wave_at_speed`, doubling the grid until the spectral tail of
    psi is below ``tail_tol`` (or ``n_max`` is reached)."""
    while True:
        sol = solve_wave_at_speed(c, alpha, cfg, guess=guess, w0=w0)
        if spectral_tail(sol.psi) <= tail_tol or 2 * cfg.n_points > n_max:
            return sol
        cfg = replace(cfg, n_points=2 * cfg.n_points)
        guess, w0 = resample(sol.psi, cfg.grid), sol.w
