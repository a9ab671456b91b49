"""Newton solver on the even zero-mean cosine space.

Unknowns are b_1..b_K in phi = sum b_k cos(kx); the equation is

    F_k = (c k^alpha + c - 1) b_k - [Pi_0 phi^2 / 2]_k = 0.

Products are formed on 4K points, which is enough for the cosine modes
1..K of phi^2 to come out alias-free.
"""
import math

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import MaxItersExceeded, SingularJacobian, TrivialCollapse
from .kernels import cosine_convolution
from .petviashvili import ConvergenceTrace, WaveSolution, recover_A
from .spectral import Grid, PeriodicField, check_alpha


def _check_K(K):
    if K < 1 or K & (K - 1):
        raise ValueError("truncation K must be a power of two, got %r" % K)
    return K


def diagonal(K, c, alpha):
    k = np.arange(1, K + 1, dtype=float)
    return c * k ** alpha + c - 1.0


def _phi_samples(b):
    K = b.shape[0]
    n = 4 * K
    co = np.zeros(n // 2 + 1)
    co[1:K + 1] = 0.5 * n * b
    return np.fft.irfft(co, n)


def _cosine_part(samples, K):
    n = samples.shape[0]
    return 2.0 * np.fft.rfft(samples).real[1:K + 1] / n


def residual_F(b, c, alpha):
    b = np.asarray(b, dtype=float)
    alpha = check_alpha(alpha)
    K = b.shape[0]
    if not np.any(b):
        return np.zeros(K)
    u = _phi_samples(b)
    return diagonal(K, c, alpha) * b - _cosine_part(0.5 * u * u, K)


def residual_norm(F):
    """Sup norm of sum F_k cos(kx), sampled on 4K points."""
    return float(np.max(np.abs(_phi_samples(np.asarray(F, dtype=float))))) if np.any(F) else 0.0


def jacobian(b, c, alpha):
    b = np.asarray(b, dtype=float)
    K = b.shape[0]
    return np.diag(diagonal(K, c, check_alpha(alpha))) - cosine_convolution(b)


def _factor(J):
    lu, piv = lu_factor(J, check_finite=False)
    u = np.abs(np.diag(lu))
    if not u.min() > 1e-14 * u.max():
        raise SingularJacobian("Jacobian is numerically singular (pivot ratio %.2e)"
                               % (u.min() / u.max()))
    return lu, piv


def integration_constant(b):
    """A = (1/4pi) int phi^2 = sum b_k^2 / 4."""
    return 0.25 * float(np.dot(b, b))


def to_solution(b, c, alpha, trace=None, method="newton"):
    """Wrap cosine coefficients as a WaveSolution on 4K points."""
    b = np.asarray(b, dtype=float)
    K = _check_K(b.shape[0])
    grid = Grid(4 * K)
    coeffs = np.zeros(grid.n_points // 2 + 1, dtype=complex)
    coeffs[1:K + 1] = 0.5 * b
    phi = PeriodicField.from_coeffs(grid, coeffs)
    A = integration_constant(b)
    w = math.sqrt((c - 1.0) ** 2 + 2.0 * A) / c
    pc = np.array(coeffs) / (2.0 * c)
    pc[0] = (c * w - (c - 1.0)) / (2.0 * c)
    psi = PeriodicField.from_coeffs(grid, pc)
    return WaveSolution(phi, psi, alpha, c, w, recover_A(c, w), trace, method)


def _m_defect(b, c, alpha):
    # |1 - M| for the positive form of the current iterate
    sol = to_solution(b, c, alpha)
    psi, w, grid = sol.psi, sol.w, sol.grid
    sym = grid.k.astype(float) ** alpha + w
    wt = grid.weights
    ph = psi.coeffs
    u = psi.samples
    sq = grid.forward(u * u)
    den = np.sum(wt * (sq * np.conj(ph)).real)
    if den == 0.0:
        return math.nan
    return abs(1.0 - np.sum(wt * sym * np.abs(ph) ** 2) / den)


def newton_solve(c, alpha, b0, tol=1e-11, max_iters=50, max_halvings=30, method="newton"):
    """Damped Newton from ``b0``; returns a WaveSolution (method ``newton``).

    Stops once the residual, as a function (:func:`residual_norm`), is below
    ``tol`` in sup norm.  The line search halves the step until that norm
    decreases.

    ``b0 = 0`` is a fixed point and is returned as the trivial wave.
    """
    alpha = check_alpha(alpha)
    c = float(c)
    if not c > 0.5:
        raise ValueError("periodic waves exist only for c > 1/2, got c = %r" % c)
    b = np.array(b0, dtype=float)
    _check_K(b.shape[0])
    trace = ConvergenceTrace()
    F = residual_F(b, c, alpha)
    fn = residual_norm(F)
    for it in range(max_iters + 1):
        if fn <= tol:
            trace.append(trace.error[-1] if trace.error else 0.0, _m_defect(b, c, alpha), fn)
            return to_solution(b, c, alpha, trace, method)
        if it == max_iters:
            break
        lu = _factor(jacobian(b, c, alpha))
        step = lu_solve(lu, F, check_finite=False)
        t = 1.0
        for _ in range(max_halvings + 1):
            trial = b - t * step
            Ft = residual_F(trial, c, alpha)
            ft = residual_norm(Ft)
            if ft < fn:
                break
            t *= 0.5
        else:
            raise MaxItersExceeded("line search stalled at |F| = %.3e after %d halvings"
                                   % (fn, max_halvings), trace)
        # sup-norm change of phi is bounded by the l1 norm of the step
        trace.append(t * np.sum(np.abs(step)), math.nan, fn)
        b, F, fn = trial, Ft, ft
    raise MaxItersExceeded("Newton did not reach |F| <= %.1e in %d iterations (|F| = %.3e)"
                           % (tol, max_iters, fn), trace)


def small_amplitude_seed(c, alpha, K):
    """Cosine vector of the second-order bifurcating wave at speed ``c``.

    Uses the amplitude-speed relation c = 1/2 + a^2 / (8 (2^alpha - 1)).
    """
    y = 2.0 ** check_alpha(alpha)
    a = math.sqrt(max(c - 0.5, 0.0) * 8.0 * (y - 1.0))
    b = np.zeros(K)
    b[0] = a
    if K > 1:
        b[1] = a * a / (2.0 * (y - 1.0))
    return b


def tangent(b, c, alpha):
    """d b / d c along the branch: J b_c = -(k^alpha + 1) b."""
    b = np.asarray(b, dtype=float)
    K = b.shape[0]
    k = np.arange(1, K + 1, dtype=float)
    lu = _factor(jacobian(b, c, alpha))
    return lu_solve(lu, -(k ** alpha + 1.0) * b, check_finite=False)


def aprime_exact(b, c, alpha):
    """A'(c) from the branch tangent, A = sum b^2 / 4."""
    return 0.5 * float(np.dot(b, tangent(b, c, alpha)))


def tail_ratio(b):
    """Largest coefficient among the top eighth of modes, relative to the peak."""
    b = np.abs(np.asarray(b, dtype=float))
    top = b.max() if b.size else 0.0
    if top == 0.0:
        return 0.0
    return float(b[-max(b.size // 8, 1):].max() / top)


def pad(b, K):
    out = np.zeros(K)
    m = min(K, len(b))
    out[:m] = b[:m]
    return out


def newton_resolved(c, alpha, b0, tol=1e-11, max_iters=50, K_max=4096, tail_tol=1e-13):
    """Newton solve, doubling K until the spectral tail drops below ``tail_tol``."""
    b = np.array(b0, dtype=float)
    while True:
        sol = newton_solve(c, alpha, b, tol, max_iters)
        K = b.shape[0]
        bn = sol.phi.cosine_coefficients(K)
        if tail_ratio(bn) <= tail_tol or 2 * K > K_max:
            return sol
        b = pad(bn, 2 * K)


def _predict(hist, c, alpha, K):
    if len(hist) >= 2:
        (c0, b0), (c1, b1) = hist[-2], hist[-1]
        b0, b1 = pad(b0, K), pad(b1, K)
        return b1 + (b1 - b0) * ((c - c1) / (c1 - c0))
    if len(hist) == 1 and hist[0][0] is not None:
        # near the bifurcation the branch goes like sqrt(c - 1/2): rescale
        c1, b1 = hist[0]
        s = math.sqrt(max(c - 0.5, 0.0) / max(c1 - 0.5, 1e-300))
        return pad(b1, K) * s
    return pad(hist[0][1], K)


def continuation(alpha, speeds, K, b_start=None, tol=1e-11, max_iters=50, max_refine=10,
                 K_max=None, tail_tol=1e-13):
    """Follow the branch through ``speeds`` (monotone) with a secant predictor.

    Starts from the small-amplitude seed at ``speeds[0]`` unless ``b_start``
    is given.  A failed or collapsing corrector step is retried from a halved
    substep, up to ``max_refine`` times.  With ``K_max`` set, the truncation
    doubles whenever the spectral tail exceeds ``tail_tol``.  Returns
    WaveSolutions at ``speeds``.
    """
    K_max = K if K_max is None else max(K, K_max)
    alpha = check_alpha(alpha)
    speeds = [float(s) for s in speeds]
    if not speeds:
        return []
    first = small_amplitude_seed(speeds[0], alpha, K) if b_start is None else np.array(b_start, float)
    hist = [(None, first)]
    out = []
    for target in speeds:
        c_prev = hist[-1][0]
        if c_prev is None:
            c_prev = target
        step = target - c_prev
        c = target if step == 0.0 else c_prev + step
        refine = 0
        while True:
            b = _predict(hist, c, alpha, K)
            try:
                sol = newton_resolved(c, alpha, b, tol, max_iters, K_max, tail_tol)
                K = sol.phi.n_points // 4
                bn = sol.phi.cosine_coefficients(K)
                if np.linalg.norm(bn) < 0.25 * np.linalg.norm(b[:K]):
                    raise TrivialCollapse("Newton fell onto the constant branch at c = %r" % c)
            except (MaxItersExceeded, SingularJacobian, TrivialCollapse):
                refine += 1
                if refine > max_refine or hist[-1][0] is None:
                    raise
                step *= 0.5
                c = hist[-1][0] + step
                continue
            hist = [h for h in hist if h[0] is not None][-1:] + [(c, bn)]
            if c == target:
                out.append(sol)
                break
            c = min(c + step, target) if step > 0 else max(c + step, target)
    return out


def coefficients_of(sol, K=None):
    """Cosine vector of a solution, truncated to K = n/4 modes by default."""
    K = sol.phi.n_points // 4 if K is None else K
    return sol.phi.cosine_coefficients(K)
