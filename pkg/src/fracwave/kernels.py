"""Hot inner loops.

Every kernel exists twice: an explicit-loop version compiled with numba and a
vectorised numpy version.  The public names dispatch on
:data:`fracwave._accel.USE_NUMBA`; both variants stay importable so the
benchmark and the parity tests can call them side by side.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit
from .errors import EigenFailure

_EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# Jacobi dn by the descending AGM / Landen scheme
# ---------------------------------------------------------------------------

def _agm_ladder(kappa):
    """AGM sequences (a_n, c_n) used by the descending Landen recursion."""
    a = [1.0]
    c = [kappa]
    b = math.sqrt(1.0 - kappa * kappa)
    while abs(c[-1]) > _EPS or len(a) < 2:
        an, bn = 0.5 * (a[-1] + b), math.sqrt(a[-1] * b)
        c.append(0.5 * (a[-1] - b))
        a.append(an)
        b = bn
        if len(a) > 40:
            break
    return np.array(a), np.array(c)


# dn = sqrt(1 - kappa^2 sin^2 am); the cos/cos quotient form is 0/0 at u = K.
@njit
def _dn_loops(u, a, c):
    out = np.empty(u.shape[0])
    nlev = a.shape[0] - 1
    scale = 2.0 ** nlev * a[nlev]
    k2 = c[0] * c[0]
    for i in range(u.shape[0]):
        phi = scale * u[i]
        for lev in range(nlev, 0, -1):
            phi = 0.5 * (phi + math.asin(c[lev] / a[lev] * math.sin(phi)))
        s = math.sin(phi)
        out[i] = math.sqrt(1.0 - k2 * s * s)
    return out


def _dn_numpy(u, a, c):
    nlev = a.shape[0] - 1
    phi = 2.0 ** nlev * a[nlev] * u
    for lev in range(nlev, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c[lev] / a[lev] * np.sin(phi)))
    return np.sqrt(1.0 - c[0] ** 2 * np.sin(phi) ** 2)


def _dn_numba(u, a, c):
    return _dn_loops(u, a, c)


def jacobi_dn_array(u, kappa):
    """dn(u, kappa) for an array of arguments; ``0 <= kappa < 1``."""
    u = np.ascontiguousarray(u, dtype=float)
    shape = u.shape
    if kappa == 0.0:
        return np.ones(shape)
    a, c = _agm_ladder(float(kappa))
    flat = u.ravel()
    out = _dn_numba(flat, a, c) if USE_NUMBA else _dn_numpy(flat, a, c)
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# Multiplication operators in real bases
# ---------------------------------------------------------------------------

@njit
def _trig_operator_loops(symbol, acos, asin):
    K = symbol.shape[0] - 1
    n = 2 * K + 1
    m = np.zeros((n, n))
    r2 = math.sqrt(2.0)
    m[0, 0] = symbol[0] - acos[0]
    for k in range(1, K + 1):
        v = -r2 * acos[k]
        m[0, k] = v
        m[k, 0] = v
        v = -r2 * asin[k]
        m[0, K + k] = v
        m[K + k, 0] = v
    for k in range(1, K + 1):
        for j in range(1, K + 1):
            amk = acos[abs(k - j)]
            apk = acos[k + j]
            m[k, j] = -(amk + apk)
            m[K + k, K + j] = -(amk - apk)
            # <phi c_k, s_j>: s(j+k) + s(j-k), s odd in its index
            sd = 0.0
            if j > k:
                sd = asin[j - k]
            elif j < k:
                sd = -asin[k - j]
            v = -(asin[j + k] + sd)
            m[k, K + j] = v
            m[K + j, k] = v
        m[k, k] += symbol[k]
        m[K + k, K + k] += symbol[k]
    return m


def _trig_operator_numpy(symbol, acos, asin):
    K = symbol.shape[0] - 1
    n = 2 * K + 1
    m = np.zeros((n, n))
    k = np.arange(1, K + 1)
    diff = k[:, None] - k[None, :]
    summ = k[:, None] + k[None, :]
    amk = acos[np.abs(diff)]
    apk = acos[summ]
    sd = np.sign(-diff) * asin[np.abs(diff)]
    m[0, 0] = symbol[0] - acos[0]
    m[0, 1:K + 1] = m[1:K + 1, 0] = -math.sqrt(2.0) * acos[1:K + 1]
    m[0, K + 1:] = m[K + 1:, 0] = -math.sqrt(2.0) * asin[1:K + 1]
    m[1:K + 1, 1:K + 1] = -(amk + apk) + np.diag(symbol[1:])
    m[K + 1:, K + 1:] = -(amk - apk) + np.diag(symbol[1:])
    cs = -(asin[summ] + sd)
    m[1:K + 1, K + 1:] = cs
    m[K + 1:, 1:K + 1] = cs.T
    return m


def trig_operator(symbol, acos, asin):
    """Matrix of ``symbol(D) - phi`` in the orthonormal basis
    ``{1/sqrt(2pi), cos(kx)/sqrt(pi), sin(kx)/sqrt(pi)}``, k = 1..K.

    ``symbol`` holds the multiplier at k = 0..K.  ``acos[m]`` and ``asin[m]``
    (m = 0..2K) are ``(1/2pi) * integral of phi*cos(mx)`` and
    ``(1/2pi) * integral of phi*sin(mx)``.
    """
    symbol = np.ascontiguousarray(symbol, dtype=float)
    acos = np.ascontiguousarray(acos, dtype=float)
    asin = np.ascontiguousarray(asin, dtype=float)
    if USE_NUMBA:
        return _trig_operator_loops(symbol, acos, asin)
    return _trig_operator_numpy(symbol, acos, asin)


@njit
def _cosine_convolution_loops(b):
    K = b.shape[0]
    out = np.empty((K, K))
    for k in range(1, K + 1):
        for j in range(1, K + 1):
            s = 0.0
            if k + j <= K:
                s += b[k + j - 1]
            if k != j:
                s += b[abs(k - j) - 1]
            out[k - 1, j - 1] = 0.5 * s
    return out


def _cosine_convolution_numpy(b):
    K = b.shape[0]
    padded = np.concatenate(([0.0], b, np.zeros(K + 1)))
    k = np.arange(1, K + 1)
    return 0.5 * (padded[k[:, None] + k[None, :]] + padded[np.abs(k[:, None] - k[None, :])])


def cosine_convolution(b):
    """Matrix of ``f -> phi*f`` on cos(kx), k = 1..K, for phi = sum b_k cos(kx).

    Entry (k, j) is the cos(kx) coefficient of ``phi*cos(jx)``, that is
    ``(b_{k+j} + b_{|k-j|}) / 2`` with ``b_0 = 0`` and modes above K dropped.
    """
    b = np.ascontiguousarray(b, dtype=float)
    if USE_NUMBA:
        return _cosine_convolution_loops(b)
    return _cosine_convolution_numpy(b)


# ---------------------------------------------------------------------------
# Symmetric eigenvalues: Householder tridiagonalisation + implicit QL
# ---------------------------------------------------------------------------

@njit
def _tridiagonalize_loops(a):
    n = a.shape[0]
    v = np.empty(n)
    p = np.empty(n)
    for k in range(n - 2):
        m = n - k - 1
        xnorm = 0.0
        for i in range(m):
            xnorm += a[k + 1 + i, k] ** 2
        xnorm = math.sqrt(xnorm)
        if xnorm == 0.0:
            continue
        x0 = a[k + 1, k]
        alpha = -xnorm if x0 >= 0.0 else xnorm
        vnorm = 0.0
        for i in range(m):
            v[i] = a[k + 1 + i, k]
        v[0] -= alpha
        for i in range(m):
            vnorm += v[i] * v[i]
        vnorm = math.sqrt(vnorm)
        if vnorm == 0.0:
            continue
        for i in range(m):
            v[i] /= vnorm
        vp = 0.0
        for i in range(m):
            s = 0.0
            for j in range(m):
                s += a[k + 1 + i, k + 1 + j] * v[j]
            p[i] = s
            vp += v[i] * s
        for i in range(m):
            p[i] -= vp * v[i]
        for i in range(m):
            for j in range(m):
                a[k + 1 + i, k + 1 + j] -= 2.0 * (v[i] * p[j] + p[i] * v[j])
        a[k + 1, k] = alpha
        a[k, k + 1] = alpha
        for i in range(1, m):
            a[k + 1 + i, k] = 0.0
            a[k, k + 1 + i] = 0.0
    d = np.empty(n)
    e = np.zeros(n)
    for i in range(n):
        d[i] = a[i, i]
    for i in range(n - 1):
        e[i] = a[i + 1, i]
    return d, e


def _tridiagonalize_numpy(a):
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1:, k]
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0:
            continue
        alpha = -xnorm if x[0] >= 0.0 else xnorm
        v = x.copy()
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        sub = a[k + 1:, k + 1:]
        p = sub @ v
        p -= (v @ p) * v
        sub -= 2.0 * (np.outer(v, p) + np.outer(p, v))
        a[k + 1:, k] = 0.0
        a[k, k + 1:] = 0.0
        a[k + 1, k] = a[k, k + 1] = alpha
    d = np.diag(a).copy()
    e = np.zeros(n)
    e[:n - 1] = np.diag(a, -1)
    return d, e


@njit
def _tql_loops(d, e, max_sweeps):
    # e[i] couples rows i and i+1; e[n-1] is scratch.
    n = d.shape[0]
    eps = 2.220446049250313e-16
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_sweeps:
                return False
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return True


_tql_numpy = getattr(_tql_loops, "py_func", _tql_loops)


def tridiagonal_eigenvalues(d, e, max_sweeps=60):
    """Eigenvalues (ascending) of the symmetric tridiagonal matrix with
    diagonal ``d`` and off-diagonal ``e[:-1]``."""
    d = np.array(d, dtype=float)
    e = np.array(e, dtype=float)
    ok = _tql_loops(d, e, max_sweeps) if USE_NUMBA else _tql_numpy(d, e, max_sweeps)
    if not ok:
        raise EigenFailure("implicit QL did not converge within %d sweeps" % max_sweeps)
    return np.sort(d)


def tridiagonalize(a):
    """Householder reduction of a symmetric matrix; returns (diag, offdiag)."""
    a = np.array(a, dtype=float, order="C")
    if USE_NUMBA:
        return _tridiagonalize_loops(a)
    return _tridiagonalize_numpy(a)


def symmetric_eigenvalues(a, max_sweeps=60):
    """All eigenvalues of a dense real symmetric matrix, ascending."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("square matrix expected, got shape %s" % (a.shape,))
    if a.shape[0] == 1:
        return a[0].copy()
    d, e = tridiagonalize(a)
    return tridiagonal_eigenvalues(d, e, max_sweeps)
