"""Uniform 2*pi-periodic grids, Fourier multipliers and quadratic functionals.

Conventions
-----------
Samples live on ``x_j = -pi + 2*pi*j/n``.  ``PeriodicField.coeffs`` holds the
continuum Fourier coefficients ``u_hat(k) = (1/2pi) * integral u e^{-ikx}``
for k = 0..n/2 (the negative modes follow from conjugate symmetry), so that
``u(x) = sum_k u_hat(k) e^{ikx}``.  With this normalisation an even field has
real coefficients and ``cos(kx)`` has ``u_hat(+-k) = 1/2``.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * np.pi


def check_alpha(alpha):
    """Validate a fractional order, 0 < alpha <= 2."""
    alpha = float(alpha)
    if not (0.0 < alpha <= 2.0):
        raise ValueError("fractional order alpha must lie in (0, 2], got %r" % alpha)
    return alpha


@dataclass(frozen=True)
class Grid:
    n_points: int

    def __post_init__(self):
        n = self.n_points
        if not isinstance(n, (int, np.integer)) or n < 4 or n & (n - 1):
            raise ValueError("n_points must be a power of two >= 4, got %r" % (n,))
        object.__setattr__(self, "n_points", int(n))

    @property
    def spacing(self):
        return TWO_PI / self.n_points

    @cached_property
    def x(self):
        return -np.pi + self.spacing * np.arange(self.n_points)

    @cached_property
    def k(self):
        """Non-negative wave numbers 0..n/2 (rfft layout)."""
        return np.arange(self.n_points // 2 + 1)

    @cached_property
    def modes(self):
        """All wave numbers -n/2..n/2-1."""
        n = self.n_points
        return np.arange(-n // 2, n // 2)

    @cached_property
    def _phase(self):
        # grid starts at -pi, so the DFT picks up (-1)^k
        return np.where(self.k % 2 == 0, 1.0, -1.0)

    @cached_property
    def weights(self):
        """Multiplicity of each rfft mode in a full two-sided sum."""
        w = np.full(self.n_points // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w

    def forward(self, samples):
        return np.fft.rfft(samples) * (self._phase / self.n_points)

    def inverse(self, coeffs):
        return np.fft.irfft(coeffs * (self._phase * self.n_points), self.n_points)

    def __repr__(self):
        return "Grid(n_points=%d)" % self.n_points


class PeriodicField:
    """Real samples of a 2*pi-periodic function together with their spectrum.

    Build with :meth:`from_samples`, :meth:`from_coeffs` or
    :meth:`from_function`.  Whichever representation was not supplied is
    computed on first access and cached; both arrays are read-only.
    """

    __slots__ = ("grid", "_samples", "_coeffs")

    def __init__(self, grid, samples=None, coeffs=None):
        if samples is None and coeffs is None:
            raise ValueError("need samples or coeffs")
        self.grid = grid
        self._samples = _frozen(samples, (grid.n_points,), float) if samples is not None else None
        self._coeffs = _frozen(coeffs, (grid.n_points // 2 + 1,), complex) if coeffs is not None else None

    @classmethod
    def from_samples(cls, grid, samples):
        return cls(grid, samples=samples)

    @classmethod
    def from_coeffs(cls, grid, coeffs):
        return cls(grid, coeffs=coeffs)

    @classmethod
    def from_function(cls, grid, func):
        return cls(grid, samples=func(grid.x))

    @classmethod
    def constant(cls, grid, value):
        return cls(grid, samples=np.full(grid.n_points, float(value)))

    @property
    def samples(self):
        if self._samples is None:
            self._samples = _frozen(self.grid.inverse(self._coeffs), None, float)
        return self._samples

    @property
    def coeffs(self):
        if self._coeffs is None:
            self._coeffs = _frozen(self.grid.forward(self._samples), None, complex)
        return self._coeffs

    @property
    def n_points(self):
        return self.grid.n_points

    def mean(self):
        return float(self.coeffs[0].real)

    def sup(self):
        return float(np.max(np.abs(self.samples)))

    def cosine_coefficients(self, K=None):
        """Cosine amplitudes b_k, k = 1..K, of ``u = mean + sum b_k cos(kx) + (sine part)``."""
        K = self.n_points // 2 - 1 if K is None else K
        return 2.0 * self.coeffs[1:K + 1].real

    # arithmetic -----------------------------------------------------------
    def _binary(self, other, op):
        if isinstance(other, PeriodicField):
            _same_grid(self, other)
            return op(self.samples, other.samples)
        return op(self.samples, other)

    def __add__(self, other):
        if isinstance(other, PeriodicField):
            _same_grid(self, other)
            if self._samples is None and other._samples is None:
                return PeriodicField(self.grid, coeffs=self.coeffs + other.coeffs)
        return PeriodicField(self.grid, samples=self._binary(other, np.add))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        if self._samples is None:
            return PeriodicField(self.grid, coeffs=-self._coeffs)
        return PeriodicField(self.grid, samples=-self._samples)

    def __mul__(self, other):
        if isinstance(other, PeriodicField):
            return product(self, other)
        if self._samples is None:
            return PeriodicField(self.grid, coeffs=self._coeffs * other)
        return PeriodicField(self.grid, samples=self._samples * other)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __repr__(self):
        return "PeriodicField(n=%d, sup=%.6g)" % (self.n_points, self.sup())


def _frozen(arr, shape, dtype):
    a = np.array(arr, dtype=dtype)
    if shape is not None and a.shape != shape:
        raise ValueError("expected shape %s, got %s" % (shape, a.shape))
    a.setflags(write=False)
    return a


def _same_grid(u, v):
    if u.grid.n_points != v.grid.n_points:
        raise ValueError("fields live on different grids (%d vs %d)" % (u.n_points, v.n_points))


def zero_nyquist(coeffs):
    coeffs = np.array(coeffs)
    coeffs[-1] = 0.0
    return coeffs


def product(u, v):
    """Pointwise product with the Nyquist mode removed."""
    _same_grid(u, v)
    grid = u.grid
    c = zero_nyquist(grid.forward(u.samples * v.samples))
    return PeriodicField(grid, coeffs=c)


def square(u):
    return product(u, u)


def multiplier(u, symbol):
    """Apply the Fourier multiplier with values ``symbol`` at k = 0..n/2."""
    return PeriodicField(u.grid, coeffs=u.coeffs * symbol)


def fractional_symbol(grid, alpha):
    return grid.k.astype(float) ** check_alpha(alpha)


def fractional_derivative(u, alpha):
    """D^alpha u, the multiplier |k|^alpha (mode 0 annihilated)."""
    return multiplier(u, fractional_symbol(u.grid, alpha))


def derivative(u, order=1):
    """Ordinary x-derivative; the Nyquist mode is dropped for odd orders."""
    sym = (1j * u.grid.k) ** order
    if order % 2:
        sym = sym.copy()
        sym[-1] = 0.0
    return multiplier(u, sym)


def zero_mean_project(u):
    c = np.array(u.coeffs)
    c[0] = 0.0
    return PeriodicField(u.grid, coeffs=c)


def integrate(u):
    """Integral over one period, 2*pi times the mean."""
    return TWO_PI * float(u.coeffs[0].real)


def inner(u, v):
    """L^2 inner product over [-pi, pi)."""
    _same_grid(u, v)
    w = u.grid.weights
    return TWO_PI * float(np.sum(w * (u.coeffs * np.conj(v.coeffs)).real))


def sobolev_norm(u, s):
    """H^s norm with weight (1 + k^2)^s."""
    w = u.grid.weights * (1.0 + u.grid.k.astype(float) ** 2) ** s
    return float(np.sqrt(TWO_PI * np.sum(w * np.abs(u.coeffs) ** 2)))


def _half_energy(u, alpha):
    # integral of (D^{alpha/2} u)^2 via Parseval
    w = u.grid.weights * u.grid.k.astype(float) ** alpha
    return TWO_PI * float(np.sum(w * np.abs(u.coeffs) ** 2))


def b_functional(u, c, alpha):
    """(1/2) * integral of c (D^{alpha/2} u)^2 + (c - 1) u^2."""
    alpha = check_alpha(alpha)
    return 0.5 * (c * _half_energy(u, alpha) + (c - 1.0) * inner(u, u))


def conserved_quantities(u, alpha):
    """Energy, momentum and mass ``(E, P, M)`` of the fBBM flow."""
    alpha = check_alpha(alpha)
    grad = _half_energy(u, alpha)
    cube = TWO_PI * float(np.mean(u.samples ** 3))
    energy = 0.5 * (grad - cube / 3.0)
    momentum = 0.5 * (grad + inner(u, u))
    mass = integrate(u)
    return energy, momentum, mass


def shift(u, y):
    """Translate: returns ``u(x - y)`` (exact Fourier interpolation)."""
    c = u.coeffs * np.exp(-1j * u.grid.k * y)
    c = np.array(c)
    # the shifted Nyquist mode is not representable as a real cosine
    c[-1] = c[-1].real * np.cos(u.grid.k[-1] * y)
    return PeriodicField(u.grid, coeffs=c)


def resample(u, grid):
    """Spectral interpolation of ``u`` onto another power-of-two grid."""
    if grid.n_points == u.n_points:
        return u
    c = np.zeros(grid.n_points // 2 + 1, dtype=complex)
    m = min(len(c), len(u.coeffs)) - 1
    c[:m] = u.coeffs[:m]
    return PeriodicField(grid, coeffs=c)
