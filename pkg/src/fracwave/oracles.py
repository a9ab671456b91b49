"""Closed-form reference waves.

* ``dnoidal_profile``: exact alpha = 2 wave built from Jacobi dn.
* ``rbo_profile``: exact alpha = 1 (regularised Benjamin-Ono) wave.
* ``small_amplitude_phi``: second-order expansion off the constant state,
  any alpha.

All profiles are zero-mean solutions of

    c D^alpha phi + (c - 1) phi - phi^2 / 2 + A = 0,   A = (1/4pi) int phi^2.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import elliptic
from .spectral import PeriodicField, check_alpha, fractional_derivative

KINDS = ("dnoidal", "rbo", "small_amplitude")

SMALL_AMPLITUDE_CAP = 0.2


@dataclass(frozen=True)
class OracleProfile:
    field: PeriodicField
    alpha: float
    c: float
    A: float
    kind: str
    warning: Optional[str] = None

    @property
    def w(self):
        return math.sqrt((self.c - 1.0) ** 2 + 2.0 * self.A) / self.c

    def residual(self):
        """Sup norm of the profile equation at the oracle's own (alpha, c, A)."""
        return ode_residual(self.field, self.c, self.A, self.alpha).sup()


def ode_residual(phi, c, A, alpha):
    """``c D^alpha phi + (c-1) phi - phi^2/2 + A`` as a field."""
    dphi = fractional_derivative(phi, alpha).samples
    u = phi.samples
    return PeriodicField.from_samples(phi.grid, c * dphi + (c - 1.0) * u - 0.5 * u * u + A)


# ---------------------------------------------------------------------------
# alpha = 2
# ---------------------------------------------------------------------------

def dnoidal_samples(c, x):
    """a* (dn^2(K x / pi, kappa) - E/K) evaluated pointwise."""
    kappa = elliptic.modulus_from_speed(c)
    K = elliptic.complete_elliptic_K(kappa)
    E = elliptic.complete_elliptic_E(kappa)
    amp = 12.0 * c * K * K / math.pi ** 2
    dn = elliptic.jacobi_dn(K * np.asarray(x, dtype=float) / math.pi, kappa)
    return amp * (dn * dn - E / K)


def dnoidal_profile(c, grid):
    """Exact alpha = 2 wave.

    The field is stored through its cosine series (see
    :func:`dnoidal_cosine_coefficients`), so high modes carry no sampling
    round-off and D^2 of the profile stays clean on fine grids.  The samples
    agree with :func:`dnoidal_samples` to round-off.
    """
    c = float(c)
    if not c > 0.5:
        raise ValueError("periodic waves exist only for c > 1/2, got c = %r" % c)
    kappa = elliptic.modulus_from_speed(c)
    coeffs = np.zeros(grid.n_points // 2 + 1, dtype=complex)
    coeffs[1:-1] = 0.5 * dnoidal_cosine_coefficients(c, grid.n_points // 2 - 1)
    field = PeriodicField.from_coeffs(grid, coeffs)
    A = elliptic.integration_constant_alpha2(kappa)
    return OracleProfile(field, 2.0, c, A, "dnoidal")


def dnoidal_cosine_coefficients(c, n_modes):
    """Cosine amplitudes b_1..b_n of the dnoidal wave from the nome series.

    b_m = 24 c m q^m / (1 - q^{2m}),  q = exp(-pi K'/K).  Independent of the
    Landen evaluation of dn, so it doubles as a cross-check.
    """
    kappa = elliptic.modulus_from_speed(c)
    K = elliptic.complete_elliptic_K(kappa)
    Kp = elliptic.complete_elliptic_K(math.sqrt(1.0 - kappa * kappa))
    q = math.exp(-math.pi * Kp / K)
    m = np.arange(1, n_modes + 1, dtype=float)
    with np.errstate(under="ignore"):
        qm = q ** m
        return 24.0 * c * m * qm / (1.0 - qm * qm)


# ---------------------------------------------------------------------------
# alpha = 1
# ---------------------------------------------------------------------------

def rbo_speed_to_w(c):
    return 3.0 - 1.0 / c


def rbo_psi(w, grid):
    """Positive-form wave sinh(g)/(cosh(g) - cos x), g = arcoth(w)."""
    if not w > 1.0 + 1e-12:
        raise ValueError("the alpha = 1 wave needs w > 1, got w = %r" % w)
    g = 0.5 * math.log((w + 1.0) / (w - 1.0))
    # cosh(g) - cos(x) = 2 sinh^2(g/2) + 2 sin^2(x/2) avoids cancellation
    den = 2.0 * math.sinh(0.5 * g) ** 2 + 2.0 * np.sin(0.5 * grid.x) ** 2
    return PeriodicField.from_samples(grid, math.sinh(g) / den)


def rbo_profile(c, grid):
    c = float(c)
    w = rbo_speed_to_w(c)
    if not w > 1.0 + 1e-12:
        raise ValueError("the alpha = 1 wave needs w = 3 - 1/c > 1 (c > 1/2), got c = %r" % c)
    psi = rbo_psi(w, grid)
    field = PeriodicField.from_samples(grid, 2.0 * c * (psi.samples - 1.0))
    return OracleProfile(field, 1.0, c, 4.0 * c * c - 2.0 * c, "rbo")


# ---------------------------------------------------------------------------
# small amplitude, any alpha
# ---------------------------------------------------------------------------

def small_amplitude_speed(a, alpha, corrected=False):
    """Speed paired with amplitude ``a`` on the bifurcating branch.

    The default is the tabulated expansion ``1/2 + a^2 / (4 (4^alpha - 1))``.
    ``corrected=True`` gives ``1/2 + a^2 / (8 (2^alpha - 1))``, which is what
    matching the second-order terms of the profile equation actually yields
    (confirmed against the exact alpha = 2 branch).
    """
    y = 2.0 ** check_alpha(alpha)
    if corrected:
        return 0.5 + a * a / (8.0 * (y - 1.0))
    return 0.5 + a * a / (4.0 * (y + 1.0) * (y - 1.0))


def small_amplitude_coefficients(a, alpha):
    """(b_1, b_2) of the second-order profile a cos x + b_2 cos 2x."""
    y = 2.0 ** check_alpha(alpha)
    return a, a * a / (2.0 * (y - 1.0))


def small_amplitude_phi(a, alpha, grid, corrected=False):
    alpha = check_alpha(alpha)
    a = float(a)
    if a < 0.0:
        raise ValueError("amplitude must be non-negative, got %r" % a)
    warning = None
    if a > SMALL_AMPLITUDE_CAP:
        warning = "amplitude %.3g exceeds the expansion cap %.1f" % (a, SMALL_AMPLITUDE_CAP)
    b1, b2 = small_amplitude_coefficients(a, alpha)
    x = grid.x
    field = PeriodicField.from_samples(grid, b1 * np.cos(x) + b2 * np.cos(2.0 * x))
    c = small_amplitude_speed(a, alpha, corrected)
    return OracleProfile(field, alpha, c, 0.25 * a * a, "small_amplitude", warning)


def initial_guess_psi(a, alpha, grid):
    """Third-order positive-form starting iterate."""
    alpha = check_alpha(alpha)
    y = 2.0 ** alpha
    if y == 1.0:
        raise ValueError("initial guess undefined when 2^alpha = 1")
    x = grid.x
    s = 1.0 / (2.0 * (y - 1.0))
    u = (1.0 + a * np.cos(x) + a * a * (0.5 - s + s * np.cos(2.0 * x))
         + a ** 3 * s / (3.0 ** alpha - 1.0) * np.cos(3.0 * x))
    return PeriodicField.from_samples(grid, u)


def small_amplitude_d(alpha):
    """Leading-order d at the bifurcation point, tabulated closed form."""
    alpha = check_alpha(alpha)
    num = -16.0 ** alpha + 14.0 * 2.0 ** (2.0 * alpha - 2.0) - 3.0
    return 0.5 * num / (4.0 ** alpha - 1.0)


def small_amplitude_aprime(alpha):
    """Tabulated leading-order A'(c) at the bifurcation point."""
    y = 2.0 ** check_alpha(alpha)
    return (y + 1.0) * (y - 1.0)


def bifurcation_aprime(alpha):
    """A'(1/2+) implied by A = a^2/4 and the corrected speed expansion."""
    return 2.0 * (2.0 ** check_alpha(alpha) - 1.0)


def bifurcation_d(alpha):
    """d(1/2+) = 1/2 - A'(1/2+)/2 = 3/2 - 2^alpha."""
    return 1.5 - 2.0 ** check_alpha(alpha)
