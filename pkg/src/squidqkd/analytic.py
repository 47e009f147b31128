"""Closed forms for Kerr storage dynamics and Alice-Bob noise.

Everything here is evaluated in complex arithmetic and checked for a
vanishing imaginary part before being returned, so a transcription slip in
a formula surfaces as :class:`~squidqkd.errors.NonRealResult` instead of a
silently wrong real number. Functions accept numpy arrays for ``t`` (and for
the labels where noted) and broadcast.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from math import gcd

import numpy as np
from scipy import integrate

from .errors import NonRealResult, NotCoprime
from .fock import FockVector, Quadrature, coherent_state

REAL_TOL = 1e-9
MIN_TIME_AVG_RATIO = 20.0


class Parity(str, enum.Enum):
    EVEN = "even"
    ODD = "odd"


def _real(z, what: str):
    z = np.asarray(z, dtype=np.complex128)
    scale = np.maximum(1.0, np.abs(z.real))
    resid = np.abs(z.imag) / scale
    if np.any(resid > REAL_TOL):
        raise NonRealResult(f"{what}: imaginary residue {float(np.max(resid)):.3e}")
    out = z.real
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class KerrPhaseContext:
    """Shorthands shared by the variance and noise closed forms."""

    alpha: complex | np.ndarray
    beta: complex | np.ndarray
    gamma: complex | np.ndarray
    xi: float
    zeta: float
    t: float | np.ndarray

    @classmethod
    def build(cls, alpha, Omega: float, nu: float, t) -> "KerrPhaseContext":
        alpha = np.asarray(alpha, dtype=np.complex128)
        t = np.asarray(t, dtype=np.float64)
        # beta = (v + i phi)/sqrt(2) when alpha = (phi + i v)/sqrt(2)
        beta = 1j * np.conj(alpha)
        return cls(alpha=alpha, beta=beta, gamma=np.exp(2j * nu * t),
                   xi=Omega - 2.0 * nu, zeta=Omega - nu, t=t)

    @property
    def n_bar(self):
        return np.abs(self.alpha) ** 2

    def terms(self):
        a, b, g, t, nb = self.alpha, self.beta, self.gamma, self.t, self.n_bar
        sq_a = a * a * np.exp(nb * (g * g - 1.0) - 2j * t * self.xi)
        sq_b = b * b * np.exp(nb * (1.0 / (g * g) - 1.0) + 2j * t * self.xi)
        fwd = np.exp(nb * (g - 1.0))
        bwd = np.exp(nb * (1.0 / g - 1.0) + 2j * t * self.zeta)
        rot = np.exp(-1j * t * self.zeta)
        return sq_a, sq_b, fwd, bwd, rot


def variance_closed_form(alpha, Omega: float, nu: float, t, q: Quadrature):
    """Quadrature variance of ``|alpha>`` after storage time ``t``."""
    if nu <= 0:
        raise ValueError("nu must be positive")
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be non-negative")
    ctx = KerrPhaseContext.build(alpha, Omega, nu, t)
    sq_a, sq_b, fwd, bwd, rot = ctx.terms()
    b, nb = ctx.beta, ctx.n_bar
    if Quadrature(q) is Quadrature.PHI:
        z = 0.5 * (1 + 2 * nb + sq_a - sq_b
                   + rot * rot * (np.conj(b) * fwd - b * bwd) ** 2)
    else:
        z = 0.5 * (1 + 2 * nb - sq_a + sq_b
                   - rot * rot * (np.conj(b) * fwd + b * bwd) ** 2)
    return _real(z, f"variance({Quadrature(q).value})")


def cat_variance(phi, v, parity: Parity, q: Quadrature):
    """Variance of the two-component cat reached at ``t = pi/(2 nu)``.

    The even and odd cases differ only by exchanging the two quadratures.
    """
    phi = np.asarray(phi, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    damp = np.exp(-2.0 * (phi * phi + v * v))
    phi_form = 0.5 + phi * phi - damp * v * v
    v_form = 0.5 + v * v - damp * phi * phi
    even_phi = Quadrature(q) is Quadrature.PHI
    if Parity(parity) is Parity.ODD:
        even_phi = not even_phi
    out = phi_form if even_phi else v_form
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CatDecomposition:
    """Fractional revival at ``t = pi p/(nu q)`` as a sum of coherent states."""

    p: int
    q: int
    m: int
    alpha: complex
    coefficients: tuple[complex, ...]
    component_phases: tuple[float, ...]

    def components(self) -> list[complex]:
        return [self.alpha * complex(np.exp(1j * ph)) for ph in self.component_phases]

    def to_fock(self, dim: int) -> FockVector:
        amps = np.zeros(dim, dtype=np.complex128)
        for c, a in zip(self.coefficients, self.components()):
            amps += c * coherent_state(a, dim).amps
        return FockVector(amps)


def component_count(p: int, q: int) -> int:
    return 2 * q if (p % 2 == 1 and q % 2 == 1) else q


def cat_decomposition(p: int, q: int, Omega_over_nu: float, alpha: complex) -> CatDecomposition:
    """Gauss-sum coefficients of the state reached at ``t = pi p/(nu q)``."""
    p, q = int(p), int(q)
    if q < 1 or p < 0:
        raise ValueError("need q >= 1 and p >= 0")
    if gcd(p, q) != 1:
        raise NotCoprime(f"gcd({p}, {q}) = {gcd(p, q)}")
    if p > q:
        raise ValueError("need p <= q")
    m = component_count(p, q)
    r = np.arange(m)
    coeffs = []
    phases = []
    for l in range(m):
        c = np.sum(np.exp(1j * np.pi * r * (p * r / q - 2.0 * l / m))) / m
        coeffs.append(complex(c))
        phases.append(-np.pi * (Omega_over_nu * p / q - 2.0 * l / m))
    return CatDecomposition(p=p, q=q, m=m, alpha=complex(alpha),
                            coefficients=tuple(coeffs), component_phases=tuple(phases))


def noise_cab(alpha, Omega: float, nu: float, t, q: Quadrature):
    """Mean squared gap between Bob's outcome and Alice's label, ``<(X_B - X_A)^2>``.

    ``alpha`` may be an array of amplitudes (broadcast against ``t``).
    """
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be non-negative")
    ctx = KerrPhaseContext.build(alpha, Omega, nu, t)
    sq_a, sq_b, fwd, bwd, rot = ctx.terms()
    a, b, nb = ctx.alpha, ctx.beta, ctx.n_bar
    if Quadrature(q) is Quadrature.PHI:
        ra = a.real
        z = 0.5 * (1 + 2 * nb + 4 * ra * ra
                   - 4 * ra * rot * (a * fwd + np.conj(a) * bwd)
                   + sq_a - sq_b)
    else:
        ia = a.imag
        z = 0.5 * (1 + 2 * nb + 4 * ia * ia
                   - 4 * ia * rot * (b * bwd + np.conj(b) * fwd)
                   - sq_a + sq_b)
    return _real(z, f"noise({Quadrature(q).value})")


def ensemble_noise(Omega: float, nu: float, t):
    """Noise averaged over Alice's zero-centred Gaussian labels of variance 1/2."""
    t = np.asarray(t, dtype=np.float64)
    num = (9.0 * np.cos(t * (nu - Omega)) - 6.0 * np.cos(t * (nu + Omega))
           + np.cos(t * (3.0 * nu + Omega)))
    out = 1.5 - num / (5.0 - 3.0 * np.cos(2.0 * nu * t)) ** 2
    return float(out) if out.ndim == 0 else out


def ensemble_noise_mc(Omega: float, nu: float, t: float, n: int, rng: np.random.Generator,
                      q: Quadrature = Quadrature.PHI) -> tuple[float, float]:
    """Monte-Carlo estimate of :func:`ensemble_noise` and its standard error."""
    labels = rng.normal(0.0, math.sqrt(0.5), size=(2, n))
    alpha = (labels[0] + 1j * labels[1]) / math.sqrt(2.0)
    vals = noise_cab(alpha, Omega, nu, t, q)
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / math.sqrt(n))


def time_avg_noise(Omega: float, nu: float, *, min_ratio: float = MIN_TIME_AVG_RATIO,
                   rtol: float = 1e-8) -> float:
    """Ensemble noise averaged over one revival period ``[0, 2 pi/nu]``."""
    if nu <= 0:
        raise ValueError("nu must be positive")
    if Omega / nu < min_ratio:
        raise ValueError(f"Omega/nu = {Omega / nu:.3g} below the required {min_ratio}")
    period = 2.0 * math.pi / nu
    # Split at the fast oscillation period so each panel is smooth.
    n_panels = max(8, int(math.ceil(abs(Omega) / nu)) * 2)
    edges = np.linspace(0.0, period, n_panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(lambda s: ensemble_noise(Omega, nu, s), lo, hi,
                                epsabs=0.0, epsrel=rtol, limit=200)
        total += val
    return total / period


def time_avg_noise_riemann(Omega: float, nu: float, n: int = 10**6) -> float:
    """Midpoint-rule version of :func:`time_avg_noise` (independent check)."""
    period = 2.0 * math.pi / nu
    t = (np.arange(n) + 0.5) * (period / n)
    return float(np.mean(ensemble_noise(Omega, nu, t)))
