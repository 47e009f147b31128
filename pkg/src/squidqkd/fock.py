"""Truncated Fock-space states of a single oscillator mode.

Conventions: ``Phi = (b + b^dag)/sqrt(2)`` and ``V = i(b^dag - b)/sqrt(2)``,
so the vacuum has variance 1/2 in both quadratures and a coherent state
``|alpha>`` with ``alpha = (phi + i v)/sqrt(2)`` has means ``(phi, v)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from . import _kernels
from .errors import DimensionMismatch, GridTooNarrow, TruncationTooSmall

NORM_TOL = 1e-10
TAIL_TOL = 1e-12
TAIL_WIDTH = 5
DEFAULT_GRID_POINTS = 4096
SAMPLER_SPAN = 10.0
_QUARTER_TURN = np.array([1.0, -1j, -1.0, 1j])


class Quadrature(str, enum.Enum):
    PHI = "Phi"
    V = "V"


def label_to_alpha(phi: float, v: float) -> complex:
    return complex(phi, v) / math.sqrt(2.0)


def alpha_to_label(alpha: complex) -> tuple[float, float]:
    return math.sqrt(2.0) * alpha.real, math.sqrt(2.0) * alpha.imag


def auto_dim(alpha: complex | float, extra: int = 20) -> int:
    """Truncation that keeps the Poisson tail of ``|alpha>`` below 1e-12."""
    n = abs(alpha) ** 2
    return int(math.ceil(n + 10.0 * math.sqrt(n + 1.0) + extra))


@dataclass(frozen=True, eq=False)
class FockVector:
    """Normalised, immutable amplitude vector over ``|0>, ..., |dim-1>``."""

    amps: np.ndarray

    def __post_init__(self):
        a = np.array(self.amps, dtype=np.complex128, copy=True).reshape(-1)
        if a.size == 0:
            raise ValueError("FockVector needs at least one amplitude")
        norm = float(np.vdot(a, a).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"amplitudes not normalised: sum |a_n|^2 = {norm!r}")
        a.setflags(write=False)
        object.__setattr__(self, "amps", a)

    @classmethod
    def normalized(cls, amps) -> "FockVector":
        a = np.asarray(amps, dtype=np.complex128)
        return cls(a / np.linalg.norm(a))

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    @property
    def tail_mass(self) -> float:
        """Probability in the top ``TAIL_WIDTH`` number states."""
        return float(np.sum(np.abs(self.amps[-TAIL_WIDTH:]) ** 2))

    @property
    def well_truncated(self) -> bool:
        return self.tail_mass < TAIL_TOL

    def mean_photon_number(self) -> float:
        return float(np.sum(np.arange(self.dim) * np.abs(self.amps) ** 2))


def vacuum(dim: int) -> FockVector:
    return number_state(0, dim)


def number_state(n: int, dim: int) -> FockVector:
    if not 0 <= n < dim:
        raise TruncationTooSmall(f"|{n}> does not fit in dim={dim}")
    a = np.zeros(dim, dtype=np.complex128)
    a[n] = 1.0
    return FockVector(a)


def coherent_state(alpha: complex, dim: int) -> FockVector:
    """Coherent state ``e^{-|a|^2/2} sum a^n/sqrt(n!) |n>``, renormalised."""
    alpha = complex(alpha)
    if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)):
        raise ValueError(f"non-finite amplitude {alpha!r}")
    n_bar = abs(alpha) ** 2
    if dim < n_bar + 10.0 * math.sqrt(n_bar + 1.0):
        raise TruncationTooSmall(
            f"dim={dim} too small for |alpha|^2={n_bar:.3g}; need >= {auto_dim(alpha, 0)}"
        )
    n = np.arange(dim)
    if alpha == 0:
        a = np.zeros(dim, dtype=np.complex128)
        a[0] = 1.0
        return FockVector(a)
    log_mag = -0.5 * n_bar + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    a = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    return FockVector.normalized(a)


def _annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=np.float64)), 1)


def apply_displacement(state: FockVector, lam: float) -> FockVector:
    """Apply ``exp(i lam (b + b^dag))`` on the truncated space.

    On a coherent state this maps ``|alpha>`` to ``|alpha + i lam>`` (up to a
    global phase), shifting ``<V>`` by ``sqrt(2) lam`` and leaving ``<Phi>``.
    The exponential of the truncated generator is taken numerically so that
    truncation error shows up in the tail mass.
    """
    lam = float(lam)
    if lam == 0.0:
        return state
    b = _annihilation(state.dim)
    gen = 1j * lam * (b + b.T)
    out = expm(gen) @ state.amps
    res = FockVector.normalized(out)
    if res.tail_mass > TAIL_TOL:
        raise TruncationTooSmall(
            f"displaced state leaks {res.tail_mass:.2e} into the top of dim={state.dim}"
        )
    return res


def apply_rotation(state: FockVector, theta: float) -> FockVector:
    """Phase-space rotation ``exp(-i theta b^dag b)``: ``|alpha> -> |alpha e^{-i theta}>``."""
    n = np.arange(state.dim)
    return FockVector(state.amps * np.exp(-1j * theta * n))


def kerr_evolve(state: FockVector, Omega: float, nu: float, t: float) -> FockVector:
    """Free storage evolution ``exp(-i Omega n t) exp(i nu n^2 t)`` (diagonal, exact)."""
    n = np.arange(state.dim, dtype=np.float64)
    phase = nu * t * n * n - Omega * t * n
    return FockVector(state.amps * np.exp(1j * phase))


def overlap(a: FockVector, b: FockVector) -> complex:
    if a.dim != b.dim:
        raise DimensionMismatch(f"dims differ: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amps, b.amps))


class Moments(NamedTuple):
    mean: float
    variance: float


def _ladder_expectations(state: FockVector) -> tuple[complex, complex, float]:
    a = state.amps
    n = np.arange(state.dim, dtype=np.float64)
    b1 = np.sum(np.sqrt(n[1:]) * np.conj(a[:-1]) * a[1:])
    b2 = np.sum(np.sqrt(n[1:-1] * n[2:]) * np.conj(a[:-2]) * a[2:]) if state.dim > 2 else 0.0
    nbar = float(np.sum(n * np.abs(a) ** 2))
    return complex(b1), complex(b2), nbar


def quadrature_moments(state: FockVector, q: Quadrature) -> Moments:
    """Mean and variance of ``Phi`` or ``V`` from matrix elements of ``b``, ``b^2``."""
    b1, b2, nbar = _ladder_expectations(state)
    q = Quadrature(q)
    if q is Quadrature.PHI:
        mean = math.sqrt(2.0) * b1.real
        second = b2.real + nbar + 0.5
    else:
        mean = math.sqrt(2.0) * b1.imag
        second = -b2.real + nbar + 0.5
    return Moments(mean, second - mean * mean)


def _measurement_amps(state: FockVector, q: Quadrature) -> np.ndarray:
    # The V distribution of psi equals the Phi distribution of R(pi/2) psi.
    if Quadrature(q) is Quadrature.PHI:
        return state.amps
    return state.amps * _QUARTER_TURN[np.arange(state.dim) % 4]


def quadrature_pdf(state: FockVector, q: Quadrature, grid) -> np.ndarray:
    """Homodyne density ``|sum_n a_n psi_n(x)|^2`` on ``grid``."""
    x = np.asarray(grid, dtype=np.float64)
    if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0):
        raise ValueError("grid must be a strictly increasing 1-D sequence")
    psi = _kernels.hermite_sum(_measurement_amps(state, q), x)
    p = psi.real ** 2 + psi.imag ** 2
    mass = float(np.trapezoid(p, x))
    if mass < 1.0 - 1e-4:
        raise GridTooNarrow(f"grid [{x[0]:.3g}, {x[-1]:.3g}] holds only {mass:.6f} of the density")
    return p


def sampling_grid(state: FockVector, q: Quadrature, points: int = DEFAULT_GRID_POINTS,
                  span: float = SAMPLER_SPAN) -> np.ndarray:
    """Grid of ``points`` nodes over mean +/- ``span`` standard deviations."""
    mean, var = quadrature_moments(state, q)
    sd = math.sqrt(max(var, 0.5))
    return np.linspace(mean - span * sd, mean + span * sd, points)


def _inverse_cdf_table(state: FockVector, q: Quadrature, points: int):
    # Heavy-tailed (dephased) states can leak past 10 sigma; widen and retry.
    for span in (SAMPLER_SPAN, 2 * SAMPLER_SPAN, 4 * SAMPLER_SPAN):
        x = sampling_grid(state, q, points, span)
        try:
            p = quadrature_pdf(state, q, x)
            break
        except GridTooNarrow:
            if span == 4 * SAMPLER_SPAN:
                raise
    cdf = np.concatenate(([0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(x))))
    cdf /= cdf[-1]
    return x, cdf


def homodyne_samples(state: FockVector, q: Quadrature, rng: np.random.Generator,
                     size: int, points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Draw ``size`` homodyne outcomes by inverse-CDF on an adaptive grid."""
    x, cdf = _inverse_cdf_table(state, q, points)
    return np.interp(rng.random(size), cdf, x)


def homodyne_sample(state: FockVector, q: Quadrature, rng: np.random.Generator,
                    points: int = DEFAULT_GRID_POINTS) -> float:
    return float(homodyne_samples(state, q, rng, 1, points)[0])
