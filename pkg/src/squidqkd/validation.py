"""Cross-checks of every closed form against truncated Fock-space numerics.

:func:`run_all` returns one :class:`Check` per oracle comparison; the CLI's
``validate`` subcommand prints them and exits non-zero if any fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from . import _kernels
from .analytic import (cat_decomposition, cat_variance, ensemble_noise, ensemble_noise_mc,
                       noise_cab, time_avg_noise, time_avg_noise_riemann, variance_closed_form,
                       Parity)
from .device import EffectiveParams, prepare_state
from .fock import (FockVector, Quadrature, auto_dim, coherent_state, homodyne_samples,
                   kerr_evolve, label_to_alpha, overlap, quadrature_moments, quadrature_pdf,
                   sampling_grid)
from .keyrate import secure_rate_background, secure_rate_background_snr


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.value:.3e} (tol {self.tolerance:.1e})"


def _check(name: str, value: float, tol: float) -> Check:
    return Check(name, bool(value <= tol), float(value), tol)


def noise_numeric(state: FockVector, label: float, q: Quadrature) -> float:
    """``<(X - x_A)^2>`` from the state's moments."""
    mean, var = quadrature_moments(state, q)
    return var + (mean - label) ** 2


def random_labels(rng: np.random.Generator, n: int, max_abs_alpha: float = 3.0):
    r = max_abs_alpha * np.sqrt(rng.random(n))
    th = rng.uniform(0.0, 2.0 * math.pi, n)
    return r * np.exp(1j * th)


def revival_error(ratio: float = 100.0, alphas=(0.5, 1.5 + 1j, 2.0 - 2.0j)) -> float:
    worst = 0.0
    for a in alphas:
        dim = auto_dim(a)
        s = coherent_state(a, dim)
        half = kerr_evolve(s, ratio, 1.0, math.pi)
        full = kerr_evolve(s, ratio, 1.0, 2.0 * math.pi)
        worst = max(worst, abs(1 - abs(overlap(coherent_state(-a, dim), half))),
                    abs(1 - abs(overlap(s, full))))
    return worst


def cat_error(pairs=((1, 2), (1, 3), (2, 3), (1, 4)), ratio: float = 100.0,
              alpha: complex = 1.2 + 0.7j) -> float:
    dim = auto_dim(alpha)
    s = coherent_state(alpha, dim)
    worst = 0.0
    for p, q in pairs:
        dec = cat_decomposition(p, q, ratio, alpha)
        direct = kerr_evolve(s, ratio, 1.0, math.pi * p / q)
        worst = max(worst, abs(1 - abs(overlap(dec.to_fock(dim), direct))))
    return worst


def variance_error(rng: np.random.Generator, n: int = 200, Omega: float = 5.0) -> float:
    worst = 0.0
    for a, t in zip(random_labels(rng, n), rng.uniform(0, 2 * math.pi, n)):
        st = kerr_evolve(coherent_state(a, auto_dim(a)), Omega, 1.0, t)
        for q in Quadrature:
            worst = max(worst, abs(variance_closed_form(a, Omega, 1.0, t, q)
                                   - quadrature_moments(st, q).variance))
    return worst


def noise_error(rng: np.random.Generator, n: int = 200, Omega: float = 5.0) -> float:
    worst = 0.0
    for a, t in zip(random_labels(rng, n), rng.uniform(0, 2 * math.pi, n)):
        st = kerr_evolve(coherent_state(a, auto_dim(a)), Omega, 1.0, t)
        phi, v = math.sqrt(2) * a.real, math.sqrt(2) * a.imag
        for q, lab in ((Quadrature.PHI, phi), (Quadrature.V, v)):
            worst = max(worst, abs(noise_cab(a, Omega, 1.0, t, q) - noise_numeric(st, lab, q)))
    return worst


def cat_variance_error(rng: np.random.Generator, n: int = 100) -> float:
    worst = 0.0
    for ratio, parity in ((6.0, Parity.EVEN), (7.0, Parity.ODD)):
        for phi, v in rng.uniform(-2, 2, size=(n, 2)):
            a = label_to_alpha(phi, v)
            for q in Quadrature:
                worst = max(worst, abs(cat_variance(phi, v, parity, q) -
                                       variance_closed_form(a, ratio, 1.0, math.pi / 2, q)))
    return worst


def ensemble_mc_error(rng: np.random.Generator, n: int = 100_000, times: int = 10) -> float:
    worst = 0.0
    for t in rng.uniform(0, 2 * math.pi, times):
        mc, _ = ensemble_noise_mc(6.0, 1.0, t, n, rng)
        worst = max(worst, abs(mc - ensemble_noise(6.0, 1.0, t)))
    return worst


def preparation_error(rng: np.random.Generator, n: int = 10) -> float:
    eff = EffectiveParams.from_rates(100.0, 1.0, 1e5)
    worst = 0.0
    for phi, v in rng.uniform(-5, 5, size=(n, 2)):
        st, _ = prepare_state(phi, v, eff)
        ref = coherent_state(label_to_alpha(phi, v), st.dim)
        worst = max(worst, abs(1 - abs(overlap(st, ref))))
    return worst


def ks_distance(state: FockVector, q: Quadrature, rng: np.random.Generator,
                n: int = 100_000) -> tuple[float, float]:
    """KS statistic and p-value of homodyne samples against the quadrature density."""
    x = sampling_grid(state, q, 8193)
    p = quadrature_pdf(state, q, x)
    cdf = np.concatenate(([0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(x))))
    cdf /= cdf[-1]
    res = stats.kstest(homodyne_samples(state, q, rng, n), lambda s: np.interp(s, x, cdf))
    return float(res.statistic), float(res.pvalue)


def rate_path_error() -> float:
    worst = 0.0
    for V in np.linspace(1.0, 20.0, 20):
        for chi in np.linspace(0.0, 3.0, 31):
            worst = max(worst, abs(secure_rate_background(V, chi)
                                   - secure_rate_background_snr(V, chi)))
    return worst


def kernel_parity_error(rng: np.random.Generator) -> float:
    amps = rng.normal(size=40) + 1j * rng.normal(size=40)
    x = np.linspace(-12, 12, 1001)
    return float(np.max(np.abs(_kernels.hermite_sum_numba(amps, x)
                               - _kernels.hermite_sum_numpy(amps, x))))


def run_all(seed: int = 0, *, quick: bool = False) -> list[Check]:
    rng = np.random.default_rng(seed)
    n = 40 if quick else 200
    checks: list[tuple[str, Callable[[], float], float]] = [
        ("Kerr revival overlap", revival_error, 1e-9),
        ("fractional-revival cat overlap", cat_error, 1e-9),
        ("variance closed form vs Fock moments", lambda: variance_error(rng, n), 1e-8),
        ("noise closed form vs Fock moments", lambda: noise_error(rng, n), 1e-8),
        ("cat variance vs general variance", lambda: cat_variance_error(rng), 1e-12),
        ("ensemble noise at t=0 minus 1/2", lambda: abs(ensemble_noise(6.0, 1.0, 0.0) - 0.5), 1e-15),
        ("ensemble noise at t=pi/nu minus 5/2",
         lambda: abs(ensemble_noise(6.0, 1.0, math.pi) - 2.5), 1e-12),
        ("ensemble noise Monte-Carlo", lambda: ensemble_mc_error(rng), 0.02),
        ("time-averaged noise minus 3/2", lambda: abs(time_avg_noise(100.0, 1.0) - 1.5), 2e-3),
        ("time average quadrature vs Riemann",
         lambda: abs(time_avg_noise(100.0, 1.0) - time_avg_noise_riemann(100.0, 1.0)), 1e-6),
        ("preparation fidelity", lambda: preparation_error(rng), 1e-8),
        ("rate via SNRs vs closed form", rate_path_error, 1e-12),
        ("Hermite kernel numba vs numpy", lambda: kernel_parity_error(rng), 1e-10),
    ]
    out = [_check(name, fn(), tol) for name, fn, tol in checks]
    st = coherent_state(label_to_alpha(1.0, -0.5), 32)
    d, _ = ks_distance(st, Quadrature.PHI, rng, 20_000 if quick else 100_000)
    out.append(_check("homodyne sampler KS distance", d, 0.01))
    return out
