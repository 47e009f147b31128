"""Noise estimation, Gaussian key rates and the key-distillation pipeline.

All variances are absolute quadrature variances with vacuum noise
``N0 = 1/2``; modulation variances ``V_A`` and total variances ``V`` are in
units of ``N0``. Rates are in bits per round.

The distillation pipeline is deliberately simple: Alice's sifted values are
cut into equiprobable bins, the Gray-coded bin index is split into binary
slices, Bob may discard rounds whose value sits close to a bin edge
(postselection), the slices are corrected with Cascade, and a Toeplitz hash
removes Eve's information and everything disclosed during correction.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import norm

from . import _kernels
from .errors import EveBelowVacuum, ReconciliationFailure, TooFewSamples

N0 = 0.5
MIN_PAIRS = 1000
PA_MARGIN = 64
CASCADE_PASSES = 4
MIN_QBER = 1e-3


# --------------------------------------------------------------------------
# Estimators
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseEstimate:
    c_ab: float
    stderr: float
    n_samples: int
    chi: float | None = None
    c_ae: float | None = None


def _as_pairs(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("pairs must have shape (n, 2)")
    return arr


def jackknife_mean(values: np.ndarray) -> tuple[float, float]:
    """Mean and delete-one jackknife standard error."""
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    total = values.sum()
    loo = (total - values) / (n - 1)
    se = math.sqrt((n - 1) / n * float(np.sum((loo - loo.mean()) ** 2)))
    return float(total / n), se


def empirical_noise(pairs, *, chi: float | None = None, eve_pairs=None) -> NoiseEstimate:
    """Mean squared Alice-Bob difference ``<(X_B - X_A)^2>``."""
    arr = _as_pairs(pairs)
    if arr.shape[0] < MIN_PAIRS:
        raise TooFewSamples(f"{arr.shape[0]} pairs; need at least {MIN_PAIRS}")
    c_ab, se = jackknife_mean((arr[:, 1] - arr[:, 0]) ** 2)
    c_ae = None
    if eve_pairs is not None:
        e = _as_pairs(eve_pairs)
        c_ae = float(np.mean((e[:, 1] - e[:, 0]) ** 2))
    return NoiseEstimate(c_ab=c_ab, stderr=se, n_samples=arr.shape[0], chi=chi, c_ae=c_ae)


def estimate_gain(pairs) -> float:
    """Least-squares gain ``g`` in ``X_B ~ g X_A``: ``sqrt(eta)`` for a lossy channel."""
    arr = _as_pairs(pairs)
    a = arr[:, 0] - arr[:, 0].mean()
    b = arr[:, 1] - arr[:, 1].mean()
    return float(np.dot(a, b) / np.dot(a, a))


def mutual_info_gaussian(signal_var: float, noise_var: float) -> float:
    """Shannon rate ``0.5 log2(1 + S/N)`` of a Gaussian channel."""
    if not noise_var > 0:
        raise ValueError("noise_var must be positive")
    if signal_var < 0:
        raise ValueError("signal_var must be non-negative")
    return 0.5 * math.log2(1.0 + signal_var / noise_var)


# --------------------------------------------------------------------------
# Secure-rate formulas
# --------------------------------------------------------------------------

def snr_bob(V: float, chi: float) -> float:
    return (V + chi) / (1.0 + chi) - 1.0


def snr_eve(V: float, chi: float) -> float:
    if chi == 0:
        return 0.0
    return (V + 1.0 / chi) / (1.0 + 1.0 / chi) - 1.0


def secure_rate_background(V: float, chi: float) -> float:
    """Coherent-state rate ``0.5 log2((V + chi)/(1 + V chi))``, ``V = V_A + 1``."""
    if V < 1 or chi < 0:
        raise ValueError("need V >= 1 and chi >= 0")
    return 0.5 * math.log2((V + chi) / (1.0 + V * chi))


def secure_rate_background_snr(V: float, chi: float) -> float:
    """Same rate assembled from Bob's and Eve's signal-to-noise ratios."""
    return 0.5 * math.log2(1.0 + snr_bob(V, chi)) - 0.5 * math.log2(1.0 + snr_eve(V, chi))


def i_ab_bound(V_A: float, chi: float, c_ab_T: float, n0: float = N0) -> float:
    return 0.5 * math.log2(((V_A + chi) * n0 + c_ab_T) / (chi * n0 + c_ab_T))


def i_ae_bound(V_A: float, chi: float, c_ae_T: float = N0, n0: float = N0) -> float:
    """Eve's information when her added noise is at least ``n0/chi``."""
    if c_ae_T < n0 * (1.0 - 1e-12):
        raise EveBelowVacuum(f"C_AE = {c_ae_T} below vacuum noise {n0}")
    return 0.5 * math.log2(((1.0 + V_A * chi) * n0 + c_ae_T * chi) / (c_ae_T * chi + n0))


def secure_rate_scheme1(V_A: float, chi: float, c_ab_T: float, c_ae_T: float = N0,
                        n0: float = N0) -> float:
    """``I(A:B) - I(A:E)`` for Bob's time-averaged noise ``c_ab_T``.

    Passing ``c_ab_T = n0`` gives the time-stamped variant.
    """
    if min(V_A, chi, c_ab_T) < 0:
        raise ValueError("arguments must be non-negative")
    return i_ab_bound(V_A, chi, c_ab_T, n0) - i_ae_bound(V_A, chi, c_ae_T, n0)


# --------------------------------------------------------------------------
# Postselected bit-level information
# --------------------------------------------------------------------------

class SliceInformation(NamedTuple):
    keep_probability: float
    entropy: float        # H(Q_A | kept), bits per kept round
    eve_information: float  # I(Q_A ; Z_E | kept), bits per kept round


def gray_code(i: np.ndarray) -> np.ndarray:
    return i ^ (i >> 1)


def _keep_probability(x: np.ndarray, edges: np.ndarray, band: float, sd_b: float) -> np.ndarray:
    if band <= 0 or edges.size == 0:
        return np.ones_like(x)
    lo = np.sort(edges) - band
    hi = np.sort(edges) + band
    # Merge overlapping exclusion bands.
    m_lo, m_hi = [lo[0]], [hi[0]]
    for a, b in zip(lo[1:], hi[1:]):
        if a <= m_hi[-1]:
            m_hi[-1] = max(m_hi[-1], b)
        else:
            m_lo.append(a)
            m_hi.append(b)
    drop = np.zeros_like(x)
    for a, b in zip(m_lo, m_hi):
        drop += norm.cdf((b - x) / sd_b) - norm.cdf((a - x) / sd_b)
    return 1.0 - drop


def slice_information(signal_var: float, bob_noise_var: float, eve_noise_var: float,
                      band: float, n_slices: int = 1) -> SliceInformation:
    """Entropy of Alice's bin index and Eve's information about it, after postselection.

    Alice's value is ``N(0, signal_var)`` cut into ``2**n_slices`` equiprobable
    bins; Bob keeps a round when his value ``X + N(0, bob_noise_var)`` lies
    farther than ``band`` from every bin edge; Eve holds ``X + N(0,
    eve_noise_var)`` and knows which rounds were kept.
    """
    sd_a = math.sqrt(signal_var)
    sd_b = math.sqrt(bob_noise_var)
    n_bins = 2 ** n_slices
    edges = norm.ppf(np.arange(1, n_bins) / n_bins) * sd_a
    # Cells never straddle a bin edge; cell masses come from the exact CDF.
    bounds = np.concatenate([[-9.0 * sd_a], edges, [9.0 * sd_a]])
    cells = np.unique(np.concatenate(
        [np.linspace(lo, hi, 4000 // n_bins + 1) for lo, hi in zip(bounds[:-1], bounds[1:])]))
    x = 0.5 * (cells[1:] + cells[:-1])
    w = np.diff(norm.cdf(cells, scale=sd_a)) * _keep_probability(x, edges, band, sd_b)
    p_keep = float(w.sum())
    w = w / p_keep
    q = np.searchsorted(edges, x)
    p_q = np.bincount(q, weights=w, minlength=n_bins)
    nz = p_q > 0
    entropy = float(-np.sum(p_q[nz] * np.log2(p_q[nz])))
    if not math.isfinite(eve_noise_var):
        return SliceInformation(p_keep, entropy, 0.0)
    sd_e = math.sqrt(eve_noise_var)
    z = np.linspace(x[0] - 9.0 * sd_e, x[-1] + 9.0 * sd_e, 3001)
    dz = z[1] - z[0]
    kern = norm.pdf((z[:, None] - x[None, :]) / sd_e) / sd_e
    joint = np.stack([kern @ np.where(q == k, w, 0.0) for k in range(n_bins)])  # p(q, z)
    marg = joint.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(joint > 0, joint / (p_q[:, None] * marg[None, :]), 1.0)
        info = float(np.sum(np.where(joint > 0, joint * np.log2(ratio), 0.0)) * dz)
    return SliceInformation(p_keep, entropy, max(info, 0.0))


# --------------------------------------------------------------------------
# Reconciliation and privacy amplification
# --------------------------------------------------------------------------

class Reconciliation(NamedTuple):
    alice_bits: np.ndarray
    bob_bits: np.ndarray
    leaked_bits: int
    kept_rounds: int
    corrections: int
    qber: tuple[float, ...]


def cascade_block_sizes(qber: float, n: int, passes: int = CASCADE_PASSES) -> np.ndarray:
    k1 = max(2, int(round(0.73 / max(qber, MIN_QBER))))
    return np.minimum(k1 * 2 ** np.arange(passes), max(n, 1)).astype(np.int64)


def quantize(values: np.ndarray, edges: np.ndarray, n_slices: int) -> np.ndarray:
    """Gray-coded bin index of each value as an ``(n_slices, n)`` bit matrix, MSB first."""
    g = gray_code(np.searchsorted(edges, values))
    shifts = np.arange(n_slices - 1, -1, -1)[:, None]
    return ((g[None, :] >> shifts) & 1).astype(np.uint8)


def slice_reconcile(pairs, n_slices: int, rng: np.random.Generator, *, band: float = 0.0,
                    passes: int = CASCADE_PASSES, sample_fraction: float = 0.05) -> Reconciliation:
    """Quantise both sides into binary slices and correct Bob's with Cascade.

    ``band`` is the postselection half-width around each bin edge in value
    units (0 keeps every round). A random ``sample_fraction`` of the kept
    rounds is disclosed to estimate the bit error rate and then dropped.
    ``leaked_bits`` counts every parity Alice reveals.
    """
    if not 1 <= n_slices <= 5:
        raise ValueError("n_slices must be in [1, 5]")
    arr = _as_pairs(pairs)
    a, b = arr[:, 0], arr[:, 1]
    n_bins = 2 ** n_slices
    edges = np.quantile(a, np.arange(1, n_bins) / n_bins)
    keep = np.ones(a.size, dtype=bool)
    if band > 0:
        keep = np.min(np.abs(b[:, None] - edges[None, :]), axis=1) > band
    idx = np.flatnonzero(keep)
    n_sample = int(round(sample_fraction * idx.size))
    sample = rng.choice(idx.size, size=n_sample, replace=False) if n_sample else np.zeros(0, int)
    mask = np.ones(idx.size, dtype=bool)
    mask[sample] = False
    a_bits = quantize(a[idx], edges, n_slices)
    b_bits = quantize(b[idx], edges, n_slices)
    n_key = int(mask.sum())

    leaked = 0
    corrections = 0
    qbers = []
    out_b = []
    for s in range(n_slices):
        sa, sb = a_bits[s], b_bits[s]
        e = float(np.mean(sa[~mask] != sb[~mask])) if n_sample else MIN_QBER
        qbers.append(e)
        ka, kb = sa[mask], sb[mask]
        perms = np.empty((passes, n_key), dtype=np.int64)
        perms[0] = np.arange(n_key)
        for p in range(1, passes):
            perms[p] = rng.permutation(n_key)
        fixed, lk, nc = _kernels.cascade(ka, kb, perms, cascade_block_sizes(e, n_key, passes))
        leaked += lk
        corrections += nc
        out_b.append(fixed)
    alice_bits = a_bits[:, mask].reshape(-1)
    bob_bits = np.concatenate(out_b) if out_b else np.zeros(0, np.uint8)
    residual = int(np.count_nonzero(alice_bits != bob_bits))
    if residual:
        raise ReconciliationFailure(
            f"{residual} bit errors left after {passes} Cascade passes (QBER {max(qbers):.3f})")
    return Reconciliation(alice_bits, bob_bits.astype(np.uint8), int(leaked), n_key,
                          int(corrections), tuple(qbers))


def final_key_length(n_rounds: int, entropy_per_round: float, i_ae: float,
                     leaked_bits: int, margin: int = PA_MARGIN) -> int:
    return int(math.floor(n_rounds * (entropy_per_round - i_ae))) - int(leaked_bits) - margin


def privacy_amplify(bits, leaked_bits: int, i_ae: float, rng: np.random.Generator, *,
                    n_rounds: int | None = None, entropy_per_round: float = 1.0,
                    margin: int = PA_MARGIN) -> np.ndarray:
    """Compress reconciled bits with a random Toeplitz matrix.

    Output length is ``floor(n_rounds (entropy_per_round - i_ae)) -
    leaked_bits - margin``; an empty array when that is not positive.
    """
    x = np.asarray(bits, dtype=np.uint8)
    n_rounds = x.size if n_rounds is None else int(n_rounds)
    m = min(final_key_length(n_rounds, entropy_per_round, i_ae, leaked_bits, margin), x.size)
    if m <= 0 or x.size == 0:
        return np.zeros(0, dtype=np.uint8)
    seq = rng.integers(0, 2, size=x.size + m - 1, dtype=np.uint8)
    return _kernels.toeplitz_hash(seq, x, m)


def monobit_ok(bits) -> bool:
    """Frequency test ``|ones/n - 1/2| < 3/sqrt(n)``."""
    x = np.asarray(bits)
    return x.size > 0 and abs(x.mean() - 0.5) < 3.0 / math.sqrt(x.size)


# --------------------------------------------------------------------------
# Pipeline
# --------------------------------------------------------------------------

@dataclass
class KeyRateReport:
    i_ab: float
    i_ae: float
    delta_i: float
    secure: bool
    reconciled_key_bits: int
    leaked_bits: int
    key_bits: int = 0
    chi: float = 0.0
    eta: float = 1.0
    c_ab: float = 0.0
    c_ab_stderr: float = 0.0
    signal_var: float = 0.0
    n_rounds: int = 0
    kept_rounds: int = 0
    i_ae_empirical: float | None = None
    i_ae_kept: float | None = None
    entropy_kept: float | None = None
    qber: tuple[float, ...] = ()

    def __post_init__(self):
        if self.secure and not self.delta_i > 0:
            raise ValueError("a secure verdict needs delta_i > 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["qber"] = list(self.qber)
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


def distill(pairs, rng: np.random.Generator, *, eta: float | None = None, n0: float = N0,
            c_ae_T: float = N0, n_slices: int = 1, postselect: float = 1.25,
            passes: int = CASCADE_PASSES, eve_pairs=None) -> tuple[KeyRateReport, np.ndarray]:
    """Estimate rates from sifted pairs and, if secure, distill a key.

    Without ``eta`` the channel gain is estimated from the data and the
    channel noise ``chi`` from the residual noise; this only makes sense for
    data taken at coherent revival times (the time-stamped scheme). Bob's
    values are rescaled by the gain before anything else. ``postselect`` is
    the discard half-width around each bin edge in units of Bob's noise
    standard deviation.
    """
    arr = _as_pairs(pairs)
    if eta is None:
        g = estimate_gain(arr)
        eta_used = min(g * g, 1.0)
    else:
        g = math.sqrt(eta)
        eta_used = eta
    scaled = np.column_stack([arr[:, 0], arr[:, 1] / g])
    noise = empirical_noise(scaled)
    if eta is None:
        chi = max(noise.c_ab / n0 - 1.0, 0.0)
    else:
        chi = (1.0 - eta) / eta
    signal = float(np.var(arr[:, 0], ddof=1))
    i_ab = mutual_info_gaussian(signal, noise.c_ab)
    i_ae = i_ae_bound(signal / n0, chi, c_ae_T, n0)
    delta = i_ab - i_ae
    secure = chi < 1.0 and delta > 0

    i_ae_emp = None
    if eve_pairs is not None and len(eve_pairs) >= MIN_PAIRS:
        ep = _as_pairs(eve_pairs)
        ge = estimate_gain(ep)
        if ge > 0:
            c_ae = float(np.mean((ep[:, 1] / ge - ep[:, 0]) ** 2))
            i_ae_emp = mutual_info_gaussian(float(np.var(ep[:, 0], ddof=1)), c_ae)

    report = KeyRateReport(i_ab=i_ab, i_ae=i_ae, delta_i=delta, secure=secure,
                           reconciled_key_bits=0, leaked_bits=0, chi=chi, eta=eta_used,
                           c_ab=noise.c_ab, c_ab_stderr=noise.stderr, signal_var=signal,
                           n_rounds=arr.shape[0], i_ae_empirical=i_ae_emp)
    if not secure:
        return report, np.zeros(0, dtype=np.uint8)

    band = postselect * math.sqrt(noise.c_ab)
    centred = scaled - np.median(arr[:, 0])
    rec = slice_reconcile(centred, n_slices, rng, band=band, passes=passes)
    eve_noise = c_ae_T + n0 / chi if chi > 0 else math.inf
    info = slice_information(signal, noise.c_ab, eve_noise, band, n_slices)
    key = privacy_amplify(rec.alice_bits, rec.leaked_bits, info.eve_information, rng,
                          n_rounds=rec.kept_rounds, entropy_per_round=info.entropy)
    report.reconciled_key_bits = int(rec.alice_bits.size)
    report.leaked_bits = rec.leaked_bits
    report.key_bits = int(key.size)
    report.kept_rounds = rec.kept_rounds
    report.i_ae_kept = info.eve_information
    report.entropy_kept = info.entropy
    report.qber = rec.qber
    return report, key
