"""Monte-Carlo execution of the storage protocol, one record per SQUID.

Each round draws Alice's labels, sends the coherent state through a
beamsplitter channel, stores it for the scheme's measurement time and
samples Bob's homodyne outcome. Round ``i`` draws all of its randomness from
``default_rng([seed, i])`` so datasets are reproducible and rounds can be
computed in any order or in parallel.
"""

from __future__ import annotations

import csv
import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .device import EffectiveParams, prepare_state
from .errors import ConfigError
from .fock import (DEFAULT_GRID_POINTS, Quadrature, alpha_to_label, auto_dim,
                   coherent_state, homodyne_sample, kerr_evolve)

N0 = 0.5
MIN_FOLD_CENTER = 4.0
CSV_COLUMNS = ("index", "phi_A", "v_A", "t_meas", "basis", "outcome", "eve_outcome")


@dataclass(frozen=True)
class SourceConfig:
    """Alice's Gaussian label source; ``V_A`` is in units of ``N0``."""

    V_A: float = 1.0
    phi_0: float = 0.0
    v_0: float = 0.0
    n_trials: int = 1000
    n0: float = N0

    def __post_init__(self):
        if not self.V_A > 0:
            raise ConfigError(f"source.V_A must be positive, got {self.V_A!r}")
        if self.n_trials < 1:
            raise ConfigError(f"source.n_trials must be >= 1, got {self.n_trials!r}")

    @property
    def label_std(self) -> float:
        return math.sqrt(self.V_A * self.n0)


@dataclass(frozen=True)
class ChannelConfig:
    eta: float = 1.0
    excess_noise: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ConfigError(f"channel.eta must lie in (0, 1], got {self.eta!r}")
        if self.excess_noise < 0:
            raise ConfigError("channel.excess_noise must be non-negative")

    @property
    def chi(self) -> float:
        return (1.0 - self.eta) / self.eta


class SchemeKind(str, enum.Enum):
    ARBITRARY_TIME = "arbitrary-time"
    TIME_STAMPED = "time-stamped"


@dataclass(frozen=True)
class MeasurementScheme:
    kind: SchemeKind = SchemeKind.ARBITRARY_TIME
    jitter: float = 0.0
    fixed_time: float | None = None  # overrides the scheme's time draw (validation runs)

    @property
    def absolute(self) -> bool:
        return self.kind is SchemeKind.TIME_STAMPED

    def allowed_times(self, nu: float) -> tuple[float, ...]:
        return tuple(k * math.pi / (2.0 * nu) for k in range(5))

    def validate(self, eff: EffectiveParams) -> None:
        if self.jitter < 0:
            raise ConfigError("scheme.jitter must be non-negative")
        if self.kind is SchemeKind.TIME_STAMPED:
            r = eff.ratio
            if abs(r - 4.0 * round(r / 4.0)) > 1e-9 * max(1.0, abs(r)):
                raise ConfigError(f"time-stamped scheme needs Omega/nu = 0 mod 4, got {r:.6g}")

    def draw_time(self, nu: float, rng: np.random.Generator) -> tuple[float, bool]:
        """Return ``(t, nominal)``; ``nominal`` is False once jitter is applied."""
        if self.fixed_time is not None:
            return float(self.fixed_time), True
        if self.kind is SchemeKind.ARBITRARY_TIME:
            return float(rng.uniform(0.0, 2.0 * math.pi / nu)), False
        t = self.allowed_times(nu)[int(rng.integers(5))]
        if self.jitter > 0:
            return max(0.0, t + float(rng.normal(0.0, self.jitter))), False
        return t, True


@dataclass(slots=True)
class TrialRecord:
    index: int
    phi_A: float
    v_A: float
    t_meas: float
    basis: Quadrature
    outcome: float
    eve_outcome: float | None = None
    sifted_alice_value: float | None = None


@dataclass(frozen=True)
class RunOptions:
    """Numerical knobs for :func:`run_round`."""

    full_numeric: bool = False
    dim: int | None = None
    grid_points: int = DEFAULT_GRID_POINTS


def alice_sample(cfg: SourceConfig, rng: np.random.Generator) -> tuple[float, float]:
    phi, v = rng.normal((cfg.phi_0, cfg.v_0), cfg.label_std)
    return float(phi), float(v)


def channel_transmit(alpha: complex, ch: ChannelConfig, rng: np.random.Generator,
                     n0: float = N0) -> tuple[complex, complex]:
    """Beamsplitter tap: Bob gets ``sqrt(eta) alpha``, Eve ``sqrt(1 - eta) alpha``."""
    bob = math.sqrt(ch.eta) * alpha
    eve = math.sqrt(1.0 - ch.eta) * alpha
    if ch.excess_noise > 0:
        d_phi, d_v = rng.normal(0.0, math.sqrt(ch.excess_noise * n0), size=2)
        bob += complex(d_phi, d_v) / math.sqrt(2.0)
    return bob, eve


def _coherent_time_label(alpha: complex, eff: EffectiveParams, t: float) -> complex | None:
    """Label of the stored state when ``t`` is a whole multiple of ``pi/nu``."""
    k = t * eff.nu / math.pi
    if abs(k - round(k)) > 1e-12:
        return None
    k = int(round(k))
    return alpha * complex(np.exp(-1j * eff.Omega * t)) * (-1) ** k


def _quadrature_value(alpha: complex, q: Quadrature) -> float:
    phi, v = alpha_to_label(alpha)
    return phi if q is Quadrature.PHI else v


def _bob_state(phi_B: float, v_B: float, alpha_B: complex, eff: EffectiveParams,
               opts: RunOptions):
    dim = opts.dim or auto_dim(alpha_B)
    if opts.full_numeric:
        state, _ = prepare_state(phi_B, v_B, eff, dim)
        return state
    return coherent_state(alpha_B, dim)


def run_round(src: SourceConfig, ch: ChannelConfig, scheme: MeasurementScheme,
              eff: EffectiveParams, rng: np.random.Generator, *, index: int = 0,
              opts: RunOptions = RunOptions()) -> TrialRecord:
    """One protocol round: prepare, transmit, store, measure."""
    phi_A, v_A = alice_sample(src, rng)
    alpha = complex(phi_A, v_A) / math.sqrt(2.0)
    alpha_B, alpha_E = channel_transmit(alpha, ch, rng, src.n0)
    t, nominal = scheme.draw_time(eff.nu, rng)
    basis = Quadrature.PHI if rng.random() < 0.5 else Quadrature.V

    label = None if opts.full_numeric else _coherent_time_label(alpha_B, eff, t)
    if label is not None and (nominal or t == 0.0):
        outcome = _quadrature_value(label, basis) + float(rng.normal(0.0, math.sqrt(src.n0)))
    else:
        phi_B, v_B = alpha_to_label(alpha_B)
        state = kerr_evolve(_bob_state(phi_B, v_B, alpha_B, eff, opts), eff.Omega, eff.nu, t)
        outcome = homodyne_sample(state, basis, rng, opts.grid_points)
    if scheme.absolute:
        outcome = abs(outcome)

    eve = None
    if ch.eta < 1.0:
        # Eve's tap is measured at once (no storage), in the basis Bob later
        # announces.
        if opts.full_numeric:
            st = coherent_state(alpha_E, auto_dim(alpha_E))
            eve = homodyne_sample(st, basis, rng, opts.grid_points)
        else:
            eve = _quadrature_value(alpha_E, basis) + float(rng.normal(0.0, math.sqrt(src.n0)))
    return TrialRecord(index=index, phi_A=phi_A, v_A=v_A, t_meas=t, basis=basis,
                       outcome=float(outcome), eve_outcome=eve)


@dataclass(frozen=True)
class ProtocolSpec:
    src: SourceConfig
    ch: ChannelConfig
    scheme: MeasurementScheme
    eff: EffectiveParams
    seed: int
    opts: RunOptions = field(default_factory=RunOptions)

    def validate(self) -> None:
        self.scheme.validate(self.eff)
        if self.scheme.kind is SchemeKind.TIME_STAMPED:
            if min(self.src.phi_0, self.src.v_0) < MIN_FOLD_CENTER:
                raise ConfigError(
                    f"time-stamped scheme needs source centres >= {MIN_FOLD_CENTER} "
                    f"(got phi_0={self.src.phi_0}, v_0={self.src.v_0})")


def _run_chunk(spec: ProtocolSpec, start: int, stop: int) -> list[TrialRecord]:
    out = []
    for i in range(start, stop):
        rng = np.random.default_rng([spec.seed, i])
        out.append(run_round(spec.src, spec.ch, spec.scheme, spec.eff, rng,
                             index=i, opts=spec.opts))
    return out


def run_protocol(spec: ProtocolSpec, *, workers: int = 1, chunk: int = 5000) -> list[TrialRecord]:
    """Run ``spec.src.n_trials`` rounds; output order is by round index."""
    spec.validate()
    n = spec.src.n_trials
    bounds = [(s, min(s + chunk, n)) for s in range(0, n, chunk)]
    if workers <= 1 or len(bounds) == 1:
        records = []
        for s, e in bounds:
            records.extend(_run_chunk(spec, s, e))
        return records
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_run_chunk, [spec] * len(bounds), *zip(*bounds))
        return [r for part in parts for r in part]


def sift(records: Sequence[TrialRecord], *, absolute: bool = False) -> np.ndarray:
    """Keep Alice's label in Bob's announced quadrature; one pair per round.

    Returns an ``(n, 2)`` array of ``(alice_value, outcome)``. With
    ``absolute`` Alice's value is folded like Bob's outcomes.
    """
    pairs = np.empty((len(records), 2))
    for k, r in enumerate(records):
        a = r.phi_A if r.basis is Quadrature.PHI else r.v_A
        r.sifted_alice_value = a
        pairs[k, 0] = abs(a) if absolute else a
        pairs[k, 1] = r.outcome
    return pairs


def eve_pairs(records: Sequence[TrialRecord]) -> np.ndarray | None:
    """``(alice_value, eve_outcome)`` pairs, or None when nobody tapped."""
    rows = [((r.phi_A if r.basis is Quadrature.PHI else r.v_A), r.eve_outcome)
            for r in records if r.eve_outcome is not None]
    return np.asarray(rows, dtype=np.float64) if rows else None


def write_trials_csv(records: Iterable[TrialRecord], path: str | Path,
                     provenance: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if provenance:
            fh.write(f"# {provenance}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow([r.index, repr(r.phi_A), repr(r.v_A), repr(r.t_meas), r.basis.value,
                        repr(r.outcome), "" if r.eve_outcome is None else repr(r.eve_outcome)])


def read_trials_csv(path: str | Path) -> list[TrialRecord]:
    with open(path, newline="") as fh:
        lines = (ln for ln in fh if not ln.startswith("#"))
        out = []
        for row in csv.DictReader(lines):
            eve = row["eve_outcome"]
            out.append(TrialRecord(
                index=int(row["index"]), phi_A=float(row["phi_A"]), v_A=float(row["v_A"]),
                t_meas=float(row["t_meas"]), basis=Quadrature(row["basis"]),
                outcome=float(row["outcome"]), eve_outcome=float(eve) if eve else None))
        return out
