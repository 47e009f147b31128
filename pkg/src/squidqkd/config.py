"""Experiment configuration files (INI syntax, one section per component).

Example::

    [device.effective]
    Omega = 10000
    nu = 100
    mu = 1e7

    [source]
    V_A = 1.0
    phi_0 = 4
    v_0 = 4
    n_trials = 100000

    [channel]
    eta = 0.8

    [scheme]
    kind = time-stamped

    [run]
    seed = 2024

A ``[device.physical]`` section with ``C``, ``L``, ``E_J``, ``phi_x`` (and
optionally ``e``) may replace ``[device.effective]``; exactly one of the two
must be present.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .device import EffectiveParams, PhysicalJunctionParams, effective_params
from .errors import ConfigError, RegimeViolation
from .protocol import (ChannelConfig, MeasurementScheme, ProtocolSpec, RunOptions,
                       SchemeKind, SourceConfig)

MAX_SEED = 2 ** 64 - 1

_KNOWN = {
    "device.effective": {"omega", "nu", "mu"},
    "device.physical": {"c", "l", "e_j", "phi_x", "e"},
    "source": {"v_a", "phi_0", "v_0", "n_trials"},
    "channel": {"eta", "excess_noise"},
    "scheme": {"kind", "jitter", "fixed_time"},
    "run": {"seed", "dim", "out", "full_numeric", "workers", "grid_points"},
    "reconcile": {"n_slices", "postselect", "passes"},
}


@dataclass(frozen=True)
class ReconcileConfig:
    n_slices: int = 1
    postselect: float = 1.25
    passes: int = 4

    def __post_init__(self):
        if not 1 <= self.n_slices <= 5:
            raise ConfigError(f"reconcile.n_slices must be in [1, 5], got {self.n_slices}")
        if self.postselect < 0:
            raise ConfigError("reconcile.postselect must be non-negative")
        if self.passes < 1:
            raise ConfigError("reconcile.passes must be >= 1")


@dataclass(frozen=True)
class ExperimentConfig:
    eff: EffectiveParams
    seed: int
    source: SourceConfig = field(default_factory=SourceConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    scheme: MeasurementScheme = field(default_factory=MeasurementScheme)
    physical: PhysicalJunctionParams | None = None
    options: RunOptions = field(default_factory=RunOptions)
    reconcile: ReconcileConfig = field(default_factory=ReconcileConfig)
    out: str = "out"
    workers: int = 1
    text: str = ""

    def __post_init__(self):
        if not 0 <= self.seed <= MAX_SEED:
            raise ConfigError(f"run.seed must be an unsigned 64-bit integer, got {self.seed}")

    @property
    def digest(self) -> str:
        """Short SHA-256 of the normalised config text."""
        return hashlib.sha256(self.text.encode()).hexdigest()[:16]

    def protocol_spec(self) -> ProtocolSpec:
        return ProtocolSpec(self.source, self.channel, self.scheme, self.eff, self.seed,
                            self.options)

    def with_overrides(self, *, seed: int | None = None, out: str | None = None,
                       full_numeric: bool | None = None,
                       n_trials: int | None = None) -> "ExperimentConfig":
        kw = {f.name: getattr(self, f.name) for f in fields(self)}
        if seed is not None:
            kw["seed"] = seed
        if out is not None:
            kw["out"] = out
        if n_trials is not None:
            kw["source"] = replace(self.source, n_trials=n_trials)
        if full_numeric:
            o = self.options
            kw["options"] = RunOptions(full_numeric=True, dim=o.dim, grid_points=o.grid_points)
        return ExperimentConfig(**kw)


def _get(cp: configparser.ConfigParser, section: str, key: str, kind, default=None):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key)
    try:
        if kind is bool:
            return cp.getboolean(section, key)
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from None


def _normalised_text(cp: configparser.ConfigParser) -> str:
    lines = []
    for sec in sorted(cp.sections()):
        lines.append(f"[{sec}]")
        lines.extend(f"{k} = {cp.get(sec, k)}" for k in sorted(cp.options(sec)))
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from None

    for sec in cp.sections():
        if sec not in _KNOWN:
            raise ConfigError(f"unknown section [{sec}]")
        extra = set(cp.options(sec)) - _KNOWN[sec]
        if extra:
            raise ConfigError(f"unknown key(s) in [{sec}]: {', '.join(sorted(extra))}")

    has_eff = cp.has_section("device.effective")
    has_phys = cp.has_section("device.physical")
    if has_eff == has_phys:
        raise ConfigError("exactly one of [device.effective] and [device.physical] is required")
    physical = None
    try:
        if has_phys:
            s = "device.physical"
            kw = {k: _get(cp, s, k.lower(), float) for k in ("C", "L", "E_J", "phi_x")}
            if None in kw.values():
                missing = [k for k, v in kw.items() if v is None]
                raise ConfigError(f"[device.physical] missing {', '.join(missing)}")
            e = _get(cp, s, "e", float)
            if e is not None:
                kw["e"] = e
            physical = PhysicalJunctionParams(**kw)
            eff = effective_params(physical)
        else:
            s = "device.effective"
            vals = {k: _get(cp, s, k.lower(), float) for k in ("Omega", "nu", "mu")}
            if None in vals.values():
                missing = [k for k, v in vals.items() if v is None]
                raise ConfigError(f"[device.effective] missing {', '.join(missing)}")
            eff = EffectiveParams.from_rates(**vals)
            eff.check_regime()
    except RegimeViolation as exc:
        raise ConfigError(f"device: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"device: {exc}") from None

    if not cp.has_option("run", "seed"):
        raise ConfigError("[run] seed is mandatory")
    seed = _get(cp, "run", "seed", int)

    src = SourceConfig(
        V_A=_get(cp, "source", "v_a", float, 1.0),
        phi_0=_get(cp, "source", "phi_0", float, 0.0),
        v_0=_get(cp, "source", "v_0", float, 0.0),
        n_trials=_get(cp, "source", "n_trials", int, 1000),
    )
    ch = ChannelConfig(eta=_get(cp, "channel", "eta", float, 1.0),
                       excess_noise=_get(cp, "channel", "excess_noise", float, 0.0))
    kind = _get(cp, "scheme", "kind", str, SchemeKind.ARBITRARY_TIME.value)
    try:
        kind = SchemeKind(kind)
    except ValueError:
        raise ConfigError(f"scheme.kind must be one of "
                          f"{[k.value for k in SchemeKind]}, got {kind!r}") from None
    scheme = MeasurementScheme(kind, jitter=_get(cp, "scheme", "jitter", float, 0.0),
                               fixed_time=_get(cp, "scheme", "fixed_time", float))
    opts = RunOptions(full_numeric=_get(cp, "run", "full_numeric", bool, False),
                      dim=_get(cp, "run", "dim", int),
                      grid_points=_get(cp, "run", "grid_points", int, 4096))
    rec = ReconcileConfig(n_slices=_get(cp, "reconcile", "n_slices", int, 1),
                          postselect=_get(cp, "reconcile", "postselect", float, 1.25),
                          passes=_get(cp, "reconcile", "passes", int, 4))
    cfg = ExperimentConfig(eff=eff, seed=seed, source=src, channel=ch, scheme=scheme,
                           physical=physical, options=opts, reconcile=rec,
                           out=_get(cp, "run", "out", str, "out"),
                           workers=_get(cp, "run", "workers", int, 1),
                           text=_normalised_text(cp))
    cfg.protocol_spec().validate()
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


DEFAULT_CONFIG = """\
[device.effective]
Omega = 10000
nu = 100
mu = 10000000

[source]
V_A = 1.0
phi_0 = 0
v_0 = 0
n_trials = 10000

[channel]
eta = 1.0

[scheme]
kind = arbitrary-time

[run]
seed = 1
"""


def default_config() -> ExperimentConfig:
    return parse_config(DEFAULT_CONFIG)
