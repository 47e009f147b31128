"""Junction parameters, effective Hamiltonian rates and state preparation.

Natural units throughout (hbar = k_B = c = 1). The elementary charge default
is the Heaviside-Lorentz value ``sqrt(4 pi / 137.036)``; any positive value is
accepted.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import RegimeViolation
from .fock import (FockVector, apply_displacement, apply_rotation, auto_dim,
                   kerr_evolve, label_to_alpha, vacuum)

ELEMENTARY_CHARGE = math.sqrt(4.0 * math.pi / 137.035999)
MIN_DRIVE_RATIO = 100.0   # mu / Omega while the drive is on
MIN_KERR_RATIO = 20.0     # Omega / nu


@dataclass(frozen=True)
class PhysicalJunctionParams:
    C: float
    L: float
    E_J: float
    phi_x: float
    e: float = ELEMENTARY_CHARGE

    def __post_init__(self):
        for name in ("C", "L", "e", "phi_x"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.E_J < 0:
            raise ValueError("E_J must be non-negative")


@dataclass(frozen=True)
class EffectiveParams:
    """Rates of ``H = Omega n - mu (b + b^dag) - nu n^2`` with ``Omega = omega - nu``."""

    omega: float
    nu: float
    mu: float
    Omega: float = field(init=False)

    def __post_init__(self):
        if not self.nu > 0:
            raise RegimeViolation(f"nu = {self.nu!r}: no Kerr term")
        object.__setattr__(self, "Omega", self.omega - self.nu)

    @classmethod
    def from_rates(cls, Omega: float, nu: float, mu: float) -> "EffectiveParams":
        return cls(omega=Omega + nu, nu=nu, mu=mu)

    @property
    def ratio(self) -> float:
        """Engineered ``Omega / nu``."""
        return self.Omega / self.nu

    @property
    def revival_period(self) -> float:
        return 2.0 * math.pi / self.nu

    def scaled(self, factor: float) -> "EffectiveParams":
        return EffectiveParams(omega=self.omega * factor, nu=self.nu * factor,
                               mu=self.mu * factor)

    def check_regime(self, min_drive_ratio: float = MIN_DRIVE_RATIO,
                     min_kerr_ratio: float = MIN_KERR_RATIO) -> None:
        if self.ratio < min_kerr_ratio:
            raise RegimeViolation(
                f"Omega/nu = {self.ratio:.4g} < {min_kerr_ratio} (need Omega >> nu)")
        if self.mu / self.Omega < min_drive_ratio:
            raise RegimeViolation(
                f"mu/Omega = {self.mu / self.Omega:.4g} < {min_drive_ratio} (need mu >> Omega)")


def effective_params(p: PhysicalJunctionParams, *, check: bool = True) -> EffectiveParams:
    """Fourth-order expansion of the junction Hamiltonian into effective rates."""
    omega = math.sqrt(1.0 / (p.C * p.L) + 4.0 * p.e ** 2 * p.E_J / p.C)
    nu = 2.0 * p.E_J * p.e ** 4 / (3.0 * (omega * p.C) ** 2)
    mu = p.phi_x / (p.L * math.sqrt(2.0 * omega * p.C))
    if nu <= 0:
        raise RegimeViolation("E_J = 0 leaves a linear oscillator with no Kerr term")
    eff = EffectiveParams(omega=omega, nu=nu, mu=mu)
    if check:
        eff.check_regime()
    return eff


def junction_for_regime(Omega: float, ratio: float, drive_ratio: float = 1000.0,
                        e: float = ELEMENTARY_CHARGE) -> PhysicalJunctionParams:
    """Back-solve ``(C, L, E_J, phi_x)`` that realise the given rates.

    ``C`` is fixed at half its largest admissible value so that ``1/(CL)``
    stays positive; the remaining parameters follow from the rate formulas.
    """
    nu = Omega / ratio
    omega = Omega + nu
    C = e ** 2 / (12.0 * nu)
    E_J = 3.0 * nu * (omega * C) ** 2 / (2.0 * e ** 4)
    inv_cl = omega ** 2 - 4.0 * e ** 2 * E_J / C
    L = 1.0 / (C * inv_cl)
    mu = drive_ratio * Omega
    phi_x = mu * L * math.sqrt(2.0 * omega * C)
    return PhysicalJunctionParams(C=C, L=L, E_J=E_J, phi_x=phi_x, e=e)


class PulseKind(str, enum.Enum):
    DISPLACE = "displace"
    ROTATE = "rotate"


@dataclass(frozen=True)
class Pulse:
    kind: PulseKind
    duration: float
    drive: float


@dataclass(frozen=True)
class PreparationSchedule:
    """Displace, rotate, displace."""

    pulses: tuple[Pulse, Pulse, Pulse]

    def __post_init__(self):
        kinds = tuple(p.kind for p in self.pulses)
        if kinds != (PulseKind.DISPLACE, PulseKind.ROTATE, PulseKind.DISPLACE):
            raise ValueError(f"unexpected pulse pattern {kinds}")

    @property
    def total_duration(self) -> float:
        return sum(p.duration for p in self.pulses)


def _displace_pulse(label: float, mu: float) -> Pulse:
    # exp(i mu tau (b + b^dag)) shifts <V> by sqrt(2) mu tau; negative labels
    # flip the drive sign, durations stay non-negative.
    lam = label / math.sqrt(2.0)
    if lam == 0.0:
        return Pulse(PulseKind.DISPLACE, 0.0, 0.0)
    return Pulse(PulseKind.DISPLACE, abs(lam) / mu, math.copysign(mu, lam))


def preparation_schedule(phi_A: float, v_A: float, eff: EffectiveParams) -> PreparationSchedule:
    return PreparationSchedule((
        _displace_pulse(phi_A, eff.mu),
        Pulse(PulseKind.ROTATE, math.pi / (2.0 * eff.Omega), 0.0),
        _displace_pulse(v_A, eff.mu),
    ))


def run_schedule(schedule: PreparationSchedule, eff: EffectiveParams, dim: int, *,
                 kerr_during_rotation: bool = False) -> FockVector:
    """Apply a schedule to the ground state.

    With ``kerr_during_rotation`` the rotate pulse carries the full diagonal
    phase ``Omega n - nu n^2`` instead of the ideal rotation.
    """
    state = vacuum(dim)
    for pulse in schedule.pulses:
        if pulse.kind is PulseKind.DISPLACE:
            state = apply_displacement(state, pulse.drive * pulse.duration)
        elif kerr_during_rotation:
            state = kerr_evolve(state, eff.Omega, eff.nu, pulse.duration)
        else:
            state = apply_rotation(state, eff.Omega * pulse.duration)
    return state


def prepare_state(phi_A: float, v_A: float, eff: EffectiveParams, dim: int | None = None, *,
                  kerr_during_rotation: bool = False) -> tuple[FockVector, PreparationSchedule]:
    """Prepare ``|(phi_A + i v_A)/sqrt(2)>`` from the ground state with three pulses."""
    if dim is None:
        dim = auto_dim(label_to_alpha(phi_A, v_A))
    schedule = preparation_schedule(phi_A, v_A, eff)
    state = run_schedule(schedule, eff, dim, kerr_during_rotation=kerr_during_rotation)
    return state, schedule
