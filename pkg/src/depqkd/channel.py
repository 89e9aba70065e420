"""Transmission channel: optional photon loss and an intercept-resend
eavesdropper.

The eavesdropper measures each intercepted photon in a fixed or randomly
alternating basis (H/V or diagonal, always resolving the frequency bin)
and resends a fresh photon in the observed eigenstate.  On an entangled
pair this collapses the joint state to a product, so the original
correlations are destroyed even though every photon still arrives.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .quantum import (
    Freq,
    JointState,
    LocalState,
    Photon,
    PolBasis,
    SeededGenerator,
    partial_measure,
    pol_freq_eigenstate,
    polarization_frequency_basis,
    tensor,
)


class ConfigError(ValueError):
    """Raised for out-of-range or contradictory configuration values."""


class EveStrategy(Enum):
    """Basis policy of the intercept-resend eavesdropper."""

    Z = "ir-z"
    X = "ir-x"
    RANDOM_ZX = "ir-random"


class EveTarget(Enum):
    """Which transmissions the eavesdropper intercepts."""

    B = "b"
    A = "a"
    BOTH = "both"

    def covers(self, photon: Photon) -> bool:
        if self is EveTarget.BOTH:
            return True
        return (self is EveTarget.B) == (photon is Photon.B)


@dataclass(frozen=True)
class EveConfig:
    strategy: EveStrategy
    target: EveTarget = EveTarget.B


@dataclass(frozen=True)
class ChannelConfig:
    """Loss probability per transmitted photon, plus an optional attacker."""

    loss_probability: float = 0.0
    eve: Optional[EveConfig] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.loss_probability <= 1.0:
            raise ConfigError(
                f"loss probability must lie in [0, 1], got {self.loss_probability}"
            )


@dataclass(frozen=True)
class EveRecord:
    """What the eavesdropper learned from one intercepted photon."""

    basis: PolBasis
    comp: int  # 0 = H or +45 degrees, 1 = V or -45 degrees
    freq: Freq


@dataclass(frozen=True)
class TransmissionRecord:
    """Channel bookkeeping for one transmitted photon."""

    delivered: bool
    eve_record: Optional[EveRecord] = None

    @property
    def eve_measured(self) -> bool:
        return self.eve_record is not None


def apply_loss(loss_probability: float, g: SeededGenerator) -> bool:
    """Decide whether a photon survives the channel; True means delivered."""
    if not 0.0 <= loss_probability <= 1.0:
        raise ConfigError(
            f"loss probability must lie in [0, 1], got {loss_probability}"
        )
    return not g.coin(loss_probability)


def _choose_basis(strategy: EveStrategy, g: SeededGenerator) -> PolBasis:
    if strategy is EveStrategy.Z:
        return PolBasis.Z
    if strategy is EveStrategy.X:
        return PolBasis.X
    return PolBasis.Z if g.coin(0.5) else PolBasis.X


def ir_attack_entangled(
    state: JointState, photon: Photon, strategy: EveStrategy, g: SeededGenerator
) -> tuple[JointState, EveRecord]:
    """Intercept one photon of a pair, measure it, resend the eigenstate.

    Whatever the input, the output is a product of the resent eigenstate
    and the other photon's conditional state: the attack always leaves the
    pair disentangled.
    """
    basis = _choose_basis(strategy, g)
    measurement = polarization_frequency_basis(basis)
    (comp, freq), collapsed = partial_measure(state, photon, measurement, g)
    fresh = pol_freq_eigenstate(basis, comp, freq)
    m = collapsed.as_matrix()
    if photon is Photon.B:
        remote = LocalState(m @ fresh.vec.conj())
        out = tensor(remote.normalized(), fresh)
    else:
        remote = LocalState(fresh.vec.conj() @ m)
        out = tensor(fresh, remote.normalized())
    return out, EveRecord(basis, comp, freq)


def ir_attack_decoy(
    state: LocalState, strategy: EveStrategy, g: SeededGenerator
) -> tuple[LocalState, EveRecord]:
    """Intercept-resend on a lone photon; returns the resent state."""
    basis = _choose_basis(strategy, g)
    measurement = polarization_frequency_basis(basis)
    rows = measurement.stacked()
    amps = rows.conj() @ state.vec
    k = g.sample_index(np.abs(amps) ** 2)
    comp, freq = measurement.outcomes[k][0]
    return pol_freq_eigenstate(basis, comp, freq), EveRecord(basis, comp, freq)
