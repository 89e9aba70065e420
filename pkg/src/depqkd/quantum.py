"""State vectors, local operations, and projective measurements for photon
pairs carrying a polarization and a frequency mode.

Conventions, fixed package-wide:

* Each photon occupies four modes indexed ``2 * pol + freq`` with
  polarization H = 0, V = 1 and frequency bins LOW = 0, HIGH = 1.
* A pair state holds 16 amplitudes with joint index
  ``4 * mode_a + mode_b`` (photon a major, photon b minor).
* Encoding operations act on the polarization qubit only and leave the
  frequency bin untouched.  ``IY`` is the product of the phase flip and
  the bit flip (``Z @ X``), so IY|H> = -|V> and IY|V> = |H>.

State objects are immutable after construction.  Randomness enters only
through :class:`SeededGenerator`, an explicitly seeded, stream-indexed
counter-based generator, so every simulation is reproducible from its
(seed, stream, call order) triple alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Hashable, Iterable, Sequence

import numpy as np

#: Tolerance for algebraic identities (norms, unitarity, completeness).
NORM_TOL = 1e-12

#: Default tolerance for global-phase state comparison.
PHASE_TOL = 1e-9


class StateError(ValueError):
    """Raised for malformed or unusable state amplitudes."""


class MeasurementError(ValueError):
    """Raised when a measurement description is incomplete or not orthonormal."""


class Pol(IntEnum):
    """Polarization of a photon."""

    H = 0
    V = 1


class Freq(IntEnum):
    """Frequency bin of a photon.

    Each photon of a pair uses two bins; LOW denotes the unshifted bin that
    wavelength converters map both bins onto.
    """

    LOW = 0
    HIGH = 1


class Photon(Enum):
    """Which photon of a pair an operation acts on.

    Photon A stays with the sender until the second transmission; photon B
    travels first.
    """

    A = "a"
    B = "b"


class PolBasis(Enum):
    """Single-photon polarization measurement basis: H/V or diagonal."""

    Z = "Z"
    X = "X"


def mode_index(pol: Pol, freq: Freq) -> int:
    """Local mode index of a (polarization, frequency) pair."""
    return 2 * int(pol) + int(freq)


class Pauli(Enum):
    """Polarization-only encoding operations."""

    I = "I"
    X = "sigma_x"
    Z = "sigma_z"
    IY = "i_sigma_y"

    @property
    def matrix(self) -> np.ndarray:
        return PAULI_MATRICES[self]


PAULI_MATRICES: dict[Pauli, np.ndarray] = {
    Pauli.I: np.eye(2, dtype=complex),
    Pauli.X: np.array([[0, 1], [1, 0]], dtype=complex),
    Pauli.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    # IY := Z @ X, fixing the sign convention iY|H> = -|V>, iY|V> = |H>.
    Pauli.IY: np.array([[0, 1], [-1, 0]], dtype=complex),
}


def _frozen_vector(values, dim: int) -> np.ndarray:
    vec = np.array(values, dtype=complex).reshape(dim)
    vec.setflags(write=False)
    return vec


class LocalState:
    """Single-photon state over the four (polarization, frequency) modes."""

    __slots__ = ("vec",)
    dim = 4

    def __init__(self, amplitudes) -> None:
        self.vec = _frozen_vector(amplitudes, 4)

    @classmethod
    def mode(cls, pol: Pol, freq: Freq) -> "LocalState":
        vec = np.zeros(4, dtype=complex)
        vec[mode_index(pol, freq)] = 1.0
        return cls(vec)

    @classmethod
    def diagonal(cls, sign: int, freq: Freq) -> "LocalState":
        """(|H> + sign |V>) / sqrt(2) within one frequency bin."""
        vec = np.zeros(4, dtype=complex)
        vec[mode_index(Pol.H, freq)] = 1.0 / np.sqrt(2.0)
        vec[mode_index(Pol.V, freq)] = sign / np.sqrt(2.0)
        return cls(vec)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vec))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(float(np.real(np.vdot(self.vec, self.vec))) - 1.0) <= tol

    def normalized(self) -> "LocalState":
        n = self.norm()
        if n < NORM_TOL:
            raise StateError("cannot normalize a zero state")
        return LocalState(self.vec / n)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"LocalState({np.array2string(self.vec, precision=4)})"


class JointState:
    """Two-photon state over the 16 joint modes (photon a major)."""

    __slots__ = ("vec",)
    dim = 16

    def __init__(self, amplitudes) -> None:
        self.vec = _frozen_vector(amplitudes, 16)

    @classmethod
    def from_product(cls, a: LocalState, b: LocalState) -> "JointState":
        return cls(np.kron(a.vec, b.vec))

    def as_matrix(self) -> np.ndarray:
        """View with photon a indexing rows and photon b indexing columns."""
        return self.vec.reshape(4, 4)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vec))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(float(np.real(np.vdot(self.vec, self.vec))) - 1.0) <= tol

    def normalized(self) -> "JointState":
        n = self.norm()
        if n < NORM_TOL:
            raise StateError("cannot normalize a zero state")
        return JointState(self.vec / n)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        parts = [
            f"{amp:.4g}|{i // 4},{i % 4}>"
            for i, amp in enumerate(self.vec)
            if abs(amp) > 1e-12
        ]
        return "JointState(" + " + ".join(parts) + ")"


def tensor(a: LocalState, b: LocalState) -> JointState:
    """Product state of two single-photon states."""
    return JointState.from_product(a, b)


def apply_local(op: Pauli, photon: Photon, state: JointState) -> JointState:
    """Apply a polarization operation to one photon of a pair.

    The operation touches the polarization qubit only; frequency amplitudes
    ride along unchanged.  Norm is preserved.
    """
    u = np.kron(PAULI_MATRICES[op], np.eye(2, dtype=complex))
    m = state.as_matrix()
    if photon is Photon.A:
        out = u @ m
    else:
        out = m @ u.T
    return JointState(out.reshape(16))


def equal_up_to_global_phase(s1, s2, tol: float = PHASE_TOL) -> bool:
    """True when two normalized states differ only by a global phase.

    Decided by ``|<s1|s2>| >= 1 - tol``.
    """
    return bool(abs(np.vdot(s1.vec, s2.vec)) >= 1.0 - tol)


@dataclass(frozen=True)
class ProjectiveMeasurement:
    """Complete projective measurement described by orthonormal basis groups.

    Each outcome owns a group of orthonormal vectors; its projector is the
    sum of |v><v| over the group.  All groups together must form an
    orthonormal basis of the stated space, which :meth:`validate` checks
    within ``NORM_TOL``.
    """

    outcomes: tuple[tuple[Hashable, np.ndarray], ...]
    dim: int
    _cache: dict = field(
        default_factory=dict, init=False, repr=False, compare=False
    )

    @classmethod
    def from_groups(
        cls, groups: Iterable[tuple[Hashable, Sequence]], dim: int
    ) -> "ProjectiveMeasurement":
        packed = []
        for label, vectors in groups:
            arr = np.array(vectors, dtype=complex).reshape(-1, dim)
            arr.setflags(write=False)
            packed.append((label, arr))
        return cls(tuple(packed), dim)

    @classmethod
    def computational(cls, dim: int) -> "ProjectiveMeasurement":
        eye = np.eye(dim, dtype=complex)
        return cls.from_groups([(i, eye[i : i + 1]) for i in range(dim)], dim)

    def labels(self) -> tuple:
        return tuple(label for label, _ in self.outcomes)

    def stacked(self) -> np.ndarray:
        """All basis vectors stacked as rows, group by group."""
        if "stacked" not in self._cache:
            rows = np.vstack([rows for _, rows in self.outcomes])
            rows.setflags(write=False)
            self._cache["stacked"] = rows
        return self._cache["stacked"]

    def group_slices(self) -> tuple[slice, ...]:
        if "slices" not in self._cache:
            slices = []
            start = 0
            for _, rows in self.outcomes:
                slices.append(slice(start, start + rows.shape[0]))
                start += rows.shape[0]
            self._cache["slices"] = tuple(slices)
        return self._cache["slices"]

    def validate(self) -> None:
        """Raise :class:`MeasurementError` unless the groups form a complete
        orthonormal basis of the space."""
        if self._cache.get("valid"):
            return
        rows = self.stacked()
        if rows.shape[0] != self.dim:
            raise MeasurementError(
                f"measurement covers {rows.shape[0]} of {self.dim} dimensions"
            )
        gram = rows @ rows.conj().T
        if not np.allclose(gram, np.eye(self.dim), atol=NORM_TOL):
            raise MeasurementError("measurement vectors are not orthonormal")
        self._cache["valid"] = True


class SeededGenerator:
    """Deterministic random source keyed by (master seed, stream index).

    Built on a counter-based Philox generator, so distinct stream indices
    give statistically independent sequences and the outputs depend only on
    (seed, stream, call order), never on platform or process state.  All
    sampling helpers reduce to uniform doubles, keeping the draw sequence
    stable across library versions.
    """

    __slots__ = ("seed", "stream", "_gen")

    _MASK = (1 << 64) - 1

    def __init__(self, seed: int, stream: int = 0) -> None:
        self.seed = int(seed) & self._MASK
        self.stream = int(stream) & self._MASK
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def uniform(self) -> float:
        """One double in [0, 1)."""
        return float(self._gen.random())

    def uniforms(self, n: int) -> np.ndarray:
        """``n`` doubles in [0, 1); consumes the same draws as ``n`` calls
        of :meth:`uniform`."""
        return self._gen.random(n)

    def coin(self, p: float) -> bool:
        """True with probability ``p``."""
        return self.uniform() < p

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("randint needs a positive range")
        return min(int(self.uniform() * n), n - 1)

    def pick(self, seq: Sequence):
        """Uniformly chosen element of a non-empty sequence."""
        return seq[self.randint(len(seq))]

    def sample_index(self, probabilities) -> int:
        """Index drawn from a probability vector by inverse CDF."""
        cdf = np.cumsum(np.asarray(probabilities, dtype=float))
        u = self.uniform() * cdf[-1]
        return min(int(np.searchsorted(cdf, u, side="right")), len(cdf) - 1)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"SeededGenerator(seed={self.seed}, stream={self.stream})"


def born_distribution(
    state, measurement: ProjectiveMeasurement
) -> list[tuple[Hashable, float]]:
    """Outcome probabilities of a projective measurement on a state.

    Validates completeness of the measurement and returns one
    ``(label, probability)`` entry per outcome, in declaration order.
    """
    measurement.validate()
    amps = measurement.stacked().conj() @ state.vec
    weights = np.abs(amps) ** 2
    return [
        (label, float(weights[sl].sum()))
        for (label, _), sl in zip(measurement.outcomes, measurement.group_slices())
    ]


def measure_projective(state, measurement: ProjectiveMeasurement, g: SeededGenerator):
    """Sample one outcome and return ``(label, post_state)``.

    The post state is the normalized projection of the input onto the
    sampled outcome's subspace; its type matches the input's.
    """
    measurement.validate()
    rows = measurement.stacked()
    amps = rows.conj() @ state.vec
    weights = np.abs(amps) ** 2
    slices = measurement.group_slices()
    probs = [weights[sl].sum() for sl in slices]
    k = g.sample_index(probs)
    sl = slices[k]
    post = amps[sl] @ rows[sl]
    post = post / np.linalg.norm(post)
    return measurement.outcomes[k][0], type(state)(post)


def partial_measure(
    state: JointState,
    photon: Photon,
    local_basis: ProjectiveMeasurement,
    g: SeededGenerator,
) -> tuple[Hashable, JointState]:
    """Measure one photon of a pair with a local projective measurement.

    Returns the sampled local outcome label and the collapsed joint state.
    For rank-1 local projectors the collapsed state is the product of the
    observed local mode and the conditional state of the other photon.
    """
    if local_basis.dim != 4:
        raise MeasurementError("local measurement must act on the 4 photon modes")
    local_basis.validate()
    rows = local_basis.stacked()
    m = state.as_matrix()
    if photon is Photon.A:
        # column j of C holds <v_j| applied to photon a, leaving a b-vector
        coeffs = rows.conj() @ m
        weights = np.abs(coeffs) ** 2
        slices = local_basis.group_slices()
        probs = [weights[sl].sum() for sl in slices]
        k = g.sample_index(probs)
        sl = slices[k]
        post = rows[sl].T @ coeffs[sl]
    else:
        coeffs = m @ rows.conj().T
        weights = np.abs(coeffs) ** 2
        slices = local_basis.group_slices()
        probs = [weights[:, sl].sum() for sl in slices]
        k = g.sample_index(probs)
        sl = slices[k]
        post = coeffs[:, sl] @ rows[sl]
    post = post.reshape(16)
    post = post / np.linalg.norm(post)
    return local_basis.outcomes[k][0], JointState(post)


def pol_freq_eigenstate(basis: PolBasis, comp: int, freq: Freq) -> LocalState:
    """Eigenstate of a polarization measurement within one frequency bin.

    ``comp`` 0 means H (Z basis) or the +45 degree state (X basis);
    ``comp`` 1 means V or the -45 degree state.
    """
    if basis is PolBasis.Z:
        return LocalState.mode(Pol(comp), freq)
    return LocalState.diagonal(+1 if comp == 0 else -1, freq)


def polarization_frequency_basis(basis: PolBasis) -> ProjectiveMeasurement:
    """Complete local measurement resolving polarization and frequency bin.

    Outcome labels are ``(comp, freq)`` with ``comp`` as in
    :func:`pol_freq_eigenstate`.  The frequency bin is always resolved; only
    the polarization part switches between H/V and the diagonal pair.
    """
    cached = _LOCAL_BASES.get(basis)
    if cached is None:
        groups = [
            ((comp, freq), pol_freq_eigenstate(basis, comp, freq).vec[None, :])
            for comp in (0, 1)
            for freq in (Freq.LOW, Freq.HIGH)
        ]
        cached = ProjectiveMeasurement.from_groups(groups, 4)
        _LOCAL_BASES[basis] = cached
    return cached


_LOCAL_BASES: dict[PolBasis, ProjectiveMeasurement] = {}
