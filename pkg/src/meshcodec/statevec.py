"""Complex state vectors over an N-dimensional mode space.

Amplitudes are stored rectangular (numpy complex128); polar views are computed
on demand so the training hot loop never round-trips through trigonometry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimMismatchError, NotNormalizedError, ZeroVectorError

ZERO_THRESHOLD = 1e-15
PHASE_MODULUS_FLOOR = 1e-12
NORM_TOLERANCE = 1e-9


def _as_complex_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128).reshape(-1)
    if arr.size < 1:
        raise ZeroVectorError("state vector needs at least one component")
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Immutable vector of complex mode amplitudes.

    The constructor copies its input and freezes the buffer, so instances are
    safe to share between workers without synchronization.
    """

    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _as_complex_array(self.amps).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "amps", arr)

    @classmethod
    def basis(cls, index: int, dim: int) -> "StateVector":
        """The computational basis state with all amplitude on one mode."""
        if not 0 <= index < dim:
            raise IndexError(f"basis index {index} outside [0, {dim})")
        amps = np.zeros(dim, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def is_normalized(self, tol: float = NORM_TOLERANCE) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def moduli(self) -> np.ndarray:
        """Nonnegative amplitude magnitudes, one per mode."""
        return np.abs(self.amps)

    def phases(self) -> np.ndarray:
        """Phases in [0, 2*pi); modes with modulus below 1e-12 report 0."""
        ph = np.mod(np.angle(self.amps), 2.0 * np.pi)
        ph[np.abs(self.amps) < PHASE_MODULUS_FLOOR] = 0.0
        return ph

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def __eq__(self, other) -> bool:
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.dim == other.dim and bool(np.all(self.amps == other.amps))


def normalize(values) -> tuple[StateVector, float]:
    """Scale a vector to unit norm, returning the unit state and the scale.

    The returned ``sigma`` is the Euclidean norm of the input; keeping it
    alongside the unit vector is what makes classical reconstruction exact.

    Raises:
        ZeroVectorError: if every component has magnitude below 1e-15.
    """
    arr = _as_complex_array(values)
    if np.all(np.abs(arr) < ZERO_THRESHOLD):
        raise ZeroVectorError("cannot normalize a vector of all (near-)zeros")
    sigma = float(np.sqrt(np.sum(np.abs(arr) ** 2)))
    return StateVector(arr / sigma), sigma


def inner(a: StateVector, b: StateVector) -> complex:
    """Hermitian inner product <a|b> = sum_n conj(a_n) * b_n."""
    if a.dim != b.dim:
        raise DimMismatchError(f"dims differ: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amps, b.amps))


def fidelity(a: StateVector, b: StateVector) -> float:
    """Squared overlap |<a|b>|^2 between two normalized states."""
    if a.dim != b.dim:
        raise DimMismatchError(f"dims differ: {a.dim} vs {b.dim}")
    for name, state in (("a", a), ("b", b)):
        if not state.is_normalized():
            raise NotNormalizedError(f"state {name} has norm {state.norm():.12g}")
    return float(abs(inner(a, b)) ** 2)
