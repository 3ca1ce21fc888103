"""Layered two-mode unitary networks, projection channels, and their application.

A network is an ordered stack of layers of two-mode gates. Each gate acts on
adjacent modes (k, k+1) and is parameterized by a rotation theta (beam-splitter
reflectivity cos(theta)) and a phase shift alpha applied to mode k:

    gate |k>   = e^{i*alpha} (cos(theta) |k> + sin(theta) |k+1>)
    gate |k+1> = -sin(theta) |k> + cos(theta) |k+1>

Parameters live on the unconstrained real line during training; folding into
physical ranges is a separate export step (see training.export_physical).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernel
from .errors import (
    DimMismatchError,
    FullyRejectedError,
    IndexOutOfRangeError,
    InvalidParamsError,
    OddModesForCrossError,
)
from .statevec import StateVector

DEFAULT_INIT_THETA = math.pi / 3.0
DEFAULT_INIT_ALPHA = 2.0 * math.pi / 3.0

KEPT_PROB_FLOOR = 1e-12


class Topology(str, enum.Enum):
    """Layer wiring pattern: gates in index order, or even pairs then odd pairs."""

    ORDER = "order"
    CROSS = "cross"


class Role(str, enum.Enum):
    """How a network is used; inverse-of-encoder networks apply adjoint gates."""

    ENCODER = "encoder"
    DECODER = "decoder"
    INVERSE_OF_ENCODER = "inverse-of-encoder"


@dataclass(frozen=True)
class GateParam:
    """One two-mode gate: lower mode index k plus (theta, alpha) in radians."""

    k: int
    theta: float
    alpha: float


@dataclass(frozen=True)
class CompressionChannel:
    """Keep the first ``d`` of ``n_modes`` mode indices, discard the rest."""

    n_modes: int
    d: int

    def __post_init__(self):
        if not 1 <= self.d <= self.n_modes:
            raise InvalidParamsError(
                f"retained dimension d={self.d} outside [1, {self.n_modes}]"
            )

    def keep_projector(self) -> np.ndarray:
        """Dense matrix of the keep projector (identity on the first d modes)."""
        p = np.zeros((self.n_modes, self.n_modes), dtype=np.complex128)
        for n in range(self.d):
            p[n, n] = 1.0
        return p

    def discard_projector(self) -> np.ndarray:
        return np.eye(self.n_modes, dtype=np.complex128) - self.keep_projector()


def layer_gate_positions(n_modes: int, topology: Topology, role: Role) -> list[int]:
    """Mode indices of one layer's gates, in application order.

    Order topology sweeps k = 0..N-2. A Cross layer applies the even-pair
    block k in {0, 2, ..., N-2} first, then the odd-pair block
    k in {1, 3, ..., N-3}. Decoder-role networks lay each layer out in the
    reverse of the encoder ordering.
    """
    if topology is Topology.ORDER:
        positions = list(range(n_modes - 1))
    else:
        if n_modes % 2 != 0:
            raise OddModesForCrossError(
                f"cross topology needs an even mode count, got {n_modes}"
            )
        positions = list(range(0, n_modes - 1, 2)) + list(range(1, n_modes - 2, 2))
    if role is not Role.ENCODER:
        positions = positions[::-1]
    return positions


class MeshNetwork:
    """Immutable stack of gate layers acting on an ``n_modes``-dim state space.

    ``layers`` stores gates in application order (within and across layers).
    Networks with role INVERSE_OF_ENCODER apply each gate's 2x2 adjoint.
    """

    __slots__ = ("n_modes", "topology", "layers", "role")

    def __init__(
        self,
        n_modes: int,
        topology: Topology,
        layers: list[list[GateParam]] | tuple,
        role: Role = Role.ENCODER,
    ):
        if n_modes < 2:
            raise InvalidParamsError(f"need at least 2 modes, got {n_modes}")
        frozen = tuple(tuple(layer) for layer in layers)
        if not frozen or any(len(layer) == 0 for layer in frozen):
            raise InvalidParamsError("network needs at least one non-empty layer")
        for layer in frozen:
            for g in layer:
                if not 0 <= g.k < n_modes - 1:
                    raise IndexOutOfRangeError(
                        f"gate at k={g.k} does not fit in {n_modes} modes"
                    )
        object.__setattr__(self, "n_modes", n_modes)
        object.__setattr__(self, "topology", Topology(topology))
        object.__setattr__(self, "layers", frozen)
        object.__setattr__(self, "role", Role(role))

    def __setattr__(self, name, value):
        raise AttributeError("MeshNetwork is immutable")

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def gate_count(self) -> int:
        return sum(len(layer) for layer in self.layers)

    @property
    def param_count(self) -> int:
        """Two real parameters (theta, alpha) per gate."""
        return 2 * self.gate_count

    @property
    def applies_adjoint(self) -> bool:
        return self.role is Role.INVERSE_OF_ENCODER

    def gates(self):
        """All gates in application order."""
        for layer in self.layers:
            yield from layer

    def thetas(self) -> np.ndarray:
        return np.array([g.theta for g in self.gates()], dtype=np.float64)

    def alphas(self) -> np.ndarray:
        return np.array([g.alpha for g in self.gates()], dtype=np.float64)

    def with_params(self, thetas, alphas) -> "MeshNetwork":
        """Copy of this network with replaced flat parameter arrays."""
        thetas = np.asarray(thetas, dtype=np.float64)
        alphas = np.asarray(alphas, dtype=np.float64)
        if thetas.shape != (self.gate_count,) or alphas.shape != (self.gate_count,):
            raise InvalidParamsError(
                f"expected {self.gate_count} thetas and alphas, got "
                f"{thetas.shape} and {alphas.shape}"
            )
        layers = []
        pos = 0
        for layer in self.layers:
            new_layer = []
            for g in layer:
                new_layer.append(GateParam(g.k, float(thetas[pos]), float(alphas[pos])))
                pos += 1
            layers.append(new_layer)
        return MeshNetwork(self.n_modes, self.topology, layers, self.role)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MeshNetwork):
            return NotImplemented
        return (
            self.n_modes == other.n_modes
            and self.topology == other.topology
            and self.role == other.role
            and self.layers == other.layers
        )


# ---------------------------------------------------------------------------
# Gate programs: the flat application-order form consumed by the kernel.


def gate_entries(theta: float, alpha: float, adjoint: bool = False):
    """The four 2x2 entries of one gate (or its adjoint) in (m00, m01, m10, m11) order."""
    c = math.cos(theta)
    s = math.sin(theta)
    e = complex(math.cos(alpha), math.sin(alpha))
    if adjoint:
        ec = e.conjugate()
        return ec * c, ec * s, complex(-s), complex(c)
    return e * c, complex(-s), e * s, complex(c)


class GateProgram:
    """Flat, kernel-ready view of a network: k indices plus 2x2 entries per gate.

    Training perturbs single gates by rewriting their entry slots; entry
    recomputation must route through ``entries_for``/``refresh`` so every code
    path performs identical floating-point operations.
    """

    __slots__ = ("n_modes", "k", "theta", "alpha", "adjoint", "m00", "m01", "m10", "m11")

    def __init__(self, n_modes, k, theta, alpha, adjoint):
        self.n_modes = n_modes
        self.k = np.ascontiguousarray(k, dtype=np.int32)
        self.theta = np.asarray(theta, dtype=np.float64).copy()
        self.alpha = np.asarray(alpha, dtype=np.float64).copy()
        self.adjoint = bool(adjoint)
        g = self.k.shape[0]
        self.m00 = np.empty(g, dtype=np.complex128)
        self.m01 = np.empty(g, dtype=np.complex128)
        self.m10 = np.empty(g, dtype=np.complex128)
        self.m11 = np.empty(g, dtype=np.complex128)
        self.refresh()

    @classmethod
    def from_network(cls, net: MeshNetwork) -> "GateProgram":
        gates = list(net.gates())
        return cls(
            net.n_modes,
            [g.k for g in gates],
            [g.theta for g in gates],
            [g.alpha for g in gates],
            net.applies_adjoint,
        )

    @property
    def n_gates(self) -> int:
        return self.k.shape[0]

    def entries_for(self, g: int, theta: float, alpha: float):
        return gate_entries(theta, alpha, self.adjoint)

    def refresh(self, g: int | None = None):
        """Recompute entry slots from (theta, alpha), for one gate or all."""
        indices = range(self.n_gates) if g is None else (g,)
        for i in indices:
            e00, e01, e10, e11 = self.entries_for(i, self.theta[i], self.alpha[i])
            self.m00[i] = e00
            self.m01[i] = e01
            self.m10[i] = e10
            self.m11[i] = e11

    def set_gate(self, g: int, theta: float, alpha: float):
        e00, e01, e10, e11 = self.entries_for(g, theta, alpha)
        self.m00[g] = e00
        self.m01[g] = e01
        self.m10[g] = e10
        self.m11[g] = e11

    def saved_entries(self, g: int):
        return self.m00[g], self.m01[g], self.m10[g], self.m11[g]

    def restore_entries(self, g: int, saved):
        self.m00[g], self.m01[g], self.m10[g], self.m11[g] = saved

    def apply(self, states: np.ndarray) -> np.ndarray:
        """Run the gate sweep in place on an (N, M) complex batch."""
        # Looked up through the package so backend swaps take effect.
        _kernel.apply_gate_program(self.k, self.m00, self.m01, self.m10, self.m11, states)
        return states


# ---------------------------------------------------------------------------
# Public operations.


def gate_apply(state: StateVector, gate: GateParam) -> StateVector:
    """Apply one two-mode gate to a state."""
    if gate.k + 1 >= state.dim:
        raise IndexOutOfRangeError(
            f"gate at k={gate.k} does not fit in {state.dim} modes"
        )
    m00, m01, m10, m11 = gate_entries(gate.theta, gate.alpha)
    amps = state.amps.copy()
    a = amps[gate.k]
    b = amps[gate.k + 1]
    amps[gate.k] = m00 * a + m01 * b
    amps[gate.k + 1] = m10 * a + m11 * b
    return StateVector(amps)


def build_network(
    n_modes: int,
    topology: Topology,
    n_layers: int,
    init: tuple[float, float] = (DEFAULT_INIT_THETA, DEFAULT_INIT_ALPHA),
    role: Role = Role.ENCODER,
) -> MeshNetwork:
    """Construct a mesh with every gate initialized to the same (theta, alpha).

    Each layer holds N-1 gates. Decoder-role layers use the reverse of the
    encoder gate ordering.
    """
    if n_modes < 2:
        raise InvalidParamsError(f"need at least 2 modes, got {n_modes}")
    if n_layers < 1:
        raise InvalidParamsError(f"need at least one layer, got {n_layers}")
    topology = Topology(topology)
    theta0, alpha0 = float(init[0]), float(init[1])
    positions = layer_gate_positions(n_modes, topology, Role(role))
    layers = [
        [GateParam(k, theta0, alpha0) for k in positions] for _ in range(n_layers)
    ]
    return MeshNetwork(n_modes, topology, layers, role)


def forward(net: MeshNetwork, state: StateVector) -> StateVector:
    """Apply every gate of the network, layer by layer in stored order."""
    if net.n_modes != state.dim:
        raise DimMismatchError(f"network has {net.n_modes} modes, state {state.dim}")
    batch = state.amps.reshape(-1, 1).copy()
    GateProgram.from_network(net).apply(batch)
    return StateVector(batch[:, 0])


def inverse_of(net: MeshNetwork) -> MeshNetwork:
    """The exact inverse network: reversed gate order, adjoint gates.

    Inverting an inverse restores plain gate application with role ENCODER;
    that round-trips encoder-built networks exactly (decoder-built networks
    come back behaviorally identical under the ENCODER label).
    """
    layers = [list(reversed(layer)) for layer in reversed(net.layers)]
    role = Role.ENCODER if net.applies_adjoint else Role.INVERSE_OF_ENCODER
    return MeshNetwork(net.n_modes, net.topology, layers, role)


def materialize(net: MeshNetwork) -> np.ndarray:
    """Dense N x N matrix of the network; column n is forward(net, |n>)."""
    batch = np.eye(net.n_modes, dtype=np.complex128)
    GateProgram.from_network(net).apply(batch)
    return batch


def project(state: StateVector, channel: CompressionChannel) -> tuple[StateVector, float]:
    """Project onto the retained modes; returns the unnormalized state and kept probability."""
    if state.dim != channel.n_modes:
        raise DimMismatchError(
            f"state dim {state.dim} != channel modes {channel.n_modes}"
        )
    amps = state.amps.copy()
    amps[channel.d :] = 0.0
    kept = float(np.sum(np.abs(amps[: channel.d]) ** 2))
    return StateVector(amps), kept


def compress_decode(
    enc: MeshNetwork,
    dec: MeshNetwork,
    channel: CompressionChannel,
    psi: StateVector,
) -> StateVector:
    """Encode, project, renormalize, decode: the full lossy round trip.

    Raises:
        FullyRejectedError: if the kept probability underflows (below 1e-12),
            in which case the renormalization is undefined.
    """
    encoded = forward(enc, psi)
    chi, kept = project(encoded, channel)
    if kept < KEPT_PROB_FLOOR:
        raise FullyRejectedError(
            f"kept probability {kept:.3e} below {KEPT_PROB_FLOOR:.0e}"
        )
    renorm = chi.amps / math.sqrt(kept)
    return forward(dec, StateVector(renorm))


# ---------------------------------------------------------------------------
# Flat text serialization: header line, then one gate per line.


def network_to_text(net: MeshNetwork) -> str:
    """Serialize as `n_modes topology n_layers role` plus `layer k theta alpha` lines.

    Floats are written with 17 significant digits, which round-trips binary64
    exactly.
    """
    lines = [f"{net.n_modes} {net.topology.value} {net.n_layers} {net.role.value}"]
    for layer_idx, layer in enumerate(net.layers):
        for g in layer:
            lines.append(f"{layer_idx} {g.k} {g.theta:.17g} {g.alpha:.17g}")
    return "\n".join(lines) + "\n"


def network_from_text(text: str) -> MeshNetwork:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InvalidParamsError("empty network file")
    header = lines[0].split()
    if len(header) != 4:
        raise InvalidParamsError(f"bad network header: {lines[0]!r}")
    n_modes = int(header[0])
    topology = Topology(header[1])
    n_layers = int(header[2])
    role = Role(header[3])
    layers: list[list[GateParam]] = [[] for _ in range(n_layers)]
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 4:
            raise InvalidParamsError(f"bad gate line: {ln!r}")
        layer_idx = int(parts[0])
        if not 0 <= layer_idx < n_layers:
            raise InvalidParamsError(f"layer index {layer_idx} out of range")
        layers[layer_idx].append(
            GateParam(int(parts[1]), float(parts[2]), float(parts[3]))
        )
    return MeshNetwork(n_modes, topology, layers, role)


def save_network(net: MeshNetwork, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(network_to_text(net))


def load_network(path) -> MeshNetwork:
    with open(path, "r", encoding="ascii") as fh:
        return network_from_text(fh.read())
