"""Trainable two-mode interferometer meshes for lossy coding of classical data and quantum states."""

from ._kernel import backend_name
from .mesh import (
    CompressionChannel,
    GateParam,
    MeshNetwork,
    Role,
    Topology,
    build_network,
    compress_decode,
    forward,
    gate_apply,
    inverse_of,
    load_network,
    materialize,
    project,
    save_network,
)
from .statevec import StateVector, fidelity, inner, normalize
from .training import (
    DecoderMode,
    FdScheme,
    GradientMethod,
    LossKind,
    TrainingConfig,
    TrainingHistory,
    analytic_gradient,
    export_physical,
    fd_gradient,
    loss_inv,
    loss_reconstruction,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "CompressionChannel",
    "DecoderMode",
    "FdScheme",
    "GateParam",
    "GradientMethod",
    "LossKind",
    "MeshNetwork",
    "Role",
    "StateVector",
    "Topology",
    "TrainingConfig",
    "TrainingHistory",
    "analytic_gradient",
    "backend_name",
    "build_network",
    "compress_decode",
    "export_physical",
    "fd_gradient",
    "fidelity",
    "forward",
    "gate_apply",
    "inner",
    "inverse_of",
    "load_network",
    "loss_inv",
    "loss_reconstruction",
    "materialize",
    "normalize",
    "project",
    "save_network",
    "train",
    "__version__",
]
