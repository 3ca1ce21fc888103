import numpy as np
import pytest

from meshcodec.mesh import GateProgram, MeshNetwork, Topology, build_network
from meshcodec.statevec import StateVector


def random_network(n_modes, topology, n_layers, seed, role=None) -> MeshNetwork:
    """A mesh with uniformly random parameters in [0, 2*pi)."""
    kwargs = {} if role is None else {"role": role}
    net = build_network(n_modes, topology, n_layers, **kwargs)
    rng = np.random.default_rng(seed)
    thetas = rng.uniform(0.0, 2.0 * np.pi, net.gate_count)
    alphas = rng.uniform(0.0, 2.0 * np.pi, net.gate_count)
    return net.with_params(thetas, alphas)


def random_state(n, seed) -> StateVector:
    rng = np.random.default_rng(seed)
    vec = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return StateVector(vec / np.linalg.norm(vec))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
