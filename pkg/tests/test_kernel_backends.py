import numpy as np
import pytest

from conftest import random_network
from meshcodec import backend_name
from meshcodec._kernel import _fallback
from meshcodec.mesh import GateProgram, Topology


def _compiled():
    from meshcodec._kernel import _core

    return _core


def test_compiled_extension_is_built():
    core = _compiled()
    assert core.BACKEND_NAME == "compiled"


def test_active_backend_reported():
    assert backend_name() in ("compiled", "python")


@pytest.mark.parametrize(
    "n_modes,n_layers,cols,topology",
    [
        (2, 1, 1, Topology.ORDER),
        (8, 10, 50, Topology.CROSS),
        (16, 5, 3, Topology.ORDER),
        (32, 20, 26, Topology.CROSS),
    ],
)
def test_backends_agree(n_modes, n_layers, cols, topology):
    core = _compiled()
    net = random_network(n_modes, topology, n_layers, seed=n_modes * 7 + n_layers)
    prog = GateProgram.from_network(net)
    rng = np.random.default_rng(99)
    batch = rng.standard_normal((n_modes, cols)) + 1j * rng.standard_normal((n_modes, cols))
    out_c = batch.copy()
    core.apply_gate_program(prog.k, prog.m00, prog.m01, prog.m10, prog.m11, out_c)
    out_py = batch.copy()
    _fallback.apply_gate_program(prog.k, prog.m00, prog.m01, prog.m10, prog.m11, out_py)
    # numpy's vectorized complex multiply may fuse multiply-adds, so the two
    # backends agree to rounding, not bit for bit.
    np.testing.assert_allclose(out_c, out_py, atol=1e-13)


def test_single_gate_single_column_agrees_to_ulp():
    core = _compiled()
    prog = GateProgram(4, [1], [0.37], [2.6], False)
    batch = np.array([[0.1 + 0.2j], [0.3 - 0.4j], [0.5 + 0.6j], [-0.7j]])
    out_c = batch.copy()
    core.apply_gate_program(prog.k, prog.m00, prog.m01, prog.m10, prog.m11, out_c)
    out_py = batch.copy()
    _fallback.apply_gate_program(prog.k, prog.m00, prog.m01, prog.m10, prog.m11, out_py)
    np.testing.assert_allclose(out_c, out_py, atol=1e-15)


def test_backend_is_deterministic():
    core = _compiled()
    net = random_network(16, Topology.CROSS, 10, seed=4)
    prog = GateProgram.from_network(net)
    rng = np.random.default_rng(1)
    batch = rng.standard_normal((16, 8)) + 1j * rng.standard_normal((16, 8))
    first = batch.copy()
    core.apply_gate_program(prog.k, prog.m00, prog.m01, prog.m10, prog.m11, first)
    second = batch.copy()
    core.apply_gate_program(prog.k, prog.m00, prog.m01, prog.m10, prog.m11, second)
    np.testing.assert_array_equal(first, second)
