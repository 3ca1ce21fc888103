"""Pure-numpy implementation of the gate-sweep kernel.

Semantically identical to the compiled core in ``_core.pyx``; used when the
extension is unavailable or when MESHCODEC_BACKEND=python is set. Roughly two
orders of magnitude slower on deep networks, which only matters for the
full-scale training presets.
"""

import numpy as np

BACKEND_NAME = "python"


def apply_gate_program(k, m00, m01, m10, m11, states):
    """Apply a sequence of two-mode gates to a batch of states, in place.

    Args:
        k: int32 array (G,) of lower mode indices, one per gate.
        m00, m01, m10, m11: complex128 arrays (G,) holding each gate's 2x2
            entries; row/column order is (mode k, mode k+1).
        states: complex128 array (N, M), one state per column, modified
            in place in gate order.
    """
    for g in range(k.shape[0]):
        i = k[g]
        a = states[i]
        b = states[i + 1]
        top = m00[g] * a + m01[g] * b
        states[i + 1] = m10[g] * a + m11[g] * b
        states[i] = top
