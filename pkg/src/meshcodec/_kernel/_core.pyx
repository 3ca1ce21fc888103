# Compiled gate-sweep kernel. Must stay semantically identical to
# _fallback.apply_gate_program; the build disables FMA contraction so both
# backends produce the same floating-point results.

BACKEND_NAME = "compiled"


def apply_gate_program(const int[::1] k,
                       const double complex[::1] m00,
                       const double complex[::1] m01,
                       const double complex[::1] m10,
                       const double complex[::1] m11,
                       double complex[:, ::1] states):
    """Apply a sequence of two-mode gates to a batch of states, in place.

    Args:
        k: int32 array (G,) of lower mode indices, one per gate.
        m00, m01, m10, m11: complex128 arrays (G,) holding each gate's 2x2
            entries; row/column order is (mode k, mode k+1).
        states: complex128 array (N, M), one state per column, modified
            in place in gate order.
    """
    cdef Py_ssize_t n_gates = k.shape[0]
    cdef Py_ssize_t n_cols = states.shape[1]
    cdef Py_ssize_t g, j, i
    cdef double complex u00, u01, u10, u11, a, b
    for g in range(n_gates):
        i = k[g]
        u00 = m00[g]
        u01 = m01[g]
        u10 = m10[g]
        u11 = m11[g]
        for j in range(n_cols):
            a = states[i, j]
            b = states[i + 1, j]
            states[i, j] = u00 * a + u01 * b
            states[i + 1, j] = u10 * a + u11 * b
