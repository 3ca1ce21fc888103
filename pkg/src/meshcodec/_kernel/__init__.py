"""Backend selection for the hot gate-sweep kernel.

The compiled Cython core is preferred; the numpy fallback is selected when the
extension is missing or when the environment variable MESHCODEC_BACKEND is set
to "python". Both expose the same ``apply_gate_program`` contract.
"""

import os

from . import _fallback

_requested = os.environ.get("MESHCODEC_BACKEND", "").strip().lower()

if _requested == "python":
    apply_gate_program = _fallback.apply_gate_program
    BACKEND = _fallback.BACKEND_NAME
else:
    try:
        from . import _core

        apply_gate_program = _core.apply_gate_program
        BACKEND = _core.BACKEND_NAME
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "MESHCODEC_BACKEND=compiled but the extension is not built; "
                "run `pip install -e .` or `python setup.py build_ext --inplace`"
            )
        apply_gate_program = _fallback.apply_gate_program
        BACKEND = _fallback.BACKEND_NAME


def backend_name() -> str:
    """Name of the active kernel backend: "compiled" or "python"."""
    return BACKEND
