"""Select the numeric core at import time.

Set ``FUNCLDP_BACKEND=python`` to force the pure-Python kernels even when
the compiled extension is available.
"""
import os

from . import _pycore

python_core = _pycore

if os.environ.get("FUNCLDP_BACKEND", "").lower() == "python":
    core = _pycore
    BACKEND = "python"
else:
    try:
        from . import _core as core
    except ImportError:  # extension not built
        core = _pycore
        BACKEND = "python"
    else:
        BACKEND = "compiled"


def compiled_core():
    """Return the compiled module or None if it is not built."""
    try:
        from . import _core
    except ImportError:
        return None
    return _core
