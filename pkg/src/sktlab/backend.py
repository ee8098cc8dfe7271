"""Backend selection: compiled stencil kernels when available, numpy otherwise.

Set SKTLAB_BACKEND=python or SKTLAB_BACKEND=compiled to force a choice;
the default is to try the compiled extension and fall back silently.
Both backends produce bit-identical results.
"""

from __future__ import annotations

import os

from . import _kernels_py

_choice = os.environ.get("SKTLAB_BACKEND", "").strip().lower()

if _choice == "python":
    _impl = _kernels_py
    BACKEND = "python"
elif _choice == "compiled":
    from . import _kernels_cy as _impl  # noqa: F401  raises if not built

    BACKEND = "compiled"
elif _choice == "":
    try:
        from . import _kernels_cy as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"
else:
    raise RuntimeError(
        f"SKTLAB_BACKEND={_choice!r} not understood (use 'python' or 'compiled')"
    )

stencil_apply_1d = _impl.stencil_apply_1d
stencil_apply_2d = _impl.stencil_apply_2d
stencil_square_1d = _impl.stencil_square_1d
stencil_square_2d = _impl.stencil_square_2d
mirror_laplacian_1d = _impl.mirror_laplacian_1d
mirror_laplacian_2d = _impl.mirror_laplacian_2d


def backend_name() -> str:
    """Name of the active stencil backend ('compiled' or 'python')."""
    return BACKEND
