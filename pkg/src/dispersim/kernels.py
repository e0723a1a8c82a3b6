"""Backend selection for the stepping hot kernels.

Prefers the compiled extension; falls back to the numpy twin when the
extension is missing or when ``DISPERSIM_FORCE_NUMPY_KERNELS`` is set
(useful for benchmarking and backend-parity tests). Both backends are
deterministic; a given process always uses the one chosen here.
"""

from __future__ import annotations

import os

if os.environ.get("DISPERSIM_FORCE_NUMPY_KERNELS"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND: str = _impl.BACKEND

FLUX_BURGERS: int = _impl.FLUX_BURGERS
FLUX_POLY: int = _impl.FLUX_POLY
FLUX_POWERLAW: int = _impl.FLUX_POWERLAW

nodal_flux = _impl.nodal_flux
apply_symbol = _impl.apply_symbol
stage_combine = _impl.stage_combine
stage_combine2 = _impl.stage_combine2
final_combine = _impl.final_combine
cnab2_combine = _impl.cnab2_combine


def available_backends() -> dict[str, object]:
    """Map backend name -> kernel module, for benchmarks and parity tests."""
    from . import _kernels_py

    backends: dict[str, object] = {"numpy": _kernels_py}
    try:
        from . import _kernels  # type: ignore[attr-defined]

        backends["cython"] = _kernels
    except ImportError:
        pass
    return backends
