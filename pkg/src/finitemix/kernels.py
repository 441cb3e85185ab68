"""Kernel selection: compiled extension if importable, numpy otherwise.

Set ``FINITEMIX_PURE=1`` to force the numpy path.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("FINITEMIX_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass

csr_mix = _impl.csr_mix
consensus_error = _impl.consensus_error

__all__ = ["BACKEND", "csr_mix", "consensus_error"]
