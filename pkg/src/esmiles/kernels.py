"""Kernel selection: compiled extension when available, pure Python otherwise.

Set ``ESMILES_PURE=1`` in the environment to force the pure-Python kernels
(used by the parity tests and the benchmark).
"""

from __future__ import annotations

import os

from esmiles import _pykernels

if os.environ.get("ESMILES_PURE") == "1":
    _impl = _pykernels
    COMPILED = False
else:
    try:
        from esmiles import _speedups as _impl  # type: ignore[no-redef]

        COMPILED = True
    except ImportError:
        _impl = _pykernels
        COMPILED = False

fnv1a64 = _impl.fnv1a64
neighborhood_hashes = _impl.neighborhood_hashes
canonical_ranks = _impl.canonical_ranks
build_csr = _impl.build_csr if hasattr(_impl, "build_csr") else _pykernels.build_csr
write_component = getattr(_impl, "write_component", None)

PURE = _pykernels
