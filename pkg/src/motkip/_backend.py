"""Kernel backend selection.

The hot loops ship in two byte-identical flavours: numba-compiled
(:mod:`motkip._kernels_numba`) and pure Python
(:mod:`motkip._kernels_python`).  The compiled flavour is used when numba
imports cleanly; setting ``MOTKIP_NO_NUMBA=1`` in the environment forces
the fallback.  The flag changes nothing but speed: every test vector and
report is identical under either backend, so reproducibility guarantees
elsewhere in the package are unaffected.
"""

from __future__ import annotations

import os

_DISABLE_VALUES = ("1", "true", "yes", "on")


def _numba_disabled() -> bool:
    return os.environ.get("MOTKIP_NO_NUMBA", "").strip().lower() in _DISABLE_VALUES


if _numba_disabled():
    from . import _kernels_python as kernels

    USING_NUMBA = False
else:
    try:
        from . import _kernels_numba as kernels  # type: ignore[no-redef]

        USING_NUMBA = True
    except ImportError:
        from . import _kernels_python as kernels  # type: ignore[no-redef]

        USING_NUMBA = False


def backend_name() -> str:
    return "numba" if USING_NUMBA else "python"


rc4_ksa = kernels.rc4_ksa
rc4_xor = kernels.rc4_xor
michael_core = kernels.michael_core
phase1_mix = kernels.phase1_mix
phase2_mix = kernels.phase2_mix
