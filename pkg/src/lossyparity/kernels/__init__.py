"""Hot loops, compiled when the extension is available.

Set ``LOSSYPARITY_PURE_PYTHON=1`` to force the pure-Python versions.
Both backends are importable directly as ``_pykernels`` and ``_ckernels``.
"""

import os

from . import _pykernels

_ext = None
if os.environ.get("LOSSYPARITY_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _ext
    except ImportError:
        _ext = None

_impl = _ext if _ext is not None else _pykernels

BACKEND = _impl.BACKEND
force_layers = _impl.force_layers
bscc_flags = _impl.bscc_flags
classify_profiles = _impl.classify_profiles
embedding_count = _impl.embedding_count
simulate_plays = _impl.simulate_plays


def compiled_available() -> bool:
    return _ext is not None


def backends():
    """Every importable backend module, pure Python first."""
    out = [_pykernels]
    if _ext is not None:
        out.append(_ext)
    else:
        try:
            from . import _ckernels
            out.append(_ckernels)
        except ImportError:
            pass
    return out
