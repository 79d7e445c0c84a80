"""Kernel backend selection: compiled extension if built, else pure Python."""
from . import _pykernels

try:
    from . import _ckernels as _active
except ImportError:  # extension not built
    _active = _pykernels

BACKEND = _active.BACKEND
gf2_rank = _active.gf2_rank
uf_merge_count = _active.uf_merge_count


def available_backends():
    """Map of backend name to kernel module, for tests and benchmarks."""
    backends = {"python": _pykernels}
    if _active is not _pykernels:
        backends["compiled"] = _active
    return backends
