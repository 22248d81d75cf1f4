"""Deterministic seed fan-out.

Every stage of an experiment (split, folds, trials, ensemble members) gets
its own RNG stream derived from the master seed by hashing
``master:tag:index``. Streams are therefore independent of scheduling and
stable across runs, platforms, and backend choice.
"""

import hashlib

_MASK63 = (1 << 63) - 1


def derive_seed(master: int, tag: str, index: int = 0) -> int:
    """Derive a 63-bit child seed from (master, tag, index)."""
    digest = hashlib.sha256(f"{master}:{tag}:{index}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little") & _MASK63
