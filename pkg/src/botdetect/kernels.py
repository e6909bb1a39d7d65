"""Backend selection for the hot loops.

The compiled ``_kernels`` extension is used when it was built; otherwise the
numpy/pure-Python ``_pykernels`` module takes over with identical results.
Set ``BOTDETECT_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os
import string

import numpy as np

from . import _pykernels

ALPHABET = string.ascii_uppercase + string.ascii_lowercase + string.digits + "_"
N_ALPHA = len(ALPHABET)

# byte -> alphabet position, -1 outside the alphabet
CHAR_INDEX = np.full(256, -1, dtype=np.int8)
for _i, _ch in enumerate(ALPHABET):
    CHAR_INDEX[ord(_ch)] = _i

_compiled = None
if not os.environ.get("BOTDETECT_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def _impl(backend):
    if backend is None:
        return _compiled if _compiled is not None else _pykernels
    if backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled
    if backend == "python":
        return _pykernels
    raise ValueError(f"unknown backend {backend!r}")


def available_backends():
    return ["python"] + (["cython"] if _compiled is not None else [])


def bigram_counts(names, backend=None):
    """Return (63x63 int64 counts, number of names dropped for bad characters)."""
    return _impl(backend).bigram_counts(list(names), CHAR_INDEX)


def name_likelihoods(names, log_prob, uniform, backend=None):
    log_prob = np.ascontiguousarray(log_prob, dtype=np.float64)
    return _impl(backend).name_likelihoods(list(names), log_prob, CHAR_INDEX, float(uniform))


def midrank_auc(scores, positive, backend=None):
    scores = np.ascontiguousarray(scores, dtype=np.float64)
    positive = np.ascontiguousarray(positive, dtype=np.uint8)
    return float(_impl(backend).midrank_auc(scores, positive))


def ad_midrank_sum(samples, backend=None):
    """Inner double sum of the tie-corrected k-sample Anderson-Darling statistic."""
    pooled = np.concatenate([np.asarray(s, dtype=np.float64) for s in samples])
    ids = np.concatenate([np.full(len(s), i, dtype=np.intp) for i, s in enumerate(samples)])
    order = np.argsort(pooled, kind="mergesort")
    sizes = np.array([len(s) for s in samples], dtype=np.float64)
    return float(
        _impl(backend).ad_midrank_sum(
            np.ascontiguousarray(pooled[order]), np.ascontiguousarray(ids[order]), sizes
        )
    )
