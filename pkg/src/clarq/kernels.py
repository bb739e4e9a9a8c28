"""Distance kernels with a compiled core and a NumPy fallback.

The compiled extension (``clarq._ckern``) is built at install time; when it
is unavailable, or when ``CLARQ_KERNELS=numpy`` is set, the pure-NumPy
implementations below are used instead. Both expose identical semantics:
squared L2 distances, deterministic tie behavior left to callers.
"""

from __future__ import annotations

import os

import numpy as np

_FORCE_NUMPY = os.environ.get("CLARQ_KERNELS", "").lower() == "numpy"

try:
    from clarq import _ckern
except ImportError:
    _ckern = None

_USE_COMPILED = _ckern is not None and not _FORCE_NUMPY


def backend() -> str:
    """Name of the active kernel backend: 'compiled' or 'numpy'."""
    return "compiled" if _USE_COMPILED else "numpy"


def sq_dists(q: np.ndarray, mat: np.ndarray) -> np.ndarray:
    """Squared L2 distances from a single query to every row of mat."""
    if _USE_COMPILED:
        out = np.empty(mat.shape[0], dtype=np.float64)
        _ckern.sq_dists(q, mat, out)
        return out
    diff = mat - q
    return np.einsum("ij,ij->i", diff, diff)


def sq_dists_gather(q: np.ndarray, mat: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Squared L2 distances from q to the rows of mat selected by idx."""
    if _USE_COMPILED:
        out = np.empty(idx.shape[0], dtype=np.float64)
        _ckern.sq_dists_gather(q, mat, idx, out)
        return out
    rows = mat.take(idx, axis=0)
    diff = rows - q
    return np.einsum("ij,ij->i", diff, diff)


def assign_nearest(pts: np.ndarray, cents: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-centroid label and squared distance for every point.

    Ties break to the lower centroid index in both backends.
    """
    if _USE_COMPILED:
        labels = np.empty(pts.shape[0], dtype=np.int64)
        dists = np.empty(pts.shape[0], dtype=np.float64)
        _ckern.assign_nearest(pts, cents, labels, dists)
        return labels, dists
    # Chunked to bound the (n, k) temporary.
    n = pts.shape[0]
    labels = np.empty(n, dtype=np.int64)
    dists = np.empty(n, dtype=np.float64)
    step = max(1, 2_000_000 // max(1, cents.shape[0]))
    pn = np.einsum("ij,ij->i", pts, pts)
    cn = np.einsum("ij,ij->i", cents, cents)
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        d2 = pn[lo:hi, None] - 2.0 * pts[lo:hi] @ cents.T + cn[None, :]
        np.maximum(d2, 0.0, out=d2)
        lab = np.argmin(d2, axis=1)
        labels[lo:hi] = lab
        dists[lo:hi] = d2[np.arange(hi - lo), lab]
    return labels, dists


def select_diverse(sub: np.ndarray, anchor_d: np.ndarray, cap: int) -> list:
    """Diversity selection over candidate vectors ranked by anchor distance.

    Returns row indices into `sub`: candidates kept while closer to the
    anchor than to every kept one, backfilled from the skipped in rank order.
    """
    n = sub.shape[0]
    if n == 0:
        return []
    if _USE_COMPILED:
        out = np.empty(max(cap, 1), dtype=np.int64)
        count = _ckern.select_diverse(sub, anchor_d, out, min(cap, n))
        return out[:count].tolist()
    pair = (
        np.einsum("ij,ij->i", sub, sub)[:, None]
        - 2.0 * (sub @ sub.T)
        + np.einsum("ij,ij->i", sub, sub)[None, :]
    ).tolist()
    ad = anchor_d.tolist()
    selected: list[int] = []
    skipped: list[int] = []
    for i in range(n):
        if len(selected) >= cap:
            break
        row = pair[i]
        if any(row[s] < ad[i] for s in selected):
            skipped.append(i)
        else:
            selected.append(i)
    for i in skipped:
        if len(selected) >= cap:
            break
        selected.append(i)
    return selected


def as_f64_c(arr: np.ndarray) -> np.ndarray:
    """Contiguous float64 view/copy, the layout both backends expect."""
    return np.ascontiguousarray(arr, dtype=np.float64)
