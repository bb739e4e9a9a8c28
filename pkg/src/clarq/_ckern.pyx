# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled squared-L2 kernels: the hot inner loops of index build and search."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def sq_dists(double[::1] q, double[:, ::1] mat, double[::1] out):
    """Squared L2 distance from q to every row of mat, written into out."""
    cdef Py_ssize_t n = mat.shape[0]
    cdef Py_ssize_t d = mat.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc, diff
    for i in range(n):
        acc = 0.0
        for j in range(d):
            diff = mat[i, j] - q[j]
            acc += diff * diff
        out[i] = acc


def sq_dists_gather(double[::1] q, double[:, ::1] mat, long[::1] idx,
                    double[::1] out):
    """Squared L2 distance from q to the rows of mat selected by idx."""
    cdef Py_ssize_t n = idx.shape[0]
    cdef Py_ssize_t d = mat.shape[1]
    cdef Py_ssize_t i, j, row
    cdef double acc, diff
    for i in range(n):
        row = idx[i]
        acc = 0.0
        for j in range(d):
            diff = mat[row, j] - q[j]
            acc += diff * diff
        out[i] = acc


def select_diverse(double[:, ::1] sub, double[::1] anchor_d, long[::1] out,
                   long cap):
    """Diversity selection over candidates ranked by anchor distance.

    Keeps candidate i only while it is closer to the anchor than to every
    already-kept candidate, then backfills skipped ones in rank order.
    Writes selected row indices into out; returns the count.
    """
    cdef Py_ssize_t n = sub.shape[0]
    cdef Py_ssize_t d = sub.shape[1]
    cdef Py_ssize_t i, s, j, nsel = 0, nskip = 0
    cdef double acc, diff
    cdef bint keep
    skip_buf = [0] * n  # ranks skipped by the diversity rule, for backfill
    for i in range(n):
        if nsel >= cap:
            break
        keep = True
        for s in range(nsel):
            acc = 0.0
            for j in range(d):
                diff = sub[i, j] - sub[out[s], j]
                acc += diff * diff
            if acc < anchor_d[i]:
                keep = False
                break
        if keep:
            out[nsel] = i
            nsel += 1
        else:
            skip_buf[nskip] = i
            nskip += 1
    for s in range(nskip):
        if nsel >= cap:
            break
        out[nsel] = skip_buf[s]
        nsel += 1
    return nsel


def assign_nearest(double[:, ::1] pts, double[:, ::1] cents,
                   long[::1] labels, double[::1] dists):
    """Nearest-centroid assignment for every point (k-means inner loop).

    Ties go to the lower centroid index so assignment is deterministic.
    """
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t k = cents.shape[0]
    cdef Py_ssize_t d = pts.shape[1]
    cdef Py_ssize_t i, c, j
    cdef double acc, diff, best
    cdef Py_ssize_t best_c
    for i in range(n):
        best = -1.0
        best_c = 0
        for c in range(k):
            acc = 0.0
            for j in range(d):
                diff = pts[i, j] - cents[c, j]
                acc += diff * diff
            if best < 0.0 or acc < best:
                best = acc
                best_c = c
        labels[i] = best_c
        dists[i] = best
