# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled CSR kernels: Gustavson product and sorted-row merge.

Both kernels take raw CSR triplets and return new ones; exact zeros
produced by cancellation are never stored.
"""
import numpy as np
cimport numpy as cnp
from libcpp.vector cimport vector
from libcpp.algorithm cimport sort

cnp.import_array()

ctypedef cnp.int64_t idx_t


def spgemm(Py_ssize_t nrows, Py_ssize_t ncols,
           const idx_t[::1] a_ptr, const idx_t[::1] a_idx, const double[::1] a_val,
           const idx_t[::1] b_ptr, const idx_t[::1] b_idx, const double[::1] b_val):
    cdef:
        Py_ssize_t i, jj, kk, k, j, cnt, lo, hi, c
        double av
        idx_t[::1] marker = np.full(ncols, -1, dtype=np.int64)
        double[::1] acc = np.zeros(ncols, dtype=np.float64)
        idx_t[::1] cols = np.empty(ncols, dtype=np.int64)
        idx_t[::1] out_ptr = np.zeros(nrows + 1, dtype=np.int64)
        vector[idx_t] out_idx
        vector[double] out_val

    with nogil:
        for i in range(nrows):
            cnt = 0
            lo = ncols
            hi = -1
            for jj in range(a_ptr[i], a_ptr[i + 1]):
                k = a_idx[jj]
                av = a_val[jj]
                for kk in range(b_ptr[k], b_ptr[k + 1]):
                    j = b_idx[kk]
                    if marker[j] != i:
                        marker[j] = i
                        acc[j] = av * b_val[kk]
                        cols[cnt] = j
                        cnt += 1
                        if j < lo:
                            lo = j
                        if j > hi:
                            hi = j
                    else:
                        acc[j] += av * b_val[kk]
            if cnt > 0:
                # dense rows: scanning the span beats sorting
                if 4 * cnt >= hi - lo + 1:
                    for j in range(lo, hi + 1):
                        if marker[j] == i and acc[j] != 0.0:
                            out_idx.push_back(j)
                            out_val.push_back(acc[j])
                else:
                    sort(&cols[0], &cols[0] + cnt)
                    for c in range(cnt):
                        j = cols[c]
                        if acc[j] != 0.0:
                            out_idx.push_back(j)
                            out_val.push_back(acc[j])
            out_ptr[i + 1] = out_idx.size()

    return (np.asarray(out_ptr), _to_array_i(out_idx), _to_array_d(out_val))


def spadd(Py_ssize_t nrows, double alpha, double beta,
          const idx_t[::1] a_ptr, const idx_t[::1] a_idx, const double[::1] a_val,
          const idx_t[::1] b_ptr, const idx_t[::1] b_idx, const double[::1] b_val):
    cdef:
        Py_ssize_t i, p, q, pe, qe, n
        idx_t ja, jb
        double v
        Py_ssize_t cap = a_idx.shape[0] + b_idx.shape[0]
        idx_t[::1] out_ptr = np.zeros(nrows + 1, dtype=np.int64)
        idx_t[::1] out_idx = np.empty(cap, dtype=np.int64)
        double[::1] out_val = np.empty(cap, dtype=np.float64)

    n = 0
    with nogil:
        for i in range(nrows):
            p = a_ptr[i]
            pe = a_ptr[i + 1]
            q = b_ptr[i]
            qe = b_ptr[i + 1]
            while p < pe or q < qe:
                if q >= qe or (p < pe and a_idx[p] < b_idx[q]):
                    ja = a_idx[p]
                    v = alpha * a_val[p]
                    p += 1
                elif p >= pe or b_idx[q] < a_idx[p]:
                    ja = b_idx[q]
                    v = beta * b_val[q]
                    q += 1
                else:
                    ja = a_idx[p]
                    v = alpha * a_val[p] + beta * b_val[q]
                    p += 1
                    q += 1
                if v != 0.0:
                    out_idx[n] = ja
                    out_val[n] = v
                    n += 1
            out_ptr[i + 1] = n

    return (np.asarray(out_ptr), np.array(out_idx[:n]), np.array(out_val[:n]))


cdef _to_array_i(vector[idx_t]& v):
    cdef Py_ssize_t n = v.size()
    out = np.empty(n, dtype=np.int64)
    cdef idx_t[::1] view = out
    cdef Py_ssize_t t
    for t in range(n):
        view[t] = v[t]
    return out


cdef _to_array_d(vector[double]& v):
    cdef Py_ssize_t n = v.size()
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] view = out
    cdef Py_ssize_t t
    for t in range(n):
        view[t] = v[t]
    return out
