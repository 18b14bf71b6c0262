# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; see ``_kernels_py`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, INFINITY
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()


def softmax_loss_grad(const double[::1] params, const double[:, ::1] X,
                      const long long[::1] y, Py_ssize_t n_classes, double inv_c):
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], k = n_classes
    cdef Py_ssize_t i, j, c, off_b = k * d
    cdef cnp.ndarray[cnp.float64_t, ndim=1] grad_arr = np.empty(k * d + k)
    cdef double[::1] grad = grad_arr
    cdef double[:, ::1] Z = np.empty((n, k))
    cdef double f = 0.0, zmax, zy, s, w
    cdef int bm, bn, bk, lda, ldb, ldc
    cdef double one = 1.0, zero = 0.0
    cdef char tr = b'T', nt = b'N'

    if y.shape[0] != n:
        raise ValueError("y length does not match X rows")
    if params.shape[0] != k * d + k:
        raise ValueError("parameter vector has wrong length")

    with nogil:
        for j in range(k * d):
            w = params[j]
            f += w * w
            grad[j] = inv_c * w
        f *= 0.5 * inv_c
        for c in range(k):
            grad[off_b + c] = 0.0
    if n == 0:
        return f, grad_arr
    if d == 0:
        Z[:, :] = 0.0

    with nogil:
        # logits: Z = X W^T (row-major), i.e. column-major Z^T = W X^T
        bm, bn, bk, lda, ldb, ldc = k, n, d, d, d, k
        if d > 0:
            dgemm(&tr, &nt, &bm, &bn, &bk, &one, <double*>&params[0], &lda,
                  <double*>&X[0, 0], &ldb, &zero, &Z[0, 0], &ldc)

        # softmax in place: row i of Z becomes p_i - e_{y_i}
        for i in range(n):
            zmax = -INFINITY
            for c in range(k):
                Z[i, c] += params[off_b + c]
                if Z[i, c] > zmax:
                    zmax = Z[i, c]
            zy = Z[i, y[i]]
            s = 0.0
            for c in range(k):
                Z[i, c] = exp(Z[i, c] - zmax)
                s += Z[i, c]
            f += zmax + log(s) - zy
            for c in range(k):
                Z[i, c] /= s
                grad[off_b + c] += Z[i, c]
            Z[i, y[i]] -= 1.0
            grad[off_b + y[i]] -= 1.0

        # grad_W += (P - Y)^T X, i.e. column-major grad_W^T += X^T (P - Y)
        bm, bn, bk, lda, ldb, ldc = d, k, n, d, k, d
        if d > 0:
            dgemm(&nt, &tr, &bm, &bn, &bk, &one, <double*>&X[0, 0], &lda,
                  &Z[0, 0], &ldb, &one, &grad[0], &ldc)
    return f, grad_arr


def seed_diversity(const double[:, ::1] X, const long long[::1] seeds):
    cdef Py_ssize_t r = seeds.shape[0], d = X.shape[1]
    cdef Py_ssize_t a, b, j
    cdef double total = 0.0, acc, t
    with nogil:
        for a in range(r):
            for b in range(a + 1, r):
                acc = 0.0
                for j in range(d):
                    t = X[seeds[a], j] - X[seeds[b], j]
                    acc += t * t
                total += sqrt(acc)
    return total


def expand_prototypes(const double[:, ::1] X, const long long[::1] seeds, Py_ssize_t n):
    cdef Py_ssize_t N = X.shape[0], d = X.shape[1], r = seeds.shape[0]
    cdef Py_ssize_t i, j, q, c, best
    cdef double acc, t, bestd
    out_arr = np.empty((r, n), dtype=np.int64)
    cdef long long[:, ::1] out = out_arr
    cdef unsigned char[::1] taken = np.zeros(N, dtype=np.uint8)
    cdef double[::1] dist = np.empty(N)
    cdef long long s

    for j in range(r):
        out[j, 0] = seeds[j]
    if n == 1:
        return out_arr
    with nogil:
        for j in range(r):
            taken[seeds[j]] = 1
        for j in range(r):
            s = seeds[j]
            for i in range(N):
                if taken[i]:
                    continue
                acc = 0.0
                for c in range(d):
                    t = X[i, c] - X[s, c]
                    acc += t * t
                dist[i] = acc
            for q in range(1, n):
                best = -1
                bestd = INFINITY
                for i in range(N):
                    if not taken[i] and (best < 0 or dist[i] < bestd):
                        best = i
                        bestd = dist[i]
                out[j, q] = best
                taken[best] = 1
    return out_arr
