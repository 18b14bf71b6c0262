"""Pure NumPy implementations of the hot kernels.

Same signatures as the compiled ``_speedups`` module. Used when the extension
is not built or when ``CURL_COTRAIN_PURE=1`` is set.
"""
import numpy as np
from scipy.spatial.distance import pdist


def softmax_loss_grad(params, X, y, n_classes, inv_c):
    """Multinomial cross-entropy summed over rows plus ``inv_c/2 * ||W||^2``.

    ``params`` is ``[W.ravel(), b]`` with ``W`` of shape (K, D). ``y`` holds
    0-based class indices. Returns ``(objective, gradient)``.
    """
    n, d = X.shape
    k = n_classes
    W = params[: k * d].reshape(k, d)
    b = params[k * d:]
    f = 0.5 * inv_c * float(np.dot(params[: k * d], params[: k * d]))
    gW = inv_c * W
    gb = np.zeros(k)
    if n:
        Z = X @ W.T + b
        zmax = Z.max(axis=1, keepdims=True)
        E = np.exp(Z - zmax)
        s = E.sum(axis=1, keepdims=True)
        lse = zmax[:, 0] + np.log(s[:, 0])
        rows = np.arange(n)
        f += float(np.sum(lse - Z[rows, y]))
        P = E / s
        P[rows, y] -= 1.0
        gW = gW + P.T @ X
        gb = P.sum(axis=0)
    return f, np.concatenate([gW.ravel(), gb])


def seed_diversity(X, seeds):
    """Sum of pairwise Euclidean distances among the rows ``X[seeds]``."""
    if len(seeds) < 2:
        return 0.0
    return float(pdist(X[np.asarray(seeds)]).sum())


def expand_prototypes(X, seeds, n):
    """Grow each seed into a prototype of ``n`` rows.

    Prototypes are filled in seed order; each takes the ``n - 1`` nearest rows
    (squared Euclidean, ties to the lower index) that are neither seeds nor
    already taken. Returns an (r, n) index array whose first column is the seeds.
    """
    seeds = np.asarray(seeds, dtype=np.int64)
    r = len(seeds)
    out = np.empty((r, n), dtype=np.int64)
    out[:, 0] = seeds
    if n == 1:
        return out
    taken = np.zeros(X.shape[0], dtype=bool)
    taken[seeds] = True
    for j, s in enumerate(seeds):
        diff = X - X[s]
        dist = np.einsum("ij,ij->i", diff, diff)
        dist[taken] = np.inf
        pick = np.argsort(dist, kind="stable")[: n - 1]
        out[j, 1:] = pick
        taken[pick] = True
    return out
