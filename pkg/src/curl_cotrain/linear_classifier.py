"""L2-regularised multinomial logistic regression.

Objective (liblinear convention, biases unpenalised)::

    sum_i [logsumexp(W x_i + b) - (W x_i + b)[y_i]] + ||W||^2 / (2 C)

Labels are 1-based at this interface. Training is full-batch L-BFGS with a
line search, which is deterministic for fixed inputs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import kernels


@dataclass(frozen=True)
class LogRegConfig:
    c_inverse_reg: float = 15.0
    tol: float = 1e-8
    max_iters: int = 500

    def __post_init__(self):
        if not self.c_inverse_reg > 0:
            raise ValueError("c_inverse_reg must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True, eq=False)
class ProbClassifier:
    weights: np.ndarray
    biases: np.ndarray
    n_iter: int = 0
    objective: float = float("nan")
    objective_trace: tuple = field(default=(), repr=False)

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        b = np.ascontiguousarray(self.biases, dtype=np.float64)
        if w.ndim != 2 or b.shape != (w.shape[0],):
            raise ValueError("weights must be (K, D) and biases (K,)")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "biases", b)

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def input_dim(self) -> int:
        return self.weights.shape[1]

    def decision_function(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.input_dim:
            raise ValueError(f"expected inputs of length {self.input_dim}, got {X.shape[-1]}")
        return X @ self.weights.T + self.biases

    def predict_proba(self, X):
        """Softmax class probabilities for one vector (K,) or a batch (N, K)."""
        return softmax(self.decision_function(X))

    def predict(self, X):
        """1-based argmax class; ties go to the smaller index."""
        return np.argmax(self.predict_proba(X), axis=-1) + 1


def softmax(Z):
    Z = np.asarray(Z, dtype=np.float64)
    E = np.exp(Z - Z.max(axis=-1, keepdims=True))
    return E / E.sum(axis=-1, keepdims=True)


def loss_and_gradient(params, X, y, c_inverse_reg, n_classes=None):
    """Objective and gradient at the flat parameter vector ``[W.ravel(), b]``.

    ``y`` is 1-based. ``n_classes`` defaults to ``max(y)``; it is required when
    ``X`` has no rows.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    params = np.asarray(params, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(params))):
        raise ValueError("non-finite input")
    if n_classes is None:
        if len(y) == 0:
            raise ValueError("n_classes is required for empty data")
        n_classes = int(y.max())
    if len(y) != X.shape[0]:
        raise ValueError("X and y disagree on the number of samples")
    if len(y) and (y.min() < 1 or y.max() > n_classes):
        raise ValueError(f"labels must lie in 1..{n_classes}")
    if params.shape != (n_classes * (X.shape[1] + 1),):
        raise ValueError("parameter vector has the wrong length")
    return kernels.softmax_loss_grad(params, X, y - 1, n_classes, 1.0 / c_inverse_reg)


def train(X, y, config: LogRegConfig | None = None, seed: int = 0, n_classes=None) -> ProbClassifier:
    """Fit on rows ``X`` with 1-based labels ``y``.

    ``seed`` is accepted for interface symmetry; the solver starts from zero
    and uses no randomness. ``n_classes`` defaults to ``max(y)``.
    """
    config = config or LogRegConfig()
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or len(y) != X.shape[0]:
        raise ValueError("X must be (N, D) with one label per row")
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite input")
    if len(np.unique(y)) < 2:
        raise ValueError("training needs at least two distinct classes")
    k = int(n_classes or y.max())
    if y.min() < 1 or y.max() > k:
        raise ValueError(f"labels must lie in 1..{k}")
    d = X.shape[1]
    y0 = y - 1
    inv_c = 1.0 / config.c_inverse_reg

    last = {}

    def fun(p):
        f, g = kernels.softmax_loss_grad(p, X, y0, k, inv_c)
        last["x"], last["f"] = p.copy(), f
        return f, g

    x0 = np.zeros(k * (d + 1))
    trace = [fun(x0)[0]]

    def record(xk):
        # the accepted iterate is normally the last point evaluated
        trace.append(last["f"] if np.array_equal(xk, last["x"]) else fun(xk)[0])

    res = minimize(
        fun,
        x0,
        jac=True,
        method="L-BFGS-B",
        callback=record,
        options={"maxiter": config.max_iters, "ftol": config.tol, "gtol": 1e-12, "maxcor": 20},
    )
    p = res.x
    return ProbClassifier(
        weights=p[: k * d].reshape(k, d),
        biases=p[k * d:],
        n_iter=int(res.nit),
        objective=float(res.fun),
        objective_trace=tuple(trace),
    )
