"""Hot numeric kernels shared by the FCM and GK solvers.

Each kernel exists twice: a numba ``@njit`` version and a plain numpy
version. The active implementation is picked once at import time; set
``FUZZYEMBED_DISABLE_NUMBA=1`` to force the numpy path (numba missing
also falls back silently). Both modules stay importable so the two
paths can be compared directly in tests and benchmarks.

All kernels are serial. Results are bitwise reproducible for a fixed
backend, but the two backends may differ in the last few ulps.
"""

import os
import types

import numpy as np

__all__ = [
    "BACKEND",
    "numpy_kernels",
    "numba_kernels",
    "sq_distances",
    "memberships_from_sq_distances",
    "weighted_centers",
    "weighted_objective",
]


# -- pure numpy ---------------------------------------------------------------

def _np_sq_distances(X, V):
    # explicit differences: the expanded |x|^2 - 2xv + |v|^2 form loses exact
    # zeros, which the coincidence rule depends on
    diff = X[:, None, :] - V[None, :, :]
    return np.einsum("ncd,ncd->nc", diff, diff)


def _np_memberships(D2, m):
    D2 = np.asarray(D2, dtype=np.float64)
    U = np.empty_like(D2)
    zero = D2 <= 0.0
    hit = zero.any(axis=1)
    if hit.any():
        z = zero[hit].astype(np.float64)
        U[hit] = z / z.sum(axis=1, keepdims=True)
    rest = ~hit
    if rest.any():
        # softmax of -log(d2)/(m-1): same value as the ratio form, no overflow
        # for m close to 1
        L = -np.log(D2[rest]) / (m - 1.0)
        L -= L.max(axis=1, keepdims=True)
        E = np.exp(L)
        U[rest] = E / E.sum(axis=1, keepdims=True)
    return U


def _np_weighted_centers(X, U, m):
    W = U ** m
    mass = W.sum(axis=0)
    num = W.T @ X
    return num, mass


def _np_objective(U, D2, m):
    return float(np.sum((U ** m) * D2))


numpy_kernels = types.SimpleNamespace(
    name="numpy",
    sq_distances=_np_sq_distances,
    memberships_from_sq_distances=_np_memberships,
    weighted_centers=_np_weighted_centers,
    weighted_objective=_np_objective,
)


# -- numba --------------------------------------------------------------------

def _build_numba():
    from numba import njit

    @njit(cache=True)
    def sq_distances(X, V):
        n, d = X.shape
        c = V.shape[0]
        out = np.empty((n, c))
        for k in range(n):
            for i in range(c):
                s = 0.0
                for j in range(d):
                    t = X[k, j] - V[i, j]
                    s += t * t
                out[k, i] = s
        return out

    @njit(cache=True)
    def memberships(D2, m):
        n, c = D2.shape
        U = np.empty((n, c))
        inv = 1.0 / (m - 1.0)
        for k in range(n):
            nzero = 0
            for i in range(c):
                if D2[k, i] <= 0.0:
                    nzero += 1
            if nzero > 0:
                share = 1.0 / nzero
                for i in range(c):
                    U[k, i] = share if D2[k, i] <= 0.0 else 0.0
                continue
            top = -np.inf
            for i in range(c):
                v = -np.log(D2[k, i]) * inv
                U[k, i] = v
                if v > top:
                    top = v
            s = 0.0
            for i in range(c):
                e = np.exp(U[k, i] - top)
                U[k, i] = e
                s += e
            for i in range(c):
                U[k, i] /= s
        return U

    @njit(cache=True)
    def weighted_centers(X, U, m):
        n, d = X.shape
        c = U.shape[1]
        num = np.zeros((c, d))
        mass = np.zeros(c)
        for k in range(n):
            for i in range(c):
                w = U[k, i] ** m
                if w == 0.0:
                    continue
                mass[i] += w
                for j in range(d):
                    num[i, j] += w * X[k, j]
        return num, mass

    @njit(cache=True)
    def objective(U, D2, m):
        n, c = U.shape
        s = 0.0
        for k in range(n):
            for i in range(c):
                s += U[k, i] ** m * D2[k, i]
        return s

    return types.SimpleNamespace(
        name="numba",
        sq_distances=sq_distances,
        memberships_from_sq_distances=memberships,
        weighted_centers=weighted_centers,
        weighted_objective=objective,
    )


try:
    numba_kernels = _build_numba()
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_kernels = None

_disabled = os.environ.get("FUZZYEMBED_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}
_active = numpy_kernels if (_disabled or numba_kernels is None) else numba_kernels

BACKEND = _active.name


def sq_distances(X, V):
    """Squared Euclidean distances, shape ``(n_points, n_centers)``."""
    return _active.sq_distances(np.ascontiguousarray(X, dtype=np.float64),
                                np.ascontiguousarray(V, dtype=np.float64))


def memberships_from_sq_distances(D2, m):
    """Membership update from squared distances.

    Computes ``1 / sum_k (d_ij / d_ik) ** (2 / (m - 1))`` for every point.
    Points at zero distance from one or more centers split their
    membership equally among those centers.
    """
    return _active.memberships_from_sq_distances(
        np.ascontiguousarray(D2, dtype=np.float64), float(m))


def weighted_centers(X, U, m):
    """Return ``(sum_k u_ki^m x_k, sum_k u_ki^m)`` per cluster."""
    return _active.weighted_centers(np.ascontiguousarray(X, dtype=np.float64),
                                    np.ascontiguousarray(U, dtype=np.float64),
                                    float(m))


def weighted_objective(U, D2, m):
    return float(_active.weighted_objective(np.ascontiguousarray(U, dtype=np.float64),
                                            np.ascontiguousarray(D2, dtype=np.float64),
                                            float(m)))
