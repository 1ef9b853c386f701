"""Fuzzy C-means by alternating optimization."""

import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .core import ClusterModel, DimensionError, SolverError, as_points, check_fuzzifier

log = logging.getLogger(__name__)

#: membership mass below which a cluster counts as empty
DEGENERATE_MASS = 1e-12


@dataclass(frozen=True)
class FcmConfig:
    c: int
    m: float = 1.1
    tol: float = 1e-6
    max_iter: int = 300
    seed: int = 0

    def __post_init__(self):
        if int(self.c) != self.c or self.c < 2:
            raise ValueError(f"cluster count must be an integer >= 2, got {self.c}")
        check_fuzzifier(self.m)
        if not self.tol > 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter}")


def random_memberships(n, c, seed):
    """Rows drawn uniformly from the probability simplex."""
    rng = np.random.default_rng(seed)
    return rng.dirichlet(np.ones(c), size=n)


def _check_shapes(X, centers=None, U=None):
    if centers is not None and centers.shape[1] != X.shape[1]:
        raise DimensionError(f"centers have {centers.shape[1]} coordinates, data has {X.shape[1]}")
    if U is not None:
        if U.shape[0] != X.shape[0]:
            raise DimensionError(f"memberships have {U.shape[0]} rows, data has {X.shape[0]}")
        if centers is not None and U.shape[1] != centers.shape[0]:
            raise DimensionError(f"memberships have {U.shape[1]} columns for {centers.shape[0]} centers")


def fcm_objective(data, centers, memberships, m) -> float:
    """Sum of ``u_ij^m * |x_i - c_j|^2`` over points and clusters."""
    X = as_points(data)
    V = np.asarray(centers, dtype=np.float64)
    U = np.asarray(memberships, dtype=np.float64)
    _check_shapes(X, V, U)
    return K.weighted_objective(U, K.sq_distances(X, V), m)


def _reseed(X, centers, empty):
    live = [i for i in range(centers.shape[0]) if i not in set(empty)]
    for i in empty:
        # farthest point from the surviving centers
        gaps = K.sq_distances(X, centers[live]).min(axis=1)
        centers[i] = X[int(np.argmax(gaps))]
        live.append(i)
    return centers


def _centers(X, U, m):
    num, mass = K.weighted_centers(X, U, m)
    empty = [int(i) for i in np.flatnonzero(mass < DEGENERATE_MASS)]
    centers = np.empty_like(num)
    ok = mass >= DEGENERATE_MASS
    centers[ok] = num[ok] / mass[ok, None]
    if empty:
        if len(empty) == len(mass):
            raise SolverError("every cluster lost its membership mass")
        centers = _reseed(X, centers, empty)
    return centers, empty


def update_centers(data, memberships, m) -> np.ndarray:
    """Membership-weighted means, weights ``u_ij^m``.

    A cluster whose weight mass falls below ``DEGENERATE_MASS`` is
    re-seeded at the data point farthest from the other centers.
    """
    X = as_points(data)
    U = np.asarray(memberships, dtype=np.float64)
    _check_shapes(X, U=U)
    centers, empty = _centers(X, U, m)
    if empty:
        log.info("re-seeded empty clusters %s", empty)
    return centers


def update_memberships(data, centers, m) -> np.ndarray:
    X = as_points(data)
    V = np.asarray(centers, dtype=np.float64)
    _check_shapes(X, V)
    if not np.all(np.isfinite(V)):
        raise ValueError("centers contain non-finite values")
    return K.memberships_from_sq_distances(K.sq_distances(X, V), m)


def _converged(trace, tol):
    if len(trace) < 2:
        return False
    return abs(trace[-1] - trace[-2]) < tol * max(1.0, abs(trace[-1]))


def fcm_fit(data, config: FcmConfig, init=None, callback=None) -> ClusterModel:
    """Run fuzzy C-means from a seeded random partition.

    Parameters
    ----------
    data : Dataset or array of shape (N, d)
    config : FcmConfig
    init : array of shape (N, c), optional
        Initial membership matrix. Overrides the seeded random start.
    callback : callable, optional
        Called after every iteration as ``callback(t, centers, memberships,
        objective)``.

    Returns
    -------
    ClusterModel
    """
    X = as_points(data)
    n = X.shape[0]
    c, m = config.c, config.m
    if n < c:
        raise ValueError(f"need at least c={c} points, got {n}")

    if init is None:
        U = random_memberships(n, c, config.seed)
    else:
        U = np.array(init, dtype=np.float64)
        _check_shapes(X, U=U)
        if U.shape[1] != c:
            raise DimensionError(f"initial memberships have {U.shape[1]} columns, expected {c}")

    trace = []
    degenerate = 0
    converged = False
    centers = None
    for t in range(1, config.max_iter + 1):
        centers, empty = _centers(X, U, m)
        degenerate += len(empty)
        D2 = K.sq_distances(X, centers)
        U = K.memberships_from_sq_distances(D2, m)
        J = K.weighted_objective(U, D2, m)
        if not np.isfinite(J):
            raise SolverError(f"non-finite objective at iteration {t} (seed {config.seed})")
        trace.append(J)
        if callback is not None:
            callback(t, centers, U, J)
        if _converged(trace, config.tol):
            converged = True
            break

    return ClusterModel(
        algorithm="fcm",
        centers=centers,
        memberships=U,
        objective_trace=trace,
        iterations=len(trace),
        converged=converged,
        seed=config.seed,
        fuzzifier=m,
        degenerate_events=degenerate,
    )
