"""Gustafson-Kessel fuzzy clustering with per-cluster adaptive norms.

Every cluster ``i`` carries a norm matrix ``A_i = (rho_i det C_i)^(1/d) C_i^-1``
built from its fuzzy covariance ``C_i``, so ``det A_i = rho_i`` and the
cluster volume stays fixed while its shape adapts. With fewer members
than dimensions ``C_i`` is singular; it is blended with a scaled identity
before inversion (``cov_reg``). Determinants are handled in the log
domain throughout: in a few hundred dimensions ``det C_i`` underflows
float64 long before the matrix stops being invertible.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from . import _kernels as K
from .core import ClusterModel, DimensionError, SolverError, as_points
from .fcm import FcmConfig, _centers, _check_shapes, _converged, random_memberships

log = logging.getLogger(__name__)

ZERO_TRACE_FLOOR = 1e-9
#: covariances worse conditioned than this count as non-invertible; the
#: default shrinkage keeps the condition number below d / cov_reg
MAX_CONDITION = 1e8
#: consecutive all-fallback iterations tolerated before giving up
MAX_ALL_FALLBACK = 10


class NormMatrixError(np.linalg.LinAlgError):
    """Covariance is not positive definite; no valid norm matrix exists."""


@dataclass(frozen=True)
class FgkConfig(FcmConfig):
    rho: Optional[tuple] = None
    cov_reg: float = 1e-4

    def __post_init__(self):
        super().__post_init__()
        if self.rho is not None:
            rho = tuple(float(r) for r in self.rho)
            if len(rho) != self.c:
                raise ValueError(f"need {self.c} volume constants, got {len(rho)}")
            if not all(np.isfinite(r) and r > 0 for r in rho):
                raise ValueError("volume constants must be positive")
            object.__setattr__(self, "rho", rho)
        if not 0.0 <= self.cov_reg < 1.0:
            raise ValueError(f"cov_reg must lie in [0, 1), got {self.cov_reg}")

    @property
    def volumes(self) -> np.ndarray:
        if self.rho is None:
            return np.ones(self.c)
        return np.asarray(self.rho, dtype=np.float64)


def _check_norm(A, d=None):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"norm matrix must be square, got {A.shape}")
    if d is not None and A.shape[0] != d:
        raise DimensionError(f"norm matrix is {A.shape[0]}x{A.shape[0]}, data has d={d}")
    if not np.all(np.isfinite(A)):
        raise ValueError("norm matrix has non-finite entries")
    if not np.allclose(A, A.T, rtol=0.0, atol=1e-8 * max(1.0, np.abs(A).max())):
        raise ValueError("norm matrix is not symmetric")
    return A


def gk_distance2(x, v, A) -> float:
    """Squared distance ``(x - v)^T A (x - v)`` under norm matrix ``A``."""
    x = np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if x.shape != v.shape or x.ndim != 1:
        raise DimensionError(f"point {x.shape} and center {v.shape} must be matching vectors")
    A = _check_norm(A, x.size)
    r = x - v
    return float(r @ A @ r)


def _covariance(X, w, center):
    R = X - center
    return (R * w[:, None]).T @ R / w.sum()


def fuzzy_covariance(data, memberships, center, i, m) -> np.ndarray:
    """Fuzzy covariance of cluster ``i`` about ``center``.

    ``sum_k u_ik^m (x_k - v)(x_k - v)^T / sum_k u_ik^m``, a ``d x d``
    symmetric positive semidefinite matrix.
    """
    X = as_points(data)
    U = np.asarray(memberships, dtype=np.float64)
    _check_shapes(X, U=U)
    center = np.asarray(center, dtype=np.float64)
    if center.shape != (X.shape[1],):
        raise DimensionError(f"center has shape {center.shape}, expected ({X.shape[1]},)")
    w = U[:, i] ** m
    if not w.sum() > 0:
        raise ValueError(f"cluster {i} has zero membership mass")
    C = _covariance(X, w, center)
    return (C + C.T) / 2


def regularize_covariance(C, gamma) -> np.ndarray:
    """Shrink ``C`` toward ``trace(C)/d * I`` with weight ``gamma``.

    A zero-trace input (all members on the center) becomes
    ``ZERO_TRACE_FLOOR * I``.
    """
    C = np.asarray(C, dtype=np.float64)
    d = C.shape[0]
    scale = np.trace(C) / d
    if not scale > 0:
        return ZERO_TRACE_FLOOR * np.eye(d)
    if gamma == 0:
        return C.copy()
    return (1.0 - gamma) * C + (gamma * scale) * np.eye(d)


def _factor(C, rho):
    """Cholesky factor of ``C`` and the scale ``(rho det C)^(1/d)``."""
    d = C.shape[0]
    try:
        L = np.linalg.cholesky(C)
    except np.linalg.LinAlgError as exc:
        raise NormMatrixError("covariance is not positive definite") from exc
    diag = np.diag(L)
    if not np.all(np.isfinite(diag)) or np.any(diag <= 0):
        raise NormMatrixError("covariance factor is degenerate")
    # Cholesky succeeds well past the point where C^-1 (and so det A)
    # is still accurate
    eig = np.linalg.eigvalsh(C)
    if not eig[0] * MAX_CONDITION >= eig[-1]:
        raise NormMatrixError(f"covariance is ill-conditioned (cond {eig[-1] / eig[0]:.3g})")
    logdet = 2.0 * np.sum(np.log(diag))
    scale = np.exp((np.log(rho) + logdet) / d)
    if not np.isfinite(scale) or scale <= 0:
        raise NormMatrixError(f"volume scale overflow (log det C = {logdet:.3g})")
    return L, scale


def _norm_from_factor(L, scale):
    d = L.shape[0]
    A = scale * linalg.cho_solve((L, True), np.eye(d))
    return (A + A.T) / 2


def norm_matrix(C, rho=1.0) -> np.ndarray:
    """``(rho det C)^(1/d) C^-1``; its determinant equals ``rho``.

    Raises :class:`NormMatrixError` when ``C`` is not positive definite.
    """
    C = np.asarray(C, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise DimensionError(f"covariance must be square, got {C.shape}")
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if not np.all(np.isfinite(C)):
        raise NormMatrixError("covariance has non-finite entries")
    L, scale = _factor(C, rho)
    return _norm_from_factor(L, scale)


def fgk_objective(data, centers, memberships, norm_matrices, m) -> float:
    """Sum of ``u_ik^m (x_k - v_i)^T A_i (x_k - v_i)``."""
    X = as_points(data)
    V = np.asarray(centers, dtype=np.float64)
    U = np.asarray(memberships, dtype=np.float64)
    _check_shapes(X, V, U)
    norms = list(norm_matrices)
    if len(norms) != V.shape[0]:
        raise DimensionError(f"{len(norms)} norm matrices for {V.shape[0]} centers")
    D2 = np.empty_like(U)
    for i, A in enumerate(norms):
        A = _check_norm(A, X.shape[1])
        R = X - V[i]
        D2[:, i] = np.einsum("kj,jl,kl->k", R, A, R)
    return K.weighted_objective(U, D2, m)


def _gk_step(X, U, centers, m, gamma, rho):
    """Norms and squared distances for every cluster; flags fallbacks."""
    n, d = X.shape
    c = centers.shape[0]
    W = U ** m
    D2 = np.empty((n, c))
    norms = np.empty((c, d, d))
    fallback = np.zeros(c, dtype=bool)
    for i in range(c):
        R = X - centers[i]
        w = W[:, i]
        try:
            if not w.sum() > 0:
                raise NormMatrixError("zero membership mass")
            C = regularize_covariance((R * w[:, None]).T @ R / w.sum(), gamma)
            C = (C + C.T) / 2
            L, scale = _factor(C, rho[i])
        except NormMatrixError:
            fallback[i] = True
            norms[i] = np.eye(d)
            D2[:, i] = np.einsum("kj,kj->k", R, R)
            continue
        Y = linalg.solve_triangular(L, R.T, lower=True, check_finite=False)
        D2[:, i] = scale * np.einsum("jk,jk->k", Y, Y)
        norms[i] = _norm_from_factor(L, scale)
    return D2, norms, fallback


def fgk_fit(data, config: FgkConfig, init=None, callback=None) -> ClusterModel:
    """Run Gustafson-Kessel clustering from a seeded random partition.

    Each iteration updates centers (weighted means), regularized fuzzy
    covariances, norm matrices and memberships, in that order. A cluster
    whose covariance cannot be factored uses the identity norm for that
    iteration; the event is counted in ``fallback_events`` and the
    iteration number is listed in ``fallback_iterations``.

    ``callback(t, centers, memberships, objective, norms, fallback_mask)``
    is invoked after every iteration when given.
    """
    X = as_points(data)
    n, d = X.shape
    c, m = config.c, config.m
    if n < c:
        raise ValueError(f"need at least c={c} points, got {n}")
    rho = config.volumes

    if init is None:
        U = random_memberships(n, c, config.seed)
    else:
        U = np.array(init, dtype=np.float64)
        _check_shapes(X, U=U)
        if U.shape[1] != c:
            raise DimensionError(f"initial memberships have {U.shape[1]} columns, expected {c}")

    trace = []
    fallback_events = 0
    fallback_iters = []
    degenerate = 0
    all_failed = 0
    converged = False
    centers = norms = None
    for t in range(1, config.max_iter + 1):
        centers, empty = _centers(X, U, m)
        degenerate += len(empty)
        D2, norms, fallback = _gk_step(X, U, centers, m, config.cov_reg, rho)
        if fallback.any():
            fallback_events += int(fallback.sum())
            fallback_iters.append(t)
            log.debug("iteration %d: identity norm for clusters %s", t, np.flatnonzero(fallback).tolist())
        all_failed = all_failed + 1 if fallback.all() else 0
        if all_failed >= MAX_ALL_FALLBACK:
            raise SolverError(
                f"all clusters on identity-norm fallback for {MAX_ALL_FALLBACK} "
                f"consecutive iterations (seed {config.seed}, iteration {t})")
        U = K.memberships_from_sq_distances(D2, m)
        J = K.weighted_objective(U, D2, m)
        if not np.isfinite(J):
            raise SolverError(f"non-finite objective at iteration {t} (seed {config.seed})")
        trace.append(J)
        if callback is not None:
            callback(t, centers, U, J, norms, fallback)
        if _converged(trace, config.tol):
            converged = True
            break

    return ClusterModel(
        algorithm="fgk",
        centers=centers,
        memberships=U,
        objective_trace=trace,
        iterations=len(trace),
        converged=converged,
        seed=config.seed,
        fuzzifier=m,
        norm_matrices=norms,
        fallback_events=fallback_events,
        degenerate_events=degenerate,
        fallback_iterations=fallback_iters,
    )
