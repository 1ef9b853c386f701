"""Partition coefficient and Xie-Beni validity indices."""

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .core import ClusterModel, DimensionError, as_points


class DegenerateSeparationError(ValueError):
    """No two distinct centers: the Xie-Beni separation term is zero."""


@dataclass(frozen=True)
class ValidityReport:
    fpc: float
    xie_beni: float
    c: int
    n: int
    m: float


def fpc(memberships) -> float:
    """Fuzzy partition coefficient, the mean over points of ``sum_i u_ik^2``.

    1 for a crisp partition, ``1/c`` for the uniform one.
    """
    U = np.asarray(memberships, dtype=np.float64)
    if U.ndim != 2:
        raise DimensionError(f"membership matrix must be 2-D, got {U.shape}")
    return float(np.einsum("ki,ki->", U, U) / U.shape[0])


def min_center_separation(centers) -> float:
    """Smallest squared distance over pairs of different centers."""
    V = np.asarray(centers, dtype=np.float64)
    if V.shape[0] < 2:
        raise DegenerateSeparationError("need at least two centers")
    S = K.sq_distances(V, V)
    S[np.diag_indices_from(S)] = np.inf
    return float(S.min())


def xie_beni(data, centers, memberships, m) -> float:
    """Compactness over separation; lower is better.

    Numerator is ``sum_ik u_ik^m |x_k - v_i|^2``; the denominator is
    ``N`` times the minimum squared distance between two different
    centers. Any pair of coincident centers makes that zero and raises
    :class:`DegenerateSeparationError`.
    """
    X = as_points(data)
    V = np.asarray(centers, dtype=np.float64)
    U = np.asarray(memberships, dtype=np.float64)
    if U.shape != (X.shape[0], V.shape[0]) or V.shape[1] != X.shape[1]:
        raise DimensionError(f"inconsistent shapes: data {X.shape}, centers {V.shape}, memberships {U.shape}")
    sep = min_center_separation(V)
    if not sep > 0.0:
        raise DegenerateSeparationError("two or more centers coincide")
    num = K.weighted_objective(U, K.sq_distances(X, V), m)
    return num / (X.shape[0] * sep)


def validity_report(data, model: ClusterModel) -> ValidityReport:
    X = as_points(data)
    return ValidityReport(
        fpc=fpc(model.memberships),
        xie_beni=xie_beni(X, model.centers, model.memberships, model.fuzzifier),
        c=model.n_clusters,
        n=X.shape[0],
        m=model.fuzzifier,
    )
