"""Shared data types, partition checks and hard assignment."""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

ROW_SUM_ATOL = 1e-9


class DimensionError(ValueError):
    """Array shapes do not line up."""


class SolverError(RuntimeError):
    """A clustering run could not complete (blow-up, persistent degeneracy)."""


@dataclass(frozen=True)
class Dataset:
    """Labelled points: one row of ``vectors`` per entry of ``labels``."""

    labels: tuple
    vectors: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        vectors = np.array(self.vectors, dtype=np.float64)
        if vectors.ndim != 2:
            raise DimensionError(f"vectors must be 2-D, got shape {vectors.shape}")
        n, d = vectors.shape
        if n < 1 or d < 1:
            raise DimensionError("dataset needs at least one point and one dimension")
        if len(labels) != n:
            raise DimensionError(f"{len(labels)} labels for {n} vectors")
        if len(set(labels)) != n:
            raise ValueError("labels must be unique")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("vectors contain non-finite coordinates")
        vectors.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "vectors", vectors)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def index(self, label) -> int:
        return self.labels.index(label)


@dataclass
class ClusterModel:
    """Result of a fuzzy clustering run.

    ``memberships`` is the ``(N, c)`` partition matrix, ``centers`` is
    ``(c, d)``. ``norm_matrices`` holds the per-cluster GK norm matrices
    and is ``None`` for FCM. ``fallback_events`` counts (cluster,
    iteration) pairs where GK fell back to the identity norm;
    ``degenerate_events`` counts empty-cluster reseeds.
    """

    algorithm: str
    centers: np.ndarray
    memberships: np.ndarray
    objective_trace: list
    iterations: int
    converged: bool
    seed: int
    fuzzifier: float
    norm_matrices: Optional[np.ndarray] = None
    fallback_events: int = 0
    degenerate_events: int = 0
    fallback_iterations: list = field(default_factory=list)

    @property
    def n_clusters(self) -> int:
        return self.centers.shape[0]

    def harden(self) -> np.ndarray:
        return harden(self.memberships)


@dataclass(frozen=True)
class MembershipViolation:
    row: int
    column: Optional[int]
    reason: str

    def __str__(self):
        where = f"row {self.row}" if self.column is None else f"entry ({self.row}, {self.column})"
        return f"{where}: {self.reason}"


def validate_membership(U, atol: float = ROW_SUM_ATOL) -> Optional[MembershipViolation]:
    """Check that ``U`` is a valid fuzzy partition matrix.

    Returns ``None`` when every entry lies in [0, 1] and every row sums
    to one within ``atol``; otherwise a :class:`MembershipViolation`
    describing the first offending row or entry.
    """
    U = np.asarray(U, dtype=np.float64)
    if U.ndim != 2 or U.shape[0] < 1 or U.shape[1] < 1:
        raise DimensionError(f"membership matrix must be 2-D and non-empty, got {U.shape}")
    for k, row in enumerate(U):
        bad = np.flatnonzero(~np.isfinite(row) | (row < 0.0) | (row > 1.0))
        if bad.size:
            j = int(bad[0])
            return MembershipViolation(k, j, f"value {row[j]!r} outside [0, 1]")
        s = row.sum()
        if abs(s - 1.0) > atol:
            return MembershipViolation(k, None, f"row sums to {s!r}")
    return None


def is_valid_membership(U, atol: float = ROW_SUM_ATOL) -> bool:
    return validate_membership(U, atol) is None


def harden(U) -> np.ndarray:
    """Crisp assignment by per-row argmax; ties go to the lowest index."""
    U = np.asarray(U)
    if U.ndim != 2:
        raise DimensionError(f"membership matrix must be 2-D, got {U.shape}")
    return np.argmax(U, axis=1)


def crisp_matrix(assignment: Sequence[int], n_clusters: int) -> np.ndarray:
    """Indicator membership matrix for a hard assignment."""
    a = np.asarray(assignment, dtype=np.intp)
    if a.size and (a.min() < 0 or a.max() >= n_clusters):
        raise ValueError("cluster index out of range")
    U = np.zeros((a.size, n_clusters))
    U[np.arange(a.size), a] = 1.0
    return U


def check_fuzzifier(m: float):
    if not np.isfinite(m) or m <= 1.0:
        raise ValueError(f"fuzzifier must be > 1, got {m}")


def as_points(data) -> np.ndarray:
    """Accept a :class:`Dataset` or a raw ``(N, d)`` array."""
    if isinstance(data, Dataset):
        return data.vectors
    X = np.asarray(data, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"data must be 2-D, got shape {X.shape}")
    return X
