"""Gold-pair co-clustering, membership census, word reports and run statistics."""

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np
from scipy import stats

from .core import ClusterModel, Dataset, SolverError, harden
from .corpus import ScoredWordPair
from .fcm import FcmConfig, fcm_fit
from .fgk import FgkConfig, fgk_fit
from .validity import fpc, xie_beni


@dataclass(frozen=True)
class GoldPairSet:
    pairs: tuple
    threshold: float

    def __len__(self):
        return len(self.pairs)


def extract_gold_pairs(pairs: Sequence[ScoredWordPair], threshold: float = 7.5,
                       unique: bool = False) -> GoldPairSet:
    """Pairs scoring at least ``threshold`` (inclusive) on the 0-10 scale.

    With ``unique=True`` repeated pairs (same two words, either order)
    are kept once, at their first occurrence.
    """
    if not 0.0 <= threshold <= 10.0:
        raise ValueError(f"threshold {threshold} outside [0, 10]")
    kept = [p for p in pairs if p.score >= threshold]
    if unique:
        seen = set()
        dedup = []
        for p in kept:
            key = frozenset((p.word_a, p.word_b))
            if key not in seen:
                seen.add(key)
                dedup.append(p)
        kept = dedup
    return GoldPairSet(tuple(kept), float(threshold))


@dataclass
class CoClusterCount:
    """Gold pairs sharing a hardened cluster.

    ``per_cluster[i]`` is the number of co-clustered pairs inside cluster
    ``i``; ``histogram[j]`` is the number of clusters holding exactly
    ``j`` pairs. ``excluded`` lists gold pairs with a word not in the
    dataset; they are not part of ``n_considered``.
    """

    count: int
    n_considered: int
    per_cluster: List[int]
    histogram: List[int]
    excluded: List[ScoredWordPair] = field(default_factory=list)


def count_cocluster_pairs(assignment, labels: Sequence[str], gold: GoldPairSet,
                          n_clusters: int = None) -> CoClusterCount:
    assignment = np.asarray(assignment, dtype=np.intp)
    if assignment.shape != (len(labels),):
        raise ValueError(f"{assignment.shape[0]} assignments for {len(labels)} labels")
    if n_clusters is None:
        n_clusters = int(assignment.max()) + 1 if assignment.size else 0
    pos = {w: i for i, w in enumerate(labels)}
    per_cluster = [0] * n_clusters
    excluded = []
    considered = 0
    for p in gold.pairs:
        if p.word_a not in pos or p.word_b not in pos:
            excluded.append(p)
            continue
        considered += 1
        a, b = assignment[pos[p.word_a]], assignment[pos[p.word_b]]
        if a == b:
            per_cluster[a] += 1
    histogram = [0] * (max(per_cluster, default=0) + 1)
    for k in per_cluster:
        histogram[k] += 1
    return CoClusterCount(sum(per_cluster), considered, per_cluster, histogram, excluded)


def membership_confidence_census(memberships, labels: Sequence[str], threshold: float = 0.75,
                                 at_most: bool = False) -> Tuple[int, List[str]]:
    """Words whose largest membership is ``>= threshold``.

    ``at_most=True`` counts the complementary soft words instead, those
    whose largest membership is ``<= threshold``.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold {threshold} outside (0, 1]")
    top = np.asarray(memberships, dtype=np.float64).max(axis=1)
    mask = top <= threshold if at_most else top >= threshold
    words = [w for w, hit in zip(labels, mask) if hit]
    return len(words), words


@dataclass(frozen=True)
class WordMembershipReport:
    word: str
    degrees: tuple  # (cluster, degree), strongest first
    max_degree: float
    clusters: Dict[int, List[str]]  # touched cluster -> hardened members


class UnknownWordError(KeyError):
    def __init__(self, word, candidates=()):
        self.word = word
        self.candidates = list(candidates)
        msg = f"{word!r} is not in the dataset"
        if self.candidates:
            msg += "; candidates: " + ", ".join(self.candidates)
        super().__init__(msg)

    def __str__(self):
        return self.args[0]


def _prefix_candidates(word, labels, limit=10):
    for n in range(len(word), 0, -1):
        hits = sorted(w for w in labels if w.startswith(word[:n]))
        if hits:
            return hits[:limit]
    return []


def word_report(model: ClusterModel, labels: Sequence[str], word: str,
                min_degree: float = 0.10) -> WordMembershipReport:
    """Degrees of ``word`` in every cluster plus the members of the
    clusters it reaches at ``min_degree`` or more."""
    labels = list(labels)
    try:
        k = labels.index(word)
    except ValueError:
        raise UnknownWordError(word, _prefix_candidates(word, labels)) from None
    row = model.memberships[k]
    order = sorted(range(row.size), key=lambda i: (-row[i], i))
    degrees = tuple((i, float(row[i])) for i in order)
    hard = harden(model.memberships)
    touched = [i for i in order if row[i] >= min_degree]
    clusters = {i: [labels[j] for j in np.flatnonzero(hard == i)] for i in touched}
    return WordMembershipReport(word, degrees, float(row.max()), clusters)


@dataclass(frozen=True)
class RunStats:
    per_seed_values: tuple
    seeds: tuple
    mean: float
    std: float  # sample (ddof=1); 0 for a single run

    @property
    def n_runs(self) -> int:
        return len(self.per_seed_values)


def summarize(values: Sequence[float], seeds: Sequence[int] = ()) -> RunStats:
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("no values to summarize")
    std = float(v.std(ddof=1)) if v.size > 1 else 0.0
    return RunStats(tuple(float(x) for x in v), tuple(seeds), float(v.mean()), std)


def fit(data, config):
    """Dispatch on the config type."""
    if isinstance(config, FgkConfig):
        return fgk_fit(data, config)
    if isinstance(config, FcmConfig):
        return fcm_fit(data, config)
    raise TypeError(f"unsupported config {type(config).__name__}")


def fpc_metric(model, data):
    return fpc(model.memberships)


def xie_beni_metric(model, data):
    return xie_beni(data, model.centers, model.memberships, model.fuzzifier)


def cocluster_metric(gold: GoldPairSet) -> Callable:
    def metric(model, data: Dataset):
        return count_cocluster_pairs(model.harden(), data.labels, gold, model.n_clusters).count
    metric.__name__ = "cocluster"
    return metric


def repeated_runs(data, config, n_runs: int, seed_base: int, metric: Callable,
                  on_model: Callable = None) -> RunStats:
    """Fit with seeds ``seed_base .. seed_base + n_runs - 1`` and summarize ``metric``.

    ``metric(model, data)`` returns a number per run. ``on_model(seed,
    model)``, when given, sees every fitted model (used to collect extra
    per-run output without refitting).
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    seeds = list(range(seed_base, seed_base + n_runs))
    values = []
    for s in seeds:
        try:
            model = fit(data, replace(config, seed=s))
        except SolverError as exc:
            raise SolverError(f"seed {s}: {exc}") from exc
        if on_model is not None:
            on_model(s, model)
        values.append(metric(model, data))
    return summarize(values, seeds)


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p_value: float


def welch_t_test(sample_a: Sequence[float], sample_b: Sequence[float]) -> WelchResult:
    """Two-sided Welch t-test (unequal variances)."""
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two values")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    se2 = va + vb
    if se2 == 0:
        raise ValueError("both samples have zero variance")
    diff = a.mean() - b.mean()
    t = diff / math.sqrt(se2)
    df = se2 ** 2 / (va ** 2 / (a.size - 1) + vb ** 2 / (b.size - 1))
    p = 2.0 * stats.t.sf(abs(t), df)
    return WelchResult(float(t), float(df), float(min(1.0, p)))
