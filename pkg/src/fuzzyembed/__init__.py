"""Fuzzy C-means and Gustafson-Kessel clustering of word embeddings."""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .core import (ClusterModel, Dataset, DimensionError, MembershipViolation, SolverError,
                   crisp_matrix, harden, is_valid_membership, validate_membership)
from .corpus import (CorpusFormatError, EmbeddingTable, ScoredWordPair, build_dataset,
                     dump_embeddings, load_embeddings, load_embeddings_file, load_wordsim,
                     load_wordsim_file, pair_vocabulary)
from .evaluation import (CoClusterCount, GoldPairSet, RunStats, UnknownWordError, WelchResult,
                         WordMembershipReport, cocluster_metric, count_cocluster_pairs,
                         extract_gold_pairs, membership_confidence_census, repeated_runs,
                         welch_t_test, word_report)
from .fcm import FcmConfig, fcm_fit, fcm_objective, update_centers, update_memberships
from .fgk import (FgkConfig, NormMatrixError, fgk_fit, fgk_objective, fuzzy_covariance,
                  gk_distance2, norm_matrix, regularize_covariance)
from .validity import DegenerateSeparationError, ValidityReport, fpc, validity_report, xie_beni
