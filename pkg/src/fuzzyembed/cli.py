"""Command-line harness: ``fuzzyembed {cluster,pairs,word,compare}``.

Every command writes one JSON document (to ``--out`` or stdout) that
embeds the fully resolved configuration. Settings resolve as
defaults < ``--config`` JSON file < command-line flags.

Exit status: 0 success, 1 runtime failure (I/O, parsing, solver abort),
2 usage or configuration error.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .core import SolverError
from .corpus import (CorpusFormatError, build_dataset, load_embeddings_file,
                     load_wordsim_file, pair_vocabulary)
from .evaluation import (UnknownWordError, _prefix_candidates, cocluster_metric,
                         count_cocluster_pairs, extract_gold_pairs, fit,
                         membership_confidence_census, repeated_runs, summarize,
                         welch_t_test, word_report)
from .fcm import FcmConfig
from .fgk import FgkConfig
from .validity import DegenerateSeparationError, fpc, xie_beni

log = logging.getLogger("fuzzyembed")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "algorithm": "fcm",
    "embeddings_path": None,
    "wordsim_path": None,
    "dims": None,
    "c_list": [10, 15, 20, 25, 30, 40, 50],
    "m": 1.1,
    "tol": 1e-6,
    "max_iter": 300,
    "n_runs": 10,
    "seed_base": 0,
    "gold_threshold": 7.5,
    "confidence_threshold": 0.75,
    "cov_reg": 1e-4,
    "output_path": None,
}

# flag dest -> config key
FLAG_KEYS = {
    "algo": "algorithm",
    "embeddings": "embeddings_path",
    "wordsim": "wordsim_path",
    "dims": "dims",
    "clusters": "c_list",
    "m": "m",
    "tol": "tol",
    "max_iter": "max_iter",
    "runs": "n_runs",
    "seed": "seed_base",
    "gold_threshold": "gold_threshold",
    "confidence_threshold": "confidence_threshold",
    "cov_reg": "cov_reg",
    "out": "output_path",
}


class UsageError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage, exc):
        self.stage = stage
        super().__init__(f"{stage}: {exc}")


def _cluster_list(text):
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list of integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty cluster list")
    return values


def resolve_config(args) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                from_file = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file {args.config}: {exc}")
        unknown = set(from_file) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(from_file)
    for flag, key in FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None:
            cfg[key] = value
    _check_config(cfg)
    return cfg


def _check_config(cfg):
    if cfg["algorithm"] not in ("fcm", "fgk"):
        raise UsageError(f"unknown algorithm {cfg['algorithm']!r}")
    for key, flag in (("embeddings_path", "--embeddings"), ("wordsim_path", "--wordsim")):
        if not cfg[key]:
            raise UsageError(f"no input file given ({flag})")
    c_list = cfg["c_list"]
    if not isinstance(c_list, list) or not c_list or any(int(c) != c or c < 2 for c in c_list):
        raise UsageError(f"cluster counts must be a non-empty list of integers >= 2, got {c_list}")
    if not 0.0 <= cfg["gold_threshold"] <= 10.0:
        raise UsageError("gold threshold must lie in [0, 10]")
    if not 0.0 < cfg["confidence_threshold"] <= 1.0:
        raise UsageError("confidence threshold must lie in (0, 1]")
    if int(cfg["n_runs"]) != cfg["n_runs"] or cfg["n_runs"] < 1:
        raise UsageError("runs must be a positive integer")
    try:
        solver_config(cfg, c_list[0], cfg["seed_base"])
    except ValueError as exc:
        raise UsageError(str(exc))


def solver_config(cfg, c, seed):
    common = dict(c=c, m=cfg["m"], tol=cfg["tol"], max_iter=cfg["max_iter"], seed=seed)
    if cfg["algorithm"] == "fgk":
        return FgkConfig(**common, cov_reg=cfg["cov_reg"])
    return FcmConfig(**common)


@dataclass
class Inputs:
    data: object
    pairs: list
    missing: list


def load_inputs(cfg) -> Inputs:
    try:
        pairs = load_wordsim_file(cfg["wordsim_path"])
    except (OSError, CorpusFormatError, UnicodeDecodeError) as exc:
        raise StageError("reading similarity file", exc)
    vocab = pair_vocabulary(pairs)
    try:
        table = load_embeddings_file(cfg["embeddings_path"], words=vocab)
    except (OSError, CorpusFormatError, UnicodeDecodeError) as exc:
        raise StageError("reading embeddings", exc)
    try:
        data, missing = build_dataset(table, vocab)
    except ValueError as exc:
        raise StageError("building dataset", exc)
    if missing:
        log.warning("%d words have no vector: %s", len(missing), ", ".join(missing[:20]))
    return Inputs(data, pairs, missing)


def _input_block(inputs):
    return {
        "n_pairs": len(inputs.pairs),
        "n_words": inputs.data.n,
        "dimension": inputs.data.d,
        "missing_words": list(inputs.missing),
    }


def _fit(data, cfg, c, seed):
    try:
        return fit(data, solver_config(cfg, c, seed))
    except SolverError as exc:
        raise StageError(f"clustering (c={c}, seed={seed})", exc)


def _xb(data, model):
    try:
        return xie_beni(data, model.centers, model.memberships, model.fuzzifier)
    except DegenerateSeparationError:
        return None


def _mean_std(values):
    values = [v for v in values if v is not None]
    if not values:
        return None
    s = summarize(values)
    return {"mean": s.mean, "std": s.std}


def _envelope(command, cfg, inputs):
    return {
        "tool": "fuzzyembed",
        "version": __version__,
        "command": command,
        "backend": BACKEND,
        "config": cfg,
        "inputs": _input_block(inputs),
    }


def cmd_cluster(cfg) -> dict:
    inputs = load_inputs(cfg)
    data = inputs.data
    blocks = []
    for c in cfg["c_list"]:
        runs = []
        for seed in range(cfg["seed_base"], cfg["seed_base"] + cfg["n_runs"]):
            model = _fit(data, cfg, c, seed)
            hard = model.harden()
            runs.append({
                "seed": seed,
                "fpc": fpc(model.memberships),
                "xie_beni": _xb(data, model),
                "objective": model.objective_trace[-1],
                "iterations": model.iterations,
                "converged": model.converged,
                "fallback_events": model.fallback_events,
                "degenerate_events": model.degenerate_events,
                "assignment": {w: int(k) for w, k in zip(data.labels, hard)},
            })
        blocks.append({
            "c": c,
            "fpc": _mean_std([r["fpc"] for r in runs]),
            "xie_beni": _mean_std([r["xie_beni"] for r in runs]),
            "runs": runs,
        })
    doc = _envelope("cluster", cfg, inputs)
    doc["results"] = blocks
    return doc


def _pair_dict(p):
    return {"word_a": p.word_a, "word_b": p.word_b, "score": p.score}


def cmd_pairs(cfg) -> dict:
    inputs = load_inputs(cfg)
    data = inputs.data
    gold = extract_gold_pairs(inputs.pairs, cfg["gold_threshold"])
    if not len(gold):
        log.warning("gold threshold %s leaves no pairs", cfg["gold_threshold"])
    metric = cocluster_metric(gold)
    blocks = []
    for c in cfg["c_list"]:
        per_run = []

        def collect(seed, model):
            counted = count_cocluster_pairs(model.harden(), data.labels, gold, c)
            sure, _ = membership_confidence_census(model.memberships, data.labels,
                                                   cfg["confidence_threshold"])
            soft, _ = membership_confidence_census(model.memberships, data.labels,
                                                   cfg["confidence_threshold"], at_most=True)
            per_run.append({
                "seed": seed,
                "count": counted.count,
                "per_cluster": counted.per_cluster,
                "histogram": counted.histogram,
                "fpc": fpc(model.memberships),
                "census_at_least": sure,
                "census_at_most": soft,
                "iterations": model.iterations,
                "converged": model.converged,
                "fallback_events": model.fallback_events,
            })

        try:
            stats = repeated_runs(data, solver_config(cfg, c, cfg["seed_base"]), cfg["n_runs"],
                                  cfg["seed_base"], metric, on_model=collect)
        except SolverError as exc:
            raise StageError(f"clustering (c={c})", exc)
        blocks.append({
            "c": c,
            "seeds": list(stats.seeds),
            "counts": [int(v) for v in stats.per_seed_values],
            "mean": stats.mean,
            "std": stats.std,
            "runs": per_run,
        })
    excluded = count_cocluster_pairs(np.zeros(data.n, dtype=int), data.labels, gold, 1).excluded
    doc = _envelope("pairs", cfg, inputs)
    doc["gold"] = {
        "threshold": gold.threshold,
        "n_pairs": len(gold),
        "n_considered": len(gold) - len(excluded),
        "excluded": [_pair_dict(p) for p in excluded],
    }
    doc["results"] = blocks
    return doc


def cmd_word(cfg, word, min_degree) -> dict:
    inputs = load_inputs(cfg)
    data = inputs.data
    c, seed = cfg["c_list"][0], cfg["seed_base"]
    if word not in data.labels:
        raise UnknownWordError(word, _prefix_candidates(word, data.labels))
    model = _fit(data, cfg, c, seed)
    rep = word_report(model, data.labels, word, min_degree)
    doc = _envelope("word", cfg, inputs)
    doc["results"] = {
        "word": rep.word,
        "c": c,
        "seed": seed,
        "min_degree": min_degree,
        "max_degree": rep.max_degree,
        "degrees": [{"cluster": i, "degree": d} for i, d in rep.degrees],
        "clusters": [{"cluster": i, "degree": dict(rep.degrees)[i], "members": members}
                     for i, members in rep.clusters.items()],
    }
    return doc


def cmd_compare(path_a, path_b, c=None) -> dict:
    docs = []
    for path in (path_a, path_b):
        try:
            with open(path, encoding="utf-8") as fh:
                docs.append(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise StageError(f"reading result document {path}", exc)
    samples = []
    for path, doc in zip((path_a, path_b), docs):
        if doc.get("command") != "pairs":
            raise UsageError(f"{path} is not a pairs result document")
        blocks = doc["results"]
        block = blocks[-1] if c is None else next((b for b in blocks if b["c"] == c), None)
        if block is None:
            raise UsageError(f"{path} has no block for c={c}")
        samples.append((block["c"], block["counts"]))
    res = welch_t_test(samples[0][1], samples[1][1])
    return {
        "tool": "fuzzyembed",
        "version": __version__,
        "command": "compare",
        "inputs": [path_a, path_b],
        "c": [samples[0][0], samples[1][0]],
        "means": [float(np.mean(samples[0][1])), float(np.mean(samples[1][1]))],
        "welch": {"t": res.t, "df": res.df, "p_value": res.p_value},
    }


def _add_common(p):
    p.add_argument("--config", help="JSON file with experiment settings")
    p.add_argument("--algo", choices=["fcm", "fgk"])
    p.add_argument("--embeddings", help="GloVe text file")
    p.add_argument("--wordsim", help="WordSim-353 file (comma or tab separated)")
    p.add_argument("--dims", type=int, help="embedding dimensionality (recorded only)")
    p.add_argument("--clusters", type=_cluster_list, help="comma list of cluster counts")
    p.add_argument("--m", type=float, help="fuzzifier (default 1.1)")
    p.add_argument("--tol", type=float, help="relative objective change to stop at")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--runs", type=int, help="seeds per cluster count")
    p.add_argument("--seed", type=int, help="first seed")
    p.add_argument("--gold-threshold", type=float, help="minimum gold pair score, 0-10 scale")
    p.add_argument("--confidence-threshold", type=float)
    p.add_argument("--cov-reg", type=float, help="GK covariance shrinkage weight")
    p.add_argument("--out", help="write the result document here instead of stdout")


def build_parser():
    parser = argparse.ArgumentParser(prog="fuzzyembed", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="validity sweep over cluster counts")
    _add_common(p)
    p = sub.add_parser("pairs", help="gold pairs found in the same cluster")
    _add_common(p)
    p = sub.add_parser("word", help="soft membership report for one word")
    _add_common(p)
    p.add_argument("--word", required=True)
    p.add_argument("--min-degree", type=float, default=0.10)
    p = sub.add_parser("compare", help="Welch t-test on two pairs documents")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--clusters", type=int, help="cluster count block to compare (default: last)")
    p.add_argument("--out")
    return parser


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _emit(doc, path):
    text = dumps(doc)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "compare":
            doc = cmd_compare(args.first, args.second, args.clusters)
            out = args.out
        else:
            cfg = resolve_config(args)
            out = cfg["output_path"]
            if args.command == "cluster":
                doc = cmd_cluster(cfg)
            elif args.command == "pairs":
                doc = cmd_pairs(cfg)
            else:
                if not 0.0 <= args.min_degree <= 1.0:
                    raise UsageError("min degree must lie in [0, 1]")
                doc = cmd_word(cfg, args.word, args.min_degree)
        _emit(doc, out)
    except UsageError as exc:
        print(f"fuzzyembed: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnknownWordError as exc:
        print(f"fuzzyembed: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StageError, OSError, ValueError) as exc:
        print(f"fuzzyembed: failed while {exc}" if isinstance(exc, StageError)
              else f"fuzzyembed: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
