"""Python bindings for the lostpage recommender."""

import json
from pathlib import Path

from . import _core
from ._core import (  # noqa: F401
    ConfigError,
    Error,
    IoError,
    NaiveBayes,
    ParseError,
    archival_quality,
    canonicalize_surt,
    depth,
    normalize_uri,
    parse_timemap,
    popularity_score,
    segment_words,
    temporal_score,
    tokenize,
    uri_similarity,
)

# Wheels ship the data files next to the package; in-tree builds use the
# directory compiled into the library.
_bundled = Path(__file__).resolve().parent / "data"
if (_bundled / "public_suffix_list.dat").exists():
    _core.set_data_dir(str(_bundled))


def evaluate_predictions(truth, predicted):
    return json.loads(_core.evaluate_predictions_json(list(truth), list(predicted)))


def filter_access_log(lines):
    """Return (unique surviving URIs, filter counters)."""
    uris, stats = _core.filter_access_log([line.rstrip("\n") for line in lines])
    return uris, json.loads(stats)


def index_stats(index_tsv):
    return json.loads(_core.index_stats_json(str(index_tsv)))


def recommend(uri, datetime=None, now=None, **config):
    """Run the full pipeline; keyword arguments are configuration keys."""
    cfg = {k: ("true" if v is True else "false" if v is False else str(v)) for k, v in config.items()}
    return json.loads(_core.recommend_json(uri, datetime, now, cfg))


__all__ = [
    "ConfigError", "Error", "IoError", "NaiveBayes", "ParseError", "archival_quality",
    "canonicalize_surt", "depth", "evaluate_predictions", "filter_access_log", "index_stats",
    "normalize_uri", "parse_timemap", "popularity_score", "recommend", "segment_words",
    "temporal_score", "tokenize", "uri_similarity",
]
