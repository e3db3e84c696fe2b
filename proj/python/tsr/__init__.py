"""Two-stage silhouette retrieval: cluster filtering, then local matching."""

from ._core import (
    BuildConfig,
    Gallery,
    Index,
    QueryResult,
    Shape,
    TsrDataError,
    TsrUsageError,
    build_index,
    bulls_eye,
    load_dataset,
    load_index,
    load_shape,
    normalize,
    query,
    save_pgm,
    set_thread_count,
    synth,
)

__all__ = [
    "BuildConfig",
    "Gallery",
    "Index",
    "QueryResult",
    "Shape",
    "TsrDataError",
    "TsrUsageError",
    "build_index",
    "bulls_eye",
    "load_dataset",
    "load_index",
    "load_shape",
    "normalize",
    "query",
    "save_pgm",
    "set_thread_count",
    "synth",
]
