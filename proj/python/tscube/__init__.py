"""Time series cube documents: read, validate, query, write.

Thin re-export of the compiled module; documents are XML strings on this
side of the boundary.
"""

from ._tscube import (
    TscubeError,
    canonical,
    case_names,
    compute_stats,
    describe,
    export_csv,
    generate,
    links,
    obscore,
    obscore_row,
    slice,
    stats,
    validate,
)

__all__ = [
    "TscubeError",
    "canonical",
    "case_names",
    "compute_stats",
    "describe",
    "export_csv",
    "generate",
    "links",
    "obscore",
    "obscore_row",
    "slice",
    "stats",
    "validate",
]
