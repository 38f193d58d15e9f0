"""File formats: graph text files, PPR caches, checkpoints and reports."""

from .checkpoints import load_checkpoint, save_checkpoint
from .graph_files import (
    CANONICAL_FILES,
    file_sha256,
    load_graph,
    load_graph_dir,
    read_labels,
    save_graph,
    write_labels,
)
from .ppr_cache import cached_ppr, dump_ppr, load_ppr
from .reports import (
    MANIFEST_NAME,
    read_cbc_csv,
    read_json,
    read_trace_records,
    write_cbc_csv,
    write_csv,
    write_history_csv,
    write_json,
    write_manifest,
    write_trace,
)

__all__ = [
    "CANONICAL_FILES",
    "MANIFEST_NAME",
    "cached_ppr",
    "dump_ppr",
    "file_sha256",
    "load_checkpoint",
    "load_graph",
    "load_graph_dir",
    "load_ppr",
    "read_cbc_csv",
    "read_json",
    "read_labels",
    "read_trace_records",
    "save_checkpoint",
    "save_graph",
    "write_cbc_csv",
    "write_csv",
    "write_history_csv",
    "write_json",
    "write_labels",
    "write_manifest",
    "write_trace",
]
