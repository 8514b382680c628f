"""Utility functions."""

from .hash_utils import canonical_json, compute_hash, compute_parameters_digest
from .io_utils import format_number, round_tree, write_csv, write_json

__all__ = [
    "canonical_json",
    "compute_hash",
    "compute_parameters_digest",
    "format_number",
    "round_tree",
    "write_csv",
    "write_json",
]
