"""Hashing utilities."""

import hashlib
import json
from typing import Any, Union

import numpy as np


def compute_hash(data: Union[str, bytes], algorithm: str = "sha256") -> str:
    """
    Compute hash of data.

    Args:
        data: Data to hash (string or bytes)
        algorithm: Hash algorithm (md5, sha1, sha256, etc.)

    Returns:
        Hex digest of hash
    """
    if isinstance(data, str):
        data = data.encode("utf-8")

    hasher = hashlib.new(algorithm)
    hasher.update(data)

    return hasher.hexdigest()


def _to_jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if hasattr(value, "model_dump"):
        return value.model_dump(mode="json")
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def canonical_json(parameters: Any) -> str:
    """Sorted-key, whitespace-free JSON; equal parameters give equal text."""
    return json.dumps(
        parameters, sort_keys=True, separators=(",", ":"), default=_to_jsonable, allow_nan=True
    )


def compute_parameters_digest(parameters: Any) -> str:
    """
    SHA256 digest of resolved run parameters.

    Re-runs with the same parameters produce the same digest.
    """
    return compute_hash(canonical_json(parameters), algorithm="sha256")
