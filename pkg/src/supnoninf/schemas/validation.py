"""Collect every schema violation of a spec document as JSON-pointer errors."""

from typing import Any, Callable, Dict, List, Optional, Type, TypeVar

from pydantic import BaseModel, ValidationError

from supnoninf.core import SpecValidationError

ModelT = TypeVar("ModelT", bound=BaseModel)


def json_pointer(loc: tuple) -> str:
    """Pydantic error location as an RFC 6901 pointer."""
    parts = [str(part).replace("~", "~0").replace("/", "~1") for part in loc]
    return "/" + "/".join(parts) if parts else ""


def pointer_errors(exc: ValidationError) -> List[Dict[str, str]]:
    errors = []
    for error in exc.errors(include_url=False):
        loc = tuple(part for part in error["loc"] if not str(part).startswith("function-"))
        errors.append({"pointer": json_pointer(loc), "message": error["msg"]})
    return errors


def validate_spec(
    document: Any,
    model: Type[ModelT],
    semantic_checks: Optional[Callable[[ModelT], List[Dict[str, str]]]] = None,
) -> ModelT:
    """
    Validate ``document`` against ``model`` and return the normalized spec.

    Field-level errors are all reported together; cross-field checks run on a
    structurally valid document and are likewise reported together.

    Raises:
        SpecValidationError: With one {pointer, message} entry per violation
    """
    try:
        spec = model.model_validate(document)
    except ValidationError as exc:
        raise SpecValidationError(pointer_errors(exc)) from None
    if semantic_checks is not None:
        errors = semantic_checks(spec)
        if errors:
            raise SpecValidationError(errors)
    return spec
