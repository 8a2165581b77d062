"""Base class for immutable domain values."""

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict
from pydantic import ValidationError as PydanticValidationError

from app.core.exceptions import CovcraftError


class DomainModel(BaseModel):
    """Base class for all domain values.

    Instances are frozen after validation; array fields are copied and marked
    read-only so values can be shared between threads. Invariant violations
    raised by validators surface as the matching covcraft error rather than
    a generic pydantic error.
    """

    model_config = ConfigDict(
        arbitrary_types_allowed=True,
        frozen=True,
        validate_default=True,
    )

    def __init__(self, **data: Any) -> None:
        try:
            super().__init__(**data)
        except PydanticValidationError as exc:
            for error in exc.errors():
                cause = (error.get("ctx") or {}).get("error")
                if isinstance(cause, CovcraftError):
                    raise cause from None
            raise

    def __eq__(self, other: object) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return all(
            _equal(getattr(self, name), getattr(other, name))
            for name in type(self).model_fields
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        """String representation with array shapes instead of contents."""
        fields = ", ".join(
            f"{name}={_short(getattr(self, name))}" for name in type(self).model_fields
        )
        return f"{self.__class__.__name__}({fields})"


def _equal(a: Any, b: Any) -> bool:
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return bool(np.array_equal(a, b))
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(_equal(x, y) for x, y in zip(a, b))
    return bool(a == b)


def _short(value: Any) -> str:
    if isinstance(value, np.ndarray):
        return f"<ndarray shape={value.shape}>"
    if isinstance(value, list) and len(value) > 6:
        return f"<list len={len(value)}>"
    return repr(value)


def frozen_array(value: Any, ndim: int) -> np.ndarray:
    """Copy value into a read-only float64 array of the given rank."""
    arr = np.array(value, dtype=np.float64, copy=True)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr
