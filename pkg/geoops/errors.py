"""Error type shared by every geoops module.

Failures carry a machine-readable ``code`` (e.g. ``PARSE_ERROR``) and a
``details`` mapping so batch drivers can log and tabulate them without
parsing messages.
"""
from __future__ import annotations

from typing import Any, Dict


class GeoOpsError(ValueError):
    """A domain failure with a stable code and structured context."""

    def __init__(self, code: str, message: str = "", **details: Any):
        self.code = code
        self.message = message or code
        self.details: Dict[str, Any] = dict(details)
        super().__init__(self._render())

    def _render(self) -> str:
        if not self.details:
            return f"{self.code}: {self.message}"
        ctx = ", ".join(f"{k}={v}" for k, v in sorted(self.details.items()))
        return f"{self.code}: {self.message} ({ctx})"

    def annotate(self, **details: Any) -> "GeoOpsError":
        merged = {**self.details, **details}
        return GeoOpsError(self.code, self.message, **merged)


def require(condition: bool, message: str, **details: Any) -> None:
    if not condition:
        raise GeoOpsError("INVALID_ARGUMENT", message, **details)
