"""Complex tensors with per-index variance labels, tied to their point."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .points import Point, same_point

HOLO_LOWER = "holo-lower"
ANTI_LOWER = "antiholo-lower"
HOLO_UPPER = "holo-upper"
ANTI_UPPER = "antiholo-upper"

_LABELS = (HOLO_LOWER, ANTI_LOWER, HOLO_UPPER, ANTI_UPPER)


@dataclass(frozen=True, eq=False)
class Tensor:
    values: np.ndarray
    labels: tuple
    point: Point

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.ndim != len(self.labels):
            raise ValueError(
                f"rank {values.ndim} does not match {len(self.labels)} labels"
            )
        n = self.point.n
        if any(d != n for d in values.shape):
            raise ValueError(f"every index must have dimension {n}")
        for lab in self.labels:
            if lab not in _LABELS:
                raise ValueError(f"unknown index label {lab!r}")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def rank(self) -> int:
        return self.values.ndim

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def to_json_dict(self) -> dict:
        flat = self.values.ravel(order="C")
        return {
            "labels": list(self.labels),
            "dims": list(self.values.shape),
            "re": flat.real.tolist(),
            "im": flat.imag.tolist(),
        }

    @classmethod
    def from_json_dict(cls, d: dict, point: Point) -> "Tensor":
        dims = tuple(d["dims"])
        vals = (np.asarray(d["re"], dtype=float)
                + 1j * np.asarray(d["im"], dtype=float)).reshape(dims, order="C")
        return cls(vals, tuple(d["labels"]), point)


def ensure_same_point(*objs):
    """Raise when tensors (or frames) from different points are mixed."""
    pts = [o.point for o in objs]
    first = pts[0]
    for p in pts[1:]:
        if not same_point(first, p):
            raise ValueError("cannot combine tensors evaluated at different points")
    return first
