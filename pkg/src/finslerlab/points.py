"""Base/fiber points on the slit tangent bundle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Point:
    """A base point z in C^n with a nonzero fiber vector v in C^n."""

    z: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        z = np.array(self.z, dtype=complex)
        v = np.array(self.v, dtype=complex)
        if z.ndim != 1 or v.shape != z.shape:
            raise ValueError("z and v must be 1-D arrays of equal length")
        if not np.any(np.abs(v) > 0):
            raise ValueError("fiber vector must be nonzero")
        z.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.z.shape[0]

    def scaled(self, lam: complex) -> "Point":
        return Point(self.z, lam * self.v)

    def to_json_dict(self) -> dict:
        return {
            "z": [[c.real, c.imag] for c in self.z],
            "v": [[c.real, c.imag] for c in self.v],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Point":
        z = np.array([complex(re, im) for re, im in d["z"]])
        v = np.array([complex(re, im) for re, im in d["v"]])
        return cls(z, v)


def same_point(a: Point, b: Point) -> bool:
    return a is b or (np.array_equal(a.z, b.z) and np.array_equal(a.v, b.v))
