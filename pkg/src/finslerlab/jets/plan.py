"""Static tables driving truncated multivariate Taylor (jet) propagation.

A jet stores Taylor *coefficients* (derivative / multi-factorial) for every
mixed partial within the order bound.  The bound caps the total derivative
order separately in each of the four slot families (z, zbar, v, vbar).
Products of jets are truncated convolutions; the admissible index triples are
enumerated once per (dimension, bound) and reused for every evaluation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

SLOT_ORDER = ("z", "zbar", "v", "vbar")


@dataclass(frozen=True)
class OrderBound:
    """Per-family caps on total derivative order (overridable upward)."""

    max_z: int = 1
    max_zbar: int = 1
    max_v: int = 2
    max_vbar: int = 2

    def __post_init__(self):
        if min(self.max_z, self.max_zbar, self.max_v, self.max_vbar) < 0:
            raise ValueError("order bounds must be non-negative")

    def as_tuple(self):
        return (self.max_z, self.max_zbar, self.max_v, self.max_vbar)

    def covers(self, other: "OrderBound") -> bool:
        return all(a >= b for a, b in zip(self.as_tuple(), other.as_tuple()))


DEFAULT_BOUND = OrderBound()


def multi_indices(n: int, max_total: int):
    """Exponent vectors over n variables with total degree <= max_total,
    in graded lexicographic order (so the zero index comes first)."""
    out = []
    for total in range(max_total + 1):
        out.extend(_fixed_degree(n, total))
    return out


def _fixed_degree(n, total):
    if n == 1:
        return [(total,)]
    out = []
    for first in range(total, -1, -1):
        for rest in _fixed_degree(n - 1, total - first):
            out.append((first,) + rest)
    return out


def _mi_factorial(mi):
    f = 1
    for e in mi:
        f *= factorial(e)
    return f


@dataclass(frozen=True)
class AxisPlan:
    n: int
    max_total: int
    mis: tuple           # exponent vectors, graded lex
    pos: dict            # exponent vector -> position
    triples: np.ndarray  # (T, 3) int64 rows (k, i, j) with mi[i] + mi[j] = mi[k]

    @classmethod
    def build(cls, n, max_total):
        mis = tuple(multi_indices(n, max_total))
        pos = {mi: i for i, mi in enumerate(mis)}
        rows = []
        for k, mk in enumerate(mis):
            for i, mi in enumerate(mis):
                mj = tuple(a - b for a, b in zip(mk, mi))
                if min(mj) < 0:
                    continue
                j = pos.get(mj)
                if j is not None:
                    rows.append((k, i, j))
        triples = np.array(rows, dtype=np.int64)
        return cls(n, max_total, mis, pos, triples)

    @property
    def size(self):
        return len(self.mis)


class JetPlan:
    """All index bookkeeping for jets of dimension n at a given bound."""

    def __init__(self, n: int, bound: OrderBound):
        self.n = n
        self.bound = bound
        self.axes = tuple(AxisPlan.build(n, b) for b in bound.as_tuple())
        sizes = [a.size for a in self.axes]
        self.sizes = tuple(sizes)
        self.K = int(np.prod(sizes))
        # row-major strides over (z, zbar, v, vbar)
        s3 = 1
        s2 = sizes[3]
        s1 = sizes[2] * s2
        s0 = sizes[1] * s1
        self.strides = (s0, s1, s2, s3)
        self.max_total_order = sum(bound.as_tuple())
        self._build_conv()
        self._build_entry_tables()
        self._gather_cache = {}

    # -- convolution plan ---------------------------------------------------

    def _build_conv(self):
        parts_k, parts_i, parts_j = [], [], []
        for axis, stride in zip(self.axes, self.strides):
            t = axis.triples
            parts_k.append(t[:, 0] * stride)
            parts_i.append(t[:, 1] * stride)
            parts_j.append(t[:, 2] * stride)

        def combine(parts):
            a, b, c, d = parts
            full = (a[:, None, None, None] + b[None, :, None, None]
                    + c[None, None, :, None] + d[None, None, None, :])
            return full.ravel()

        kk = combine(parts_k)
        ii = combine(parts_i)
        jj = combine(parts_j)
        order = np.argsort(kk, kind="stable")
        self.conv_k = np.ascontiguousarray(kk[order])
        self.conv_i = np.ascontiguousarray(ii[order])
        self.conv_j = np.ascontiguousarray(jj[order])
        # every flat index k occurs (k = k + 0), so groups cover 0..K-1
        self.conv_starts = np.searchsorted(self.conv_k, np.arange(self.K))

    # -- per-entry tables ----------------------------------------------------

    def _build_entry_tables(self):
        fact = np.ones(self.K, dtype=float)
        total = np.zeros(self.K, dtype=np.int64)
        for flat in range(self.K):
            mis = self.unflatten(flat)
            f = 1
            t = 0
            for mi in mis:
                f *= _mi_factorial(mi)
                t += sum(mi)
            fact[flat] = f
            total[flat] = t
        self.fact = fact
        self.total_order = total
        # first-order seed position per slot family and direction
        seed = {}
        for fam, (axis, stride) in enumerate(zip(self.axes, self.strides)):
            if axis.max_total < 1:
                seed[SLOT_ORDER[fam]] = None
                continue
            row = np.empty(self.n, dtype=np.int64)
            for i in range(self.n):
                e = tuple(1 if j == i else 0 for j in range(self.n))
                row[i] = axis.pos[e] * stride
            seed[SLOT_ORDER[fam]] = row
        self.seed_pos = seed

    def flatten(self, a, b, c, d) -> int:
        pz, pzb, pv, pvb = (axis.pos[mi] for axis, mi in zip(self.axes, (a, b, c, d)))
        s = self.strides
        return pz * s[0] + pzb * s[1] + pv * s[2] + pvb * s[3]

    def unflatten(self, flat: int):
        s = self.strides
        pz, r = divmod(flat, s[0])
        pzb, r = divmod(r, s[1])
        pv, pvb = divmod(r, s[2])
        return (self.axes[0].mis[pz], self.axes[1].mis[pzb],
                self.axes[2].mis[pv], self.axes[3].mis[pvb])

    # -- derivative gathers ---------------------------------------------------

    def gather(self, sig):
        """Index/multiplier tables turning Taylor data into a derivative tensor.

        ``sig`` = (z_order, zbar_order, v_order, vbar_order).  The returned
        tensor axes run over derivative directions family by family; the
        multiplier is the multi-factorial converting Taylor coefficients to
        derivative values.
        """
        cached = self._gather_cache.get(sig)
        if cached is not None:
            return cached
        for order, axis in zip(sig, self.axes):
            if order > axis.max_total:
                raise ValueError(f"signature {sig} exceeds bound {self.bound.as_tuple()}")
        shape = (self.n,) * sum(sig)
        pos = np.empty(shape, dtype=np.int64)
        mult = np.empty(shape, dtype=float)
        ranges = [range(self.n)] * sum(sig)
        for dirs in itertools.product(*ranges):
            mis = []
            k = 0
            for order in sig:
                e = [0] * self.n
                for d in dirs[k:k + order]:
                    e[d] += 1
                mis.append(tuple(e))
                k += order
            flat = self.flatten(*mis)
            pos[dirs] = flat
            mult[dirs] = self.fact[flat]
        self._gather_cache[sig] = (pos, mult)
        return pos, mult


@lru_cache(maxsize=None)
def get_plan(n: int, bound: OrderBound = DEFAULT_BOUND) -> JetPlan:
    return JetPlan(n, bound)
