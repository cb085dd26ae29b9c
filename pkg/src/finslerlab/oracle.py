"""Independent finite-difference oracle for Wirtinger partials.

The oracle never sees the polarized trick: it evaluates the metric at honest
consistent points (zbar = conj z, vbar = conj v), takes nested central
differences along the 4n real coordinates, and combines them Wirtinger-style,
d/dw = (d/dx - i d/dy)/2 and d/dwbar = (d/dx + i d/dy)/2.  Jet propagation is
cross-validated against it throughout the test suite.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularLocusError
from .expressions import MetricExpr, Node, evaluate
from .points import Point

#: default step per total derivative order (Richardson halves these once)
DEFAULT_STEPS = {0: 1e-3, 1: 5e-3, 2: 5e-3, 3: 1e-2, 4: 1e-2, 5: 3e-2, 6: 4e-2}
MAX_ORDER = 6

_MIN_STEP = 1e-8


def _parse_idx(idx):
    """idx is a sequence of (slot, index) derivative directions."""
    out = []
    for slot, i in idx:
        if slot not in ("z", "zbar", "v", "vbar"):
            raise ValueError(f"unknown slot {slot!r}")
        out.append((slot, int(i)))
    if len(out) > MAX_ORDER:
        raise ValueError(f"oracle supports total order <= {MAX_ORDER}")
    return out


_offset_cache = {}


def _stencil_offsets(n: int, idx, h):
    """Point-independent stencil data: base/fiber offsets (S, n) and weights
    (S,) for one step size.  Each derivative direction contributes the four
    legs of the combined central-difference / Wirtinger stencil; nested
    directions multiply."""
    key = (n, tuple(idx), h)
    cached = _offset_cache.get(key)
    if cached is not None:
        return cached
    oz = np.zeros((1, n), dtype=complex)
    ov = np.zeros((1, n), dtype=complex)
    w = np.ones(1, dtype=complex)
    shifts = np.array([h, -h, 1j * h, -1j * h])
    for slot, i in idx:
        sign = -1.0 if slot in ("z", "v") else 1.0
        legs = np.array([0.25 / h, -0.25 / h, sign * 0.25j / h,
                         -sign * 0.25j / h])
        m = oz.shape[0]
        oz = np.repeat(oz, 4, axis=0)
        ov = np.repeat(ov, 4, axis=0)
        w = np.repeat(w, 4) * np.tile(legs, m)
        tiled = np.tile(shifts, m)
        if slot in ("z", "zbar"):
            oz[:, i] += tiled
        else:
            ov[:, i] += tiled
    for arr in (oz, ov, w):
        arr.setflags(write=False)
    _offset_cache[key] = (oz, ov, w)
    return oz, ov, w


def _stencil(point: Point, idx, h):
    oz, ov, w = _stencil_offsets(point.n, idx, h)
    return point.z[None, :] + oz, point.v[None, :] + ov, w


def _estimate(root: Node, point: Point, idx, h) -> complex:
    Z, V, W = _stencil(point, idx, h)
    vals = evaluate(root, Z, np.conj(Z), V, np.conj(V))
    return complex(np.sum(W * vals))


def fd_oracle(metric, point: Point, idx, step: float | None = None,
              richardson: int = 1) -> complex:
    """Wirtinger partial of a metric by nested central differences.

    ``idx`` lists derivative directions as (slot, index) pairs with slot in
    {z, zbar, v, vbar} and 0-based index; e.g. the Levi entry d2G/dv0 dvbar0
    is idx = [("v", 0), ("vbar", 0)].  ``richardson`` extrapolation levels
    (>= 0) refine the even error expansion of the symmetric stencil.
    """
    idx = _parse_idx(idx)
    if isinstance(metric, MetricExpr):
        root = metric.root
        h = step if step is not None else DEFAULT_STEPS[len(idx)]
        clearance = metric.singular_clearance(point)
        if clearance < 2.0 * h:
            raise SingularLocusError(
                f"point too close to the singular locus for step {h:.2e} "
                f"(clearance {clearance:.2e})"
            )
    else:
        root = metric
        h = step if step is not None else DEFAULT_STEPS[len(idx)]
    if h < _MIN_STEP:
        raise ValueError(f"step {h:.2e} underflows the oracle's budget")
    if not idx:
        return _estimate(root, point, idx, h)
    levels = max(int(richardson), 0) + 1
    table = [_estimate(root, point, idx, h / 2 ** k) for k in range(levels)]
    for m in range(1, levels):
        fac = 4.0 ** m
        table = [(fac * table[k + 1] - table[k]) / (fac - 1.0)
                 for k in range(len(table) - 1)]
    return table[0]


def oracle_table(metric, point: Point, jt, steps=None, richardson: int = 1):
    """Compare every JetTable entry against the oracle in one batched pass.

    Returns a list of rows ((a, b, c, d), order, jet, oracle, rel_err) where
    rel_err = |jet - oracle| / (1 + |jet|).
    """
    steps = dict(DEFAULT_STEPS, **(steps or {}))
    if isinstance(metric, MetricExpr):
        root = metric.root
        if metric.singular:
            need = 2.0 * max(steps.values())
            c = metric.singular_clearance(point)
            if c < need:
                raise SingularLocusError(
                    f"point clearance {c:.2e} is below twice the largest "
                    f"stencil step {need / 2:.2e}"
                )
    else:
        root = metric
    levels = max(int(richardson), 0) + 1

    # gather all stencils first so evaluation happens in a few big batches
    entries = []
    blocks_z, blocks_v, blocks_w = [], [], []
    sizes = []
    for (a, b, c, d), jval in jt.entries():
        idx = []
        for slot, mi in zip(("z", "zbar", "v", "vbar"), (a, b, c, d)):
            for i, e in enumerate(mi):
                idx.extend([(slot, i)] * e)
        order = len(idx)
        h = steps[order]
        per_level = []
        for k in range(levels if order else 1):
            Z, V, W = _stencil(point, idx, h / 2 ** k)
            blocks_z.append(Z)
            blocks_v.append(V)
            blocks_w.append(W)
            sizes.append(Z.shape[0])
            per_level.append(len(sizes) - 1)
        entries.append(((a, b, c, d), order, jval, per_level))

    Z = np.concatenate(blocks_z)
    V = np.concatenate(blocks_v)
    vals = _batched_eval(root, Z, V)
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    block_vals = [
        complex(np.sum(blocks_w[i] * vals[bounds[i]:bounds[i + 1]]))
        for i in range(len(sizes))
    ]

    rows = []
    for key, order, jval, per_level in entries:
        table = [block_vals[i] for i in per_level]
        for m in range(1, len(table)):
            fac = 4.0 ** m
            table = [(fac * table[k + 1] - table[k]) / (fac - 1.0)
                     for k in range(len(table) - 1)]
        oval = table[0]
        rows.append((key, order, jval, oval, abs(jval - oval) / (1.0 + abs(jval))))
    return rows


def _batched_eval(root, Z, V, chunk=262144):
    out = np.empty(Z.shape[0], dtype=complex)
    for lo in range(0, Z.shape[0], chunk):
        hi = min(Z.shape[0], lo + chunk)
        zc = Z[lo:hi]
        vc = V[lo:hi]
        out[lo:hi] = evaluate(root, zc, np.conj(zc), vc, np.conj(vc))
    return out


def _entry_directions(plan):
    """All jet-table entries as ((a, b, c, d), order, flat, direction list)."""
    out = []
    for flat in range(plan.K):
        mis = plan.unflatten(flat)
        idx = []
        for slot, mi in zip(("z", "zbar", "v", "vbar"), mis):
            for i, e in enumerate(mi):
                idx.extend([(slot, i)] * e)
        out.append((mis, len(idx), flat, tuple(idx)))
    return out


def oracle_agreement(metric, points, jts, steps=None, richardson: int = 1):
    """Max relative jet-vs-oracle difference for every table entry over a
    whole sample at once (entry stencils are broadcast across points).

    Returns (overall_max_rel, per_order) where per_order maps total
    derivative order to its worst relative difference.
    """
    steps = dict(DEFAULT_STEPS, **(steps or {}))
    if isinstance(metric, MetricExpr):
        root = metric.root
        if metric.singular:
            need = 2.0 * max(steps.values())
            for p in points:
                c = metric.singular_clearance(p)
                if c < need:
                    raise SingularLocusError(
                        f"point clearance {c:.2e} is below twice the largest "
                        f"stencil step {need / 2:.2e}"
                    )
    else:
        root = metric
    levels = max(int(richardson), 0) + 1
    plan = jts[0].plan
    n = plan.n
    P = len(points)
    Z0 = np.stack([p.z for p in points])[:, None, :]
    V0 = np.stack([p.v for p in points])[:, None, :]
    taylor = np.stack([jt.taylor for jt in jts])

    overall = 0.0
    per_order = {}
    for mis, order, flat, idx in _entry_directions(plan):
        jvals = taylor[:, flat] * plan.fact[flat]
        if order == 0:
            ovals = _batched_eval(root, Z0[:, 0, :], V0[:, 0, :])
        else:
            h = steps[order]
            table = []
            for k in range(levels):
                oz, ov, w = _stencil_offsets(n, idx, h / 2 ** k)
                Z = (Z0 + oz[None, :, :]).reshape(-1, n)
                V = (V0 + ov[None, :, :]).reshape(-1, n)
                vals = _batched_eval(root, Z, V).reshape(P, -1)
                table.append(vals @ w)
            for m in range(1, levels):
                fac = 4.0 ** m
                table = [(fac * table[k + 1] - table[k]) / (fac - 1.0)
                         for k in range(len(table) - 1)]
            ovals = table[0]
        rel = float(np.max(np.abs(jvals - ovals) / (1.0 + np.abs(jvals))))
        overall = max(overall, rel)
        per_order[order] = max(per_order.get(order, 0.0), rel)
    return overall, per_order


# ---------------------------------------------------------------------------
# field-level differences (for oracle assemblies of horizontal derivatives)
# ---------------------------------------------------------------------------

def field_partial(func, point: Point, slot: str, index: int, h: float = 1e-4,
                  richardson: int = 1):
    """Wirtinger partial of an assembled field p -> ndarray along one slot.

    ``func`` maps a consistent Point to a complex array; differences move the
    real/imaginary part of the chosen coordinate so every evaluation stays on
    the consistent slice.
    """
    if slot not in ("z", "zbar", "v", "vbar"):
        raise ValueError(f"unknown slot {slot!r}")
    base = "z" if slot in ("z", "zbar") else "v"
    sign = -1.0 if slot in ("z", "v") else 1.0

    def shifted(shift):
        z = point.z.copy()
        v = point.v.copy()
        if base == "z":
            z[index] += shift
        else:
            v[index] += shift
        return np.asarray(func(Point(z, v)), dtype=complex)

    def estimate(step):
        dx = (shifted(step) - shifted(-step)) / (2.0 * step)
        dy = (shifted(1j * step) - shifted(-1j * step)) / (2.0 * step)
        return 0.5 * (dx + sign * 1j * dy)

    levels = max(int(richardson), 0) + 1
    table = [estimate(h / 2 ** k) for k in range(levels)]
    for m in range(1, levels):
        fac = 4.0 ** m
        table = [(fac * table[k + 1] - table[k]) / (fac - 1.0)
                 for k in range(len(table) - 1)]
    return table[0]
