"""Jet evaluation: every mixed Wirtinger partial of an expression at a point.

Propagation is truncated multivariate Taylor data pushed forward through the
expression tree, so entries are exact up to floating round-off.  Two
convolution backends exist: a compiled extension (built from the .pyx source)
and a pure-numpy fallback; selection happens at import and can be forced with
the FINSLERLAB_JET_BACKEND environment variable (auto | compiled | python).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from ..errors import EvaluationDomainError, ExpressionError, SingularLocusError
from ..expressions import (Add, Const, Div, Exp, Log, MetricExpr, Mul, Neg,
                           Node, Pow, Sqrt, Var, free_slots)
from ..points import Point
from .plan import DEFAULT_BOUND, OrderBound, get_plan
from . import _kernels_py

try:  # compiled core is optional
    from . import _kernels as _kernels_c
except ImportError:  # pragma: no cover - depends on the build
    _kernels_c = None

_DOMAIN_GUARD = 1e-13
_SINGULAR_FLOOR = 1e-8


def _select_backend():
    choice = os.environ.get("FINSLERLAB_JET_BACKEND", "auto").lower()
    if choice == "python":
        return "python"
    if choice == "compiled":
        if _kernels_c is None:
            raise ImportError(
                "FINSLERLAB_JET_BACKEND=compiled but the extension is not built; "
                "run: python setup.py build_ext --inplace"
            )
        return "compiled"
    return "compiled" if _kernels_c is not None else "python"


_BACKEND = _select_backend()


def active_backend() -> str:
    return _BACKEND


def set_backend(name: str) -> str:
    """Force the convolution backend (mainly for benchmarks/tests)."""
    global _BACKEND
    if name == "compiled" and _kernels_c is None:
        raise ImportError("compiled jet kernels are not available")
    if name not in ("compiled", "python"):
        raise ValueError("backend must be 'compiled' or 'python'")
    _BACKEND = name
    return _BACKEND


def _conv(u, w, plan, out=None):
    if out is None:
        out = np.empty_like(u)
    if _BACKEND == "compiled":
        out[:] = 0
        _kernels_c.conv_batch(out, u, w, plan.conv_k, plan.conv_i, plan.conv_j)
        return out
    return _kernels_py.conv_batch(u, w, plan, out)


# ---------------------------------------------------------------------------
# jet table
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class JetTable:
    """All mixed partials of one scalar expression at one point.

    ``taylor`` holds Taylor coefficients; public accessors return derivative
    values (coefficient times multi-factorial).
    """

    point: Point
    plan: object
    taylor: np.ndarray  # (K,)

    @property
    def n(self) -> int:
        return self.plan.n

    @property
    def bound(self) -> OrderBound:
        return self.plan.bound

    def value(self) -> complex:
        return complex(self.taylor[0])

    def entry(self, a, b, c, d) -> complex:
        """Derivative for exponent vectors (a, b, c, d) over (z, zbar, v, vbar)."""
        flat = self.plan.flatten(tuple(a), tuple(b), tuple(c), tuple(d))
        return complex(self.taylor[flat] * self.plan.fact[flat])

    def d(self, z=(), zbar=(), v=(), vbar=()) -> complex:
        """Derivative taken along listed directions, e.g. d(z=(0,), vbar=(1,))."""
        mis = []
        for dirs in (z, zbar, v, vbar):
            e = [0] * self.n
            for i in dirs:
                e[i] += 1
            mis.append(tuple(e))
        return self.entry(*mis)

    def array(self, z_order=0, zbar_order=0, v_order=0, vbar_order=0) -> np.ndarray:
        """Derivative tensor with one length-n axis per derivative direction,
        ordered z-dirs, zbar-dirs, v-dirs, vbar-dirs."""
        pos, mult = self.plan.gather((z_order, zbar_order, v_order, vbar_order))
        return self.taylor[pos] * mult

    def entries(self):
        """Iterate ((a, b, c, d), derivative value) over the whole table."""
        for flat in range(self.plan.K):
            mis = self.plan.unflatten(flat)
            yield mis, complex(self.taylor[flat] * self.plan.fact[flat])


# ---------------------------------------------------------------------------
# propagation
# ---------------------------------------------------------------------------

def _series_exp(u0, m):
    base = np.exp(u0)
    return [base / math.factorial(k) for k in range(m + 1)]


def _series_log(u0, m):
    coeffs = [np.log(u0)]
    for k in range(1, m + 1):
        coeffs.append(((-1) ** (k + 1)) * u0 ** (-k) / k)
    return coeffs


def _series_pow(u0, p, m):
    # c_k = binom(p, k) u0^(p-k)
    coeffs = []
    binom = 1.0
    for k in range(m + 1):
        coeffs.append(binom * np.power(u0, p - k))
        binom = binom * (p - k) / (k + 1)
    return coeffs


class _JetEvaluator:
    def __init__(self, plan, Z, Zb, V, Vb):
        self.plan = plan
        self.B = Z.shape[0]
        self.arrays = {"z": Z, "zbar": Zb, "v": V, "vbar": Vb}
        self.memo = {}

    def run(self, node) -> np.ndarray:
        out = self.memo.get(id(node))
        if out is not None:
            return out
        out = self._eval(node)
        self.memo[id(node)] = out
        return out

    def _zeros(self):
        return np.zeros((self.B, self.plan.K), dtype=complex)

    def _eval(self, node):
        plan = self.plan
        if isinstance(node, Const):
            t = self._zeros()
            t[:, 0] = node.value
            return t
        if isinstance(node, Var):
            seed = plan.seed_pos[node.slot]
            if seed is None:
                raise ExpressionError(
                    f"expression depends on slot {node.slot!r} but the order bound "
                    f"for that family is zero"
                )
            t = self._zeros()
            t[:, 0] = self.arrays[node.slot][:, node.index]
            t[:, seed[node.index]] = 1.0
            return t
        if isinstance(node, Neg):
            return -self.run(node.arg)
        if isinstance(node, Add):
            t = self.run(node.args[0]).copy()
            for a in node.args[1:]:
                t += self.run(a)
            return t
        if isinstance(node, Mul):
            t = self.run(node.args[0])
            for a in node.args[1:]:
                t = _conv(t, self.run(a), plan)
            return t
        if isinstance(node, Div):
            den = self.run(node.den)
            rec = self._compose(den, "recip")
            return _conv(self.run(node.num), rec, plan)
        if isinstance(node, Pow):
            base = self.run(node.base)
            p = node.exponent
            if p.denominator == 1:
                return self._int_power(base, p.numerator)
            return self._compose(base, "pow", float(p))
        if isinstance(node, Sqrt):
            return self._compose(self.run(node.arg), "pow", 0.5)
        if isinstance(node, Exp):
            return self._compose(self.run(node.arg), "exp")
        if isinstance(node, Log):
            return self._compose(self.run(node.arg), "log")
        raise ExpressionError(f"unknown node type {type(node).__name__}")

    def _int_power(self, base, p):
        plan = self.plan
        if p < 0:
            rec = self._compose(base, "recip")
            return self._int_power(rec, -p)
        # binary exponentiation, p >= 2 here (p in {0, 1} folded at build time)
        result = None
        sq = base
        k = p
        while k:
            if k & 1:
                result = sq if result is None else _conv(result, sq, plan)
            k >>= 1
            if k:
                sq = _conv(sq, sq, plan)
        if result is None:
            result = self._zeros()
            result[:, 0] = 1.0
        return result

    def _compose(self, u, kind, p=None):
        """Apply a univariate analytic function to a jet via its Taylor series
        about the constant part (finite Horner sum; exact in the truncation)."""
        plan = self.plan
        u0 = u[:, 0].copy()
        if kind in ("log", "recip") or (kind == "pow" and p is not None):
            bad = np.abs(u0) < _DOMAIN_GUARD
            if np.any(bad):
                raise EvaluationDomainError(
                    f"{kind} near zero base at {int(np.count_nonzero(bad))} point(s)"
                )
        uh = u.copy()
        uh[:, 0] = 0.0
        # the lowest nonzero grade of uh bounds how many powers survive
        nz = np.any(uh != 0, axis=0)
        if not np.any(nz):
            m = 0
        else:
            g = int(plan.total_order[nz].min())
            m = plan.max_total_order // max(g, 1)
        if kind == "exp":
            coeffs = _series_exp(u0, m)
        elif kind == "log":
            coeffs = _series_log(u0, m)
        elif kind == "recip":
            coeffs = _series_pow(u0, -1.0, m)
        else:
            coeffs = _series_pow(u0, p, m)
        out = self._zeros()
        out[:, 0] = coeffs[m]
        for k in range(m - 1, -1, -1):
            out = _conv(uh, out, plan)
            out[:, 0] += coeffs[k]
        return out


def _eval_jet_arrays(root: Node, plan, Z, Zb, V, Vb) -> np.ndarray:
    ev = _JetEvaluator(plan, Z, Zb, V, Vb)
    return ev.run(root)


def _check_singular(metric: MetricExpr, points):
    if not isinstance(metric, MetricExpr) or not metric.singular:
        return
    for p in points:
        c = metric.singular_clearance(p)
        if c < _SINGULAR_FLOOR:
            raise SingularLocusError(
                f"point is on the declared singular locus (clearance {c:.2e})"
            )


def eval_jet(metric, point: Point, bound: OrderBound = DEFAULT_BOUND) -> JetTable:
    """JetTable of a metric (or bare polarized expression) at one point."""
    return eval_jet_batch(metric, [point], bound)[0]


def eval_jet_batch(metric, points, bound: OrderBound = DEFAULT_BOUND):
    """Evaluate jets at many points in one propagation pass."""
    if isinstance(metric, MetricExpr):
        root = metric.root
        n = metric.n
        _check_singular(metric, points)
    else:
        root = metric
        n = points[0].n
    for p in points:
        if p.n != n:
            raise ValueError("point dimension does not match the expression")
    plan = get_plan(n, bound)
    Z = np.stack([p.z for p in points])
    V = np.stack([p.v for p in points])
    taylor = _eval_jet_arrays(root, plan, Z, np.conj(Z), V, np.conj(V))
    return [JetTable(p, plan, taylor[i].copy()) for i, p in enumerate(points)]


@dataclass(frozen=True, eq=False)
class ScalarJet:
    """Value and first/mixed z-derivatives of a base-only scalar (e.g. a
    conformal factor): f, f_z[a], f_zbar[a], f_zzbar[a, b]."""

    point: Point
    value: complex
    dz: np.ndarray
    dzbar: np.ndarray
    dzzbar: np.ndarray


def eval_scalar_jet(expr: Node, point: Point,
                    bound: OrderBound = OrderBound(1, 1, 0, 0)) -> ScalarJet:
    """Jet of a scalar function of (z, zbar) only; rejects fiber dependence."""
    slots = free_slots(expr)
    if "v" in slots or "vbar" in slots:
        raise ExpressionError("scalar jet requires an expression free of v / vbar")
    if bound.max_z < 1 or bound.max_zbar < 1:
        raise ValueError("scalar jet needs at least first order in z and zbar")
    plan = get_plan(point.n, OrderBound(bound.max_z, bound.max_zbar, 0, 0))
    Z = point.z[None, :]
    taylor = _eval_jet_arrays(expr, plan, Z, np.conj(Z), Z * 0, Z * 0)
    jt = JetTable(point, plan, taylor[0])
    return ScalarJet(
        point=point,
        value=jt.value(),
        dz=jt.array(z_order=1),
        dzbar=jt.array(zbar_order=1),
        dzzbar=jt.array(z_order=1, zbar_order=1),
    )


def jet_conjugation_residual(jt: JetTable) -> float:
    """Max relative violation of entry(a,b,c,d) = conj(entry(b,a,d,c)).

    Meaningful at consistent points (zbar = conj z, vbar = conj v) when the
    bound is symmetric between the barred and unbarred families.
    """
    plan = jt.plan
    if plan.bound.max_z != plan.bound.max_zbar or plan.bound.max_v != plan.bound.max_vbar:
        raise ValueError("conjugation residual needs a symmetric bound")
    worst = 0.0
    for (a, b, c, d), val in jt.entries():
        mirror = jt.entry(b, a, d, c)
        worst = max(worst, abs(val - np.conj(mirror)) / (1.0 + abs(val)))
    return worst
