"""Builders and catalog of complex Finsler metrics.

Every builder returns a MetricExpr in polarized form.  Hermitian data is a
matrix of polarized base-only expressions; builders verify Hermitian symmetry
structurally where cheap and leave positivity to the point sampler.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ExpressionError
from .expressions import (Const, MetricExpr, Node, add, as_node, const,
                          evaluate, exp, free_slots, mul, neg, polarized_conjugate,
                          power, sqrt, vbvar, vvar, zbvar, zvar)


@dataclass(frozen=True)
class HermitianData:
    """Matrix h[a][b] of polarized expressions for h_{a bbar}(z, zbar)."""

    entries: tuple  # tuple of tuples of Node
    n: int

    def __post_init__(self):
        if len(self.entries) != self.n or any(len(r) != self.n for r in self.entries):
            raise ExpressionError("Hermitian data must be an n x n matrix")
        for row in self.entries:
            for e in row:
                slots = free_slots(e)
                if "v" in slots or "vbar" in slots:
                    raise ExpressionError("Hermitian entries must not involve v / vbar")

    @classmethod
    def from_matrix(cls, rows) -> "HermitianData":
        entries = tuple(tuple(as_node(e) for e in row) for row in rows)
        return cls(entries, len(entries))

    @classmethod
    def identity(cls, n: int) -> "HermitianData":
        return cls.from_matrix(
            [[const(1 if a == b else 0) for b in range(n)] for a in range(n)]
        )

    def value(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.empty((self.n, self.n), dtype=complex)
        for a in range(self.n):
            for b in range(self.n):
                out[a, b] = evaluate(self.entries[a][b], z, np.conj(z), z * 0, z * 0)
        return out

    def hermitian_residual(self, z) -> float:
        h = self.value(z)
        return float(np.max(np.abs(h - h.conj().T)))


def _quadratic_form(h: HermitianData, offset: int = 0) -> Node:
    """sum_ab h_{a bbar} v^(a+offset) vbar^(b+offset)."""
    terms = []
    for a in range(h.n):
        for b in range(h.n):
            e = h.entries[a][b]
            if isinstance(e, Const) and e.value == 0:
                continue
            terms.append(mul(e, vvar(a + offset), vbvar(b + offset)))
    return add(*terms)


# ---------------------------------------------------------------------------
# metric builders
# ---------------------------------------------------------------------------

def build_hermitian(h: HermitianData, name: str = "hermitian") -> MetricExpr:
    """G = sum h_{a bbar}(z, zbar) v^a vbar^b."""
    return MetricExpr(_quadratic_form(h), h.n, name)


def build_szabo(h1: HermitianData, h2: HermitianData, eps: float, k: float,
                name: str = "szabo") -> MetricExpr:
    """Product metric G = q1 + q2 + eps (q1^k + q2^k)^(1/k) with q_i the
    Hermitian quadratic forms of the two factors."""
    if eps <= 0:
        raise ExpressionError("szabo: eps must be positive")
    if k <= 0:
        raise ExpressionError("szabo: k must be positive")
    kf = Fraction(k) if not isinstance(k, Fraction) else k
    n = h1.n + h2.n
    q1 = _quadratic_form(h1, offset=0)
    q2 = _quadratic_form(h2, offset=h1.n)
    if kf == 1:
        root = add(q1, q2, mul(const(eps), add(q1, q2)))
    else:
        inner = add(power(q1, kf), power(q2, kf))
        root = add(q1, q2, mul(const(eps), power(inner, 1 / kf)))
    singular = () if kf.denominator == 1 else (q1, q2)
    return MetricExpr(root, n, name, singular=singular)


def build_randers(h: HermitianData, b, name: str = "randers") -> MetricExpr:
    """G = (alpha + |beta|)^2 with alpha^2 the Hermitian form and
    beta = b_a(z, zbar) v^a.  A structurally zero one-form gives G = alpha^2."""
    n = h.n
    b = tuple(as_node(x) for x in b)
    if len(b) != n:
        raise ExpressionError("randers: one-form length must match the dimension")
    q = _quadratic_form(h)
    if all(isinstance(x, Const) and x.value == 0 for x in b):
        return MetricExpr(q, n, name)
    beta = add(*[mul(b[a], vvar(a)) for a in range(n)])
    beta_bar = polarized_conjugate(beta)
    beta_sq = mul(beta, beta_bar)
    root = power(add(sqrt(q), sqrt(beta_sq)), 2)
    return MetricExpr(root, n, name, singular=(beta,))


def conformal_scale(metric: MetricExpr, rho: Node, name: str | None = None) -> MetricExpr:
    """G~ = e^rho(z, zbar) G, i.e. F~ = e^(rho/2) F; rho must be base-only and
    real-valued on consistent points (checked on a small fixed grid)."""
    rho = as_node(rho)
    slots = free_slots(rho)
    if "v" in slots or "vbar" in slots:
        raise ExpressionError("conformal factor must depend on z, zbar only")
    for z in _reality_check_points(metric.n):
        res = conformal_factor_reality_residual(rho, z)
        if res > 1e-9:
            raise ExpressionError(
                f"conformal factor is not real at a consistency-check point "
                f"(|Im rho| residual {res:.2e})"
            )
    new_name = name if name is not None else (metric.name + "_conformal")
    return MetricExpr(
        mul(exp(rho), metric.root), metric.n, new_name, singular=metric.singular
    )


def _reality_check_points(n: int):
    base = np.linspace(0.13, 0.53, n)
    return (
        base + 1j * base[::-1] * 0.4,
        -0.6 * base + 1j * (0.2 - base),
        0.31 * base[::-1] - 0.27j * base,
    )


def conformal_factor_reality_residual(rho: Node, z) -> float:
    """|Im rho| / (1 + |rho|) at a consistent base point."""
    z = np.asarray(z, dtype=complex)
    val = evaluate(rho, z, np.conj(z), z * 0, z * 0)
    return abs(val.imag) / (1.0 + abs(val))


# ---------------------------------------------------------------------------
# named Hermitian blocks
# ---------------------------------------------------------------------------

def hermitian_flat(n: int) -> HermitianData:
    return HermitianData.identity(n)


def hermitian_fubini_study(n: int, offset: int = 0) -> HermitianData:
    """Affine-patch h = ((1+|z|^2) I - zbar^a z^b) / (1+|z|^2)^2 (Kaehler)."""
    s = add(const(1), *[mul(zvar(offset + g), zbvar(offset + g)) for g in range(n)])
    s2 = mul(s, s)
    rows = []
    for a in range(n):
        row = []
        for b in range(n):
            numer = mul(zbvar(offset + a), zvar(offset + b))
            if a == b:
                row.append((s - numer) / s2)
            else:
                row.append(neg(numer) / s2)
        rows.append(row)
    return HermitianData(tuple(tuple(r) for r in rows), n)


def hermitian_diag_exp(n: int, c: float = 1.0, offset: int = 0) -> HermitianData:
    """h = e^{c z^1 zbar^1} I; not Kaehler for n >= 2 and c != 0."""
    w = exp(mul(const(c), zvar(offset), zbvar(offset)))
    rows = [[w if a == b else const(0) for b in range(n)] for a in range(n)]
    return HermitianData.from_matrix(rows)


_HERMITIAN_FACTORIES = {
    "flat": lambda n, offset=0, **kw: hermitian_flat(n),
    "fubini_study": lambda n, offset=0, **kw: hermitian_fubini_study(n, offset),
    "diag_exp": lambda n, offset=0, c=1.0, **kw: hermitian_diag_exp(n, c, offset),
}


def hermitian_factor(kind: str, n: int, offset: int = 0, **kw) -> HermitianData:
    try:
        fac = _HERMITIAN_FACTORIES[kind]
    except KeyError:
        raise ExpressionError(
            f"unknown Hermitian factor {kind!r}; choose from {sorted(_HERMITIAN_FACTORIES)}"
        ) from None
    return fac(n, offset=offset, **kw)


# Fubini-Study factors need their own coordinates even inside a product, so
# the offset shifts which z variables the entries read.

# ---------------------------------------------------------------------------
# named conformal factors
# ---------------------------------------------------------------------------

def rho_named(kind: str, c: float = 1.0) -> Node:
    """Base-only real scalar fields used by the conformal suites."""
    if kind == "const":
        return const(c)
    if kind == "z1zb1":
        return mul(const(c), zvar(0), zbvar(0))
    if kind == "re_z1":
        return mul(const(0.5 * c), add(zvar(0), zbvar(0)))
    if kind == "re_z1z2":
        return mul(const(0.5 * c), add(mul(zvar(0), zvar(1)), mul(zbvar(0), zbvar(1))))
    raise ExpressionError(
        "unknown conformal factor; choose from const, z1zb1, re_z1, re_z1z2"
    )


RHO_KINDS = ("const", "z1zb1", "re_z1", "re_z1z2")


# ---------------------------------------------------------------------------
# catalog registry (CLI surface)
# ---------------------------------------------------------------------------

def _cat_flat(n: int = 2) -> MetricExpr:
    return build_hermitian(hermitian_flat(n), name="flat")


def _cat_fubini_study(n: int = 2) -> MetricExpr:
    return build_hermitian(hermitian_fubini_study(n), name="fubini_study")


def _cat_hermitian_diag_exp(n: int = 2, c: float = 1.0) -> MetricExpr:
    return build_hermitian(hermitian_diag_exp(n, c), name="hermitian_diag_exp")


def _cat_conformally_flat(n: int = 2, rho: str = "z1zb1", c: float = 1.0) -> MetricExpr:
    base = build_hermitian(hermitian_flat(n), name="flat")
    return conformal_scale(base, rho_named(rho, c), name=f"conformally_flat[{rho}]")


def _cat_szabo(n1: int = 1, n2: int = 1, eps: float = 1.0, k: float = 2.0,
               factor1: str = "flat", factor2: str = "flat",
               c1: float = 1.0, c2: float = 1.0) -> MetricExpr:
    h1 = hermitian_factor(factor1, n1, offset=0, c=c1)
    h2 = hermitian_factor(factor2, n2, offset=n1, c=c2)
    return build_szabo(h1, h2, eps, k, name=f"szabo[{factor1}x{factor2},k={k}]")


def _cat_randers(n: int = 2, c: float = 0.4) -> MetricExpr:
    if not 0 < c < 1:
        raise ExpressionError("randers: need 0 < c < 1 for strong convexity")
    b = [const(c)] + [const(0)] * (n - 1)
    return build_randers(hermitian_flat(n), b, name=f"randers[c={c}]")


@dataclass(frozen=True)
class CatalogEntry:
    build: object
    params: tuple  # (name, default, doc)
    doc: str


CATALOG = {
    "flat": CatalogEntry(
        _cat_flat, (("n", 2, "complex dimension"),),
        "Flat metric sum v^a vbar^a (every tensor vanishes).",
    ),
    "fubini_study": CatalogEntry(
        _cat_fubini_study, (("n", 2, "complex dimension"),),
        "Fubini-Study affine patch (Kaehler Hermitian).",
    ),
    "hermitian_diag_exp": CatalogEntry(
        _cat_hermitian_diag_exp,
        (("n", 2, "complex dimension"), ("c", 1.0, "warp strength")),
        "Diagonal Hermitian metric e^{c z^1 zbar^1} I (non-Kaehler for n >= 2).",
    ),
    "conformally_flat": CatalogEntry(
        _cat_conformally_flat,
        (("n", 2, "complex dimension"),
         ("rho", "z1zb1", "factor kind: const | z1zb1 | re_z1 | re_z1z2"),
         ("c", 1.0, "factor scale")),
        "e^{rho(z, zbar)} times the flat metric.",
    ),
    "szabo": CatalogEntry(
        _cat_szabo,
        (("n1", 1, "dimension of factor 1"), ("n2", 1, "dimension of factor 2"),
         ("eps", 1.0, "mixing weight (> 0)"), ("k", 2.0, "root exponent (> 0)"),
         ("factor1", "flat", "Hermitian factor: flat | fubini_study | diag_exp"),
         ("factor2", "flat", "Hermitian factor: flat | fubini_study | diag_exp"),
         ("c1", 1.0, "diag_exp warp for factor 1"),
         ("c2", 1.0, "diag_exp warp for factor 2")),
        "Product metric q1 + q2 + eps (q1^k + q2^k)^(1/k).",
    ),
    "randers": CatalogEntry(
        _cat_randers,
        (("n", 2, "complex dimension"), ("c", 0.4, "constant one-form strength")),
        "(alpha + |beta|)^2 with flat alpha and b = (c, 0, ...).",
    ),
}


def build_catalog_metric(name: str, **params) -> MetricExpr:
    try:
        entry = CATALOG[name]
    except KeyError:
        raise ExpressionError(
            f"unknown catalog metric {name!r}; choose from {sorted(CATALOG)}"
        ) from None
    allowed = {p[0] for p in entry.params}
    bad = set(params) - allowed
    if bad:
        raise ExpressionError(f"{name}: unknown parameter(s) {sorted(bad)}")
    return entry.build(**params)
