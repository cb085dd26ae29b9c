"""Classification predicates and the pointwise identity-verification harness.

Every check is pointwise over a finite sample: the harness reports residuals
like "Kaehler at all N sampled points", never a global claim.  Residuals are
relative to scale = 1 + (largest participating tensor entry at the point).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .catalog import conformal_scale
from .curvature import CurvatureFrame, conjugate_symmetry_residual
from .errors import ExpressionError
from .expressions import MetricExpr, Node, free_slots
from .geometry import Frame, horizontal_derivative
from .jets import DEFAULT_BOUND, eval_jet, eval_jet_batch, eval_scalar_jet
from .oracle import field_partial
from .points import Point

_E = np.einsum

#: per-point cap for finite-difference-backed identities (they cost dozens of
#: frame evaluations per point; exact-assembly identities run on every point)
FD_POINT_CAP = 8

DEFAULT_CLASSIFY_TOL = 1e-8


# ---------------------------------------------------------------------------
# report containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityReport:
    name: str
    anchor: str
    points: int
    max_abs: float
    max_rel: float
    tol: float
    verdict: str                       # "pass" | "fail" | "skipped"
    skipped_reason: str | None = None

    def to_json_dict(self) -> dict:
        d = {
            "name": self.name,
            "anchor": self.anchor,
            "points": self.points,
            "max_abs": self.max_abs,
            "max_rel": self.max_rel,
            "tol": self.tol,
            "verdict": self.verdict,
        }
        if self.skipped_reason is not None:
            d["skipped_reason"] = self.skipped_reason
        return d


@dataclass(frozen=True)
class DefectVector:
    """Pointwise classification defects, per point and aggregated."""

    kahler: float
    weakly_kahler: float
    balanced: float
    rund_like: float
    strongly_pseudoconvex: float       # smallest Levi eigenvalue over the sample
    points: int
    per_point: tuple = field(default_factory=tuple)

    def to_json_dict(self) -> dict:
        return {
            "kahler": self.kahler,
            "weakly_kahler": self.weakly_kahler,
            "balanced": self.balanced,
            "rund_like": self.rund_like,
            "strongly_pseudoconvex": self.strongly_pseudoconvex,
            "points": self.points,
            "per_point": [dict(row) for row in self.per_point],
        }


# ---------------------------------------------------------------------------
# shared per-sample workspace
# ---------------------------------------------------------------------------

class Workspace:
    """Jets, frames and curvature caches for one (metric, sample) pair."""

    def __init__(self, metric: MetricExpr, points, bound=DEFAULT_BOUND, seed=0):
        if not points:
            raise ValueError("need at least one accepted point")
        self.metric = metric
        self.points = list(points)
        self.bound = bound
        self.seed = seed
        self.jts = eval_jet_batch(metric, self.points, bound)
        self._frames = {}
        self._cfs = {}

    def __len__(self):
        return len(self.points)

    def frame(self, i: int) -> Frame:
        f = self._frames.get(i)
        if f is None:
            f = Frame(self.jts[i])
            self._frames[i] = f
        return f

    def cf(self, i: int) -> CurvatureFrame:
        c = self._cfs.get(i)
        if c is None:
            c = CurvatureFrame(self.frame(i))
            self._cfs[i] = c
        return c

    def random_vectors(self, i: int, count: int, tag: int = 0):
        """Deterministic nonzero complex vectors attached to point i."""
        rng = np.random.default_rng(
            np.random.Philox(key=[self.seed & 0xFFFFFFFFFFFFFFFF,
                                  (i << 16) | (tag << 8) | 0x5E])
        )
        out = []
        while len(out) < count:
            w = rng.uniform(-1.0, 1.0, 2 * self.metric.n)
            h = w[: self.metric.n] + 1j * w[self.metric.n:]
            if np.linalg.norm(h) > 0.1:
                out.append(h)
        return out

    # defect fields -----------------------------------------------------------

    def point_defects(self, i: int) -> dict:
        f = self.frame(i)
        cf = self.cf(i)
        eig = f.levi_eigenvalues
        return {
            "kahler": float(np.max(np.abs(f.Gam_h - f.Gam_h.transpose(0, 2, 1)))),
            "weakly_kahler": float(np.max(np.abs(f.weak_kahler_vector))),
            "balanced": float(np.max(np.abs(f.S_trace))),
            "rund_like": float(np.max(np.abs(cf.rund_defect))),
            "strongly_pseudoconvex": float(eig.min()),
        }


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def classify(metric: MetricExpr, points, tol: float = DEFAULT_CLASSIFY_TOL,
             workspace: Workspace | None = None) -> DefectVector:
    """Pointwise defect vector of a metric over an accepted sample."""
    ws = workspace if workspace is not None else Workspace(metric, points)
    rows = [ws.point_defects(i) for i in range(len(ws))]
    return DefectVector(
        kahler=max(r["kahler"] for r in rows),
        weakly_kahler=max(r["weakly_kahler"] for r in rows),
        balanced=max(r["balanced"] for r in rows),
        rund_like=max(r["rund_like"] for r in rows),
        strongly_pseudoconvex=min(r["strongly_pseudoconvex"] for r in rows),
        points=len(rows),
        per_point=tuple(tuple(sorted(r.items())) for r in rows),
    )


# ---------------------------------------------------------------------------
# identity evaluators: each returns (abs_residual, scale) at one point
# ---------------------------------------------------------------------------

def _euler(ws, i):
    f = ws.frame(i)
    v = f.point.v
    vb = np.conj(v)
    r = max(
        abs(_E("a,a->", f.Gv, v) - f.G),
        float(np.max(np.abs(_E("ab,a->b", f.M, v) - f.Gvb))),
        abs(_E("ab,a,b->", f.M, v, vb) - f.G),
        float(np.max(np.abs(_E("abg,g->ab", f.Gv3, v)))),
    )
    scale = 1.0 + abs(f.G) + float(np.max(np.abs(f.M)))
    return r, scale


def _conjugate_symmetry(ws, i):
    cf = ws.cf(i)
    r = max(conjugate_symmetry_residual(t)
            for t in (cf.chern, cf.canonical, cf.complexified))
    return r, 1.0  # residual is already relative


def _flag_difference(ws, i, n_vectors: int = 5):
    f = ws.frame(i)
    cf = ws.cf(i)
    diff = cf.canonical - cf.chern
    worst = (0.0, 1.0)
    for H in ws.random_vectors(i, n_vectors, tag=1):
        Hb = np.conj(H)
        lhs = complex(_E("abmn,a,b,m,n->", diff, H, Hb, H, Hb))
        A = _E("a,n,nal->l", H, Hb, f.DzbM) - _E("a,n,lan->l", H, Hb, f.DzbM)
        B = _E("b,m,mgb->g", Hb, H, f.DzM) - _E("b,m,gmb->g", Hb, H, f.DzM)
        rhs = -0.25 * complex(_E("l,lg,g->", A, f.Mi, B))
        scale = 1.0 + abs(lhs) + abs(rhs)
        res = abs(lhs - rhs)
        if res / scale > worst[0] / worst[1]:
            worst = (res, scale)
    return worst


def _sectional_difference(ws, i):
    f = ws.frame(i)
    cf = ws.cf(i)
    v = f.point.v
    vb = np.conj(v)
    diff = cf.canonical - cf.chern
    lhs = complex(_E("abmn,a,b,m,n->", diff, v, vb, v, vb))
    # chi(G_g) = v^m del_m(G_g); chibar acts with the barred operator
    dG_v = horizontal_derivative(f.Gzv, f.Gvv, f)          # [m, g]
    dG_vb = horizontal_derivative(f.Gzbvb, f.Gvbvb, f, barred=True)  # [n, l]
    chi = _E("m,mg->g", v, dG_v)
    chib = _E("n,nl->l", vb, dG_vb)
    bracket = chi - f.Gz
    bracket_bar = chib - f.Gzb
    rhs = -0.25 * complex(_E("l,lg,g->", bracket_bar, f.Mi, bracket))
    # inner step: G_z - chi(G) equals the contracted weak-Kaehler vector
    inner = float(np.max(np.abs((f.Gz - chi) - f.weak_kahler_vector)))
    scale = 1.0 + abs(lhs) + abs(rhs) + float(np.max(np.abs(f.weak_kahler_vector)))
    return max(abs(lhs - rhs), inner), scale


def _ricci_identity(ws, i):
    cf = ws.cf(i)
    lhs = cf.ricci_chern
    rhs = cf.ricci_canonical + cf.dS_zb + cf.dSbar_z
    scale = 1.0 + max(float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))))
    return float(np.max(np.abs(lhs - rhs))), scale


def _complexified_trace(ws, i):
    f = ws.frame(i)
    cf = ws.cf(i)
    k_direct = _E("ba,abmn->mn", f.Mi, cf.complexified)
    rhs = cf.ricci_canonical - cf.torsion_square
    r1 = float(np.max(np.abs(k_direct - rhs)))
    s_direct = complex(_E("nm,mn->", f.Mi, k_direct))
    ss = cf.torsion_square_scalar
    r2 = abs(s_direct - (cf.scalar_canonical - ss))
    r3 = max(0.0, -ss.real) + abs(ss.imag)
    scale = 1.0 + float(np.max(np.abs(k_direct))) + abs(s_direct)
    return max(r1, r2, r3), scale


def _negativity(ws, i, n_pairs: int = 4):
    f = ws.frame(i)
    cf = ws.cf(i)
    diff = cf.complexified - cf.canonical
    Hs = ws.random_vectors(i, n_pairs, tag=2)
    Ks = ws.random_vectors(i, n_pairs, tag=3)
    worst = (0.0, 1.0)
    for H, K in zip(Hs, Ks):
        val = complex(_E("abmn,a,b,m,n->", diff, H, np.conj(H), K, np.conj(K)))
        res = max(0.0, val.real) + abs(val.imag)
        scale = 1.0 + abs(val)
        if res / scale > worst[0] / worst[1]:
            worst = (res, scale)
    return worst


def _trace_relation(ws, i):
    f = ws.frame(i)
    sbar = np.conj(f.S_trace)
    lhs = _E("ba,gab,gl->l", f.Mi, f.Lmix, f.M)
    r1 = float(np.max(np.abs(lhs - sbar)))
    r2 = float(np.max(np.abs(sbar + _E("ggl->l", f.Lmix))))
    scale = 1.0 + float(np.max(np.abs(sbar))) + float(np.max(np.abs(f.Lmix)))
    return max(r1, r2), scale


def _ddbar_bracket_direct(f: Frame):
    """B[a, m, b, n] = the second-derivative bracket of the horizontal
    ddbar of the fundamental form (antisymmetric in (a, m) and (b, n))."""
    D2h = f.D2h
    return (_E("mban->ambn", D2h) + _E("anmb->ambn", D2h)
            - _E("abmn->ambn", D2h) - _E("mnab->ambn", D2h))


def _ddbar_coefficient(ws, i):
    f = ws.frame(i)
    direct = 0.25j * _ddbar_bracket_direct(f)

    # oracle assembly: outer plain-horizontal derivative of the exact
    # barred-derivative field, by consistent-slice finite differences
    metric = ws.metric
    bound = ws.bound

    def dzbm_field(q: Point):
        return Frame(eval_jet(metric, q, bound)).DzbM

    n = f.n
    dz = np.empty((n,) + f.DzbM.shape, dtype=complex)
    dv = np.empty_like(dz)
    for m in range(n):
        dz[m] = field_partial(dzbm_field, f.point, "z", m)
        dv[m] = field_partial(dzbm_field, f.point, "v", m)
    D2h_fd = horizontal_derivative(dz, dv, f)  # [m, nv, a, b]
    fd = 0.25j * (_E("mban->ambn", D2h_fd) + _E("anmb->ambn", D2h_fd)
                  - _E("abmn->ambn", D2h_fd) - _E("mnab->ambn", D2h_fd))
    scale = 1.0 + float(np.max(np.abs(direct)))
    return float(np.max(np.abs(direct - fd))), scale


def _codifferential(ws, i):
    f = ws.frame(i)
    cf = ws.cf(i)
    direct = 2j * cf.dS_zb

    metric = ws.metric
    bound = ws.bound

    def s_field(q: Point):
        return Frame(eval_jet(metric, q, bound)).S_trace

    n = f.n
    dzb = np.empty((n, n), dtype=complex)
    dvb = np.empty((n, n), dtype=complex)
    for k in range(n):
        dzb[k] = field_partial(s_field, f.point, "zbar", k)
        dvb[k] = field_partial(s_field, f.point, "vbar", k)
    dS_fd = horizontal_derivative(dzb, dvb, f, barred=True)  # [nv, m]
    fd = 2j * dS_fd.T
    scale = 1.0 + float(np.max(np.abs(direct)))
    return float(np.max(np.abs(direct - fd))), scale


def _rund_torsion_square(ws, i):
    f = ws.frame(i)
    B = _ddbar_bracket_direct(f)
    rhs = -4.0 * _E("gl,gam,lbn->ambn", f.M, f.S_up, np.conj(f.S_up))
    scale = 1.0 + float(np.max(np.abs(B))) + float(np.max(np.abs(rhs)))
    return float(np.max(np.abs(B - rhs))), scale


def _balanced_contraction(ws, i):
    f = ws.frame(i)
    cf = ws.cf(i)
    D2h = f.D2h
    Slow_c = np.conj(f.S_low)
    # trace over the first Hermitian pair
    lhs1 = _E("ba,mban->mn", f.Mi, D2h) - _E("ba,mnab->mn", f.Mi, D2h)
    rhs1 = 2.0 * _E("ba,mal,lg,nbg->mn", f.Mi, f.DzM, f.Mi, Slow_c)
    # trace over the second pair
    lhs2 = _E("nm,anmb->ab", f.Mi, D2h) - _E("nm,abmn->ab", f.Mi, D2h)
    rhs2 = 2.0 * _E("nm,aml,lg,bng->ab", f.Mi, f.DzM, f.Mi, Slow_c)
    # fully contracted chain equals -4 <torsion, torsion>
    full = complex(_E("ba,nm,ambn->", f.Mi, f.Mi, _ddbar_bracket_direct(f)))
    ss = cf.torsion_square_scalar
    r = max(
        float(np.max(np.abs(lhs1 - rhs1))),
        float(np.max(np.abs(lhs2 - rhs2))),
        abs(full - (-4.0 * ss)),
    )
    scale = 1.0 + float(np.max(np.abs(lhs1))) + abs(full)
    return r, scale


def _canonical_coefficient_form(ws, i):
    """Independent assembly of the canonical curvature from its coefficient
    fields, with the outer horizontal derivatives taken by finite
    differences; compared against the explicit expansion."""
    f = ws.frame(i)
    cf = ws.cf(i)
    metric = ws.metric
    bound = ws.bound

    def lh_field(q: Point):
        return Frame(eval_jet(metric, q, bound)).Lh

    def lmix_field(q: Point):
        return Frame(eval_jet(metric, q, bound)).Lmix

    def nl_field(q: Point):
        return Frame(eval_jet(metric, q, bound)).NL

    n = f.n

    def h_derivative(fld, barred):
        slot_b, slot_v = ("zbar", "vbar") if barred else ("z", "v")
        shape = np.asarray(fld(f.point)).shape
        dz = np.empty((n,) + shape, dtype=complex)
        dv = np.empty_like(dz)
        for m in range(n):
            dz[m] = field_partial(fld, f.point, slot_b, m)
            dv[m] = field_partial(fld, f.point, slot_v, m)
        return horizontal_derivative(dz, dv, f, barred=barred)

    dLmix_z = h_derivative(lmix_field, barred=False)   # [m, g, a, n]
    dLh_zb = h_derivative(lh_field, barred=True)       # [n, g, a, m]
    dNL_zb = h_derivative(nl_field, barred=True)       # [n, s, m]
    coeff = (_E("mgan->gamn", dLmix_z) - _E("ngam->gamn", dLh_zb)
             + _E("san,gsm->gamn", f.Lmix, f.Lh)
             - _E("sam,gsn->gamn", f.Lh, f.Lmix))
    r_fd = _E("gamn,gb->abmn", coeff, f.M) - _E("abs,nsm->abmn", f.Gv3, dNL_zb)
    scale = 1.0 + float(np.max(np.abs(cf.canonical)))
    return float(np.max(np.abs(r_fd - cf.canonical))), scale


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityDef:
    func: object
    anchor: str
    tol: float
    fd_backed: bool = False
    condition: str | None = None       # defect that must pass before running


IDENTITIES = {
    "euler": IdentityDef(
        _euler, "G_a v^a = G; G_ab' v^a = G_b'; G_ab'c v^c = 0", 1e-10),
    "conjugate_symmetry": IdentityDef(
        _conjugate_symmetry, "conj(T[a,b,m,n]) = T[b,a,n,m] for Omega, R, K", 1e-9),
    "flag_difference": IdentityDef(
        _flag_difference,
        "(R - Omega)[H^4] = -1/4 |antisym dG(H,H)|^2 wrt G-inverse", 1e-8),
    "sectional_difference": IdentityDef(
        _sectional_difference,
        "(R - Omega)[v^4] = -1/4 [chibar(G_l') - G_;l'] Ginv [chi(G_g) - G_;g]",
        1e-8),
    "ricci_identity": IdentityDef(
        _ricci_identity, "Ric_D = Ric_can + del'(S) + del(S')", 1e-7),
    "complexified_trace": IdentityDef(
        _complexified_trace,
        "K_mn' = R_mn' - (SoS')_mn'; s_cplx = s_can - <S,S>; <S,S> >= 0", 1e-8),
    "negativity": IdentityDef(
        _negativity, "Re (K - R)[H,H',K,K'] <= 0", 1e-10),
    "trace_relation": IdentityDef(
        _trace_relation, "Ginv L G = conj(S-trace) = -tr L", 1e-9),
    "ddbar_coefficient": IdentityDef(
        _ddbar_coefficient,
        "horizontal ddbar coefficient of the fundamental form: exact vs FD",
        1e-4, fd_backed=True),
    "codifferential_coefficient": IdentityDef(
        _codifferential,
        "2i del'(S-trace): exact Rund-route assembly vs FD", 1e-4, fd_backed=True),
    "rund_torsion_square": IdentityDef(
        _rund_torsion_square,
        "ddbar bracket = -4 G S S' when the Rund defect vanishes", 1e-7,
        condition="rund_like"),
    "balanced_contraction": IdentityDef(
        _balanced_contraction,
        "traced ddbar bracket = 2 Ginv dG Ginv conj(S); full trace = -4<S,S>",
        1e-7, condition="balanced"),
    "canonical_coefficient_form": IdentityDef(
        _canonical_coefficient_form,
        "canonical curvature from coefficient fields (outer derivatives by FD)",
        1e-4, fd_backed=True),
}


def identity_names():
    return tuple(IDENTITIES)


def _run_identity(name, ws: Workspace, tol=None,
                  classify_tol=DEFAULT_CLASSIFY_TOL) -> IdentityReport:
    try:
        ident = IDENTITIES[name]
    except KeyError:
        raise KeyError(
            f"unregistered identity {name!r}; known: {sorted(IDENTITIES)}"
        ) from None
    tol = ident.tol if tol is None else float(tol)
    if ident.condition is not None:
        defects = classify(ws.metric, ws.points, workspace=ws)
        value = getattr(defects, ident.condition)
        if value > classify_tol:
            return IdentityReport(
                name=name, anchor=ident.anchor, points=0,
                max_abs=float("nan"), max_rel=float("nan"), tol=tol,
                verdict="skipped",
                skipped_reason=(f"hypothesis defect {ident.condition} = "
                                f"{value:.3e} exceeds {classify_tol:.1e}"),
            )
    idx = range(len(ws))
    if ident.fd_backed:
        idx = range(min(len(ws), FD_POINT_CAP))
    max_abs = 0.0
    max_rel = 0.0
    count = 0
    for i in idx:
        res, scale = ident.func(ws, i)
        max_abs = max(max_abs, res)
        max_rel = max(max_rel, res / scale)
        count += 1
    verdict = "pass" if max_rel <= tol else "fail"
    return IdentityReport(name=name, anchor=ident.anchor, points=count,
                          max_abs=max_abs, max_rel=max_rel, tol=tol,
                          verdict=verdict)


def verify_identity(name: str, metric: MetricExpr, points, tol=None,
                    workspace: Workspace | None = None) -> IdentityReport:
    """Run one registered identity over an accepted sample."""
    ws = workspace if workspace is not None else Workspace(metric, points)
    return _run_identity(name, ws, tol=tol)


def verify_all(metric: MetricExpr, points, tolerances=None, names=None,
               workspace: Workspace | None = None):
    """Run a set of identities (default: all) sharing one workspace."""
    ws = workspace if workspace is not None else Workspace(metric, points)
    tolerances = tolerances or {}
    out = []
    for name in (names or IDENTITIES):
        out.append(_run_identity(name, ws, tol=tolerances.get(name)))
    return out


# ---------------------------------------------------------------------------
# conformal transformation laws
# ---------------------------------------------------------------------------

def _conformal_pointwise(base_f, base_cf, til_f, til_cf, sj, n):
    """Residual (abs, scale) per conformal law at one point."""
    erho = np.exp(sj.value)
    rz = sj.dz
    rzz = sj.dzzbar
    eye = np.eye(n)
    v = base_f.point.v
    out = {}

    def entry(lhs, rhs):
        lhs = np.asarray(lhs)
        rhs = np.asarray(rhs)
        scale = 1.0 + float(np.max(np.abs(lhs))) + float(np.max(np.abs(rhs)))
        return float(np.max(np.abs(lhs - rhs))), scale

    out["conformal_fundamental"] = entry(til_f.M, erho * base_f.M)
    out["conformal_inverse"] = entry(til_f.Mi, base_f.Mi / erho)
    out["conformal_nonlinear"] = entry(
        til_f.NL, base_f.NL + _E("m,s->sm", rz, v))
    out["conformal_horizontal"] = entry(
        til_f.Gam_h, base_f.Gam_h + _E("ab,m->abm", eye, rz))
    out["conformal_vertical"] = entry(til_f.Gam_v, base_f.Gam_v)
    out["conformal_torsion_trace"] = entry(
        til_f.S_trace, base_f.S_trace + 0.5 * (1 - n) * rz)
    corr = 0.5 * (_E("ab,mn->abmn", eye, rzz) - _E("am,bn->abmn", eye, rzz))
    out["conformal_rund_defect"] = entry(
        til_cf.rund_defect, base_cf.rund_defect + corr)
    out["conformal_ricci"] = entry(
        til_cf.ricci_chern, base_cf.ricci_chern - n * rzz)
    out["conformal_scalar"] = entry(
        til_cf.scalar_chern,
        (base_cf.scalar_chern
         - n * complex(_E("ba,ab->", base_f.Mi, rzz))) / erho)
    return out


CONFORMAL_LAWS = (
    "conformal_fundamental",
    "conformal_inverse",
    "conformal_nonlinear",
    "conformal_horizontal",
    "conformal_vertical",
    "conformal_torsion_trace",
    "conformal_rund_defect",
    "conformal_ricci",
    "conformal_scalar",
)

_CONFORMAL_ANCHORS = {
    "conformal_fundamental": "G~_ab' = e^rho G_ab'",
    "conformal_inverse": "Ginv~ = e^-rho Ginv",
    "conformal_nonlinear": "NL~[s,m] = NL[s,m] + rho_;m v^s",
    "conformal_horizontal": "Gam~^a_b;m = Gam^a_b;m + delta^a_b rho_;m",
    "conformal_vertical": "Gam~^a_bg = Gam^a_bg",
    "conformal_torsion_trace": "S~_a = S_a + (1-n)/2 rho_;a",
    "conformal_rund_defect":
        "del'(S~) = del'(S) + (delta rho_;gn' - delta rho_;bn')/2",
    "conformal_ricci": "Ric~_D = Ric_D - n rho_;mn'",
    "conformal_scalar": "s~_D = e^-rho (s_D - n Ginv rho_;ab')",
    "conformal_balanced_ricci_gap":
        "Ric_D - Ric_can = (n-1) rho_;mn' when the scaled metric is balanced",
}


def verify_conformal(metric: MetricExpr, rho: Node, points, tol: float = 1e-7,
                     classify_tol: float = DEFAULT_CLASSIFY_TOL):
    """Check every conformal transformation law between a metric and its
    rescale by e^rho over a common sample.  Returns a list of IdentityReports
    (one per law, plus the conditional balanced Ricci-gap law)."""
    slots = free_slots(rho)
    if "v" in slots or "vbar" in slots:
        raise ExpressionError("conformal factor must be base-only")
    tilde = conformal_scale(metric, rho)
    n = metric.n
    base_ws = Workspace(metric, points)
    til_ws = Workspace(tilde, points)
    sjs = [eval_scalar_jet(rho, p) for p in points]

    worst = {law: (0.0, 1.0) for law in CONFORMAL_LAWS}
    spc_failures = 0
    tilde_balanced = 0.0
    gap_worst = (0.0, 1.0)
    for i, p in enumerate(points):
        bf, bcf = base_ws.frame(i), base_ws.cf(i)
        tf, tcf = til_ws.frame(i), til_ws.cf(i)
        if tf.levi_eigenvalues.min() <= 0:
            spc_failures += 1
            continue
        rows = _conformal_pointwise(bf, bcf, tf, tcf, sjs[i], n)
        for law, (res, scale) in rows.items():
            if res / scale > worst[law][0] / worst[law][1]:
                worst[law] = (res, scale)
        tilde_balanced = max(tilde_balanced, float(np.max(np.abs(tf.S_trace))))
        gap = bcf.ricci_chern - bcf.ricci_canonical - (n - 1) * sjs[i].dzzbar
        g_res = float(np.max(np.abs(gap)))
        g_scale = 1.0 + float(np.max(np.abs(bcf.ricci_chern)))
        if g_res / g_scale > gap_worst[0] / gap_worst[1]:
            gap_worst = (g_res, g_scale)

    used = len(points) - spc_failures
    if used == 0:
        raise ExpressionError(
            "scaled metric failed strong pseudoconvexity at every sample point"
        )
    reports = []
    for law in CONFORMAL_LAWS:
        res, scale = worst[law]
        rel = res / scale
        reports.append(IdentityReport(
            name=law, anchor=_CONFORMAL_ANCHORS[law], points=used,
            max_abs=res, max_rel=rel, tol=tol,
            verdict="pass" if rel <= tol else "fail"))
    if tilde_balanced <= classify_tol:
        res, scale = gap_worst
        rel = res / scale
        reports.append(IdentityReport(
            name="conformal_balanced_ricci_gap",
            anchor=_CONFORMAL_ANCHORS["conformal_balanced_ricci_gap"],
            points=used, max_abs=res, max_rel=rel, tol=tol,
            verdict="pass" if rel <= tol else "fail"))
    else:
        reports.append(IdentityReport(
            name="conformal_balanced_ricci_gap",
            anchor=_CONFORMAL_ANCHORS["conformal_balanced_ricci_gap"],
            points=0, max_abs=float("nan"), max_rel=float("nan"), tol=tol,
            verdict="skipped",
            skipped_reason=(f"scaled-metric balanced defect {tilde_balanced:.3e} "
                            f"exceeds {classify_tol:.1e}"),
        ))
    if spc_failures:
        reports.append(IdentityReport(
            name="conformal_pseudoconvexity",
            anchor="scaled Levi matrix positive definite",
            points=len(points), max_abs=float(spc_failures),
            max_rel=float(spc_failures) / len(points), tol=0.0,
            verdict="fail",
            skipped_reason=f"{spc_failures} point(s) lost strong pseudoconvexity"))
    return reports


# ---------------------------------------------------------------------------
# Kaehler equivalence witness
# ---------------------------------------------------------------------------

def kahler_equivalence_witness(metric: MetricExpr, points, tol: float = 1e-8,
                               workspace: Workspace | None = None) -> dict:
    """Pointwise witness that the curvature-coincidence equivalences hold:
    (R equals Omega) exactly when the Kaehler defect vanishes, and the two
    sectional curvatures along v coincide exactly when the weak-Kaehler
    defect vanishes.  Reports per-point data and counterexamples."""
    ws = workspace if workspace is not None else Workspace(metric, points)
    rows = []
    counterexamples = []
    for i in range(len(ws)):
        f = ws.frame(i)
        cf = ws.cf(i)
        scale = 1.0 + float(np.max(np.abs(cf.chern)))
        curv_gap = float(np.max(np.abs(cf.canonical - cf.chern))) / scale
        kahler = ws.point_defects(i)["kahler"]
        v = f.point.v
        vb = np.conj(v)
        num = complex(_E("abmn,a,b,m,n->", cf.canonical - cf.chern, v, vb, v, vb))
        sect_gap = num.real / abs(f.G) ** 2
        weakly = ws.point_defects(i)["weakly_kahler"]
        row = {
            "point": i,
            "curvature_gap": curv_gap,
            "kahler_defect": kahler,
            "sectional_gap": sect_gap,
            "weakly_kahler_defect": weakly,
        }
        ok_strong = (curv_gap <= tol) == (kahler <= tol)
        ok_weak = (abs(sect_gap) <= tol) == (weakly <= tol)
        sign_ok = sect_gap <= 1e-12 * (1.0 + abs(num))
        row["consistent"] = bool(ok_strong and ok_weak and sign_ok)
        rows.append(row)
        if not row["consistent"]:
            counterexamples.append(row)
    return {
        "tol": tol,
        "points": len(rows),
        "per_point": rows,
        "counterexamples": counterexamples,
        "verdict": "consistent" if not counterexamples else "counterexample",
    }
