"""Pointwise geometry of a strongly pseudoconvex complex Finsler metric.

Everything here is assembled from one JetTable: the fundamental (Levi)
tensor and its inverse, the nonlinear connection, horizontal derivatives,
the Chern-Finsler / Rund / canonical connection coefficients, and the
torsion quantities.  ``Frame`` is the cached workhorse over raw ndarrays;
the module-level functions wrap its output in labelled Tensors.

Index conventions for the cached arrays (all 0-based, dimension n):

    M[a, b]        = G_{a bbar}
    Mi             = M^{-1}; the raised metric G^{bbar a} is Mi[b, a]
    NL[s, m]       = nonlinear connection coefficient (upper s, z-slot m)
    NLb[t, nv]     = its barred counterpart (conjugate at consistent points)
    DzM[m, a, b]   = del_m(G_{a bbar})          (horizontal z-derivative)
    DzbM[nv, a, b] = del_nvbar(G_{a bbar})
    D2[m, nv, a, b]  = del_nvbar(del_m(G_{a bbar})), outer derivative barred
    D2h[m, nv, a, b] = del_m(del_nvbar(G_{a bbar})), outer derivative plain
    Gam_h[al, b, m]  = horizontal Chern-Finsler coefficient (upper al)
    Gam_v[al, b, g]  = vertical Chern-Finsler coefficient
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import IllConditionedError, InconsistentPointError
from .jets.engine import JetTable
from .jets.plan import DEFAULT_BOUND
from .tensors import (ANTI_LOWER, ANTI_UPPER, HOLO_LOWER, HOLO_UPPER, Tensor)

COND_LIMIT = 1e12
HERMITIAN_TOL = 1e-9

_E = np.einsum


class Frame:
    """Cached tensor assembly over one JetTable."""

    def __init__(self, jt: JetTable, validate: bool = True):
        if not jt.bound.covers(DEFAULT_BOUND):
            raise ValueError(
                "jet bound is below the default closure required by the "
                "connection and curvature formulas"
            )
        self.jt = jt
        self.point = jt.point
        self.n = jt.n
        if validate:
            self._validate()

    def _validate(self):
        M = self.M
        scale = 1.0 + float(np.max(np.abs(M)))
        herm = float(np.max(np.abs(M - M.conj().T))) / scale
        if herm > HERMITIAN_TOL:
            raise InconsistentPointError(
                f"Levi matrix is not Hermitian (residual {herm:.2e}); "
                "the evaluation point is inconsistent"
            )
        if self.cond > COND_LIMIT:
            raise IllConditionedError(self.cond, COND_LIMIT)

    # -- raw jet pulls ------------------------------------------------------

    @cached_property
    def G(self) -> complex:
        return self.jt.value()

    @cached_property
    def Gv(self):
        return self.jt.array(v_order=1)

    @cached_property
    def Gvb(self):
        return self.jt.array(vbar_order=1)

    @cached_property
    def Gz(self):
        return self.jt.array(z_order=1)

    @cached_property
    def Gzb(self):
        return self.jt.array(zbar_order=1)

    @cached_property
    def Gvv(self):
        return self.jt.array(v_order=2)

    @cached_property
    def Gvbvb(self):
        return self.jt.array(vbar_order=2)

    @cached_property
    def Gzv(self):
        return self.jt.array(z_order=1, v_order=1)

    @cached_property
    def Gzbvb(self):
        return self.jt.array(zbar_order=1, vbar_order=1)

    @cached_property
    def M(self):
        return self.jt.array(v_order=1, vbar_order=1)

    @cached_property
    def Gv3(self):
        # axes of array(0,0,2,1) are (alpha, gamma, beta); reorder to [a, b, g]
        return self.jt.array(v_order=2, vbar_order=1).transpose(0, 2, 1)

    @cached_property
    def Gv3b(self):
        # [a, b, t] = G_{a bbar tbar}; the two vbar axes commute
        return self.jt.array(v_order=1, vbar_order=2)

    @cached_property
    def Gv4(self):
        # axes of array(0,0,2,2) are (alpha, sigma, beta, tau) -> [a, b, s, t]
        return self.jt.array(v_order=2, vbar_order=2).transpose(0, 2, 1, 3)

    @cached_property
    def Mz(self):
        return self.jt.array(z_order=1, v_order=1, vbar_order=1)

    @cached_property
    def Mzb(self):
        return self.jt.array(zbar_order=1, v_order=1, vbar_order=1)

    @cached_property
    def Mzzb(self):
        return self.jt.array(z_order=1, zbar_order=1, v_order=1, vbar_order=1)

    @cached_property
    def Mz_vb(self):
        # axes (m, alpha, beta, tau) -> [m, t, a, b]
        return self.jt.array(z_order=1, v_order=1, vbar_order=2).transpose(0, 3, 1, 2)

    @cached_property
    def Mzb_v(self):
        # axes (nv, alpha, sigma, beta) -> [nv, s, a, b]
        return self.jt.array(zbar_order=1, v_order=2, vbar_order=1).transpose(0, 2, 1, 3)

    @cached_property
    def Jzvb(self):
        return self.jt.array(z_order=1, vbar_order=1)

    @cached_property
    def Jzbv(self):
        return self.jt.array(zbar_order=1, v_order=1)

    @cached_property
    def Jzvb_zb(self):
        return self.jt.array(z_order=1, zbar_order=1, vbar_order=1)

    @cached_property
    def Jzvb_vb(self):
        return self.jt.array(z_order=1, vbar_order=2)

    @cached_property
    def Jzbv_z(self):
        return self.jt.array(z_order=1, zbar_order=1, v_order=1)

    @cached_property
    def Jzbv_v(self):
        return self.jt.array(zbar_order=1, v_order=2)

    # -- inverse and its derivatives -----------------------------------------

    @cached_property
    def Mi(self):
        return np.linalg.inv(self.M)

    @cached_property
    def cond(self) -> float:
        return float(np.linalg.cond(self.M))

    @cached_property
    def levi_eigenvalues(self):
        return np.linalg.eigvalsh(0.5 * (self.M + self.M.conj().T)).real

    @cached_property
    def dMi_z(self):
        return -_E("ia,mab,bj->mij", self.Mi, self.Mz, self.Mi)

    @cached_property
    def dMi_zb(self):
        return -_E("ia,mab,bj->mij", self.Mi, self.Mzb, self.Mi)

    @cached_property
    def dMi_v(self):
        Mv = self.Gv3.transpose(2, 0, 1)  # [s, a, b]
        return -_E("ia,sab,bj->sij", self.Mi, Mv, self.Mi)

    @cached_property
    def dMi_vb(self):
        Mvb = self.Gv3b.transpose(2, 0, 1)  # [t, a, b]
        return -_E("ia,tab,bj->tij", self.Mi, Mvb, self.Mi)

    # -- nonlinear connection --------------------------------------------------

    @cached_property
    def NL(self):
        return _E("ls,ml->sm", self.Mi, self.Jzvb)

    @cached_property
    def NLb(self):
        return _E("tl,nl->tn", self.Mi, self.Jzbv)

    @cached_property
    def dNL_zb(self):
        return (_E("nls,ml->smn", self.dMi_zb, self.Jzvb)
                + _E("ls,mnl->smn", self.Mi, self.Jzvb_zb))

    @cached_property
    def dNL_vb(self):
        return (_E("tls,ml->smt", self.dMi_vb, self.Jzvb)
                + _E("ls,mlt->smt", self.Mi, self.Jzvb_vb))

    @cached_property
    def dNL_v(self):
        return (_E("rls,ml->smr", self.dMi_v, self.Jzvb)
                + _E("ls,mrl->smr", self.Mi, self.Mz))

    @cached_property
    def hNL_zb(self):
        """del_nvbar of the nonlinear connection."""
        return self.dNL_zb - _E("tn,smt->smn", self.NLb, self.dNL_vb)

    @cached_property
    def dNLb_z(self):
        return (_E("mtl,nl->tnm", self.dMi_z, self.Jzbv)
                + _E("tl,mnl->tnm", self.Mi, self.Jzbv_z))

    @cached_property
    def dNLb_v(self):
        return (_E("stl,nl->tns", self.dMi_v, self.Jzbv)
                + _E("tl,nls->tns", self.Mi, self.Jzbv_v))

    @cached_property
    def hNLb_z(self):
        """del_m of the barred nonlinear connection."""
        return self.dNLb_z - _E("sm,tns->tnm", self.NL, self.dNLb_v)

    # -- horizontal derivatives of the Levi tensor ------------------------------

    @cached_property
    def DzM(self):
        return self.Mz - _E("sm,abs->mab", self.NL, self.Gv3)

    @cached_property
    def DzbM(self):
        return self.Mzb - _E("tn,abt->nab", self.NLb, self.Gv3b)

    @cached_property
    def DzM_zb(self):
        return (self.Mzzb
                - _E("smn,abs->mnab", self.dNL_zb, self.Gv3)
                - _E("sm,nsab->mnab", self.NL, self.Mzb_v))

    @cached_property
    def DzM_vb(self):
        return (self.Mz_vb
                - _E("smt,abs->mtab", self.dNL_vb, self.Gv3)
                - _E("sm,abst->mtab", self.NL, self.Gv4))

    @cached_property
    def D2(self):
        """del_nvbar(del_m(G_{a bbar})) with the barred derivative outermost."""
        return self.DzM_zb - _E("tn,mtab->mnab", self.NLb, self.DzM_vb)

    @cached_property
    def DzbM_z(self):
        return (self.Mzzb.transpose(1, 0, 2, 3)
                - _E("tnm,abt->nmab", self.dNLb_z, self.Gv3b)
                - _E("tn,mtab->nmab", self.NLb, self.Mz_vb))

    @cached_property
    def DzbM_v(self):
        return (self.Mzb_v
                - _E("tns,abt->nsab", self.dNLb_v, self.Gv3b)
                - _E("tn,abst->nsab", self.NLb, self.Gv4))

    @cached_property
    def D2h(self):
        """del_m(del_nvbar(G_{a bbar})) with the plain derivative outermost."""
        return (self.DzbM_z - _E("sm,nsab->nmab", self.NL, self.DzbM_v)
                ).transpose(1, 0, 2, 3)

    # -- connection coefficients -------------------------------------------------

    @cached_property
    def Gam_h(self):
        """Horizontal Chern-Finsler coefficients [upper, lower, z-slot]."""
        return _E("la,mbl->abm", self.Mi, self.DzM)

    @cached_property
    def Gam_v(self):
        """Vertical Chern-Finsler coefficients [upper, lower, fiber-slot]."""
        return _E("la,blg->abg", self.Mi, self.Gv3)

    @cached_property
    def Gam_h_bar(self):
        """Barred horizontal coefficients (conjugates at consistent points)."""
        return _E("al,mlb->abm", self.Mi, self.DzbM)

    @cached_property
    def Gam_h_zb(self):
        return (_E("nla,mbl->abmn", self.dMi_zb, self.DzM)
                + _E("la,mnbl->abmn", self.Mi, self.DzM_zb))

    @cached_property
    def Gam_h_vb(self):
        return (_E("tla,mbl->abmt", self.dMi_vb, self.DzM)
                + _E("la,mtbl->abmt", self.Mi, self.DzM_vb))

    @cached_property
    def Gam_v_zb(self):
        return (_E("nla,blg->abgn", self.dMi_zb, self.Gv3)
                + _E("la,ngbl->abgn", self.Mi, self.Mzb_v))

    @cached_property
    def Gam_v_vb(self):
        return (_E("tla,blg->abgt", self.dMi_vb, self.Gv3)
                + _E("la,blgt->abgt", self.Mi, self.Gv4))

    @cached_property
    def Lh(self):
        """Symmetrized horizontal coefficients of the canonical connection."""
        sym = self.DzM + _E("mbl->bml", self.DzM)
        return 0.5 * _E("la,mbl->abm", self.Mi, sym)

    @cached_property
    def Lmix(self):
        """Mixed-type canonical coefficients [upper, lower, zbar-slot]."""
        asym = self.DzbM - _E("nbl->lbn", self.DzbM)
        return 0.5 * _E("la,nbl->abn", self.Mi, asym)

    # -- torsions --------------------------------------------------------------

    @cached_property
    def S_up(self):
        """Antisymmetric horizontal torsion [upper, lower, lower]."""
        return 0.5 * (self.Gam_h - self.Gam_h.transpose(0, 2, 1))

    @cached_property
    def S_trace(self):
        return _E("gag->a", self.S_up)

    @cached_property
    def S_low(self):
        """All-lower torsion [a, g, lbar]."""
        return 0.5 * (self.DzM.transpose(1, 0, 2) - self.DzM)

    @cached_property
    def weak_kahler_vector(self):
        diff = self.Gam_h - self.Gam_h.transpose(0, 2, 1)
        return _E("a,abm,b->m", self.Gv, diff, self.point.v)

    # -- derived reports ---------------------------------------------------------

    def euler_residuals(self) -> dict:
        """Relative residuals of the degree-(1,1) homogeneity identities."""
        G = self.G
        v = self.point.v
        vb = np.conj(v)
        scale = 1.0 + abs(G)
        r = {
            "Gv_contraction": abs(_E("a,a->", self.Gv, v) - G) / scale,
            "levi_reproduces_Gvb": float(np.max(np.abs(
                _E("ab,a->b", self.M, v) - self.Gvb))) / (1.0 + float(np.max(np.abs(self.Gvb)))),
            "levi_contraction": abs(_E("ab,a,b->", self.M, v, vb) - G) / scale,
            "third_order_radial": float(np.max(np.abs(
                _E("abg,g->ab", self.Gv3, v)))) / (1.0 + float(np.max(np.abs(self.M)))),
        }
        return r

    def inverse_residual(self) -> float:
        return float(np.max(np.abs(self.Mi @ self.M - np.eye(self.n))))


# ---------------------------------------------------------------------------
# public operations returning labelled tensors
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FrameData:
    fundamental: Tensor       # G_{a bbar}
    inverse: Tensor           # G^{bbar a}
    nonlinear: Tensor         # nonlinear connection [upper, z-slot]
    condition_number: float


@dataclass(frozen=True, eq=False)
class TorsionData:
    horizontal: Tensor        # antisymmetric [upper, lower, lower]
    trace: Tensor             # [lower]
    mixed: Tensor             # mixed-type coefficients [upper, lower, anti-lower]
    lowered: Tensor           # all-lower torsion [lower, lower, anti-lower]
    weak_kahler: Tensor       # contracted defect vector [lower]


def frame_data(frame: Frame) -> FrameData:
    p = frame.point
    return FrameData(
        fundamental=Tensor(frame.M, (HOLO_LOWER, ANTI_LOWER), p),
        inverse=Tensor(frame.Mi.T, (ANTI_UPPER, HOLO_UPPER), p),
        nonlinear=Tensor(frame.NL, (HOLO_UPPER, HOLO_LOWER), p),
        condition_number=frame.cond,
    )


def fundamental_tensor(jt: JetTable, validate: bool = True) -> FrameData:
    return frame_data(Frame(jt, validate=validate))


def nonlinear_connection(frame: Frame) -> Tensor:
    return Tensor(frame.NL, (HOLO_UPPER, HOLO_LOWER), frame.point)


def horizontal_derivative(d_base, d_vert, frame: Frame, barred: bool = False):
    """Horizontal derivative from caller-supplied partial data.

    ``d_base``: base-slot partials with the derivative index leading
    (z-partials for the plain operator, zbar-partials for the barred one).
    ``d_vert``: fiber partials with the derivative index leading (v for plain,
    vbar for barred).  Returns an ndarray shaped like ``d_base``.
    """
    d_base = np.asarray(d_base, dtype=complex)
    d_vert = np.asarray(d_vert, dtype=complex)
    coeff = frame.NLb if barred else frame.NL
    return d_base - np.tensordot(coeff.T, d_vert, axes=(1, 0))


def chern_finsler_coeffs(frame: Frame):
    p = frame.point
    horizontal = Tensor(frame.Gam_h, (HOLO_UPPER, HOLO_LOWER, HOLO_LOWER), p)
    vertical = Tensor(frame.Gam_v, (HOLO_UPPER, HOLO_LOWER, HOLO_LOWER), p)
    return horizontal, vertical


def rund_coeffs(frame: Frame) -> Tensor:
    # the Rund connection keeps only the horizontal Chern-Finsler part
    return chern_finsler_coeffs(frame)[0]


def canonical_coeffs(frame: Frame):
    p = frame.point
    return (
        Tensor(frame.Lh, (HOLO_UPPER, HOLO_LOWER, HOLO_LOWER), p),
        Tensor(frame.Lmix, (HOLO_UPPER, HOLO_LOWER, ANTI_LOWER), p),
        Tensor(frame.Gam_v, (HOLO_UPPER, HOLO_LOWER, HOLO_LOWER), p),
    )


def torsions(frame: Frame) -> TorsionData:
    p = frame.point
    return TorsionData(
        horizontal=Tensor(frame.S_up, (HOLO_UPPER, HOLO_LOWER, HOLO_LOWER), p),
        trace=Tensor(frame.S_trace, (HOLO_LOWER,), p),
        mixed=Tensor(frame.Lmix, (HOLO_UPPER, HOLO_LOWER, ANTI_LOWER), p),
        lowered=Tensor(frame.S_low, (HOLO_LOWER, HOLO_LOWER, ANTI_LOWER), p),
        weak_kahler=Tensor(frame.weak_kahler_vector, (HOLO_LOWER,), p),
    )


@dataclass(frozen=True, eq=False)
class TorsionFormCoeffs:
    antisym_horizontal: Tensor   # (2,0)-torsion dz wedge dz block
    vertical_mixed: Tensor       # (2,0)-torsion dv wedge dz block
    nonlinear_zbar: Tensor       # (1,1)-torsion horizontal block
    nonlinear_vbar: Tensor       # (1,1)-torsion fiber block


def torsion_form_coeffs(frame: Frame) -> TorsionFormCoeffs:
    p = frame.point
    return TorsionFormCoeffs(
        antisym_horizontal=Tensor(frame.S_up, (HOLO_UPPER, HOLO_LOWER, HOLO_LOWER), p),
        vertical_mixed=Tensor(frame.Gam_v, (HOLO_UPPER, HOLO_LOWER, HOLO_LOWER), p),
        nonlinear_zbar=Tensor(
            frame.hNL_zb, (HOLO_UPPER, HOLO_LOWER, ANTI_LOWER), p),
        nonlinear_vbar=Tensor(
            frame.dNL_vb, (HOLO_UPPER, HOLO_LOWER, ANTI_LOWER), p),
    )
