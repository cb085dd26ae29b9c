import numpy as np
import pytest

from conftest import make_points
from finslerlab.catalog import (build_catalog_metric, build_hermitian,
                                hermitian_diag_exp, hermitian_fubini_study,
                                rho_named)
from finslerlab.curvature import (CurvatureFrame, canonical_curvature,
                                  chern_curvature,
                                  conjugate_symmetry_residual,
                                  curvature_bundle, flag_and_sectional,
                                  ricci_and_scalars, rund_curvature,
                                  torsion_square)
from finslerlab.geometry import Frame
from finslerlab.jets import OrderBound, eval_jet, eval_scalar_jet
from finslerlab.points import Point

_E = np.einsum


def get_cf(name, seed=0, point=None, **kw):
    m = build_catalog_metric(name, **kw)
    p = point if point is not None else make_points(m.n, 1, seed=seed)[0]
    f = Frame(eval_jet(m, p))
    return m, p, f, CurvatureFrame(f)


def classical_hermitian_curvature(h, p):
    """Independent evaluation of the Chern curvature of a Hermitian metric:
    -dd' h + dh hinv d'h, from scalar jets of the matrix entries."""
    n = h.n
    hval = h.value(p.z)
    hinv = np.linalg.inv(hval)
    hz = np.empty((n, n, n), dtype=complex)     # [a, b, m] = d_m h_{a bbar}
    hzb = np.empty((n, n, n), dtype=complex)    # [a, b, nv]
    hzzb = np.empty((n, n, n, n), dtype=complex)  # [a, b, m, nv]
    for a in range(n):
        for b in range(n):
            sj = eval_scalar_jet(h.entries[a][b], p)
            hz[a, b] = sj.dz
            hzb[a, b] = sj.dzbar
            hzzb[a, b] = sj.dzzbar
    quad = _E("alm,lk,kbn->abmn", hz, hinv, hzb)
    return -hzzb + quad


class TestFlatVanishing:
    def test_everything_zero(self):
        _, _, f, cf = get_cf("flat", n=3)
        for arr in (cf.chern, cf.chern_upper, cf.chern_mixed_v,
                    cf.chern_mixed_vb, cf.chern_vertical, cf.rund_horizontal,
                    cf.canonical, cf.complexified, cf.torsion_square,
                    cf.ricci_chern, cf.ricci_canonical):
            assert np.max(np.abs(arr)) <= 1e-12
        assert abs(cf.scalar_chern) <= 1e-12
        assert abs(cf.torsion_square_scalar) <= 1e-12


class TestChernCurvature:
    def test_hermitian_matches_classical_formula(self):
        for h in (hermitian_fubini_study(2), hermitian_diag_exp(2, c=0.9)):
            m = build_hermitian(h)
            p = make_points(2, 1, seed=1)[0]
            f = Frame(eval_jet(m, p))
            cf = CurvatureFrame(f)
            expected = classical_hermitian_curvature(h, p)
            assert np.max(np.abs(cf.chern - expected)) < 1e-11

    def test_v_independence_for_hermitian(self):
        m = build_catalog_metric("hermitian_diag_exp", n=2, c=0.5)
        p = make_points(2, 1, seed=2)[0]
        p2 = Point(p.z, 2.3 * p.v)
        c1 = CurvatureFrame(Frame(eval_jet(m, p))).chern
        c2 = CurvatureFrame(Frame(eval_jet(m, p2))).chern
        assert np.allclose(c1, c2, atol=1e-12)

    def test_conformal_ricci_law(self):
        n = 2
        m, p, f, cf = get_cf("conformally_flat", n=n, rho="z1zb1", seed=3)
        sj = eval_scalar_jet(rho_named("z1zb1"), p)
        assert np.allclose(cf.ricci_chern, -n * sj.dzzbar, atol=1e-11)
        # frozen derived value: at any point the (1,1)-entry equals -n
        assert cf.ricci_chern[0, 0] == pytest.approx(-2.0, abs=1e-12)

    def test_wrapper_blocks(self):
        m, p, f, cf = get_cf("randers", c=0.4, seed=4)
        blocks = chern_curvature(f)
        assert len(blocks) == 4
        assert np.allclose(blocks[0].values, cf.chern)


class TestRundCurvature:
    def test_relation_to_chern_by_independent_raise(self):
        for name, kw in [("randers", {"c": 0.4}), ("szabo", {"k": 2.0}),
                         ("conformally_flat", {"rho": "z1zb1"})]:
            m, p, f, cf = get_cf(name, seed=5, **kw)
            assert cf.decomposition_residual() < 1e-9

    def test_hermitian_rund_equals_chern(self):
        # vertical coefficients vanish for Hermitian metrics
        m, p, f, cf = get_cf("hermitian_diag_exp", n=2, seed=6)
        raised = _E("abmn,bk->kamn", cf.chern, f.Mi)
        assert np.max(np.abs(raised - cf.rund_horizontal)) < 1e-11

    def test_szabo_blocks(self):
        m = build_catalog_metric("szabo", n1=2, n2=1, factor1="diag_exp",
                                 factor2="flat", k=2.0)
        p = make_points(3, 1, seed=7)[0]
        f = Frame(eval_jet(m, p))
        cf = CurvatureFrame(f)
        R = cf.rund_horizontal
        # only within-factor-1 components are nonzero; factor 2 is flat
        mask = np.zeros((3, 3, 3, 3), dtype=bool)
        mask[:2, :2, :2, :2] = True
        assert np.max(np.abs(R[~mask])) < 1e-9
        assert np.max(np.abs(R[mask])) > 1e-3

    def test_fiber_block_needs_upgraded_bound(self):
        m = build_catalog_metric("fubini_study", n=2)
        p = make_points(2, 1, seed=8)[0]
        f = Frame(eval_jet(m, p))
        with pytest.raises(ValueError):
            rund_curvature(f, include_fiber_block=True)
        f3 = Frame(eval_jet(m, p, OrderBound(max_v=3)))
        blocks = rund_curvature(f3, include_fiber_block=True)
        assert len(blocks) == 3
        # Hermitian metric: coefficients are v-independent, fiber block vanishes
        assert blocks[2].max_abs() < 1e-11


class TestCanonicalCurvature:
    def test_kahler_equals_chern(self):
        for p in make_points(2, 3, seed=9):
            _, _, f, cf = get_cf("fubini_study", point=p)
            scale = 1 + np.max(np.abs(cf.chern))
            assert np.max(np.abs(cf.canonical - cf.chern)) / scale < 1e-12

    def test_non_kahler_differs(self):
        _, _, f, cf = get_cf("conformally_flat", n=2, rho="re_z1", seed=10)
        assert np.max(np.abs(cf.canonical - cf.chern)) > 1e-3

    def test_conformal_flat_ricci(self):
        # hand-derived: canonical Ricci of e^rho flat is -rho_mixed-hessian
        m, p, f, cf = get_cf("conformally_flat", n=2, rho="z1zb1", seed=11)
        sj = eval_scalar_jet(rho_named("z1zb1"), p)
        assert np.allclose(cf.ricci_canonical, -sj.dzzbar, atol=1e-11)

    def test_wrapper(self):
        m, p, f, cf = get_cf("randers", c=0.4, seed=12)
        t = canonical_curvature(f)
        assert np.allclose(t.values, cf.canonical)


class TestComplexified:
    def test_kahler_correction_vanishes(self):
        _, _, f, cf = get_cf("fubini_study", n=2, seed=13)
        assert np.max(np.abs(cf.complexified - cf.canonical)) < 1e-12

    def test_trace_identity(self):
        for name, kw in [("randers", {"c": 0.4}),
                         ("conformally_flat", {"rho": "re_z1"}),
                         ("szabo", {"k": 2.0})]:
            m, p, f, cf = get_cf(name, seed=14, **kw)
            k_direct = _E("ba,abmn->mn", f.Mi, cf.complexified)
            assert np.max(np.abs(k_direct - (cf.ricci_canonical
                                             - cf.torsion_square))) < 1e-12

    def test_difference_is_negative_semidefinite(self, rng):
        _, _, f, cf = get_cf("conformally_flat", n=2, rho="z1zb1", seed=15)
        diff = cf.complexified - cf.canonical
        for _ in range(20):
            H = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            K = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            val = complex(_E("abmn,a,b,m,n->", diff, H, np.conj(H), K, np.conj(K)))
            assert val.real <= 1e-12 * (1 + abs(val))
            assert abs(val.imag) <= 1e-12 * (1 + abs(val))


class TestTorsionSquare:
    def test_kahler_vanishes(self):
        _, _, f, cf = get_cf("fubini_study", n=2, seed=16)
        t, s = torsion_square(f)
        assert t.max_abs() < 1e-13
        assert abs(s) < 1e-13

    def test_positive_where_torsion_lives(self):
        _, _, f, cf = get_cf("conformally_flat", n=2, rho="z1zb1", seed=17)
        assert cf.torsion_square_scalar.real > 1e-4

    def test_scalar_is_real_nonnegative(self):
        for name, kw in [("randers", {"c": 0.4}),
                         ("conformally_flat", {"rho": "re_z1"}),
                         ("hermitian_diag_exp", {})]:
            m, p, f, cf = get_cf(name, seed=18, **kw)
            s = cf.torsion_square_scalar
            assert s.real >= -1e-12
            assert abs(s.imag) <= 1e-12 * (1 + abs(s))


class TestConjugateSymmetry:
    def test_all_tensors_all_metrics(self):
        for name, kw in [("fubini_study", {}), ("randers", {"c": 0.4}),
                         ("szabo", {"k": 2.0}),
                         ("conformally_flat", {"rho": "z1zb1"}),
                         ("hermitian_diag_exp", {})]:
            m, p, f, cf = get_cf(name, seed=19, **kw)
            for T in (cf.chern, cf.canonical, cf.complexified):
                assert conjugate_symmetry_residual(T) < 1e-9


class TestRicciAndScalars:
    def test_bundle_and_dict(self):
        m, p, f, cf = get_cf("conformally_flat", n=2, rho="z1zb1", seed=20)
        out = ricci_and_scalars(f)
        assert np.allclose(out["ricci_chern"].values, cf.ricci_chern)
        assert out["scalar_chern"] == pytest.approx(cf.scalar_chern.real)
        b = curvature_bundle(f)
        assert np.allclose(b.ricci_complexified.values,
                           cf.ricci_canonical - cf.torsion_square)
        assert b.scalar_complexified == pytest.approx(
            (cf.scalar_canonical - cf.torsion_square_scalar).real)

    def test_scalars_real(self):
        m, p, f, cf = get_cf("randers", c=0.4, seed=21)
        for s in (cf.scalar_chern, cf.scalar_canonical, cf.scalar_complexified):
            assert abs(s.imag) <= 1e-9 * (1 + abs(s))


class TestFlagCurvatures:
    def test_flat_zero(self):
        _, _, f, _ = get_cf("flat", n=2)
        out = flag_and_sectional(f, H=np.array([1.0, 2.0j]))
        assert out["flag_chern"] == 0
        assert out["sectional_canonical"] == 0

    def test_scaling_invariance(self, rng):
        m, p, f, cf = get_cf("fubini_study", n=2, seed=22)
        H = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        base = flag_and_sectional(f, H=H)
        for lam in (2.0, -0.5 + 1.3j):
            scaled = flag_and_sectional(f, H=lam * H)
            assert scaled["flag_chern"] == pytest.approx(base["flag_chern"],
                                                         rel=1e-10)
            assert scaled["flag_canonical"] == pytest.approx(
                base["flag_canonical"], rel=1e-10)

    def test_kahler_sectional_equality(self):
        _, _, f, _ = get_cf("fubini_study", n=2, seed=23)
        out = flag_and_sectional(f)
        assert out["sectional_chern"] == pytest.approx(
            out["sectional_canonical"], rel=1e-10)

    def test_zero_vector_rejected(self):
        _, _, f, _ = get_cf("flat", n=2)
        with pytest.raises(ValueError):
            flag_and_sectional(f, H=np.zeros(2))

    def test_unsquared_variant_reported(self):
        _, _, f, _ = get_cf("fubini_study", n=2, seed=24)
        out = flag_and_sectional(f, H=np.array([0.3, 0.9j]))
        assert "flag_chern_unsquared" in out


class TestExchangeAsymmetry:
    def test_exchange_formula(self):
        # K is not symmetric under swapping its Hermitian index pairs; the
        # gap is a commutator expression, verified here on a product metric
        # where it is genuinely nonzero
        m = build_catalog_metric("szabo", n1=1, n2=1, k=2.0,
                                 factor1="fubini_study",
                                 factor2="fubini_study")
        p = make_points(2, 1, seed=30)[0]
        f = Frame(eval_jet(m, p))
        cf = CurvatureFrame(f)
        K = cf.complexified
        lhs = K - K.transpose(2, 3, 0, 1)
        C = (_E("smn,abs->abmn", f.hNL_zb, f.Gv3)
             - _E("tnm,abt->abmn", f.hNLb_z, f.Gv3b))
        disp = 0.5 * (_E("mnab->abmn", C) - C + _E("mban->abmn", C)
                      - _E("anmb->abmn", C)) \
            + _E("tba,mnt->abmn", f.hNLb_z, f.Gv3b) \
            - _E("tnm,abt->abmn", f.hNLb_z, f.Gv3b)
        assert np.max(np.abs(lhs)) > 0.1  # genuinely asymmetric here
        scale = 1 + np.max(np.abs(lhs))
        assert np.max(np.abs(lhs - disp)) / scale < 1e-12


def _z_dependent_randers():
    # non-constant one-form makes the horizontal coefficients genuinely
    # fiber-dependent, so every curvature block is exercised
    from finslerlab.catalog import HermitianData, build_randers
    from finslerlab.expressions import add, const, mul, zvar
    b = [add(const(0.5), mul(const(0.3), zvar(0))), const(0)]
    return build_randers(HermitianData.identity(2), b, name="randers_zdep")


class TestRundBlocksAgainstFd:
    def test_fiber_block_matches_field_differences(self):
        from finslerlab.oracle import field_partial
        m = _z_dependent_randers()
        p = make_points(2, 1, seed=35)[0]
        f3 = Frame(eval_jet(m, p, OrderBound(max_v=3)))
        fiber = rund_curvature(f3, include_fiber_block=True)[2].values
        assert np.max(np.abs(fiber)) > 1e-3  # nontrivial here

        def gh(q):
            return Frame(eval_jet(m, q)).Gam_h

        fd = np.stack([field_partial(gh, p, "v", r) for r in range(2)])
        assert np.max(np.abs(fiber + _E("rabm->abmr", fd))) < 1e-8

    def test_horizontal_block_matches_field_differences(self):
        from finslerlab.geometry import horizontal_derivative
        from finslerlab.oracle import field_partial
        m = _z_dependent_randers()
        p = make_points(2, 1, seed=35)[0]
        f = Frame(eval_jet(m, p))
        cf = CurvatureFrame(f)

        def gh(q):
            return Frame(eval_jet(m, q)).Gam_h

        dzb = np.stack([field_partial(gh, p, "zbar", k) for k in range(2)])
        dvb = np.stack([field_partial(gh, p, "vbar", k) for k in range(2)])
        hfd = horizontal_derivative(dzb, dvb, f, barred=True)
        assert np.max(np.abs(cf.rund_horizontal
                             + _E("nabm->abmn", hfd))) < 1e-8


class TestDimensionFour:
    def test_identities_hold_at_n4(self):
        m = build_catalog_metric("szabo", n1=2, n2=2, k=2.0,
                                 factor1="fubini_study", factor2="diag_exp")
        p = make_points(4, 1, seed=34)[0]
        f = Frame(eval_jet(m, p))
        cf = CurvatureFrame(f)
        lhs = cf.ricci_chern
        rhs = cf.ricci_canonical + cf.dS_zb + cf.dSbar_z
        scale = 1 + np.max(np.abs(lhs))
        assert np.max(np.abs(lhs - rhs)) / scale < 1e-12
        assert conjugate_symmetry_residual(cf.complexified) < 1e-12
        assert cf.decomposition_residual() < 1e-12
        assert cf.torsion_square_scalar.real >= -1e-12
