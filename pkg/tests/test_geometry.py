import numpy as np
import pytest

from conftest import make_points
from finslerlab.catalog import (build_catalog_metric, build_hermitian,
                                hermitian_diag_exp, hermitian_fubini_study,
                                rho_named)
from finslerlab.geometry import (Frame, canonical_coeffs, chern_finsler_coeffs,
                                 fundamental_tensor, horizontal_derivative,
                                 nonlinear_connection, rund_coeffs,
                                 torsion_form_coeffs, torsions)
from finslerlab.jets import eval_jet, eval_scalar_jet
from finslerlab.oracle import field_partial
from finslerlab.points import Point
from finslerlab.tensors import Tensor, ensure_same_point

_E = np.einsum


def get_frame(name, seed=0, point=None, **kw):
    m = build_catalog_metric(name, **kw)
    p = point if point is not None else make_points(m.n, 1, seed=seed)[0]
    return m, p, Frame(eval_jet(m, p))


class TestFundamentalTensor:
    def test_flat_identity(self):
        _, _, f = get_frame("flat", n=2)
        assert np.allclose(f.M, np.eye(2))
        assert f.inverse_residual() < 1e-14

    def test_hermitian_levi_is_v_independent(self):
        m = build_catalog_metric("hermitian_diag_exp", n=2, c=0.8)
        p = make_points(2, 1, seed=1)[0]
        p2 = Point(p.z, 3.7 * p.v)
        M1 = Frame(eval_jet(m, p)).M
        M2 = Frame(eval_jet(m, p2)).M
        assert np.allclose(M1, M2)

    def test_inverse_contract_all_catalog(self):
        for name, kw in [("fubini_study", {}), ("randers", {"c": 0.4}),
                         ("szabo", {"k": 2.0}),
                         ("conformally_flat", {"rho": "z1zb1"})]:
            m = build_catalog_metric(name, **kw)
            for p in make_points(m.n, 4, seed=2):
                f = Frame(eval_jet(m, p))
                assert f.inverse_residual() < 1e-10

    def test_frame_data_wrapper(self):
        m = build_catalog_metric("fubini_study", n=2)
        p = make_points(2, 1, seed=3)[0]
        fd = fundamental_tensor(eval_jet(m, p))
        assert fd.fundamental.labels == ("holo-lower", "antiholo-lower")
        assert fd.inverse.labels == ("antiholo-upper", "holo-upper")
        assert fd.condition_number < 1e3
        # raised metric contracts back to the identity
        prod = _E("ba,al->bl", fd.inverse.values.T, fd.fundamental.values)
        assert np.allclose(prod, np.eye(2), atol=1e-12)


class TestNonlinearConnection:
    def test_flat_vanishes(self):
        _, _, f = get_frame("flat", n=2)
        assert np.max(np.abs(f.NL)) < 1e-14

    def test_hermitian_closed_form(self):
        # for G = h_bt(z) v^b vbar^t the coefficients are h^{lt} (d_m h_{bl}) v^b
        h = hermitian_fubini_study(2)
        m = build_hermitian(h)
        p = make_points(2, 1, seed=4)[0]
        f = Frame(eval_jet(m, p))
        hz = np.array([[eval_scalar_jet(h.entries[a][b], p).dz
                        for b in range(2)] for a in range(2)])
        # hz[a, b, m] = d_m h_{a bbar}
        hval = h.value(p.z)
        hinv = np.linalg.inv(hval)
        expected = _E("ls,blm,b->sm", hinv, hz, p.v)
        assert np.allclose(f.NL, expected, atol=1e-12)

    def test_conformal_of_flat(self):
        m, p, f = get_frame("conformally_flat", n=2, rho="z1zb1", seed=5)
        sj = eval_scalar_jet(rho_named("z1zb1"), p)
        assert np.allclose(f.NL, _E("m,s->sm", sj.dz, p.v), atol=1e-13)

    def test_degree_one_homogeneity(self, rng):
        m = build_catalog_metric("szabo", n1=1, n2=1, k=2.0)
        p = make_points(2, 1, seed=6)[0]
        f1 = Frame(eval_jet(m, p))
        for _ in range(3):
            lam = complex(rng.standard_normal(), rng.standard_normal())
            f2 = Frame(eval_jet(m, Point(p.z, lam * p.v)))
            rel = np.max(np.abs(f2.NL - lam * f1.NL)) / (1 + np.max(np.abs(f1.NL)))
            assert rel < 1e-9

    def test_tensor_wrapper(self):
        m, p, f = get_frame("fubini_study", n=2, seed=7)
        t = nonlinear_connection(f)
        assert t.labels == ("holo-upper", "holo-lower")
        assert np.allclose(t.values, f.NL)


class TestHorizontalDerivative:
    def test_delta_of_G_vanishes(self):
        # del_m(G) = G_;m - NL^s_m G_s = 0 for every metric by homogeneity
        for name, kw in [("fubini_study", {}), ("randers", {"c": 0.4}),
                         ("szabo", {"k": 2.0}), ("hermitian_diag_exp", {})]:
            m = build_catalog_metric(name, **kw)
            for p in make_points(m.n, 3, seed=8):
                f = Frame(eval_jet(m, p))
                ds = horizontal_derivative(f.Gz, f.Gv, f)
                assert np.max(np.abs(ds)) < 1e-12 * (1 + np.max(np.abs(f.Gz)))

    def test_matches_field_fd(self):
        m = build_catalog_metric("hermitian_diag_exp", n=2, c=0.6)
        p = make_points(2, 1, seed=9)[0]
        f = Frame(eval_jet(m, p))

        def levi(q):
            return eval_jet(m, q).array(v_order=1, vbar_order=1)

        dz = np.stack([field_partial(levi, p, "z", i) for i in range(2)])
        dv = np.stack([field_partial(levi, p, "v", i) for i in range(2)])
        fd = horizontal_derivative(dz, dv, f)
        assert np.max(np.abs(fd - f.DzM)) < 1e-8

    def test_barred_derivative_is_conjugate(self):
        m, p, f = get_frame("randers", c=0.4, seed=10)
        # del_nbar(G_{a bbar}) = conj(del_n(G_{b abar})) at consistent points
        assert np.allclose(f.DzbM, np.conj(f.DzM.transpose(0, 2, 1)), atol=1e-12)


class TestChernCoeffs:
    def test_flat_vanishes(self):
        _, _, f = get_frame("flat", n=3)
        assert np.max(np.abs(f.Gam_h)) == 0
        assert np.max(np.abs(f.Gam_v)) == 0

    def test_conformal_shift(self):
        m, p, f = get_frame("conformally_flat", n=2, rho="re_z1", seed=11)
        sj = eval_scalar_jet(rho_named("re_z1"), p)
        expected = _E("ab,m->abm", np.eye(2), sj.dz)
        assert np.allclose(f.Gam_h, expected, atol=1e-12)
        assert np.max(np.abs(f.Gam_v)) < 1e-13

    def test_szabo_cross_blocks_vanish(self):
        m = build_catalog_metric("szabo", n1=2, n2=1, factor1="fubini_study",
                                 factor2="flat", k=2.0, eps=0.7)
        p = make_points(3, 1, seed=12)[0]
        f = Frame(eval_jet(m, p))
        gh = f.Gam_h
        blocks = [gh[:2, 2:, :], gh[2:, :2, :], gh[:2, :, 2:], gh[2:, :, :2]]
        for blk in blocks:
            assert np.max(np.abs(blk)) < 1e-9

    def test_nonlinear_contraction(self):
        # Gam^a_{b;m} v^b = NL^a_m for every metric
        m, p, f = get_frame("szabo", k=2.0, seed=13)
        assert np.allclose(_E("abm,b->am", f.Gam_h, p.v), f.NL, atol=1e-11)

    def test_wrappers(self):
        m, p, f = get_frame("fubini_study", n=2, seed=14)
        th, tv = chern_finsler_coeffs(f)
        tr = rund_coeffs(f)
        assert np.allclose(th.values, tr.values)
        assert tv.labels == ("holo-upper", "holo-lower", "holo-lower")


class TestCanonicalCoeffs:
    def test_flat_vanishes(self):
        _, _, f = get_frame("flat", n=2)
        assert np.max(np.abs(f.Lh)) == 0
        assert np.max(np.abs(f.Lmix)) == 0

    def test_kahler_symmetrization_is_idempotent(self):
        # on a Kaehler Hermitian metric L^a_{bm} = Gam^a_{b;m} and L-mixed = 0
        m, p, f = get_frame("fubini_study", n=2, seed=15)
        assert np.max(np.abs(f.Lh - f.Gam_h)) < 1e-12
        assert np.max(np.abs(f.Lmix)) < 1e-12

    def test_conformal_flat_mixed_matches_fd_assembly(self):
        m = build_catalog_metric("conformally_flat", n=2, rho="z1zb1")
        p = make_points(2, 1, seed=16)[0]
        f = Frame(eval_jet(m, p))

        def levi(q):
            return eval_jet(m, q).array(v_order=1, vbar_order=1)

        dzb = np.stack([field_partial(levi, p, "zbar", i) for i in range(2)])
        dvb = np.stack([field_partial(levi, p, "vbar", i) for i in range(2)])
        DzbM_fd = horizontal_derivative(dzb, dvb, f, barred=True)
        asym = DzbM_fd - _E("nbl->lbn", DzbM_fd)
        Lmix_fd = 0.5 * _E("la,nbl->abn", f.Mi, asym)
        assert np.max(np.abs(Lmix_fd - f.Lmix)) < 1e-8

    def test_vertical_part_equals_chern(self):
        m, p, f = get_frame("randers", c=0.4, seed=17)
        lh, lmix, cv = canonical_coeffs(f)
        assert np.allclose(cv.values, f.Gam_v)


class TestTorsions:
    def test_flat_all_zero(self):
        _, _, f = get_frame("flat", n=2)
        td = torsions(f)
        for t in (td.horizontal, td.trace, td.mixed, td.lowered, td.weak_kahler):
            assert t.max_abs() == 0

    def test_antisymmetry_exact(self):
        m, p, f = get_frame("hermitian_diag_exp", n=2, seed=18)
        assert np.max(np.abs(f.S_up + f.S_up.transpose(0, 2, 1))) == 0
        assert np.max(np.abs(f.S_low + f.S_low.transpose(1, 0, 2))) == 0

    def test_conformal_trace_law(self):
        n = 2
        m, p, f = get_frame("conformally_flat", n=n, rho="re_z1", seed=19)
        sj = eval_scalar_jet(rho_named("re_z1"), p)
        expected = 0.5 * (1 - n) * sj.dz
        assert np.allclose(f.S_trace, expected, atol=1e-13)
        # the derived value: |S_1| = 1/4 for this factor
        assert abs(f.S_trace[0]) == pytest.approx(0.25, abs=1e-12)

    def test_kahler_metric_is_pointwise_balanced(self):
        for p in make_points(2, 4, seed=20):
            _, _, f = get_frame("fubini_study", point=p)
            assert np.max(np.abs(f.S_trace)) < 1e-12

    def test_zero_homogeneity_of_torsion(self, rng):
        m = build_catalog_metric("szabo", k=2.0)
        p = make_points(2, 1, seed=21)[0]
        f1 = Frame(eval_jet(m, p))
        for _ in range(3):
            lam = complex(rng.standard_normal(), rng.standard_normal())
            if abs(lam) < 0.1:
                continue
            f2 = Frame(eval_jet(m, Point(p.z, lam * p.v)))
            rel = np.max(np.abs(f2.S_up - f1.S_up)) / (1 + np.max(np.abs(f1.S_up)))
            assert rel < 1e-9

    def test_trace_identity(self):
        # raised mixed coefficients contract to the conjugated trace two ways
        for name, kw in [("randers", {"c": 0.4}), ("hermitian_diag_exp", {}),
                         ("conformally_flat", {"rho": "z1zb1"})]:
            m, p, f = get_frame(name, seed=22, **kw)
            sbar = np.conj(f.S_trace)
            lhs = _E("ba,gab,gl->l", f.Mi, f.Lmix, f.M)
            assert np.max(np.abs(lhs - sbar)) < 1e-12
            assert np.max(np.abs(sbar + _E("ggl->l", f.Lmix))) < 1e-12


class TestTorsionFormCoeffs:
    def test_blocks(self):
        m, p, f = get_frame("hermitian_diag_exp", n=2, seed=23)
        tf = torsion_form_coeffs(f)
        assert np.allclose(tf.antisym_horizontal.values, f.S_up)
        assert np.allclose(tf.vertical_mixed.values, f.Gam_v)
        # Hermitian metric: nonlinear coefficients are v-linear, so the
        # vbar-block contracts against nothing and the zbar-block matches a
        # finite-difference assembly
        def nl(q):
            return Frame(eval_jet(m, q)).NL

        dzb = np.stack([field_partial(nl, p, "zbar", i) for i in range(2)])
        dvb = np.stack([field_partial(nl, p, "vbar", i) for i in range(2)])
        fd = horizontal_derivative(dzb, dvb, f, barred=True)
        # tf block is [s, m, n]; fd is [n, s, m]
        assert np.max(np.abs(tf.nonlinear_zbar.values
                             - fd.transpose(1, 2, 0))) < 1e-8

    def test_flat_zero(self):
        _, _, f = get_frame("flat", n=2)
        tf = torsion_form_coeffs(f)
        assert tf.nonlinear_zbar.max_abs() == 0
        assert tf.nonlinear_vbar.max_abs() == 0


class TestPointDiscipline:
    def test_mixing_points_rejected(self):
        m = build_catalog_metric("flat", n=2)
        p1, p2 = make_points(2, 2, seed=24)
        t1 = nonlinear_connection(Frame(eval_jet(m, p1)))
        t2 = nonlinear_connection(Frame(eval_jet(m, p2)))
        with pytest.raises(ValueError):
            ensure_same_point(t1, t2)

    def test_tensor_serialization_round_trip(self):
        m, p, f = get_frame("fubini_study", n=2, seed=25)
        t = nonlinear_connection(f)
        d = t.to_json_dict()
        t2 = Tensor.from_json_dict(d, p)
        assert np.array_equal(t.values, t2.values)
        assert t2.labels == t.labels


class TestRandersParallel:
    def test_constant_one_form_keeps_flat_coefficients(self):
        # constant b over flat alpha is parallel: the horizontal coefficients
        # reduce to those of alpha, i.e. vanish identically
        m = build_catalog_metric("randers", n=2, c=0.4)
        for p in make_points(2, 4, seed=26):
            f = Frame(eval_jet(m, p))
            assert np.max(np.abs(f.Gam_h)) < 1e-12
            assert np.max(np.abs(f.NL)) < 1e-12


class TestConformalTorsionValue:
    def test_quadratic_factor_trace(self):
        # rho = z1 zb1 over flat, n = 2: the torsion trace is -conj(z1)/2 e_1
        m = build_catalog_metric("conformally_flat", n=2, rho="z1zb1")
        p = make_points(2, 1, seed=27)[0]
        f = Frame(eval_jet(m, p))
        assert f.S_trace[0] == pytest.approx(-0.5 * np.conj(p.z[0]), abs=1e-13)
        assert abs(f.S_trace[1]) < 1e-13


class TestFrameGuards:
    def test_ill_conditioned_levi_hard_fails(self):
        from finslerlab.catalog import HermitianData, build_hermitian
        from finslerlab.errors import IllConditionedError
        h = HermitianData.from_matrix([[1.0, 0.0], [0.0, 1e-13]])
        m = build_hermitian(h, name="degenerate")
        p = make_points(2, 1, seed=41)[0]
        with pytest.raises(IllConditionedError):
            Frame(eval_jet(m, p))

    def test_inconsistent_point_detected(self):
        from dataclasses import replace
        from finslerlab.errors import InconsistentPointError
        m = build_catalog_metric("fubini_study", n=2)
        p = make_points(2, 1, seed=42)[0]
        jt = eval_jet(m, p)
        doctored = jt.taylor.copy()
        flat = jt.plan.flatten((0, 0), (0, 0), (1, 0), (0, 1))
        doctored[flat] += 0.3  # breaks Hermitian symmetry of the Levi block
        bad = replace(jt, taylor=doctored)
        with pytest.raises(InconsistentPointError):
            Frame(bad)

    def test_validation_can_be_disabled(self):
        m = build_catalog_metric("flat", n=2)
        p = make_points(2, 1, seed=43)[0]
        f = Frame(eval_jet(m, p), validate=False)
        assert np.allclose(f.M, np.eye(2))
