import numpy as np
import pytest

from crtractor import crcore as cr
from crtractor import geometries as geo
from crtractor import jets as J


def pts(s, n=20):
    return s.sample_points(n)


class TestReebField:
    def test_heisenberg_reeb_is_dt(self):
        s = geo.example("heisenberg_m2").structure
        T = cr.reeb_field(s)
        for p in pts(s, 5):
            assert np.allclose(T.evaluate(p), [0, 0, 0, 0, 1], atol=1e-12)

    def test_constant_scale(self):
        s = geo.example("heisenberg_m1").structure
        c = 2.5
        s2 = cr.PseudoHermitianStructure(
            s.theta * c, s.h_frame, [[0.0, -1.0], [1.0, 0.0]], s.box
        )
        T, T2 = cr.reeb_field(s), cr.reeb_field(s2)
        for p in pts(s, 5):
            assert np.allclose(T2.evaluate(p), T.evaluate(p) / c, atol=1e-12)

    def test_rescaled_defining_equations_and_formula(self):
        # solve the defining system on theta~ = e^{2f} theta, then cross-check
        # against T~ = e^{-2f} (T - 2i delta f + 2i conj(delta f))
        ex = geo.example("heisenberg_m2_rescaled")
        s = ex.structure
        T = cr.reeb_field(s)
        th, dth = s.theta, s.dtheta
        for p in pts(s, 10):
            assert abs(th(T).value(p) - 1.0) <= 1e-10
            for h in s.h_frame:
                assert abs(dth(T, h).value(p)) <= 1e-10


class TestLeviForm:
    def test_heisenberg_values(self):
        s = geo.example("heisenberg_m1").structure
        X1, Y1 = s.h_frame
        assert np.isclose(cr.levi_form(s, X1, X1).value((0.1, 0.2, 0.3)), 1.0)
        assert np.isclose(cr.levi_form(s, X1, Y1).value((0.1, 0.2, 0.3)), 0.0)

    def test_j_invariance_random_points(self):
        s = geo.example("deformed_m2").structure
        X = s.h_frame[0] + s.h_frame[2] * 0.5
        Y = s.h_frame[1] - s.h_frame[3] * 0.3
        lhs = cr.levi_form(s, s.apply_j(X), s.apply_j(Y), check=False)
        rhs = cr.levi_form(s, X, Y, check=False)
        for p in pts(s):
            assert abs(lhs.value(p) - rhs.value(p)) <= 1e-10

    def test_antisymmetric_pairing(self):
        # L(JX, Y) + L(X, JY) = 0
        s = geo.example("deformed_m2").structure
        X, Y = s.h_frame[0], s.h_frame[3]
        f = cr.levi_form(s, s.apply_j(X), Y, check=False) + cr.levi_form(
            s, X, s.apply_j(Y), check=False
        )
        for p in pts(s, 10):
            assert abs(f.value(p)) <= 1e-10

    def test_reeb_bracket_stays_horizontal(self):
        # [T, Z] has no Reeb component for Z in H (complexified)
        s = geo.example("heisenberg_m2_rescaled").structure
        T = cr.reeb_field(s)
        for Z in s.complex_frame():
            comp = s.theta(J.lie_bracket(T, Z))
            for p in pts(s, 8):
                assert abs(comp.value(p)) <= 1e-9

    def test_reeb_derivative_of_levi(self):
        # T(L(U,V)) = L([T,U],V) + L(U,[T,V]) on the complex frame
        s = geo.example("heisenberg_m2_rescaled").structure
        T = cr.reeb_field(s)
        Zs = s.complex_frame()
        for U in Zs:
            for V in Zs:
                Vb = J.VectorField([J.conj(c) for c in V.comps], V.dim)
                L_UV = s.dtheta(U, Vb) * (-1j)
                lhs = T(L_UV)
                rhs = s.dtheta(J.lie_bracket(T, U), Vb) * (-1j) + s.dtheta(
                    U, J.VectorField([J.conj(c) for c in J.lie_bracket(T, V).comps], V.dim)
                ) * (-1j)
                for p in pts(s, 5):
                    assert abs(lhs.value(p) - rhs.value(p)) <= 1e-9

    def test_not_in_h_rejected(self):
        s = geo.example("heisenberg_m1").structure
        with pytest.raises(cr.CRError):
            cr.levi_form(s, cr.reeb_field(s), s.h_frame[0])


class TestAdaptedFrame:
    @pytest.mark.parametrize(
        "name", ["heisenberg_m1", "heisenberg_m2", "heisenberg_m2_rescaled", "deformed_m2"]
    )
    def test_invariant_suite(self, name):
        s = geo.example(name).structure
        rep = s.validate(points=s.sample_points(20))
        assert rep["pass"], rep

    def test_complex_frame_orthonormal(self):
        s = geo.example("deformed_m2").structure
        Zs = s.complex_frame()
        for a, U in enumerate(Zs):
            for b, V in enumerate(Zs):
                h = cr.levi_form_complex(s, U, V)
                want = 1.0 if a == b else 0.0
                for p in pts(s, 8):
                    assert abs(h.value(p) - want) <= 1e-10


class TestNijenhuis:
    def test_heisenberg_vanishes(self):
        s = geo.example("heisenberg_m2").structure
        N = cr.nijenhuis(s, s.h_frame[0], s.h_frame[2])
        for p in pts(s, 10):
            assert np.allclose(N.evaluate(p), 0, atol=1e-12)

    def test_deformed_nonzero(self):
        s = geo.example("deformed_m2").structure
        N = cr.nijenhuis(s, s.h_frame[0], s.h_frame[2])
        vals = [np.max(np.abs(N.evaluate(p))) for p in pts(s, 10)]
        assert max(vals) > 1e-3

    def test_antisymmetric(self):
        s = geo.example("deformed_m2").structure
        N = cr.nijenhuis(s, s.h_frame[1], s.h_frame[1])
        assert np.allclose(N.evaluate(s.ref_point), 0, atol=1e-12)

    def test_tensorial(self):
        s = geo.example("deformed_m2").structure
        x1 = J.coordinates(5)[0]
        g = 1.5 + x1 * x1
        X, Y = s.h_frame[0], s.h_frame[2]
        lhs = cr.nijenhuis(s, X * g, Y)
        rhs = cr.nijenhuis(s, X, Y) * g
        for p in pts(s, 8):
            assert np.allclose(lhs.evaluate(p), rhs.evaluate(p), atol=1e-9)

    def test_j_antilinear(self):
        # J N(X,Y) = -N(JX, Y)
        s = geo.example("deformed_m2").structure
        X, Y = s.h_frame[0], s.h_frame[3]
        lhs = s.apply_j(cr.nijenhuis(s, X, Y))
        rhs = cr.nijenhuis(s, s.apply_j(X), Y) * (-1.0)
        for p in pts(s, 6):
            assert np.allclose(lhs.evaluate(p), rhs.evaluate(p), atol=1e-9)


class TestClassification:
    def test_heisenberg_integrable(self):
        rep = cr.classify_integrability(geo.example("heisenberg_m1").structure)
        assert rep["classification"] == "integrable"
        assert rep["strictly_pseudoconvex"]

    def test_deformed_partially_integrable(self):
        rep = cr.classify_integrability(geo.example("deformed_m2").structure)
        assert rep["classification"] == "partially_integrable"
        assert rep["nijenhuis_max"] > 1e-3

    def test_bad_j_not_partially_integrable(self):
        s0 = geo.example("heisenberg_m2").structure
        # conjugate J by a non-symplectic shear: still squares to -id but
        # dtheta(J X1, J Y1) = 0 != dtheta(X1, Y1)
        jmat = [[0.0] * 4 for _ in range(4)]
        jmat[1][0] = jmat[2][0] = 1.0  # J X1 = Y1 + X2
        jmat[0][1] = jmat[3][1] = -1.0  # J Y1 = -X1 - Y2
        jmat[3][2] = 1.0  # J X2 = Y2
        jmat[2][3] = -1.0  # J Y2 = -X2
        s = cr.PseudoHermitianStructure(s0.theta, s0.h_frame, jmat, s0.box)
        rep = cr.classify_integrability(s)
        assert not rep["partially_integrable"]


class TestRescaling:
    def test_f_zero_identity(self):
        s = geo.example("heisenberg_m2").structure
        s2 = cr.rescale_structure(s, 0.0)
        for p in pts(s, 5):
            assert np.allclose(s2.theta.evaluate(p), s.theta.evaluate(p), atol=1e-14)

    def test_constant_scales_levi(self):
        s = geo.example("heisenberg_m2").structure
        c = 0.3
        s2 = cr.rescale_structure(s, c)
        X = s.h_frame[0]
        l1 = cr.levi_form(s, X, X)
        l2 = cr.levi_form(s2, X, X)
        for p in pts(s, 5):
            assert np.isclose(l2.value(p), np.exp(2 * c) * l1.value(p), rtol=1e-12)

    def test_generic_keeps_invariants(self):
        s = geo.example("heisenberg_m2").structure
        x = J.coordinates(5)
        s2 = cr.rescale_structure(s, x[0] * x[1] * 0.2)
        rep = s2.validate(points=s2.sample_points(10))
        assert rep["pass"], rep
        assert cr.classify_integrability(s2)["classification"] == "integrable"


class TestExamples:
    def test_registry(self):
        names = [e.name for e in geo.builtin_examples()]
        assert names == [
            "heisenberg_m1",
            "heisenberg_m2",
            "heisenberg_m2_rescaled",
            "deformed_m2",
        ]
        for e in geo.builtin_examples():
            assert set(e.ells) == {"zero", "closed", "generic"}

    def test_eps_zero_matches_heisenberg(self):
        ex = geo._deformed_m2(eps=0.0)
        h = geo.example("heisenberg_m2")
        p = (0.2, -0.1, 0.3, 0.4, 0.1)
        for k in range(4):
            a = ex.structure.j_frame(k).evaluate(p)
            b = h.structure.j_frame(k).evaluate(p)
            assert np.allclose(a, b, atol=1e-14)

    def test_ells_purely_imaginary(self):
        for e in geo.builtin_examples():
            s = e.structure
            for name, ell in e.ells.items():
                for p in pts(s, 4):
                    assert np.allclose(ell.evaluate(p).real, 0, atol=1e-14), (e.name, name)
