import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crtractor import jets as J


def rng_points(dim, n=30, seed=7, lo=-1.5, hi=1.5):
    rng = np.random.default_rng(seed)
    return [tuple(rng.uniform(lo, hi, dim)) for _ in range(n)]


class TestEvaluateJet:
    def test_constant(self):
        f = J.ConstField(5.0, 3)
        j = J.evaluate_jet(f, (0.3, -1.0, 2.0))
        assert j.value == 5.0
        assert np.all(j.grad == 0) and np.all(j.hess == 0) and np.all(j.third == 0)

    def test_coordinate(self):
        x, y = J.coordinates(2)
        j = J.evaluate_jet(x, (2.0, 3.0))
        assert j.value == 2.0
        assert np.allclose(j.grad, [1.0, 0.0])
        assert np.all(j.hess == 0)

    def test_polynomial(self):
        x, y = J.coordinates(2)
        f = x**2 * y
        j = J.evaluate_jet(f, (1.0, 1.0))
        assert j.value == 1.0
        assert np.allclose(j.grad, [2.0, 1.0])
        assert np.allclose(j.hess, [[2.0, 2.0], [2.0, 0.0]])

    def test_symmetry_exact(self):
        x, y, z = J.coordinates(3)
        f = J.exp(x * y) * J.sin(y * z) + x**3 * z
        j = J.evaluate_jet(f, (0.4, 0.2, -0.7))
        assert np.array_equal(j.hess, j.hess.T)
        for perm in [(1, 0, 2), (0, 2, 1), (2, 1, 0)]:
            assert np.array_equal(j.third, np.transpose(j.third, perm))

    def test_domain_error(self):
        x, _ = J.coordinates(2)
        with pytest.raises(Exception):
            J.log(x).jet((-1.0, 0.0), 2)
        # chart mismatch is rejected at construction
        with pytest.raises(J.ChartError):
            x + J.CoordField(0, 3)


class TestTaylorArithmetic:
    def test_product_rule_random_points(self):
        x, y, z = J.coordinates(3)
        f = J.exp(0.3 * x * y) + z**2 * x
        g = J.sin(x + 0.5 * z) * (2 + y**2)
        fg = f * g
        for p in rng_points(3):
            jf, jg, jfg = f.jet(p, 3), g.jet(p, 3), fg.jet(p, 3)
            ref = (jf * jg).c
            assert np.allclose(jfg.c, ref, rtol=1e-12, atol=1e-14)

    def test_quotient_and_elementary(self):
        (x,) = J.coordinates(1)
        f = J.exp(x) / (1 + x**2)
        p = (0.37,)
        j = f.jet(p, 3)
        v = np.exp(0.37) / (1 + 0.37**2)
        assert np.isclose(j.value, v, rtol=1e-14)
        # d/dx log(cos x) = -tan x
        g = J.log(J.cos(x))
        jd = J.deriv(g, 0).jet(p, 0)
        assert np.isclose(jd.value, -np.tan(0.37), rtol=1e-13)

    def test_sqrt_and_powers(self):
        (x,) = J.coordinates(1)
        f = J.sqrt(1 + x**2) ** 3
        j = f.jet((0.8,), 2)
        ref = (1 + 0.8**2) ** 1.5
        assert np.isclose(j.value, ref, rtol=1e-14)
        d1 = 3 * 0.8 * np.sqrt(1 + 0.8**2)
        assert np.isclose(j.partials(1)[0], d1, rtol=1e-13)

    @given(
        st.floats(-1.0, 1.0),
        st.floats(-1.0, 1.0),
        st.integers(0, 4),
    )
    @settings(max_examples=50, deadline=None)
    def test_exp_log_roundtrip(self, a, b, order):
        x, y = J.coordinates(2)
        f = 2 + 0.3 * x + x * y**2
        g = J.exp(J.log(f))
        p = (a, b)
        assert np.allclose(g.jet(p, order).c, f.jet(p, order).c, rtol=1e-11, atol=1e-12)

    def test_complex_promotion(self):
        x, y = J.coordinates(2)
        f = J.exp(1j * x)
        p = (0.5, 0.1)
        assert np.isclose(J.im(f).value(p), np.sin(0.5), rtol=1e-14)
        assert np.isclose(J.re(f).value(p), np.cos(0.5), rtol=1e-14)
        assert np.isclose(J.conj(f).value(p), np.exp(-0.5j), rtol=1e-14)


class TestVectorFieldsAndForms:
    def test_coordinate_fields_commute(self):
        dx = J.VectorField([1, 0, 0])
        dy = J.VectorField([0, 1, 0])
        b = J.lie_bracket(dx, dy)
        assert np.allclose(b.evaluate((0.1, 0.2, 0.3)), 0)

    def test_heisenberg_bracket(self):
        x1, y1, t = J.coordinates(3)
        X1 = J.VectorField([1, 0, y1])
        Y1 = J.VectorField([0, 1, 0])
        b = J.lie_bracket(X1, Y1)
        # [X1, Y1] = -d/dt for X1 = d/dx + y d/dt
        assert np.allclose(b.evaluate((0.4, -0.3, 0.9)), [0, 0, -1])

    def test_self_bracket_vanishes(self):
        x1, y1, t = J.coordinates(3)
        X = J.VectorField([J.sin(y1), x1 * t, J.exp(x1)])
        b = J.lie_bracket(X, X)
        assert np.allclose(b.evaluate((0.2, 0.1, -0.5)), 0, atol=1e-14)

    def test_jacobi_identity(self):
        x, y, z = J.coordinates(3)
        X = J.VectorField([y * z, x, x**2])
        Y = J.VectorField([z, x * y, y])
        Z = J.VectorField([x + y, z**2, x * z])
        s = (
            J.lie_bracket(X, J.lie_bracket(Y, Z))
            + J.lie_bracket(Y, J.lie_bracket(Z, X))
            + J.lie_bracket(Z, J.lie_bracket(X, Y))
        )
        for p in rng_points(3, n=10, seed=3):
            assert np.allclose(s.evaluate(p), 0, atol=1e-10)

    def test_d_squared_zero(self):
        x, y, z = J.coordinates(3)
        f = J.exp(x * y) + z**3 * y
        dd = J.exterior_derivative(J.differential(f))
        for p in rng_points(3, n=5, seed=11):
            assert np.allclose(dd.evaluate(p), 0, atol=1e-10)

    def test_heisenberg_dtheta(self):
        x1, y1, t = J.coordinates(3)
        theta = J.OneForm([-y1, 0, 1])
        dth = J.exterior_derivative(theta)
        m = dth.evaluate((1.0, 2.0, 3.0))
        ref = np.array([[0, 1, 0], [-1, 0, 0], [0, 0, 0]])
        assert np.allclose(m, ref)

    def test_exterior_derivative_x_dx2(self):
        x1, x2 = J.coordinates(2)
        alpha = J.OneForm([0, x1])
        m = J.exterior_derivative(alpha).evaluate((0.3, 0.7))
        assert np.allclose(m, [[0, 1], [-1, 0]])

    def test_d_of_df_on_oneform_level(self):
        # d(d f) = 0 checked through the OneForm path for several fields
        x, y = J.coordinates(2)
        for f in [x * y**2, J.sin(x) * J.exp(y), J.log(2 + x**2 + y**2)]:
            dd = J.exterior_derivative(J.differential(f))
            assert np.allclose(dd.evaluate((0.6, -0.4)), 0, atol=1e-12)


class TestLiftAndLinsolve:
    def test_lifted_field(self):
        x, y = J.coordinates(2)
        f = J.exp(x) * y
        g = J.LiftedField(f)
        j = g.jet((0.3, 0.5, 99.0), 2)
        assert np.isclose(j.value, np.exp(0.3) * 0.5, rtol=1e-14)
        assert np.isclose(j.partials(1)[2], 0.0)
        assert np.isclose(j.partials(1)[0], np.exp(0.3) * 0.5, rtol=1e-14)

    def test_field_linsolve(self):
        x, y = J.coordinates(2)
        A = [[1 + x**2, x * y], [x * y, 2 + y**2]]
        b = [J.sin(x), y]
        sol = J.field_linsolve(A, b, (0.1, 0.1))
        for p in rng_points(2, n=8, seed=5):
            Av = np.array([[J.as_field(c, 2).value(p) for c in row] for row in A])
            bv = np.array([J.as_field(c, 2).value(p) for c in b])
            xv = np.array([s.value(p) for s in sol])
            assert np.allclose(Av @ xv, bv, rtol=1e-11, atol=1e-12)

    def test_field_inv(self):
        x, y = J.coordinates(2)
        M = [[2 + x, y], [x * y, 3 + y**2]]
        Minv = J.field_inv(M, (0.0, 0.0))
        p = (0.4, -0.2)
        Mv = np.array([[J.as_field(c, 2).value(p) for c in row] for row in M])
        Iv = np.array([[J.as_field(c, 2).value(p) for c in row] for row in Minv])
        assert np.allclose(Mv @ Iv, np.eye(2), atol=1e-13)


class TestKernelConsistency:
    def test_fallback_matches_fast_kernel(self):
        from crtractor._kernel import poly_mul_numpy
        from crtractor._tables import jet_tables

        t = jet_tables(4, 5)
        rng = np.random.default_rng(0)
        a = rng.standard_normal(t.n_terms)
        b = rng.standard_normal(t.n_terms) + 1j * rng.standard_normal(t.n_terms)
        ref = poly_mul_numpy(a, b, t.mul_i, t.mul_j, t.mul_k, t.n_terms)
        got = (J.Jet(4, 5, a) * J.Jet(4, 5, b)).c
        assert np.allclose(got, ref, rtol=1e-13, atol=1e-14)
