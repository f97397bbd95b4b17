"""Coordinate Levi-Civita oracle.

Curvature data of an arbitrary pseudo-Riemannian metric presented by its raw
component fields: Christoffel symbols from first metric derivatives, the
curvature tensor from second, Cotton-type data from third, plus covariant
derivative, Laplace-Beltrami and Bochner-trace helpers for vector fields and
1-forms.  Everything is evaluated per point by dense numpy contractions on
partial-derivative jets and is completely independent of the frame-based
structural formulas it is used to cross-check.

Conventions:
  R(X,Y)Z        = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
  R(X,Y,Z,V)     = g(R(X,Y)Z, V)
  Ric(X,V)       = g^{ab} R(X, d_a, d_b, V)   (the metric-frame sum)
  scal           = g^{xv} Ric(x,v)
  P (Schouten)   = (scal/(2(N-1)) g - Ric) / (N-2),  N = chart dimension
  C (Cotton)     = (nabla_X P)(Y,.) - (nabla_Y P)(X,.)
  Delta          = d*d + dd*  with d* the metric codifferential
"""

from __future__ import annotations

import numpy as np

from .jets import ChartError, OneForm, ScalarField, VectorField, as_field


class CoordinateMetric:
    """Symmetric matrix of scalar component fields on a chart."""

    def __init__(self, comps, dim=None):
        comps = [list(row) for row in comps]
        self.dim = len(comps) if dim is None else dim
        if len(comps) != self.dim or any(len(row) != self.dim for row in comps):
            raise ChartError("metric component matrix must be square")
        self.comps = [[as_field(c, self.dim) for c in row] for row in comps]
        self._packages: dict = {}

    def evaluate(self, p):
        return np.array(
            [[self.comps[a][b].value(p) for b in range(self.dim)] for a in range(self.dim)]
        )

    def symmetry_residual(self, points):
        r = 0.0
        for p in points:
            g = self.evaluate(p)
            r = max(r, float(np.max(np.abs(g - g.T))))
        return r

    def signature(self, p):
        """(n_positive, n_negative) eigenvalue counts at a point."""
        ev = np.linalg.eigvalsh(self.evaluate(p).real)
        return int(np.sum(ev > 0)), int(np.sum(ev < 0))

    def package(self, p, order=2) -> "CurvaturePackage":
        key = (tuple(p), order)
        if key not in self._packages:
            self._packages[key] = CurvaturePackage(self, p, order)
        return self._packages[key]


class CurvaturePackage:
    """All pointwise Levi-Civita data of a metric at one chart point.

    ``order`` is the number of metric derivatives extracted (2 for curvature,
    3 additionally for nabla-Ricci / Cotton data).
    """

    def __init__(self, metric: CoordinateMetric, p, order=2):
        if order < 1 or order > 3:
            raise ChartError("metric jet order must be 1, 2 or 3")
        self.metric = metric
        self.p = tuple(p)
        self.order = order
        n = self.dim = metric.dim
        jets = [[metric.comps[a][b].jet(p, order) for b in range(n)] for a in range(n)]
        self.g = np.array([[jets[a][b].value for b in range(n)] for a in range(n)])
        # dg[a,b,c] = d_c g_ab ; d2g[a,b,c,d] = d_c d_d g_ab ; etc.
        self.dg = np.array([[jets[a][b].partials(1) for b in range(n)] for a in range(n)])
        try:
            self.ginv = np.linalg.inv(self.g)
        except np.linalg.LinAlgError as e:
            raise ChartError(f"singular metric at {self.p}") from e
        if np.linalg.cond(self.g) > 1e12:
            raise ChartError(f"numerically singular metric at {self.p}")
        self.d2g = None
        self.d3g = None
        if order >= 2:
            self.d2g = np.array(
                [[jets[a][b].partials(2) for b in range(n)] for a in range(n)]
            )
        if order >= 3:
            self.d3g = np.array(
                [[jets[a][b].partials(3) for b in range(n)] for a in range(n)]
            )
        self._build()

    # -- core tensors --------------------------------------------------------

    def _build(self):
        g, ginv, dg = self.g, self.ginv, self.dg
        # gamma_low[a,b,c] = g(nabla_{d_b} d_c, d_a)
        gl = 0.5 * (
            np.einsum("acb->abc", dg) + np.einsum("abc->abc", dg) - np.einsum("bca->abc", dg)
        )
        self.gamma_low = gl
        self.gamma = np.einsum("ad,dbc->abc", ginv, gl)  # Gamma^a_{bc}
        # dginv[a,b,e] = d_e (g^{ab})
        self.dginv = -np.einsum("ac,cdE,db->abE", ginv, dg, ginv)
        if self.order < 2:
            return
        d2g = self.d2g
        # dgamma_low[a,b,c,e] = d_e gamma_low[a,b,c]
        dgl = 0.5 * (
            np.einsum("acbe->abce", d2g)
            + np.einsum("abce->abce", d2g)
            - np.einsum("bcae->abce", d2g)
        )
        self.dgamma_low = dgl
        # dgamma[a,b,c,e] = d_e Gamma^a_{bc}
        self.dgamma = np.einsum("ade,dbc->abce", self.dginv, gl) + np.einsum(
            "ad,dbce->abce", ginv, dgl
        )
        # riem_up[a,b,c,d]: R(d_c, d_d) d_b = riem_up[a,b,c,d] d_a
        G, dG = self.gamma, self.dgamma
        self.riem_up = (
            np.einsum("adbc->abcd", dG)
            - np.einsum("acbd->abcd", dG)
            + np.einsum("ace,edb->abcd", G, G)
            - np.einsum("ade,ecb->abcd", G, G)
        )
        # r4[x,y,z,v] = g(R(d_x, d_y) d_z, d_v)
        self.r4 = np.einsum("va,azxy->xyzv", g, self.riem_up)
        self.ric = np.einsum("ab,xabv->xv", ginv, self.r4)
        self.scal = np.einsum("xv,xv->", ginv, self.ric)
        n = self.dim
        self.schouten = (self.scal / (2.0 * (n - 1)) * g - self.ric) / (n - 2)
        self.weyl = self.r4 - self._kulkarni_nomizu(self.schouten, g)
        if self.order < 3:
            return
        d3g = self.d3g
        d2gl = 0.5 * (
            np.einsum("acbef->abcef", d3g)
            + np.einsum("abcef->abcef", d3g)
            - np.einsum("bcaef->abcef", d3g)
        )
        # d2ginv[a,b,e,f] = d_f d_e (g^{ab})
        d2ginv = -(
            np.einsum("acF,cdE,db->abEF", self.dginv, dg, ginv)
            + np.einsum("ac,cdEF,db->abEF", ginv, d2g, ginv)
            + np.einsum("ac,cdE,dbF->abEF", ginv, dg, self.dginv)
        )
        self.d2ginv = d2ginv
        self.d2gamma = (
            np.einsum("adEF,dbc->abcEF", d2ginv, gl)
            + np.einsum("adE,dbcF->abcEF", self.dginv, dgl)
            + np.einsum("adF,dbcE->abcEF", self.dginv, dgl)
            + np.einsum("ad,dbcEF->abcEF", ginv, d2gl)
        )
        d2G = self.d2gamma
        # driem[a,b,c,d,F] = d_F riem_up[a,b,c,d]
        self.driem = (
            np.einsum("adbcF->abcdF", d2G)
            - np.einsum("acbdF->abcdF", d2G)
            + np.einsum("aceF,edb->abcdF", dG, G)
            + np.einsum("ace,edbF->abcdF", G, dG)
            - np.einsum("adeF,ecb->abcdF", dG, G)
            - np.einsum("ade,ecbF->abcdF", G, dG)
        )
        self.dr4 = np.einsum("vaF,azxy->xyzvF", dg, self.riem_up) + np.einsum(
            "va,azxyF->xyzvF", g, self.driem
        )
        self.dric = np.einsum("abF,xabv->xvF", self.dginv, self.r4) + np.einsum(
            "ab,xabvF->xvF", ginv, self.dr4
        )
        self.dscal = np.einsum("xvF,xv->F", self.dginv, self.ric) + np.einsum(
            "xv,xvF->F", ginv, self.dric
        )
        self.dschouten = (
            np.einsum("F,ab->abF", self.dscal, g) / (2.0 * (n - 1))
            + self.scal / (2.0 * (n - 1)) * dg
            - self.dric
        ) / (n - 2)
        # cov_schouten[c,a,b] = (nabla_{d_c} P)(d_a, d_b)
        self.cov_schouten = (
            np.einsum("abc->cab", self.dschouten)
            - np.einsum("eca,eb->cab", G, self.schouten)
            - np.einsum("ecb,ae->cab", G, self.schouten)
        )
        # cotton[x,y,z] = (nabla_x P)(y,z) - (nabla_y P)(x,z)
        self.cotton = self.cov_schouten - np.einsum("cab->acb", self.cov_schouten)

    @staticmethod
    def _kulkarni_nomizu(P, g):
        """(P o g)[x,y,z,v] matching the r4 slot convention; chosen so that
        r4 - (P o g) is totally trace-free with the Schouten sign above."""
        return (
            np.einsum("xz,yv->xyzv", P, g)
            + np.einsum("xz,yv->xyzv", g, P)
            - np.einsum("xv,yz->xyzv", P, g)
            - np.einsum("xv,yz->xyzv", g, P)
        )

    # -- jets of arguments ---------------------------------------------------

    def vec_jets(self, X: VectorField, order):
        """Per-component (value, first-, ..., order-th partials) arrays."""
        js = [c.jet(self.p, order) for c in X.comps]
        out = [np.array([j.value for j in js])]
        for k in range(1, order + 1):
            out.append(np.array([j.partials(k) for j in js]))
        return out

    def form_jets(self, al: OneForm, order):
        js = [c.jet(self.p, order) for c in al.comps]
        out = [np.array([j.value for j in js])]
        for k in range(1, order + 1):
            out.append(np.array([j.partials(k) for j in js]))
        return out

    # -- pointwise operations ------------------------------------------------

    def pair(self, X: VectorField, Y: VectorField):
        x = np.array([c.value(self.p) for c in X.comps])
        y = np.array([c.value(self.p) for c in Y.comps])
        return x @ self.g @ y

    def cov_vector(self, U: VectorField, V: VectorField):
        """Components of nabla_U V at the point."""
        u = np.array([c.value(self.p) for c in U.comps])
        v, dv = self.vec_jets(V, 1)
        return np.einsum("a,ca->c", u, dv) + np.einsum("cab,a,b->c", self.gamma, u, v)

    def cov_oneform(self, al: OneForm):
        """nabla al as the matrix [(nabla_a al)_b]."""
        a0, da = self.form_jets(al, 1)
        return da.T - np.einsum("eab,e->ab", self.gamma, a0)

    def ricci_eval(self, X: VectorField, V: VectorField):
        x = np.array([c.value(self.p) for c in X.comps])
        v = np.array([c.value(self.p) for c in V.comps])
        return x @ self.ric @ v

    def r4_eval(self, X, Y, Z, V):
        vals = [np.array([c.value(self.p) for c in W.comps]) for W in (X, Y, Z, V)]
        return np.einsum("xyzv,x,y,z,v->", self.r4, *vals)

    def divergence(self, X: VectorField):
        v, dv = self.vec_jets(X, 1)
        return np.trace(dv) + np.einsum("aab,b->", self.gamma, v)

    def lie_metric(self, X: VectorField):
        """(L_X g)_ab at the point."""
        v, dv = self.vec_jets(X, 1)
        return (
            np.einsum("abc,c->ab", self.dg, v)
            + np.einsum("cb,ca->ab", self.g, dv)
            + np.einsum("ac,cb->ab", self.g, dv)
        )

    def tr_nabla2_vector(self, X: VectorField):
        """Components of g^{ab} (nabla_a nabla_b X)."""
        v, dv, d2v = self.vec_jets(X, 2)
        G, dG = self.gamma, self.dgamma
        # n1[c,b] = (nabla_b X)^c ; dn1[c,b,a] = d_a (nabla_b X)^c
        n1 = dv + np.einsum("cbe,e->cb", G, v)
        dn1 = np.einsum("cba->cba", d2v) + np.einsum("cbea,e->cba", dG, v) + np.einsum(
            "cbe,ea->cba", G, dv
        )
        n2 = (
            dn1
            + np.einsum("cae,eb->cba", G, n1)
            - np.einsum("eab,ce->cba", G, n1)
        )
        return np.einsum("ab,cba->c", self.ginv, n2)

    def cov2_oneform(self, al: OneForm):
        """Full second covariant derivative: out[a,b,c] = (nabla_a nabla_b al)_c."""
        a0, da, d2a = self.form_jets(al, 2)
        G, dG = self.gamma, self.dgamma
        # n1[b,c] = (nabla_b al)_c ; dn1[b,c,a] = d_a (nabla_b al)_c
        n1 = da.T - np.einsum("ebc,e->bc", G, a0)
        dn1 = (
            np.einsum("cba->bca", d2a)
            - np.einsum("ebca,e->bca", dG, a0)
            - np.einsum("ebc,ea->bca", G, da)
        )
        n2 = (
            dn1
            - np.einsum("eab,ec->bca", G, n1)
            - np.einsum("eac,be->bca", G, n1)
        )
        return np.einsum("bca->abc", n2)

    def tr_nabla2_oneform(self, al: OneForm):
        """Components of g^{ab} (nabla_a nabla_b al)."""
        return np.einsum("ab,abc->c", self.ginv, self.cov2_oneform(al))

    def codifferential_oneform(self, al: OneForm):
        """d* al = -g^{ab} (nabla_a al)_b (a scalar)."""
        return -np.einsum("ab,ab->", self.ginv, self.cov_oneform(al))

    def laplace_beltrami_oneform(self, al: OneForm):
        """(d*d + dd*) al, componentwise at the point."""
        a0, da, d2a = self.form_jets(al, 2)
        G, dG, ginv, dginv = self.gamma, self.dgamma, self.ginv, self.dginv
        # d(d* al): d* al = -g^{ab}(d_a al_b - Gamma^e_{ab} al_e)
        n1 = da.T - np.einsum("eab,e->ab", G, a0)  # (nabla_a al)_b
        dn1 = (
            np.einsum("bax->abx", d2a)
            - np.einsum("eabx,e->abx", dG, a0)
            - np.einsum("eab,ex->abx", G, da)
        )
        ddstar = -np.einsum("abx,ab->x", dn1, ginv) - np.einsum("abx,ab->x", dginv, n1)
        # d* (d al): beta_ab = d_a al_b - d_b al_a ; dbeta[a,b,c] = d_c beta_ab
        beta = da.T - da
        dbeta = np.einsum("bac->abc", d2a) - np.einsum("abc->abc", d2a)
        # (nabla_c beta)_{ab} = d_c beta_ab - Gamma^e_{ca} beta_eb - Gamma^e_{cb} beta_ae
        covbeta = (
            np.einsum("abc->cab", dbeta)
            - np.einsum("eca,eb->cab", G, beta)
            - np.einsum("ecb,ae->cab", G, beta)
        )
        dstard = -np.einsum("ca,cab->b", ginv, covbeta)
        return dstard + ddstar


def generic_metric_geometry(g: CoordinateMetric) -> dict:
    """Closure bundle over the oracle, keyed by the operation names."""
    return {
        "christoffels": lambda p: g.package(p, 1).gamma,
        "riemann": lambda p: g.package(p, 2).r4,
        "ricci": lambda p: g.package(p, 2).ric,
        "scal": lambda p: g.package(p, 2).scal,
        "laplace_beltrami": lambda alpha, p: g.package(p, 2).laplace_beltrami_oneform(alpha),
    }
