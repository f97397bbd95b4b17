"""Pseudo-Hermitian structures on a chart: contact form, almost complex
structure on the contact distribution, adapted frames, Reeb field, Levi form,
Nijenhuis tensor, and the integrability classification.

A structure is presented by a designated frame of H = ker(theta) together
with the matrix of J over that frame (``J h_j = sum_i jmat[i][j] h_i``);
the adapted frame is produced by Gram-Schmidt with respect to the real Levi
form followed by a J-alignment pass, entirely in frame-coefficient space.
"""

from __future__ import annotations

import numpy as np

from . import jets as J
from .jets import OneForm, ScalarField, VectorField, as_field


class CRError(ValueError):
    pass


def _vf_combo(coeffs, fields: list[VectorField]) -> VectorField:
    out = fields[0] * coeffs[0]
    for c, h in zip(coeffs[1:], fields[1:]):
        out = out + h * c
    return out


class PseudoHermitianStructure:
    """A contact form theta with a compatible almost complex structure on
    H = ker(theta), given over a designated frame of H.

    ``box`` is the sampling box (one (lo, hi) pair per chart coordinate) and
    ``seed`` the default sampling seed; both are part of the example metadata.
    """

    def __init__(self, theta: OneForm, h_frame, jmat, box, seed=42, name=""):
        self.theta = theta
        self.dim = theta.dim
        self.h_frame = list(h_frame)
        if len(self.h_frame) % 2 or len(self.h_frame) != self.dim - 1:
            raise CRError("H-frame must have 2m = dim-1 elements")
        self.m = len(self.h_frame) // 2
        self.jmat = [[as_field(c, self.dim) for c in row] for row in jmat]
        self.box = [tuple(b) for b in box]
        if len(self.box) != self.dim:
            raise CRError("sampling box must cover every chart coordinate")
        self.seed = seed
        self.name = name
        self.ref_point = tuple((lo + hi) / 2.0 for lo, hi in self.box)
        self.dtheta = J.exterior_derivative(theta)
        self._cache: dict = {}

    # -- sampling -----------------------------------------------------------

    def sample_points(self, n=20, seed=None):
        rng = np.random.default_rng(self.seed if seed is None else seed)
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        return [tuple(rng.uniform(lo, hi)) for _ in range(n)]

    # -- frame machinery ----------------------------------------------------

    def j_frame(self, k: int) -> VectorField:
        """J applied to the k-th designated frame field."""
        return _vf_combo([self.jmat[i][k] for i in range(2 * self.m)], self.h_frame)

    @property
    def levi_gram(self):
        """G[i][j] = L(h_i, h_j) = dtheta(h_i, J h_j) over the H-frame."""
        if "levi_gram" not in self._cache:
            self._cache["levi_gram"] = [
                [self.dtheta(hi, self.j_frame(k)) for k in range(2 * self.m)]
                for hi in self.h_frame
            ]
        return self._cache["levi_gram"]

    @property
    def reeb(self) -> VectorField:
        """The Reeb field: theta(T) = 1, dtheta(T, .) = 0 (linear solve)."""
        if "reeb" not in self._cache:
            n = self.dim
            rows = [list(self.theta.comps)]
            rhs = [1.0]
            for h in self.h_frame:
                rows.append(
                    [
                        sum(
                            (self.dtheta.comps[a][b] * h.comps[b] for b in range(n)),
                            start=J.ConstField(0.0, n),
                        )
                        for a in range(n)
                    ]
                )
                rhs.append(0.0)
            try:
                comps = J.field_linsolve(rows, rhs, self.ref_point)
            except J.ChartError as e:
                raise CRError(f"degenerate contact form: {e}") from e
            self._cache["reeb"] = VectorField(comps, n)
        return self._cache["reeb"]

    @property
    def coframe(self):
        """Rows dual to the frame (h_1, ..., h_2m, T) in chart components."""
        if "coframe" not in self._cache:
            cols = self.h_frame + [self.reeb]
            M = [[cols[k].comps[a] for k in range(self.dim)] for a in range(self.dim)]
            self._cache["coframe"] = J.field_inv(M, self.ref_point)
        return self._cache["coframe"]

    def coefficients(self, X: VectorField):
        """Expand X over (h_1, ..., h_2m, T)."""
        n = self.dim
        return [
            sum(
                (self.coframe[k][a] * X.comps[a] for a in range(n)),
                start=J.ConstField(0.0, n),
            )
            for k in range(n)
        ]

    def apply_j(self, X: VectorField) -> VectorField:
        """J extended to TM by J(T) = 0."""
        c = self.coefficients(X)
        out = [
            sum(
                (self.jmat[i][k] * c[k] for k in range(2 * self.m)),
                start=J.ConstField(0.0, self.dim),
            )
            for i in range(2 * self.m)
        ]
        return _vf_combo(out, self.h_frame)

    @property
    def adapted_frame(self):
        """L-orthonormal frame (e_1, ..., e_2m) with e_{2a} = J e_{2a-1}."""
        if "adapted_frame" not in self._cache:
            self._cache["adapted_frame"] = self._build_adapted_frame()
        return self._cache["adapted_frame"]

    def _build_adapted_frame(self):
        n2 = 2 * self.m
        dim = self.dim
        G = self.levi_gram

        def pair(u, v):
            return sum(
                (u[i] * G[i][j] * v[j] for i in range(n2) for j in range(n2)),
                start=J.ConstField(0.0, dim),
            )

        def jc(u):
            return [
                sum(
                    (self.jmat[i][k] * u[k] for k in range(n2)),
                    start=J.ConstField(0.0, dim),
                )
                for i in range(n2)
            ]

        frame_coeffs = []
        for cand in range(n2):
            if len(frame_coeffs) == n2:
                break
            u = [as_field(1.0 if i == cand else 0.0, dim) for i in range(n2)]
            for e in frame_coeffs:
                pe = pair(u, e)
                u = [ui - pe * ei for ui, ei in zip(u, e)]
            nrm2 = pair(u, u)
            if nrm2.value(self.ref_point).real < 1e-8:
                continue  # candidate already in the span of earlier frame fields
            inv = 1.0 / J.sqrt(nrm2)
            e1 = [ui * inv for ui in u]
            frame_coeffs.append(e1)
            frame_coeffs.append(jc(e1))
        if len(frame_coeffs) != n2:
            raise CRError("H-frame does not span the contact distribution")
        return [_vf_combo(c, self.h_frame) for c in frame_coeffs]

    def complex_frame(self):
        """Z_a = (e_{2a-1} - i J e_{2a-1}) / sqrt(2), a = 1..m."""
        es = self.adapted_frame
        return [
            (es[2 * a] - es[2 * a + 1] * 1j) * (2.0 ** -0.5) for a in range(self.m)
        ]

    # -- invariant suite ----------------------------------------------------

    def validate(self, points=None, tol=1e-10) -> dict:
        if points is None:
            points = self.sample_points()
        n2 = 2 * self.m
        r = {
            "theta_on_frame": 0.0,
            "j_square": 0.0,
            "levi_min_eig": np.inf,
            "frame_orthonormal": 0.0,
            "j_alignment": 0.0,
            "reeb": 0.0,
        }
        es = self.adapted_frame
        jsq = [
            [
                sum(
                    (self.jmat[i][k] * self.jmat[k][j] for k in range(n2)),
                    start=J.ConstField(0.0, self.dim),
                )
                + (1.0 if i == j else 0.0)
                for j in range(n2)
            ]
            for i in range(n2)
        ]
        Gf = [[self.dtheta(es[i], self.apply_j(es[j])) for j in range(n2)] for i in range(n2)]
        T = self.reeb
        dthT = [self.dtheta(T, h) for h in self.h_frame]
        thT = self.theta(T)
        for p in points:
            for h in self.h_frame:
                r["theta_on_frame"] = max(r["theta_on_frame"], abs(self.theta(h).value(p)))
            r["j_square"] = max(
                r["j_square"], max(abs(jsq[i][j].value(p)) for i in range(n2) for j in range(n2))
            )
            G = np.array([[self.levi_gram[i][j].value(p) for j in range(n2)] for i in range(n2)])
            r["levi_min_eig"] = min(r["levi_min_eig"], float(np.min(np.linalg.eigvalsh(G.real))))
            E = np.array([[Gf[i][j].value(p) for j in range(n2)] for i in range(n2)])
            r["frame_orthonormal"] = max(
                r["frame_orthonormal"], float(np.max(np.abs(E - np.eye(n2))))
            )
            for a in range(self.m):
                d = self.apply_j(es[2 * a]) - es[2 * a + 1]
                r["j_alignment"] = max(r["j_alignment"], float(np.max(np.abs(d.evaluate(p)))))
            r["reeb"] = max(
                r["reeb"],
                abs(thT.value(p) - 1.0),
                max(abs(f.value(p)) for f in dthT),
            )
        r["pass"] = (
            max(r["theta_on_frame"], r["j_square"], r["frame_orthonormal"], r["j_alignment"], r["reeb"])
            <= tol
            and r["levi_min_eig"] > 0
        )
        return r


# ---------------------------------------------------------------------------
# Module operations
# ---------------------------------------------------------------------------


def reeb_field(s: PseudoHermitianStructure) -> VectorField:
    return s.reeb


def _check_in_h(s, X, points, tol=1e-9):
    th = s.theta(X)
    for p in points:
        if abs(th.value(p)) > tol:
            raise CRError("argument is not a section of H = ker(theta)")


def levi_form(s: PseudoHermitianStructure, X: VectorField, Y: VectorField, check=True) -> ScalarField:
    """Real Levi form L(X, Y) = dtheta(X, JY), extended to TM by L(T, .) = 0."""
    if check:
        pts = [s.ref_point] + s.sample_points(4)
        _check_in_h(s, X, pts)
        _check_in_h(s, Y, pts)
    return s.dtheta(X, s.apply_j(Y))


def levi_form_complex(s: PseudoHermitianStructure, U: VectorField, V: VectorField) -> ScalarField:
    """Hermitian Levi form -i dtheta(U, conj(V)) on T_10 arguments."""
    Vbar = VectorField([J.conj(c) for c in V.comps], V.dim)
    return s.dtheta(U, Vbar) * (-1j)


def nijenhuis(s: PseudoHermitianStructure, X: VectorField, Y: VectorField) -> VectorField:
    """N_J(X,Y) = [X,Y] - [JX,JY] + J[JX,Y] + J[X,JY] (J extended by J T = 0)."""
    JX, JY = s.apply_j(X), s.apply_j(Y)
    return (
        J.lie_bracket(X, Y)
        - J.lie_bracket(JX, JY)
        + s.apply_j(J.lie_bracket(JX, Y))
        + s.apply_j(J.lie_bracket(X, JY))
    )


def classify_integrability(s: PseudoHermitianStructure, points=None, tol=1e-9) -> dict:
    """Classify as nondegenerate / partially_integrable / integrable.

    Partial integrability is total reality of the Levi map, checked as
    dtheta(JX, JY) = dtheta(X, Y) over the H-frame at sampled points;
    integrability additionally needs a vanishing Nijenhuis tensor.
    """
    if points is None:
        points = s.sample_points()
    n2 = 2 * s.m
    jh = [s.j_frame(k) for k in range(n2)]
    reality = 0.0
    for i in range(n2):
        for j in range(i + 1, n2):
            d = s.dtheta(jh[i], jh[j]) - s.dtheta(s.h_frame[i], s.h_frame[j])
            reality = max(reality, max(abs(d.value(p)) for p in points))
    min_eig = np.inf
    for p in points:
        G = np.array([[s.levi_gram[i][j].value(p) for j in range(n2)] for i in range(n2)])
        min_eig = min(min_eig, float(np.min(np.linalg.eigvalsh(G.real))))
    nondegenerate = min_eig > tol or min_eig < -tol
    strictly_pseudoconvex = min_eig > tol
    partially_integrable = bool(nondegenerate and reality <= tol)
    nij = 0.0
    if partially_integrable:
        for i in range(n2):
            for j in range(i + 1, n2):
                N = nijenhuis(s, s.h_frame[i], s.h_frame[j])
                nij = max(nij, max(float(np.max(np.abs(N.evaluate(p)))) for p in points))
    report = {
        "nondegenerate": bool(nondegenerate),
        "strictly_pseudoconvex": bool(strictly_pseudoconvex),
        "partially_integrable": partially_integrable,
        "integrable": bool(partially_integrable and nij <= tol),
        "levi_min_eig": min_eig,
        "reality_residual": reality,
        "nijenhuis_max": nij,
    }
    if report["integrable"]:
        report["classification"] = "integrable"
    elif report["partially_integrable"]:
        report["classification"] = "partially_integrable"
    elif report["nondegenerate"]:
        report["classification"] = "nondegenerate"
    else:
        report["classification"] = "degenerate"
    return report


def rescale_structure(s: PseudoHermitianStructure, f: ScalarField) -> PseudoHermitianStructure:
    """theta~ = e^{2f} theta with the same H and J."""
    f = as_field(f, s.dim)
    scale = J.exp(f * 2.0)
    theta_t = OneForm([c * scale for c in s.theta.comps], s.dim)
    return PseudoHermitianStructure(
        theta_t,
        s.h_frame,
        s.jmat,
        s.box,
        seed=s.seed,
        name=(s.name + "_rescaled") if s.name else "rescaled",
    )
