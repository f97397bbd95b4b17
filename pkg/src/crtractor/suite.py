"""Verification-suite registry and runner.

Every closed-form identity the library implements is wrapped as a named
check that runs against a chosen example geometry, measures residuals at
seeded sample points, and reports pass/fail at a documented tolerance.
Checks are deterministic given (example, seed, points) and never raise out
of the runner: a crash inside a check is reported as a failed check.

Each check carries ``topics`` labels; the union over the registry must
cover every in-scope subject area (``TOPICS``), which the test suite
asserts.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import algebra as alg
from . import fefferman as F
from . import geometries as geo
from . import jets as J
from . import tractor as T
from . import webster as W
from .crcore import classify_integrability
from .jets import LiftedField, OneForm, VectorField

SCHEMA_VERSION = "1"

#: Subject areas the registry must cover (the coverage meta-test asserts
#: every entry appears in some check's topics).
TOPICS = (
    "cr-structures",
    "tanaka-webster-connection",
    "contact-form-rescaling",
    "fefferman-metric-construction",
    "torsion-trace-identities",
    "fefferman-curvature-components",
    "killing-form-laplacian",
    "graded-algebra-and-splitting",
    "tractor-complex-structure",
    "reconstruction-and-normal-curvature",
    "round-trip-correspondence",
)

ELL_VARIANTS = ("zero", "closed", "generic")

_CACHE: dict = {}


def _structure(example):
    return geo.example(example).structure


def _fs(example, variant):
    key = ("fs", example, variant)
    if key not in _CACHE:
        ex = geo.example(example)
        _CACHE[key] = F.build_fefferman(ex.structure, ex.ell(variant), check=False)
    return _CACHE[key]


def _jcr(example, variant):
    key = ("jcr", example, variant)
    if key not in _CACHE:
        _CACHE[key] = T.build_jcr(_fs(example, variant))
    return _CACHE[key]


def _webster(example):
    key = ("web", example)
    if key not in _CACHE:
        s = _structure(example)
        w = W.build_connection(s, check=False)
        _CACHE[key] = (s, w)
    return _CACHE[key]


def _scalar_field(example, variant):
    key = ("scal", example, variant)
    if key not in _CACHE:
        _CACHE[key] = F.scalar_structural(_fs(example, variant))
    return _CACHE[key]


@dataclass
class Check:
    id: str
    summary: str
    topics: tuple
    tolerance: float
    fn: object
    examples: tuple = ()  # empty: applicable to every example


# ---------------------------------------------------------------------------
# Check implementations.  Each returns a dict with at least
# max_abs_residual / max_rel_residual / passed / points.
# ---------------------------------------------------------------------------


def _record(abs_res, rel_res, tol, points, **extra):
    out = {
        "max_abs_residual": float(abs_res),
        "max_rel_residual": float(rel_res),
        "tolerance": tol,
        "points": points,
        "passed": bool(max(abs_res, rel_res) <= tol),
    }
    out.update(extra)
    return out


def check_structure_validation(example, n_points, seed, tol):
    s = _structure(example)
    pts = s.sample_points(min(n_points, 8), seed=seed)
    rep = s.validate(pts)
    cls = classify_integrability(s, pts)
    res = max(
        rep["theta_on_frame"], rep["j_square"], rep["frame_orthonormal"],
        rep["j_alignment"], rep["reeb"],
    )
    want = "partially_integrable" if example.startswith("deformed") else "integrable"
    ok = cls["classification"] == want and rep["levi_min_eig"] > 0
    rec = _record(res, 0.0, tol, len(pts), classification=cls["classification"])
    rec["passed"] = rec["passed"] and ok
    return rec


def check_scalar_curvature(example, n_points, seed, tol):
    worst_abs = worst_rel = 0.0
    for variant in ELL_VARIANTS:
        fs = _fs(example, variant)
        sc = _scalar_field(example, variant)
        for p in fs.sample_points(n_points, seed=seed):
            got = fs.metric.package(p, 2).scal
            want = sc.value(p[:-1])
            d = abs(got - want)
            worst_abs = max(worst_abs, d)
            worst_rel = max(worst_rel, d / max(1.0, abs(got)))
    return _record(0.0, worst_rel, tol, n_points, max_abs=worst_abs)


def check_levi_civita_rows(example, n_points, seed, tol):
    k = min(n_points, 3)
    worst = 0.0
    for variant in ELL_VARIANTS:
        rep = F.structural_lc_report(_fs(example, variant), n_points=k, seed=seed)
        worst = max(worst, max(v for key, v in rep.items() if key != "pass"))
    return _record(worst, 0.0, tol, k)


def check_ricci_blocks(example, n_points, seed, tol):
    k = min(n_points, 2)
    worst_rel = 0.0
    nonvac = 0.0
    for variant in ELL_VARIANTS:
        fs = _fs(example, variant)
        rs = F.ricci_structural(fs)
        es = fs.frame_lifts
        base_es = fs.base.adapted_frame
        for p in fs.sample_points(k, seed=seed):
            bp = p[:-1]
            pkg = fs.metric.package(p, 2)
            d = abs(pkg.ricci_eval(fs.S, fs.reeb_lift) - rs["ric_st"].value(bp))
            worst_rel = max(worst_rel, d)
            for (i, j) in [(0, 0), (0, 1)]:
                got = pkg.ricci_eval(es[i], es[j])
                want = rs["ric_hh"](base_es[i], base_es[j]).value(bp)
                worst_rel = max(worst_rel, abs(got - want) / max(1.0, abs(got)))
                nonvac = max(nonvac, abs(got))
    rec = _record(0.0, worst_rel, tol, k, nonvacuity=float(nonvac))
    if example.startswith("deformed"):
        rec["passed"] = rec["passed"] and nonvac >= 1e-3
    return rec


def check_killing_form(example, n_points, seed, tol):
    k = min(n_points, 3)
    worst = 0.0
    corollary_ok = True
    for variant in ELL_VARIANTS:
        fs = _fs(example, variant)
        rep = F.laplacian_of_killing_form(fs, n_points=k, seed=seed)
        worst = max(
            worst, rep["killing"], rep["nabla_theta"], rep["laplacian"],
            rep["bochner_p"], rep["scal_vs_structural"],
        )
        admissible = F.ell_admissible(fs.base, fs.ell)
        # equivalence: the Bochner image of theta has no extra theta-term
        # exactly when the offset is admissible
        if admissible:
            corollary_ok = corollary_ok and rep["p_theta_deviation"] <= 1e-8
        else:
            corollary_ok = corollary_ok and rep["p_theta_deviation"] >= 1e-4
    rec = _record(worst, 0.0, tol, k)
    rec["passed"] = rec["passed"] and corollary_ok
    rec["corollary_both_directions"] = bool(corollary_ok)
    return rec


def check_webster_rescaling(example, n_points, seed, tol):
    s, w = _webster(example)
    x = J.coordinates(s.dim)
    worst = 0.0
    for f in [0.0, 0.3, x[0] * x[2] * 0.1 + x[1] * 0.05]:
        rep = W.rescaling_check(s, f, n_points=min(n_points, 6), w=w)
        worst = max(worst, rep["omega_rel_residual"], rep["scal_rel_residual"])
    return _record(0.0, worst, tol, min(n_points, 6))


def check_conformal_covariance(example, n_points, seed, tol):
    e0 = geo.example("heisenberg_m2")
    e1 = geo.example("heisenberg_m2_rescaled")
    f = e1.rescaling
    worst = 0.0
    for variant in ELL_VARIANTS:
        fs0 = _fs("heisenberg_m2", variant)
        fs1 = _fs("heisenberg_m2_rescaled", variant)
        for p in fs0.sample_points(min(n_points, 6), seed=seed):
            sc = np.exp(2.0 * f.value(p[:-1]))
            d = fs1.metric.evaluate(p) - sc * fs0.metric.evaluate(p)
            worst = max(worst, float(np.max(np.abs(d))))
    # closed-offset gauge invariance of the structural curvature scalar
    d = F.scalar_structural(_fs(example, "closed")) - F.scalar_structural(
        _fs(example, "zero")
    )
    s = _structure(example)
    for p in s.sample_points(min(n_points, 6), seed=seed):
        worst = max(worst, abs(d.value(p)))
    return _record(worst, 0.0, tol, min(n_points, 6))


def check_tractor_complex_structure(example, n_points, seed, tol):
    worst = 0.0
    details = {}
    for variant in ELL_VARIANTS:
        built = _jcr(example, variant)
        cc, jcr, u = built["chart"], built["jcr"], built["u"]
        rep = T.check_complex_structure(jcr, n_points=min(n_points, 3), seed=seed)
        worst = max(worst, rep["square_residual"], rep["action_residual"])
        if not rep["structure_pass"]:
            worst = max(worst, 1.0)
        S = T.splitting_operator(cc, built["r"])
        for p in cc.sample_points(min(n_points, 2), seed=seed):
            xi1, phi1, om1 = S.at(p)
            xi2, phi2, om2 = jcr.at(p)
            _, _, omu = u.at(p)
            worst = max(
                worst,
                float(np.max(np.abs(xi1 - xi2))),
                float(np.max(np.abs(phi1 - phi2))),
                float(np.max(np.abs(om1 - om2 - omu))),
            )
        fs = _fs(example, variant)
        if F.ell_admissible(fs.base, fs.ell):
            Sf = T.splitting_operator(cc, built["r"], eta_field=built["eta_field"])
            eq = T.tractor_equation_residual(cc, Sf, n_points=1, seed=seed)
            worst = max(worst, eq["residual"])
            details[f"tractor_equation_{variant}"] = eq["residual"]
    if example.startswith("heisenberg"):
        built = _jcr(example, "zero")
        cc = built["chart"]
        nc = T.normal_curvature(cc)
        p = cc.sample_points(1, seed=seed)[0]
        r = np.zeros(cc.dim)
        r[-1] = 2.0
        omr = max(
            float(np.max(np.abs(s)))
            for a in range(cc.dim)
            for s in nc.triple(p, r, np.eye(cc.dim)[a])
        )
        details["curvature_hook"] = omr
        worst = max(worst, omr)
    return _record(worst, 0.0, tol, min(n_points, 3), **details)


def check_complex_element_structure(example, n_points, seed, tol):
    s = _structure(example)
    n = s.dim  # odd middle dimension n+1 = s.dim + 1
    rng = np.random.default_rng(seed)
    worst = 0.0
    margin = np.inf
    for _ in range(50):
        beta = alg.random_complex_element(rng, n)
        rep = alg.analyze_complex_element(beta, tol=1e-6)
        worst = max(
            worst, rep["m_lightlike"], rep["l_lightlike"],
            rep["eigen_m"], rep["eigen_l"], rep["W_restriction_square"],
        )
        margin = min(margin, rep["m_norm"], rep["l_norm"])
    rec = _record(worst, 0.0, tol, 50, margin=float(margin))
    rec["passed"] = rec["passed"] and margin >= 1e-3
    return rec


def check_reconstruction(example, n_points, seed, tol):
    fs = _fs(example, "generic")
    built = _jcr(example, "generic")
    cc = built["chart"]
    rep = T.reconstruct_cr(
        cc, built["jcr"], base=fs.base, n_points=min(n_points, 3), seed=seed
    )
    worst = max(rep["theta"], rep["h_annihilated"], rep["j_residual"], rep["levi"])
    x = J.coordinates(fs.base.dim)
    phi = x[0] * x[2] * 0.15 + J.sin(x[1]) * 0.1
    cc2 = T.rescale_chart(cc, LiftedField(phi))
    A2 = T.AdjointTractor(
        cc2, built["r"], cc2.cov_vector_fields(built["r"]),
        OneForm([0.0] * cc.dim, cc.dim),
    )
    rep2 = T.reconstruct_cr(
        cc2, A2, base=fs.base, n_points=min(n_points, 2), seed=seed, check=False
    )
    worst = max(worst, rep2["j_residual"])
    return _record(
        worst, 0.0, tol, min(n_points, 3),
        r_nonvanishing=rep["r_nonvanishing"], r_lightlike=rep["r_lightlike"],
    )


def check_torsion_identities(example, n_points, seed, tol):
    s, w = _webster(example)
    rep = W.torsion_identity_suite(s, w, n_points=min(n_points, 5))
    worst = max(v for k, v in rep.items() if k not in ("pass", "nonvacuity"))
    rec = _record(worst, 0.0, tol, min(n_points, 5), nonvacuity=rep["nonvacuity"])
    if example.startswith("deformed"):
        rec["passed"] = rec["passed"] and rep["nonvacuity"] >= 1e-3
    return rec


def check_algebra_and_splitting(example, n_points, seed, tol):
    rng = np.random.default_rng(seed)
    s = _structure(example)
    n = s.dim
    worst_jacobi = 0.0
    for _ in range(50):
        A, B, C = (alg.random_so_matrix(rng, n) for _ in range(3))
        jac = (
            alg.bracket(A, alg.bracket(B, C))
            + alg.bracket(B, alg.bracket(C, A))
            + alg.bracket(C, alg.bracket(A, B))
        )
        worst_jacobi = max(worst_jacobi, float(np.max(np.abs(jac))))
    worst_dd = 0.0
    for _ in range(5):
        vals = rng.normal(size=(n + 1, n + 1, n + 3, n + 3))
        for i in range(n + 1):
            for k in range(n + 1):
                vals[i, k] = alg.random_so_matrix(rng, n)
        vals = vals - vals.transpose(1, 0, 2, 3)
        phi2 = alg.HomologyCochain(2, vals)
        dd = alg.kostant_codifferential(alg.kostant_codifferential(phi2))
        worst_dd = max(worst_dd, float(np.max(np.abs(dd))))
    # splitting-operator defining properties on the fundamental field
    built = _jcr(example, "closed")
    cc = built["chart"]
    Sf = T.splitting_operator(cc, built["r"], eta_field=built["eta_field"])
    assert Sf.xi is built["r"]  # first-slot projection is the input
    nd = T.normal_derivative(cc, Sf)
    p = cc.sample_points(1, seed=seed)[0]
    worst_split = nd.codifferential_residual(p)
    rec = _record(max(worst_jacobi, worst_split), 0.0, tol, 50,
                  jacobi=worst_jacobi, codifferential_squared=worst_dd,
                  splitting_codifferential=worst_split)
    rec["passed"] = rec["passed"] and worst_dd <= 1e-12
    return rec


def check_flat_chain(example, n_points, seed, tol):
    s, w = _webster(example)
    t = W.torsion(s, w)
    curv = W.curvature(s, w)
    fs = _fs(example, "zero")
    es = s.adapted_frame
    n2 = 2 * s.m
    pts = s.sample_points(min(n_points, 4), seed=seed)
    worst = 0.0
    for p in pts:
        worst = max(worst, abs(complex(curv.scal.value(p))))
        for i in range(n2):
            for j in range(i + 1, n2):
                worst = max(
                    worst,
                    float(np.max(np.abs(t.nij(es[i], es[j]).evaluate(p)))),
                    abs(complex(t.t_theta(es[i], es[j]).value(p))),
                    abs(complex(curv.r4(es[i], es[j], es[0], es[1]).value(p))),
                )
    rep = F.curvature_form_report(fs, n_points=min(n_points, 3))
    worst = max(worst, rep["closed_form_magnitude"])
    # The fiber metric of the flat model is Ricci-flat except for the
    # universal vertical component Ric(S,S) = m/2 (which is structurally
    # positive for every fiber metric and is asserted exactly here).
    want = np.zeros((fs.dim, fs.dim))
    want[fs.dim - 1, fs.dim - 1] = s.m / 2.0
    for p in fs.sample_points(min(n_points, 2), seed=seed):
        pkg = fs.metric.package(p, 2)
        worst = max(worst, abs(pkg.scal), float(np.max(np.abs(pkg.ric - want))))
    return _record(worst, 0.0, tol, len(pts))


CHECKS = [
    Check(
        "cr-structure-validation",
        "contact/frame/complex-map invariants and integrability class",
        ("cr-structures",), 1e-9, check_structure_validation,
    ),
    Check(
        "fefferman-scalar-vs-oracle",
        "fiber-metric scalar curvature vs coordinate oracle, all offsets",
        ("fefferman-curvature-components", "fefferman-metric-construction"),
        1e-8, check_scalar_curvature,
    ),
    Check(
        "levi-civita-rows-vs-oracle",
        "structural Levi-Civita component formulas vs oracle Christoffels",
        ("fefferman-curvature-components",), 1e-8, check_levi_civita_rows,
    ),
    Check(
        "ricci-blocks-vs-oracle",
        "structural Ricci blocks vs oracle Ricci values",
        ("fefferman-curvature-components", "torsion-trace-identities"),
        1e-7, check_ricci_blocks,
    ),
    Check(
        "killing-form-laplacian",
        "Killing identity, Laplacian and Bochner image of the contact lift",
        ("killing-form-laplacian",), 1e-8, check_killing_form,
    ),
    Check(
        "webster-rescaling-laws",
        "connection-form and scalar transformation under contact rescaling",
        ("contact-form-rescaling", "tanaka-webster-connection"),
        1e-8, check_webster_rescaling,
    ),
    Check(
        "conformal-covariance",
        "rescaled structure gives a conformal fiber metric; gauge invariance",
        ("fefferman-metric-construction",), 1e-8, check_conformal_covariance,
        ("heisenberg_m2", "heisenberg_m2_rescaled"),
    ),
    Check(
        "tractor-complex-structure",
        "canonical tractor complex structure, splitting decomposition, "
        "tractor equation",
        ("tractor-complex-structure", "graded-algebra-and-splitting"),
        1e-7, check_tractor_complex_structure,
    ),
    Check(
        "complex-element-structure",
        "structural consequences of squaring to minus the identity",
        ("reconstruction-and-normal-curvature",), 1e-9,
        check_complex_element_structure,
    ),
    Check(
        "cr-reconstruction",
        "round trip: fiber chart back to contact data, conformally invariant",
        ("reconstruction-and-normal-curvature", "round-trip-correspondence",
         "cr-structures"),
        1e-8, check_reconstruction,
    ),
    Check(
        "torsion-trace-identities",
        "torsion tensor trace identities and symmetry lists",
        ("torsion-trace-identities", "tanaka-webster-connection"),
        1e-8, check_torsion_identities,
    ),
    Check(
        "algebra-and-splitting",
        "Jacobi identity, codifferential complex, splitting codifferential",
        ("graded-algebra-and-splitting",), 1e-8, check_algebra_and_splitting,
    ),
    Check(
        "flat-model-chain",
        "everything vanishes on the flat model with zero offset",
        ("cr-structures", "tanaka-webster-connection",
         "fefferman-curvature-components"),
        1e-9, check_flat_chain,
        ("heisenberg_m1", "heisenberg_m2"),
    ),
]


def checks_for(example):
    return [c for c in CHECKS if not c.examples or example in c.examples]


def run_suite(example, suite_filter="all", seed=42, n_points=20, tol=None):
    """Run every matching check against one example; never raises from a
    check body.  Returns {meta, checks:[...]} sorted by check id."""
    if example not in [e.name for e in geo.builtin_examples()]:
        raise KeyError(f"unknown example {example!r}")
    selected = [
        c
        for c in checks_for(example)
        if suite_filter in ("all", "") or suite_filter in c.id
    ]
    records = []
    for c in sorted(selected, key=lambda c: c.id):
        t0 = time.perf_counter()
        try:
            rec = c.fn(example, n_points, seed, tol if tol is not None else c.tolerance)
        except Exception as e:  # a crash is a failed check, not an abort
            rec = {
                "max_abs_residual": float("nan"),
                "max_rel_residual": float("nan"),
                "tolerance": tol if tol is not None else c.tolerance,
                "points": 0,
                "passed": False,
                "error": f"{type(e).__name__}: {e}",
            }
        rec["id"] = c.id
        rec["summary"] = c.summary
        rec["topics"] = list(c.topics)
        rec["wall_time"] = round(time.perf_counter() - t0, 4)
        records.append(rec)
    return {
        "meta": {
            "schema_version": SCHEMA_VERSION,
            "example": example,
            "suite": suite_filter,
            "seed": seed,
            "points": n_points,
            "all_passed": all(r["passed"] for r in records),
        },
        "checks": records,
    }


def emit_report(report, fmt="json", include_timing=True):
    """Serialize a suite report as JSON bytes or a plain-text table."""
    if fmt == "json":
        rep = report
        if not include_timing:
            rep = {
                "meta": report["meta"],
                "checks": [
                    {k: v for k, v in r.items() if k != "wall_time"}
                    for r in report["checks"]
                ],
            }
        return (json.dumps(rep, indent=2, sort_keys=True) + "\n").encode()
    if fmt == "text":
        lines = [
            f"example: {report['meta']['example']}  seed: {report['meta']['seed']}"
            f"  points: {report['meta']['points']}",
            f"{'check':<32} {'residual':>12} {'tol':>9} {'time':>7}  status",
        ]
        for r in report["checks"]:
            res = max(r["max_abs_residual"], r["max_rel_residual"])
            lines.append(
                f"{r['id']:<32} {res:>12.3e} {r['tolerance']:>9.0e}"
                f" {r.get('wall_time', 0.0):>7.2f}  "
                + ("PASS" if r["passed"] else "FAIL")
            )
        lines.append(
            "all passed" if report["meta"]["all_passed"] else "FAILURES present"
        )
        return ("\n".join(lines) + "\n").encode()
    raise ValueError(f"unknown format {fmt!r}")
