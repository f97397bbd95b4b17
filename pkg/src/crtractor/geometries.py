"""Built-in example geometries: Heisenberg groups, a rescaled Heisenberg
structure, and a symplectic deformation with nonvanishing Nijenhuis tensor,
each with a family of purely imaginary connection-offset 1-forms."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import jets as J
from .crcore import PseudoHermitianStructure
from .jets import OneForm


@dataclass(frozen=True)
class ExampleGeometry:
    name: str
    m: int
    structure: PseudoHermitianStructure
    ells: dict = field(default_factory=dict)
    description: str = ""
    rescaling: object = None  # the ScalarField f when theta = e^{2f} theta_0

    @property
    def seed(self):
        return self.structure.seed

    def ell(self, variant: str) -> OneForm:
        if variant not in self.ells:
            raise KeyError(f"unknown ell variant {variant!r}; have {sorted(self.ells)}")
        return self.ells[variant]


def _standard_jmat(m):
    """J X_k = Y_k, J Y_k = -X_k over the frame order (X_1, Y_1, ..., X_m, Y_m)."""
    n2 = 2 * m
    mat = [[0.0] * n2 for _ in range(n2)]
    for a in range(m):
        mat[2 * a + 1][2 * a] = 1.0
        mat[2 * a][2 * a + 1] = -1.0
    return mat


def _heisenberg_parts(m):
    """Chart (x_1, y_1, ..., x_m, y_m, t); theta = dt - sum y_k dx_k;
    X_k = d/dx_k + y_k d/dt, Y_k = d/dy_k."""
    dim = 2 * m + 1
    coords = J.coordinates(dim)
    theta_comps = [0.0] * dim
    theta_comps[-1] = 1.0
    for a in range(m):
        theta_comps[2 * a] = -coords[2 * a + 1]
    theta = OneForm(theta_comps, dim)
    frame = []
    for a in range(m):
        xcomps = [0.0] * dim
        xcomps[2 * a] = 1.0
        xcomps[-1] = coords[2 * a + 1]
        frame.append(J.VectorField(xcomps, dim))
        ycomps = [0.0] * dim
        ycomps[2 * a + 1] = 1.0
        frame.append(J.VectorField(ycomps, dim))
    return theta, frame, coords


def _ell_variants(dim, coords):
    """Purely imaginary 1-forms: zero, an exact i dg, and a non-closed one."""
    zero = OneForm([0.0] * dim, dim)
    # closed: i * d(0.3 x1 + 0.2 x1 y1)
    g = coords[0] * 0.3 + coords[0] * coords[1] * 0.2
    closed = OneForm([J.deriv(g, a) * 1j for a in range(dim)], dim)
    gen_comps = [J.as_field(0.0, dim)] * dim
    gen_comps[0] = coords[1] * 0.2  # 0.2 y1 dx1  -> d ell has a dx1^dy1 part
    gen_comps[1] = coords[-1] * 0.15  # 0.15 t dy1
    if dim > 3:
        gen_comps[3] = coords[2] * 0.25  # 0.25 x2 dy2
    gen_comps[-1] = coords[0] * 0.1  # 0.1 x1 dt
    generic = OneForm([c * 1j for c in gen_comps], dim)
    return {"zero": zero, "closed": closed, "generic": generic}


def _heisenberg(m, name):
    theta, frame, coords = _heisenberg_parts(m)
    dim = 2 * m + 1
    box = [(-0.7, 0.7)] * dim
    s = PseudoHermitianStructure(theta, frame, _standard_jmat(m), box, seed=42, name=name)
    return ExampleGeometry(
        name=name,
        m=m,
        structure=s,
        ells=_ell_variants(dim, coords),
        description=f"flat Heisenberg group H_{m} with the left-invariant structure",
    )


def _heisenberg_rescaled(m=2):
    theta, frame, coords = _heisenberg_parts(m)
    dim = 2 * m + 1
    f = coords[0] * coords[3] * 0.1 + coords[2] * 0.05
    scale = J.exp(f * 2.0)
    theta_t = OneForm([c * scale for c in theta.comps], dim)
    box = [(-0.7, 0.7)] * dim
    s = PseudoHermitianStructure(
        theta_t, frame, _standard_jmat(m), box, seed=42, name="heisenberg_m2_rescaled"
    )
    return ExampleGeometry(
        name="heisenberg_m2_rescaled",
        m=m,
        structure=s,
        ells=_ell_variants(dim, coords),
        description="Heisenberg H_2 with theta rescaled by exp(2f), f polynomial",
        rescaling=f,
    )


def _deformed_m2(eps=0.2):
    """J conjugated by the point-dependent symplectic shear with symmetric
    block C = [[0, c], [c, 0]], c = eps sin(x_1), coupling the two pairs:
    X_1 -> X_1 + c Y_2, X_2 -> X_2 + c Y_1.  Partially integrable with
    N(X_1, X_2) = (1 + c^2) c' Y_1 != 0.  (A diagonal shear block leaves the
    pairs decoupled and the Nijenhuis tensor identically zero.)"""
    m = 2
    theta, frame, coords = _heisenberg_parts(m)
    dim = 2 * m + 1
    c = J.sin(coords[0]) * eps
    one = c * c + 1.0
    jmat = [[J.as_field(0.0, dim) for _ in range(4)] for _ in range(4)]
    # frame order (X1, Y1, X2, Y2); J = M J0 M^{-1} = [[C, -I], [C^2+I, -C]]
    jmat[2][0] = c
    jmat[1][0] = one  # J X1 = c X2 + (1+c^2) Y1
    jmat[0][1] = J.as_field(-1.0, dim)
    jmat[3][1] = -c  # J Y1 = -X1 - c Y2
    jmat[0][2] = c
    jmat[3][2] = one  # J X2 = c X1 + (1+c^2) Y2
    jmat[2][3] = J.as_field(-1.0, dim)
    jmat[1][3] = -c  # J Y2 = -X2 - c Y1
    box = [(-0.7, 0.7)] * dim
    s = PseudoHermitianStructure(theta, frame, jmat, box, seed=42, name="deformed_m2")
    return ExampleGeometry(
        name="deformed_m2",
        m=m,
        structure=s,
        ells=_ell_variants(dim, coords),
        description="Heisenberg H_2 with J conjugated by a symplectic shear (N != 0)",
    )


_REGISTRY = None


def builtin_examples():
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = [
            _heisenberg(1, "heisenberg_m1"),
            _heisenberg(2, "heisenberg_m2"),
            _heisenberg_rescaled(),
            _deformed_m2(),
        ]
    return list(_REGISTRY)


def example(name: str) -> ExampleGeometry:
    for ex in builtin_examples():
        if ex.name == name:
            return ex
    raise KeyError(f"unknown example {name!r}")
