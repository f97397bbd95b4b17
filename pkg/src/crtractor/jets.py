"""Chart-local smooth calculus via forward-mode Taylor jets.

Scalar quantities are lazy expression DAGs (:class:`ScalarField`) that can be
evaluated at a chart point to a truncated Taylor polynomial (:class:`Jet`) of
any requested order.  All derivatives are exact to machine precision — no
finite differencing anywhere.  Vector fields and differential forms are tuples
of scalar fields in chart coordinates, with Lie bracket and exterior
derivative built from jet derivatives.

Complex-valued quantities are supported transparently: coefficients promote to
``complex128`` when a complex constant enters an expression, and ``re``/``im``/
``conj`` project back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernel import poly_mul
from ._tables import jet_tables, lift_map


class ChartError(ValueError):
    """Dimension/chart mismatch or invalid evaluation request."""


# ---------------------------------------------------------------------------
# Jet: truncated Taylor polynomial at a point
# ---------------------------------------------------------------------------


class Jet:
    """Truncated Taylor expansion of a scalar quantity at a chart point.

    ``c[k]`` is the Taylor *coefficient* (partial derivative divided by the
    factorial of the multi-index) of the k-th monomial in graded order.
    """

    __slots__ = ("dim", "order", "c")

    def __init__(self, dim, order, c):
        self.dim = dim
        self.order = order
        self.c = c

    @staticmethod
    def constant(value, dim, order):
        t = jet_tables(dim, order)
        dtype = np.complex128 if isinstance(value, complex) else np.float64
        c = np.zeros(t.n_terms, dtype=dtype)
        c[0] = value
        return Jet(dim, order, c)

    @staticmethod
    def coordinate(i, value, dim, order):
        t = jet_tables(dim, order)
        c = np.zeros(t.n_terms, dtype=np.float64)
        c[0] = value
        if order >= 1:
            c[1 + i] = 1.0
        return Jet(dim, order, c)

    @property
    def value(self):
        return self.c[0]

    def truncate(self, order):
        if order == self.order:
            return self
        if order > self.order:
            raise ChartError("cannot truncate to a higher order")
        t = jet_tables(self.dim, order)
        return Jet(self.dim, order, self.c[: t.n_terms])

    def _check(self, other):
        if self.dim != other.dim or self.order != other.order:
            raise ChartError("jet shape mismatch")

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.dim, self.order, self.c + other.c)
        c = self.c.copy()
        if isinstance(other, complex) and c.dtype.kind != "c":
            c = c.astype(np.complex128)
        c[0] += other
        return Jet(self.dim, self.order, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.dim, self.order, -self.c)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.dim, self.order, self.c * other)
        self._check(other)
        t = jet_tables(self.dim, self.order)
        c = poly_mul(self.c, other.c, t.mul_i, t.mul_j, t.mul_k, t.n_terms)
        return Jet(self.dim, self.order, c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.dim, self.order, self.c / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, int):
            if p < 0:
                return self.reciprocal() ** (-p)
            out = Jet.constant(1.0, self.dim, self.order)
            base = self
            n = p
            while n:
                if n & 1:
                    out = out * base
                base = base * base
                n >>= 1
            return out
        return self.compose(_power_series(p))

    def compose(self, series_fn):
        """Substitute this jet into a univariate function.

        ``series_fn(u0, order)`` must return the Taylor coefficients of the
        function at the point ``u0``.
        """
        g = series_fn(self.value, self.order)
        v = Jet(self.dim, self.order, self.c.copy())
        v.c[0] = 0.0
        out = Jet.constant(1.0, self.dim, self.order) * g[self.order]
        for r in range(self.order - 1, -1, -1):
            out = out * v + g[r]
        return out

    def reciprocal(self):
        return self.compose(_recip_series)

    def derivative(self, i):
        """Jet of the i-th partial derivative (order drops by one)."""
        if self.order < 1:
            raise ChartError("cannot differentiate an order-0 jet")
        t = jet_tables(self.dim, self.order)
        c = self.c[t.diff_src[i]] * t.diff_fac[i]
        return Jet(self.dim, self.order - 1, c)

    # -- extraction of classical derivative tensors ------------------------

    def partials(self, k):
        """Dense symmetric array of all order-k partial derivatives."""
        if k > self.order:
            raise ChartError("jet order too low")
        t = jet_tables(self.dim, self.order)
        n = self.dim
        if k == 0:
            return self.value
        out = np.zeros((n,) * k, dtype=self.c.dtype)
        for idx in range(t.degree_start[k], t.degree_start[k + 1]):
            alpha = t.alphas[idx]
            val = self.c[idx] * t.fact[idx]
            positions = []
            for d in range(n):
                positions.extend([d] * int(alpha[d]))
            from itertools import permutations

            for perm in set(permutations(positions)):
                out[perm] = val
        return out


def _require_positive(u0, what):
    if complex(u0).imag == 0 and complex(u0).real <= 0:
        raise ChartError(f"{what} evaluated at non-positive value {u0}")


def _recip_series(u0, order):
    if u0 == 0:
        raise ChartError("division by a field vanishing at the point")
    inv = 1.0 / u0
    return [inv * (-inv) ** r for r in range(order + 1)]


def _power_series(p):
    def fn(u0, order):
        out = []
        coeff = 1.0
        for r in range(order + 1):
            out.append(coeff * u0 ** (p - r))
            coeff *= (p - r) / (r + 1)
        return out

    return fn


def _exp_series(u0, order):
    e = np.exp(u0)
    return [e / math.factorial(r) for r in range(order + 1)]


def _log_series(u0, order):
    _require_positive(u0, "log")
    out = [np.log(u0)]
    for r in range(1, order + 1):
        out.append((-1.0) ** (r + 1) / (r * u0**r))
    return out


def _sin_series(u0, order):
    s, c = np.sin(u0), np.cos(u0)
    cyc = [s, c, -s, -c]
    return [cyc[r % 4] / math.factorial(r) for r in range(order + 1)]


def _cos_series(u0, order):
    s, c = np.sin(u0), np.cos(u0)
    cyc = [c, -s, -c, s]
    return [cyc[r % 4] / math.factorial(r) for r in range(order + 1)]


def _sqrt_series(u0, order):
    _require_positive(u0, "sqrt")
    return _power_series(0.5)(u0, order)


# ---------------------------------------------------------------------------
# Jet3: the order-3 view used by the public evaluate_jet API
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Jet3:
    """Order-3 Taylor data: value, gradient, Hessian, third derivatives."""

    value: float
    grad: np.ndarray
    hess: np.ndarray
    third: np.ndarray


def evaluate_jet(field: "ScalarField", p) -> Jet3:
    j = field.jet(p, 3)
    return Jet3(j.value, j.partials(1), j.partials(2), j.partials(3))


# ---------------------------------------------------------------------------
# ScalarField expression DAG
# ---------------------------------------------------------------------------


class ScalarField:
    """A lazy scalar quantity on a chart, evaluable to a Jet of any order.

    Per-node memoization keyed on (point, order) means shared sub-expressions
    are evaluated once per point.  Fields are immutable after construction.
    """

    __slots__ = ("dim", "_cache")

    def __init__(self, dim):
        self.dim = dim
        self._cache = {}

    def jet(self, p, order=3):
        key = tuple(map(float, p))
        if len(key) != self.dim:
            raise ChartError(f"point of length {len(key)} on a dim-{self.dim} chart")
        hit = self._cache.get(key)
        if hit is not None and hit.order >= order:
            return hit.truncate(order)
        j = self._jet(key, order)
        # Evaluation is localized per point, so a small bound keeps the
        # memoization benefit while capping memory on long point sweeps.
        if key not in self._cache and len(self._cache) >= 4:
            self._cache.clear()
        self._cache[key] = j
        return j

    def _jet(self, p, order):  # pragma: no cover - abstract
        raise NotImplementedError

    def value(self, p):
        return self.jet(p, 0).value

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, ScalarField):
            if other.dim != self.dim:
                raise ChartError("mixing fields from different charts")
            return other
        if isinstance(other, (int, float, complex, np.floating, np.complexfloating)):
            return None  # handled by the scalar fast paths
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o is None:
            return self if other == 0 else _Shift(self, other)
        return _Sum(self, o)

    __radd__ = __add__

    def __neg__(self):
        return _Scale(self, -1)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o is None:
            return self if other == 0 else _Shift(self, -other)
        return _Sum(self, _Scale(o, -1))

    def __rsub__(self, other):
        return _Shift(_Scale(self, -1), other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o is None:
            return self if other == 1 else _Scale(self, other)
        return _Prod(self, o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o is None:
            return _Scale(self, 1.0 / other)
        return _Prod(self, _Compose(o, _recip_series))

    def __rtruediv__(self, other):
        return _Scale(_Compose(self, _recip_series), other)

    def __pow__(self, p):
        if isinstance(p, int) and p >= 0:
            if p == 0:
                return ConstField(1.0, self.dim)
            out = self
            for _ in range(p - 1):
                out = _Prod(out, self)
            return out
        return _Compose(self, _power_series(p))


class ConstField(ScalarField):
    __slots__ = ("val",)

    def __init__(self, value, dim):
        super().__init__(dim)
        self.val = value

    def _jet(self, p, order):
        return Jet.constant(self.val, self.dim, order)


class CoordField(ScalarField):
    __slots__ = ("index",)

    def __init__(self, index, dim):
        super().__init__(dim)
        if not 0 <= index < dim:
            raise ChartError("coordinate index out of range")
        self.index = index

    def _jet(self, p, order):
        return Jet.coordinate(self.index, p[self.index], self.dim, order)


class _Sum(ScalarField):
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        super().__init__(a.dim)
        self.a, self.b = a, b

    def _jet(self, p, order):
        return self.a.jet(p, order) + self.b.jet(p, order)


class _Prod(ScalarField):
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        super().__init__(a.dim)
        self.a, self.b = a, b

    def _jet(self, p, order):
        return self.a.jet(p, order) * self.b.jet(p, order)


class _Scale(ScalarField):
    __slots__ = ("a", "s")

    def __init__(self, a, s):
        super().__init__(a.dim)
        self.a, self.s = a, s

    def _jet(self, p, order):
        return self.a.jet(p, order) * self.s


class _Shift(ScalarField):
    __slots__ = ("a", "s")

    def __init__(self, a, s):
        super().__init__(a.dim)
        self.a, self.s = a, s

    def _jet(self, p, order):
        return self.a.jet(p, order) + self.s


class _Compose(ScalarField):
    __slots__ = ("a", "series")

    def __init__(self, a, series):
        super().__init__(a.dim)
        self.a, self.series = a, series

    def _jet(self, p, order):
        return self.a.jet(p, order).compose(self.series)


class _Deriv(ScalarField):
    __slots__ = ("a", "index")

    def __init__(self, a, index):
        super().__init__(a.dim)
        self.a, self.index = a, index

    def _jet(self, p, order):
        return self.a.jet(p, order + 1).derivative(self.index)


class _Re(ScalarField):
    __slots__ = ("a",)

    def __init__(self, a):
        super().__init__(a.dim)
        self.a = a

    def _jet(self, p, order):
        j = self.a.jet(p, order)
        return Jet(j.dim, j.order, np.ascontiguousarray(j.c.real.copy()))


class _Im(ScalarField):
    __slots__ = ("a",)

    def __init__(self, a):
        super().__init__(a.dim)
        self.a = a

    def _jet(self, p, order):
        j = self.a.jet(p, order)
        return Jet(j.dim, j.order, np.ascontiguousarray(j.c.imag.copy()))


class _Conj(ScalarField):
    __slots__ = ("a",)

    def __init__(self, a):
        super().__init__(a.dim)
        self.a = a

    def _jet(self, p, order):
        j = self.a.jet(p, order)
        return Jet(j.dim, j.order, np.conj(j.c))


class LiftedField(ScalarField):
    """A base-chart field regarded as a field on a chart with one extra
    (trailing) coordinate on which it does not depend."""

    __slots__ = ("a",)

    def __init__(self, a):
        super().__init__(a.dim + 1)
        self.a = a

    def _jet(self, p, order):
        j = self.a.jet(p[:-1], order)
        t = jet_tables(self.dim, order)
        c = np.zeros(t.n_terms, dtype=j.c.dtype)
        c[lift_map(self.a.dim, order)] = j.c
        return Jet(self.dim, order, c)


def as_field(x, dim):
    if isinstance(x, ScalarField):
        if x.dim != dim:
            raise ChartError("mixing fields from different charts")
        return x
    return ConstField(x, dim)


def coordinates(dim):
    """The coordinate fields (x^0, ..., x^{dim-1}) of a chart."""
    return [CoordField(i, dim) for i in range(dim)]


def deriv(f, i):
    """Partial derivative field of f along coordinate i."""
    return _Deriv(f, i)


def exp(f):
    return _Compose(f, _exp_series) if isinstance(f, ScalarField) else np.exp(f)


def log(f):
    return _Compose(f, _log_series) if isinstance(f, ScalarField) else np.log(f)


def sin(f):
    return _Compose(f, _sin_series) if isinstance(f, ScalarField) else np.sin(f)


def cos(f):
    return _Compose(f, _cos_series) if isinstance(f, ScalarField) else np.cos(f)


def sqrt(f):
    return _Compose(f, _sqrt_series) if isinstance(f, ScalarField) else np.sqrt(f)


def re(f):
    return _Re(f)


def im(f):
    return _Im(f)


def conj(f):
    return _Conj(f) if isinstance(f, ScalarField) else np.conj(f)


# ---------------------------------------------------------------------------
# Vector fields and differential forms
# ---------------------------------------------------------------------------


class VectorField:
    """Contravariant components in chart coordinates."""

    __slots__ = ("dim", "comps")

    def __init__(self, comps, dim=None):
        comps = list(comps)
        if dim is None:
            dim = len(comps)
        self.dim = dim
        self.comps = [as_field(c, dim) for c in comps]
        if len(self.comps) != dim:
            raise ChartError("component count must equal chart dimension")

    def __call__(self, f):
        """Directional derivative X(f) of a scalar field."""
        out = self.comps[0] * deriv(f, 0)
        for i in range(1, self.dim):
            out = out + self.comps[i] * deriv(f, i)
        return out

    def __add__(self, other):
        return VectorField([a + b for a, b in zip(self.comps, other.comps)])

    def __sub__(self, other):
        return VectorField([a - b for a, b in zip(self.comps, other.comps)])

    def __neg__(self):
        return VectorField([-a for a in self.comps])

    def __mul__(self, s):
        return VectorField([a * s for a in self.comps])

    __rmul__ = __mul__

    def evaluate(self, p):
        return np.array([c.value(p) for c in self.comps])


class OneForm:
    """Covariant components in chart coordinates."""

    __slots__ = ("dim", "comps")

    def __init__(self, comps, dim=None):
        comps = list(comps)
        if dim is None:
            dim = len(comps)
        self.dim = dim
        self.comps = [as_field(c, dim) for c in comps]
        if len(self.comps) != dim:
            raise ChartError("component count must equal chart dimension")

    def __call__(self, X):
        out = self.comps[0] * X.comps[0]
        for i in range(1, self.dim):
            out = out + self.comps[i] * X.comps[i]
        return out

    def __add__(self, other):
        return OneForm([a + b for a, b in zip(self.comps, other.comps)])

    def __sub__(self, other):
        return OneForm([a - b for a, b in zip(self.comps, other.comps)])

    def __neg__(self):
        return OneForm([-a for a in self.comps])

    def __mul__(self, s):
        return OneForm([a * s for a in self.comps])

    __rmul__ = __mul__

    def evaluate(self, p):
        return np.array([c.value(p) for c in self.comps])


class TwoForm:
    """Antisymmetric covariant 2-tensor, stored as the full component matrix."""

    __slots__ = ("dim", "comps")

    def __init__(self, comps):
        self.comps = [list(row) for row in comps]
        self.dim = len(self.comps)

    def __call__(self, X, Y):
        terms = []
        for a in range(self.dim):
            for b in range(self.dim):
                c = self.comps[a][b]
                if isinstance(c, ScalarField) or c != 0:
                    terms.append(as_field(c, self.dim) * X.comps[a] * Y.comps[b])
        if not terms:
            return ConstField(0.0, self.dim)
        out = terms[0]
        for t in terms[1:]:
            out = out + t
        return out

    def __add__(self, other):
        return TwoForm(
            [
                [
                    as_field(a, self.dim) + as_field(b, self.dim)
                    for a, b in zip(ra, rb)
                ]
                for ra, rb in zip(self.comps, other.comps)
            ]
        )

    def __sub__(self, other):
        return self + (other * (-1))

    def __mul__(self, s):
        return TwoForm([[as_field(a, self.dim) * s for a in row] for row in self.comps])

    __rmul__ = __mul__

    def evaluate(self, p):
        return np.array(
            [[as_field(c, self.dim).value(p) for c in row] for row in self.comps]
        )


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X,Y]^k = X(Y^k) - Y(X^k)."""
    if X.dim != Y.dim:
        raise ChartError("mixing fields from different charts")
    return VectorField([X(Y.comps[k]) - Y(X.comps[k]) for k in range(X.dim)])


def differential(f: ScalarField) -> OneForm:
    return OneForm([deriv(f, i) for i in range(f.dim)])


def exterior_derivative(alpha: OneForm) -> TwoForm:
    """(d alpha)_{ab} = d_a alpha_b - d_b alpha_a."""
    n = alpha.dim
    return TwoForm(
        [[deriv(alpha.comps[b], a) - deriv(alpha.comps[a], b) for b in range(n)] for a in range(n)]
    )


def lift_vector(X: VectorField) -> VectorField:
    """Lift a base-chart vector field to the chart with one extra coordinate."""
    return VectorField([LiftedField(c) for c in X.comps] + [0], X.dim + 1)


def lift_oneform(alpha: OneForm) -> OneForm:
    return OneForm([LiftedField(c) for c in alpha.comps] + [0], alpha.dim + 1)


# ---------------------------------------------------------------------------
# Linear algebra in the ring of scalar fields
# ---------------------------------------------------------------------------


def field_linsolve(A, b, ref_point):
    """Solve A x = b with ScalarField entries by Gaussian elimination.

    The pivot sequence is chosen numerically at ``ref_point`` (a point where
    the system is expected to be well conditioned); the resulting expression
    is exact wherever those pivots stay nonzero.
    """
    n = len(A)
    dim = len(ref_point)
    rows = [[as_field(x, dim) for x in row] + [as_field(bi, dim)] for row, bi in zip(A, b)]
    order = list(range(n))
    for col in range(n):
        piv = max(
            range(col, n), key=lambda r: abs(rows[order[r]][col].value(ref_point))
        )
        order[col], order[piv] = order[piv], order[col]
        prow = rows[order[col]]
        if abs(prow[col].value(ref_point)) < 1e-13:
            raise ChartError("singular field linear system at reference point")
        inv = 1.0 / prow[col]
        for r in range(col + 1, n):
            row = rows[order[r]]
            factor = row[col] * inv
            for c in range(col + 1, n + 1):
                row[c] = row[c] - factor * prow[c]
    x = [None] * n
    for col in range(n - 1, -1, -1):
        prow = rows[order[col]]
        acc = prow[n]
        for c in range(col + 1, n):
            acc = acc - prow[c] * x[c]
        x[col] = acc / prow[col]
    return x


def field_inv(M, ref_point):
    """Inverse of a matrix of ScalarFields (column-by-column solve)."""
    n = len(M)
    dim = len(ref_point)
    cols = []
    for j in range(n):
        e = [1.0 if i == j else 0.0 for i in range(n)]
        cols.append(field_linsolve(M, e, ref_point))
    return [[cols[j][i] for j in range(n)] for i in range(n)]
