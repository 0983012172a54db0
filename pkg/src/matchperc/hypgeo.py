"""Geometry kernel for the Poincare disk and the Euclidean plane.

Points are complex numbers.  Plain ``complex`` is used for ordinary work; an
``mpmath.mpc`` point switches every routine touching it to mpmath arithmetic,
which is what long geodesic traces far from the disk centre need.

All geodesics are oriented from ``start`` to ``end``.  In hyperbolic mode these
are ideal points on the unit circle, in Euclidean mode ``start`` is a point on
the line and ``end - start`` its unit direction.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from types import SimpleNamespace

import mpmath

HYPERBOLIC = "hyperbolic"
EUCLIDEAN = "euclidean"
MODES = (HYPERBOLIC, EUCLIDEAN)

EPS_BOUNDARY = 1e-12
TOL = 1e-9
MP_TOL = mpmath.mpf(10) ** -40


class GeometryError(ValueError):
    """Raised for points outside the model or degenerate input."""


_FLOAT = SimpleNamespace(
    sqrt=math.sqrt, atanh=math.atanh, tanh=math.tanh, atan2=math.atan2,
    acosh=math.acosh, cosh=math.cosh, sinh=math.sinh, cos=math.cos,
    sin=math.sin, asinh=math.asinh, exp=cmath.exp, pi=math.pi, one=1.0, j=1j,
)
_MP = SimpleNamespace(
    sqrt=mpmath.sqrt, atanh=mpmath.atanh, tanh=mpmath.tanh, atan2=mpmath.atan2,
    acosh=mpmath.acosh, cosh=mpmath.cosh, sinh=mpmath.sinh, cos=mpmath.cos,
    sin=mpmath.sin, asinh=mpmath.asinh, exp=mpmath.exp, pi=mpmath.pi, one=mpmath.mpf(1),
    j=mpmath.mpc(0, 1),
)


def _lib(*vals):
    for v in vals:
        if isinstance(v, (mpmath.mpc, mpmath.mpf)):
            return _MP
    return _FLOAT


def _conj(z):
    return z.conjugate()


def _check_mode(mode):
    if mode not in MODES:
        raise GeometryError(f"unknown mode {mode!r}")


def point(x, y, mode=HYPERBOLIC, eps=EPS_BOUNDARY):
    """Build a validated point from coordinates."""
    z = complex(x, y)
    check_point(z, mode, eps)
    return z


def check_point(z, mode=HYPERBOLIC, eps=EPS_BOUNDARY):
    _check_mode(mode)
    if isinstance(z, mpmath.mpc):
        if mode == HYPERBOLIC and abs(z) >= 1:
            raise GeometryError(f"point {z} lies outside the open disk")
        return
    if mode == HYPERBOLIC and abs(z) ** 2 >= 1 - eps:
        raise GeometryError(f"point {z} lies outside the open disk")


def to_mp(z):
    return mpmath.mpc(z)


def to_float(z):
    return complex(z)


# -- Moebius helpers ---------------------------------------------------------

def _to_origin(a, z):
    """Disk automorphism sending ``a`` to 0, applied to ``z``."""
    return (z - a) / (1 - _conj(a) * z)


def _from_origin(a, z):
    return (z + a) / (1 + _conj(a) * z)


def distance(a, b, mode=HYPERBOLIC):
    """Hyperbolic (or Euclidean) distance between two points."""
    if mode == EUCLIDEAN:
        return abs(a - b)
    check_point(a, mode)
    check_point(b, mode)
    L = _lib(a, b)
    num = abs(a - b)
    if num == 0:
        return 0 * L.one
    ratio = num / abs(1 - _conj(a) * b)
    if ratio >= 1:
        raise GeometryError("points too close to the ideal boundary")
    return 2 * L.atanh(ratio)


def direction_at(a, b, mode=HYPERBOLIC):
    """Angle of the initial tangent of the geodesic segment from a to b."""
    L = _lib(a, b)
    w = b - a if mode == EUCLIDEAN else _to_origin(a, b)
    return L.atan2(w.imag, w.real)


def disk_radius(r, mode=HYPERBOLIC):
    """Euclidean radius in the model of a circle with metric radius r."""
    if mode == EUCLIDEAN:
        return r
    return _lib(r).tanh(r / 2)


# -- geodesics ---------------------------------------------------------------

@dataclass(frozen=True)
class Geodesic:
    mode: str
    start: complex
    end: complex

    @property
    def is_diameter(self):
        tol = MP_TOL if isinstance(self.start, mpmath.mpc) else TOL
        return self.mode == HYPERBOLIC and abs(self.start + self.end) < tol

    @property
    def center(self):
        """Centre of the orthogonal circle (hyperbolic arcs only)."""
        if self.mode != HYPERBOLIC or self.is_diameter:
            return None
        return 2 * self.start * self.end / (self.start + self.end)

    @property
    def radius(self):
        c = self.center
        return None if c is None else abs(c - self.start)

    @property
    def direction(self):
        if self.mode == EUCLIDEAN:
            return self.end - self.start
        return None

    def closest_to_origin(self):
        if self.mode == EUCLIDEAN:
            u = self.end - self.start
            s = -(_conj(u) * self.start).real
            return self.start + s * u
        if self.is_diameter:
            return 0 * self.start
        c = self.center
        # |c|^2 = r^2 + 1, so |c| - r = 1 / (|c| + r) without cancellation
        return c / abs(c) / (abs(c) + self.radius)

    def reversed(self):
        if self.mode == EUCLIDEAN:
            return Geodesic(self.mode, self.start, 2 * self.start - self.end)
        return Geodesic(self.mode, self.end, self.start)

    def residual(self, z):
        """Distance-like defect of z from the geodesic (0 on it)."""
        if self.mode == EUCLIDEAN:
            u = self.end - self.start
            return abs((_conj(u) * (z - self.start)).imag)
        if self.is_diameter:
            return abs((_conj(self.start) * z).imag)
        c, r = self.center, self.radius
        # (|z - c|^2 - r^2) / (|z - c| + r), using |c|^2 - r^2 = 1
        return abs(abs(z) ** 2 + 1 - 2 * (z * _conj(c)).real) / (abs(z - c) + r)

    def contains(self, z, tol=TOL):
        return self.residual(z) < tol

    def orthogonality_residual(self):
        """Defect of the ideal endpoints from the unit circle (the carrier circle is then orthogonal)."""
        if self.mode != HYPERBOLIC:
            return 0.0
        return max(abs(abs(self.start) - 1), abs(abs(self.end) - 1))


def geodesic_through(a, b, mode=HYPERBOLIC):
    """The doubly infinite geodesic through a and b, oriented from a to b."""
    _check_mode(mode)
    if abs(a - b) < 1e-15 * (1 + abs(a)):
        raise GeometryError("coincident points do not determine a geodesic")
    if mode == EUCLIDEAN:
        u = (b - a) / abs(b - a)
        return Geodesic(mode, a, a + u)
    check_point(a, mode)
    check_point(b, mode)
    w = _to_origin(a, b)
    u = w / abs(w)
    return Geodesic(mode, _from_origin(a, -u), _from_origin(a, u))


# -- isometries --------------------------------------------------------------

@dataclass(frozen=True)
class Isometry:
    """z -> (a w + b) / (c w + d) with w = z, or w = conj(z) if reversing."""

    a: complex
    b: complex
    c: complex
    d: complex
    reverse: bool = False

    def __call__(self, z):
        w = _conj(z) if self.reverse else z
        return (self.a * w + self.b) / (self.c * w + self.d)

    def _matrix(self):
        return (self.a, self.b, self.c, self.d)

    def __matmul__(self, other):
        oa, ob, oc, od = other._matrix()
        if self.reverse:
            oa, ob, oc, od = _conj(oa), _conj(ob), _conj(oc), _conj(od)
        a, b, c, d = self._matrix()
        return Isometry(a * oa + b * oc, a * ob + b * od,
                        c * oa + d * oc, c * ob + d * od,
                        self.reverse != other.reverse)

    def inverse(self):
        a, b, c, d = self._matrix()
        det = a * d - b * c
        ia, ib, ic, id_ = d / det, -b / det, -c / det, a / det
        if self.reverse:
            return Isometry(_conj(ia), _conj(ib), _conj(ic), _conj(id_), True)
        return Isometry(ia, ib, ic, id_, False)

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1)

    @classmethod
    def rotation(cls, theta):
        return cls(_lib(theta).exp(1j * theta), 0, 0, 1)

    @classmethod
    def translation(cls, target, mode=HYPERBOLIC):
        """Isometry sending 0 to ``target``."""
        if mode == EUCLIDEAN:
            return cls(1, target, 0, 1)
        return cls(1, target, _conj(target), 1)

    @classmethod
    def reflection(cls, g):
        if g.mode == EUCLIDEAN:
            u = g.end - g.start
            # z -> p + u^2 conj(z - p)
            p = g.start
            return cls(u * u, p - u * u * _conj(p), 0, 1, True)
        if g.is_diameter:
            u = g.end
            return cls(u * u, 0, 0, 1, True)
        c = g.center
        return cls(c, -1, 1, -_conj(c), True)

    @classmethod
    def reflection_through(cls, a, b, mode=HYPERBOLIC):
        """Reflection in the geodesic through a and b, conditioned well near diameters."""
        if mode == EUCLIDEAN:
            return cls.reflection(geodesic_through(a, b, mode))
        w = _to_origin(a, b)
        u = w / abs(w)
        to0 = cls(1, -a, -_conj(a), 1)
        back = cls(1, a, _conj(a), 1)
        return back @ cls(u * u, 0, 0, 1, True) @ to0

    @classmethod
    def random(cls, rng, mode=HYPERBOLIC, spread=0.6):
        theta = rng.uniform(0, 2 * math.pi)
        if mode == EUCLIDEAN:
            t = complex(*rng.normal(0, 3, 2))
        else:
            r = spread * math.sqrt(rng.uniform())
            t = r * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        iso = cls.translation(t, mode) @ cls.rotation(theta)
        if rng.uniform() < 0.5:
            iso = iso @ cls(1, 0, 0, 1, True)
        return iso


def frame_map(g, origin):
    """Isometry sending ``origin`` (on g) to 0 and g onto the real axis, g.end -> +inf side."""
    if g.mode == EUCLIDEAN:
        u = g.end - g.start
        return Isometry(_conj(u), -_conj(u) * origin, 0, 1)
    to0 = Isometry(1, -origin, -_conj(origin), 1)
    e = to0(g.end)
    e = e / abs(e)
    return Isometry(_conj(e), 0, 0, 1) @ to0


def _foot_on_axis(w, mode):
    """Real coordinate of the orthogonal projection of frame point w onto the real axis."""
    if mode == EUCLIDEAN:
        return w.real
    X = w.real
    s = 1 + abs(w) ** 2
    L = _lib(w)
    return 2 * X / (s + L.sqrt(s * s - 4 * X * X))


def _axis_value(t, mode):
    if mode == EUCLIDEAN:
        return t
    return 2 * _lib(t).atanh(t)


def project(x, g):
    """Orthogonal projection of x onto the geodesic g."""
    origin = g.closest_to_origin()
    F = frame_map(g, origin)
    t = _foot_on_axis(F(x), g.mode)
    return F.inverse()(t + 0j * t)


@dataclass(frozen=True)
class GeodesicParam:
    """Arc-length parametrization p of a geodesic, extended to the plane by p(x) = p(proj(x))."""

    geodesic: Geodesic
    origin: complex
    orientation: int = 1

    def __post_init__(self):
        if self.orientation not in (1, -1):
            raise GeometryError("orientation must be +1 or -1")

    def frame(self):
        F = frame_map(self.geodesic, self.origin)
        if self.orientation == -1:
            F = Isometry(-1, 0, 0, 1) @ F
        return F

    def value(self, x, frame=None):
        F = frame or self.frame()
        mode = self.geodesic.mode
        return _axis_value(_foot_on_axis(F(x), mode), mode)

    def side(self, x, frame=None):
        """Positive on the left of the oriented geodesic."""
        F = frame or self.frame()
        return F(x).imag

    def crossing_value(self, x, y, frame=None):
        """p-value of the point where segment [x, y] meets the geodesic.

        Caller guarantees x and y lie on opposite sides.
        """
        F = frame or self.frame()
        X, Y = F(x), F(y)
        mode = self.geodesic.mode
        if mode == EUCLIDEAN:
            return X.real + (Y.real - X.real) * X.imag / (X.imag - Y.imag)
        # circle through X, Y orthogonal to the unit circle: 2 Re(conj(c) P) = 1 + |P|^2
        a1, b1, r1 = X.real, X.imag, (1 + abs(X) ** 2) / 2
        a2, b2, r2 = Y.real, Y.imag, (1 + abs(Y) ** 2) / 2
        det = a1 * b2 - a2 * b1
        L = _lib(X, Y)
        if abs(det) < 1e-30:
            return 0 * L.one
        cx = (r1 * b2 - r2 * b1) / det
        if abs(cx) <= 1:
            # degenerate: the connecting geodesic is nearly a diameter through 0
            return 0 * L.one
        root = L.sqrt(cx * cx - 1)
        t = 1 / (cx + root) if cx > 0 else 1 / (cx - root)
        return _axis_value(t, mode)

    def point_at(self, s):
        """Point of the geodesic with parameter value s."""
        mode = self.geodesic.mode
        t = s if mode == EUCLIDEAN else _lib(s).tanh(s / 2)
        return self.frame().inverse()(t + 0j * t)


def param_value(p, x):
    return p.value(x)
