"""Exact PSL2(Z) arithmetic and hyperbolic-plane primitives.

Group elements are integer matrices of determinant 1 modulo sign, kept in a
canonical sign-normalized representative so they can be hashed and compared.
All other modules build on the operations here: Moebius action, geodesic
length, axes of hyperbolic elements, strip intersections and reduction to the
standard fundamental domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import isqrt

ENTRY_LIMIT = 1 << 127  # entries must fit in a signed 128-bit integer

IDENTITY_TUPLE = (1, 0, 0, 1)


class Psl2Error(Exception):
    """Base error for this module."""


class EntryOverflow(Psl2Error):
    """A matrix entry left the signed 128-bit range."""


class NotHyperbolic(Psl2Error):
    """Operation requires |trace| > 2."""


class ReductionFailure(Psl2Error):
    """Fundamental-domain reduction exceeded its iteration cap."""


def _check_entries(a, b, c, d):
    if (abs(a) >= ENTRY_LIMIT or abs(b) >= ENTRY_LIMIT
            or abs(c) >= ENTRY_LIMIT or abs(d) >= ENTRY_LIMIT):
        raise EntryOverflow(f"entry out of 128-bit range: {(a, b, c, d)}")


@dataclass(frozen=True)
class GroupElement:
    """Element of PSL2(Z): integer matrix [[a,b],[c,d]], det 1, modulo sign.

    The stored representative is sign-normalized: c > 0, or c == 0 and d > 0.
    """

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant != 1: {(self.a, self.b, self.c, self.d)}")
        _check_entries(self.a, self.b, self.c, self.d)
        if self.c < 0 or (self.c == 0 and self.d < 0):
            object.__setattr__(self, "a", -self.a)
            object.__setattr__(self, "b", -self.b)
            object.__setattr__(self, "c", -self.c)
            object.__setattr__(self, "d", -self.d)

    @property
    def trace(self) -> int:
        return self.a + self.d

    @property
    def is_hyperbolic(self) -> bool:
        return abs(self.trace) > 2

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "GroupElement":
        return GroupElement(self.d, -self.b, -self.c, self.a)

    def conjugate_by(self, sigma: "GroupElement") -> "GroupElement":
        return sigma * self * sigma.inverse()

    def __pow__(self, n: int) -> "GroupElement":
        if n < 0:
            return self.inverse() ** (-n)
        result = IDENTITY
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)


IDENTITY = GroupElement(1, 0, 0, 1)
S = GroupElement(0, -1, 1, 0)
T = GroupElement(1, 1, 0, 1)


def normalize(matrix) -> GroupElement:
    """Build a GroupElement from a raw 2x2 integer matrix [[a,b],[c,d]]."""
    (a, b), (c, d) = matrix
    a, b, c, d = int(a), int(b), int(c), int(d)
    return GroupElement(a, b, c, d)


def translation(n: int) -> GroupElement:
    return GroupElement(1, n, 0, 1)


@dataclass(frozen=True)
class UpperHalfPlanePoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"not in upper half-plane: y = {self.y}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @staticmethod
    def from_complex(z: complex) -> "UpperHalfPlanePoint":
        return UpperHalfPlanePoint(z.real, z.imag)


@dataclass(frozen=True)
class QuadraticReal:
    """Exact real number (p + sign*sqrt(D)) / q with integer p, q, D >= 0."""

    p: int
    q: int
    D: int
    sign: int = 1

    def value(self) -> float:
        return (self.p + self.sign * math.sqrt(self.D)) / self.q

    def __lt__(self, other: "QuadraticReal") -> bool:
        # exact comparison: (p1 + s1*sqrt(D1))/q1 < (p2 + s2*sqrt(D2))/q2
        # cross-multiply by positive denominators, then compare
        # A + s1*q2*sqrt(D1) < B + s2*q1*sqrt(D2)  via repeated squaring
        if self.q <= 0 or other.q <= 0:
            raise ValueError("denominators must be positive")
        lhs_rat = self.p * other.q - other.p * self.q
        u = self.sign * other.q  # coefficient of sqrt(D1)
        v = other.sign * self.q  # coefficient of sqrt(D2)
        # want: lhs_rat + u*sqrt(D1) - v*sqrt(D2) < 0
        return _sign_of_combination(lhs_rat, u, self.D, -v, other.D) < 0


def _sign_of_combination(r: int, u: int, Du: int, v: int, Dv: int) -> int:
    """Exact sign of r + u*sqrt(Du) + v*sqrt(Dv) (integers, Du, Dv >= 0)."""
    # move one radical to the other side and square, with case analysis
    # sign(r + u*sqrt(Du) + v*sqrt(Dv))
    # numeric fast path with a generous margin, exact squaring as fallback
    approx = r + u * math.sqrt(Du) + v * math.sqrt(Dv)
    scale = abs(r) + abs(u) * (math.sqrt(Du) + 1) + abs(v) * (math.sqrt(Dv) + 1) + 1
    if abs(approx) > 1e-9 * scale:
        return 1 if approx > 0 else -1
    # exact fallback: s = r + u*sqrt(Du) vs -v*sqrt(Dv)
    # compare (r + u*sqrt(Du))^2 with v^2*Dv taking signs into account
    left_sign = _sign_of_pair(r, u, Du)
    right_sign = -_sign_of_pair(0, v, Dv)
    if left_sign != right_sign:
        if left_sign > right_sign:
            return 1
        return -1
    # both sides same sign; square both
    left_sq = r * r + u * u * Du  # (r + u sqrt(Du))^2 = this + 2ru sqrt(Du)
    right_sq = v * v * Dv
    diff = left_sq - right_sq
    cross = 2 * r * u
    s = _sign_of_pair(diff, cross, Du)
    return s * left_sign if left_sign != 0 else (0 if s == 0 else s)


def _sign_of_pair(r: int, u: int, D: int) -> int:
    """Exact sign of r + u*sqrt(D)."""
    if u == 0:
        return (r > 0) - (r < 0)
    if r == 0:
        return (u > 0) - (u < 0) if D > 0 else (r > 0) - (r < 0)
    if r > 0 and u > 0:
        return 1
    if r < 0 and u < 0:
        return -1
    # opposite signs: compare r^2 with u^2 D
    diff = r * r - u * u * D
    if diff == 0:
        return 0
    if r > 0:  # u < 0
        return 1 if diff > 0 else -1
    return -1 if diff > 0 else 1


@dataclass(frozen=True)
class GeodesicAxis:
    """Semicircular geodesic with real endpoints (p +/- sqrt(D)) / q.

    endpoint_minus < endpoint_plus always; orientation is not encoded here.
    """

    p: int
    q: int
    D: int

    def __post_init__(self):
        if self.q == 0 or self.D <= 0:
            raise ValueError("invalid axis data")
        if self.q < 0:
            object.__setattr__(self, "p", -self.p)
            object.__setattr__(self, "q", -self.q)

    @property
    def endpoint_minus(self) -> QuadraticReal:
        return QuadraticReal(self.p, self.q, self.D, -1)

    @property
    def endpoint_plus(self) -> QuadraticReal:
        return QuadraticReal(self.p, self.q, self.D, 1)

    @property
    def center(self) -> float:
        return self.p / self.q

    @property
    def radius(self) -> float:
        return math.sqrt(self.D) / self.q

    def transformed(self, g: GroupElement) -> "GeodesicAxis":
        """Image axis under the Moebius action of g (endpoints pushed forward)."""
        # endpoint (p + s sqrt(D))/q maps to (a*e + b)/(c*e + d); rationalize.
        a, b, c, d = g.a, g.b, g.c, g.d
        # e = (p + s sqrt D)/q  ->  (a(p + s sqrt D) + b q) / (c(p + s sqrt D) + d q)
        # multiply num and den by conjugate of denominator:
        # den * conj(den) = (cp + dq)^2 - c^2 D
        P = a * self.p + b * self.q
        Q = c * self.p + d * self.q
        nrm = Q * Q - c * c * self.D
        # image = (P + s a_s sqrt D)(Q - s c sqrt D)/nrm, s = +-1
        # = (PQ - s^2 a c D + s(aQ - cP) sqrt D)/nrm with coefficient of sqrtD a*q_..
        # endpoints as a pair share p' = (P*Q - a*c*D)/?  -- compute directly:
        num_rat = P * Q - a * c * self.D
        num_irr = a * Q - c * P  # equals det(g) * q = q
        g_ = math.gcd(math.gcd(abs(num_rat), abs(num_irr)), abs(nrm))
        if g_ > 1:
            num_rat //= g_
            num_irr //= g_
            nrm //= g_
        # endpoints: (num_rat + s*num_irr*sqrt(D))/nrm; fold |num_irr| into D
        D_new = num_irr * num_irr * self.D
        return GeodesicAxis(num_rat, nrm, D_new)


def geodesic_length(g: GroupElement) -> float:
    """Length 2*log((|tr| + sqrt(tr^2-4))/2) of the closed geodesic of g."""
    t = abs(g.trace)
    if t <= 2:
        raise NotHyperbolic(f"trace {g.trace} is not hyperbolic")
    return 2.0 * math.log((t + math.sqrt(t * t - 4.0)) / 2.0)


def geodesic_length_of_trace(t: int) -> float:
    t = abs(t)
    if t <= 2:
        raise NotHyperbolic(f"trace {t} is not hyperbolic")
    return 2.0 * math.log((t + math.sqrt(t * t - 4.0)) / 2.0)


def axis(g: GroupElement) -> GeodesicAxis:
    """Axis of a hyperbolic element: endpoints (a-d +/- sqrt(tr^2-4))/(2c)."""
    if not g.is_hyperbolic:
        raise NotHyperbolic(f"trace {g.trace} is not hyperbolic")
    if g.c == 0:
        raise Psl2Error("vertical axis (c = 0); no semicircle representation")
    t = g.trace
    return GeodesicAxis(g.a - g.d, 2 * g.c, t * t - 4)


def attracting_is_plus(g: GroupElement) -> bool:
    """Whether the flow of g moves toward the axis' larger endpoint.

    For the sign-normalized representative (c > 0) the attracting fixed point
    carries + sqrt when the trace is positive.
    """
    if not g.is_hyperbolic:
        raise NotHyperbolic(f"trace {g.trace} is not hyperbolic")
    return g.trace > 0


def mobius(g: GroupElement, z) -> complex:
    """Moebius action; z may be an UpperHalfPlanePoint or a complex number."""
    if isinstance(z, UpperHalfPlanePoint):
        z = z.z
    den = g.c * z + g.d
    return (g.a * z + g.b) / den


def strip_intersection_length(radius: float, T: float) -> float:
    """Hyperbolic length of a centered semicircle inside the band T <= Im z <= 2T."""
    if radius <= 0 or T <= 0:
        raise ValueError("radius and T must be positive")

    def above(r, h):
        if r <= h:
            return 0.0
        return 2.0 * math.log((r + math.sqrt(r * r - h * h)) / h)

    return above(radius, T) - above(radius, 2.0 * T)


MAX_STRIP_LENGTH = 2.0 * math.log(2.0 + math.sqrt(3.0))  # attained at r = 2T

REDUCTION_CAP = 10_000


def reduce_to_fundamental_domain(z) -> tuple[UpperHalfPlanePoint, GroupElement]:
    """Return (z', sigma) with sigma * z = z', |Re z'| <= 1/2 and |z'| >= 1."""
    if isinstance(z, UpperHalfPlanePoint):
        w = z.z
    else:
        w = complex(z)
        if not w.imag > 0:
            raise ValueError("not in upper half-plane")
    sigma = IDENTITY
    for _ in range(REDUCTION_CAP):
        n = math.floor(w.real + 0.5)
        if n != 0:
            w = w - n
            sigma = translation(-n) * sigma
        norm = w.real * w.real + w.imag * w.imag
        if norm < 1.0 - 1e-15:
            w = -1.0 / w
            sigma = S * sigma
        else:
            if abs(w.real) <= 0.5 + 1e-15:
                return UpperHalfPlanePoint(w.real, w.imag), sigma
    raise ReductionFailure(f"reduction did not terminate for input {z!r}")


def geodesic_parametrization(ax: GeodesicAxis, t: float):
    """Point z(t) on the axis and the frame matrix g0 * a_t.

    g0 maps (0, infinity) to (endpoint_minus, endpoint_plus); t = 0 sits at the
    apex of the semicircle, and t is hyperbolic arc length.
    """
    alpha = ax.endpoint_minus.value()
    beta = ax.endpoint_plus.value()
    s = math.sqrt(beta - alpha)
    # g0 = [[beta, alpha],[1,1]] / s, det 1
    g00, g01, g10, g11 = beta / s, alpha / s, 1.0 / s, 1.0 / s
    e = math.exp(0.5 * t)
    frame = ((g00 * e, g01 / e), (g10 * e, g11 / e))
    w = complex(0.0, e * e)
    num = g00 * w + g01
    den = g10 * w + g11
    z = num / den
    return UpperHalfPlanePoint(z.real, z.imag), frame


def hyperbolic_distance(z1, z2) -> float:
    if isinstance(z1, UpperHalfPlanePoint):
        z1 = z1.z
    if isinstance(z2, UpperHalfPlanePoint):
        z2 = z2.z
    num = abs(z1 - z2) ** 2
    arg = 1.0 + num / (2.0 * z1.imag * z2.imag)
    return math.acosh(arg)
