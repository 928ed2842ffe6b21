"""Vertex and edge enumeration for the modular period graph.

Vertices on one side are double cosets of the translation subgroup, keyed by
(c, a mod c); on the other side hyperbolic conjugacy classes, keyed through
the reduction cycle of the fixed-point binary quadratic form.  Edges join a
coset to every conjugacy class it meets, indexed by the integer k shifting
the trace residue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import gcd, isqrt

import numpy as np

from . import bqf
from .psl2 import GeodesicAxis, GroupElement, NotHyperbolic, geodesic_length_of_trace


class EnumerationError(Exception):
    pass


# ---------------------------------------------------------------------------
# double cosets


@dataclass(frozen=True)
class DoubleCoset:
    c: int
    a_mod_c: int
    theta_mod_c: int

    def __post_init__(self):
        if self.c <= 0:
            raise EnumerationError("c must be positive")
        if gcd(self.a_mod_c, self.c) != 1:
            raise EnumerationError("a must be coprime to c")
        inv = pow(self.a_mod_c, -1, self.c)
        if (self.a_mod_c + inv) % self.c != self.theta_mod_c:
            raise EnumerationError("theta inconsistent with a")

    @property
    def key(self):
        return (self.c, self.a_mod_c)


def coset_key(g: GroupElement) -> DoubleCoset:
    """Invariant of the translation double coset containing g."""
    if g.c == 0:
        raise EnumerationError("translation-subgroup element has no coset key")
    c = g.c  # positive by sign normalization
    a = g.a % c
    inv = pow(a, -1, c) if c > 1 else 0
    return DoubleCoset(c, a, (a + inv) % c)


def make_coset(c: int, a: int) -> DoubleCoset:
    a %= c
    inv = pow(a, -1, c) if c > 1 else 0
    return DoubleCoset(c, a, (a + inv) % c)


def enumerate_cosets(N: int) -> list[DoubleCoset]:
    out = []
    for c in range(1, N + 1):
        for a in range(c):
            if gcd(a, c) == 1:
                out.append(make_coset(c, a))
    return out


# ---------------------------------------------------------------------------
# conjugacy classes

ClassKey = tuple[int, int, bqf.Form]  # (trace, form content, cycle-min form)


@dataclass(frozen=True)
class GeodesicClass:
    canonical_rep: GroupElement
    trace: int
    content: int
    form: bqf.Form  # primitive cycle-min form
    discriminant: int
    length: float
    is_primitive: bool
    axis: GeodesicAxis

    @property
    def key(self) -> ClassKey:
        return (self.trace, self.content, self.form)


def _trace_positive_entries(g: GroupElement):
    a, b, c, d = g.a, g.b, g.c, g.d
    if a + d < 0:
        a, b, c, d = -a, -b, -c, -d
    return a, b, c, d


def fixed_point_form(g: GroupElement):
    """(trace, content, primitive form) of the fixed-point form (c, d-a, -b)."""
    if not g.is_hyperbolic:
        raise NotHyperbolic(f"trace {g.trace} is not hyperbolic")
    a, b, c, d = _trace_positive_entries(g)
    t = a + d
    Q = (c, d - a, -b)
    m = bqf.content(Q)
    return t, m, (Q[0] // m, Q[1] // m, Q[2] // m)


_cycle_min_cache: dict[bqf.Form, bqf.Form] = {}


def _cycle_min_cached(f: bqf.Form) -> bqf.Form:
    """Cycle minimum with memoization across every form on the cycle."""
    g, _ = bqf.reduce_form(f)
    hit = _cycle_min_cache.get(g)
    if hit is not None:
        return hit
    cyc = bqf.cycle(g)
    key = min(cyc)
    for member in cyc:
        _cycle_min_cache[member] = key
    return key


def class_key(g: GroupElement) -> ClassKey:
    t, m, f0 = fixed_point_form(g)
    return (t, m, _cycle_min_cached(f0))


def rep_from_key(key: ClassKey) -> GroupElement:
    t, m, f0 = key
    A, B, C = m * f0[0], m * f0[1], m * f0[2]
    return GroupElement((t - B) // 2, -C, A, (t + B) // 2)


def class_from_key(key: ClassKey, power_tbl=None) -> GeodesicClass:
    t, m, f0 = key
    rep = rep_from_key(key)
    D = t * t - 4
    if power_tbl is None:
        power_tbl = power_table(t)
    prim = _key_is_primitive(key, power_tbl)
    ax = GeodesicAxis(rep.a - rep.d, 2 * rep.c, D) if rep.c != 0 else None
    return GeodesicClass(
        canonical_rep=rep,
        trace=t,
        content=m,
        form=f0,
        discriminant=D,
        length=geodesic_length_of_trace(t),
        is_primitive=prim,
        axis=ax,
    )


def canonical_class(g: GroupElement) -> GeodesicClass:
    return class_from_key(class_key(g))


# ---------------------------------------------------------------------------
# primitivity

def power_table(max_trace: int) -> dict[int, list[tuple[int, int, int, int]]]:
    """Map t -> [(k, s, p_k, p_km1)] whenever t is the trace of a k-th power.

    A matrix of trace s >= 3 raised to the k-th power has trace t_k(s) with
    t_1 = s, t_2 = s^2 - 2, t_{k+1} = s t_k - t_{k-1}; the power is
    p_k delta - p_{k-1} with p_1 = 1, p_2 = s.
    """
    table: dict[int, list[tuple[int, int, int, int]]] = {}
    s = 3
    while s * s - 2 <= max_trace:
        t_prev, t_cur = s, s * s - 2
        p_prev, p_cur = 1, s
        k = 2
        while t_cur <= max_trace:
            table.setdefault(t_cur, []).append((k, s, p_cur, p_prev))
            t_prev, t_cur = t_cur, s * t_cur - t_prev
            p_prev, p_cur = p_cur, s * p_cur - p_prev
            k += 1
        s += 1
    return table


def _key_is_primitive(key: ClassKey, power_tbl) -> bool:
    t, m, f0 = key
    B0 = f0[1]
    for k, s, p_k, p_km1 in power_tbl.get(t, ()):
        if m % p_k != 0:
            continue
        if ((m // p_k) * B0 - s) % 2 == 0:
            return False
    return True


def is_primitive(g: GroupElement) -> bool:
    key = class_key(g)
    return _key_is_primitive(key, power_table(key[0]))


# ---------------------------------------------------------------------------
# divisor sieve


def _spf_sieve(limit: int) -> np.ndarray:
    spf = np.zeros(limit + 1, dtype=np.int64)
    spf[1] = 1
    for p in range(2, limit + 1):
        if spf[p] == 0:
            spf[p: limit + 1: p][spf[p: limit + 1: p] == 0] = p
    return spf


def _divisors_from_spf(n: int, spf) -> list[int]:
    divs = [1]
    while n > 1:
        p = int(spf[n])
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        divs = [d * p ** j for d in divs for j in range(e + 1)]
    return divs


# ---------------------------------------------------------------------------
# class enumeration


def _square_divisors(n: int) -> list[int]:
    out = []
    m = 1
    while m * m <= n:
        if n % (m * m) == 0:
            out.append(m)
        m += 1
    return out


def _reduced_forms_of_disc(D: int, spf) -> list[bqf.Form]:
    """All reduced primitive forms of non-square discriminant D (sieve-fast)."""
    root = isqrt(D)
    froot = math.sqrt(D)
    out = []
    for b in range(2 - (D % 2), root + 1, 2):
        n = (D - b * b) // 4  # = -a*c > 0
        if n == 0:
            continue
        for a in _divisors_from_spf(n, spf):
            # reduced: sqrt(D) - b < 2a < sqrt(D) + b, exact check below
            ta = 2 * a
            if (ta + b) * (ta + b) <= D:
                continue
            if ta > b and (ta - b) * (ta - b) >= D:
                continue
            c = -(n // a)
            f = (a, b, c)
            if bqf.is_primitive(f):
                out.append(f)
                out.append((-a, b, -c))
    return out


def classes_with_trace(t: int, spf=None) -> list[ClassKey]:
    """All conjugacy-class keys of trace t, both orientations."""
    if t <= 2:
        raise NotHyperbolic(f"trace {t} is not hyperbolic")
    D = t * t - 4
    if spf is None:
        spf = _spf_sieve(D // 4 + 1)
    keys = []
    for m in _square_divisors(D):
        D0 = D // (m * m)
        if D0 % 4 not in (0, 1):
            continue
        seen = set()
        for f in _reduced_forms_of_disc(D0, spf):
            if f in seen:
                continue
            cyc = bqf.cycle(f)
            seen.update(cyc)
            key_form = min(cyc)
            for member in cyc:
                _cycle_min_cache[member] = key_form
            keys.append((t, m, key_form))
    return sorted(keys)


def enumerate_classes(N: int, primitive_only: bool = False,
                      min_trace: int = 3) -> list[GeodesicClass]:
    """One GeodesicClass per conjugacy class with min_trace <= trace <= N."""
    if N < 3:
        return []
    spf = _spf_sieve((N * N - 4) // 4 + 1)
    tbl = power_table(N)
    out = []
    for t in range(max(3, min_trace), N + 1):
        for key in classes_with_trace(t, spf):
            if primitive_only and not _key_is_primitive(key, tbl):
                continue
            out.append(class_from_key(key, tbl))
    return out


# ---------------------------------------------------------------------------
# edges


def edge_matrix(x: DoubleCoset, k: int) -> GroupElement:
    """The matrix [[a, *],[c, t-a]] realizing edge (x, k), trace theta + k c."""
    c, a = x.c, x.a_mod_c
    t = x.theta_mod_c + k * c
    b = (a * (t - a) - 1) // c
    if a * (t - a) - 1 != b * c:
        raise EnumerationError("edge matrix is not integral")
    return GroupElement(a, b, c, t - a)


def edge_k_range(theta: int, c: int, N: int, min_abs_trace: int = 3):
    """All k with min_abs_trace <= |theta + k c| <= N."""
    ks = []
    kmin = math.ceil((-N - theta) / c)
    kmax = math.floor((N - theta) / c)
    for k in range(kmin, kmax + 1):
        if abs(theta + k * c) >= min_abs_trace:
            ks.append(k)
    return ks


@dataclass
class EdgeList:
    N: int
    min_abs_trace: int
    cosets: list[DoubleCoset]
    class_keys: list[ClassKey]
    edges: np.ndarray  # (E, 3) int64: coset index, class index, k
    deg_x: np.ndarray
    deg_y: np.ndarray

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def distinct_neighbor_deg_x(self) -> np.ndarray:
        out = np.zeros(len(self.cosets), dtype=np.int64)
        pairs = {(int(x), int(y)) for x, y, _ in self.edges}
        for x, _ in pairs:
            out[x] += 1
        return out


def enumerate_edges(N: int, min_abs_trace: int = 3,
                    compute_classes: bool = True) -> EdgeList:
    """All edges (coset, class, k) with |c| <= N and min_abs_trace <= |tr| <= N."""
    if N < 3:
        raise EnumerationError("N must be at least 3")
    cosets = enumerate_cosets(N)
    class_index: dict[ClassKey, int] = {}
    class_keys: list[ClassKey] = []
    rows = []
    for xi, x in enumerate(cosets):
        for k in edge_k_range(x.theta_mod_c, x.c, N, min_abs_trace):
            if compute_classes:
                g = edge_matrix(x, k)
                key = class_key(g)
                yi = class_index.get(key)
                if yi is None:
                    yi = len(class_keys)
                    class_index[key] = yi
                    class_keys.append(key)
            else:
                yi = -1
            rows.append((xi, yi, k))
    edges = np.array(rows, dtype=np.int64).reshape(-1, 3)
    deg_x = np.zeros(len(cosets), dtype=np.int64)
    deg_y = np.zeros(len(class_keys), dtype=np.int64)
    for xi, yi, _ in rows:
        deg_x[xi] += 1
        if yi >= 0:
            deg_y[yi] += 1
    return EdgeList(N=N, min_abs_trace=min_abs_trace, cosets=cosets,
                    class_keys=class_keys, edges=edges,
                    deg_x=deg_x, deg_y=deg_y)


def degree_formula_check(x: DoubleCoset, N: int):
    """(multiplicity degree, error term vs (2N+1)/c); the error is bounded
    by 1 + floor(5/c)."""
    deg = len(edge_k_range(x.theta_mod_c, x.c, N))
    err = deg - (2 * N + 1) / x.c
    return deg, err
