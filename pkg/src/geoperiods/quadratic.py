"""Real-quadratic class structure and its geodesic and period identities.

Fundamental discriminants ordered by the size of their automorph unit,
narrow class groups under Gauss composition with full character tables,
the map from a form class to its closed geodesic of length 2 log eps_D,
and the scale-free Plancherel identity over character-weighted period sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import bqf
from .enumeration import GeodesicClass, canonical_class
from .psl2 import GroupElement

CHARACTER_TOL = 1e-12


class QuadraticError(Exception):
    pass


def _squarefree(n: int) -> bool:
    if n % 4 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 2
    return True


def is_fundamental_discriminant(D: int) -> bool:
    """D > 0 with D = 1 (mod 4) squarefree, or D = 4m, m = 2, 3 (mod 4)
    squarefree."""
    if D <= 0 or math.isqrt(D) ** 2 == D:
        return False
    if D % 4 == 1:
        return _squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


@dataclass(frozen=True)
class Discriminant:
    D: int
    is_fundamental: bool
    epsilon: tuple[int, int]  # fundamental (t, u) with t^2 - D u^2 = 4
    h_plus: int

    @property
    def unit_value(self) -> float:
        t, u = self.epsilon
        return (t + u * math.sqrt(self.D)) / 2.0

    @property
    def geodesic_length(self) -> float:
        return 2.0 * math.log(self.unit_value)


def _unit_sweep(X) -> dict[int, tuple[int, int]]:
    """Fundamental D with eps_D <= X mapped to the minimal (t, u).

    eps + 1/eps = t makes the unit bound a pure trace bound t <= X + 1/X,
    so only traces up to that enter; each (t, u) with u^2 | t^2 - 4 yields
    one discriminant, and an ascending sweep meets the fundamental solution
    first.
    """
    Xq = Fraction(X)
    t_max_q = Xq + 1 / Xq
    t_max = int(t_max_q)
    found: dict[int, tuple[int, int]] = {}
    for t in range(3, t_max + 1):
        if Fraction(t) > t_max_q:
            break
        n = t * t - 4
        u = 1
        while u * u <= n:
            if n % (u * u) == 0:
                D = n // (u * u)
                if D % 4 in (0, 1) and D not in found \
                        and is_fundamental_discriminant(D):
                    found[D] = (t, u)
            u += 1
    return found


def fundamental_discriminants_by_unit(X) -> list[Discriminant]:
    """All fundamental D with eps_D <= X, sorted by D, units exact."""
    if Fraction(X) < Fraction(1, 1):
        raise QuadraticError("unit bound below every unit")
    found = _unit_sweep(X)
    out = []
    for D in sorted(found):
        t, u = found[D]
        out.append(Discriminant(D=D, is_fundamental=True, epsilon=(t, u),
                                h_plus=bqf.class_number(D)))
    return out


# ---------------------------------------------------------------------------
# narrow class group and characters


@dataclass(frozen=True)
class FormClass:
    form: tuple[int, int, int]
    index: int


@dataclass
class NarrowClassGroup:
    D: int
    classes: list[FormClass]
    table: np.ndarray  # composition: table[i, j] = index of class_i * class_j
    identity: int
    orders: list[int]

    @property
    def h_plus(self) -> int:
        return len(self.classes)

    def inverse(self, i: int) -> int:
        row = self.table[i]
        return int(np.nonzero(row == self.identity)[0][0])


@dataclass
class CharacterTable:
    values: np.ndarray  # (h, h): row = character, column = class index

    @property
    def h(self) -> int:
        return self.values.shape[0]

    def orthonormality_defect(self) -> float:
        G = self.values @ self.values.conj().T / self.h
        return float(np.max(np.abs(G - np.eye(self.h))))


def _character_table(table: np.ndarray, identity: int,
                     orders: list[int]) -> np.ndarray:
    """Characters as joint eigenvectors of the regular representation."""
    h = table.shape[0]
    exponent = 1
    for o in orders:
        exponent = exponent * o // math.gcd(exponent, o)
    rng = np.random.default_rng(7)
    perms = [np.eye(h)[table[i]] for i in range(h)]
    for _ in range(20):
        coeffs = rng.standard_normal(h)
        M = sum(c * p for c, p in zip(coeffs, perms))
        _, vecs = np.linalg.eig(M)
        chars = vecs.T / vecs.T[:, [identity]]
        # snap to exponent-th roots of unity, then verify
        angles = np.angle(chars) * exponent / (2 * np.pi)
        snapped = np.exp(2j * np.pi * np.round(angles) / exponent)
        ok = True
        for chi in snapped:
            for i in range(h):
                for j in range(h):
                    if abs(chi[table[i, j]] - chi[i] * chi[j]) > 1e-9:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if not ok:
            continue
        G = snapped @ snapped.conj().T / h
        if np.max(np.abs(G - np.eye(h))) < CHARACTER_TOL:
            return snapped
    raise QuadraticError("character table construction failed")


def narrow_class_group(D: int) -> tuple[list[FormClass], NarrowClassGroup,
                                        CharacterTable]:
    """Class list, composition structure, and all characters for disc D."""
    reps = bqf.class_representatives(D)
    h = len(reps)
    key_to_index = {bqf.cycle_min(r): i for i, r in enumerate(reps)}
    table = np.zeros((h, h), dtype=np.int64)
    for i, fi in enumerate(reps):
        for j, fj in enumerate(reps):
            prod = bqf.compose(fi, fj)
            key = bqf.cycle_min(bqf.reduce_form(prod)[0])
            if key not in key_to_index:
                raise QuadraticError("composition left the class list")
            table[i, j] = key_to_index[key]
    principal = bqf.cycle_min(bqf.reduce_form(bqf.principal_form(D))[0])
    identity = key_to_index[principal]
    orders = []
    for i in range(h):
        k, cur = 1, i
        while cur != identity:
            cur = int(table[cur, i])
            k += 1
        orders.append(k)
    classes = [FormClass(form=r, index=i) for i, r in enumerate(reps)]
    group = NarrowClassGroup(D=D, classes=classes, table=table,
                             identity=identity, orders=orders)
    chars = CharacterTable(values=_character_table(table, identity, orders))
    return classes, group, chars


# ---------------------------------------------------------------------------
# class-to-geodesic map


def automorph_matrix(form: tuple[int, int, int], t: int, u: int) -> GroupElement:
    a, b, c = form
    if (t - b * u) % 2 or (t + b * u) % 2:
        raise QuadraticError("automorph parity violation")
    g = GroupElement((t - b * u) // 2, -c * u, a * u, (t + b * u) // 2)
    return g


def geodesic_of_class(A: FormClass | tuple[int, int, int], D: int) -> GeodesicClass:
    """Closed geodesic of a form class: the class of its automorph matrix."""
    form = A.form if isinstance(A, FormClass) else tuple(A)
    if bqf.discriminant(form) != D:
        raise QuadraticError(f"form {form} does not have discriminant {D}")
    if not bqf.is_primitive(form):
        raise QuadraticError(f"form {form} is not primitive")
    t, u = bqf.pell4(D)
    return canonical_class(automorph_matrix(form, t, u))


def exact_length_pair(D: int) -> tuple[int, int]:
    """(t, u) so that every class geodesic has length 2 log((t+u sqrt D)/2)."""
    return bqf.pell4(D)


# ---------------------------------------------------------------------------
# Plancherel / Waldspurger


def plancherel_identity(char_values: np.ndarray, periods: np.ndarray):
    """((1/h) sum_chi |sum_A chi(A) P_A|^2, sum_A |P_A|^2, per-chi moments)."""
    P = np.asarray(periods, dtype=complex)
    h = len(P)
    sums = char_values @ P
    moments = np.abs(sums) ** 2
    lhs = float(moments.sum() / h)
    rhs = float(np.sum(np.abs(P) ** 2))
    return lhs, rhs, moments


@dataclass(frozen=True)
class WaldspurgerReport:
    D: int
    h_plus: int
    lhs: float
    rhs: float
    difference: float
    character_moments: np.ndarray
    periods: np.ndarray
    some_character_sum_nonzero: bool
    some_period_nonzero: bool


def waldspurger_moment(f, D: int, tol: float = 1e-9,
                       zero_threshold: float = 1e-7) -> WaldspurgerReport:
    """Scale-free Plancherel identity over the class geodesic periods of f."""
    from .periods import geodesic_period

    classes, group, chars = narrow_class_group(D)
    periods = np.array([complex(geodesic_period(f, geodesic_of_class(A, D), tol))
                        for A in classes])
    lhs, rhs, moments = plancherel_identity(chars.values, periods)
    return WaldspurgerReport(
        D=D, h_plus=group.h_plus, lhs=lhs, rhs=rhs,
        difference=abs(lhs - rhs), character_moments=moments, periods=periods,
        some_character_sum_nonzero=bool(np.any(np.sqrt(moments) > zero_threshold)),
        some_period_nonzero=bool(np.any(np.abs(periods) > zero_threshold)))


# ---------------------------------------------------------------------------
# class number moments


@dataclass(frozen=True)
class MomentReport:
    X: float
    k: int
    value: int
    count: int
    main_term: float
    ratio: float


def _li(x: float) -> float:
    from scipy.special import expi

    return float(expi(math.log(x))) if x > 1 else 0.0


def class_number_moments(X, k: int) -> MomentReport:
    """Exact sum of h(D)^k over fundamental D with eps_D <= X."""
    if k not in (0, 1, 2):
        raise QuadraticError("moment order must be 0, 1 or 2")
    if Fraction(X) > 10_000:
        raise QuadraticError("unit bound above desk scale")
    found = _unit_sweep(X)
    total = 0
    for D in found:
        total += bqf.class_number(D) ** k if k else 1
    if k == 0:
        main = _li(float(X) ** 2)  # shape only; constants are unknown
    elif k == 1:
        main = _li(float(X) ** 2)
    else:
        from scipy.integrate import quad

        main, _ = quad(lambda t: (t / math.log(t)) ** 2, 2.0, max(float(X), 2.001))
    ratio = total / main if main > 0 else float("inf")
    return MomentReport(X=float(X), k=k, value=total, count=len(found),
                        main_term=main, ratio=ratio)
