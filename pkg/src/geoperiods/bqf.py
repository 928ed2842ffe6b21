"""Integer binary quadratic forms of positive non-square discriminant.

Forms are plain tuples (a, b, c) meaning a x^2 + b x y + c y^2.  Everything
here is exact integer arithmetic: reduction, the rho-step cycle, Gauss
composition, cycle automorphs and the t^2 - D u^2 = 4 Pell solver built on
them.  Proper equivalence (det +1 changes of variable) is the only notion of
equivalence used; a class is identified with its reduction cycle and keyed by
the cycle's lexicographically least form.
"""

from __future__ import annotations

from math import gcd, isqrt

Form = tuple[int, int, int]


class BqfError(Exception):
    pass


def discriminant(f: Form) -> int:
    a, b, c = f
    return b * b - 4 * a * c


def content(f: Form) -> int:
    a, b, c = f
    return gcd(gcd(abs(a), abs(b)), abs(c))


def is_primitive(f: Form) -> bool:
    return content(f) == 1


def _check_disc(D: int):
    if D <= 0:
        raise BqfError(f"discriminant must be positive, got {D}")
    r = isqrt(D)
    if r * r == D:
        raise BqfError(f"square discriminant {D} not supported")
    if D % 4 not in (0, 1):
        raise BqfError(f"{D} is not a discriminant")


def is_reduced(f: Form) -> bool:
    """Exact test: 0 < b < sqrt(D) and sqrt(D) - b < 2|a| < sqrt(D) + b."""
    a, b, c = f
    D = discriminant(f)
    if D <= 0 or b <= 0:
        return False
    if b * b >= D:
        return False
    ta = 2 * abs(a)
    if (ta + b) * (ta + b) <= D:
        return False
    if ta > b and (ta - b) * (ta - b) >= D:
        return False
    return True


def apply_matrix(f: Form, m) -> Form:
    """Form after substituting (x, y) -> (p x + q y, r x + s y) for m = [[p,q],[r,s]]."""
    a, b, c = f
    (p, q), (r, s) = m
    A = a * p * p + b * p * r + c * r * r
    B = 2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s
    C = a * q * q + b * q * s + c * s * s
    return (A, B, C)


def rho(f: Form):
    """One reduction step; returns (next form, step matrix of det 1)."""
    a, b, c = f
    if c == 0:
        raise BqfError("degenerate form (square discriminant)")
    D = discriminant(f)
    root = isqrt(D)
    m = 2 * abs(c)
    if abs(c) > root:
        # normalization regime: pick b' = -b (mod m) in (-|c|, |c|]
        bp = (-b) % m
        if bp > abs(c):
            bp -= m
    else:
        # reduced regime: unique b' = -b (mod m) with sqrt(D) - m < b' < sqrt(D)
        bp = root - ((root + b) % m)
    s = (b + bp) // m * (1 if c > 0 else -1)
    cp = (bp * bp - D) // (4 * c)
    step = ((0, -1), (1, s))
    return (c, bp, cp), step


def reduce_form(f: Form):
    """Reduce to a form on the class's cycle; returns (reduced, transform).

    transform has determinant 1 and apply_matrix(f, transform) == reduced.
    """
    D = discriminant(f)
    _check_disc(D)
    g = f
    trans = ((1, 0), (0, 1))
    for _ in range(10_000):
        if is_reduced(g):
            return g, trans
        g, step = rho(g)
        trans = _matmul(trans, step)
    raise BqfError(f"reduction did not terminate for {f}")


def _matmul(m1, m2):
    (a, b), (c, d) = m1
    (p, q), (r, s) = m2
    return ((a * p + b * r, a * q + b * s), (c * p + d * r, c * q + d * s))


def cycle(f: Form) -> list[Form]:
    """The full rho-cycle of a reduced form, starting at f."""
    if not is_reduced(f):
        raise BqfError(f"{f} is not reduced")
    out = [f]
    g, _ = rho(f)
    while g != f:
        out.append(g)
        g, _ = rho(g)
    return out


def cycle_min(f: Form) -> Form:
    """Canonical key of the proper equivalence class: least form on the cycle."""
    g, _ = reduce_form(f)
    return min(cycle(g))


def cycle_automorph(f: Form):
    """Matrix of one full trip around the cycle of a reduced form (det 1).

    It generates the proper automorphism group of the form up to sign.
    """
    if not is_reduced(f):
        raise BqfError(f"{f} is not reduced")
    g, step = rho(f)
    trans = step
    while g != f:
        g, step = rho(g)
        trans = _matmul(trans, step)
    return trans


def principal_form(D: int) -> Form:
    _check_disc(D)
    k = D % 2
    return (1, k, (k * k - D) // 4)


def _egcd(a: int, b: int):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def _coprime_leading(f: Form, n: int) -> Form:
    """Properly equivalent form whose leading coefficient is coprime to n."""
    a, b, c = f
    n = abs(n)
    if n == 0:
        raise BqfError("modulus must be nonzero")
    for bound in (2, 4, 8, 16, 64, 256):
        for p in range(-bound, bound + 1):
            for r in range(-bound, bound + 1):
                if gcd(p, r) != 1:
                    continue
                v = a * p * p + b * p * r + c * r * r
                if v == 0 or gcd(v, n) != 1:
                    continue
                g, x, y = _egcd(p, r)
                if g < 0:
                    x, y = -x, -y
                # p*x + r*y = 1, so [[p, -y], [r, x]] has determinant 1
                return apply_matrix(f, ((p, -y), (r, x)))
    raise BqfError(f"no coprime representation found for {f} mod {n}")


def compose(f1: Form, f2: Form) -> Form:
    """Gauss composition of primitive forms of equal discriminant (unreduced).

    Uses concordant (united) forms: bring the second form to a leading
    coefficient coprime to the first, CRT the middle coefficients, and read
    off the composite (a1*a2, B, (B^2-D)/(4*a1*a2)).
    """
    D = discriminant(f1)
    if D != discriminant(f2):
        raise BqfError("discriminants differ")
    if not (is_primitive(f1) and is_primitive(f2)):
        raise BqfError("composition requires primitive forms")
    a1, b1, c1 = f1
    a2, b2, c2 = _coprime_leading(f2, f1[0])
    # B = b1 (mod 2 a1), B = b2 (mod 2 a2); solvable since b1 = b2 = D (mod 2)
    k = (b2 - b1) // 2 * pow(a1, -1, abs(a2)) % abs(a2)
    B = b1 + 2 * a1 * k
    A = a1 * a2
    if (B * B - D) % (4 * A) != 0:
        raise BqfError("concordance failure in composition")
    return (A, B, (B * B - D) // (4 * A))


def pell4(D: int) -> tuple[int, int]:
    """Least (t, u) with t > 2, u > 0 and t^2 - D u^2 = 4."""
    _check_disc(D)
    f, _ = reduce_form(principal_form(D))
    U = cycle_automorph(f)
    (p, q), (r, s) = U
    t = abs(p + s)
    A = f[0]
    # U = [[(t - B u)/2, -C u], [A u, (t + B u)/2]] up to global sign
    if abs(r) % abs(A) != 0:
        raise BqfError(f"automorph of {f} is not of Pell shape")
    u = abs(r) // abs(A)
    if u == 0:
        raise BqfError(f"automorph of {f} is trivial")
    if t * t - D * u * u != 4:
        raise BqfError(f"Pell identity failed for D={D}: t={t}, u={u}")
    return t, u


def forms_of_discriminant(D: int) -> list[Form]:
    """All reduced primitive forms of discriminant D (both signs of a)."""
    _check_disc(D)
    root = isqrt(D)
    out = []
    for b in range(1, root + 1):
        if (D - b * b) % 4 != 0:
            continue
        ac = (b * b - D) // 4  # = a*c, negative
        for a in _divisor_pairs(-ac):
            c = ac // a
            for f in ((a, b, c), (-a, b, -c)):
                if is_reduced(f) and is_primitive(f):
                    out.append(f)
    return sorted(set(out))


def _divisor_pairs(n: int):
    """Positive divisors of n > 0."""
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d * d != n:
                out.append(n // d)
        d += 1
    return sorted(out)


def class_representatives(D: int) -> list[Form]:
    """One canonical (cycle-min) form per proper class of discriminant D."""
    seen = {}
    for f in forms_of_discriminant(D):
        key = min(cycle(f))
        seen.setdefault(key, key)
    return sorted(seen)


def class_number(D: int) -> int:
    return len(class_representatives(D))
