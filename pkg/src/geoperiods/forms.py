"""Automorphic forms on the modular surface and their evaluation.

Three variants: the weight-12 holomorphic cusp form with exact integer
coefficients, Maass cusp forms ingested from a coefficient file, and the
completed weight-0 Eisenstein series on the unitary line s = 1/2 + it.
Evaluation reduces points to the fundamental domain (tracking the weight-k
cocycle), truncates the Fourier series with an explicit tail bound, and is
vectorized over point batches.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from . import bessel

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
TWO_PI = 2.0 * math.pi


class FormError(Exception):
    pass


class InsufficientCoefficients(FormError):
    def __init__(self, needed, available):
        super().__init__(f"need M >= {needed} coefficients, have {available}")
        self.needed = needed
        self.available = available


# ---------------------------------------------------------------------------
# Ramanujan tau via exact Kronecker-substitution polynomial arithmetic


_PACK_BITS = 160


_PACK_BYTES = _PACK_BITS // 8
_HALF_DIGIT = 1 << (_PACK_BITS - 1)


def _pack(coeffs: list[int]) -> int:
    # shift every balanced digit by half the base so the byte string is a
    # plain nonnegative radix-2^160 number, then strip the offset once;
    # keeps packing linear instead of quadratic in len(coeffs)
    buf = b"".join((c + _HALF_DIGIT).to_bytes(_PACK_BYTES, "little")
                   for c in coeffs)
    offset = int.from_bytes(_HALF_DIGIT.to_bytes(_PACK_BYTES, "little")
                            * len(coeffs), "little")
    return int.from_bytes(buf, "little") - offset


def _unpack(x: int, n: int) -> list[int]:
    mask = (1 << (_PACK_BITS * n)) - 1
    offset = int.from_bytes(_HALF_DIGIT.to_bytes(_PACK_BYTES, "little") * n,
                            "little")
    y = (x + offset) & mask  # digits of y are the balanced digits plus half
    buf = y.to_bytes(_PACK_BYTES * n, "little")
    return [int.from_bytes(buf[i * _PACK_BYTES:(i + 1) * _PACK_BYTES],
                           "little") - _HALF_DIGIT
            for i in range(n)]


def _poly_mul_trunc(a: list[int], b: list[int], M: int) -> list[int]:
    prod = _pack(a[:M]) * _pack(b[:M])
    return _unpack(prod, M)


def _eta_product(M: int) -> list[int]:
    """Coefficients of prod_{n>=1} (1 - q^n) mod q^M (pentagonal numbers)."""
    out = [0] * M
    out[0] = 1
    k = 1
    while True:
        g1 = k * (3 * k - 1) // 2
        g2 = k * (3 * k + 1) // 2
        if g1 >= M and g2 >= M:
            break
        sign = -1 if k % 2 else 1
        if g1 < M:
            out[g1] = sign
        if g2 < M:
            out[g2] = sign
        k += 1
    return out


@lru_cache(maxsize=4)
def delta_coefficients(M: int) -> tuple[int, ...]:
    """tau(1..M), exact: q prod (1-q^n)^24 expanded by repeated squaring."""
    if M < 1:
        raise FormError("M must be positive")
    if M > 10_000_000:
        raise FormError("M too large")
    p1 = _eta_product(M)
    p2 = _poly_mul_trunc(p1, p1, M)
    p4 = _poly_mul_trunc(p2, p2, M)
    p8 = _poly_mul_trunc(p4, p4, M)
    p16 = _poly_mul_trunc(p8, p8, M)
    p24 = _poly_mul_trunc(p16, p8, M)
    return tuple(p24)  # a(n) = coefficient of q^{n-1} in the product


def delta_coefficients_oracle(M: int) -> list[int]:
    """Slow direct convolution of the eta product, for cross-checks."""
    p = _eta_product(M)
    out = [0] * M
    out[0] = 1
    cur = out
    for _ in range(24):
        nxt = [0] * M
        for i, ci in enumerate(cur):
            if ci == 0:
                continue
            for j, pj in enumerate(p):
                if i + j >= M:
                    break
                if pj:
                    nxt[i + j] += ci * pj
        cur = nxt
    return cur


# ---------------------------------------------------------------------------
# batched fundamental-domain reduction with cocycle


def reduce_points(z):
    """Vectorized reduction to |Re| <= 1/2, |z| >= 1.

    Returns (z_reduced, j) where j is the cocycle j_sigma(z) = prod of the
    intermediate points at inversion steps; for a weight-k form,
    f(z) = j^{-k} f(z_reduced).
    """
    z = np.array(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise FormError("points must lie in the upper half-plane")
    j = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    for _ in range(10_000):
        x = z.real
        n = np.floor(x + 0.5)
        z = z - n * active
        norm = z.real ** 2 + z.imag ** 2
        inv = active & (norm < 1.0 - 1e-15)
        if not inv.any():
            newly_done = active & (np.abs(z.real) <= 0.5 + 1e-15)
            active &= ~newly_done
            if not active.any():
                return z, j
            continue
        j = np.where(inv, j * z, j)
        z = np.where(inv, -1.0 / z, z)
    raise FormError("batch reduction did not terminate")


# ---------------------------------------------------------------------------
# form variants


@dataclass(frozen=True)
class HolomorphicCuspForm:
    weight: int
    coefficients: np.ndarray  # float64 copy of the exact integers
    exact_coefficients: tuple = field(repr=False)
    label: str = "delta"

    kind = "holomorphic"

    @staticmethod
    def delta(M: int = 64) -> "HolomorphicCuspForm":
        exact = delta_coefficients(M)
        return HolomorphicCuspForm(
            weight=12, coefficients=np.array(exact, dtype=float),
            exact_coefficients=exact)

    def truncation_length(self, y: float, tol: float) -> int:
        # |a(n)| <= d(n) n^{(k-1)/2} <= n^{(k+1)/2}; solve tail < tol
        k = self.weight
        for M in range(1, 100_000):
            tail = 2.0 * (M + 1) ** ((k + 1) / 2) * math.exp(-TWO_PI * (M + 1) * y)
            if tail < tol and TWO_PI * (M + 1) * y > k:
                return M
        raise FormError("no adequate truncation length")


@dataclass(frozen=True)
class MaassCuspForm:
    spectral_R: float
    parity: str  # "even" or "odd"
    coefficients: np.ndarray
    precision: float
    label: str = "maass"

    kind = "maass"

    def __post_init__(self):
        if self.spectral_R <= 0:
            raise FormError("spectral parameter must be positive")
        if self.parity not in ("even", "odd"):
            raise FormError(f"bad parity {self.parity!r}")

    def table(self) -> bessel.KBesselTable:
        return bessel.table_for(self.spectral_R)

    def truncation_length(self, y: float, tol: float) -> int:
        # |a(n)| modest (Hecke eigenvalues); K decays like e^{-2 pi n y}
        bound = 3.0 * max(1.0, float(np.max(np.abs(self.coefficients))))
        for M in range(1, 100_000):
            arg = TWO_PI * (M + 1) * y
            tail = 4.0 * bound * math.sqrt(M + 1.0) * math.exp(-arg)
            if tail < tol and arg > 2.0:
                return M
        raise FormError("no adequate truncation length")


def _xi(u: complex) -> complex:
    """Completed zeta xi(u) = pi^{-u/2} Gamma(u/2) zeta(u)."""
    with mpmath.workdps(30):
        v = (mpmath.pi ** (-u / 2)) * mpmath.gamma(u / 2) * mpmath.zeta(u)
        return complex(v)


@lru_cache(maxsize=1)
def _eta0() -> float:
    """lim_{w->0} (xi(1+w) - 1/w), the constant term of xi at its pole."""
    with mpmath.workdps(40):
        w = mpmath.mpf(10) ** -12
        vals = []
        for ww in (w, -w):
            u = 1 + ww
            vals.append((mpmath.pi ** (-u / 2)) * mpmath.gamma(u / 2)
                        * mpmath.zeta(u) - 1 / ww)
        return float((vals[0] + vals[1]) / 2)


@lru_cache(maxsize=32)
def _divisor_powers(M: int, t: float) -> tuple:
    """lambda_n = sum_{d | n} cos(t log(d^2/n)) for n = 1..M (real)."""
    lam = np.zeros(M)
    for d in range(1, M + 1):
        n = np.arange(d, M + 1, d, dtype=float)
        lam[d - 1::d] += np.cos(t * np.log(d * d / n))
    return tuple(lam)


@dataclass(frozen=True)
class EisensteinSeries:
    """Completed weight-0 series at s = 1/2 + it.

    Constant term A y^{1/2-it} + B y^{1/2+it} with A = xi(1-2it),
    B = xi(1+2it); the nonconstant part is
    4 sqrt(y) sum lambda_n K_{it}(2 pi n y) cos(2 pi n x).
    """

    t: float
    label: str = "eisenstein"

    kind = "eisenstein"

    @property
    def A(self) -> complex:
        if self.t == 0:
            raise FormError("constant term degenerates at t = 0; use "
                            "eisenstein_constant_term")
        return _xi(1 - 2j * self.t)

    @property
    def B(self) -> complex:
        if self.t == 0:
            raise FormError("constant term degenerates at t = 0")
        return _xi(1 + 2j * self.t)

    def table(self) -> bessel.KBesselTable:
        return bessel.table_for(self.t)

    def lambdas(self, M: int) -> np.ndarray:
        return np.array(_divisor_powers(M, self.t))

    def truncation_length(self, y: float, tol: float) -> int:
        for M in range(1, 100_000):
            arg = TWO_PI * (M + 1) * y
            tail = 8.0 * (M + 1.0) * math.exp(-arg)
            if tail < tol and arg > 2.0:
                return M
        raise FormError("no adequate truncation length")


@dataclass(frozen=True)
class ConstantFunction:
    """Weight-0 constant, the trivial residual spectrum member."""

    value: complex = 1.0
    label: str = "constant"

    kind = "constant"


AutomorphicForm = (HolomorphicCuspForm | MaassCuspForm | EisensteinSeries
                   | ConstantFunction)


def eisenstein_constant_term(t: float, y) -> np.ndarray | complex:
    """Constant Fourier mode of the completed series at height y."""
    y = np.asarray(y, dtype=float)
    if t == 0:
        out = np.sqrt(y) * (np.log(y) + 2.0 * _eta0())
        return out if out.ndim else complex(out)
    A = _xi(1 - 2j * t)
    B = _xi(1 + 2j * t)
    out = (A * np.exp((0.5 - 1j * t) * np.log(y))
           + B * np.exp((0.5 + 1j * t) * np.log(y)))
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------------------
# evaluation


def _eval_reduced_holomorphic(f: HolomorphicCuspForm, z: np.ndarray, tol):
    ymin = float(z.imag.min())
    M = f.truncation_length(ymin, tol)
    if M > len(f.coefficients):
        raise InsufficientCoefficients(M, len(f.coefficients))
    n = np.arange(1, M + 1)
    return np.exp(2j * np.pi * np.outer(z, n)) @ f.coefficients[:M]


def _eval_reduced_maass(f: MaassCuspForm, z: np.ndarray, tol):
    ymin = float(z.imag.min())
    M = f.truncation_length(ymin, tol)
    if M > len(f.coefficients):
        raise InsufficientCoefficients(M, len(f.coefficients))
    tbl = f.table()
    n = np.arange(1, M + 1)
    args = TWO_PI * np.outer(z.imag, n)
    kv = tbl.k(args)
    osc = np.cos if f.parity == "even" else np.sin
    phases = osc(TWO_PI * np.outer(z.real, n))
    return 2.0 * np.sqrt(z.imag) * ((kv * phases) @ f.coefficients[:M])


def _eval_reduced_eisenstein(f: EisensteinSeries, z: np.ndarray, tol):
    ymin = float(z.imag.min())
    M = f.truncation_length(ymin, tol)
    tbl = f.table()
    lam = f.lambdas(M)
    n = np.arange(1, M + 1)
    args = TWO_PI * np.outer(z.imag, n)
    kv = tbl.k(args)
    phases = np.cos(TWO_PI * np.outer(z.real, n))
    tail = 4.0 * np.sqrt(z.imag) * ((kv * phases) @ lam)
    return eisenstein_constant_term(f.t, z.imag) + tail


def eval_form(f: AutomorphicForm, z, tol: float = 1e-10, reduce: bool = True):
    """Value of the form at z (scalar or array), to absolute tolerance tol.

    Weight-k automorphy is applied through the reduction cocycle, so the
    returned value is the form at z itself, not at the reduced point.
    """
    if not 1e-14 <= tol <= 1e-3:
        raise FormError(f"tolerance {tol} outside supported range")
    single = np.isscalar(z) or getattr(z, "shape", None) == ()
    if hasattr(z, "z"):  # UpperHalfPlanePoint
        z = z.z
        single = True
    za = np.atleast_1d(np.asarray(z, dtype=complex))
    if reduce:
        zr, j = reduce_points(za)
    else:
        zr, j = za, np.ones_like(za)
        if np.any(zr.imag < 0.4):
            raise FormError("unreduced evaluation below height 0.4 refused")
    if f.kind == "holomorphic":
        vals = _eval_reduced_holomorphic(f, zr, tol) * j ** (-f.weight)
    elif f.kind == "maass":
        vals = _eval_reduced_maass(f, zr, tol)
    elif f.kind == "constant":
        vals = np.full(zr.shape, complex(f.value))
    else:
        vals = _eval_reduced_eisenstein(f, zr, tol)
    return complex(vals[0]) if single else vals


def eval_lift(f: AutomorphicForm, g, tol: float = 1e-10):
    """F(g) = j_g(i)^{-k} f(g i) for a real matrix g of determinant 1."""
    (A, B), (C, D) = g
    z = (A * 1j + B) / (C * 1j + D)
    k = f.weight if f.kind == "holomorphic" else 0
    val = eval_form(f, z, tol)
    if k:
        val *= (C * 1j + D) ** (-k)
    return val


def eval_lift_batch(f: AutomorphicForm, frames, tol: float = 1e-10):
    """Vectorized eval_lift: frames is an array of shape (n, 2, 2)."""
    fr = np.asarray(frames, dtype=float)
    C = fr[:, 1, 0]
    D = fr[:, 1, 1]
    den = C * 1j + D
    z = (fr[:, 0, 0] * 1j + fr[:, 0, 1]) / den
    vals = eval_form(f, z, tol)
    if f.kind == "holomorphic":
        vals = vals * den ** (-f.weight)
    return vals


# ---------------------------------------------------------------------------
# generic-s Eisenstein Fourier model (oracle support, real s > 1)


def eisenstein_fourier_general(z: complex, s: float, M: int = 40) -> float:
    """Completed series at real s > 1 from its Fourier expansion.

    xi(2s) y^s + xi(2s-1) y^{1-s}
    + 4 sqrt(y) sum n^{s-1/2} sigma_{1-2s}(n) K_{s-1/2}(2 pi n y) cos(2 pi n x).
    """
    from scipy.special import kv

    y = z.imag
    x = z.real
    out = float(_xi(2 * s).real) * y ** s + float(_xi(2 * s - 1).real) * y ** (1 - s)
    n = np.arange(1, M + 1, dtype=float)
    sigma = np.zeros(M)
    for d in range(1, M + 1):
        sigma[d - 1::d] += d ** (1.0 - 2 * s)
    terms = (n ** (s - 0.5) * sigma * kv(s - 0.5, TWO_PI * n * y)
             * np.cos(TWO_PI * n * x))
    return out + 4.0 * math.sqrt(y) * float(terms.sum())


def eisenstein_lattice_sum(z: complex, s: float, cutoff: int = 1500) -> float:
    """Direct completed lattice sum at real s > 1 (slowly convergent oracle).

    pi^{-s} Gamma(s) * (1/2) * sum_{(m,n) != 0} y^s / |m z + n|^{2s},
    Richardson-extrapolated in the cutoff to kill the 1/cutoff^{2s-2} tail.
    """

    def raw(C):
        acc = 0.0
        for m in range(-C, C + 1):
            n = np.arange(-C, C + 1, dtype=float)
            w = np.abs(m * z + n)
            if m == 0:
                w[C] = np.inf  # skip (0,0)
            acc += float(((z.imag ** s) / (w ** (2 * s))).sum())
        return 0.5 * acc

    v1 = raw(cutoff)
    v2 = raw(2 * cutoff)
    p = 2 * s - 2
    extrap = v2 + (v2 - v1) / (2 ** p - 1)
    return float(math.pi ** (-s) * math.gamma(s) * extrap)


# ---------------------------------------------------------------------------
# Maass coefficient file ingestion


def ingest_maass_coefficients(path: str) -> MaassCuspForm:
    """Parse the documented text format and validate its self-checks."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0].strip() != "MAASS v1":
        raise FormError("malformed header: expected 'MAASS v1'")
    if len(lines) < 2:
        raise FormError("missing parameter line")
    params = {}
    for tokenpair in lines[1].split():
        if "=" not in tokenpair:
            raise FormError(f"bad parameter token {tokenpair!r}")
        key, val = tokenpair.split("=", 1)
        params[key] = val
    try:
        R = float(params["R"])
        parity = params["parity"]
        M = int(params["M"])
        prec = float(params["prec"])
    except (KeyError, ValueError) as exc:
        raise FormError(f"bad parameter line: {exc}") from exc
    coeffs = np.zeros(M)
    seen = 0
    for ln in lines[2:]:
        if not ln.strip():
            continue
        parts = ln.split()
        if len(parts) != 2:
            raise FormError(f"bad coefficient line {ln!r}")
        n = int(parts[0])
        if not 1 <= n <= M:
            raise FormError(f"coefficient index {n} out of range")
        coeffs[n - 1] = float(parts[1])
        seen += 1
    if seen < M:
        raise FormError(f"too few coefficients: {seen} < {M}")
    if M < 6:
        raise FormError("need at least 6 coefficients for the self-check")
    if abs(coeffs[0] - 1.0) > prec:
        raise FormError("normalization a(1) = 1 violated")
    hecke = abs(coeffs[5] - coeffs[1] * coeffs[2])
    if hecke > 10 * prec:
        raise FormError(f"Hecke self-check failed: |a(6)-a(2)a(3)| = {hecke}")
    return MaassCuspForm(spectral_R=R, parity=parity, coefficients=coeffs,
                         precision=prec)


@lru_cache(maxsize=1)
def bundled_maass_form() -> MaassCuspForm:
    return ingest_maass_coefficients(os.path.join(DATA_DIR, "maass_r9p53.txt"))
