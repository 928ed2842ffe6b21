"""Geodesic and vertical periods, and the residual linking them.

A geodesic period integrates the weight-k lift of a form along a closed
geodesic against arc length; quadrature is 32-point Gauss-Legendre panels
with adaptive bisection, every sample reduced to the fundamental domain.
A vertical period integrates the form along the vertical line over a
rational cusp value; it splits at height 1/c, mapping the lower half to a
second vertical line by the cusp-normalizing matrix.  For the Eisenstein
series the constant Fourier term is removed and its divergent piece is
replaced by its analytic continuation in the spectral variable.  The
residual of the identity P = (-1)^{k/2+1} L (+ explicit constant-term
corrections in the Eisenstein case) is exposed with the c/|trace| ratio
that governs its size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import gammaincc

from . import forms
from .enumeration import DoubleCoset, GeodesicClass, edge_matrix
from .psl2 import GroupElement, geodesic_length

TWO_PI = 2.0 * math.pi


class PeriodError(Exception):
    pass


class QuadratureError(PeriodError):
    pass


@dataclass(frozen=True)
class PeriodValue:
    value: complex
    estimated_error: float
    method: str

    def __complex__(self):
        return complex(self.value)


# ---------------------------------------------------------------------------
# geodesic periods


@lru_cache(maxsize=1)
def _gl_rule():
    nodes, weights = np.polynomial.legendre.leggauss(32)
    return nodes, weights


def _segment_frames(axis_frame, ts):
    """Frames g0 a_t for an array of arc-length parameters t."""
    (g00, g01), (g10, g11) = axis_frame
    e = np.exp(0.5 * ts)
    out = np.empty(ts.shape + (2, 2))
    out[..., 0, 0] = g00 * e
    out[..., 0, 1] = g01 / e
    out[..., 1, 0] = g10 * e
    out[..., 1, 1] = g11 / e
    return out


def _panel_integrals(f, axis_frame, segs, point_tol):
    nodes, weights = _gl_rule()
    a = segs[:, 0]
    b = segs[:, 1]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    ts = mid[:, None] + half[:, None] * nodes[None, :]
    frames = _segment_frames(axis_frame, ts)
    vals = forms.eval_lift_batch(f, frames.reshape(-1, 2, 2), point_tol)
    vals = vals.reshape(ts.shape)
    return (vals @ weights) * half


def _axis_frame_of(gamma: GroupElement):
    from .psl2 import attracting_is_plus, axis, geodesic_parametrization

    ax = axis(gamma)
    _, frame = geodesic_parametrization(ax, 0.0)
    if not attracting_is_plus(gamma):
        # traverse toward the attracting fixed point: swap the endpoints
        (g00, g01), (g10, g11) = frame
        frame = ((g01, -g00), (g11, -g10))
    return frame


def geodesic_period(f, y, tol: float = 1e-9,
                    base_shift: float = 0.0) -> PeriodValue:
    """Integral of the lift of f over the closed geodesic of the class y.

    y may be a GeodesicClass or a hyperbolic group element; the result only
    depends on the conjugacy class (up to 2 tol), not the representative.
    base_shift moves the starting point along the orbit and must not matter.
    """
    if isinstance(y, GeodesicClass):
        gamma = y.canonical_rep
    elif isinstance(y, GroupElement):
        gamma = y
    else:
        raise PeriodError(f"cannot interpret {y!r} as a geodesic class")
    length = geodesic_length(gamma)
    frame = _axis_frame_of(gamma)
    point_tol = max(1e-14, min(1e-4, tol / (4.0 * length)))

    n0 = max(2, int(math.ceil(length / 0.75)))
    edges = base_shift + np.linspace(0.0, length, n0 + 1)
    segs = np.column_stack([edges[:-1], edges[1:]])
    coarse = _panel_integrals(f, frame, segs, point_tol)

    total = 0.0 + 0.0j
    err_total = 0.0
    budget = 8192  # panels evaluated in total
    used = n0
    for _ in range(14):
        halves = np.empty((2 * len(segs), 2))
        mids = 0.5 * (segs[:, 0] + segs[:, 1])
        halves[0::2, 0] = segs[:, 0]
        halves[0::2, 1] = mids
        halves[1::2, 0] = mids
        halves[1::2, 1] = segs[:, 1]
        used += len(halves)
        if used > budget:
            raise QuadratureError("panel budget exhausted before convergence")
        fine = _panel_integrals(f, frame, halves, point_tol)
        refined = fine[0::2] + fine[1::2]
        err = np.abs(refined - coarse)
        goal = 0.25 * tol * (segs[:, 1] - segs[:, 0]) / length + 1e-16
        done = err < goal
        total += complex(refined[done].sum())
        err_total += float(err[done].sum())
        if done.all():
            return PeriodValue(total, err_total, "gauss-legendre-adaptive")
        keep = ~done
        segs = np.concatenate([halves[0::2][keep], halves[1::2][keep]])
        coarse = np.concatenate([fine[0::2][keep], fine[1::2][keep]])
    raise QuadratureError("adaptive refinement did not converge")


# ---------------------------------------------------------------------------
# vertical periods


def _cusp_value(x) -> tuple[int, int]:
    if isinstance(x, DoubleCoset):
        a, c = x.a_mod_c, x.c
    elif isinstance(x, Fraction):
        a, c = x.numerator, x.denominator
    elif isinstance(x, tuple) and len(x) == 2:
        a, c = x
    else:
        raise PeriodError(f"cannot interpret cusp value {x!r}")
    if c <= 0:
        raise PeriodError("cusp denominator must be positive")
    if math.gcd(a, c) != 1:
        raise PeriodError(f"cusp value {a}/{c} not in lowest terms")
    return int(a), int(c)


def _holomorphic_truncation(k: int, h: float, tol: float) -> int:
    # |a(n)| <= d(n) n^{(k-1)/2} <= n^{(k+1)/2}; Gamma(k/2, x) <= 2 x^{k/2-1}
    # e^{-x} once x > k; geometric tail ratio e^{-2 pi h}
    ratio = math.exp(-TWO_PI * h)
    for M in range(1, 2_000_000):
        x = TWO_PI * (M + 1) * h
        if x <= k:
            continue
        term = ((M + 1) ** ((k + 1) / 2) * (TWO_PI * (M + 1)) ** (-k / 2)
                * 2.0 * x ** (k / 2 - 1) * math.exp(-x))
        if term / (1.0 - ratio) < 0.25 * tol:
            return M
    raise PeriodError("no adequate truncation length")


def _holomorphic_upper(f, theta: float, h: float, tol: float):
    """sum a(n) e(n theta) (2 pi n)^{-k/2} Gamma(k/2, 2 pi n h), with tail < tol."""
    k = f.weight
    M = _holomorphic_truncation(k, h, tol)
    if M > len(f.coefficients):
        raise forms.InsufficientCoefficients(M, len(f.coefficients))
    n = np.arange(1, M + 1)
    x = TWO_PI * n * h
    inc = gammaincc(k / 2, x) * math.gamma(k / 2)
    w = f.coefficients[:M] * (TWO_PI * n) ** (-k / 2.0) * inc
    return complex(np.exp(2j * np.pi * n * theta) @ w)


def _bessel_weights(f, c_or_h, tol, table=None):
    """Coefficient weights w_n for the Maass/Eisenstein upper integral.

    Upper(theta, h) = sum_n w_n osc(2 pi n theta) with
    w_n = amp * a(n) (2 pi n)^{-1/2} Phi(2 pi n h); amp = 2 (Maass) or 4
    (Eisenstein); osc is the parity oscillation (cos/sin).  Returns
    (w, tail_bound); raises when the available coefficients cannot reach tol.
    """
    h = c_or_h
    tbl = table if table is not None else f.table()
    if f.kind == "maass":
        amp = 2.0
        coeffs = f.coefficients
        avail = len(coeffs)
        bound = 3.0 * max(1.0, float(np.max(np.abs(coeffs))))
    else:
        amp = 4.0
        avail = None
        bound = None

    def tail_bound(M):
        # heuristic with safety factor 10: |a(n)| modest, Phi decays like
        # e^{-2 pi n h}
        b = bound if bound is not None else (M + 1.0)
        phi = float(tbl.phi(min(TWO_PI * (M + 1) * h, 700.0))) if \
            TWO_PI * (M + 1) * h < 700.0 else 0.0
        ratio = math.exp(-TWO_PI * h)
        return 10.0 * amp * b * (TWO_PI * (M + 1)) ** -0.5 * abs(phi) / (
            1.0 - ratio)

    M = 1
    while tail_bound(M) >= 0.1 * tol:
        M += 1
        if avail is not None and M > avail:
            raise forms.InsufficientCoefficients(M, avail)
        if M > 2_000_000:
            raise PeriodError("no adequate truncation length")
    n = np.arange(1, M + 1)
    phi = tbl.phi(TWO_PI * n * h)
    base = (TWO_PI * n) ** -0.5 * phi
    if f.kind == "maass":
        w = amp * f.coefficients[:M] * base
    else:
        w = amp * f.lambdas(M) * base
    return w, tail_bound(M)


def _oscillator(f):
    if f.kind == "maass" and f.parity == "odd":
        return np.sin
    return np.cos


def _spectral_upper(f, theta: float, h: float, tol: float):
    w, tail = _bessel_weights(f, h, tol)
    n = np.arange(1, len(w) + 1)
    osc = _oscillator(f)
    return float(osc(TWO_PI * n * theta) @ w), tail


def _eisenstein_constant_correction(t: float, h: float, hp: float) -> complex:
    """Regularized - int_0^h f_inf dy/y and the continued upper companion.

    The two divergent constant-term integrals contribute
    -(A/(1/2-it))(h^{1/2-it} + hp^{1/2-it}) - (B/(1/2+it))(h^{1/2+it} +
    hp^{1/2+it}) after continuation in the exponent.
    """
    A = forms._xi(1 - 2j * t)
    B = forms._xi(1 + 2j * t)
    sA = 0.5 - 1j * t
    sB = 0.5 + 1j * t
    return (-(A / sA) * (h ** sA + hp ** sA)
            - (B / sB) * (h ** sB + hp ** sB))


def vertical_period(f, x, tol: float = 1e-9,
                    split_height: float | None = None) -> PeriodValue:
    """Integral of f along the vertical line over a/c up to i infinity.

    Holomorphic weight k: the additive-twist series
    Gamma(k/2)(2 pi)^{-k/2} sum a(n) e(n a/c) n^{-k/2}, evaluated through an
    incomplete-gamma split that converges absolutely.  Maass/Eisenstein: the
    line is split at height 1/c (or split_height); the lower half maps to the
    vertical line over -a^{-1}/c.  Eisenstein values are regularized by
    constant-term subtraction.
    """
    if not 1e-13 <= tol <= 1e-2:
        raise PeriodError(f"tolerance {tol} outside supported range")
    a, c = _cusp_value(x)
    if f.kind == "constant":
        if f.value == 0:
            return PeriodValue(0.0, 0.0, "zero")
        raise PeriodError("vertical period of a nonzero constant diverges")
    d = pow(a, -1, c) if c > 1 else 0
    h = split_height if split_height is not None else 1.0 / c
    if h <= 0:
        raise PeriodError("split height must be positive")
    hp = 1.0 / (c * c * h)
    theta1 = a / c
    theta2 = -d / c

    if f.kind == "holomorphic":
        sign = (-1) ** (f.weight // 2)
        u1 = _holomorphic_upper(f, theta1, h, tol)
        u2 = _holomorphic_upper(f, theta2, hp, tol)
        return PeriodValue(u1 + sign * u2, 0.5 * tol, "incomplete-gamma-split")

    if f.kind == "maass":
        u1, t1 = _spectral_upper(f, theta1, h, tol)
        u2, t2 = _spectral_upper(f, theta2, hp, tol)
        coeff_err = float(f.precision) * 2.0 * len(f.coefficients) * float(
            f.table().phi(TWO_PI * max(min(h, hp), 1e-4)))
        total_err = t1 + t2 + coeff_err
        if total_err > tol:
            raise PeriodError(
                f"coefficient precision limits the error to {total_err:.2e}, "
                f"above the requested {tol:.2e}")
        return PeriodValue(u1 + u2, total_err, "bessel-split")

    if f.kind == "eisenstein":
        if f.t == 0:
            raise PeriodError("t = 0 constant term degenerates; unsupported")
        u1, t1 = _spectral_upper(f, theta1, h, tol)
        u2, t2 = _spectral_upper(f, theta2, hp, tol)
        corr = _eisenstein_constant_correction(f.t, h, hp)
        return PeriodValue(u1 + u2 + corr, t1 + t2, "regularized-bessel-split")

    raise PeriodError(f"unsupported form kind {f.kind!r}")


def vertical_period_profile(f, c: int, tol: float = 1e-9):
    """All vertical periods with denominator c at once via a length-c DFT.

    Returns (residues, values): the a with gcd(a, c) = 1 in increasing order
    and the corresponding period values.  Weights depend on n only through
    the split at 1/c, so the e(n a/c) sums collapse to one DFT plus an
    index permutation by a -> -a^{-1} mod c.
    """
    if c <= 0:
        raise PeriodError("denominator must be positive")
    h = 1.0 / c
    if f.kind == "holomorphic":
        k = f.weight
        M = _holomorphic_truncation(k, h, tol)
        if M > len(f.coefficients):
            raise forms.InsufficientCoefficients(M, len(f.coefficients))
        n = np.arange(1, M + 1)
        inc = gammaincc(k / 2, TWO_PI * n * h) * math.gamma(k / 2)
        w = f.coefficients[:M] * (TWO_PI * n) ** (-k / 2.0) * inc
        sign = (-1) ** (k // 2)
    elif f.kind in ("maass", "eisenstein"):
        w, _ = _bessel_weights(f, h, tol)
        n = np.arange(1, len(w) + 1)
        sign = 1
    else:
        raise PeriodError(f"unsupported form kind {f.kind!r}")

    W = np.bincount((n % c).astype(np.int64), weights=w, minlength=c)
    F = c * np.fft.ifft(W)  # F[a] = sum_r W_r e(r a / c)

    residues = np.array([a for a in range(1 if c > 1 else 0, c + (c == 1))
                         if math.gcd(a, c) == 1], dtype=np.int64)
    if c == 1:
        residues = np.array([0], dtype=np.int64)
    inv = np.array([pow(int(a), -1, c) if c > 1 else 0 for a in residues],
                   dtype=np.int64)
    second = F[(-inv) % c]
    first = F[residues % c]
    if f.kind == "holomorphic":
        vals = first + sign * second
    else:
        osc_first = first.imag if _oscillator(f) is np.sin else first.real
        osc_second = second.imag if _oscillator(f) is np.sin else second.real
        vals = osc_first + osc_second
        if f.kind == "eisenstein":
            vals = vals + _eisenstein_constant_correction(f.t, h, h)
    return residues, vals


# ---------------------------------------------------------------------------
# bridge residual


@dataclass(frozen=True)
class BridgeResult:
    residual: complex
    geodesic_value: complex
    vertical_value: complex
    correction: complex
    c: int
    trace: int

    @property
    def ratio(self) -> float:
        return self.c / abs(self.trace)


def bridge_residual(f, x: DoubleCoset, k_index: int,
                    tol: float = 1e-9,
                    include_constant_terms: bool = True) -> BridgeResult:
    """P_f(class of gamma) - [(-1)^{k/2+1} L_f(x) + constant-term terms].

    gamma is the matrix realizing the edge (x, k_index); its class is the
    right geodesic partner and its cusp value a/c the vertical line.
    """
    gamma = edge_matrix(x, k_index)
    weight = f.weight if f.kind == "holomorphic" else 0
    sign = (-1) ** (weight // 2 + 1)
    P = geodesic_period(f, gamma, tol)
    L = vertical_period(f, (gamma.a, gamma.c), tol)
    corr = 0.0 + 0.0j
    if f.kind == "eisenstein" and include_constant_terms:
        t = f.t
        A = forms._xi(1 - 2j * t)
        B = forms._xi(1 + 2j * t)
        pref = 1 + (-1) ** (weight // 2)
        corr = (A * gamma.c ** complex(-0.5, -t) * pref / (0.5 + 1j * t)
                + B * gamma.c ** complex(-0.5, t) * pref / (0.5 - 1j * t))
    residual = complex(P.value) - (sign * complex(L.value) + corr)
    return BridgeResult(residual=residual, geodesic_value=complex(P.value),
                        vertical_value=complex(L.value), correction=corr,
                        c=gamma.c, trace=gamma.trace)


@dataclass(frozen=True)
class ResidualRegression:
    constant: float
    slope: float
    intercept: float
    bound_constant: float  # max |r_i| / (1 + ratio_i^{0.51})

    def bound_holds(self, ratios, residuals) -> bool:
        r = np.asarray(ratios, dtype=float)
        s = np.abs(np.asarray(residuals))
        return bool(np.all(s <= self.bound_constant * (1 + r ** 0.51) + 1e-12))


def residual_regression(ratios, residuals) -> ResidualRegression:
    """Log-log fit |residual| ~ K + C ratio^slope with K profiled out."""
    r = np.asarray(ratios, dtype=float)
    s = np.abs(np.asarray(residuals, dtype=complex))
    if len(r) < 10:
        raise PeriodError("too few samples for regression")
    order = np.argsort(r)
    r, s = r[order], s[order]
    bound_K = float(np.max(s / (1 + r ** 0.51)))

    def fit(K):
        y = s - K
        good = (y > 0) & (r > 0)
        if good.sum() < 10:
            return np.inf, 0.0, 0.0
        ly = np.log(y[good])
        lr = np.log(r[good])
        A = np.column_stack([lr, np.ones(len(lr))])
        coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
        resid = ly - A @ coef
        return float(resid @ resid), float(coef[0]), float(coef[1])

    best = (np.inf, 0.0, 0.0, 0.0)
    top = float(np.min(s)) * 0.999
    for K in np.linspace(0.0, max(top, 0.0), 60):
        sse, slope, inter = fit(K)
        if sse < best[0]:
            best = (sse, slope, inter, K)
    _, slope, inter, K = best
    return ResidualRegression(constant=K, slope=slope, intercept=inter,
                              bound_constant=bound_K)
