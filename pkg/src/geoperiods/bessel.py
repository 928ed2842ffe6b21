"""K-Bessel function of imaginary order and integral tables built on it.

K_{it}(x) for real t and x > 0 is real; it oscillates in log x for x < t and
decays like e^{-x} beyond.  The reference implementation delegates to mpmath
at elevated precision.  Fast vectorized evaluation goes through a cubic
spline of e^x K_{it}(x) on a log-spaced grid, together with the cumulative
integral Phi(w) = int_w^infty u^{-1/2} K_{it}(u) du needed by vertical-period
computations.  Tables are cached on disk keyed by their parameters.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.interpolate import CubicSpline

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def _working_dps(t: float) -> int:
    return 30 + int(0.7 * abs(t))


def kbessel(t: float, x: float) -> float:
    """K_{it}(x) at binary64 accuracy via mpmath at elevated precision."""
    if x <= 0:
        raise ValueError("argument must be positive")
    with mpmath.workdps(_working_dps(t)):
        v = mpmath.besselk(1j * t, mpmath.mpf(x))
        return float(v.real)


def kbessel_series(t: float, x: float) -> float:
    """Independent oracle: K_{it} from the ascending series of I_{it}.

    K_{it}(x) = -pi * Im I_{it}(x) / sinh(pi t), with
    I_{it}(x) = (x/2)^{it} sum_k (x^2/4)^k / (k! Gamma(k+1+it)).
    Works for every x in the tested range provided the precision grows with
    x (the sum cancels down from e^x to e^{-x} scale) and with t.
    """
    if x <= 0:
        raise ValueError("argument must be positive")
    if t == 0:
        with mpmath.workdps(30 + int(x)):
            return float(mpmath.besselk(0, x))
    dps = 25 + int((2.0 * x + 1.6 * abs(t)) / 2.3)
    with mpmath.workdps(dps):
        xm = mpmath.mpf(x)
        it = 1j * mpmath.mpf(t)
        q = xm * xm / 4
        term = 1 / mpmath.gamma(1 + it)
        total = term
        k = 1
        while True:
            term = term * q / (k * (k + it))
            total += term
            if abs(term) < mpmath.mpf(10) ** (-dps) * (1 + abs(total)):
                break
            k += 1
        i_it = mpmath.exp(it * mpmath.log(xm / 2)) * total
        val = -mpmath.pi * i_it.imag / mpmath.sinh(mpmath.pi * mpmath.mpf(t))
        return float(val)


def kbessel_tilde(t: float, x: float) -> float:
    """e^x K_{it}(x)."""
    with mpmath.workdps(_working_dps(t)):
        v = mpmath.exp(mpmath.mpf(x)) * mpmath.besselk(1j * t, mpmath.mpf(x))
        return float(v.real)


@dataclass
class KBesselTable:
    """Spline table for fast vectorized K_{it} and its Phi integral."""

    t: float
    x_min: float
    x_max: float
    log_grid: np.ndarray
    tilde_values: np.ndarray  # e^x K_{it}(x) at the grid
    phi_values: np.ndarray    # Phi(x) at the grid

    def __post_init__(self):
        self._tilde_spline = CubicSpline(self.log_grid, self.tilde_values)
        self._phi_spline = CubicSpline(self.log_grid, self.phi_values)

    # -- construction -------------------------------------------------------

    @classmethod
    def build(cls, t: float, x_min: float = 1e-4,
              x_max: float = 60.0) -> "KBesselTable":
        # resolution: the oscillation period in log x is 2 pi / t; keep at
        # least ~500 nodes per period for 1e-10-level spline error
        span = math.log(x_max) - math.log(x_min)
        base = 4000
        osc = int(span / (2 * math.pi / max(t, 0.5)) * 500)
        n = max(base, osc)
        log_grid = np.linspace(math.log(x_min), math.log(x_max), n)
        xs = np.exp(log_grid)
        tilde = np.empty(n)
        with mpmath.workdps(_working_dps(t)):
            order = 1j * mpmath.mpf(t)
            for i, x in enumerate(xs):
                xm = mpmath.mpf(float(x))
                tilde[i] = float((mpmath.exp(xm) * mpmath.besselk(order, xm)).real)
        phi = cls._phi_from_tilde(t, log_grid, tilde)
        return cls(t=float(t), x_min=x_min, x_max=x_max,
                   log_grid=log_grid, tilde_values=tilde, phi_values=phi)

    @staticmethod
    def _phi_from_tilde(t, log_grid, tilde):
        xs = np.exp(log_grid)
        # integrand g(x) = x^{-1/2} K(x); integrate the spline in x exactly,
        # switching variables to u = log x: int g(x) dx = int g(e^u) e^u du
        integrand_u = np.power(xs, 0.5) * tilde * np.exp(-xs)
        sp = CubicSpline(log_grid, integrand_u)
        anti = sp.antiderivative()
        total = anti(log_grid[-1])
        # tail beyond x_max: K ~ sqrt(pi/2x) e^{-x} (1 + (-4t^2-1)/(8x))
        xm = xs[-1]
        tail = math.sqrt(math.pi / 2) * math.exp(-xm) / xm * (
            1 - (4 * t * t + 1) / (8 * xm))
        return (total - anti(log_grid)) + tail

    # -- persistence --------------------------------------------------------

    def save(self, path: str):
        np.savez_compressed(
            path, t=self.t, x_min=self.x_min, x_max=self.x_max,
            log_grid=self.log_grid, tilde_values=self.tilde_values,
            phi_values=self.phi_values)

    @classmethod
    def load(cls, path: str) -> "KBesselTable":
        with np.load(path) as z:
            return cls(t=float(z["t"]), x_min=float(z["x_min"]),
                       x_max=float(z["x_max"]), log_grid=z["log_grid"],
                       tilde_values=z["tilde_values"], phi_values=z["phi_values"])

    @staticmethod
    def _cache_name(t: float) -> str:
        return f"kbessel_t{t:.12g}.npz"

    @classmethod
    def for_order(cls, t: float, cache_dir: str | None = None) -> "KBesselTable":
        """Load a bundled or cached table for order it, building on miss."""
        name = cls._cache_name(t)
        bundled = os.path.join(DATA_DIR, name)
        if os.path.exists(bundled):
            return cls.load(bundled)
        cache_dir = cache_dir or os.environ.get("GEOLAB_CACHE")
        if cache_dir:
            cached = os.path.join(cache_dir, name)
            if os.path.exists(cached):
                return cls.load(cached)
            tbl = cls.build(t)
            os.makedirs(cache_dir, exist_ok=True)
            tbl.save(cached)
            return tbl
        return cls.build(t)

    # -- evaluation ---------------------------------------------------------

    def k(self, x):
        """Vectorized K_{it}(x); asymptotic continuation beyond x_max."""
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise ValueError("argument must be positive")
        if np.any(x < self.x_min * (1 - 1e-12)):
            raise ValueError(f"argument below table range {self.x_min}")
        out = np.empty_like(x)
        inside = x <= self.x_max
        xi = x[inside]
        out[inside] = self._tilde_spline(np.log(xi)) * np.exp(-xi)
        xo = x[~inside]
        if xo.size:
            out[~inside] = (np.sqrt(np.pi / (2 * xo)) * np.exp(-xo)
                            * (1 - (4 * self.t ** 2 + 1) / (8 * xo)))
        return out if out.ndim else float(out)

    def phi(self, w):
        """Vectorized Phi(w) = int_w^infty u^{-1/2} K_{it}(u) du."""
        w = np.asarray(w, dtype=float)
        if np.any(w < self.x_min * (1 - 1e-12)):
            raise ValueError(f"argument below table range {self.x_min}")
        out = np.empty_like(w)
        inside = w <= self.x_max
        out[inside] = self._phi_spline(np.log(w[inside]))
        wo = w[~inside]
        if wo.size:
            out[~inside] = (np.sqrt(np.pi / 2) * np.exp(-wo) / wo
                            * (1 - (4 * self.t ** 2 + 1) / (8 * wo)))
        return out if out.ndim else float(out)


_table_registry: dict[float, KBesselTable] = {}


def table_for(t: float, cache_dir: str | None = None) -> KBesselTable:
    """Process-wide memoized table lookup."""
    key = round(float(t), 12)
    tbl = _table_registry.get(key)
    if tbl is None:
        tbl = KBesselTable.for_order(key, cache_dir)
        _table_registry[key] = tbl
    return tbl
