#!/usr/bin/env python3
"""Offline generator for the bundled Maass cusp form coefficient file.

Solves for the Fourier coefficients of the Laplace eigenfunction on the
modular surface with spectral parameter near R = 9.5337 by collocation:
points just below the fundamental domain are pulled back inside it and the
Fourier expansion must agree at both representatives (implicit automorphy).
With a(1) = 1 the overdetermined linear system pins the remaining
coefficients; the spectral parameter is refined by matching a(2) across two
independent collocation heights, and the parity is chosen by which series
(cosine or sine) admits a consistent solution.

Writes src/geoperiods/data/maass_r9p53.txt in the documented MAASS v1 format.
Run from the repository root:  python3 tools/generate_maass.py
"""

import math
import os
import sys

import mpmath
import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from geoperiods.psl2 import reduce_to_fundamental_domain  # noqa: E402


def kbessel_grid(R, xs, nodes=400, umax=None):
    """K_{iR}(x) for an array x > 0 via int_0^inf e^{-x cosh u} cos(Ru) du."""
    xs = np.asarray(xs, dtype=float)
    if umax is None:
        # e^{-x cosh u} below 1e-24 once x cosh u > 55
        umax = float(np.arccosh(55.0 / xs.min())) + 0.5
    u, w = np.polynomial.legendre.leggauss(nodes)
    u = 0.5 * umax * (u + 1.0)
    w = 0.5 * umax * w
    return (np.exp(-np.outer(xs, np.cosh(u))) * np.cos(R * u)) @ w


def check_kbessel():
    R = 9.5336952613
    xs = np.array([2.5, 5.0, 11.3, 30.0])
    mine = kbessel_grid(R, xs)
    with mpmath.workdps(40):
        ref = [float(mpmath.besselk(1j * R, x).real) for x in xs]
    # float64 cancellation in the oscillatory integral leaves ~9 relative
    # digits at small x; coefficients only need that much
    rel = np.max(np.abs(mine - np.array(ref)) / (np.abs(ref) + 1e-300))
    assert rel < 3e-8, f"quadrature K-Bessel check failed: {rel}"


def design_matrix(R, Y, M, parity, Q=None):
    """Rows: collocation equations f(z_j) - f(z_j*) = 0 in the a(n)."""
    if Q is None:
        Q = 2 * M
    xs = (np.arange(Q) + 0.5) / (2.0 * Q)  # x in (0, 1/2): parity halves it
    cs = np.cos if parity == "even" else np.sin
    rows = np.zeros((Q, M))
    # direct side
    args = 2.0 * math.pi * np.arange(1, M + 1) * Y
    kvals = kbessel_grid(R, args)
    direct = math.sqrt(Y) * kvals[None, :] * cs(
        2.0 * math.pi * np.outer(xs, np.arange(1, M + 1)))
    # pulled-back side
    pulled = np.zeros((Q, M))
    for j, x in enumerate(xs):
        zstar, _ = reduce_to_fundamental_domain(complex(x, Y))
        argsj = 2.0 * math.pi * np.arange(1, M + 1) * zstar.y
        kj = kbessel_grid(R, argsj)
        pulled[j] = math.sqrt(zstar.y) * kj * cs(
            2.0 * math.pi * np.arange(1, M + 1) * zstar.x)
    rows = direct - pulled
    return rows


def solve_coefficients(R, Y, M, parity):
    A = design_matrix(R, Y, M, parity)
    # a(1) = 1: move the first column to the right-hand side; normalize the
    # remaining columns (they decay like K(2 pi n Y)) for conditioning
    rhs = -A[:, 0]
    scales = np.sqrt(np.mean(A[:, 1:] ** 2, axis=0))
    scales[scales == 0] = 1.0
    sol, res, rank, _ = np.linalg.lstsq(A[:, 1:] / scales, rhs, rcond=None)
    sol = sol / scales
    fitted = A[:, 1:] @ sol - rhs
    residual = float(np.sqrt(np.mean(fitted ** 2)))
    scale = float(np.sqrt(np.mean(A[:, 0] ** 2)))
    return np.concatenate([[1.0], sol]), residual / max(scale, 1e-300)


Y_MAIN = 0.13
Y_ALT = 0.115


def mismatch(R, M, parity):
    a1, _ = solve_coefficients(R, Y_MAIN, M, parity)
    a2, _ = solve_coefficients(R, Y_ALT, M, parity)
    return a1[1] - a2[1]


def refine_R(R0, M, parity, steps=25):
    r0, r1 = R0 - 2e-4, R0 + 2e-4
    f0, f1 = mismatch(r0, M, parity), mismatch(r1, M, parity)
    for _ in range(steps):
        if f1 == f0:
            break
        r2 = r1 - f1 * (r1 - r0) / (f1 - f0)
        r0, f0, r1, f1 = r1, f1, r2, mismatch(r2, M, parity)
        if abs(r1 - r0) < 1e-13:
            break
    return r1


def main():
    check_kbessel()
    R_seed = 9.5337
    M = 80
    keep = 25
    results = {}
    for parity in ("even", "odd"):
        _, rel = solve_coefficients(R_seed, 0.47, 24, parity)
        results[parity] = rel
        print(f"parity {parity}: relative collocation residual {rel:.3e}")
    parity = min(results, key=results.get)
    print(f"chosen parity: {parity}")

    R = refine_R(R_seed, M, parity)
    print(f"refined spectral parameter R = {R:.15f}")

    coeffs, rel = solve_coefficients(R, Y_MAIN, M, parity)
    # independent consistency: second geometry must reproduce coefficients
    coeffs2, _ = solve_coefficients(R, Y_ALT, M, parity)
    agree = np.max(np.abs(coeffs[:keep] - coeffs2[:keep]))
    hecke = abs(coeffs[5] - coeffs[1] * coeffs[2])  # a(6) vs a(2)a(3)
    print(f"residual {rel:.3e}; cross-height agreement {agree:.3e}; "
          f"Hecke a(6)-a(2)a(3) = {hecke:.3e}")
    prec = max(agree, hecke, 1e-12) * 10
    out = os.path.join(os.path.dirname(__file__), "..", "src", "geoperiods",
                       "data", "maass_r9p53.txt")
    with open(out, "w") as fh:
        fh.write("MAASS v1\n")
        fh.write(f"R={R:.15f} parity={parity} M={keep} prec={prec:.3e}\n")
        for n in range(1, keep + 1):
            fh.write(f"{n} {coeffs[n - 1]:.15e}\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
