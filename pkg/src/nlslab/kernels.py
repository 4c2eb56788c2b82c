"""The probe kernel K and its transform K-hat.

For the Gaussian probe phi = exp(-x^2/4),

    K(x)      = int_0^inf (1+t^2)^{-1} exp(-x^2 / (1+t^2)) dt
              = int_0^{pi/2} exp(-x^2 cos^2 theta) dtheta        (t = tan theta)
    K-hat(xi) = sqrt(pi) int_0^inf (1+t^2)^{-1/2}
                          exp(-xi^2 (1+t^2) / 4) dt,   xi != 0.

K-hat here carries the plain transform normalization int e^{-ix xi} K dx
(no 2pi factor), which is exactly the normalization that divides out of a
unitary-transform deconvolution:  F(a * K) = F(a) K-hat.

Bessel fast paths (validated against the raw quadratures in the tests, and
usable as independent oracles):

    K(x)      = (pi/2) e^{-x^2/2} I_0(x^2/2)
    K-hat(xi) = (sqrt(pi)/2) e^{-xi^2/8} K_0(xi^2/8)
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import ive, k0e

from .quadrature import QuadratureSpec, trapezoid_refine


def kernel_K(x, spec: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """K by doubling trapezoid on the tan-substituted finite interval.

    The theta-integrand is smooth with all odd derivatives vanishing at both
    endpoints, so the trapezoid refinement converges spectrally.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))

    def f(theta):
        c2 = np.cos(theta)[:, None] ** 2
        return np.exp(-np.square(x)[None, :] * c2)

    # vectorized over x: refine on the shared theta lattice
    val, _ = _refine_rows(f, 0.0, np.pi / 2, spec)
    return val


def kernel_K_bessel(x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return 0.5 * np.pi * ive(0, 0.5 * x * x)


def kernel_K_d1(x) -> np.ndarray:
    """dK/dx, exponentially-scaled Bessel form."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = 0.5 * x * x
    return 0.5 * np.pi * x * (ive(1, z) - ive(0, z))


def kernel_K_d2(x) -> np.ndarray:
    """d2K/dx2 via I0', I1' recurrences."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = 0.5 * x * x
    i0, i1, i2 = ive(0, z), ive(1, z), ive(2, z)
    return 0.5 * np.pi * ((i1 - i0) + x * x * (1.5 * i0 + 0.5 * i2 - 2.0 * i1))


def kernel_K_hat(xi, spec: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """K-hat by doubling trapezoid after t = sinh(s), truncated by the
    Gaussian tail.  Diverges logarithmically at xi = 0 and is rejected there.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if np.any(xi == 0):
        raise ValueError("logarithmic divergence at zero frequency")
    z = xi * xi / 4.0
    # truncate where exp(-z cosh^2 s) falls 1e-20 below the s=0 value
    tail = -np.log(1e-20)
    smax = np.arccosh(np.sqrt((tail + z) / z))

    out = np.empty_like(z)
    for i, (zi, si) in enumerate(zip(z, smax)):
        def f(s):
            return np.exp(-zi * np.cosh(s) ** 2)
        val, _ = trapezoid_refine(f, 0.0, float(si), spec)
        out[i] = np.sqrt(np.pi) * val
    return out


def kernel_K_hat_bessel(xi) -> np.ndarray:
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if np.any(xi == 0):
        raise ValueError("logarithmic divergence at zero frequency")
    z = xi * xi / 8.0
    return 0.5 * np.sqrt(np.pi) * np.exp(-2.0 * z) * k0e(z)


def _refine_rows(f, a, b, spec):
    """trapezoid_refine for integrands returning one row per node."""
    n = spec.panels
    x = np.linspace(a, b, n + 1)
    vals = f(x)
    h = (b - a) / n
    total = h * (vals.sum(axis=0) - 0.5 * (vals[0] + vals[-1]))
    err = np.inf
    for _ in range(spec.max_doublings):
        mid = 0.5 * (x[:-1] + x[1:])
        fm = f(mid)
        refined = 0.5 * total + 0.5 * h * fm.sum(axis=0)
        err = np.max(np.abs(refined - total))
        nodes = np.empty(2 * n + 1)
        nodes[0::2] = x
        nodes[1::2] = mid
        merged = np.empty((2 * n + 1,) + vals.shape[1:], dtype=vals.dtype)
        merged[0::2] = vals
        merged[1::2] = fm
        x, vals, total, n, h = nodes, merged, refined, 2 * n, 0.5 * h
        if err <= spec.rtol * max(np.max(np.abs(refined)), 1e-300):
            break
    return total, err


@dataclass
class KernelTable:
    """Tabulated K and K-hat with oracle cross-checks."""

    x: np.ndarray
    K: np.ndarray
    K_oracle: np.ndarray
    xi: np.ndarray
    K_hat: np.ndarray
    K_hat_oracle: np.ndarray

    @property
    def max_K_mismatch(self) -> float:
        return float(np.max(np.abs(self.K - self.K_oracle)))

    @property
    def max_K_hat_mismatch(self) -> float:
        return float(np.max(np.abs(self.K_hat - self.K_hat_oracle)))

    def validate(self, tol: float = 1e-8) -> dict:
        return {
            "K_oracle_mismatch": self.max_K_mismatch,
            "K_hat_oracle_mismatch": self.max_K_hat_mismatch,
            "K_even": float(np.max(np.abs(self.K - self.K[::-1])))
            if _symmetric(self.x) else float("nan"),
            "K_positive": bool(np.all(self.K > 0)),
            "K_nonincreasing_in_abs_x": _nonincreasing_from_center(self.x, self.K),
            "K_hat_positive": bool(np.all(self.K_hat > 0)),
            "K_hat_nonincreasing": bool(np.all(np.diff(self.K_hat[np.argsort(np.abs(self.xi))]) <= 1e-12)),
            "passes": bool(self.max_K_mismatch < tol and self.max_K_hat_mismatch < tol
                           and np.all(self.K_hat > 0)),
        }

    def to_csv(self, x_path, xi_path) -> None:
        with open(x_path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["x", "K_quadrature", "K_oracle", "abs_diff"])
            for row in zip(self.x, self.K, self.K_oracle):
                wr.writerow([f"{row[0]:.17g}", f"{row[1]:.17g}", f"{row[2]:.17g}",
                             f"{abs(row[1] - row[2]):.3e}"])
        with open(xi_path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["xi", "K_hat_quadrature", "K_hat_oracle", "abs_diff"])
            for row in zip(self.xi, self.K_hat, self.K_hat_oracle):
                wr.writerow([f"{row[0]:.17g}", f"{row[1]:.17g}", f"{row[2]:.17g}",
                             f"{abs(row[1] - row[2]):.3e}"])


def build_kernel_table(x=None, xi=None, spec: QuadratureSpec = QuadratureSpec()) -> KernelTable:
    if x is None:
        x = np.linspace(-6.0, 6.0, 121)
    if xi is None:
        xi = np.linspace(0.25, 6.0, 47)
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    return KernelTable(x, kernel_K(x, spec), kernel_K_bessel(x),
                       xi, kernel_K_hat(xi, spec), kernel_K_hat_bessel(xi))


def _symmetric(x) -> bool:
    return bool(np.allclose(x, -x[::-1], atol=1e-12))


def _nonincreasing_from_center(x, K) -> bool:
    order = np.argsort(np.abs(x))
    return bool(np.all(np.diff(K[order]) <= 1e-12))
