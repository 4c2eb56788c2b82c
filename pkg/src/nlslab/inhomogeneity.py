"""The inhomogeneity coefficient a(x) and its admissibility check.

a is admissible when a is in L1 and L-inf, x a is in L2, and a' is in L1.
On the truncated grid the four norms are always finite numbers, so the
operational criterion adds a decay guard: |a| must fall below DECAY_TOL on
the outer 5% of the box.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid1D, Field, boundary_sup, spectral_derivative

DECAY_TOL = 1e-8


@dataclass(frozen=True)
class Inhomogeneity:
    grid: Grid1D
    values: np.ndarray
    norm_l1: float
    norm_sup: float
    norm_xa_l2: float
    norm_da_l1: float
    admissible: bool

    @property
    def field(self) -> Field:
        return Field(self.grid, self.values.astype(complex))


def check_admissible(grid: Grid1D, values) -> Inhomogeneity:
    """Compute the four admissibility norms by grid quadrature and classify."""
    a = np.asarray(values)
    if np.iscomplexobj(a) and np.max(np.abs(a.imag)) > 0:
        raise ValueError("inhomogeneity must be real-valued")
    a = a.real.astype(float)
    if a.shape != (grid.n_points,):
        raise ValueError("inhomogeneity shape does not match grid")
    if not np.all(np.isfinite(a)):
        raise ValueError("inhomogeneity contains non-finite samples")
    dx = grid.dx
    l1 = float(np.trapezoid(np.abs(a), dx=dx))
    sup = float(np.max(np.abs(a)))
    xa = float(np.sqrt(np.trapezoid((grid.x * a) ** 2, dx=dx)))
    da = spectral_derivative(Field(grid, a.astype(complex))).values.real
    da_l1 = float(np.trapezoid(np.abs(da), dx=dx))
    decays = boundary_sup(Field(grid, a.astype(complex))) < DECAY_TOL
    ok = decays and all(np.isfinite(v) for v in (l1, sup, xa, da_l1))
    return Inhomogeneity(grid, a, l1, sup, xa, da_l1, ok)


def build_inhomogeneity(grid: Grid1D, kind: str, amplitude: float = 1.0,
                        center: float = 0.0, width: float = 1.0,
                        separation: float = 1.75) -> Inhomogeneity:
    """Named builtins used by experiments: zero, gaussian-bump, sech2, two-bump."""
    x = grid.x
    if kind == "zero":
        vals = np.zeros_like(x)
    elif kind == "gaussian-bump":
        vals = amplitude * np.exp(-(((x - center) / width) ** 2))
    elif kind == "sech2":
        vals = amplitude / np.cosh((x - center) / width) ** 2
    elif kind == "two-bump":
        vals = amplitude * (np.exp(-(((x - center - separation) / width) ** 2))
                            + np.exp(-(((x - center + separation) / width) ** 2)))
    else:
        raise ValueError(f"unknown inhomogeneity kind {kind!r}")
    return check_admissible(grid, vals)
