"""Free Schroedinger propagator and the operators behind its factorization.

The propagator is the Fourier multiplier  e^{it Lap} = F^-1 e^{-it xi^2} F.
It factors as  M(t) D(t) F M(t)  with  M(t) = e^{i x^2 / 4t}  and
[D(t) f](x) = (2it)^{-1/2} f(x / 2t);  the Galilean operator is
J(t) = x + 2it d_x = e^{it Lap} x e^{-it Lap}.
"""

from __future__ import annotations

import numpy as np

from .errors import ResolutionError
from .grid import (Field, FREQ_DOMAIN, X_DOMAIN, fourier_forward, fourier_inverse,
                   boundary_sup, spectral_tail_sup, evaluate_at,
                   semidiscrete_transform, spectral_derivative)

BOUNDARY_TOL = 1e-10
SPECTRAL_TAIL_TOL = 1e-8


def free_propagate(field: Field, t: float, boundary_tol: float | None = BOUNDARY_TOL) -> Field:
    """Apply e^{it Lap}.  Exactly unitary on the grid.

    ``boundary_tol`` guards against wrap-around: the input must carry less
    than that amplitude on the outer 5% of the box.  Pass None to disable
    (periodic data, solver-internal use).
    """
    if field.domain != X_DOMAIN:
        raise ValueError("free_propagate expects an x-domain field")
    if boundary_tol is not None and boundary_sup(field) > boundary_tol:
        raise ResolutionError(
            f"domain too small for requested t: boundary amplitude "
            f"{boundary_sup(field):.2e} exceeds {boundary_tol:.1e}")
    g = field.grid
    vhat = fourier_forward(field).values
    return fourier_inverse(Field(g, np.exp(-1j * t * g.xi**2) * vhat, FREQ_DOMAIN))


def gaussian_exact(grid, t: float, center: float = 0.0, amplitude: complex = 1.0) -> Field:
    """Closed-form free evolution of the Gaussian probe exp(-(x-c)^2/4).

    e^{it Lap} phi = (1+it)^{-1/2} exp(-(x-c)^2 / (4(1+it))), so that
    |e^{it Lap} phi|^4 = (1+t^2)^{-1} exp(-(x-c)^2 / (1+t^2)).
    """
    z = 1.0 + 1j * t
    vals = amplitude * z ** (-0.5) * np.exp(-(grid.x - center) ** 2 / (4.0 * z))
    return Field(grid, vals)


def apply_M(field: Field, t: float) -> Field:
    """Multiply by the quadratic chirp M(t) = e^{i x^2 / 4t}."""
    if t == 0:
        raise ValueError("M(t) is singular at t = 0")
    g = field.grid
    return field.with_values(np.exp(1j * g.x**2 / (4.0 * t)) * field.values)


def apply_D(field: Field, t: float) -> Field:
    """Dilation [D(t) f](x) = (2it)^{-1/2} f(x / 2t), band-limited resampling."""
    if t == 0:
        raise ValueError("D(t) is singular at t = 0")
    g = field.grid
    targets = g.x / (2.0 * t)
    vals = (2j * t) ** (-0.5) * evaluate_at(field, targets)
    return Field(g, vals, X_DOMAIN)


def factorization_check(field: Field, t: float) -> float:
    """Relative L2 gap between M(t) D(t) F M(t) and e^{it Lap} on the field.

    The D-step evaluates the transform of M(t)·field at the off-lattice
    frequencies x/2t with a semidiscrete sum, which is only alias-free while
    L/2t stays below the lattice Nyquist pi/dx, i.e. t >= L dx / (2 pi).
    """
    if t == 0:
        raise ValueError("factorization is singular at t = 0")
    g = field.grid
    t_min = g.half_length * g.dx / (2.0 * np.pi)
    if abs(t) < t_min:
        raise ResolutionError(
            f"factorization frequencies x/2t alias for |t| < {t_min:.3g} on this grid")
    chirp = np.exp(1j * g.x**2 / (4.0 * t))
    transformed = semidiscrete_transform(field.with_values(chirp * field.values),
                                         g.x / (2.0 * t))
    lhs = chirp * (2j * t) ** (-0.5) * transformed
    rhs = free_propagate(field, t, boundary_tol=None).values
    scale = np.sqrt(np.sum(np.abs(rhs) ** 2))
    if scale == 0:
        return 0.0
    return float(np.sqrt(np.sum(np.abs(lhs - rhs) ** 2)) / scale)


def galilean_J(field: Field, t: float, tail_tol: float | None = SPECTRAL_TAIL_TOL) -> Field:
    """J(t) u = x u + 2it u_x with the derivative taken spectrally."""
    if tail_tol is not None and spectral_tail_sup(field) > tail_tol:
        raise ResolutionError(
            f"under-resolved: relative spectral tail {spectral_tail_sup(field):.2e}")
    g = field.grid
    du = spectral_derivative(field).values
    return Field(g, g.x * field.values + 2j * t * du)
