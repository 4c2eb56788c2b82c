"""Quadrature helpers shared by the functional evaluations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss


@dataclass(frozen=True)
class QuadratureSpec:
    """Settings for the 1-D quadratures: doubling trapezoid to a tolerance.

    ``method`` names the integrand preparation: plain composite trapezoid on
    a finite interval, or the tan/sinh substitutions that map the kernel
    integrals onto finite intervals first.
    """

    method: str = "trapezoid"
    panels: int = 64
    rtol: float = 1e-12
    max_doublings: int = 16
    t_max: float = 256.0

    def __post_init__(self):
        if self.rtol <= 0:
            raise ValueError("tolerance must be positive")
        if self.panels < 16:
            raise ValueError("panel count must be at least 16")


def trapezoid_refine(f, a: float, b: float, spec: QuadratureSpec = QuadratureSpec()):
    """Composite trapezoid with interval doubling and Richardson stop rule.

    ``f`` maps an array of nodes to an array of values (vectorized); returns
    (value, error_estimate).  Converges spectrally for integrands whose odd
    derivatives vanish at both endpoints (the kernel substitutions below).
    """
    n = spec.panels
    x = np.linspace(a, b, n + 1)
    vals = f(x)
    total = np.trapezoid(vals, dx=(b - a) / n)
    err = np.inf
    for _ in range(spec.max_doublings):
        mid = 0.5 * (x[:-1] + x[1:])
        fm = f(mid)
        refined = 0.5 * total + 0.5 * (b - a) / n * np.sum(fm)
        err = abs(refined - total)
        # merge nodes for the next level
        nodes = np.empty(2 * n + 1)
        nodes[0::2] = x
        nodes[1::2] = mid
        merged = np.empty(2 * n + 1, dtype=np.result_type(vals, fm))
        merged[0::2] = vals
        merged[1::2] = fm
        x, vals, total, n = nodes, merged, refined, 2 * n
        scale = max(abs(refined), 1e-300)
        if err <= spec.rtol * scale:
            break
    return total, err


def gauss_legendre_panels(a: float, b: float, n_panels: int, n_nodes: int = 16,
                          log_spaced: bool = False):
    """Nodes and weights of composite Gauss-Legendre panels on [a, b]."""
    xg, wg = leggauss(n_nodes)
    edges = (np.exp(np.linspace(np.log(a), np.log(b), n_panels + 1))
             if log_spaced else np.linspace(a, b, n_panels + 1))
    ts, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        ts.append(0.5 * (hi - lo) * xg + 0.5 * (lo + hi))
        ws.append(0.5 * (hi - lo) * wg)
    return np.concatenate(ts), np.concatenate(ws)


def log_weight_integral(eps: float, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Numerical  int_eps^inf dt / (2t(2t+1)),  for the identity check against
    (1/2) log(1 + 1/(2 eps)).

    The substitution t = eps/s maps the integral onto [0, 1] where the
    transformed integrand is exactly 1 / (2 (s + 2 eps)), finite at s = 0.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    val, _ = trapezoid_refine(lambda s: 1.0 / (2.0 * (np.asarray(s) + 2.0 * eps)),
                              0.0, 1.0, spec)
    return float(val)


def log_weight_exact(eps: float) -> float:
    return 0.5 * np.log1p(1.0 / (2.0 * eps))
