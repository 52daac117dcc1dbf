"""Composite Gauss-Legendre quadrature over history views.

Distributed-delay terms integrate a function of the history over a window
[a, b] in [-tau, 0].  The view is polynomial between its breakpoints, so a
fixed 4-node Gauss-Legendre rule applied piece by piece is exact for
integrands that are polynomials of degree <= 7 in theta on each piece and
of order 8 on smooth ones -- far beyond the order of any shipped method.

An adaptive rule driven by an error tolerance (accepting that the final
error then decays to the tolerance rather than to zero) would also serve;
the fixed rule is kept for determinism.
"""

from __future__ import annotations

import numpy as np

__all__ = ["integrate_view", "gauss_legendre"]

_RTOL = 1e-12

_RULES: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule on [0, 1]."""
    if n not in _RULES:
        x, w = np.polynomial.legendre.leggauss(n)
        _RULES[n] = (0.5 * (x + 1.0), 0.5 * w)
    return _RULES[n]


def _pieces(view, a: float, b: float) -> np.ndarray:
    tol = _RTOL * max(1.0, view.tau)
    knots = view.breakpoints()
    inner = knots[(knots > a + tol) & (knots < b - tol)]
    return np.concatenate([[a], inner, [b]])


def integrate_view(view, a: float, b: float, integrand) -> np.ndarray:
    """Integrate ``integrand(theta, x(theta))`` over [a, b] along a view.

    [a, b] is split at every breakpoint of the view and a 4-node
    Gauss-Legendre rule is applied per piece.  ``integrand`` must be
    vectorised: it receives the flat node array ``theta`` of shape (m,) and
    the view values of shape (m, dim), and returns shape (m,) or (m, q).
    The result has the integrand's trailing shape: () for scalar densities.
    """
    a = float(a)
    b = float(b)
    tol = _RTOL * max(1.0, view.tau)
    if a >= b:
        raise ValueError(f"empty or reversed window [{a}, {b}]")
    if a < -view.tau - tol or b > tol:
        raise ValueError(f"window [{a}, {b}] outside [-{view.tau}, 0]")
    nodes, weights = gauss_legendre(4)
    edges = _pieces(view, a, b)
    widths = np.diff(edges)
    thetas = (edges[:-1, None] + widths[:, None] * nodes[None, :]).ravel()
    w = (widths[:, None] * weights[None, :]).ravel()
    fv = np.asarray(integrand(thetas, view.eval_many(thetas)), dtype=float)
    if fv.shape[0] != len(thetas):
        raise ValueError(
            f"integrand returned leading size {fv.shape[0]}, "
            f"expected {len(thetas)}"
        )
    return np.tensordot(w, fv, axes=(0, 0))
