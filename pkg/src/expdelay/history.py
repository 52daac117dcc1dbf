"""Piecewise-polynomial history states for delay and renewal equations.

The state of a delay equation at time t is the function theta -> x(t+theta)
on [-tau, 0].  It is stored here as a ring of cubic segments over a uniform
mesh of width h (tau/h segments), plus a head value x(t) for the delay
(DDE) flavour.  Renewal (RE) states are L^1 functions: no head, no
continuity across mesh knots, left limits at knots.

Stepping never mutates a state: the shift-semigroup advance drops the oldest
segment, re-indexes the rest, and appends a freshly built segment on [-h, 0].
Stage values of a Runge-Kutta step are represented by :class:`StageView`,
which overlays a single polynomial on [-shift, 0] over a shifted base state
instead of materialising a full new history.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DEGREE",
    "HistorySegment",
    "HistoryState",
    "StageView",
    "norm_diff",
]

DEGREE = 3
_NCOEF = DEGREE + 1

#: relative tolerance for snapping evaluation points to mesh knots
_KNOT_RTOL = 1e-9

# Chebyshev-Lobatto points on [0, 1]: (1 - cos(j*pi/3))/2.  They include the
# endpoints, so interpolation there keeps DDE states continuous across knots
# and the head equal to the final sample.
_LOBATTO_S = np.array([0.0, 0.25, 0.75, 1.0])
# First-kind Chebyshev points on [0, 1]; interior only, used for RE states
# where knot values are only defined as one-sided limits.
_CHEB_S = 0.5 * (1.0 - np.cos((2.0 * np.arange(4) + 1.0) * np.pi / 8.0))

_LOBATTO_VINV = np.linalg.inv(np.vander(_LOBATTO_S, _NCOEF, increasing=True))
_CHEB_VINV = np.linalg.inv(np.vander(_CHEB_S, _NCOEF, increasing=True))

# 16 first-kind Chebyshev points per segment: sampling grid for sup norms.
_SUP_S = 0.5 * (1.0 - np.cos((2.0 * np.arange(16) + 1.0) * np.pi / 32.0))

# 4-node Gauss-Legendre rule on [0, 1], used for L1 norms.
_GL4_X, _GL4_W = np.polynomial.legendre.leggauss(4)
_L1_S = 0.5 * (_GL4_X + 1.0)
_L1_W = 0.5 * _GL4_W


def _horner(coeffs: np.ndarray, s: np.ndarray) -> np.ndarray:
    # coeffs (..., d, NCOEF), s (...,) -> values (..., d)
    val = coeffs[..., -1]
    for p in range(_NCOEF - 2, -1, -1):
        val = val * s[..., None] + coeffs[..., p]
    return val


def _fit_cubic(samples: np.ndarray, vinv: np.ndarray) -> np.ndarray:
    # samples (..., nodes) -> power-basis coefficients (..., NCOEF)
    return samples @ vinv.T


def _as_values(raw, m: int, d: int, what: str) -> np.ndarray:
    vals = np.asarray(raw, dtype=float)
    if vals.shape == (m,) and d == 1:
        vals = vals[:, None]
    if vals.shape != (m, d):
        raise ValueError(
            f"{what} returned shape {vals.shape}; expected ({m},) for scalar "
            f"systems or ({m}, {d})"
        )
    return vals


class HistorySegment:
    """One cubic piece of a history function on [left, left+width].

    Coefficients are per component in the local variable
    s = (theta - left)/width in [0, 1], lowest power first.
    """

    __slots__ = ("left", "width", "coeffs")

    def __init__(self, left: float, width: float, coeffs: np.ndarray):
        coeffs = np.array(coeffs, dtype=float, ndmin=2)
        if width <= 0.0:
            raise ValueError(f"segment width must be positive, got {width}")
        if left + width > _KNOT_RTOL * max(1.0, abs(left)):
            raise ValueError(f"segment [{left}, {left + width}] extends past 0")
        if coeffs.ndim != 2 or coeffs.shape[1] != _NCOEF:
            raise ValueError(
                f"coeffs must have shape (dim, {_NCOEF}), got {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        self.left = float(left)
        self.width = float(width)
        self.coeffs = coeffs

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]

    def value(self, s) -> np.ndarray:
        """Evaluate at local coordinate(s) s in [0, 1]."""
        s = np.asarray(s, dtype=float)
        return _horner(self.coeffs, s)

    def __repr__(self):
        return f"HistorySegment(left={self.left}, width={self.width}, dim={self.dim})"


class HistoryState:
    """History function on [-tau, 0] as tau/h cubic segments, plus a DDE head.

    Value semantics: instances are immutable and safe to share across
    threads; every operation returns a new state.
    """

    __slots__ = ("kind", "dim", "tau", "h", "n_segments", "head", "_coeffs")

    def __init__(self, kind, dim, tau, h, coeffs, head=None, _copy=True):
        if kind not in ("dde", "re"):
            raise ValueError(f"kind must be 'dde' or 're', got {kind!r}")
        tau = float(tau)
        h = float(h)
        if tau <= 0.0 or h <= 0.0:
            raise ValueError("tau and h must be positive")
        n = int(round(tau / h))
        if n < 1 or abs(n * h - tau) > _KNOT_RTOL * max(1.0, tau):
            raise ValueError(f"tau/h = {tau / h} is not a positive integer")
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (n, dim, _NCOEF):
            raise ValueError(
                f"coeffs must have shape ({n}, {dim}, {_NCOEF}), got {coeffs.shape}"
            )
        if _copy:
            coeffs = coeffs.copy()
        coeffs.setflags(write=False)
        self.kind = kind
        self.dim = int(dim)
        self.tau = tau
        self.h = h
        self.n_segments = n
        self._coeffs = coeffs
        if kind == "dde":
            if head is None:
                raise ValueError("DDE states require a head value")
            head = np.array(head, dtype=float, ndmin=1)
            if head.shape != (dim,):
                raise ValueError(f"head must have shape ({dim},), got {head.shape}")
            head.setflags(write=False)
            self.head = head
            self._check_continuity()
        else:
            if head is not None:
                raise ValueError("RE states carry no head value")
            self.head = None

    def _check_continuity(self):
        gap = np.max(np.abs(self.eval(0.0) - self.head))
        tol = 1e-12 * (1.0 + float(np.max(np.abs(self.head))))
        if gap > tol:
            raise ValueError(
                f"DDE head/value mismatch at theta=0: |gap| = {gap:.3e} > {tol:.3e}"
            )

    @classmethod
    def from_callable(cls, phi, kind, dim, tau, h) -> "HistoryState":
        """Project a history callable onto the piecewise-cubic mesh.

        Each segment stores the degree-3 interpolant of ``phi`` at 4 Chebyshev
        points: Lobatto points (endpoints included) for DDE states so that
        continuity and the head value are preserved exactly, first-kind
        points for RE states.  ``phi`` must accept an ndarray of offsets and
        return values of shape (m,) for dim == 1 or (m, dim).
        """
        n = int(round(float(tau) / float(h)))
        if n < 1 or abs(n * h - tau) > _KNOT_RTOL * max(1.0, tau):
            raise ValueError(f"tau/h = {tau / h} is not a positive integer")
        s_nodes = _LOBATTO_S if kind == "dde" else _CHEB_S
        lefts = (np.arange(n) - n) * h
        thetas = lefts[:, None] + h * s_nodes[None, :]
        vals = _as_values(phi(thetas.ravel()), n * len(s_nodes), dim, "phi")
        vals = vals.reshape(n, len(s_nodes), dim)
        coeffs = _fit_cubic(
            np.swapaxes(vals, 1, 2), _LOBATTO_VINV if kind == "dde" else _CHEB_VINV
        )
        head = vals[-1, -1, :] if kind == "dde" else None
        return cls(kind, dim, tau, h, coeffs, head=head, _copy=False)

    @property
    def segments(self) -> tuple:
        """Segments oldest first; lefts derived from integer position."""
        n = self.n_segments
        return tuple(
            HistorySegment((i - n) * self.h, self.h, self._coeffs[i])
            for i in range(n)
        )

    def coefficients(self) -> np.ndarray:
        """Packed (n_segments, dim, 4) coefficient array (read-only)."""
        return self._coeffs

    def breakpoints(self) -> np.ndarray:
        """Mesh knots in [-tau, 0], oldest first."""
        n = self.n_segments
        return (np.arange(n + 1) - n) * self.h

    def _locate(self, thetas: np.ndarray):
        lo = -self.tau - _KNOT_RTOL * max(1.0, self.tau)
        hi = _KNOT_RTOL * max(1.0, self.tau)
        if np.any(thetas < lo) or np.any(thetas > hi):
            bad = thetas[(thetas < lo) | (thetas > hi)][0]
            raise ValueError(
                f"history evaluated at theta = {bad}, outside [-{self.tau}, 0]"
            )
        u = (thetas + self.tau) / self.h
        r = np.rint(u)
        on_knot = np.abs(u - r) <= _KNOT_RTOL * np.maximum(1.0, np.abs(u))
        # At a knot the segment to the left owns the value (left limit); in
        # the interior plain truncation finds the enclosing segment.
        idx = np.where(on_knot, r - 1.0, np.floor(u))
        idx = np.clip(idx, 0, self.n_segments - 1).astype(np.intp)
        s = np.clip(np.where(on_knot, r, u) - idx, 0.0, 1.0)
        return idx, s

    def eval_many(self, thetas) -> np.ndarray:
        """Evaluate at an array of offsets; returns shape (len(thetas), dim)."""
        thetas = np.asarray(thetas, dtype=float)
        idx, s = self._locate(thetas)
        return _horner(self._coeffs[idx], s)

    def eval(self, theta: float) -> np.ndarray:
        """Evaluate at one offset theta in [-tau, 0]; returns shape (dim,)."""
        return self.eval_many(np.array([float(theta)]))[0]

    def shift_append(self, segment: HistorySegment, head=None) -> "HistoryState":
        """Advance by one mesh width: drop the oldest segment, shift the rest
        one slot older, and install ``segment`` (covering [-h, 0]) as newest.

        DDE states additionally replace the head, which must match the new
        segment's value at theta = 0.
        """
        h = self.h
        if abs(segment.left + h) > _KNOT_RTOL * max(1.0, h) or abs(
            segment.width - h
        ) > _KNOT_RTOL * max(1.0, h):
            raise ValueError(
                f"appended segment must cover [-{h}, 0], got "
                f"[{segment.left}, {segment.left + segment.width}]"
            )
        if segment.dim != self.dim:
            raise ValueError("segment dimension mismatch")
        if self.kind == "dde" and head is None:
            raise ValueError("appending to a DDE state requires a new head")
        if self.kind == "re" and head is not None:
            raise ValueError("RE states carry no head value")
        coeffs = np.concatenate([self._coeffs[1:], segment.coeffs[None, :, :]])
        return HistoryState(
            self.kind, self.dim, self.tau, h, coeffs, head=head, _copy=False
        )

    def j_integrate(self, theta):
        """Integral of an RE history from theta up to 0, exact per segment.

        This is the embedding carrying the eta state to the integrated state
        u(theta) = int_theta^0 eta(s) ds.  Accepts a scalar or an array of
        offsets; returns (dim,) or (m, dim) accordingly.
        """
        if self.kind != "re":
            raise ValueError("j_integrate is defined for RE states only")
        scalar = np.isscalar(theta) or np.ndim(theta) == 0
        thetas = np.atleast_1d(np.asarray(theta, dtype=float))
        idx, s = self._locate(thetas)
        inv = 1.0 / (1.0 + np.arange(_NCOEF))
        seg_int = self.h * (self._coeffs * inv).sum(axis=-1)  # (n, d)
        suffix = np.zeros((self.n_segments + 1, self.dim))
        suffix[:-1] = seg_int[::-1].cumsum(axis=0)[::-1]
        powers = s[:, None] ** (1.0 + np.arange(_NCOEF))  # (m, NCOEF)
        partial = self.h * ((1.0 - powers)[:, None, :] * inv * self._coeffs[idx]).sum(
            axis=-1
        )
        out = partial + suffix[idx + 1]
        return out[0] if scalar else out

    def __repr__(self):
        return (
            f"HistoryState(kind={self.kind!r}, dim={self.dim}, tau={self.tau}, "
            f"h={self.h}, segments={self.n_segments})"
        )


class StageView:
    """Stage value of an exponential RK step: a shifted base history with one
    polynomial overlaid on [-shift, 0].

    eval(theta) is the overlay for theta >= -shift and base.eval(shift+theta)
    below; the overlay is stored in the local variable
    r = (theta + shift)/shift in [0, 1].
    """

    __slots__ = ("base", "shift", "overlay_coeffs", "head")

    def __init__(self, base, shift: float, overlay_coeffs: np.ndarray, head=None):
        if shift <= 0.0:
            raise ValueError("stage shift must be positive")
        overlay_coeffs = np.array(overlay_coeffs, dtype=float, ndmin=2)
        if overlay_coeffs.shape != (base.dim, _NCOEF):
            raise ValueError(
                f"overlay must have shape ({base.dim}, {_NCOEF}), "
                f"got {overlay_coeffs.shape}"
            )
        overlay_coeffs.setflags(write=False)
        self.base = base
        self.shift = float(shift)
        self.overlay_coeffs = overlay_coeffs
        if base.kind == "dde":
            head = np.array(head, dtype=float, ndmin=1)
            head.setflags(write=False)
            self.head = head
        else:
            self.head = None

    @property
    def kind(self):
        return self.base.kind

    @property
    def dim(self):
        return self.base.dim

    @property
    def tau(self):
        return self.base.tau

    @property
    def h(self):
        return self.base.h

    def breakpoints(self) -> np.ndarray:
        base_knots = self.base.breakpoints()[1:-1] - self.shift
        knots = np.concatenate(
            [[-self.tau], base_knots, [-self.shift, 0.0]]
        )
        knots = np.sort(knots)
        keep = np.empty(knots.shape, dtype=bool)
        keep[0] = True
        keep[1:] = np.diff(knots) > _KNOT_RTOL * max(1.0, self.tau)
        knots = knots[keep]
        return knots[knots >= -self.tau - _KNOT_RTOL * max(1.0, self.tau)]

    def eval_many(self, thetas) -> np.ndarray:
        thetas = np.asarray(thetas, dtype=float)
        tol = _KNOT_RTOL * max(1.0, self.shift)
        over = thetas >= -self.shift - tol
        out = np.empty((len(thetas), self.dim))
        if np.any(over):
            r = np.clip((thetas[over] + self.shift) / self.shift, 0.0, 1.0)
            out[over] = _horner(self.overlay_coeffs, r)
        if not np.all(over):
            out[~over] = self.base.eval_many(thetas[~over] + self.shift)
        return out

    def eval(self, theta: float) -> np.ndarray:
        return self.eval_many(np.array([float(theta)]))[0]

    def __repr__(self):
        return f"StageView(shift={self.shift}, base={self.base!r})"


def norm_diff(state, reference, norm: str = "sup") -> float:
    """Distance between a history state (or view) and a reference callable.

    ``sup`` takes the max over 16 Chebyshev points per segment of the
    componentwise max difference; ``l1`` applies the 4-node Gauss-Legendre
    rule per segment to the 1-norm of the difference.  ``reference`` must be
    vectorised over an ndarray of offsets.
    """
    if norm not in ("sup", "l1"):
        raise ValueError(f"norm must be 'sup' or 'l1', got {norm!r}")
    n = round(state.tau / state.h)
    lefts = (np.arange(n) - n) * state.h
    s_nodes = _SUP_S if norm == "sup" else _L1_S
    thetas = (lefts[:, None] + state.h * s_nodes[None, :]).ravel()
    got = state.eval_many(thetas)
    want = _as_values(reference(thetas), len(thetas), state.dim, "reference")
    diff = np.abs(got - want)
    if norm == "sup":
        return float(diff.max())
    per_node = diff.sum(axis=1).reshape(n, len(s_nodes))
    return float((per_node @ _L1_W).sum() * state.h)
