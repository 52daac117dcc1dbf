"""Exponential Runge-Kutta steps and constant-step time integration.

One step advances the full history state: the shift semigroup translates the
old history by h while the stage and update rows add polynomial corrections
supported on the newest interval.  Written out, a coefficient term
w * phi_k(c_i h A0) applied to a stage value F contributes

    DDE:  head  h*w/k! * F,    tail  h*w * (c_i h + theta)^k / ((c_i h)^k k!) * F
    RE:   density  h*w * (c_i h + theta)^{k-1} / ((c_i h)^k (k-1)!) * F

on [-c_i h, 0] and nothing older, which in the local segment coordinate is a
plain monomial.  Stages are therefore lightweight views (shift + one overlay
polynomial) and the appended segment is stored exactly; only the semilinear
path, whose segments involve matrix exponentials, interpolates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .history import DEGREE, HistorySegment, HistoryState, StageView
from .phi import phi_matrix_action

__all__ = [
    "Problem",
    "CoupledProblem",
    "MeshError",
    "IntegrationDiverged",
    "step_dde",
    "step_re",
    "step_semilinear_dde",
    "step_coupled",
    "initial_state",
    "integrate",
    "observed_values",
    "TrajectoryRecorder",
]

_NCOEF = DEGREE + 1

# Chebyshev-Lobatto nodes on [0, 1] and the matching interpolation matrix,
# used to project semilinear segments (matrix-exponential profiles) onto the
# cubic storage format.  Endpoint nodes keep head continuity exact.
_LOBATTO_S = np.array([0.0, 0.25, 0.75, 1.0])
_LOBATTO_VINV = np.linalg.inv(np.vander(_LOBATTO_S, _NCOEF, increasing=True))


class MeshError(ValueError):
    """A step size, horizon or delay bound violates the mesh constraints."""


class IntegrationDiverged(RuntimeError):
    """A stage or update produced a non-finite value."""

    def __init__(self, message, step_index=None, stage_index=None):
        super().__init__(message)
        self.step_index = step_index
        self.stage_index = stage_index


@dataclass(frozen=True)
class Problem:
    """A delay or renewal equation with right-hand side F(t, history).

    ``rhs`` receives the current time and an evaluable history view (with
    ``eval``/``eval_many`` and, for DDE kinds, ``head``) and returns the
    d-dimensional value.  ``distributed_limits`` lists window offsets of
    distributed-delay terms; they must land on the mesh for any step size
    used.  ``L`` is the stiff linear part of a semilinear DDE.
    """

    kind: str
    dim: int
    tau: float
    rhs: Callable
    phi0: Callable
    name: str = ""
    L: np.ndarray | None = None
    exact: Callable | None = None
    distributed_limits: tuple[float, ...] = ()
    component_names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("dde", "re", "semilinear_dde"):
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")
        if self.kind == "semilinear_dde":
            if self.L is None:
                raise ValueError("semilinear problems require the matrix L")
            L = np.asarray(self.L, dtype=float)
            if L.shape != (self.dim, self.dim):
                raise ValueError(f"L must have shape ({self.dim}, {self.dim})")
            object.__setattr__(self, "L", L)
        for lim in self.distributed_limits:
            if not -self.tau - 1e-12 <= lim <= 1e-12:
                raise ValueError(f"distributed limit {lim} outside [-tau, 0]")
        if not self.component_names:
            names = ("x",) if self.dim == 1 else tuple(
                f"x{i + 1}" for i in range(self.dim)
            )
            object.__setattr__(self, "component_names", names)


@dataclass(frozen=True)
class CoupledProblem:
    """A renewal equation coupled to a delay differential equation.

    ``rhs`` receives (t, re_view, dde_view) and returns the pair of values
    (f_re, f_dde); both components share the delay horizon, the mesh and the
    method.
    """

    dim_re: int
    dim_dde: int
    tau: float
    rhs: Callable
    phi0_re: Callable
    phi0_dde: Callable
    name: str = ""
    distributed_limits: tuple[float, ...] = ()
    component_names: tuple[str, ...] = ()

    kind = "coupled"

    def __post_init__(self):
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")
        if not self.component_names:
            names = tuple(f"b{i + 1}" for i in range(self.dim_re)) + tuple(
                f"x{i + 1}" for i in range(self.dim_dde)
            )
            object.__setattr__(self, "component_names", names)


def _as_rhs_value(raw, dim: int, what: str) -> np.ndarray:
    val = np.asarray(raw, dtype=float)
    if val.ndim == 0 and dim == 1:
        val = val.reshape(1)
    if val.shape != (dim,):
        raise ValueError(f"{what} returned shape {val.shape}, expected ({dim},)")
    return val


def _require_finite(val: np.ndarray, stage: int, what: str):
    if not np.all(np.isfinite(val)):
        raise IntegrationDiverged(
            f"non-finite {what} at stage {stage}", stage_index=stage
        )


def _check_mesh(state, h: float):
    if abs(state.h - h) > 1e-12 * max(1.0, h):
        raise MeshError(f"state mesh width {state.h} does not match step {h}")


def _dde_accumulate(coeffs: np.ndarray, combo, fval: np.ndarray, h: float):
    # w * phi_k term -> h*w/k! on the r^k monomial (r local coordinate).
    for k, _, w in combo.terms:
        coeffs[:, k] += (h * w / math.factorial(k)) * fval


def _re_accumulate(coeffs: np.ndarray, combo, fval: np.ndarray, scale: float):
    # w * phi_k term -> scale*w/(k-1)! on the r^{k-1} monomial; scale is
    # 1/c_i for stage rows and 1 for the update row.
    for k, _, w in combo.terms:
        coeffs[:, k - 1] += (scale * w / math.factorial(k - 1)) * fval


def _dde_stage_values(problem, tab, state, t_n, h, rhs=None):
    """Evaluate all stage values F_i for a DDE step; returns the list."""
    rhs = rhs or problem.rhs
    y = state.head
    fvals = []
    for i in range(tab.nu):
        ci = tab.c[i]
        if i == 0:
            view = state
        else:
            coeffs = np.zeros((state.dim, _NCOEF))
            coeffs[:, 0] = y
            for j in range(i):
                _dde_accumulate(coeffs, tab.a[i][j], fvals[j], h)
            view = StageView(state, ci * h, coeffs, head=coeffs.sum(axis=1))
        fval = _as_rhs_value(rhs(t_n + ci * h, view), state.dim, "rhs")
        _require_finite(fval, i + 1, "stage value")
        fvals.append(fval)
    return fvals


def step_dde(problem, tab, state, t_n: float, h: float) -> HistoryState:
    """One explicit exponential RK step for a plain DDE state."""
    _check_mesh(state, h)
    fvals = _dde_stage_values(problem, tab, state, t_n, h)
    coeffs = np.zeros((state.dim, _NCOEF))
    coeffs[:, 0] = state.head
    for i in range(tab.nu):
        _dde_accumulate(coeffs, tab.b[i], fvals[i], h)
    y_new = coeffs.sum(axis=1)
    _require_finite(y_new, tab.nu, "update")
    return state.shift_append(HistorySegment(-h, h, coeffs), head=y_new)


def _re_stage_values(problem, tab, state, t_n, h, rhs=None):
    rhs = rhs or problem.rhs
    fvals = []
    for i in range(tab.nu):
        ci = tab.c[i]
        if i == 0:
            view = state
        else:
            coeffs = np.zeros((state.dim, _NCOEF))
            for j in range(i):
                _re_accumulate(coeffs, tab.a[i][j], fvals[j], 1.0 / ci)
            view = StageView(state, ci * h, coeffs)
        fval = _as_rhs_value(rhs(t_n + ci * h, view), state.dim, "rhs")
        _require_finite(fval, i + 1, "stage value")
        fvals.append(fval)
    return fvals


def step_re(problem, tab, state, t_n: float, h: float) -> HistoryState:
    """One explicit exponential RK step for a renewal-equation state.

    The density state eta is advanced: its tail is the pure shift and the
    new segment carries the update-row polynomial.  The integrated state is
    derived from eta by :meth:`HistoryState.j_integrate`, which reproduces
    the scheme's own recursion for it exactly.
    """
    _check_mesh(state, h)
    fvals = _re_stage_values(problem, tab, state, t_n, h)
    coeffs = np.zeros((state.dim, _NCOEF))
    for i in range(tab.nu):
        _re_accumulate(coeffs, tab.b[i], fvals[i], 1.0)
    return state.shift_append(HistorySegment(-h, h, coeffs))


def _expm(M: np.ndarray) -> np.ndarray:
    if not M.any():
        return np.eye(M.shape[0])
    return scipy.linalg.expm(M)


def _semilinear_profile(L, y, combos_fvals, g: float, h: float) -> np.ndarray:
    """Sample e^{r g L} y + sum h*w*r^k phi_k(r g L) F at the Lobatto nodes.

    Returns samples of shape (nodes, dim); the r = 1 node is the exact head
    value of the stage or update.
    """
    d = y.shape[0]
    samples = np.empty((len(_LOBATTO_S), d))
    for q, r in enumerate(_LOBATTO_S):
        if r == 0.0:
            samples[q] = y  # e^0 y, and every r^k phi_k term vanishes
            continue
        M = r * g * L
        val = _expm(M) @ y
        for combo, fval in combos_fvals:
            for k, _, w in combo.terms:
                val = val + (h * w * r**k) * phi_matrix_action(k, M, fval)
        samples[q] = val
    return samples


def step_semilinear_dde(problem, tab, state, t_n: float, h: float) -> HistoryState:
    """One step for x' = L x + G(t, x_t) with the linear part treated exactly.

    Heads use exact matrix phi actions; segment profiles (which involve
    e^{(h+theta)L}) are sampled at 4 Chebyshev-Lobatto points and stored as
    their cubic interpolant, an O(h^4) representation error below the order
    of any shipped method.  With L = 0 the step reduces to :func:`step_dde`.
    """
    _check_mesh(state, h)
    if problem.L is None:
        raise ValueError("semilinear step requires the matrix L")
    L = problem.L
    y = state.head
    fvals = []
    for i in range(tab.nu):
        ci = tab.c[i]
        if i == 0:
            view = state
        else:
            pairs = [(tab.a[i][j], fvals[j]) for j in range(i)]
            samples = _semilinear_profile(L, y, pairs, ci * h, h)
            coeffs = samples.T @ _LOBATTO_VINV.T
            view = StageView(state, ci * h, coeffs, head=samples[-1])
        fval = _as_rhs_value(problem.rhs(t_n + ci * h, view), state.dim, "rhs")
        _require_finite(fval, i + 1, "stage value")
        fvals.append(fval)
    pairs = list(zip(tab.b, fvals))
    samples = _semilinear_profile(L, y, pairs, h, h)
    y_new = samples[-1]
    _require_finite(y_new, tab.nu, "update")
    coeffs = samples.T @ _LOBATTO_VINV.T
    return state.shift_append(HistorySegment(-h, h, coeffs), head=y_new)


def step_coupled(problem, tab, state_re, state_dde, t_n: float, h: float):
    """One joint step for a coupled RE/DDE pair sharing mesh and tableau.

    Each stage builds the RE and DDE views together and feeds both to the
    problem's rhs, which returns the (f_re, f_dde) pair.
    """
    _check_mesh(state_re, h)
    _check_mesh(state_dde, h)
    y = state_dde.head
    f_re_vals, f_dde_vals = [], []
    for i in range(tab.nu):
        ci = tab.c[i]
        if i == 0:
            view_re, view_dde = state_re, state_dde
        else:
            re_coeffs = np.zeros((state_re.dim, _NCOEF))
            dde_coeffs = np.zeros((state_dde.dim, _NCOEF))
            dde_coeffs[:, 0] = y
            for j in range(i):
                _re_accumulate(re_coeffs, tab.a[i][j], f_re_vals[j], 1.0 / ci)
                _dde_accumulate(dde_coeffs, tab.a[i][j], f_dde_vals[j], h)
            view_re = StageView(state_re, ci * h, re_coeffs)
            view_dde = StageView(
                state_dde, ci * h, dde_coeffs, head=dde_coeffs.sum(axis=1)
            )
        f_re, f_dde = problem.rhs(t_n + ci * h, view_re, view_dde)
        f_re = _as_rhs_value(f_re, state_re.dim, "rhs (RE component)")
        f_dde = _as_rhs_value(f_dde, state_dde.dim, "rhs (DDE component)")
        _require_finite(f_re, i + 1, "stage value")
        _require_finite(f_dde, i + 1, "stage value")
        f_re_vals.append(f_re)
        f_dde_vals.append(f_dde)
    re_coeffs = np.zeros((state_re.dim, _NCOEF))
    dde_coeffs = np.zeros((state_dde.dim, _NCOEF))
    dde_coeffs[:, 0] = y
    for i in range(tab.nu):
        _re_accumulate(re_coeffs, tab.b[i], f_re_vals[i], 1.0)
        _dde_accumulate(dde_coeffs, tab.b[i], f_dde_vals[i], h)
    y_new = dde_coeffs.sum(axis=1)
    _require_finite(y_new, tab.nu, "update")
    new_re = state_re.shift_append(HistorySegment(-h, h, re_coeffs))
    new_dde = state_dde.shift_append(
        HistorySegment(-h, h, dde_coeffs), head=y_new
    )
    return new_re, new_dde


def _check_multiple(value: float, h: float, what: str):
    ratio = value / h
    if abs(ratio - round(ratio)) > 1e-9 * max(1.0, abs(ratio)):
        raise MeshError(f"{what} = {value} is not an integer multiple of h = {h}")


def initial_state(problem, h: float):
    """Project the problem's initial history onto a mesh of width h."""
    _check_multiple(problem.tau, h, "tau")
    for lim in problem.distributed_limits:
        if lim != 0.0:
            _check_multiple(lim, h, "distributed delay bound")
    if problem.kind == "coupled":
        re0 = HistoryState.from_callable(
            problem.phi0_re, "re", problem.dim_re, problem.tau, h
        )
        dde0 = HistoryState.from_callable(
            problem.phi0_dde, "dde", problem.dim_dde, problem.tau, h
        )
        return re0, dde0
    kind = "re" if problem.kind == "re" else "dde"
    return HistoryState.from_callable(problem.phi0, kind, problem.dim, problem.tau, h)


def step(problem, tab, state, t_n: float, h: float):
    """Dispatch one step on the problem kind; ``state`` is a pair for
    coupled problems."""
    if problem.kind == "dde":
        return step_dde(problem, tab, state, t_n, h)
    if problem.kind == "re":
        return step_re(problem, tab, state, t_n, h)
    if problem.kind == "semilinear_dde":
        return step_semilinear_dde(problem, tab, state, t_n, h)
    if problem.kind == "coupled":
        return step_coupled(problem, tab, state[0], state[1], t_n, h)
    raise ValueError(f"unknown problem kind {problem.kind!r}")


def observed_values(state) -> np.ndarray:
    """Per-step observable: head for DDEs, left limit at 0 for REs,
    concatenation of both for coupled pairs."""
    if isinstance(state, tuple):
        return np.concatenate([observed_values(s) for s in state])
    if state.kind == "dde":
        return np.asarray(state.head)
    return state.eval(0.0)


def integrate(problem, tab, h: float, T: float, observer=None, state0=None):
    """Advance from t = 0 to t = T in N = T/h constant steps.

    T and tau must be integer multiples of h, as must any distributed-delay
    bounds the problem declares.  ``observer``, if given, is called exactly
    once per step, in order, as observer(t_{n+1}, values) with the observable
    of :func:`observed_values`.  Returns the final state (or pair).  A
    non-finite stage or update aborts with :class:`IntegrationDiverged`
    carrying the step and stage indices.
    """
    h = float(h)
    T = float(T)
    if h <= 0.0:
        raise MeshError("step size must be positive")
    _check_multiple(T, h, "T")
    n_steps = int(round(T / h))
    state = initial_state(problem, h) if state0 is None else state0
    for n in range(n_steps):
        try:
            state = step(problem, tab, state, n * h, h)
        except IntegrationDiverged as exc:
            raise IntegrationDiverged(
                f"integration aborted at step {n} (t = {n * h}), "
                f"stage {exc.stage_index}: {exc}",
                step_index=n,
                stage_index=exc.stage_index,
            ) from None
        if observer is not None:
            observer((n + 1) * h, observed_values(state))
    return state


class TrajectoryRecorder:
    """Observer collecting every ``sample_every``-th step (and t = 0 if the
    initial observable is passed at construction)."""

    def __init__(self, sample_every: int = 1, t0=None, values0=None):
        if sample_every < 1:
            raise ValueError("sample_every must be >= 1")
        self.sample_every = int(sample_every)
        self._count = 0
        self.times: list[float] = []
        self.values: list[np.ndarray] = []
        if values0 is not None:
            self.times.append(0.0 if t0 is None else float(t0))
            self.values.append(np.asarray(values0, dtype=float))

    def __call__(self, t: float, values: np.ndarray):
        self._count += 1
        if self._count % self.sample_every == 0:
            self.times.append(float(t))
            self.values.append(np.asarray(values, dtype=float))

    def as_arrays(self):
        return np.asarray(self.times), np.asarray(self.values)
