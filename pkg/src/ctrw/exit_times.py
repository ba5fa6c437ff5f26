"""Mean exit time of a CTRW off a finite interval ``[a, b]``.

Starting at a jump epoch from ``x``, the mean exit time satisfies the
Fredholm equation of the second kind

    T(x) = mu + int_a^b h(x' - x) T(x') dx'

(one waiting time elapses, then the walk either lands outside and stops or
restarts from ``x'``).  An observer who arrives ``r`` after the last jump
waits the excess life instead of a full waiting time, which shifts the
answer by ``<tau_r> - mu``.

The equation is discretised by Nystrom's method on composite Gauss-Legendre
panels.  The kernel has a kink at ``x' = x``, so on the panel holding ``x``
the rule is split there and the solution is interpolated onto the two
sub-rules with the panel's Lagrange basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError, SolverError
from .models import CtrwProcess, WaitingTimeModel
from .renewal import ExcessLifeLaw, StationaryExcess, erlang_roots

__all__ = [
    "ExitProblem",
    "ExitTimeSolution",
    "solve_after_jump_met",
    "met_correction",
    "mean_exit_time",
]

PANEL_ORDER = 16


def _bary_weights(nodes):
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / diff.prod(axis=1)


def _lagrange_matrix(nodes, weights, y):
    """Matrix L with ``L @ f(nodes) = p(y)`` for the interpolant ``p``."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    d = y[:, None] - nodes[None, :]
    exact = d == 0
    d[exact] = 1.0
    c = weights[None, :] / d
    L = c / c.sum(axis=1, keepdims=True)
    rows = exact.any(axis=1)
    L[rows] = exact[rows].astype(float)
    return L


@dataclass(frozen=True)
class ExitProblem:
    """Interval ``[a, b]`` and the walk that has to leave it.

    ``n_nodes`` is rounded up to a whole number of 16-point panels.
    """

    proc: CtrwProcess
    a: float
    b: float
    n_nodes: int = 64

    def __post_init__(self):
        if not self.a < self.b:
            raise DomainError(f"need a < b, got [{self.a}, {self.b}]")
        if self.n_nodes < 16:
            raise DomainError(f"n_nodes must be >= 16, got {self.n_nodes}")

    @property
    def n_panels(self) -> int:
        return -(-self.n_nodes // PANEL_ORDER)


@dataclass(frozen=True)
class ExitTimeSolution:
    """Mean exit time after a jump, at the Nystrom nodes.

    Calling the object interpolates barycentrically on the panel holding
    each query point.
    """

    problem: ExitProblem
    x_nodes: np.ndarray
    T_after_jump: np.ndarray
    edges: np.ndarray = field(repr=False)
    interpolation: str = "barycentric-panel"

    @cached_property
    def _bary(self):
        return _bary_weights(self.x_nodes[:PANEL_ORDER] - self.edges[0])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any((x < self.problem.a) | (x > self.problem.b)):
            raise DomainError("query point outside the interval")
        flat = x.ravel()
        out = np.empty_like(flat)
        panel = np.clip(np.searchsorted(self.edges, flat, side="right") - 1, 0, len(self.edges) - 2)
        p = PANEL_ORDER
        for k in np.unique(panel):
            sel = panel == k
            nodes = self.x_nodes[k * p : (k + 1) * p]
            # the nodes are translates of panel 0, so the weights carry over
            L = _lagrange_matrix(nodes, self._bary, flat[sel])
            out[sel] = L @ self.T_after_jump[k * p : (k + 1) * p]
        return out.reshape(x.shape)

    def residual(self, x):
        """``mu + int h(x' - x) T(x') dx' - T(x)`` with ``T`` the interpolant."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        jump = self.problem.proc.jump
        mu = self.problem.proc.waiting.mean
        gx, gw = np.polynomial.legendre.leggauss(2 * PANEL_ORDER)
        out = np.empty_like(x)
        for i, xi in enumerate(x):
            cuts = np.unique(np.concatenate([self.edges, [xi]]))
            lo, hi = cuts[:-1], cuts[1:]
            y = (0.5 * (hi - lo)[:, None] * (gx[None, :] + 1.0) + lo[:, None]).ravel()
            w = (0.5 * (hi - lo)[:, None] * gw[None, :]).ravel()
            out[i] = mu + np.sum(w * jump.pdf(y - xi) * self(y)) - self(xi)
        return out


def solve_after_jump_met(problem: ExitProblem) -> ExitTimeSolution:
    """Nystrom solution of the after-jump mean-exit-time equation."""
    p = PANEL_ORDER
    edges = np.linspace(problem.a, problem.b, problem.n_panels + 1)
    gx, gw = np.polynomial.legendre.leggauss(p)
    half = 0.5 * np.diff(edges)
    x = (half[:, None] * (gx[None, :] + 1.0) + edges[:-1, None]).ravel()
    w = (half[:, None] * gw[None, :]).ravel()
    n = x.size
    h = problem.proc.jump.pdf

    A = h(x[None, :] - x[:, None]) * w[None, :]
    bary = _bary_weights(x[:p])
    for k in range(problem.n_panels):
        sl = slice(k * p, (k + 1) * p)
        nodes = x[sl]
        lo, hi = edges[k], edges[k + 1]
        for i in range(k * p, (k + 1) * p):
            xi = x[i]
            row = np.zeros(p)
            for left, right in ((lo, xi), (xi, hi)):
                hw = 0.5 * (right - left)
                y = hw * (gx + 1.0) + left
                L = _lagrange_matrix(nodes, bary, y)
                row += (hw * gw * h(y - xi)) @ L
            A[i, sl] = row

    M = np.eye(n) - A
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e12:
        raise SolverError(f"exit-time system is ill-conditioned (cond = {cond:.2e})")
    try:
        T = np.linalg.solve(M, np.full(n, problem.proc.waiting.mean))
    except np.linalg.LinAlgError as exc:
        raise SolverError(str(exc)) from None
    return ExitTimeSolution(problem, x, T, edges)


def met_correction(waiting: WaitingTimeModel, r: float) -> float:
    """``<tau_r> - mu``: shift of the mean exit time for an observer at lag ``r``.

    ``r = inf`` uses the stationary excess life, which goes beyond the
    lag-from-a-jump setting the correction is derived in.
    """
    r = float(r)
    if not r >= 0:
        raise DomainError(f"observation lag must be >= 0, got {r}")
    if r == 0:
        return 0.0
    if np.isinf(r):
        return StationaryExcess(waiting).mean() - waiting.mean
    nu = waiting.integer_shape
    if nu is not None:
        lam = waiting.rate
        eps, b = erlang_roots(nu, lam)
        s = np.sum(eps[:-1] / (lam * (eps[:-1] - 1.0)) * np.exp(b[:-1] * r)).real
        return (1.0 - nu) / (2.0 * lam) + float(s)
    return ExcessLifeLaw(waiting, r).mean() - waiting.mean


def mean_exit_time(problem: ExitProblem, x_r: float, r: float = 0.0, solution=None) -> float:
    """Mean time to leave ``[a, b]`` from ``x_r``, observed ``r`` after a jump."""
    if not problem.a <= x_r <= problem.b:
        raise DomainError(f"x_r = {x_r} outside [{problem.a}, {problem.b}]")
    solution = solution or solve_after_jump_met(problem)
    return float(solution(x_r)) + met_correction(problem.proc.waiting, r)
