"""Problem containers, operator abstraction, and objective evaluation.

The objective is f(x) = 0.5*||Ax - b||^2 + 0.5*mu*||x||^2 + c'x minimized
over the weighted one-norm ball of radius tau.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .ball import FaceId, face_of


class DimensionMismatchError(ValueError):
    """Raised when vector or operator dimensions disagree."""


class LinearOperator:
    """Matrix-free linear operator with forward, adjoint, and column access."""

    def __init__(
        self,
        shape: tuple[int, int],
        apply: Callable[[NDArray], NDArray],
        apply_adjoint: Callable[[NDArray], NDArray],
        column: Callable[[int], NDArray] | None = None,
    ):
        self.shape = shape
        self._apply = apply
        self._adjoint = apply_adjoint
        self._column = column

    def apply(self, x: NDArray) -> NDArray:
        if len(x) != self.shape[1]:
            raise DimensionMismatchError(
                f"operator expects length {self.shape[1]}, got {len(x)}"
            )
        return self._apply(x)

    def apply_adjoint(self, y: NDArray) -> NDArray:
        if len(y) != self.shape[0]:
            raise DimensionMismatchError(
                f"adjoint expects length {self.shape[0]}, got {len(y)}"
            )
        return self._adjoint(y)

    def column(self, i: int) -> NDArray:
        if self._column is not None:
            return self._column(i)
        e = np.zeros(self.shape[1])
        e[i] = 1.0
        return self._apply(e)

    def __matmul__(self, x: NDArray) -> NDArray:
        return self.apply(x)


class DenseOperator(LinearOperator):
    """Operator backed by a dense ndarray."""

    def __init__(self, a: NDArray):
        a = np.asarray(a, dtype=float)
        if a.ndim != 2:
            raise DimensionMismatchError("dense operator requires a 2-d array")
        self.a = a
        super().__init__(
            a.shape,
            lambda x: a @ x,
            lambda y: a.T @ y,
            lambda i: a[:, i],
        )


@dataclass
class LassoProblem:
    """Quadratic objective over a weighted one-norm ball of radius tau."""

    op: LinearOperator
    b: NDArray
    tau: float
    w: NDArray | None = None
    mu: float = 0.0
    c: NDArray | None = None

    def __post_init__(self):
        m, n = self.op.shape
        self.b = np.asarray(self.b, dtype=float)
        if len(self.b) != m:
            raise DimensionMismatchError(f"b has length {len(self.b)}, expected {m}")
        if self.w is None:
            self.w = np.ones(n)
        else:
            self.w = np.asarray(self.w, dtype=float)
            if len(self.w) != n:
                raise DimensionMismatchError(f"w has length {len(self.w)}, expected {n}")
            if np.any(self.w <= 0):
                raise ValueError("weights must be strictly positive")
        if self.c is None:
            self.c = np.zeros(n)
        else:
            self.c = np.asarray(self.c, dtype=float)
            if len(self.c) != n:
                raise DimensionMismatchError(f"c has length {len(self.c)}, expected {n}")
        if self.tau < 0:
            raise ValueError("radius tau must be nonnegative")
        if self.mu < 0:
            raise ValueError("quadratic regularizer mu must be nonnegative")

    @property
    def shape(self) -> tuple[int, int]:
        return self.op.shape


@dataclass
class Iterate:
    """Point with cached residual r = Ax - b, gradient, value, and face."""

    x: NDArray
    r: NDArray
    g: NDArray
    f: float
    face: FaceId | None


def objective_value(problem: LassoProblem, x: NDArray) -> tuple[float, NDArray]:
    """Objective and residual at x; one forward product."""
    r = problem.op.apply(x) - problem.b
    f = 0.5 * float(r @ r) + float(problem.c @ x)
    if problem.mu > 0:
        f += 0.5 * problem.mu * float(x @ x)
    return f, r


def evaluate(problem: LassoProblem, x: NDArray, r: NDArray | None = None) -> Iterate:
    """Full iterate at x: residual, gradient A'r + mu*x + c, value, face."""
    x = np.asarray(x, dtype=float)
    if r is None:
        f, r = objective_value(problem, x)
    else:
        f = 0.5 * float(r @ r) + float(problem.c @ x)
        if problem.mu > 0:
            f += 0.5 * problem.mu * float(x @ x)
    g = problem.op.apply_adjoint(r) + problem.c
    if problem.mu > 0:
        g = g + problem.mu * x
    face = face_of(x, problem.w, problem.tau) if problem.tau > 0 else None
    return Iterate(x=x, r=r, g=g, f=f, face=face)


class RayObjective:
    """Objective along x + alpha*d, O(1) per alpha after one forward product."""

    def __init__(self, problem: LassoProblem, x: NDArray, d: NDArray,
                 r: NDArray | None = None):
        if r is None:
            r = problem.op.apply(x) - problem.b
        ad = problem.op.apply(d)
        mu = problem.mu
        self.c2 = 0.5 * (float(ad @ ad) + mu * float(d @ d))
        self.c1 = float(r @ ad) + mu * float(x @ d) + float(problem.c @ d)
        self.c0 = 0.5 * float(r @ r) + 0.5 * mu * float(x @ x) + float(problem.c @ x)

    def __call__(self, alpha: float) -> float:
        return self.c0 + alpha * (self.c1 + alpha * self.c2)

    def derivative(self, alpha: float) -> float:
        return self.c1 + 2.0 * alpha * self.c2


def objective_along_ray(problem: LassoProblem, x: NDArray, d: NDArray,
                        alpha: float) -> float:
    return RayObjective(problem, x, d)(alpha)


@dataclass
class SolverOptions:
    """Tuning knobs shared by the projected-gradient and hybrid solvers."""

    opt_tol: float = 1e-6
    max_iter: int | None = None  # defaults to 10*m at solve time
    history_len: int = 10  # nonmonotone window M
    memory: int = 8  # quasi-Newton pair budget N
    alpha_min: float = 1e-10
    alpha_max: float = 1e10
    suff_decrease: float = 1e-4  # Armijo gamma
    backtrack_factor: float = 0.5
    wolfe_suff: float = 1e-4  # gamma_1
    wolfe_curv: float = 0.9  # gamma_2
    line_search_mode: str = "backtracking"  # or "trajectory"
    trajectory_scan: str = "first_local"  # or "global"
    max_backtracks: int = 50
    curvature_eps: float = 1e-12
    trace: bool = False

    def __post_init__(self):
        if not (0 < self.alpha_min <= self.alpha_max):
            raise ValueError("need 0 < alpha_min <= alpha_max")
        if not (0 < self.suff_decrease < 1 and 0 < self.backtrack_factor < 1):
            raise ValueError("Armijo parameters must lie in (0, 1)")
        if not (0 < self.wolfe_suff < 0.5 < self.wolfe_curv < 1):
            raise ValueError("need 0 < wolfe_suff < 1/2 < wolfe_curv < 1")
        if self.history_len < 1 or self.memory < 1:
            raise ValueError("history and memory lengths must be positive")
        if self.line_search_mode not in ("backtracking", "trajectory"):
            raise ValueError(f"unknown line_search_mode {self.line_search_mode!r}")
        if self.trajectory_scan not in ("first_local", "global"):
            raise ValueError(f"unknown trajectory_scan {self.trajectory_scan!r}")
