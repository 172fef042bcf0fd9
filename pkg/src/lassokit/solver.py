"""Projected-gradient and hybrid face/quasi-Newton solvers.

The projected-gradient method takes Barzilai-Borwein steps along the
projection path with a nonmonotone acceptance test.  The hybrid method
additionally maintains a limited-memory quasi-Newton model in the
coordinates of the current face whenever consecutive iterates share a face
and the negative gradient points into that face's self-projection cone;
model steps stay on the face (never growing its support) and use an exact
Wolfe step for the quadratic objective.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .arc import enumerate_arc
from .ball import FaceId, in_self_projection_cone, max_step_on_face, project
from .duality import StoppingOracle
from .facebasis import FaceBasis, apply_basis, apply_basis_adjoint, basis_init
from .linesearch import (
    HistoryBuffer,
    SearchResult,
    bb_step,
    face_wolfe_search,
    nonmonotone_armijo_backtrack,
    trajectory_search,
)
from .model import Iterate, LassoProblem, SolverOptions, evaluate

STATUS_OPTIMAL = "optimal"
STATUS_ITER_LIMIT = "iter_limit"
STATUS_LINESEARCH_FAILURE = "linesearch_failure"


@dataclass
class TraceRecord:
    iteration: int
    f: float
    gap: float
    step_kind: str  # "pg" | "qn" | "init"
    face_dim: int | None
    support: tuple[int, ...] | None = None


@dataclass
class SolverReport:
    x: NDArray
    f: float
    gap: float
    lam: float
    status: str
    iterations: int
    qn_steps: int
    pg_steps: int
    time_sec: float
    trace: list[TraceRecord] = field(default_factory=list)


class LbfgsModel:
    """Limited-memory quasi-Newton model in reduced face coordinates."""

    def __init__(self, memory: int, h0: float, curvature_eps: float = 1e-12):
        self.memory = memory
        self.h0 = h0
        self.curvature_eps = curvature_eps
        self.pairs: deque[tuple[NDArray, NDArray, float]] = deque(maxlen=memory)

    def update(self, s: NDArray, y: NDArray) -> bool:
        """Store the pair when curvature s'y is safely positive."""
        sy = float(s @ y)
        if sy <= self.curvature_eps * float(np.linalg.norm(s)) * float(
            np.linalg.norm(y)
        ):
            return False
        self.pairs.append((s.copy(), y.copy(), 1.0 / sy))
        return True

    def direction(self, g: NDArray) -> NDArray:
        """Two-loop recursion: -H g."""
        q = g.copy()
        alphas = []
        for s, y, rho in reversed(self.pairs):
            a = rho * float(s @ q)
            alphas.append(a)
            q -= a * y
        q *= self.h0
        for (s, y, rho), a in zip(self.pairs, reversed(alphas)):
            b = rho * float(y @ q)
            q += (a - b) * s
        return -q


def lbfgs_update(model: LbfgsModel, s: NDArray, y: NDArray) -> bool:
    return model.update(s, y)


def lbfgs_direction(model: LbfgsModel, g: NDArray) -> NDArray:
    return model.direction(g)


def _initial_bb(g: NDArray, options: SolverOptions) -> float:
    gmax = float(np.max(np.abs(g))) if len(g) else 0.0
    if gmax <= 0:
        return 1.0
    return min(max(1.0 / gmax, options.alpha_min), options.alpha_max)


def _pg_search(problem: LassoProblem, it: Iterate, alpha_bb: float,
               history: HistoryBuffer, options: SolverOptions) -> SearchResult:
    if options.line_search_mode == "trajectory":
        arc = enumerate_arc(it.x, -alpha_bb * it.g, problem.w, problem.tau)
        res = trajectory_search(problem, it, arc, history, options)
        if res.status != "failed":
            return res
    return nonmonotone_armijo_backtrack(problem, it, alpha_bb, history, options)


def _trivial_report(problem: LassoProblem, start: float) -> SolverReport:
    x = np.zeros(problem.shape[1])
    it = evaluate(problem, x)
    return SolverReport(x=x, f=it.f, gap=0.0, lam=0.0, status=STATUS_OPTIMAL,
                        iterations=0, qn_steps=0, pg_steps=0,
                        time_sec=time.perf_counter() - start)


def spg_solve(
    problem: LassoProblem,
    x0: NDArray | None = None,
    options: SolverOptions | None = None,
    oracle: StoppingOracle | None = None,
) -> SolverReport:
    return _solve(problem, x0, options, oracle, hybrid=False)


def hybrid_solve(
    problem: LassoProblem,
    x0: NDArray | None = None,
    options: SolverOptions | None = None,
    oracle: StoppingOracle | None = None,
) -> SolverReport:
    return _solve(problem, x0, options, oracle, hybrid=True)


def _face_basis_or_identity(face: FaceId, problem: LassoProblem) -> FaceBasis | None:
    """None encodes the identity basis used for the interior region."""
    if face.kind == "interior":
        return None
    return basis_init(face, problem.w, problem.shape[1])


def _reduce(basis: FaceBasis | None, v: NDArray) -> NDArray:
    return v.copy() if basis is None else apply_basis_adjoint(basis, v)


def _embed(basis: FaceBasis | None, v: NDArray) -> NDArray:
    return v.copy() if basis is None else apply_basis(basis, v)


def _solve(
    problem: LassoProblem,
    x0: NDArray | None,
    options: SolverOptions | None,
    oracle: StoppingOracle | None,
    hybrid: bool,
) -> SolverReport:
    start = time.perf_counter()
    options = options or SolverOptions()
    if problem.tau == 0:
        return _trivial_report(problem, start)
    m, n = problem.shape
    max_iter = options.max_iter if options.max_iter is not None else 10 * m
    if x0 is None:
        x0 = np.zeros(n)
    x, _ = project(np.asarray(x0, dtype=float), problem.w, problem.tau)
    it = evaluate(problem, x)
    oracle = oracle or StoppingOracle(problem, options.opt_tol)
    history = HistoryBuffer(options.history_len)
    history.push(it.f)
    trace: list[TraceRecord] = []
    qn_steps = pg_steps = 0
    status = STATUS_ITER_LIMIT

    def record(i: int, kind: str) -> None:
        if options.trace:
            face = it.face
            trace.append(TraceRecord(
                iteration=i, f=it.f, gap=oracle.gap, step_kind=kind,
                face_dim=None if face is None or face.kind == "interior"
                else face.dim,
                support=None if face is None or face.kind == "interior"
                else face.support,
            ))

    if oracle.update(it):
        record(0, "init")
        return SolverReport(x=it.x, f=it.f, gap=oracle.gap,
                            lam=oracle.lambda_best, status=STATUS_OPTIMAL,
                            iterations=0, qn_steps=0, pg_steps=0,
                            time_sec=time.perf_counter() - start, trace=trace)
    record(0, "init")

    alpha_bb = _initial_bb(it.g, options)
    model: LbfgsModel | None = None
    basis: FaceBasis | None = None
    model_face: FaceId | None = None
    last_sy: tuple[NDArray, NDArray] | None = None

    iteration = 0
    while iteration < max_iter:
        iteration += 1
        prev = it
        kind = "pg"

        stepped = False
        if hybrid and model is not None and len(model.pairs) > 0:
            g_red = _reduce(basis, it.g)
            d = _embed(basis, model.direction(g_red))
            if float(it.g @ d) < 0:
                bound = max_step_on_face(it.x, d, problem.w, problem.tau)
                res = face_wolfe_search(problem, it, d, bound, options)
                if res.status == "accepted":
                    it = res.iterate
                    history.reset(it.f)
                    qn_steps += 1
                    kind = "qn"
                    stepped = True
            if not stepped:
                model = None  # model step rejected; fall back to gradient

        if not stepped:
            res = _pg_search(problem, it, alpha_bb, history, options)
            if res.status == "stationary":
                # The projected path makes no progress: x is stationary.
                done = oracle.update(it)
                status = STATUS_OPTIMAL if done else STATUS_LINESEARCH_FAILURE
                record(iteration, "pg")
                break
            if res.status == "failed":
                status = STATUS_LINESEARCH_FAILURE
                record(iteration, "pg")
                break
            it = res.iterate
            history.push(it.f)
            pg_steps += 1

        s = it.x - prev.x
        y = it.g - prev.g
        last_sy = (s, y)
        alpha_bb = bb_step(s, y, options.alpha_min, options.alpha_max)

        done = oracle.update(it)
        record(iteration, kind)
        if done:
            status = STATUS_OPTIMAL
            break

        if hybrid:
            model, basis, model_face = _maintain_model(
                problem, prev, it, model, basis, model_face, last_sy, options
            )

    return SolverReport(
        x=it.x, f=it.f, gap=oracle.gap, lam=oracle.lambda_best, status=status,
        iterations=iteration, qn_steps=qn_steps, pg_steps=pg_steps,
        time_sec=time.perf_counter() - start, trace=trace,
    )


def _maintain_model(
    problem: LassoProblem,
    prev: Iterate,
    it: Iterate,
    model: LbfgsModel | None,
    basis: FaceBasis | None,
    model_face: FaceId | None,
    last_sy: tuple[NDArray, NDArray],
    options: SolverOptions,
) -> tuple[LbfgsModel | None, FaceBasis | None, FaceId | None]:
    """Keep, extend, or discard the face model after a step."""
    face = it.face
    same_face = prev.face == face
    usable = face is not None and (
        face.kind == "interior" or len(face.support) >= 2
    )
    cone_ok = usable and in_self_projection_cone(
        it.x, -it.g, problem.w, problem.tau
    )
    if not (same_face and cone_ok):
        return None, None, None
    if model is None or model_face != face:
        s, y = last_sy
        h0 = bb_step(s, y, options.alpha_min, options.alpha_max)
        model = LbfgsModel(options.memory, h0, options.curvature_eps)
        basis = _face_basis_or_identity(face, problem)
        model_face = face
    s_red = _reduce(basis, it.x - prev.x)
    y_red = _reduce(basis, it.g - prev.g)
    model.update(s_red, y_red)
    return model, basis, model_face
