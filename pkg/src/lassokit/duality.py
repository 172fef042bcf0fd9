"""Dual certificates, duality gaps, and the gap-based stopping oracle.

For mu = 0 the dual of the ball-constrained problem maximizes
y'b - tau*lam - 0.5*||y||^2 over ||A'y - c||_{1/w,inf} <= lam, and the
primal iterate supplies the feasible pair y = b - Ax.  For mu > 0 the
multiplier can instead be optimized exactly in O(n log n), which always
dominates the certificate read off the augmented residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .ball import project
from .model import Iterate, LassoProblem


def dual_weighted_inf_norm(z: NDArray, w: NDArray) -> float:
    """max_i |z_i| / w_i, the norm dual to the weighted one-norm."""
    return float(np.max(np.abs(z) / w)) if len(z) else 0.0


def projected_gradient_residual(problem: LassoProblem, iterate: Iterate) -> float:
    """||P(x - g) - x|| / max(1, ||g||); zero exactly at stationary points."""
    p, _ = project(iterate.x - iterate.g, problem.w, problem.tau)
    return float(np.linalg.norm(p - iterate.x)) / max(
        1.0, float(np.linalg.norm(iterate.g))
    )


@dataclass
class DualCertificate:
    lam: float
    objective: float

    def gap(self, f: float) -> float:
        return max(f - self.objective, 0.0)


def certificate_mu_zero(problem: LassoProblem, iterate: Iterate) -> DualCertificate:
    y = -iterate.r  # b - Ax
    z = problem.op.apply_adjoint(y) - problem.c
    lam = dual_weighted_inf_norm(z, problem.w)
    obj = float(y @ problem.b) - problem.tau * lam - 0.5 * float(y @ y)
    return DualCertificate(lam, obj)


def certificate_augmented(problem: LassoProblem, iterate: Iterate) -> DualCertificate:
    """Multiplier read off the residual of the stacked (A; sqrt(mu) I) system."""
    y = -iterate.r
    x = iterate.x
    z = problem.op.apply_adjoint(y) - problem.mu * x - problem.c
    lam = dual_weighted_inf_norm(z, problem.w)
    obj = (
        float(y @ problem.b)
        - problem.tau * lam
        - 0.5 * float(y @ y)
        - 0.5 * problem.mu * float(x @ x)
    )
    return DualCertificate(lam, obj)


def optimal_dual_lambda(z: NDArray, w: NDArray, tau: float, mu: float) -> float:
    """argmin over lam >= 0 of tau*lam + (1/2mu) * ||max(z - lam*w, 0)||^2.

    z must be nonnegative.  The derivative is piecewise linear and increasing
    in lam with breakpoints z_i / w_i; scan them once after sorting.
    """
    if mu <= 0:
        raise ValueError("optimized multiplier requires mu > 0")
    z = np.asarray(z, dtype=float)
    t = z / w
    order = np.argsort(t)
    t = t[order]
    wz = (w * z)[order]
    w2 = (w * w)[order]
    # Above breakpoint t_k the entries 0..k are inactive.
    swz = np.concatenate([[0.0], np.cumsum(wz)])
    sw2 = np.concatenate([[0.0], np.cumsum(w2)])
    total_wz, total_w2 = swz[-1], sw2[-1]

    def deriv(lam: float, k: int) -> float:
        # entries with index >= k active
        return tau - ((total_wz - swz[k]) - lam * (total_w2 - sw2[k])) / mu

    if deriv(0.0, 0) >= 0:
        return 0.0
    for k in range(len(t)):
        if deriv(t[k], k) >= 0:
            act_wz = total_wz - swz[k]
            act_w2 = total_w2 - sw2[k]
            return float((act_wz - mu * tau) / act_w2)
    return float(t[-1]) if len(t) else 0.0


def certificate_optimized(problem: LassoProblem, iterate: Iterate) -> DualCertificate:
    y = -iterate.r
    z = np.abs(problem.op.apply_adjoint(y) - problem.c)
    lam = optimal_dual_lambda(z, problem.w, problem.tau, problem.mu)
    slack = np.maximum(z - lam * problem.w, 0.0)
    obj = (
        float(y @ problem.b)
        - problem.tau * lam
        - 0.5 * float(y @ y)
        - float(slack @ slack) / (2.0 * problem.mu)
    )
    return DualCertificate(lam, obj)


def best_certificate(problem: LassoProblem, iterate: Iterate) -> DualCertificate:
    if problem.mu > 0:
        return certificate_optimized(problem, iterate)
    return certificate_mu_zero(problem, iterate)


def relative_gap(f: float, dual_obj: float) -> float:
    return max(f - dual_obj, 0.0) / max(f, 1e-3)


@dataclass
class BestPair:
    """Best primal value and best dual bound seen so far."""

    f: float = np.inf
    x: NDArray | None = None
    dual_obj: float = -np.inf
    lam: float = 0.0

    def update_primal(self, f: float, x: NDArray) -> None:
        if f < self.f:
            self.f = f
            self.x = x

    def update_dual(self, cert: DualCertificate) -> None:
        if cert.objective > self.dual_obj:
            self.dual_obj = cert.objective
            self.lam = cert.lam

    @property
    def gap_relative(self) -> float:
        return relative_gap(self.f, self.dual_obj)


class StoppingOracle:
    """Tracks best primal/dual pair and decides optimality by relative gap."""

    def __init__(self, problem: LassoProblem, opt_tol: float):
        self.problem = problem
        self.opt_tol = opt_tol
        self.best = BestPair()

    def update(self, iterate: Iterate) -> bool:
        cert = best_certificate(self.problem, iterate)
        self.best.update_primal(iterate.f, iterate.x)
        self.best.update_dual(cert)
        return self.best.gap_relative <= self.opt_tol

    @property
    def gap(self) -> float:
        return self.best.gap_relative

    @property
    def lambda_best(self) -> float:
        return self.best.lam
