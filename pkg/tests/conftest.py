"""Shared independent oracles for the test suite.

Every oracle here recomputes its answer from first principles (bisection,
dense factorizations, exhaustive enumeration, grid refinement) without
calling the library code paths under test.
"""

from __future__ import annotations

from itertools import combinations, product

import numpy as np
from numpy.typing import NDArray


def bisect_project(u: NDArray, w: NDArray, tau: float,
                   iters: int = 200) -> tuple[NDArray, float]:
    """Projection onto the weighted one-norm ball by threshold bisection."""
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if float(w @ np.abs(u)) <= tau:
        return u.copy(), 0.0
    lo, hi = 0.0, float(np.max(np.abs(u) / w))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        norm = float(w @ np.maximum(np.abs(u) - mid * w, 0.0))
        if norm > tau:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    return np.sign(u) * np.maximum(np.abs(u) - lam * w, 0.0), lam


def bisect_project_batch(U: NDArray, W: NDArray, taus: NDArray,
                         iters: int = 200) -> NDArray:
    """Row-wise bisection projection; rows may be padded with u=0, w=1."""
    U = np.asarray(U, dtype=float)
    W = np.asarray(W, dtype=float)
    taus = np.asarray(taus, dtype=float)
    AU = np.abs(U)
    lo = np.zeros(len(U))
    hi = np.max(AU / W, axis=1)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        norm = np.sum(W * np.maximum(AU - mid[:, None] * W, 0.0), axis=1)
        big = norm > taus
        lo = np.where(big, mid, lo)
        hi = np.where(big, hi, mid)
    lam = 0.5 * (lo + hi)
    lam = np.where(np.sum(W * AU, axis=1) <= taus, 0.0, lam)
    return np.sign(U) * np.maximum(AU - lam[:, None] * W, 0.0)


def project_rows(U: NDArray, w: NDArray, tau: float) -> NDArray:
    """Sort-based projection of many rows onto the same ball (fast path)."""
    U = np.asarray(U, dtype=float)
    AU = np.abs(U)
    feas = AU @ w <= tau
    ratios = AU / w
    order = np.argsort(ratios, axis=1)[:, ::-1]
    t = np.take_along_axis(ratios, order, 1)
    wu = np.take_along_axis(w * AU, order, 1)
    w2 = np.take_along_axis(np.broadcast_to(w * w, U.shape), order, 1)
    cwu = np.cumsum(wu, axis=1)
    cw2 = np.cumsum(w2, axis=1)
    lam_k = (cwu - tau) / cw2
    t_next = np.concatenate([t[:, 1:], np.zeros((len(U), 1))], axis=1)
    valid = (lam_k < t) & (lam_k >= t_next)
    k = np.where(valid.any(axis=1), valid.argmax(axis=1), U.shape[1] - 1)
    lam = np.maximum(lam_k[np.arange(len(U)), k], 0.0)
    lam = np.where(feas, 0.0, lam)
    return np.sign(U) * np.maximum(AU - lam[:, None] * w, 0.0)


def qp_oracle(a: NDArray, b: NDArray, tau: float, mu: float = 0.0,
              c: NDArray | None = None,
              w: NDArray | None = None) -> tuple[NDArray, float]:
    """Global minimum over the ball by exhaustive face enumeration (n <= 8).

    Candidates are the unconstrained stationary point (when feasible) and,
    for every support subset and sign pattern, the equality-constrained
    stationary point on that face, kept when its signs are consistent.
    """
    a = np.asarray(a, dtype=float)
    m, n = a.shape
    c = np.zeros(n) if c is None else np.asarray(c, dtype=float)
    w = np.ones(n) if w is None else np.asarray(w, dtype=float)
    H = a.T @ a + mu * np.eye(n)
    q = a.T @ b - c

    def fval(x: NDArray) -> float:
        r = a @ x - b
        return 0.5 * float(r @ r) + 0.5 * mu * float(x @ x) + float(c @ x)

    best_x = np.zeros(n)
    best_f = fval(best_x) if tau >= 0 else np.inf
    try:
        x = np.linalg.solve(H, q)
        if float(w @ np.abs(x)) <= tau * (1.0 + 1e-9):
            f = fval(x)
            if f < best_f:
                best_x, best_f = x, f
    except np.linalg.LinAlgError:
        pass
    for p in range(1, n + 1):
        for sup in combinations(range(n), p):
            sup = list(sup)
            Hs = H[np.ix_(sup, sup)]
            qs = q[sup]
            for signs in product((-1.0, 1.0), repeat=p):
                sg = np.array(signs)
                aw = sg * w[sup]
                kkt = np.zeros((p + 1, p + 1))
                kkt[:p, :p] = Hs
                kkt[:p, p] = aw
                kkt[p, :p] = aw
                rhs = np.concatenate([qs, [tau]])
                try:
                    sol = np.linalg.solve(kkt, rhs)
                except np.linalg.LinAlgError:
                    continue
                z = sol[:p]
                if np.any(sg * z < -1e-9 * max(tau, 1.0)):
                    continue
                x = np.zeros(n)
                x[sup] = z
                f = fval(x)
                if f < best_f:
                    best_x, best_f = x, f
    return best_x, best_f


def grid_lambda(z: NDArray, w: NDArray, tau: float, mu: float,
                iters: int = 200) -> float:
    """1-D minimizer of tau*lam + ||[z-lam*w]_+||^2 / 2mu by refining the
    sign change of its (monotone increasing) derivative."""
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)

    def deriv(lam: float) -> float:
        return tau - float(w @ np.maximum(z - lam * w, 0.0)) / mu

    if deriv(0.0) >= 0.0:
        return 0.0
    lo, hi = 0.0, max(float(np.max(z / w)), 1e-12)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if deriv(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def dense_bfgs_matrix(pairs, h0: float, dim: int) -> NDArray:
    """Dense inverse-Hessian approximation from recursive rank-two updates."""
    H = h0 * np.eye(dim)
    for s, y in pairs:
        rho = 1.0 / float(s @ y)
        V = np.eye(dim) - rho * np.outer(y, s)
        H = V.T @ H @ V + rho * np.outer(s, s)
    return H


def dense_face_basis(support, signs, w: NDArray, n: int,
                     tau: float = 1.0) -> NDArray:
    """Orthonormal basis of a face's difference hull via dense QR."""
    support = list(support)
    p = len(support)
    verts = np.zeros((n, p))
    for t, i in enumerate(support):
        verts[i, t] = signs[t] * tau / w[i]
    diffs = verts[:, 1:] - verts[:, [0]]
    Q, _ = np.linalg.qr(diffs)
    return Q


def subset_filter_oracle(I: set, J: set, r: NDArray, w: NDArray) -> set:
    """Entering-set oracle by exhaustion over subsets of J.

    The top-ratio staged entry always enters (it arrives exactly at its
    threshold); among the subsets containing it, the admitted set is the one
    maximizing the enlarged support's slope ratio.
    """
    base_a = float(sum(w[i] * r[i] for i in I))
    base_b = float(sum(w[i] * w[i] for i in I))
    lead = max(J, key=lambda j: r[j] / w[j])
    rest = sorted(J - {lead})
    best_slope, best_S = -np.inf, {lead}
    for mask in range(1 << len(rest)):
        S = {lead} | {rest[t] for t in range(len(rest)) if mask >> t & 1}
        a = base_a + sum(w[j] * r[j] for j in S)
        b = base_b + sum(w[j] * w[j] for j in S)
        if a / b > best_slope:
            best_slope, best_S = a / b, S
    return set(I) | best_S


def rand_ball(rng: np.random.Generator, n: int):
    """Random point, weights, and radius with the point usually infeasible."""
    u = rng.normal(size=n) * rng.uniform(0.5, 3.0)
    w = rng.uniform(0.2, 3.0, size=n)
    tau = float(rng.uniform(0.05, 1.2) * (w @ np.abs(u)))
    return u, w, max(tau, 1e-6)
