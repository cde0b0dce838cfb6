"""Least-distance projection onto polyhedra: a dual active-set solver plus oracles.

The projection problem min ||y - x0||^2 over {G y <= h, A y = b} is solved by
eliminating the equalities onto their affine subspace and then running a dual
active-set iteration on the reduced inequality-only problem.  Because the
Hessian of the least-distance objective is the identity, every subproblem is a
projection onto an affine set and can be solved with small dense least-squares
factorizations; the final active set is re-solved once more to certify the
KKT conditions at full precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sets import LinearConstraintSystem, as_point

__all__ = [
    "QpSolution",
    "InfeasibleSystem",
    "MaxPivots",
    "UnsupportedShape",
    "least_distance",
    "oracle_project",
    "simplex_projection",
]

DEFAULT_TOL = 1e-10


class InfeasibleSystem(RuntimeError):
    """The constraint system has no feasible point."""


class MaxPivots(RuntimeError):
    """Active-set pivot guard exceeded (cycling or severe ill-conditioning)."""


class UnsupportedShape(ValueError):
    """``oracle_project`` has no brute-force route for this system."""


@dataclass
class QpSolution:
    """Certified projection result.

    ``active_set`` lists the inequality rows tight at the solution in the
    order the pivoting visited them, which makes it directly reusable as a
    warm start.  ``kkt_residual`` is the largest violation among stationarity,
    primal feasibility, dual feasibility, and complementarity.
    """

    point: np.ndarray
    active_set: list[int]
    iterations: int
    kkt_residual: float


def _affine_basis(A: np.ndarray, b: np.ndarray):
    """Minimum-norm particular solution of ``A y = b`` and an orthonormal null basis."""
    y_part, _, _, _ = np.linalg.lstsq(A, b, rcond=None)
    scale = max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)
    if float(np.max(np.abs(A @ y_part - b))) > 1e-8 * scale:
        raise InfeasibleSystem("equality constraints are inconsistent")
    u, s, vt = np.linalg.svd(A)
    if s.size:
        rank = int(np.sum(s > s[0] * max(A.shape) * np.finfo(float).eps))
    else:
        rank = 0
    return y_part, vt[rank:].T


def _tight_solve(M: np.ndarray, d: np.ndarray, w0: np.ndarray, active: list[int]):
    """Projection of ``w0`` onto the affine set where the active rows hold with equality."""
    if not active:
        return w0.copy(), []
    N = M[active].T
    gram = N.T @ N
    rhs = M[active] @ w0 - d[active]
    lam, _, _, _ = np.linalg.lstsq(gram, rhs, rcond=None)
    return w0 - N @ lam, [float(v) for v in lam]


def _dual_active_set(M, d, w0, tol, max_pivots, warm_start):
    """Dual active-set loop for min ||w - w0|| s.t. M w <= d (rows unit-normalized)."""
    m = M.shape[0]
    pivots = 0
    active: list[int] = []
    lam: list[float] = []
    y = w0.copy()

    if warm_start:
        active = list(dict.fromkeys(i for i in warm_start if 0 <= i < m))
        while True:
            pivots += 1
            if pivots > max_pivots:
                raise MaxPivots("pivot guard exceeded while warm starting")
            y, lam = _tight_solve(M, d, w0, active)
            if not lam or min(lam) >= -tol:
                break
            del active[int(np.argmin(lam))]

    while True:
        slack = M @ y - d if m else np.zeros(0)
        if active:
            slack[active] = -np.inf
        worst = int(np.argmax(slack)) if m else -1
        if worst < 0 or slack[worst] <= tol:
            if active:
                y2, lam2 = _tight_solve(M, d, w0, active)
                if lam2 and min(lam2) < -tol:
                    pivots += 1
                    if pivots > max_pivots:
                        raise MaxPivots("pivot guard exceeded while polishing")
                    del active[int(np.argmin(lam2))]
                    y, lam = _tight_solve(M, d, w0, active)
                    continue
                # the exact tight solve may step off an inactive row when the
                # active rows are nearly dependent; if so, resume pivoting
                slack2 = M @ y2 - d
                slack2[active] = -np.inf
                if float(np.max(slack2)) > tol:
                    pivots += 1
                    if pivots > max_pivots:
                        raise MaxPivots("pivot guard exceeded while polishing")
                    y, lam = y2, lam2
                    continue
                y, lam = y2, lam2
            return y, active, [max(v, 0.0) for v in lam], pivots

        # drive constraint `worst` to feasibility, dropping blockers as needed
        lam_new = 0.0
        while True:
            pivots += 1
            if pivots > max_pivots:
                raise MaxPivots(f"pivot guard exceeded after {pivots} pivots")
            row = M[worst]
            if active:
                N = M[active].T
                r, _, _, _ = np.linalg.lstsq(N, row, rcond=None)
                zdir = row - N @ r
            else:
                r = np.zeros(0)
                zdir = row.copy()
            zsq = float(zdir @ zdir)
            s_cur = float(row @ y - d[worst])
            t_full = s_cur / zsq if zsq > 1e-18 else np.inf
            t_drop, blocker = np.inf, -1
            for i, lam_i in enumerate(lam):
                if r[i] > 1e-12 and lam_i / r[i] < t_drop:
                    t_drop, blocker = lam_i / r[i], i
            t = min(t_full, t_drop)
            if not np.isfinite(t):
                raise InfeasibleSystem("unbounded dual step: no feasible point exists")
            t = max(t, 0.0)
            lam = [lam_i - t * r_i for lam_i, r_i in zip(lam, r)]
            lam_new += t
            if zsq > 1e-18:
                y = y - t * zdir
            if t_full <= t_drop:
                active.append(worst)
                lam.append(lam_new)
                break
            del active[blocker]
            del lam[blocker]


def _kkt_residual(system, x0, y, mu):
    G, h, A, b = system.G, system.h, system.A, system.b
    resid = y - x0
    if G.shape[0]:
        resid = resid + G.T @ mu
    if A.shape[0]:
        nu, _, _, _ = np.linalg.lstsq(A.T, -resid, rcond=None)
        resid = resid + A.T @ nu
    worst = float(np.max(np.abs(resid))) if resid.size else 0.0
    if G.shape[0]:
        slack = G @ y - h
        worst = max(worst, float(np.max(slack)))
        worst = max(worst, float(np.max(np.abs(mu * slack))))
    if A.shape[0]:
        worst = max(worst, float(np.max(np.abs(A @ y - b))))
    return max(worst, 0.0)


def least_distance(
    system: LinearConstraintSystem,
    x0,
    tol: float = DEFAULT_TOL,
    warm_start=None,
    max_pivots: int | None = None,
) -> QpSolution:
    """Project ``x0`` onto the polyhedron described by ``system``.

    Parameters
    ----------
    system : LinearConstraintSystem
        Constraints ``G y <= h``, ``A y = b``; the feasible set must be nonempty.
    x0 : array_like
        Point to project.
    tol : float
        Feasibility and KKT tolerance.
    warm_start : sequence of int, optional
        Inequality row indices to seed the active set with, typically the
        ``active_set`` of a previous nearby solve.
    max_pivots : int, optional
        Pivot guard; defaults to ``50 * (m + p)`` for ``m`` inequality and
        ``p`` equality rows.

    Returns
    -------
    QpSolution
        Unique minimizer with its active set, pivot count, and KKT residual.

    Raises
    ------
    InfeasibleSystem
        No point satisfies the constraints.
    MaxPivots
        The pivot guard was exceeded.
    """
    x0 = as_point(x0, system.n)
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    G, h, A, b = system.G, system.h, system.A, system.b
    m, p = G.shape[0], A.shape[0]
    if max_pivots is None:
        max_pivots = max(50 * (m + p), 50)

    if m == 0 and p == 0:
        return QpSolution(x0.copy(), [], 0, 0.0)

    if p:
        y_part, Z = _affine_basis(A, b)
        if Z.shape[1] == 0:
            # the equalities pin a single point
            if m and float(np.max(G @ y_part - h)) > tol:
                raise InfeasibleSystem("equalities contradict the inequalities")
            mu = np.zeros(m)
            tight = [i for i in range(m) if abs(float(G[i] @ y_part - h[i])) <= tol]
            return QpSolution(y_part, tight, 0, _kkt_residual(system, x0, y_part, mu))
        M = G @ Z
        d = h - G @ y_part
        w0 = Z.T @ (x0 - y_part)
    else:
        y_part, Z = None, None
        M, d, w0 = G.copy(), h.copy(), x0.copy()

    # screen rows that vanish on the reduced space, then unit-normalize the rest
    norms = np.linalg.norm(M, axis=1) if m else np.zeros(0)
    keep = norms > 1e-13
    if np.any(d[~keep] < -tol):
        raise InfeasibleSystem("a constraint is constant and violated on the affine subspace")
    kept_rows = np.flatnonzero(keep)
    Mn = M[keep] / norms[keep, None] if kept_rows.size else M[keep]
    dn = d[keep] / norms[keep] if kept_rows.size else d[keep]

    warm = None
    if warm_start:
        pos = np.cumsum(keep) - 1
        idx = np.asarray(list(warm_start), dtype=int)
        idx = idx[(idx >= 0) & (idx < m)]
        warm = [int(pos[i]) for i in idx if keep[i]]

    w, active_n, lam_n, pivots = _dual_active_set(Mn, dn, w0, tol, max_pivots, warm)

    y = y_part + Z @ w if Z is not None else w
    mu = np.zeros(m)
    active = [int(kept_rows[i]) for i in active_n]
    for i, lam_i in zip(active, lam_n):
        mu[i] = lam_i / norms[i]
    return QpSolution(y, active, pivots, _kkt_residual(system, x0, y, mu))


def simplex_projection(v, a: float = 1.0) -> np.ndarray:
    """Exact sort-threshold projection of ``v`` onto ``{x >= 0, sum(x) = a}``."""
    v = as_point(v)
    if not a > 0.0:
        raise ValueError("simplex scale a must be positive")
    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u)
    counts = np.arange(1, v.size + 1)
    positive = u + (a - cumulative) / counts > 0
    rho = int(np.flatnonzero(positive)[-1])
    tau = (cumulative[rho] - a) / (rho + 1)
    return np.maximum(v - tau, 0.0)


def _simplex_scale(system: LinearConstraintSystem):
    """Return ``a`` when the system is exactly {x >= 0, sum(x) = a}, else None."""
    n = system.n
    if system.G.shape != (n, n) or system.A.shape != (1, n):
        return None
    if not np.array_equal(system.G, -np.eye(n)) or np.any(system.h != 0.0):
        return None
    row = system.A[0]
    if row[0] <= 0.0 or not np.all(row == row[0]):
        return None
    a = float(system.b[0] / row[0])
    return a if a > 0.0 else None


def oracle_project(
    system: LinearConstraintSystem,
    x0,
    resolution: float = 1e-3,
    window: float | None = None,
) -> np.ndarray:
    """Brute-force projection used to cross-check :func:`least_distance`.

    Simplex-shaped systems are handled by the exact sort-threshold formula in
    any dimension.  Everything else in ambient dimension <= 3 goes through a
    staged grid scan: each stage minimizes the squared distance plus a stiff
    quadratic penalty on constraint violations, then re-centers a finer grid on
    the winner until the spacing drops below ``resolution``; the last grid is
    re-scanned keeping only (near-)feasible points.  The result is within
    about one grid spacing of the true projection.

    Raises :class:`UnsupportedShape` for non-simplex systems with n > 3.
    """
    x0 = as_point(x0, system.n)
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    a = _simplex_scale(system)
    if a is not None:
        return simplex_projection(x0, a)
    n = system.n
    if n > 3:
        raise UnsupportedShape(
            "grid oracle supports dimension <= 3 (plus exact simplex slices)"
        )
    G, h, A, b = system.G, system.h, system.A, system.b
    points_per_axis = 65 if n <= 2 else 33
    half = window if window is not None else max(2.0, 2.0 * float(np.max(np.abs(x0))) + 2.0)
    center = x0.copy()
    stiffness = 1e8

    def scan(center, half):
        axes = [np.linspace(c - half, c + half, points_per_axis) for c in center]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        score = np.sum((grid - x0) ** 2, axis=1)
        ineq = np.zeros((grid.shape[0], 0))
        if G.shape[0]:
            ineq = np.maximum(grid @ G.T - h, 0.0)
            score = score + stiffness * np.sum(ineq**2, axis=1)
        eq = np.zeros((grid.shape[0], 0))
        if A.shape[0]:
            eq = grid @ A.T - b
            score = score + stiffness * np.sum(eq**2, axis=1)
        return grid, score, ineq, eq

    while True:
        spacing = 2.0 * half / (points_per_axis - 1)
        grid, score, ineq, eq = scan(center, half)
        center = grid[int(np.argmin(score))]
        if spacing <= resolution / 2.0:
            break
        half = 3.0 * spacing

    # final pass: prefer strictly feasible grid points when any exist
    feasible = np.ones(grid.shape[0], dtype=bool)
    if ineq.shape[1]:
        feasible &= np.all(ineq <= 1e-9, axis=1)
    if eq.shape[1]:
        feasible &= np.all(np.abs(eq) <= spacing, axis=1)
    if np.any(feasible):
        dist = np.sum((grid[feasible] - x0) ** 2, axis=1)
        center = grid[feasible][int(np.argmin(dist))]
    return center.copy()
