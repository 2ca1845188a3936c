"""Dense complex linear algebra: LU solves with pivot checks, full
(unrestarted) Arnoldi GMRES with iteration reporting, SVD-based condition
numbers, numerical-range coercivity estimation, and log-log power-law fits.

Operators wrapped as :class:`~helmbie.assembly.DiscreteOperator` are
handled in L^2(Gamma) semantics through the weight similarity transform;
bare ndarrays are treated in plain Euclidean semantics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .assembly import BoundaryFunction, DiscreteOperator

__all__ = [
    "GmresReport",
    "FitResult",
    "SingularMatrixError",
    "solve_dense",
    "solve_matrix",
    "gmres",
    "condition_number",
    "condition_estimate",
    "coercivity_constant",
    "fit_power_law",
]


class SingularMatrixError(RuntimeError):
    """Pivot below threshold during factorization."""


@dataclass
class GmresReport:
    solution: np.ndarray | BoundaryFunction
    iterations: int
    final_relative_residual: float
    converged: bool
    residual_history: list = field(default_factory=list)


@dataclass(frozen=True)
class FitResult:
    exponent: float
    log_prefactor: float
    r_squared: float


def _unwrap(A) -> np.ndarray:
    return A.matrix if isinstance(A, DiscreteOperator) else np.asarray(A)


def _check_pivots(lu: np.ndarray, anorm: float) -> None:
    piv = np.abs(np.diag(lu))
    if piv.min() < 1e-14 * max(anorm, 1e-300):
        raise SingularMatrixError(
            f"matrix numerically singular: min pivot {piv.min():.3e} vs norm {anorm:.3e}"
        )


def solve_matrix(A, B) -> np.ndarray:
    """LU solve with partial pivoting for one or many right-hand sides."""
    mat = _unwrap(A)
    rhs = _unwrap(B) if not isinstance(B, BoundaryFunction) else B.values
    lu, piv = sla.lu_factor(mat)
    _check_pivots(lu, np.linalg.norm(mat, np.inf))
    return sla.lu_solve((lu, piv), rhs)


def solve_dense(A: DiscreteOperator, b: BoundaryFunction) -> BoundaryFunction:
    """Solve A x = b on the grid; returns node values of x."""
    x = solve_matrix(A, b.values if isinstance(b, BoundaryFunction) else b)
    if isinstance(A, DiscreteOperator) and isinstance(b, BoundaryFunction):
        return BoundaryFunction(x, b.grid)
    return x


def condition_estimate(A) -> float:
    """Cheap 1-norm condition estimate via LAPACK gecon."""
    mat = np.ascontiguousarray(_unwrap(A), dtype=complex)
    anorm = np.linalg.norm(mat, 1)
    lu, piv, info = sla.lapack.zgetrf(mat)
    if info != 0:
        return np.inf
    rcond, info = sla.lapack.zgecon(lu, anorm, norm="1")
    if info != 0 or rcond == 0.0:
        return np.inf
    return 1.0 / rcond


def gmres(A, b, tol: float = 1e-8, max_iterations: int = 2000) -> GmresReport:
    """Full-orthogonalization Arnoldi GMRES without restarts.

    For a DiscreteOperator the iteration runs on the weight-transformed
    system, so residual norms are relative L^2(Gamma) residuals; the
    iteration count is the Krylov dimension at convergence.  Reaching
    max_iterations sets converged=False (no exception).
    """
    if not (0.0 < tol <= 1e-2):
        raise ValueError(f"tol must lie in (0, 1e-2], got {tol}")
    is_op = isinstance(A, DiscreteOperator)
    if is_op:
        mat = A.weighted_matrix()
        sw = np.sqrt(A.tiled_weights())
        rhs = (b.values if isinstance(b, BoundaryFunction) else np.asarray(b)) * sw
    else:
        mat = np.asarray(A)
        rhs = np.asarray(b.values if isinstance(b, BoundaryFunction) else b)
    n = mat.shape[0]
    m = min(max_iterations, n)

    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        x = np.zeros(n, dtype=complex)
        return _finish(A, b, x, 0, 0.0, True, [0.0], is_op)

    Q = np.zeros((n, m + 1), dtype=complex)
    Hm = np.zeros((m + 1, m), dtype=complex)
    Q[:, 0] = rhs / bnorm
    cs = np.zeros(m, dtype=complex)
    sn = np.zeros(m, dtype=complex)
    g = np.zeros(m + 1, dtype=complex)
    g[0] = bnorm
    history = []
    converged = False
    j = 0
    for j in range(m):
        v = mat @ Q[:, j]
        for i in range(j + 1):
            Hm[i, j] = np.vdot(Q[:, i], v)
            v -= Hm[i, j] * Q[:, i]
        Hm[j + 1, j] = np.linalg.norm(v)
        lucky = abs(Hm[j + 1, j]) < 1e-14 * bnorm
        if not lucky:
            Q[:, j + 1] = v / Hm[j + 1, j]
        # Givens rotations keep the least-squares residual available per step.
        for i in range(j):
            temp = cs[i] * Hm[i, j] + sn[i] * Hm[i + 1, j]
            Hm[i + 1, j] = -np.conj(sn[i]) * Hm[i, j] + np.conj(cs[i]) * Hm[i + 1, j]
            Hm[i, j] = temp
        denom = np.sqrt(abs(Hm[j, j]) ** 2 + abs(Hm[j + 1, j]) ** 2)
        if denom == 0.0:
            cs[j], sn[j] = 1.0, 0.0
        else:
            cs[j] = np.conj(Hm[j, j]) / denom
            sn[j] = np.conj(Hm[j + 1, j]) / denom
        Hm[j, j] = cs[j] * Hm[j, j] + sn[j] * Hm[j + 1, j]
        Hm[j + 1, j] = 0.0
        g[j + 1] = -np.conj(sn[j]) * g[j]
        g[j] = cs[j] * g[j]
        rel = abs(g[j + 1]) / bnorm
        history.append(float(rel))
        if rel <= tol or lucky:
            converged = rel <= tol or lucky
            break
    iters = j + 1
    y = sla.solve_triangular(Hm[:iters, :iters], g[:iters])
    x = Q[:, :iters] @ y
    final = history[-1] if history else 0.0
    return _finish(A, b, x, iters, final, converged, history, is_op)


def _finish(A, b, x, iters, final, converged, history, is_op) -> GmresReport:
    if is_op:
        x = x / np.sqrt(A.tiled_weights())
        if isinstance(b, BoundaryFunction):
            x = BoundaryFunction(x, b.grid)
    return GmresReport(
        solution=x,
        iterations=iters,
        final_relative_residual=float(final),
        converged=bool(converged),
        residual_history=history,
    )


def condition_number(A) -> float:
    """cond(A) = sigma_max / sigma_min of the weight-transformed matrix.

    Returns inf when sigma_min underflows to zero (non-finite flag).
    """
    mat = A.weighted_matrix() if isinstance(A, DiscreteOperator) else np.asarray(A)
    s = np.linalg.svd(mat, compute_uv=False)
    if s[-1] == 0.0:
        return np.inf
    return float(s[0] / s[-1])


def coercivity_constant(A, theta_samples: int = 720) -> float:
    """Distance from 0 to the numerical range, estimated on a theta grid.

    Returns alpha_hat = max over theta of lambda_min(Hermitian part of
    e^{i theta} A~), a lower bound for the coercivity constant up to grid
    resolution.  alpha_hat <= 0 means 0 lies in the numerical range at
    this discretization (the range is convex), i.e. no coercivity is
    observed.
    """
    if theta_samples < 360:
        raise ValueError(f"theta_samples must be >= 360, got {theta_samples}")
    mat = A.weighted_matrix() if isinstance(A, DiscreteOperator) else np.asarray(A)
    Hp = 0.5 * (mat + mat.conj().T)
    Kp = (mat - mat.conj().T) / 2j
    best = -np.inf
    for theta in np.linspace(0.0, 2.0 * np.pi, theta_samples, endpoint=False):
        Ht = np.cos(theta) * Hp - np.sin(theta) * Kp
        lam = sla.eigh(Ht, eigvals_only=True, subset_by_index=[0, 0])[0]
        best = max(best, float(lam))
    return best


def fit_power_law(pairs) -> FitResult:
    """Least-squares fit value ~ C * k^p on (ln k, ln value).

    Requires at least 3 pairs with positive k and value, and at least two
    distinct k.
    """
    pairs = list(pairs)
    if len(pairs) < 3:
        raise ValueError(f"need at least 3 pairs, got {len(pairs)}")
    k = np.array([p[0] for p in pairs], dtype=float)
    v = np.array([p[1] for p in pairs], dtype=float)
    if np.any(k <= 0) or np.any(v <= 0):
        raise ValueError("power-law fit requires positive k and values")
    lk, lv = np.log(k), np.log(v)
    if np.ptp(lk) < 1e-14:
        raise ValueError("degenerate fit: all k equal")
    slope, intercept = np.polyfit(lk, lv, 1)
    resid = lv - (slope * lk + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((lv - lv.mean()) ** 2))
    r2 = 1.0 if ss_tot < 1e-300 else max(0.0, 1.0 - ss_res / ss_tot)
    return FitResult(exponent=float(slope), log_prefactor=float(intercept), r_squared=r2)
