"""Combined-field operators, Calderon projectors, and discrete boundary
maps built from the Nystrom layer operators.

With the layer operators S, D, D', H on a grid and a per-node impedance
eta_j = a(x_j) k + i b(x_j):

    A' = 1/2 I + D' - i diag(eta) S          (L^2 -> L^2)
    B  = H + i diag(eta) (1/2 I - D)         (H^1_k -> L^2)
    Bt = R H + i diag(eta) (1/2 I - D)       (L^2 -> L^2, R regularizing)

    Pi_-/+ = 1/2 I -/+ M,  M = [[D, -S], [H, -D']]   (Calderon projectors)

Boundary maps come from the resonance-free combined equations:

    P_DtN = (A')^-1 B,   P_NtD = B^-1 A',   P_ItD = S (A')^-1,

with the classical single-equation construction S^-1 (-1/2 I + D) kept as
a cross-check that is valid away from interior Dirichlet eigenvalues.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import disk_oracle
from .assembly import (
    H1K,
    L2,
    BoundaryGrid,
    DiscreteOperator,
    assemble_laplace_single_layer,
    assemble_layer_operators,
    assemble_single_layer,
    l2_operator_norm,
)
from .linalg import SingularMatrixError, condition_estimate, solve_matrix

__all__ = [
    "EtaSpec",
    "Regularizer",
    "SolverFailureError",
    "build_combined_A",
    "build_combined_B",
    "build_combined_Btilde",
    "build_regularizer",
    "calderon_projectors",
    "projector_defect",
    "dtn_map",
    "dtn_map_single_layer_route",
    "ntd_map",
    "itd_map",
    "decomposition_residuals",
]

_COND_LIMIT = 1e12


class SolverFailureError(RuntimeError):
    """Combined operator numerically singular; map construction refused."""


@dataclass(frozen=True)
class EtaSpec:
    """Impedance/coupling coefficient eta(x) = a(x) k + i b(x).

    a and b are constants or callables taking an (N, 2) array of boundary
    points and returning (N,) real values.  The sign condition check
    corresponds to the invertibility hypothesis (one-signed a bounded away
    from zero, b >= 0); the strict variant additionally needs b > 0.
    """

    a: float | Callable = 1.0
    b: float | Callable = 0.0

    def _eval(self, coeff, grid: BoundaryGrid) -> np.ndarray:
        if callable(coeff):
            vals = np.asarray(coeff(grid.points), dtype=float)
            if vals.shape != (grid.N,):
                raise ValueError(f"coefficient shape {vals.shape} != ({grid.N},)")
            return vals
        return np.full(grid.N, float(coeff))

    def values(self, grid: BoundaryGrid, k: float) -> np.ndarray:
        return self._eval(self.a, grid) * k + 1j * self._eval(self.b, grid)

    def satisfies_sign_condition(self, grid: BoundaryGrid, strict_b: bool = False) -> bool:
        av = self._eval(self.a, grid)
        bv = self._eval(self.b, grid)
        one_signed = bool(np.all(av > 1e-12) or np.all(av < -1e-12))
        b_ok = bool(np.all(bv > 1e-12)) if strict_b else bool(np.all(bv >= 0.0))
        return one_signed and b_ok

    @staticmethod
    def constant(a: float = 1.0, b: float = 0.0) -> "EtaSpec":
        return EtaSpec(a=float(a), b=float(b))


@dataclass(frozen=True)
class Regularizer:
    """Regularizing operator for the hypersingular combined equation."""

    kind: str  # "S0" (Laplace single layer) or "Sik" (single layer at ik)
    operator: DiscreteOperator


def build_regularizer(kind: str, k: float, grid: BoundaryGrid) -> Regularizer:
    if kind == "S0":
        op = assemble_laplace_single_layer(grid)
    elif kind == "Sik":
        op = assemble_single_layer(1j * k, grid)
    else:
        raise ValueError(f"unknown regularizer kind {kind!r}")
    return Regularizer(kind=kind, operator=op)


def _ops(k: float, grid: BoundaryGrid, ops: dict | None) -> dict:
    return ops if ops is not None else assemble_layer_operators(k, grid)


def build_combined_A(
    k: float, eta: EtaSpec, grid: BoundaryGrid, ops: dict | None = None
) -> DiscreteOperator:
    """A' = 1/2 I + D' - i diag(eta) S, the combined-field operator for the
    exterior Dirichlet problem (acting on Neumann data)."""
    ops = _ops(k, grid, ops)
    ev = eta.values(grid, k)
    mat = 0.5 * np.eye(grid.N) + ops["Dadj"].matrix - 1j * ev[:, None] * ops["S"].matrix
    return DiscreteOperator(mat, grid, L2, L2)


def build_combined_B(
    k: float, eta: EtaSpec, grid: BoundaryGrid, ops: dict | None = None
) -> DiscreteOperator:
    """B = H + i diag(eta) (1/2 I - D), pairing with A' in the combined
    equation A' dnu = B gamma u for exterior solutions."""
    ops = _ops(k, grid, ops)
    ev = eta.values(grid, k)
    mat = ops["H"].matrix + 1j * ev[:, None] * (0.5 * np.eye(grid.N) - ops["D"].matrix)
    return DiscreteOperator(mat, grid, H1K, L2)


def build_combined_Btilde(
    k: float,
    eta: EtaSpec,
    R: Regularizer,
    grid: BoundaryGrid,
    ops: dict | None = None,
) -> DiscreteOperator:
    """Bt = R H + i diag(eta) (1/2 I - D); R of opposite order makes this a
    second-kind operator on L^2."""
    ops = _ops(k, grid, ops)
    if R.operator.grid is not grid and R.operator.grid.N != grid.N:
        raise ValueError("regularizer must be assembled on the same grid")
    cond = condition_estimate(R.operator.matrix)
    if cond > _COND_LIMIT:
        warnings.warn(
            f"regularizer {R.kind} numerically singular (cond ~ {cond:.2e}); "
            "proceeding anyway",
            stacklevel=2,
        )
    ev = eta.values(grid, k)
    mat = R.operator.matrix @ ops["H"].matrix + 1j * ev[:, None] * (
        0.5 * np.eye(grid.N) - ops["D"].matrix
    )
    return DiscreteOperator(mat, grid, L2, L2)


def calderon_projectors(
    k: float, grid: BoundaryGrid, ops: dict | None = None
) -> tuple[DiscreteOperator, DiscreteOperator]:
    """Interior and exterior Calderon projectors Pi_- = 1/2 I - M and
    Pi_+ = 1/2 I + M acting on Cauchy pairs (Dirichlet, Neumann); they sum
    to the identity by construction and are idempotent up to
    discretization error."""
    ops = _ops(k, grid, ops)
    N = grid.N
    M = np.block(
        [
            [ops["D"].matrix, -ops["S"].matrix],
            [ops["H"].matrix, -ops["Dadj"].matrix],
        ]
    )
    eye = np.eye(2 * N)
    pi_minus = DiscreteOperator(0.5 * eye - M, grid, L2, L2)
    pi_plus = DiscreteOperator(0.5 * eye + M, grid, L2, L2)
    return pi_minus, pi_plus


def projector_defect(pi: DiscreteOperator) -> float:
    """Idempotency defect ||Pi^2 - Pi|| in the (tiled) L^2 norm."""
    defect = DiscreteOperator(
        pi.matrix @ pi.matrix - pi.matrix, pi.grid, pi.source_space, pi.target_space
    )
    return l2_operator_norm(defect)


def _guarded_solve(mat: np.ndarray, rhs: np.ndarray, label: str) -> np.ndarray:
    cond = condition_estimate(mat)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise SolverFailureError(
            f"{label} numerically singular (condition estimate {cond:.2e})"
        )
    try:
        return solve_matrix(mat, rhs)
    except SingularMatrixError as exc:
        raise SolverFailureError(f"{label}: {exc}") from exc


def dtn_map(
    k: float, eta: EtaSpec, grid: BoundaryGrid, ops: dict | None = None
) -> DiscreteOperator:
    """Exterior Dirichlet-to-Neumann map P_DtN = (A')^-1 B (H^1_k -> L^2).

    The map itself is eta-independent; eta only selects the resonance-free
    combined system used to realize it.
    """
    ops = _ops(k, grid, ops)
    A = build_combined_A(k, eta, grid, ops)
    B = build_combined_B(k, eta, grid, ops)
    mat = _guarded_solve(A.matrix, B.matrix, "A'")
    return DiscreteOperator(mat, grid, H1K, L2)


def dtn_map_single_layer_route(
    k: float, grid: BoundaryGrid, ops: dict | None = None
) -> DiscreteOperator:
    """Cross-check construction S^-1 (-1/2 I + D); valid only away from
    interior Dirichlet eigenvalues of the domain."""
    ops = _ops(k, grid, ops)
    rhs = -0.5 * np.eye(grid.N) + ops["D"].matrix
    mat = _guarded_solve(ops["S"].matrix, rhs, "S")
    return DiscreteOperator(mat, grid, H1K, L2)


def ntd_map(
    k: float, eta: EtaSpec, grid: BoundaryGrid, ops: dict | None = None
) -> DiscreteOperator:
    """Exterior Neumann-to-Dirichlet map P_NtD = B^-1 A' (L^2 -> H^1_k)."""
    ops = _ops(k, grid, ops)
    A = build_combined_A(k, eta, grid, ops)
    B = build_combined_B(k, eta, grid, ops)
    mat = _guarded_solve(B.matrix, A.matrix, "B")
    return DiscreteOperator(mat, grid, L2, H1K)


def itd_map(
    k: float, eta: EtaSpec, grid: BoundaryGrid, ops: dict | None = None
) -> DiscreteOperator:
    """Interior impedance-to-Dirichlet map P_ItD = S (A')^-1 (L^2 -> L^2,
    gradable to H^1_k): the Dirichlet component of the interior Cauchy
    pair Pi_-(0, psi) is S psi, and the impedance datum it carries is
    A' psi."""
    ops = _ops(k, grid, ops)
    A = build_combined_A(k, eta, grid, ops)
    Ainv = _guarded_solve(A.matrix, np.eye(grid.N), "A'")
    return DiscreteOperator(ops["S"].matrix @ Ainv, grid, L2, L2)


def decomposition_residuals(
    k: float,
    eta: EtaSpec,
    grid: BoundaryGrid,
    R: Regularizer | None = None,
    ops: dict | None = None,
    n_max_modes: int | None = None,
) -> dict:
    """L^2 residuals of the inverse decompositions

        resA = || (A')^-1 - [I - (P_DtN - i eta) P_ItD] ||
        resB = || B^-1 - [P_NtD - (I - i eta P_NtD) P_ItD] ||

    at the matrix level; these quantify the discrete Calderon-algebra
    consistency of the assembly, not an algebraic identity of shared
    factors.  When a regularizer is supplied, resBtilde is evaluated on
    the Fourier-mode path, which requires an origin-centered circle and
    constant eta.
    """
    ops = _ops(k, grid, ops)
    ev = eta.values(grid, k)
    A = build_combined_A(k, eta, grid, ops)
    B = build_combined_B(k, eta, grid, ops)
    Ainv = _guarded_solve(A.matrix, np.eye(grid.N), "A'")
    Binv = _guarded_solve(B.matrix, np.eye(grid.N), "B")
    P_dtn = Ainv @ B.matrix
    P_ntd = Binv @ A.matrix
    P_itd = ops["S"].matrix @ Ainv

    resA_mat = Ainv - (np.eye(grid.N) - (P_dtn - 1j * np.diag(ev)) @ P_itd)
    resB_mat = Binv - (P_ntd - (np.eye(grid.N) - 1j * np.diag(ev) @ P_ntd) @ P_itd)
    out = {
        "resA": l2_operator_norm(DiscreteOperator(resA_mat, grid, L2, L2)),
        "resB": l2_operator_norm(DiscreteOperator(resB_mat, grid, L2, L2)),
    }
    if R is not None:
        if not grid.curve.is_origin_circle:
            raise SolverFailureError(
                "resBtilde is mode-level only: needs an origin-centered circle"
            )
        if callable(eta.a) or callable(eta.b):
            raise SolverFailureError("resBtilde needs constant eta")
        eta_c = complex(eta.a * k + 1j * eta.b)
        n_max = n_max_modes or disk_oracle.default_mode_cutoff(k)
        modes = disk_oracle.mode_decomposition_residuals(
            k, grid.curve.radius, eta_c, n_max, regularizer=R.kind
        )
        out["resBtilde"] = modes["resBtilde"]
    return out
