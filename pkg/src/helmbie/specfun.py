"""Bessel and Hankel functions, and the Helmholtz fundamental solution.

Thin validated layer over the AMOS-backed routines in :mod:`scipy.special`.
The rest of the package needs cylinder functions of real order for real
and moderately complex argument: real arguments up to ~1e4 appear in the
high-wavenumber mode sweeps, complex arguments appear in the resolvent
pole scans (|Im z| of a few) and in single-layer kernels at imaginary
wavenumber (|Im z| up to ~16).

Accuracy targets: relative error <= 1e-10 for real arguments bounded away
from zero, <= 1e-8 for complex arguments with |Im z| <= 10.  Both are
spot-checked against extended-precision series in the test suite, and the
Wronskian J*Y' - J'*Y = 2/(pi z) is enforced as a cross-check invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

__all__ = [
    "BesselEval",
    "BesselDomainError",
    "BesselOverflowError",
    "CoincidentPointsError",
    "bessel",
    "hankel1",
    "fundamental_solution",
    "EULER_GAMMA",
]

# Euler-Mascheroni constant, used in small-argument expansions of Y_0.
EULER_GAMMA = 0.5772156649015328606

MAX_ORDER = 1.0e4
MAX_ABS_ARGUMENT = 1.0e4
# Complex support is sized for the pole scans near the real axis and for
# single-layer kernels at imaginary wavenumber on desk-scale curves.
MAX_IMAG_ARGUMENT = 16.0
_INTEGER_SNAP = 1e-6


class BesselDomainError(ValueError):
    """Argument or order outside the supported domain."""


class BesselOverflowError(ArithmeticError):
    """Evaluation overflowed or otherwise failed; reported, never saturated."""


class CoincidentPointsError(ValueError):
    """Fundamental solution requested at coincident source/target points."""


@dataclass(frozen=True)
class BesselEval:
    """J_nu, Y_nu and their derivatives at a single (order, argument) pair."""

    order: float
    argument: complex
    J: complex
    Y: complex
    Jprime: complex
    Yprime: complex

    def wronskian_defect(self) -> float:
        """|J*Y' - J'*Y - 2/(pi z)| relative to 2/(pi |z|)."""
        target = 2.0 / (math.pi * self.argument)
        return abs(self.J * self.Yprime - self.Jprime * self.Y - target) / abs(target)

    @property
    def H1(self) -> complex:
        return self.J + 1j * self.Y

    @property
    def H1prime(self) -> complex:
        return self.Jprime + 1j * self.Yprime


def _validate(order: float, z: complex) -> tuple[float, complex, bool]:
    if not (0.0 <= order <= MAX_ORDER) or not math.isfinite(order):
        raise BesselDomainError(f"order {order!r} outside [0, {MAX_ORDER:g}]")
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise BesselDomainError(f"non-finite argument {z!r}")
    if z == 0:
        raise BesselDomainError("argument z = 0: Y_nu is singular at the origin")
    if abs(z) > MAX_ABS_ARGUMENT:
        raise BesselDomainError(f"|z| = {abs(z):g} exceeds {MAX_ABS_ARGUMENT:g}")
    if abs(z.imag) > MAX_IMAG_ARGUMENT:
        raise BesselDomainError(
            f"|Im z| = {abs(z.imag):g} exceeds supported strip {MAX_IMAG_ARGUMENT:g}"
        )
    # Near-integer orders are snapped onto the integer branch; the Y_nu
    # connection formula degenerates there.
    nearest = round(order)
    if abs(order - nearest) < _INTEGER_SNAP:
        order = float(nearest)
    real_path = z.imag == 0.0 and z.real > 0.0
    return order, z, real_path


def bessel(order: float, z: complex) -> BesselEval:
    """Evaluate J_nu(z), Y_nu(z) and their derivatives.

    Parameters
    ----------
    order : float
        Order nu >= 0 (integer or real), at most 1e4.
    z : complex
        Argument, nonzero, |z| <= 1e4 and |Im z| <= 16.

    Returns
    -------
    BesselEval

    Raises
    ------
    BesselDomainError
        For z = 0 or arguments/orders outside the supported region.
    BesselOverflowError
        If the backend reports overflow or loss of significance.
    """
    order, z, real_path = _validate(order, z)
    arg = z.real if real_path else z
    j = complex(_sp.jv(order, arg))
    y = complex(_sp.yv(order, arg))
    jp = complex(_sp.jvp(order, arg))
    yp = complex(_sp.yvp(order, arg))
    vals = (j, y, jp, yp)
    if not all(math.isfinite(v.real) and math.isfinite(v.imag) for v in vals):
        raise BesselOverflowError(
            f"Bessel evaluation overflowed at order={order:g}, z={z!r}"
        )
    return BesselEval(order=order, argument=z, J=j, Y=y, Jprime=jp, Yprime=yp)


def hankel1(order: float, z: complex) -> tuple[complex, complex]:
    """Evaluate H^(1)_nu(z) = J + iY and its derivative.

    Same domain as :func:`bessel`.
    """
    ev = bessel(order, z)
    return ev.H1, ev.H1prime


def fundamental_solution(k: float, x, y, dim: int = 2):
    """Free-space Helmholtz fundamental solution Phi_k(x, y).

    dim = 2: (i/4) H_0^(1)(k |x-y|);  dim = 3: exp(ik|x-y|) / (4 pi |x-y|).

    `x` and `y` broadcast against each other over a trailing coordinate
    axis of length `dim`, so a single target against many sources is one
    call.

    Raises
    ------
    CoincidentPointsError
        If any pair has |x - y| < 1e-14.
    """
    if dim not in (2, 3):
        raise BesselDomainError(f"dim must be 2 or 3, got {dim}")
    if not (k > 0 and math.isfinite(k)):
        raise BesselDomainError(f"wavenumber k must be positive, got {k!r}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != dim or y.shape[-1] != dim:
        raise BesselDomainError(f"points must have trailing dimension {dim}")
    r = np.linalg.norm(x - y, axis=-1)
    if np.any(r < 1e-14):
        raise CoincidentPointsError("coincident points: |x - y| < 1e-14")
    if dim == 2:
        val = 0.25j * _sp.hankel1(0, k * r)
    else:
        val = np.exp(1j * k * r) / (4.0 * np.pi * r)
    return val if val.ndim else complex(val)
