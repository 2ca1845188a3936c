"""Smooth closed plane curves, their trapezoid discretizations, and
star-shapedness sampling.

All curves are parametrized over [0, 2pi), oriented counterclockwise
(interior on the left), with analytic parametrizations so that the global
trapezoid rule and the Kress log-quadrature reach spectral accuracy.
Outward unit normals are (x2', -x1')/|x'|.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "Curve",
    "BoundaryGrid",
    "InvalidCurveParameterError",
    "make_curve",
    "boundary_grid",
    "star_shaped_margin",
    "curve_length",
]

CURVE_FAMILIES = ("circle", "ellipse", "kite", "smooth_star")


class InvalidCurveParameterError(ValueError):
    """Curve parameters violate regularity or positivity requirements."""


@dataclass(frozen=True)
class Curve:
    """Closed regular parametrized curve t in [0, 2pi) -> R^2.

    `point`, `derivative` and `second_derivative` accept a scalar or an
    array of parameters and return arrays with a trailing axis of length 2.
    """

    name: str
    params: dict = field(default_factory=dict)
    point: Callable = None
    derivative: Callable = None
    second_derivative: Callable = None

    def normals(self, t) -> np.ndarray:
        """Outward unit normals at parameters `t`."""
        d = np.asarray(self.derivative(t))
        n = np.stack([d[..., 1], -d[..., 0]], axis=-1)
        return n / np.linalg.norm(n, axis=-1, keepdims=True)

    def speed(self, t) -> np.ndarray:
        return np.linalg.norm(np.asarray(self.derivative(t)), axis=-1)

    def curvature(self, t) -> np.ndarray:
        """Signed curvature; positive for counterclockwise convex arcs."""
        d1 = np.asarray(self.derivative(t))
        d2 = np.asarray(self.second_derivative(t))
        num = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
        return num / self.speed(t) ** 3

    @property
    def is_origin_circle(self) -> bool:
        """True for a circle centered at the origin (enables Fourier tools)."""
        if self.name != "circle":
            return False
        cx, cy = self.params.get("center", (0.0, 0.0))
        return cx == 0.0 and cy == 0.0

    @property
    def radius(self) -> float:
        if self.name != "circle":
            raise AttributeError("radius is defined for circles only")
        return self.params["radius"]


@dataclass(frozen=True)
class BoundaryGrid:
    """Equispaced-parameter Nystrom grid on a curve.

    weights are the trapezoid quadrature weights w_j = (2pi/N) |x'(t_j)|,
    so sum(weights) equals the curve length to spectral accuracy.
    """

    curve: Curve
    N: int
    t: np.ndarray
    points: np.ndarray
    speeds: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    d2points: np.ndarray

    @property
    def length(self) -> float:
        return float(self.weights.sum())

    @property
    def curvatures(self) -> np.ndarray:
        d1 = self.curve.derivative(self.t)
        num = d1[:, 0] * self.d2points[:, 1] - d1[:, 1] * self.d2points[:, 0]
        return num / self.speeds**3


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidCurveParameterError(msg)


def make_curve(name: str, **params) -> Curve:
    """Construct one of the built-in curve families.

    circle:      radius > 0, optional center=(cx, cy)
    ellipse:     semi-axes a, b > 0, optional center
    kite:        (cos t + 0.65 cos 2t - 0.65, 1.5 sin t), optional scale > 0
    smooth_star: r(t) = radius * (1 + eps cos(m t)) with 0 <= eps*m < 1
    """
    if name == "circle":
        r = float(params.get("radius", 1.0))
        cx, cy = (float(v) for v in params.get("center", (0.0, 0.0)))
        _require(r > 0, f"circle radius must be positive, got {r}")

        def pt(t):
            t = np.asarray(t, dtype=float)
            return np.stack([cx + r * np.cos(t), cy + r * np.sin(t)], axis=-1)

        def d1(t):
            t = np.asarray(t, dtype=float)
            return np.stack([-r * np.sin(t), r * np.cos(t)], axis=-1)

        def d2(t):
            t = np.asarray(t, dtype=float)
            return np.stack([-r * np.cos(t), -r * np.sin(t)], axis=-1)

        curve = Curve("circle", {"radius": r, "center": (cx, cy)}, pt, d1, d2)

    elif name == "ellipse":
        a = float(params.get("a", 2.0))
        b = float(params.get("b", 1.0))
        cx, cy = (float(v) for v in params.get("center", (0.0, 0.0)))
        _require(a > 0 and b > 0, f"ellipse semi-axes must be positive, got {a}, {b}")

        def pt(t):
            t = np.asarray(t, dtype=float)
            return np.stack([cx + a * np.cos(t), cy + b * np.sin(t)], axis=-1)

        def d1(t):
            t = np.asarray(t, dtype=float)
            return np.stack([-a * np.sin(t), b * np.cos(t)], axis=-1)

        def d2(t):
            t = np.asarray(t, dtype=float)
            return np.stack([-a * np.cos(t), -b * np.sin(t)], axis=-1)

        curve = Curve("ellipse", {"a": a, "b": b, "center": (cx, cy)}, pt, d1, d2)

    elif name == "kite":
        s = float(params.get("scale", 1.0))
        _require(s > 0, f"kite scale must be positive, got {s}")

        def pt(t):
            t = np.asarray(t, dtype=float)
            return s * np.stack(
                [np.cos(t) + 0.65 * np.cos(2 * t) - 0.65, 1.5 * np.sin(t)], axis=-1
            )

        def d1(t):
            t = np.asarray(t, dtype=float)
            return s * np.stack(
                [-np.sin(t) - 1.3 * np.sin(2 * t), 1.5 * np.cos(t)], axis=-1
            )

        def d2(t):
            t = np.asarray(t, dtype=float)
            return s * np.stack(
                [-np.cos(t) - 2.6 * np.cos(2 * t), -1.5 * np.sin(t)], axis=-1
            )

        curve = Curve("kite", {"scale": s}, pt, d1, d2)

    elif name == "smooth_star":
        eps = float(params.get("eps", 0.3))
        m = int(params.get("m", 5))
        base = float(params.get("radius", 1.0))
        _require(base > 0, f"smooth_star radius must be positive, got {base}")
        _require(m >= 1, f"smooth_star m must be a positive integer, got {m}")
        _require(eps >= 0, f"smooth_star eps must be nonnegative, got {eps}")
        _require(
            eps * m < 1,
            f"smooth_star requires eps*m < 1 for a regular curve, got {eps * m}",
        )

        def rho(t):
            return base * (1.0 + eps * np.cos(m * t))

        def rho1(t):
            return -base * eps * m * np.sin(m * t)

        def rho2(t):
            return -base * eps * m * m * np.cos(m * t)

        def pt(t):
            t = np.asarray(t, dtype=float)
            r = rho(t)
            return np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)

        def d1(t):
            t = np.asarray(t, dtype=float)
            r, r1 = rho(t), rho1(t)
            c, s_ = np.cos(t), np.sin(t)
            return np.stack([r1 * c - r * s_, r1 * s_ + r * c], axis=-1)

        def d2(t):
            t = np.asarray(t, dtype=float)
            r, r1, r2 = rho(t), rho1(t), rho2(t)
            c, s_ = np.cos(t), np.sin(t)
            return np.stack(
                [(r2 - r) * c - 2 * r1 * s_, (r2 - r) * s_ + 2 * r1 * c], axis=-1
            )

        curve = Curve("smooth_star", {"eps": eps, "m": m, "radius": base}, pt, d1, d2)

    else:
        raise InvalidCurveParameterError(
            f"unknown curve family {name!r}; choose from {CURVE_FAMILIES}"
        )

    _check_regular_ccw(curve)
    return curve


def _check_regular_ccw(curve: Curve, samples: int = 128) -> None:
    t = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    sp = curve.speed(t)
    _require(bool(np.all(sp > 1e-12)), f"{curve.name}: parametrization not regular")
    pts = curve.point(t)
    centroid = pts.mean(axis=0)
    n = curve.normals(t)
    outward = np.einsum("ij,ij->i", pts - centroid, n)
    _require(
        bool(np.mean(outward > 0) > 0.99),
        f"{curve.name}: orientation is not counterclockwise",
    )


def boundary_grid(curve: Curve, N: int) -> BoundaryGrid:
    """Equispaced trapezoid grid with N nodes (N even, 16 <= N <= 16384)."""
    if N % 2 != 0 or not (16 <= N <= 16384):
        raise InvalidCurveParameterError(f"N must be even with 16 <= N <= 16384, got {N}")
    t = 2.0 * np.pi * np.arange(N) / N
    d1 = curve.derivative(t)
    speeds = np.linalg.norm(d1, axis=-1)
    normals = np.stack([d1[:, 1], -d1[:, 0]], axis=-1) / speeds[:, None]
    return BoundaryGrid(
        curve=curve,
        N=N,
        t=t,
        points=curve.point(t),
        speeds=speeds,
        normals=normals,
        weights=(2.0 * np.pi / N) * speeds,
        d2points=curve.second_derivative(t),
    )


def star_shaped_margin(curve: Curve, M: int = 4096) -> float:
    """min over M samples of x(t) . n(x(t)).

    A nonnegative value certifies star-shapedness with respect to the
    origin at sampling resolution; a strictly positive value corresponds
    to star-shapedness with respect to a ball.
    """
    if M < 256:
        raise InvalidCurveParameterError(f"need M >= 256 samples, got {M}")
    t = np.linspace(0.0, 2 * np.pi, M, endpoint=False)
    pts = curve.point(t)
    n = curve.normals(t)
    return float(np.einsum("ij,ij->i", pts, n).min())


def curve_length(curve: Curve, N: int = 2048) -> float:
    """Curve length by the (spectrally accurate) trapezoid rule."""
    t = 2.0 * np.pi * np.arange(N) / N
    return float(curve.speed(t).sum() * 2.0 * np.pi / N)
