"""Right-triangle hyperbolic trigonometry and the theta-reparametrization.

A point ``p`` of a hyperbolic extension spans a right geodesic triangle with
vertices ``o``, ``y`` (foot on H^k) and ``p``. Its hypotenuse ``s`` is the
distance from ``o``, the leg ``t`` lies in H^k, the leg ``r`` in the fibre, and
``beta`` is the angle at ``o``. All formulas here are the closed-form relations
between these quantities, written so they stay finite for lengths up to ~700.

``build_right_triangle`` and ``fermi_polar_residual`` are an independent check:
they build the triangle in the hyperboloid model of H^2 and measure it.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import kernels

HALF_PI = 0.5 * math.pi


class DomainError(ValueError):
    """An argument lies outside the domain of a trigonometric relation."""


@dataclass(frozen=True)
class TriangleData:
    s: float
    t: float
    r: float
    alpha: float
    beta: float

    def residuals(self):
        """Residuals of the three closure relations (law of sines, leg relation, Pythagoras)."""
        s, t, r, b = self.s, self.t, self.r, self.beta
        return (
            math.sinh(r) - math.sin(b) * math.sinh(s),
            math.cosh(r) * math.sinh(t) - math.sinh(s) * math.cos(b),
            math.cosh(s) - math.cosh(r) * math.cosh(t),
        )


@dataclass(frozen=True)
class ReparamParams:
    theta: float = HALF_PI
    b: float = 0.0
    B: float = 0.0
    c: float = 0.0
    c_prime: float = -1.0

    def __post_init__(self):
        if not 0.0 < self.theta <= HALF_PI:
            raise DomainError(f"theta must lie in (0, pi/2], got {self.theta}")

    def admissible(self):
        """True when ``c' < c + ln(sin(theta))``."""
        return self.c_prime < self.c + math.log(math.sin(self.theta))


def _check_angle(beta, name="beta"):
    b = np.asarray(beta, dtype=float)
    if np.any(b < 0.0) or np.any(b > HALF_PI + 1e-15) or np.any(np.isnan(b)):
        raise DomainError(f"{name} must lie in [0, pi/2]")
    return np.clip(b, 0.0, HALF_PI)


def _nonneg(x, name):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(np.isnan(x)):
        raise DomainError(f"{name} must be >= 0")
    return x


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def r_of(s, beta):
    """Fibre leg ``r`` with ``sinh(r) = sin(beta) sinh(s)``."""
    s = _nonneg(s, "s")
    beta = _check_angle(beta)
    # r <= s exactly; rounding near beta = pi/2 can overshoot by an ulp
    return _out(np.minimum(kernels.asinh_sinh_scaled(s, np.sin(beta)), s))


def beta_of(r, s):
    """Angle at ``o`` from the fibre leg and hypotenuse, ``asin(sinh r / sinh s)``."""
    r = _nonneg(r, "r")
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0.0):
        raise DomainError("s must be > 0")
    if np.any(r > s):
        raise DomainError("r must not exceed s")
    # sinh(r)/sinh(s) in log form
    with np.errstate(divide="ignore"):
        ratio = np.exp(kernels.log_sinh(r) - kernels.log_sinh(s))
    return _out(np.arcsin(np.minimum(ratio, 1.0)))


def t_of(s, beta):
    """H^k leg ``t`` with ``cosh(r) sinh(t) = sinh(s) cos(beta)``."""
    s = _nonneg(s, "s")
    beta = _check_angle(beta)
    r = kernels.asinh_sinh_scaled(s, np.sin(beta))
    with np.errstate(divide="ignore"):
        lnz = kernels.log_sinh(s) + np.log(np.cos(beta)) - kernels.log_cosh(r)
    lnz = np.where(s == 0.0, -np.inf, lnz)
    return _out(kernels.asinh_from_log(lnz))


def lambda_of(lambda_prime, theta):
    """``asinh(sinh(lambda') sin(theta))``: the leg opposite ``theta`` given the hypotenuse."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0.0) or np.any(theta > HALF_PI + 1e-15):
        raise DomainError("theta must lie in (0, pi/2]")
    lp = np.asarray(lambda_prime, dtype=float)
    sign = np.sign(lp)
    return _out(sign * kernels.asinh_sinh_scaled(np.abs(lp), np.sin(np.minimum(theta, HALF_PI))))


def lambda_prime_of(lam, theta):
    """Inverse of :func:`lambda_of` in its first argument."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0.0) or np.any(theta > HALF_PI + 1e-15):
        raise DomainError("theta must lie in (0, pi/2]")
    lam = np.asarray(lam, dtype=float)
    sign = np.sign(lam)
    return _out(sign * kernels.asinh_sinh_scaled(np.abs(lam), 1.0 / np.sin(np.minimum(theta, HALF_PI))))


def vartheta(lam, beta, params):
    """Radius at which the family member ``h_lam`` is cut: ``r(lambda'(lam) + b, beta)``."""
    s = np.asarray(lambda_prime_of(lam, params.theta), dtype=float) + params.b
    if np.any(s <= 0.0):
        raise DomainError("lambda'(lambda) + b must be > 0")
    return r_of(s, beta)


def vartheta_offset(beta, params):
    """Limit of ``vartheta(lam, beta, b) - lam`` as ``lam`` grows."""
    beta = np.asarray(beta, dtype=float)
    return _out(params.b + np.log(np.sin(beta) / math.sin(params.theta)))


# ---------------------------------------------------------------------------
# hyperboloid-model oracle, evaluated in extended precision

_LD = np.longdouble
_J = np.array([-1.0, 1.0, 1.0], dtype=_LD)


def mink(x, y):
    """Minkowski form ``-x0 y0 + x1 y1 + x2 y2`` along the last axis."""
    return np.sum(_J * x * y, axis=-1)


def _exp(x, v):
    nv = np.sqrt(max(mink(v, v), _LD(0)))
    if nv == 0:
        return x.copy()
    return np.cosh(nv) * x + np.sinh(nv) * (v / nv)


def _dist(x, y):
    c = -mink(x, y)
    if c > 2:
        return np.arccosh(c)
    d = x - y
    return 2 * np.arcsinh(np.sqrt(max(mink(d, d), _LD(0))) / 2)


def _angle(x, y, z):
    """Interior angle at ``x`` of the geodesic triangle ``x, y, z``."""
    vy = y + mink(x, y) * x
    vz = z + mink(x, z) * x
    ny = np.sqrt(max(mink(vy, vy), _LD(0)))
    nz = np.sqrt(max(mink(vz, vz), _LD(0)))
    if ny == 0 or nz == 0:
        return float("nan")
    cos_a = mink(vy, vz) / (ny * nz)
    # sine from the Minkowski area element of the tangent pair
    cross = vy * mink(vz, vz) - vz * mink(vy, vz)
    sin_a = np.sqrt(max(mink(cross, cross), _LD(0))) / (ny * nz * nz)
    return float(np.arctan2(sin_a, cos_a))


# base frame: tilted so no construction step is axis aligned
_PHI = _LD("0.37")
_O = np.array([1, 0, 0], dtype=_LD)
_E1 = np.array([0, np.cos(_PHI), np.sin(_PHI)], dtype=_LD)
_E2 = np.array([0, -np.sin(_PHI), np.cos(_PHI)], dtype=_LD)


def _fermi_point(t, r):
    """Point with signed Fermi coordinates ``(t, r)`` about the geodesic through o along E1."""
    y = _exp(_O, _LD(t) * _E1)
    # E2 is orthogonal to the geodesic, so it is its own parallel transport
    return y, _exp(y, _LD(r) * _E2)


def build_right_triangle(t, r):
    """Construct the right triangle with legs ``t``, ``r`` in the hyperboloid and measure it."""
    if t < 0 or r < 0:
        raise DomainError("legs must be >= 0")
    y, p = _fermi_point(t, r)
    for pt in (y, p):
        drift = abs(mink(pt, pt) + 1) / max(_LD(1), pt[0] ** 2)
        if drift > 1e-9:
            raise FloatingPointError(f"Minkowski normalization drift {float(drift):.3g}")
    s = float(_dist(_O, p))
    if s == 0.0:
        return TriangleData(0.0, 0.0, 0.0, float("nan"), float("nan"))
    t_meas = float(_dist(_O, y))
    r_meas = float(_dist(y, p))
    if t == 0:
        beta, alpha = HALF_PI, 0.0
    elif r == 0:
        beta, alpha = 0.0, HALF_PI
    else:
        beta = _angle(_O, y, p)
        alpha = _angle(p, _O, y)
    return TriangleData(s=s, t=t_meas, r=r_meas, alpha=alpha, beta=beta)


def polar_of_fermi(t, r):
    """Distance ``s`` from o and signed polar angle ``beta`` (from E1) of the Fermi point ``(t, r)``."""
    _, p = _fermi_point(t, r)
    s = _dist(_O, p)
    v = p + mink(_O, p) * _O
    return float(s), float(np.arctan2(mink(v, _E2), mink(v, _E1)))


def fermi_polar_residual(t, r, step=1e-4):
    """Max entry of ``sinh^2(s) dbeta^2 + ds^2 - (cosh^2(r) dt^2 + dr^2)`` at ``(t, r)``.

    Both Gram matrices are in Fermi coordinates; ``ds`` and ``dbeta`` are
    second-order central differences of the hyperboloid measurements.
    """
    if step <= 0:
        raise ValueError("step must be > 0")
    if t == 0 and r == 0:
        raise DomainError("(t, r) must differ from the origin")
    grads = []
    for dt, dr in ((step, 0.0), (0.0, step)):
        sp, bp = polar_of_fermi(t + dt, r + dr)
        sm, bm = polar_of_fermi(t - dt, r - dr)
        db = math.remainder(bp - bm, 2.0 * math.pi)
        grads.append(((sp - sm) / (2 * step), db / (2 * step)))
    ds = np.array([grads[0][0], grads[1][0]])
    dbeta = np.array([grads[0][1], grads[1][1]])
    s, _ = polar_of_fermi(t, r)
    lhs = math.sinh(s) ** 2 * np.outer(dbeta, dbeta) + np.outer(ds, ds)
    rhs = np.diag([math.cosh(r) ** 2, 1.0])
    return float(np.max(np.abs(lhs - rhs)))
