"""Hyperbolic extensions ``f = cosh(r)^2 sigma_{H^k} + h`` and their spherical cuts.

A point of the geodesic sphere of radius ``s`` in the extension is written in
join coordinates ``(w, u, beta)`` in S^{k-1} x S^{n-1} x (0, pi/2), identified
with the unit vector ``(cos(beta) w, sin(beta) u)`` of S^{n+k-1}. In these
coordinates the cut splits into three mutually orthogonal blocks, held by
:class:`JoinForm`.
"""
from dataclasses import dataclass
import math
from typing import Callable

import numpy as np

from . import hyptrig, kernels
from .spheres import SphereForm, make_atlas

HALF_PI = 0.5 * math.pi
DEFAULT_DELTA = 0.05


@dataclass(frozen=True)
class JoinPoint:
    w: np.ndarray
    u: np.ndarray
    beta: float
    s: float = math.nan

    def sphere_point(self):
        return np.concatenate([math.cos(self.beta) * np.asarray(self.w), math.sin(self.beta) * np.asarray(self.u)])


@dataclass(frozen=True)
class JoinForm:
    """``a(beta) sigma_{S^{k-1}} + b(beta, u) + c(beta) dbeta^2``.

    ``a`` and ``c`` map a beta array to coefficient arrays; ``b`` maps
    ``(beta, U)`` to ambient n x n representatives of the S^{n-1} block.
    """

    k: int
    n: int
    a: Callable
    b: Callable
    c: Callable
    label: str = ""


def join_angle(P, k):
    """Spherical distance from unit vectors ``P`` to S^{k-1} (the first k slots)."""
    P = np.atleast_2d(P)
    return np.arctan2(np.linalg.norm(P[:, k:], axis=1), np.linalg.norm(P[:, :k], axis=1))


def join_mask(k, delta=DEFAULT_DELTA):
    """Predicate selecting ``beta`` in ``[delta, pi/2 - delta]``."""

    def mask(P):
        beta = join_angle(P, k)
        return (beta >= delta) & (beta <= HALF_PI - delta)

    return mask


def join_point_to_product(jp):
    """Hyperbolic-extension coordinates ``((t, w), (r, u))`` of a join point with radius."""
    if not jp.s > 0:
        raise hyptrig.DomainError("join point needs a radius s > 0")
    t = hyptrig.t_of(jp.s, jp.beta)
    r = hyptrig.r_of(jp.s, jp.beta)
    return (t, np.asarray(jp.w)), (r, np.asarray(jp.u))


def product_to_join(y, v):
    """Inverse of :func:`join_point_to_product`: ``((t, w), (r, u)) -> JoinPoint``."""
    (t, w), (r, u) = y, v
    if r + t < 300:
        # sinh^2 s = cosh^2 r cosh^2 t - 1, expanded to avoid cancellation
        sr2, st2 = math.sinh(r) ** 2, math.sinh(t) ** 2
        s = math.asinh(math.sqrt(sr2 + st2 + sr2 * st2))
    else:
        s = float(kernels.log_cosh(r) + kernels.log_cosh(t)) + math.log(2.0)
    return JoinPoint(np.asarray(w), np.asarray(u), hyptrig.beta_of(min(r, s), s), s)


def join_to_sphereform(jf, delta=DEFAULT_DELTA):
    """Embed a join-coordinate block form as a field on S^{n+k-1} (masked away from beta in {0, pi/2})."""
    k, n = jf.k, jf.n
    m = k + n
    lo, hi = 0.5 * delta, HALF_PI - 0.5 * delta

    def ambient(P):
        beta = join_angle(P, k)
        if np.any(beta < lo) or np.any(beta > hi):
            raise ValueError(f"join form evaluated outside beta in ({lo:g}, {hi:g})")
        U = P[:, k:] / np.linalg.norm(P[:, k:], axis=1, keepdims=True)
        return kernels.join_ambient(P, k, jf.a(beta), jf.c(beta), jf.b(beta, U))

    return SphereForm.from_ambient(m, ambient, mask=join_mask(k, delta), label=jf.label)


def _hat_callable(hhat):
    return hhat.hat_ambient if hasattr(hhat, "hat_ambient") else hhat


def extension_cut(h, k, s):
    """Spherical cut at ``s`` of the extension of ``h``, in join coordinates."""
    if not s > 0:
        raise ValueError("s must be > 0")
    sh2 = math.sinh(s) ** 2
    return JoinForm(
        k,
        h.n,
        a=lambda beta: sh2 * np.cos(beta) ** 2,
        b=lambda beta, U: h.cut_ambient(hyptrig.r_of(s, beta), U),
        c=lambda beta: np.full(np.shape(beta), sh2),
        label=f"E{k}({h.label})_cut({s:g})",
    )


def extension_normalized_cut(hhat, k, s, n=None):
    """Normalized cut at ``s``: ``cos^2 sigma + sin^2 hhat_{r(s, beta)} + dbeta^2``.

    ``hhat`` is a :class:`~hypext.radial.RadialMetric` or a callable
    ``(r, U) -> ambient normalized cut``.
    """
    if not s > 0:
        raise ValueError("s must be > 0")
    hat = _hat_callable(hhat)
    n = n if n is not None else hhat.n
    return JoinForm(
        k,
        n,
        a=lambda beta: np.cos(beta) ** 2,
        b=lambda beta, U: (np.sin(beta) ** 2)[:, None, None] * hat(hyptrig.r_of(s, beta), U),
        c=lambda beta: np.ones(np.shape(beta)),
        label=f"E{k}_hat({s:g})",
    )


def round_join_form(k, n):
    """Join data of the unit round metric of S^{n+k-1}."""
    return JoinForm(
        k,
        n,
        a=lambda beta: np.cos(beta) ** 2,
        b=lambda beta, U: (np.sin(beta) ** 2)[:, None, None] * np.broadcast_to(np.eye(n), (len(U), n, n)),
        c=lambda beta: np.ones(np.shape(beta)),
        label="round_join",
    )


# ---------------------------------------------------------------------------
# pullback oracle: evaluates the extension metric itself, no cut formula


def _embed_any(chart, x):
    """Chart embedding that also accepts complex coordinates."""
    q = np.sqrt(1.0 - np.sum(x * x, axis=1))
    cols = [x[:, i] for i in range(x.shape[1])]
    cols.insert(chart.axis, chart.sign * q)
    return np.stack(cols, axis=1)


def _product_coords(chart, x, k, s):
    """(w, t, u, r) of the point of the radius-``s`` sphere with chart coordinates ``x``."""
    P = _embed_any(chart, x)
    x1, x2 = P[:, :k], P[:, k:]
    n1 = np.sqrt(np.sum(x1 * x1, axis=1))
    n2 = np.sqrt(np.sum(x2 * x2, axis=1))
    beta = np.arctan(n2 / n1)
    r = np.arcsinh(math.sinh(s) * np.sin(beta))
    t = np.arcsinh(math.sinh(s) * np.cos(beta) / np.cosh(r))
    return x1 / n1[:, None], t, x2 / n2[:, None], r


def pullback_oracle_cut(h, k, s, step=1e-4, method="complex", delta=DEFAULT_DELTA):
    """Cut at ``s`` by pulling ``cosh(r)^2 (sinh(t)^2 sigma_{S^{k-1}} + dt^2) + h_r + dr^2`` back to S^{n+k-1}.

    The sphere of radius ``s`` is parametrized through the triangle relations
    (chart point -> ``(w, t, u, r)``); derivatives of that parametrization are
    taken numerically. ``method="complex"`` uses complex-step differentiation
    with ``step=1e-30``-scale perturbations (no cancellation); ``"central"``
    uses central differences with ``step``.
    """
    if not step > 0:
        raise ValueError("step must be > 0")
    if method not in ("complex", "central"):
        raise ValueError(f"unknown differentiation method {method!r}")
    if not s > 0:
        raise ValueError("s must be > 0")
    n = h.n
    atlas = make_atlas(n + k)

    def components(chart, x):
        N, d = x.shape
        w, t, u, r = _product_coords(chart, x, k, s)
        dw = np.empty((N, d, k))
        du = np.empty((N, d, n))
        dt = np.empty((N, d))
        dr = np.empty((N, d))
        for i in range(d):
            if method == "complex":
                hc = 1e-30
                xc = x.astype(complex)
                xc[:, i] += 1j * hc
                wc, tc, uc, rc = _product_coords(chart, xc, k, s)
                dw[:, i], dt[:, i], du[:, i], dr[:, i] = wc.imag / hc, tc.imag / hc, uc.imag / hc, rc.imag / hc
            else:
                xp, xm = x.copy(), x.copy()
                xp[:, i] += step
                xm[:, i] -= step
                wp, tp, up, rp = _product_coords(chart, xp, k, s)
                wm, tm, um, rm = _product_coords(chart, xm, k, s)
                h2 = 2 * step
                dw[:, i], dt[:, i], du[:, i], dr[:, i] = (wp - wm) / h2, (tp - tm) / h2, (up - um) / h2, (rp - rm) / h2
        Hr = h.cut_ambient(r, u)
        ch2 = np.cosh(r) ** 2
        sh2t = np.sinh(t) ** 2
        out = ch2[:, None, None] * (
            sh2t[:, None, None] * np.einsum("nia,nja->nij", dw, dw) + dt[:, :, None] * dt[:, None, :]
        )
        out += np.einsum("nia,nab,njb->nij", du, Hr, du)
        out += dr[:, :, None] * dr[:, None, :]
        return out

    return SphereForm(atlas, components, mask=join_mask(k, delta), label=f"pullback_E{k}({h.label},{s:g})")


def verify_prop_2_7_on_extension(h, k, samples, step=1e-4):
    """Max residual of ``sinh^2(s) dbeta^2 + ds^2 = cosh^2(r) dt^2 + dr^2`` over ``(s, beta)`` samples.

    ``t`` and ``r`` come from the triangle relations and are differentiated by
    central differences in ``(s, beta)``; the comparison is made in the frame
    ``(d/ds, d/dbeta / sinh(s))`` where the left side is the identity. ``h`` and
    ``k`` do not enter: the identity lives in the plane of the right triangle.
    """
    worst = 0.0
    for s, beta in samples:
        grad = np.empty((2, 2))  # rows: t, r; cols: d/ds, d/dbeta
        for j, (ds, db) in enumerate(((step, 0.0), (0.0, step))):
            tp, rp = hyptrig.t_of(s + ds, beta + db), hyptrig.r_of(s + ds, beta + db)
            tm, rm = hyptrig.t_of(s - ds, beta - db), hyptrig.r_of(s - ds, beta - db)
            grad[0, j] = (tp - tm) / (2 * step)
            grad[1, j] = (rp - rm) / (2 * step)
        r = hyptrig.r_of(s, beta)
        rhs = math.cosh(r) ** 2 * np.outer(grad[0], grad[0]) + np.outer(grad[1], grad[1])
        scale = np.array([1.0, 1.0 / math.sinh(s)])
        worst = max(worst, float(np.max(np.abs(rhs * np.outer(scale, scale) - np.eye(2)))))
    return worst
