"""Orthographic chart atlases on spheres, bilinear-form fields, and C^2 distances.

A sphere S^{m-1} carries 2m hemispherical charts. Chart ``(axis, sign)`` takes
``x`` in the ball of radius ``rho`` in R^{m-1} to the unit vector that has
``sign * sqrt(1 - |x|^2)`` in slot ``axis`` and ``x`` in the remaining slots.

Most fields are given by an *ambient* representative: a function returning an
m x m symmetric matrix at each point, whose restriction to the tangent space
is the form. Chart components are then ``J^T G J``, so overlap compatibility
holds by construction.
"""
from dataclasses import dataclass
from functools import lru_cache
import itertools
import math
from typing import NamedTuple

import numpy as np

from . import kernels


def chart_radius(m):
    """Chart ball radius: 0.8, widened where needed so the 2m charts cover S^{m-1}."""
    # the worst-covered point (1,...,1)/sqrt(m) sits at chart radius sqrt(1 - 1/m)
    return max(0.8, math.sqrt(1.0 - 1.0 / m) + 0.05)


@dataclass(frozen=True)
class Chart:
    id: int
    axis: int
    sign: float
    rho: float
    m: int

    def embed(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        q = np.sqrt(np.clip(1.0 - np.einsum("ni,ni->n", x, x), 0.0, None))
        return np.insert(x, self.axis, self.sign * q, axis=1)

    def project(self, P):
        P = np.atleast_2d(np.asarray(P, dtype=float))
        return np.delete(P, self.axis, axis=1)

    def contains(self, P, margin=0.0):
        """Mask of unit vectors lying in the chart domain (shrunk by ``margin``)."""
        P = np.atleast_2d(P)
        x = self.project(P)
        return (self.sign * P[:, self.axis] > 0) & (np.linalg.norm(x, axis=1) < self.rho - margin)

    def jacobian(self, x):
        """d embed / dx, shape (N, m, m-1)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        N, d = x.shape
        q = np.sqrt(1.0 - np.einsum("ni,ni->n", x, x))
        J = np.zeros((N, d + 1, d))
        keep = [j for j in range(d + 1) if j != self.axis]
        J[:, keep, :] = np.eye(d)
        J[:, self.axis, :] = -self.sign * x / q[:, None]
        return J


@dataclass(frozen=True)
class Atlas:
    m: int
    charts: tuple

    def __getitem__(self, i):
        return self.charts[i]

    def __len__(self):
        return len(self.charts)

    def locate(self, P):
        """Chart id whose center is closest to each point (always a valid chart)."""
        P = np.atleast_2d(P)
        axis = np.argmax(np.abs(P), axis=1)
        neg = P[np.arange(len(P)), axis] < 0
        return 2 * axis + neg.astype(int)


@lru_cache(maxsize=None)
def make_atlas(m):
    """The fixed atlas of 2m orthographic hemispherical charts on S^{m-1}."""
    if m < 2:
        raise ValueError("sphere atlas needs ambient dimension m >= 2")
    rho = chart_radius(m)
    charts = tuple(
        Chart(id=2 * axis + (0 if sign > 0 else 1), axis=axis, sign=sign, rho=rho, m=m)
        for axis in range(m)
        for sign in (1.0, -1.0)
    )
    return Atlas(m=m, charts=charts)


def transition(atlas, a, b, x):
    """Coordinates in chart ``b`` of the point with coordinates ``x`` in chart ``a``."""
    P = atlas[a].embed(x)
    if not np.all(atlas[b].contains(P)):
        raise ValueError(f"point outside the domain of chart {b}")
    out = atlas[b].project(P)
    return out[0] if np.ndim(x) == 1 else out


def transition_jacobian(atlas, a, b, x):
    """Derivative of :func:`transition` (projection is linear, so it is ``S_b J_a``)."""
    J = atlas[a].jacobian(x)
    return np.delete(J, atlas[b].axis, axis=1)


def tangent_basis(P):
    """Orthonormal bases of the tangent spaces at unit vectors ``P``, shape (N, m, m-1)."""
    P = np.atleast_2d(P)
    N, m = P.shape
    # Householder reflection sending e_0 to P; its last m-1 columns span P^perp
    e = np.zeros(m)
    e[0] = 1.0
    v = P - e
    nv = np.einsum("ni,ni->n", v, v)
    H = np.broadcast_to(np.eye(m), (N, m, m)).copy()
    ok = nv > 1e-30
    H[ok] -= 2.0 * v[ok, :, None] * v[ok, None, :] / nv[ok, None, None]
    return H[:, :, 1:]


class SphereForm:
    """A field of symmetric bilinear forms on S^{m-1}.

    ``components(chart, x)`` returns the (N, m-1, m-1) component matrices in
    the given chart. ``ambient`` is an optional m x m representative; ``mask``
    an optional predicate on unit vectors marking where the field is defined.
    """

    def __init__(self, atlas, components, ambient=None, mask=None, label=""):
        self.atlas = atlas
        self._components = components
        self.ambient = ambient
        self.mask = mask
        self.label = label

    @classmethod
    def from_ambient(cls, m, fn, mask=None, label=""):
        atlas = make_atlas(m)

        def components(chart, x):
            P = chart.embed(x)
            return kernels.chart_components(x, chart.axis, chart.sign, fn(P))

        return cls(atlas, components, ambient=fn, mask=mask, label=label)

    @property
    def m(self):
        return self.atlas.m

    def eval(self, chart_id, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self._components(self.atlas[chart_id], x)

    def tangent_matrix(self, P):
        """Form in orthonormal tangent frames at unit vectors ``P``: (N, m-1, m-1)."""
        P = np.atleast_2d(np.asarray(P, dtype=float))
        E = tangent_basis(P)
        if self.ambient is not None:
            G = self.ambient(P)
            return np.einsum("nia,nij,njb->nab", E, G, E)
        ids = self.atlas.locate(P)
        out = np.empty((len(P), self.m - 1, self.m - 1))
        for cid in np.unique(ids):
            sel = ids == cid
            ch = self.atlas[cid]
            x = ch.project(P[sel])
            # tangent frame in chart coordinates: solve J c = E
            J = ch.jacobian(x)
            C = _solve_frames(J, E[sel])
            out[sel] = np.einsum("nia,nij,njb->nab", C, self.eval(cid, x), C)
        return out

    def min_eigenvalue(self, P):
        return np.linalg.eigvalsh(self.tangent_matrix(P)).min(axis=1)

    def _combine(self, other, op, label):
        if self.atlas.m != other.atlas.m:
            raise ValueError("forms live on spheres of different dimension")
        mask = _and_masks(self.mask, other.mask)
        if self.ambient is not None and other.ambient is not None:
            fa, fb = self.ambient, other.ambient
            amb = lambda P: op(fa(P), fb(P))  # noqa: E731
            return SphereForm.from_ambient(self.m, amb, mask, label)
        ca, cb = self._components, other._components
        return SphereForm(self.atlas, lambda ch, x: op(ca(ch, x), cb(ch, x)), None, mask, label)

    def __add__(self, other):
        return self._combine(other, np.add, f"({self.label}+{other.label})")

    def __sub__(self, other):
        return self._combine(other, np.subtract, f"({self.label}-{other.label})")

    def __mul__(self, c):
        c = float(c)
        if self.ambient is not None:
            fa = self.ambient
            amb = lambda P: c * fa(P)  # noqa: E731
            return SphereForm.from_ambient(self.m, amb, self.mask, f"{c:g}*{self.label}")
        ca = self._components
        return SphereForm(self.atlas, lambda ch, x: c * ca(ch, x), None, self.mask, f"{c:g}*{self.label}")

    __rmul__ = __mul__

    def __repr__(self):
        return f"SphereForm(S^{self.m - 1}, {self.label or 'anonymous'})"


def _solve_frames(J, E):
    # J has full column rank; least squares recovers the chart-coordinate frame
    JT = np.swapaxes(J, 1, 2)
    return np.linalg.solve(JT @ J, JT @ E)


def _and_masks(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return lambda P: a(P) & b(P)


def round_metric(m):
    """The unit round metric of S^{m-1} (ambient identity)."""

    def fn(P):
        return np.broadcast_to(np.eye(m), (len(P), m, m)).copy()

    return SphereForm.from_ambient(m, fn, label="round")


def perturbation_ambient(P):
    """A fixed smooth, non-round symmetric field on R^m restricted to unit vectors.

    ``P(p) = D + q(p) v v^T`` with ``|D| <= 0.5`` and ``|q| <= 0.5`` on the unit
    sphere, so its tangent restriction has operator norm at most 1.
    """
    P = np.atleast_2d(P)
    N, m = P.shape
    j = np.arange(1, m + 1)
    D = np.diag(0.5 * np.cos(1.3 * j))
    v = np.sin(0.7 * j)
    v = v / np.linalg.norm(v)
    if m >= 2:
        # |p0 p_last| <= 1/2 and |p0^2 - p1^2| <= 1 on the sphere, so |q| <= 1/2
        q = (2.0 / 3.0) * (P[:, 0] * P[:, -1] + 0.25 * P[:, 0] ** 2 - 0.25 * P[:, 1] ** 2)
    else:
        q = 0.5 * P[:, 0]
    return D[None] + q[:, None, None] * np.outer(v, v)[None]


def perturbation_field(m):
    return SphereForm.from_ambient(m, perturbation_ambient, label="P")


# ---------------------------------------------------------------------------
# C^2 distances


@dataclass(frozen=True)
class SamplingSpec:
    """Grid density and finite-difference step for C^2 distances."""

    points_per_axis: int = 17
    max_points: int = 1296
    fd_step: float = 1e-3

    def __post_init__(self):
        if self.points_per_axis < 2 or self.max_points < 1:
            raise ValueError("grid needs at least 2 points per axis")
        if not self.fd_step > 0:
            raise ValueError("fd_step must be > 0")

    def per_axis(self, d):
        n = self.points_per_axis
        while n > 2 and n**d > self.max_points:
            n -= 1
        return n

    def to_dict(self):
        return {"points_per_axis": self.points_per_axis, "max_points": self.max_points, "fd_step": self.fd_step}


class Distances(NamedTuple):
    d0: float
    d1: float
    d2: float

    @property
    def c2(self):
        return self.d0 + self.d1 + self.d2


@lru_cache(maxsize=None)
def stencil_offsets(d):
    """Offsets (S, d): center, +e_i, -e_i, then (++, +-, -+, --) for each pair i < j."""
    rows = [np.zeros(d)]
    eye = np.eye(d)
    rows += list(eye)
    rows += list(-eye)
    for i, j in itertools.combinations(range(d), 2):
        for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            rows.append(si * eye[i] + sj * eye[j])
    out = np.array(rows)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=None)
def chart_grid(m, spec):
    """Uniform grid over [-rho, rho]^{m-1}, points outside the ball pulled radially onto it."""
    d = m - 1
    rho = chart_radius(m)
    n = spec.per_axis(d)
    ax = np.linspace(-rho, rho, n)
    X = np.stack(np.meshgrid(*([ax] * d), indexing="ij"), axis=-1).reshape(-1, d)
    nr = np.linalg.norm(X, axis=1)
    over = nr > rho
    X[over] *= (rho / nr[over])[:, None]
    X.flags.writeable = False
    return X


def stencil_values(form, chart, spec, mask=None):
    """Component values on every stencil of the chart grid: (Nc, S, d, d)."""
    d = form.m - 1
    X = chart_grid(form.m, spec)
    if mask is not None:
        X = X[mask(chart.embed(X))]
    off = stencil_offsets(d)
    pts = (X[:, None, :] + spec.fd_step * off[None]).reshape(-1, d)
    V = form.eval(chart.id, pts) if len(pts) else np.zeros((0, d, d))
    return V.reshape(len(X), len(off), d, d)


def c2_distance(a, b, spec=None, mask=None):
    """Grid C^0/C^1/C^2 sup distances between two forms over the whole atlas.

    ``mask`` (and any masks carried by the forms) restrict the grid centers.
    Returns :class:`Distances`; ``.c2`` is their sum.
    """
    spec = spec or SamplingSpec()
    if a.atlas is not b.atlas and a.atlas != b.atlas:
        raise ValueError("forms use different atlases")
    diff = a - b
    mask = _and_masks(diff.mask, mask)
    d0 = d1 = d2 = 0.0
    for chart in a.atlas.charts:
        V = stencil_values(diff, chart, spec, mask)
        e0, e1, e2 = kernels.stencil_sup(V, spec.fd_step)
        d0, d1, d2 = max(d0, e0), max(d1, e1), max(d2, e2)
    return Distances(d0, d1, d2)


def overlap_residual(form, n_points=100, seed=0, mask=None):
    """Max violation of the tensor transformation law on chart overlaps.

    For every ordered chart pair, ``n_points`` random points of the overlap are
    compared: ``components_a == T^T components_b T`` with ``T`` the transition
    Jacobian. Returns the max absolute residual.
    """
    atlas = form.atlas
    m = atlas.m
    rng = np.random.default_rng(seed)
    worst = 0.0
    for ca, cb in itertools.permutations(atlas.charts, 2):
        pts = _sample_overlap(ca, cb, n_points, rng, mask)
        if len(pts) == 0:
            continue
        xa = ca.project(pts)
        xb = cb.project(pts)
        T = transition_jacobian(atlas, ca.id, cb.id, xa)
        lhs = form.eval(ca.id, xa)
        rhs = np.einsum("nia,nij,njb->nab", T, form.eval(cb.id, xb), T)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def _sample_overlap(ca, cb, n, rng, mask=None, tries=50):
    out = []
    got = 0
    for _ in range(tries):
        P = rng.normal(size=(8 * n, ca.m))
        P /= np.linalg.norm(P, axis=1, keepdims=True)
        keep = ca.contains(P) & cb.contains(P)
        if mask is not None:
            keep &= mask(P)
        out.append(P[keep])
        got += int(keep.sum())
        if got >= n:
            break
    P = np.concatenate(out)[:n] if out else np.zeros((0, ca.m))
    return P


def random_unit_vectors(m, n, seed=0):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(n, m))
    return P / np.linalg.norm(P, axis=1, keepdims=True)


def c0_distance(a, b, spec=None, mask=None):
    """Sup of component differences on the grid centers only (no stencils)."""
    spec = spec or SamplingSpec()
    diff = a - b
    mask = _and_masks(diff.mask, mask)
    worst = 0.0
    for chart in a.atlas.charts:
        X = chart_grid(a.m, spec)
        if mask is not None:
            X = X[mask(chart.embed(X))]
        if len(X):
            worst = max(worst, float(np.max(np.abs(diff.eval(chart.id, X)))))
    return worst
