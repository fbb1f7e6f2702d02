"""Metrics with a center, their spherical cuts, and one-parameter families.

A metric ``g = g_r + dr^2`` on R^n - {0} is stored through its *normalized*
cut field ``hat(r, U)``: an ambient n x n representative of
``g_r / sinh(r)^2`` at unit vectors ``U``. Storing the normalized field keeps
everything finite at large radii; the plain cut is ``sinh(r)^2 * hat``.
"""
from dataclasses import dataclass, field
import math
from typing import Callable, Optional

import numpy as np

from .spheres import (
    SamplingSpec,
    SphereForm,
    c0_distance,
    perturbation_ambient,
    random_unit_vectors,
    round_metric,
    tangent_basis,
)


def _eye(n, N):
    return np.broadcast_to(np.eye(n), (N, n, n)).copy()


@dataclass(frozen=True)
class RadialMetric:
    n: int
    hat: Callable
    label: str = ""

    def hat_ambient(self, r, U):
        U = np.atleast_2d(U)
        r = np.broadcast_to(np.asarray(r, dtype=float), (len(U),))
        return self.hat(r, U)

    def cut_ambient(self, r, U):
        r = np.asarray(r, dtype=float)
        H = self.hat_ambient(r, U)
        return (np.sinh(np.broadcast_to(r, (len(H),))) ** 2)[:, None, None] * H

    def cut(self, r0):
        return spherical_cut(self, r0)

    def normalized_cut(self, r0):
        return normalized_cut(self, r0)


def _check_radius(r0):
    if not r0 > 0:
        raise ValueError(f"cut radius must be > 0, got {r0}")


def spherical_cut(g, r0):
    """The form ``g_{r0}`` on S^{n-1}."""
    _check_radius(r0)
    return SphereForm.from_ambient(g.n, lambda P: g.cut_ambient(r0, P), label=f"{g.label}_cut({r0:g})")


def normalized_cut(g, r0):
    """``g_{r0} / sinh(r0)^2``."""
    _check_radius(r0)
    return SphereForm.from_ambient(g.n, lambda P: g.hat_ambient(r0, P), label=f"{g.label}_hat({r0:g})")


def make_hyperbolic(n):
    """Hyperbolic space: ``g_r = sinh(r)^2 sigma``."""
    return RadialMetric(n, lambda r, U: _eye(n, len(U)), label="hyperbolic")


def make_euclidean(n):
    """Euclidean space: ``g_r = r^2 sigma``."""

    def hat(r, U):
        with np.errstate(invalid="ignore"):
            f = np.where(r == 0, 1.0, r / np.sinh(np.where(r == 0, 1.0, r)))
        return (f**2)[:, None, None] * _eye(n, len(U))

    return RadialMetric(n, hat, label="euclidean")


def make_warped_sinh(n, gprime):
    """``g_r = sinh(r)^2 g'`` for a fixed ambient field ``gprime(U)``."""
    return RadialMetric(n, lambda r, U: gprime(U), label="warped_sinh")


def bump_profile(x, B, L=2.0):
    """C^2 quintic smoothstep: 0 for ``x <= B``, 1 for ``x >= B + L``."""
    s = np.clip((np.asarray(x, dtype=float) - B) / L, 0.0, 1.0)
    return s**3 * (10.0 - 15.0 * s + 6.0 * s**2)


@dataclass(frozen=True)
class OdotFamily:
    """``lam -> h_lam`` sharing a center, for ``lam > lambda0``.

    ``limit(b, U)`` is the analytic normalized cut limit at offsets ``b`` (array
    aligned with ``U``) when one is known.
    """

    name: str
    n: int
    lambda0: float
    at: Callable
    hyperbolic_origin_B: Optional[float] = None
    limit: Optional[Callable] = None
    params: dict = field(default_factory=dict)

    def normalized_cut_at_offset(self, lam, b):
        """Normalized cut of ``h_lam`` at radius ``lam + b``."""
        if not lam > max(self.lambda0, -b):
            raise ValueError(f"need lambda > max(lambda0, -b); got lambda={lam}, b={b}")
        return normalized_cut(self.at(lam), lam + b)

    def limit_form(self, b):
        if self.limit is None:
            raise ValueError(f"family {self.name!r} has no analytic cut limit")
        return SphereForm.from_ambient(self.n, lambda P: self.limit(np.full(len(P), float(b)), P), label=f"limit({b:g})")


def constant_family(metric, name=None):
    """The family ``h_lam = metric`` for every ``lam``."""
    if metric.label == "hyperbolic":
        B = math.inf
        limit = lambda b, U: _eye(metric.n, len(U))  # noqa: E731
    elif metric.label == "euclidean":
        B = None
        limit = lambda b, U: np.zeros((len(U), metric.n, metric.n))  # noqa: E731
    else:
        B, limit = None, None
    return OdotFamily(name or metric.label, metric.n, 0.0, lambda lam: metric, B, limit, {})


def _positivity_margin(n, amp, samples=2000, seed=7):
    U = random_unit_vectors(n, samples, seed)
    E = tangent_basis(U)
    Pt = np.einsum("nia,nij,njb->nab", E, perturbation_ambient(U), E)
    worst = math.inf
    for c in np.linspace(0.0, 1.0, 5):
        lam = np.linalg.eigvalsh(np.eye(n - 1)[None] + c * amp * Pt)
        worst = min(worst, float(lam.min()))
    return worst


def make_bump_family(n, B=-1.0, amp=0.1, L=2.0):
    """Synthetic family, hyperbolic around the origin, with exact cut limits.

    ``h_lam`` has normalized cut ``sigma + chi(rho - lam) * amp * P`` at radius
    ``rho``, with ``chi`` the smoothstep switching on over ``[B, B + L]``. The
    normalized cut at ``lam + b`` is therefore ``sigma + chi(b) amp P`` for
    every ``lam``, which is also the cut limit.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if L <= 0:
        raise ValueError("bump width L must be > 0")
    margin = _positivity_margin(n, amp)
    if margin <= 0:
        raise ValueError(f"amp={amp} breaks positivity (min eigenvalue {margin:.3g})")

    def member(lam):
        def hat(r, U):
            chi = bump_profile(r - lam, B, L)
            return _eye(n, len(U)) + (amp * chi)[:, None, None] * perturbation_ambient(U)

        return RadialMetric(n, hat, label=f"bump[{lam:g}]")

    def limit(b, U):
        chi = bump_profile(b, B, L)
        return _eye(n, len(U)) + (amp * chi)[:, None, None] * perturbation_ambient(U)

    return OdotFamily("bump", n, max(0.0, -B), member, B, limit, {"B": B, "amp": amp, "L": L})


def make_oscillating_family(n, B=-1.0, amp=0.1, L=2.0):
    """Counterexample: normalized cuts ``sigma + chi(b) sin(lam)^2 amp P`` never settle for b > B."""
    if _positivity_margin(n, amp) <= 0:
        raise ValueError(f"amp={amp} breaks positivity")

    def member(lam):
        osc = math.sin(lam) ** 2

        def hat(r, U):
            chi = bump_profile(r - lam, B, L)
            return _eye(n, len(U)) + (amp * osc * chi)[:, None, None] * perturbation_ambient(U)

        return RadialMetric(n, hat, label=f"oscillating[{lam:g}]")

    return OdotFamily("oscillating", n, max(0.0, -B), member, B, None, {"B": B, "amp": amp, "L": L})


def make_family(name, n, **params):
    """Catalog lookup: ``hyperbolic``, ``euclidean``, ``bump``, ``oscillating``."""
    if name == "hyperbolic":
        return constant_family(make_hyperbolic(n))
    if name == "euclidean":
        return constant_family(make_euclidean(n))
    if name == "bump":
        return make_bump_family(n, **params)
    if name == "oscillating":
        return make_oscillating_family(n, **params)
    raise ValueError(f"unknown family {name!r}")


def check_hyperbolic_origin(fam, B, samples, spec=None, tol=1e-9):
    """Check that normalized cuts at ``lam + b`` are round for the sampled ``(lam, b)``, ``b <= B``.

    Returns ``(ok, max_residual)``.
    """
    sigma = round_metric(fam.n)
    worst = 0.0
    for lam, b in samples:
        if b > B:
            raise ValueError(f"sample offset b={b} exceeds B={B}")
        worst = max(worst, c0_distance(fam.normalized_cut_at_offset(lam, b), sigma, spec))
    return worst < tol, worst
