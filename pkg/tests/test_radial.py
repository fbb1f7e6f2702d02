import math

import numpy as np
import pytest

from hypext.radial import (
    RadialMetric,
    bump_profile,
    check_hyperbolic_origin,
    constant_family,
    make_bump_family,
    make_euclidean,
    make_family,
    make_hyperbolic,
    make_oscillating_family,
    make_warped_sinh,
    normalized_cut,
    spherical_cut,
)
from hypext.spheres import c0_distance, c2_distance, perturbation_ambient, perturbation_field, random_unit_vectors, round_metric


def _close(a, b, spec, tol):
    return c0_distance(a, b, spec) < tol


@pytest.mark.parametrize("r0", [0.3, 1.0, 4.0])
def test_euclidean_cut(r0, coarse):
    g = make_euclidean(3)
    assert _close(spherical_cut(g, r0), r0**2 * round_metric(3), coarse, 1e-12 * max(1, r0**2))
    assert _close(normalized_cut(g, r0), (r0 / math.sinh(r0)) ** 2 * round_metric(3), coarse, 1e-14)


@pytest.mark.parametrize("r0", [0.5, 2.0, 9.0])
def test_hyperbolic_cut(r0, coarse):
    g = make_hyperbolic(3)
    assert c0_distance(spherical_cut(g, r0), math.sinh(r0) ** 2 * round_metric(3), coarse) <= 1e-14 * math.sinh(r0) ** 2
    assert tuple(c2_distance(normalized_cut(g, r0), round_metric(3), coarse)) == (0.0, 0.0, 0.0)


def test_hyperbolic_cut_ratio():
    g = make_hyperbolic(2)
    x = np.linspace(-0.7, 0.7, 11)[:, None]
    ratio = spherical_cut(g, 1.0).eval(0, x) / spherical_cut(g, 2.0).eval(0, x)
    np.testing.assert_allclose(ratio, math.sinh(1.0) ** 2 / math.sinh(2.0) ** 2, rtol=1e-14)


@pytest.mark.parametrize("r", [0.5, 1.7, 3.0])
def test_hyperbolic_circumference(r):
    cut = spherical_cut(make_hyperbolic(2), r)
    N = 256
    t = 2 * math.pi * np.arange(N) / N
    P = np.stack([np.cos(t), np.sin(t)], axis=1)
    dP = np.stack([-np.sin(t), np.cos(t)], axis=1)
    atlas = cut.atlas
    ids = atlas.locate(P)
    speed = np.empty(N)
    for cid in np.unique(ids):
        sel = ids == cid
        ch = atlas[cid]
        v = ch.project(dP[sel])
        g = cut.eval(cid, ch.project(P[sel]))
        speed[sel] = np.sqrt(np.einsum("ni,nij,nj->n", v, g, v))
    assert speed.mean() * 2 * math.pi == pytest.approx(2 * math.pi * math.sinh(r), rel=1e-6)


def test_warped_sinh_normalized_cut_is_constant(coarse):
    gp = lambda U: np.eye(3)[None] + 0.2 * perturbation_ambient(U)  # noqa: E731
    g = make_warped_sinh(3, gp)
    ref = normalized_cut(g, 1.0)
    for r0 in (0.2, 3.0, 25.0):
        assert tuple(c2_distance(normalized_cut(g, r0), ref, coarse)) == (0.0, 0.0, 0.0)


def test_scaled_metric_scales_cut(coarse):
    g = make_euclidean(3)
    g4 = RadialMetric(3, lambda r, U: 4.0 * g.hat(r, U))
    assert c0_distance(spherical_cut(g4, 1.3), 4.0 * spherical_cut(g, 1.3), coarse) < 1e-13


@pytest.mark.parametrize("maker", [make_hyperbolic, make_euclidean])
def test_normalized_times_sinh2_is_cut(maker):
    g = maker(3)
    r0 = 2.2
    x = np.random.default_rng(0).uniform(-0.5, 0.5, (40, 2))
    for cid in range(6):
        np.testing.assert_allclose(math.sinh(r0) ** 2 * normalized_cut(g, r0).eval(cid, x), spherical_cut(g, r0).eval(cid, x), rtol=1e-14)


def test_cut_radius_must_be_positive():
    g = make_hyperbolic(2)
    for r0 in (0.0, -1.0):
        with pytest.raises(ValueError):
            spherical_cut(g, r0)
        with pytest.raises(ValueError):
            normalized_cut(g, r0)


def test_bump_profile_shape():
    x = np.linspace(-3, 3, 601)
    chi = bump_profile(x, -1.0, 2.0)
    assert np.all(chi[x <= -1] == 0) and np.all(chi[x >= 1] == 1)
    assert np.all(np.diff(chi) >= 0)
    # C^2 at the junctions: one-sided difference quotients vanish to second order
    h = 1e-4
    for x0 in (-1.0, 1.0):
        d1 = (bump_profile(x0 + h, -1, 2) - bump_profile(x0 - h, -1, 2)) / (2 * h)
        d2 = (bump_profile(x0 + h, -1, 2) - 2 * bump_profile(x0, -1, 2) + bump_profile(x0 - h, -1, 2)) / h**2
        assert abs(d1) < 1e-7 and abs(d2) < 1e-3


class TestBumpFamily:
    fam = make_bump_family(3, B=-1.0, amp=0.1, L=2.0)

    def test_round_below_B(self, coarse):
        for lam, b in [(2.0, -1.0), (5.0, -3.0), (10.0, -1.5)]:
            assert tuple(c2_distance(self.fam.normalized_cut_at_offset(lam, b), round_metric(3), coarse)) == (0.0, 0.0, 0.0)

    def test_saturated_above(self, coarse):
        full = round_metric(3) + 0.1 * perturbation_field(3)
        for lam, b in [(3.0, 1.0), (7.0, 4.0)]:
            assert c0_distance(self.fam.normalized_cut_at_offset(lam, b), full, coarse) < 1e-15

    @pytest.mark.parametrize("b", [-2.0, -0.5, 0.0, 0.7, 3.0])
    def test_cut_equals_limit_for_every_lambda(self, b, coarse):
        for lam in (1.5, 4.0, 30.0):
            if lam > max(self.fam.lambda0, -b):
                # zero up to the rounding of (lam + b) - lam inside the profile
                d = c2_distance(self.fam.normalized_cut_at_offset(lam, b), self.fam.limit_form(b), coarse)
                assert d.d0 < 1e-14 and d.c2 < 1e-8

    def test_positive_definite(self):
        U = random_unit_vectors(3, 500, seed=4)
        for lam in (2.0, 8.0):
            for r in (0.5, lam - 1, lam, lam + 0.5, lam + 3):
                assert normalized_cut(self.fam.at(lam), r).min_eigenvalue(U).min() > 0.5

    def test_domain(self):
        with pytest.raises(ValueError):
            self.fam.normalized_cut_at_offset(0.5, -1.0)


def test_bump_positivity_violation():
    with pytest.raises(ValueError):
        make_bump_family(3, amp=5.0)
    with pytest.raises(ValueError):
        make_bump_family(3, L=0.0)


def test_check_hyperbolic_origin():
    spec = None
    hyp = constant_family(make_hyperbolic(3))
    ok, worst = check_hyperbolic_origin(hyp, 7.0, [(3.0, 1.0), (10.0, 7.0)], spec)
    assert ok and worst == 0.0
    bump = make_bump_family(3, B=-1.0)
    samples = [(lam, b) for lam in (3.0, 6.0) for b in (-2.0, -1.5, -1.0)]
    assert check_hyperbolic_origin(bump, -1.0, samples, spec)[0]
    shifted = samples + [(3.0, -0.5), (6.0, -0.6)]
    ok, worst = check_hyperbolic_origin(bump, -0.5, shifted, spec)
    assert not ok and worst > 1e-6
    euc = constant_family(make_euclidean(3))
    assert not check_hyperbolic_origin(euc, 0.0, [(3.0, -1.0)], spec)[0]


def test_check_hyperbolic_origin_rejects_large_offsets():
    with pytest.raises(ValueError):
        check_hyperbolic_origin(make_bump_family(3), -1.0, [(3.0, 0.0)])


def test_oscillating_family_moves_with_lambda(coarse):
    osc = make_oscillating_family(3)
    a = osc.normalized_cut_at_offset(20.0, 1.0)
    b = osc.normalized_cut_at_offset(22.0, 1.0)
    assert c0_distance(a, b, coarse) > 1e-2
    assert c0_distance(osc.normalized_cut_at_offset(20.0, -2.0), round_metric(3), coarse) == 0.0


def test_family_catalog():
    for name in ("hyperbolic", "euclidean", "bump", "oscillating"):
        assert make_family(name, 3).name == name
    with pytest.raises(ValueError):
        make_family("nope", 3)
