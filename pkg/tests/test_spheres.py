import itertools
import math

import numpy as np
import pytest

from hypext.spheres import (
    SamplingSpec,
    SphereForm,
    c2_distance,
    chart_grid,
    chart_radius,
    make_atlas,
    overlap_residual,
    perturbation_field,
    random_unit_vectors,
    round_metric,
    tangent_basis,
    transition,
    transition_jacobian,
)


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_atlas_size_and_determinism(m):
    atlas = make_atlas(m)
    assert len(atlas) == 2 * m
    assert [c.id for c in atlas.charts] == list(range(2 * m))
    assert make_atlas(m) is atlas


def test_atlas_rejects_small_m():
    with pytest.raises(ValueError):
        make_atlas(1)


@pytest.mark.parametrize("m", [2, 3, 5])
def test_atlas_covers_sphere(m):
    atlas = make_atlas(m)
    P = random_unit_vectors(m, 100_000, seed=m)
    covered = np.zeros(len(P), bool)
    for ch in atlas.charts:
        covered |= ch.contains(P)
    assert covered.all()
    # locate always returns a chart that contains the point
    ids = atlas.locate(P)
    for cid in range(len(atlas)):
        sel = ids == cid
        assert atlas[cid].contains(P[sel]).all()


@pytest.mark.parametrize("m", [2, 3, 5])
def test_charts_extendable(m):
    # the closed chart ball stays strictly inside the open hemisphere
    assert chart_radius(m) < 1.0
    ch = make_atlas(m)[0]
    edge = np.zeros((1, m - 1))
    edge[0, 0] = chart_radius(m)
    P = ch.embed(edge)
    assert P[0, ch.axis] > 0.2
    np.testing.assert_allclose(ch.project(P), edge)


def test_transition_identity_and_inverse():
    atlas = make_atlas(4)
    rng = np.random.default_rng(0)
    x = rng.uniform(-0.3, 0.3, size=(20, 3))
    np.testing.assert_allclose(transition(atlas, 2, 2, x), x, atol=1e-15)
    # chart 0 is +e0, chart 2 is +e1; points near their common region
    P = np.array([[1.0, 1.0, 0.1, -0.2]])
    P /= np.linalg.norm(P)
    xa = atlas[0].project(P)
    xb = transition(atlas, 0, 2, xa)
    np.testing.assert_allclose(atlas[2].embed(xb), P, atol=1e-12)
    np.testing.assert_allclose(transition(atlas, 2, 0, xb), xa, atol=1e-12)


def test_transition_circle_matches_angles():
    atlas = make_atlas(2)
    # chart (axis 0, +) has coordinate sin(phi); chart (axis 1, +) has cos(phi)
    for phi in np.linspace(0.7, 0.9, 7):
        x = np.array([[math.sin(phi)]])
        assert transition(atlas, 0, 2, x)[0, 0] == pytest.approx(math.cos(phi), abs=1e-14)
    # chart (axis 1, -) has coordinate cos(phi) for phi in (pi, 2 pi)
    for phi in np.linspace(math.pi + 0.3, 2 * math.pi - 0.3, 5):
        P = np.array([[math.cos(phi), math.sin(phi)]])
        cid = 3
        assert atlas[cid].project(P)[0, 0] == pytest.approx(math.cos(phi), abs=1e-15)


def test_transition_outside_target():
    atlas = make_atlas(3)
    with pytest.raises(ValueError):
        transition(atlas, 0, 1, np.array([0.1, 0.1]))


def test_transition_jacobian_matches_fd():
    atlas = make_atlas(3)
    x = np.array([[0.7, 0.1]])
    J = transition_jacobian(atlas, 0, 2, x)[0]
    h = 1e-6
    fd = np.stack([(transition(atlas, 0, 2, x + h * e) - transition(atlas, 0, 2, x - h * e))[0] / (2 * h) for e in np.eye(2)], axis=1)
    np.testing.assert_allclose(J, fd, atol=1e-8)


def test_round_metric_components():
    sigma = round_metric(4)
    assert np.allclose(sigma.eval(0, np.zeros((1, 3)))[0], np.eye(3))
    rng = np.random.default_rng(1)
    x = rng.uniform(-0.5, 0.5, size=(30, 3))
    q = 1 - np.sum(x * x, axis=1)
    want = np.eye(3)[None] + x[:, :, None] * x[:, None, :] / q[:, None, None]
    for cid in range(8):
        np.testing.assert_allclose(sigma.eval(cid, x), want, atol=1e-13)
    assert np.linalg.eigvalsh(sigma.eval(5, x)).min() >= 1 - 1e-12


def test_round_metric_great_circle_length():
    sigma = round_metric(3)
    atlas = sigma.atlas
    N = 400
    t = 2 * math.pi * np.arange(N) / N
    gamma = np.stack([np.cos(t), np.sin(t) * math.cos(0.4), np.sin(t) * math.sin(0.4)], axis=1)
    dgamma = np.stack([-np.sin(t), np.cos(t) * math.cos(0.4), np.cos(t) * math.sin(0.4)], axis=1)
    speed = np.empty(N)
    ids = atlas.locate(gamma)
    for cid in np.unique(ids):
        sel = ids == cid
        ch = atlas[cid]
        x = ch.project(gamma[sel])
        v = ch.project(dgamma[sel])
        g = sigma.eval(cid, x)
        speed[sel] = np.sqrt(np.einsum("ni,nij,nj->n", v, g, v))
    # periodic trapezoid rule
    assert speed.mean() * 2 * math.pi == pytest.approx(2 * math.pi, abs=1e-6)


def test_tangent_basis_orthonormal():
    P = random_unit_vectors(5, 200, seed=2)
    P[0] = [1, 0, 0, 0, 0]
    E = tangent_basis(P)
    np.testing.assert_allclose(np.einsum("nia,nib->nab", E, E), np.broadcast_to(np.eye(4), (200, 4, 4)), atol=1e-13)
    assert np.max(np.abs(np.einsum("ni,nia->na", P, E))) < 1e-13


@pytest.mark.parametrize("m", [2, 3, 5])
def test_overlap_compatibility(m):
    assert overlap_residual(round_metric(m), n_points=100) < 1e-8
    assert overlap_residual(perturbation_field(m), n_points=100) < 1e-8


def test_chart_native_form_overlap():
    # a field given only in chart components, built compatible by hand from an ambient one
    amb = perturbation_field(3)
    native = SphereForm(amb.atlas, lambda ch, x: amb.eval(ch.id, x))
    assert overlap_residual(native) < 1e-8
    P = random_unit_vectors(3, 50, seed=3)
    np.testing.assert_allclose(native.tangent_matrix(P), amb.tangent_matrix(P), atol=1e-12)


def test_form_arithmetic():
    s, p = round_metric(3), perturbation_field(3)
    x = np.array([[0.1, -0.2]])
    np.testing.assert_allclose((s + 0.5 * p).eval(1, x), s.eval(1, x) + 0.5 * p.eval(1, x))
    np.testing.assert_allclose((s - p).eval(4, x), s.eval(4, x) - p.eval(4, x))


def test_c2_distance_zero_on_self(coarse):
    s = round_metric(4)
    assert tuple(c2_distance(s, s, coarse)) == (0.0, 0.0, 0.0)


def test_c2_distance_scales_linearly(coarse):
    g = round_metric(3) + 0.1 * perturbation_field(3)
    base = c2_distance(2.0 * g, g, coarse)
    for c in (0.5, 1.5, 3.0):
        d = c2_distance(c * g, g, coarse)
        for got, ref in zip(d, base):
            assert got == pytest.approx(abs(c - 1) * ref, rel=1e-9)
    assert base.d0 > 0 and base.d1 > 0 and base.d2 > 0


def test_c2_distance_pseudometric(coarse):
    a = round_metric(3)
    b = a + 0.05 * perturbation_field(3)
    c = 1.1 * a
    dab, dba = c2_distance(a, b, coarse), c2_distance(b, a, coarse)
    assert tuple(dab) == tuple(dba)
    dac, dbc = c2_distance(a, c, coarse), c2_distance(b, c, coarse)
    for i in range(3):
        assert dac[i] <= dab[i] + dbc[i] + 1e-12


def test_c2_distance_grid_refinement():
    sigma = round_metric(3)
    pert = sigma + 0.05 * perturbation_field(3)
    base = c2_distance(sigma, pert, SamplingSpec())
    fine = c2_distance(sigma, pert, SamplingSpec(points_per_axis=33, max_points=33**2))
    for a, b in zip(base, fine):
        assert a == pytest.approx(b, rel=0.05)


def test_c2_distance_mask_restricts(coarse):
    a = round_metric(3)
    b = a + 0.05 * perturbation_field(3)
    full = c2_distance(a, b, coarse)
    none = c2_distance(a, b, coarse, mask=lambda P: np.zeros(len(P), bool))
    assert tuple(none) == (0.0, 0.0, 0.0)
    half = c2_distance(a, b, coarse, mask=lambda P: P[:, 2] > 0)
    assert half.d0 <= full.d0


def test_c2_distance_rejects_mismatched_atlas(coarse):
    with pytest.raises(ValueError):
        c2_distance(round_metric(3), round_metric(4), coarse)


def test_sampling_spec_validation():
    with pytest.raises(ValueError):
        SamplingSpec(points_per_axis=1)
    with pytest.raises(ValueError):
        SamplingSpec(fd_step=0.0)
    assert SamplingSpec().per_axis(4) ** 4 <= 1296


def test_grid_points_in_chart_balls():
    for m in (3, 5):
        X = chart_grid(m, SamplingSpec())
        assert np.linalg.norm(X, axis=1).max() <= chart_radius(m) + 1e-12


def test_every_pair_overlap_sampled():
    # overlap sampling finds points for adjacent chart pairs
    atlas = make_atlas(3)
    from hypext.spheres import _sample_overlap

    rng = np.random.default_rng(0)
    for a, b in itertools.permutations(atlas.charts, 2):
        if a.axis != b.axis:
            assert len(_sample_overlap(a, b, 10, rng)) == 10
