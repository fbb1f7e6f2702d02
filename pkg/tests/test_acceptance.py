"""Acceptance suite: one printed PASS/FAIL line per criterion, at full grid density."""
import json
import math
import time

import numpy as np
import pytest

from hypext import hyptrig, limits, runner
from hypext.extension import extension_cut, extension_normalized_cut, join_to_sphereform, pullback_oracle_cut
from hypext.radial import make_bump_family, make_euclidean, make_family, make_hyperbolic
from hypext.spheres import SamplingSpec, c2_distance, round_metric

HALF_PI = 0.5 * math.pi
SPEC = SamplingSpec()
B_GRID = tuple(float(b) for b in np.arange(-4.0, 2.0 + 1e-9, 0.5))
LP_GRID = tuple(float(x) for x in range(6, 25, 2))
THETAS = (HALF_PI, math.pi / 4)


def report(capsys, tag, ok, detail, elapsed, limit):
    status = "PASS" if ok and elapsed < limit else "FAIL"
    with capsys.disabled():
        print(f"\n[{status}] {tag}: {detail}; {elapsed:.1f} s (limit {limit:g} s)")


# -- criterion 1 --------------------------------------------------------------


def test_c1_identity_suite(capsys):
    t0 = time.perf_counter()
    rows = runner.identity_suites(triangles=10_000, fermi_points=1000, seed=0)
    elapsed = time.perf_counter() - t0
    res = {name: (r, tol) for name, r, tol in rows}
    tri = max(res[n][0] for n in ("triangle_sine_law", "triangle_leg_relation", "triangle_pythagoras"))
    fermi = res["fermi_polar"][0]
    ok = tri < 1e-9 and fermi < 1e-6 and all(r < tol for r, tol in res.values())
    report(capsys, "C1 identity suite", ok, f"triangle invariants {tri:.2e} (<1e-9), Fermi/polar {fermi:.2e} (<1e-6)", elapsed, 10)
    assert tri < 1e-9
    assert fermi < 1e-6
    assert all(r < tol for r, tol in res.values()), res
    assert elapsed < 10


# -- criterion 2 --------------------------------------------------------------


def round_closure_rows():
    rows = []
    for k, n in ((1, 2), (2, 2), (2, 3)):
        for s in (2.0, 5.0, 8.0):
            form = join_to_sphereform(extension_normalized_cut(make_hyperbolic(n), k, s))
            rows.append((k, n, s, *c2_distance(form, round_metric(k + n), SPEC)))
    return rows


def test_c2_round_closure(capsys, tmp_path):
    t0 = time.perf_counter()
    rows = round_closure_rows()
    elapsed = time.perf_counter() - t0
    c0 = max(r[3] for r in rows)
    c2 = max(r[3] + r[4] + r[5] for r in rows)
    ok = c0 < 1e-8 and c2 < 1e-5
    report(capsys, "C2 round closure", ok, f"max C0 {c0:.2e} (<1e-8), max C2 {c2:.2e} (<1e-5) over 9 (k,n,s) cases", elapsed, 60)
    assert c0 < 1e-8
    assert c2 < 1e-5
    assert elapsed < 60


# -- criterion 3 --------------------------------------------------------------


def test_c3_cut_formula_vs_oracle(capsys):
    t0 = time.perf_counter()
    k, n = 2, 3
    members = {"hyperbolic": make_hyperbolic(n), "euclidean": make_euclidean(n), "bump": make_bump_family(n).at(4.0)}
    worst = {}
    for name, h in members.items():
        for s in (2.0, 5.0, 8.0):
            closed = join_to_sphereform(extension_cut(h, k, s))
            oracle = pullback_oracle_cut(h, k, s)
            worst[(name, s)] = c2_distance(closed, oracle, SPEC).d0
    elapsed = time.perf_counter() - t0
    top = max(worst.values())
    ok = top < 1e-4
    report(capsys, "C3 cut formula vs pullback oracle", ok, f"max C0 {top:.2e} (<1e-4) over 3 families x s in {{2,5,8}}", elapsed, 300)
    assert top < 1e-4
    assert elapsed < 300


# -- criterion 4 --------------------------------------------------------------


def converge_config(theta, out_dir):
    return runner.ExperimentConfig(
        command="converge",
        family="bump",
        family_params={"B": -1.0, "amp": 0.1, "L": 2.0},
        n=3,
        k=2,
        theta=theta,
        b_grid=B_GRID,
        lambda_grid=LP_GRID,
        out_dir=str(out_dir),
    )


@pytest.fixture(scope="module")
def c4_runs(tmp_path_factory):
    runs = {}
    t0 = time.perf_counter()
    for theta in THETAS:
        out = tmp_path_factory.mktemp("c4")
        status, summary = runner.run(converge_config(theta, out))
        runs[theta] = (status, summary, out)
    return runs, time.perf_counter() - t0


def _csv_rows(path):
    lines = path.read_text().splitlines()[1:]
    return [tuple(float(x) for x in line.split(",")) for line in lines]


def test_c4_bump_family_convergence(capsys, c4_runs):
    runs, elapsed = c4_runs
    details = []
    ok = True
    for theta, (status, summary, out) in runs.items():
        res = summary["result"]
        rows = _csv_rows(out / "converge.csv")
        by_b = {}
        for lp, b, d0, d1, d2 in rows:
            by_b.setdefault(b, []).append((lp, d0 + d1 + d2))
        decreasing = all(limits.eventually_decreasing([c for _, c in seq]) for seq in by_b.values())
        final = max(seq[-1][1] for seq in by_b.values())
        at20 = max(c for seq in by_b.values() for lp, c in seq if lp == 20.0)
        off = res["offsets"]["max_error"]
        good = status == 0 and res["verdict"] == "converged" and decreasing and final < 1e-3 and at20 < 1e-3 and off < 1e-2
        ok &= good
        details.append(f"theta={theta:.4f}: verdict {res['verdict']}, final C2 {final:.2e}, C2 at lambda'=20 {at20:.2e}, offset err {off:.1e}")
    report(capsys, "C4 bump family convergence", ok, "; ".join(details), elapsed, 900)
    assert ok
    assert elapsed < 900


# -- criterion 5 --------------------------------------------------------------


def test_c5_beta_zero_uniformity(capsys):
    t0 = time.perf_counter()
    fam = make_bump_family(3, B=-1.0)
    c, c_prime = 0.5, -0.5
    details = []
    worst = 0.0
    betas = []
    for theta in THETAS:
        res = limits.beta1_threshold(B=-1.0, c=c, c_prime=c_prime, theta=theta)
        betas.append(res.beta1)
        resid = limits.beta0_block_residual(fam, theta, res.beta1, B_GRID, LP_GRID, res.onset, c_prime)
        worst = max(worst, resid)
        details.append(f"theta={theta:.4f}: beta1={res.beta1:.6f}, onset {res.onset:g}")
    elapsed = time.perf_counter() - t0
    ok = min(betas) > 0 and worst < 1e-12
    report(capsys, "C5 uniformity near beta=0", ok, "; ".join(details) + f"; block residual {worst:.1e} (<1e-12)", elapsed, 60)
    assert min(betas) > 0
    assert worst < 1e-12
    assert elapsed < 60


# -- criterion 6 --------------------------------------------------------------


def test_c6_boundary_positive_definite(capsys):
    t0 = time.perf_counter()
    fam = make_bump_family(3, B=-1.0)
    eig_n, eig_k, coth_err = math.inf, math.inf, 0.0
    for b in B_GRID:
        rep = limits.boundary_checks(fam, HALF_PI, 2, b, 24.0)
        eig_n = min(eig_n, rep["min_eig_sphere_n"])
        eig_k = min(eig_k, min(rep["min_eig_sphere_k"].values()))
        coth_err = max(coth_err, rep["coth2_error"])
    elapsed = time.perf_counter() - t0
    ok = eig_n >= 0.5 and eig_k >= 0.5 and coth_err < 1e-6
    report(capsys, "C6 boundary positive definiteness", ok, f"min eig S^(n-1) side {eig_n:.4f}, S^(k-1) side {eig_k:.4f} (>=0.5), coth^2 error {coth_err:.1e} (<1e-6)", elapsed, 30)
    assert eig_n >= 0.5 and eig_k >= 0.5
    assert coth_err < 1e-6
    assert elapsed < 30


# -- criterion 7 --------------------------------------------------------------


def test_c7_negative_control(capsys):
    t0 = time.perf_counter()
    osc = make_family("oscillating", 3)
    rep = limits.cauchy_scan(osc, HALF_PI, 2, B_GRID, limits.default_pairs(LP_GRID), SPEC)
    elapsed = time.perf_counter() - t0
    failing = sorted(b for b, v in rep.per_b.items() if not v["passed"])
    ok = rep.verdict == "diverged"
    report(capsys, "C7 oscillating negative control", ok, f"verdict {rep.verdict}, non-Cauchy for b in [{failing[0]:g}, {failing[-1]:g}]", elapsed, 120)
    assert rep.verdict == "diverged"
    assert elapsed < 120


# -- criterion 8 --------------------------------------------------------------


def _summary_without_dir(out):
    # the output directory is the one field that legitimately differs
    data = json.loads((out / "summary.json").read_text())
    del data["config"]["output"]["dir"]
    return data


def test_c8_determinism(capsys, c4_runs, tmp_path):
    t0 = time.perf_counter()
    a = tmp_path / "c2a.csv"
    b = tmp_path / "c2b.csv"
    header = ["k", "n", "s", "d0", "d1", "d2"]
    runner.write_csv(a, header, round_closure_rows())
    runner.write_csv(b, header, round_closure_rows())
    same = a.read_bytes() == b.read_bytes()
    runs, _ = c4_runs
    for theta, (_, _, out) in runs.items():
        again = tmp_path / f"c4_{theta:.4f}"
        runner.run(converge_config(theta, again))
        for name in ("converge.csv", "offsets.csv"):
            same &= (out / name).read_bytes() == (again / name).read_bytes()
        same &= _summary_without_dir(out) == _summary_without_dir(again)
    elapsed = time.perf_counter() - t0
    report(capsys, "C8 determinism", same, "criteria 2 and 4 CSVs byte-identical on rerun, summaries equal apart from output dir", elapsed, math.inf)
    assert same
