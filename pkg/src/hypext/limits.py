"""Cut-limit diagnostics for theta-reparametrized extension families.

For a family ``h_lam`` and angle ``theta``, the extension family is indexed by
``lam'`` with ``lam = lambda_of(lam', theta)``. Its normalized cut at
``lam' + b`` has S^{n-1} block ``sin^2(beta) hhat_{lam, r(lam' + b, beta)}``,
which should approach ``sin^2(beta) hhat_inf^{b + ln(sin beta / sin theta)}``.
The scans below measure that approach on sphere grids.
"""
from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import dataclass, field
import io
import math
import os
from typing import Callable, Optional

import numpy as np

from . import hyptrig
from .extension import (
    DEFAULT_DELTA,
    JoinForm,
    extension_normalized_cut,
    join_to_sphereform,
)
from .spheres import (
    SamplingSpec,
    c2_distance,
    perturbation_ambient,
    random_unit_vectors,
    tangent_basis,
)

HALF_PI = 0.5 * math.pi

EPS_C2 = 1e-3
EPS_C0 = 1e-5
# FD second differences of roundoff-level fields sit near 1e-8
NOISE_FLOOR = 1e-7


def worker_count():
    try:
        return max(1, int(os.environ.get("HYPEXT_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    items = list(items)
    workers = min(worker_count(), len(items)) if items else 1
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


@dataclass(frozen=True)
class Row:
    lambda_prime: float
    b: float
    d0: float
    d1: float
    d2: float
    lambda_prime_2: Optional[float] = None

    @property
    def c2(self):
        return self.d0 + self.d1 + self.d2


@dataclass
class ConvergenceReport:
    rows: list
    meta: dict
    verdict: str
    thresholds: dict
    per_b: dict = field(default_factory=dict)

    def csv_text(self):
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        pair = any(r.lambda_prime_2 is not None for r in self.rows)
        head = ["lambda_prime", "lambda_prime_2", "b", "d0", "d1", "d2"] if pair else ["lambda_prime", "b", "d0", "d1", "d2"]
        wr.writerow(head)
        for r in self.rows:
            vals = [r.lambda_prime] + ([r.lambda_prime_2] if pair else []) + [r.b, r.d0, r.d1, r.d2]
            wr.writerow([f"{v:.17g}" for v in vals])
        return buf.getvalue()

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(self.csv_text())

    def summary(self):
        return {
            "verdict": self.verdict,
            "thresholds": self.thresholds,
            "meta": self.meta,
            "per_b": {f"{b:g}": v for b, v in sorted(self.per_b.items())},
        }


@dataclass(frozen=True)
class LimitCandidate:
    form_at: Callable  # b -> SphereForm on S^{n+k-1}
    provenance: str  # "analytic" or "extrapolated"


def predicted_limit_join(hhat_inf, theta, k, b, n):
    """Join data of ``cos^2 sigma + sin^2 hhat_inf^{b + ln(sin beta / sin theta)} + dbeta^2``."""
    ln_sin_theta = math.log(math.sin(theta))

    def block(beta, U):
        offsets = b + np.log(np.sin(beta)) - ln_sin_theta
        H = hhat_inf(offsets, U)
        if H is None or not np.all(np.isfinite(H)):
            raise ValueError("cut limit undefined at a required offset")
        return (np.sin(beta) ** 2)[:, None, None] * H

    return JoinForm(
        k,
        n,
        a=lambda beta: np.cos(beta) ** 2,
        b=block,
        c=lambda beta: np.ones(np.shape(beta)),
        label=f"limit(b={b:g},theta={theta:.6g})",
    )


def predicted_limit_cut(hhat_inf, theta, k, b, n, delta=DEFAULT_DELTA):
    """Predicted cut limit at offset ``b`` as a masked form on S^{n+k-1}."""
    return join_to_sphereform(predicted_limit_join(hhat_inf, theta, k, b, n), delta)


def family_cut(fam, theta, k, lambda_prime, b, delta=DEFAULT_DELTA):
    """Normalized cut at ``lam' + b`` of the extension of ``h_{lam(lam')}``."""
    lam = hyptrig.lambda_of(lambda_prime, theta)
    s = lambda_prime + b
    if not s > 0:
        raise ValueError(f"cut radius lambda'+b={s} must be > 0")
    if not lam > fam.lambda0:
        raise ValueError(f"lambda(lambda')={lam} must exceed lambda0={fam.lambda0}")
    jf = extension_normalized_cut(fam.at(lam), k, s)
    return join_to_sphereform(jf, delta)


def analytic_limit(fam, theta, k, delta=DEFAULT_DELTA):
    if fam.limit is None:
        raise ValueError(f"family {fam.name!r} has no analytic cut limit")
    return LimitCandidate(lambda b: predicted_limit_cut(fam.limit, theta, k, b, fam.n, delta), "analytic")


def extrapolated_limit(fam, theta, k, lambda_grid, delta=DEFAULT_DELTA):
    """Cauchy-tail estimate: the average of the cuts at the two largest ``lam'``."""
    l1, l2 = sorted(lambda_grid)[-2:]

    def form_at(b):
        return 0.5 * (family_cut(fam, theta, k, l1, b, delta) + family_cut(fam, theta, k, l2, b, delta))

    return LimitCandidate(form_at, "extrapolated")


def eventually_decreasing(seq, tail=3, floor=NOISE_FLOOR):
    """Last ``tail`` values strictly decrease, except that values at or below ``floor`` count as settled."""
    last = list(seq)[-tail:]
    if len(last) < tail:
        return False
    return all(b < a or b <= floor for a, b in zip(last, last[1:]))


def convergence_scan(
    fam,
    theta,
    k,
    b_grid,
    lambda_grid,
    spec=None,
    delta=DEFAULT_DELTA,
    limit=None,
    eps_c2=EPS_C2,
    eps_c0=EPS_C0,
    check_origin=True,
):
    """Distances between normalized extension cuts and a limit candidate over a ``(lam', b)`` grid."""
    spec = spec or SamplingSpec()
    if not 0 < theta <= HALF_PI + 1e-15:
        raise ValueError("theta must lie in (0, pi/2]")
    if check_origin and fam.hyperbolic_origin_B is None:
        raise ValueError(f"family {fam.name!r} is not certified hyperbolic around the origin")
    if limit is None:
        limit = analytic_limit(fam, theta, k, delta) if fam.limit is not None else extrapolated_limit(fam, theta, k, lambda_grid, delta)
    b_grid = sorted(float(b) for b in b_grid)
    lambda_grid = sorted(float(x) for x in lambda_grid)
    limits = {b: limit.form_at(b) for b in b_grid}

    def cell(args):
        b, lp = args
        d = c2_distance(family_cut(fam, theta, k, lp, b, delta), limits[b], spec)
        return Row(lp, b, *d)

    rows = _pmap(cell, [(b, lp) for b in b_grid for lp in lambda_grid])
    per_b = {}
    ok = True
    for b in b_grid:
        seq = [r for r in rows if r.b == b]
        c2 = [r.c2 for r in seq]
        passed = eventually_decreasing(c2) and c2[-1] < eps_c2 and seq[-1].d0 < eps_c0
        per_b[b] = {"final_c2": c2[-1], "final_d0": seq[-1].d0, "eventually_decreasing": eventually_decreasing(c2), "passed": passed}
        ok &= passed
    return ConvergenceReport(
        rows=rows,
        meta={
            "family": fam.name,
            "family_params": fam.params,
            "theta": theta,
            "k": k,
            "n": fam.n,
            "grid": spec.to_dict(),
            "mask_delta": delta,
            "limit_provenance": limit.provenance,
        },
        verdict="converged" if ok else "diverged",
        thresholds={"eps_c2": eps_c2, "eps_c0": eps_c0, "noise_floor": NOISE_FLOOR, "tail": 3},
        per_b=per_b,
    )


def sup_over_b(report):
    """``[(lam', max_b C^2 distance)]`` in increasing ``lam'``."""
    lps = sorted({r.lambda_prime for r in report.rows})
    return [(lp, max(r.c2 for r in report.rows if r.lambda_prime == lp)) for lp in lps]


def default_pairs(lambda_grid):
    g = sorted(lambda_grid)
    return list(zip(g, g[1:]))


def cauchy_scan(fam, theta, k, b_grid, lambda_pairs, spec=None, delta=DEFAULT_DELTA, eps_c2=EPS_C2, tail=3):
    """Pairwise distances between normalized cuts at ``lam'_1`` and ``lam'_2`` with the same ``b``.

    Verdict ``cauchy-only`` when, for every ``b``, the ``tail`` pairs with the
    largest ``lam'`` are all within ``eps_c2``; otherwise ``diverged``.
    """
    spec = spec or SamplingSpec()
    b_grid = sorted(float(b) for b in b_grid)
    pairs = sorted((float(a), float(c)) for a, c in lambda_pairs)

    def cell(args):
        b, (l1, l2) = args
        d = c2_distance(family_cut(fam, theta, k, l1, b, delta), family_cut(fam, theta, k, l2, b, delta), spec)
        return Row(l1, b, *d, lambda_prime_2=l2)

    rows = _pmap(cell, [(b, p) for b in b_grid for p in pairs])
    per_b = {}
    ok = True
    for b in b_grid:
        seq = [r.c2 for r in rows if r.b == b]
        passed = all(x < eps_c2 for x in seq[-tail:])
        per_b[b] = {"tail_max_c2": max(seq[-tail:]), "passed": passed}
        ok &= passed
    return ConvergenceReport(
        rows=rows,
        meta={"family": fam.name, "family_params": fam.params, "theta": theta, "k": k, "n": fam.n, "grid": spec.to_dict(), "mask_delta": delta},
        verdict="cauchy-only" if ok else "diverged",
        thresholds={"eps_c2": eps_c2, "tail": tail},
        per_b=per_b,
    )


# ---------------------------------------------------------------------------
# uniformity near beta = 0


@dataclass(frozen=True)
class Beta1Result:
    beta1: float
    onset: float
    asymptotic_beta: float
    sweep: tuple  # (lambda', lhs, rhs) at beta1

    @property
    def asymptotically_sufficient(self):
        return self.beta1 <= self.asymptotic_beta + 1e-6


def _sweep_beta(lp, B, c_prime, theta, resolution):
    """Largest beta with ``r(lp + c', beta) <= lambda(lp) + B`` on every sweep point, or -1."""
    rhs = hyptrig.lambda_of(lp, theta) + B

    def excess(beta):
        return float(np.max(hyptrig.r_of(lp + c_prime, beta) - rhs))

    if excess(0.0) > 0:
        return -1.0
    if excess(HALF_PI) <= 0:
        return HALF_PI
    lo, hi = 0.0, HALF_PI
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if excess(mid) <= 0 else (lo, mid)
    return lo


def beta1_threshold(B, c, c_prime, theta, onset=None, lambda_max=60.0, step=0.25, resolution=1e-6):
    """Largest ``beta_1`` with ``r(lam' + c', beta_1) <= lambda(lam') + B`` on the sweep ``[onset, lambda_max]``.

    Without an explicit ``onset`` it is detected: the first sweep start (a
    multiple of ``step``, at least 1, with ``lam' + c' > 0``) from which the
    admissible angle reaches half the asymptotic bound
    ``asin(min(1, exp(B - c') sin(theta)))``. Moving the start right only
    drops constraints, so the admissible angle is non-decreasing in it.
    """
    if not c_prime < c + math.log(math.sin(theta)):
        raise ValueError("need c' < c + ln(sin(theta))")
    asym = math.asin(min(1.0, math.exp(B - c_prime) * math.sin(theta)))
    if onset is None:
        lo = step * math.ceil(max(1.0, -c_prime + step) / step)
        for start in np.arange(lo, lambda_max + 0.5 * step, step):
            lp = np.arange(start, lambda_max + 0.5 * step, step)
            if _sweep_beta(lp, B, c_prime, theta, 1e-3) >= 0.5 * asym:
                onset = float(start)
                break
        else:
            raise ValueError(f"no positive beta_1: no onset found before lambda' = {lambda_max:g}")
    if onset + c_prime <= 0:
        raise ValueError("onset too small: lambda' + c' must be > 0")
    lp = np.arange(onset, lambda_max + 0.5 * step, step)
    beta1 = _sweep_beta(lp, B, c_prime, theta, resolution)
    if beta1 <= 0:
        raise ValueError("no positive beta_1 found")
    lhs = hyptrig.r_of(lp + c_prime, beta1)
    rhs = hyptrig.lambda_of(lp, theta) + B
    return Beta1Result(beta1, float(onset), asym, tuple(zip(lp.tolist(), lhs.tolist(), rhs.tolist())))


def sphere_samples(n, count=64, seed=3):
    return random_unit_vectors(n, count, seed)


def beta0_block_residual(fam, theta, beta1, b_grid, lambda_grid, onset, c_prime, n_beta=25, n_u=64):
    """Max deviation of the S^{n-1} block from ``sin^2(beta) sigma`` for ``b <= c'``, ``beta <= beta1``, ``lam' >= onset``."""
    U = sphere_samples(fam.n, n_u)
    E = tangent_basis(U)
    worst = 0.0
    betas = np.linspace(beta1 / n_beta, beta1, n_beta)
    for lp in lambda_grid:
        if lp < onset:
            continue
        lam = hyptrig.lambda_of(lp, theta)
        member = fam.at(lam)
        for b in b_grid:
            if b > c_prime or lp + b <= 0:
                continue
            for beta in betas:
                r = hyptrig.r_of(lp + b, beta)
                H = math.sin(beta) ** 2 * member.hat_ambient(np.full(len(U), r), U)
                T = np.einsum("nia,nij,njb->nab", E, H, E) - math.sin(beta) ** 2 * np.eye(fam.n - 1)
                worst = max(worst, float(np.max(np.abs(T))))
    return worst


# ---------------------------------------------------------------------------
# transition offsets (bump family)


def measured_bump_level(fam, lam, r, U):
    """Recover the smoothstep level ``chi`` from the normalized cut of a bump-family member."""
    E = tangent_basis(U)
    H = fam.at(lam).hat_ambient(np.full(len(U), r), U)
    D = np.einsum("nia,nij,njb->nab", E, H, E) - np.eye(fam.n - 1)
    P = np.einsum("nia,nij,njb->nab", E, perturbation_ambient(U), E)
    return float(np.sum(D * P) / (fam.params["amp"] * np.sum(P * P)))


def transition_offsets(fam, theta, lambda_prime, betas, n_u=16, tol=1e-12):
    """For each beta, the ``b`` where the S^{n-1} block is half-way through its transition.

    Returns ``(betas, measured, predicted)`` with the prediction
    ``B + L/2 - ln(sin beta / sin theta)``.
    """
    if fam.name != "bump":
        raise ValueError("transition offsets are defined for the bump family")
    B, L = fam.params["B"], fam.params["L"]
    U = sphere_samples(fam.n, n_u)
    lam = hyptrig.lambda_of(lambda_prime, theta)
    measured = []
    for beta in betas:

        def level(b):
            return measured_bump_level(fam, lam, hyptrig.r_of(lambda_prime + b, beta), U) - 0.5

        lo, hi = max(B - 10.0, 1e-9 - lambda_prime), B + L + 10.0
        if level(lo) > 0 or level(hi) < 0:
            raise ValueError("transition not bracketed")
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if level(mid) < 0 else (lo, mid)
        measured.append(0.5 * (lo + hi))
    betas = np.asarray(betas, dtype=float)
    predicted = B + 0.5 * L - np.log(np.sin(betas) / math.sin(theta))
    return betas, np.array(measured), predicted


# ---------------------------------------------------------------------------
# boundary positive definiteness


def boundary_checks(fam, theta, k, b, lambda_prime, deltas=(0.2, 0.1, 0.05, 0.025), margin=0.5, n_u=64, lambda_tail=None):
    """Positive-definiteness of the cut limit on S^{n-1} and near S^{k-1}.

    S^{n-1} side: at ``beta = pi/2`` the cut radius in the fibre equals ``lam' + b``
    and the normalized cut is ``coth^2(lam'+b) I_k (+) hhat_{lam, lam'+b}`` in H^k
    Fermi directions; its eigenvalues are checked, and the coth^2 coefficient is
    measured from the hyperboloid triangle (``(d beta/d t)^2`` at ``t = 0``).
    S^{k-1} side: eigenvalues of the limit candidate on the circles ``beta = delta``.
    """
    s = lambda_prime + b
    lam = hyptrig.lambda_of(lambda_prime, theta)
    U = sphere_samples(fam.n, n_u)
    E = tangent_basis(U)
    hat = np.einsum("nia,nij,njb->nab", E, fam.at(lam).hat_ambient(np.full(len(U), s), U), E)
    coth2 = 1.0 / math.tanh(s) ** 2
    blocks = np.zeros((len(U), k + fam.n - 1, k + fam.n - 1))
    blocks[:, :k, :k] = coth2 * np.eye(k)
    blocks[:, k:, k:] = hat
    min_eig_n = float(np.linalg.eigvalsh(blocks).min())

    h = 1e-4
    bp = hyptrig.polar_of_fermi(h, s)[1]
    bm = hyptrig.polar_of_fermi(-h, s)[1]
    coth2_measured = ((bp - bm) / (2 * h)) ** 2

    tail = lambda_tail if lambda_tail is not None else [lambda_prime + 2.0 * i for i in range(-4, 1)]
    # coth^2 - 1 = 1/sinh^2 keeps the approach to 1 visible past double rounding
    excess = [1.0 / math.sinh(x + b) ** 2 for x in tail]

    if fam.limit is not None:
        hhat_inf = fam.limit
    else:
        member = fam.at(lam)
        hhat_inf = lambda offs, UU: member.hat_ambient(s + offs - b, UU)  # noqa: E731
    rng = np.random.default_rng(11)
    k_side = {}
    for dl in deltas:
        W = rng.normal(size=(n_u, k))
        W /= np.linalg.norm(W, axis=1, keepdims=True)
        P = np.concatenate([math.cos(dl) * W, math.sin(dl) * U], axis=1)
        form = predicted_limit_cut(hhat_inf, theta, k, b, fam.n, delta=dl)
        k_side[dl] = float(form.min_eigenvalue(P).min())
    min_eig_k = min(k_side.values())
    ok = min_eig_n >= margin and min_eig_k >= margin
    return {
        "b": b,
        "lambda_prime": lambda_prime,
        "coth2": coth2,
        "coth2_measured": coth2_measured,
        "coth2_error": abs(coth2_measured - coth2),
        "coth2_minus_1_tail": excess,
        "coth2_tail_decreasing_to_1": all(x > y > 0 for x, y in zip(excess, excess[1:])),
        "min_eig_sphere_n": min_eig_n,
        "min_eig_sphere_k": k_side,
        "margin": margin,
        "passed": bool(ok),
    }
