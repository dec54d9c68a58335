"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line with the measured figure before asserting,
so the terminal summary (see conftest.py) lists all criteria even when some
fail. Run directly with ``python3 tests/test_acceptance.py`` for the same table.
"""
import math
import time

import numpy as np
import pytest

from twistlab import (CalderonSpace, ComplexPower, Couple, Interpolated, KaltonPeck, Lp, NOT_FOUND,
                      Orlicz, OrliczHilbert, PConcavified, Phi1, PhiR, Scaled, SparseVector,
                      Tsirelson, TwistedPair, apply, boundedness_gap, core_estimate_residual,
                      equivalence_gap, exp_alpha, expansiveness_threshold, factorize,
                      finite_difference_tuple, induced_centralizer, interpolation_norm,
                      kernel_derivative_check, lambda_indicator, logconvexity_check, norm,
                      nonequivalence_ratio_test, rho_lower,
                      rochberg_embed, rochberg_project, singularity_report, taylor_tuple,
                      twist_r, twisted_quasinorm)
from twistlab.centralizers import pair_sampler, random_vector
from twistlab.derived import random_witness
from twistlab.indicators import canonical_tuple, random_disjoint_tuple

from oracles import grid_factorization

INF = math.inf
LINF_L1 = Couple(Lp(INF), Lp(1), 0.5)
L4_L43 = Couple(Lp(4), Lp(4 / 3), 0.5)
ORLICZ = Couple(Orlicz(twist_r(0.5, 0)), Orlicz(twist_r(0.5, 1)), 0.5)
KP = KaltonPeck(Lp(2), Phi1())

RESULTS = {}


def record(key, title, ok, detail):
    RESULTS[key] = (bool(ok), title, detail)
    assert ok, f"{title}: {detail}"


def summary_lines():
    return [f"{'PASS' if ok else 'FAIL'}  C{k:<2} {title}: {detail}"
            for k, (ok, title, detail) in sorted(RESULTS.items())]


def signed(rng, dim, lo=0.05, hi=1.0):
    return SparseVector.from_dense(rng.uniform(lo, hi, dim) * rng.choice([-1, 1], dim))


def max_abs(v):
    return float(np.max(np.abs(v.val), initial=0.0))


def test_c01_factorizer_vs_grid_oracle():
    worst, slowest = 0.0, 0.0
    for c in (LINF_L1, L4_L43, ORLICZ):
        rng = np.random.default_rng(1)
        xs = [signed(rng, 1 + k % 3) for k in range(12)]
        t0 = time.perf_counter()
        objs = [factorize(c, x).objective for x in xs]
        slowest = max(slowest, time.perf_counter() - t0)
        for x, o in zip(xs, objs):
            worst = max(worst, abs(o - grid_factorization(c, x)))
    record(1, "factorizer vs grid oracle", worst <= 1e-3 and slowest < 10,
           f"max |obj - grid| = {worst:.2e} (tol 1e-3), slowest couple {slowest:.2f} s")


def test_c02_linf_l1_half_is_l2():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        x = random_vector(rng, int(rng.integers(1, 17)))
        l2 = norm(Lp(2), x)
        worst = max(worst, abs(interpolation_norm(LINF_L1, x) - l2) / l2)
    dt = time.perf_counter() - t0
    record(2, "(l_inf, l_1)_1/2 = l_2", worst <= 1e-4 and dt < 60,
           f"max rel err {worst:.2e} (tol 1e-4), {dt:.1f} s")


def _power_formula(c, x):
    # theta^-1 x log(|x| / ||x||_theta)
    nx = interpolation_norm(c, x)
    return SparseVector(x.idx, x.val * np.log(np.abs(x.val) / nx) / c.theta)


def test_c03_sup_endpoint_centralizer():
    rng = np.random.default_rng(3)
    couples = [LINF_L1.at(t) for t in (0.25, 0.5, 0.75)]
    couples.append(Couple(Lp(INF), PConcavified(Tsirelson(), 2), 0.5))
    worst = 0.0
    for k in range(100):
        c = couples[k % 4]
        x = signed(rng, int(rng.integers(1, 6)), 0.1)
        worst = max(worst, max_abs(induced_centralizer(c, x) - _power_formula(c, x)))
    record(3, "sup-endpoint centralizer formula", worst <= 1e-3, f"max coord err {worst:.2e} (tol 1e-3)")


def test_c04_reiteration():
    nested = Couple(CalderonSpace(LINF_L1.at(0.25)), CalderonSpace(LINF_L1.at(0.75)), 0.5)
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(50):
        x = signed(rng, int(rng.integers(1, 5)), 0.1)
        d = induced_centralizer(nested, x) - 0.5 * induced_centralizer(LINF_L1, x)
        worst = max(worst, max_abs(d) / norm(Lp(2), x))
    record(4, "reiteration (beta - alpha) Omega", worst <= 1e-3, f"max coord err {worst:.2e} (tol 1e-3)")


def test_c05_orlicz_couple_centralizer():
    rng = np.random.default_rng(5)
    target = OrliczHilbert(twist_r(0.5, 1))
    spec = Interpolated(ORLICZ)
    worst = 0.0
    for _ in range(40):
        x = random_vector(rng, int(rng.integers(1, 7)))
        x = x / norm(Lp(2), x)
        worst = max(worst, max_abs(apply(spec, x) - apply(target, x)))
    record(5, "Orlicz couple centralizer = 2f log(phi_1^-1(f^2)/f)", worst <= 1e-3,
           f"max coord err {worst:.2e} (tol 1e-3)")


def test_c06_core_estimate():
    fails, n_tuples = 0, 0
    for c in (LINF_L1, L4_L43):
        rng = np.random.default_rng(6)
        for _ in range(500):
            r = core_estimate_residual(c, random_disjoint_tuple(rng, c, int(rng.integers(1, 33))))
            fails += not r.ok
            n_tuples += 1
    canon = [core_estimate_residual(LINF_L1, canonical_tuple(n)) for n in (1, 4, 16, 32)]
    canon_ok = all(r.lhs < 1e-6 and r.bound == pytest.approx(6 * math.sqrt(n), rel=1e-12)
                   for r, n in zip(canon, (1, 4, 16, 32)))
    lhs = max(r.lhs for r in canon)
    record(6, "core estimate", fails == 0 and canon_ok,
           f"{fails}/{n_tuples} random tuples fail, canonical max lhs {lhs:.1e}")


def test_c07_logconvexity():
    ns = [1, 2, 4, 8, 16, 32, 64]
    worst, bad = INF, 0
    for c in (LINF_L1, L4_L43, ORLICZ):
        rep = logconvexity_check(c, ns, [0.25, 0.5, 0.75], budget=4)
        worst = min(worst, min(r["margin"] for r in rep.rows))
        bad += sum(not r["ok"] for r in rep.rows)
    record(7, "logconvexity margins", bad == 0,
           f"{bad} negative rows, min margin {worst:.1e} (slack 1e-5)")


def test_c08_kernel_mechanism():
    worst, n = INF, 0
    for theta in (0.25, 0.5):
        for s in range(100):
            g = random_witness(np.random.default_rng(s), LINF_L1.at(theta), vanish=True)
            worst = min(worst, kernel_derivative_check(g).margin)
            n += 1
    record(8, "kernel derivative bound", worst >= 0, f"min margin {worst:.3g} over {n} witnesses")


def test_c09_singularity_evidence():
    ns = [8, 16, 32, 64, 128]
    rep = singularity_report(LINF_L1, ns, budget=4)
    ratio = min(r["value"] / math.log(r["n"]) for r in rep.rows)
    gap_err = max(abs(boundedness_gap(KP, [SparseVector.basis(i) for i in range(1, n + 1)])
                      - 0.5 * math.log(n)) for n in ns)
    record(9, "singularity arithmetic", ratio >= 0.4 and gap_err <= 1e-9,
           f"min ratio/log n {ratio:.3f} (need 0.4), gap err {gap_err:.1e}")


def test_c10_twisted_hilbert_gap():
    spec = Interpolated(ORLICZ)
    gaps = {}
    for d in (16, 64):
        rng = np.random.default_rng(d)
        S = [SparseVector.indicator(1, d)] + [random_vector(rng, d) for _ in range(3)]
        gaps[d] = (equivalence_gap(spec, OrliczHilbert(twist_r(0.5, 1)), Lp(2), S),
                   equivalence_gap(spec, Scaled(2, KP), Lp(2), S))
    plateau = gaps[64][0] - gaps[16][0]
    growth = gaps[64][1] - gaps[16][1]
    need = 0.3 * math.log(4) / 2
    record(10, "gap plateau vs Kalton-Peck growth", plateau <= 0.2 and growth >= need,
           f"plateau {plateau:+.3f} (<= 0.2), growth {growth:.3f} (>= {need:.3f})")


def test_c11_expansiveness():
    Ns = [expansiveness_threshold(ComplexPower(1.0), M) for M in (1, 10, 100)]
    ok = all(N != NOT_FOUND and N <= M for N, M in zip(Ns, (1, 10, 100)))
    nf = expansiveness_threshold(PhiR(0.5), 10, search_cap=1e6)
    record(11, "expansiveness thresholds", ok and nf == NOT_FOUND,
           f"N(M) = {[round(N, 4) for N in Ns]}, phi_1/2: {nf}")


def test_c12_lambda_growth():
    worst = 0.0
    alphas = (0.5, 1.0, 2.0)
    for a in alphas:
        sp = Orlicz(exp_alpha(a))
        for n in np.unique(np.geomspace(8, 1e6, 25).astype(int)):
            lam = lambda_indicator(sp, int(n))
            worst = max(worst, abs(lam / math.log(n) ** (1 / a) - 1))
    div = [nonequivalence_ratio_test(Orlicz(exp_alpha(a)), Orlicz(exp_alpha(b)))["diverges"]
           for a in alphas for b in alphas if a != b]
    record(12, "lambda growth and non-equivalence", worst <= 0.02 and all(div),
           f"max rel err {worst:.2e} (tol 2e-2), {sum(div)}/{len(div)} pairs diverge")


def test_c13_rochberg_tower():
    bad, fd_err, count = 0, 0.0, 0
    for s in range(100):
        c = LINF_L1.at(0.25 if s % 2 else 0.5)
        g = random_witness(np.random.default_rng(s), c)
        count += 1
        for m in range(1, 5):
            t = taylor_tuple(g, n=m)
            bad += not rochberg_project(t, m).allclose(t, 0, 0)
            for n in range(1, m):
                # the witness of t also realizes its projection
                bad += not rochberg_project(t, n).allclose(taylor_tuple(g, n=n), 0, 0)
                e = rochberg_embed(rochberg_project(t, n), m)
                bad += not rochberg_project(e, m - n).is_zero()
            fd = finite_difference_tuple(g, m)
            for u, v in zip(t.coeffs, fd.coeffs):
                fd_err = max(fd_err, max_abs(u - v) / max(1.0, max_abs(v)))
    record(13, "Rochberg tower", bad == 0 and fd_err <= 1e-5,
           f"{bad} identity failures on {count} witnesses, taylor vs FD {fd_err:.1e} (tol 1e-5)")


def test_c14_quasinorm_axioms():
    rng = np.random.default_rng(14)
    sample = pair_sampler()
    iso = quot = 0.0
    ratio = 0.0
    zpairs = []
    for _ in range(1000):
        w1, w2 = random_vector(rng, 6), random_vector(rng, 6)
        z1, z2 = sample(rng)
        p, q = TwistedPair(w1, z1), TwistedPair(w2, z2)
        iso = max(iso, abs(twisted_quasinorm(KP, TwistedPair(w1, SparseVector.zero())) - norm(Lp(2), w1)))
        quot = max(quot, norm(Lp(2), z1) - twisted_quasinorm(KP, p))
        s = twisted_quasinorm(KP, TwistedPair(w1 + w2, z1 + z2))
        ratio = max(ratio, s / (twisted_quasinorm(KP, p) + twisted_quasinorm(KP, q)))
        zpairs.append((z1, z2))
    rho = rho_lower(KP, sampler=zpairs, n_samples=len(zpairs))
    ok = iso <= 1e-12 and quot <= 1e-12 and ratio <= 1 + rho + 0.05
    record(14, "twisted quasi-norm axioms", ok,
           f"isometry err {iso:.1e}, quotient excess {quot:.1e}, "
           f"triangle {ratio:.4f} <= {1 + rho + 0.05:.4f}")


if __name__ == "__main__":
    import sys

    for name, fn in sorted(globals().items()):
        if name.startswith("test_c"):
            try:
                fn()
            except AssertionError:
                pass
    print("\n".join(summary_lines()))
    sys.exit(0 if all(ok for ok, _, _ in RESULTS.values()) else 1)
