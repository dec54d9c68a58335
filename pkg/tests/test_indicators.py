import json
import math

import numpy as np
import pytest

from twistlab import (Couple, InputError, Lp, Orlicz, PConvexified, SizeError, SparseVector,
                      Tsirelson, WeightedLp, a_indicator, core_estimate_residual, exp_alpha,
                      lambda_indicator, logconvexity_check, m_indicator, nonequivalence_ratio_test,
                      power, singularity_report)
from twistlab.indicators import (brute_force_m, candidate_families, canonical_tuple, closed_form_m,
                                 random_disjoint_tuple)

INF = math.inf
LINF_L1 = Couple(Lp(INF), Lp(1), 0.5)
L4_L43 = Couple(Lp(4), Lp(4 / 3), 0.5)


def test_lambda_lp_and_orlicz():
    assert lambda_indicator(Lp(2), 9) == pytest.approx(3)
    assert lambda_indicator(Lp(INF), 50) == 1
    for alpha in (0.5, 1.0, 2.0):
        sp = Orlicz(exp_alpha(alpha))
        for n in (8, 100, 10 ** 4):
            # exp(-t^-alpha) = 1/n on n coordinates
            assert lambda_indicator(sp, n) == pytest.approx(math.log(n) ** (1 / alpha), rel=1e-9)
    with pytest.raises(InputError):
        lambda_indicator(Lp(2), 0)


def test_closed_forms():
    assert closed_form_m(Lp(3), 8) == pytest.approx(2)
    assert closed_form_m(Orlicz(power(2)), 16) == pytest.approx(4)
    assert closed_form_m(PConvexified(Lp(1), 2), 4) == pytest.approx(2)
    assert closed_form_m(Tsirelson(), 4) is None


@pytest.mark.parametrize("space", [Lp(1), Lp(2), Lp(3), Orlicz(power(1.5))], ids=lambda s: s.dumps())
def test_m_indicator_attains_closed_form(space):
    for n in (1, 3, 8):
        r = m_indicator(space, n)
        assert r.lower == pytest.approx(r.closed_form, rel=1e-9)
        assert r.method == "closed_form" and r.families > 0


def test_tsirelson_indicators():
    # singletons after index n are admissible in one family, giving n/2
    r = a_indicator(Tsirelson(), 8)
    assert r.lower >= 4 and r.closed_form is None and r.method == "optimized"
    assert a_indicator(Tsirelson(), 8, budget=32).lower >= r.lower


@pytest.mark.parametrize("space", [Lp(2), Tsirelson(), Orlicz(exp_alpha(1.0)), Orlicz(exp_alpha(0.5))],
                         ids=lambda s: s.dumps())
def test_brute_force_audits_search(space):
    # exhaustive splits of the first coordinates on a coefficient grid never beat the family search
    for n, dim in ((2, 4), (3, 3)):
        bf = brute_force_m(space, n, dim)
        assert m_indicator(space, n, budget=32).lower >= bf * (1 - 1e-12)


def test_candidate_families_deterministic():
    a = [[v.to_json(dense=False) for v in f] for f in candidate_families(4, budget=10, seed=3)]
    b = [[v.to_json(dense=False) for v in f] for f in candidate_families(4, budget=10, seed=3)]
    assert a == b
    for fam in candidate_families(5, start=6, budget=10):
        assert len(fam) == 5 and min(int(v.idx.min()) for v in fam) >= 6


def test_weighted_capacity():
    sp = WeightedLp(2, (1.0,) * 4)
    assert m_indicator(sp, 4).lower == pytest.approx(2)
    with pytest.raises(SizeError):
        a_indicator(sp, 4)


def test_core_estimate_canonical():
    for n in (4, 16, 32):
        r = core_estimate_residual(LINF_L1, canonical_tuple(n))
        assert r.lhs < 1e-6
        assert r.bound == pytest.approx(6 * math.sqrt(n))
        assert r.ok and not r.advisory


@pytest.mark.parametrize("c", [LINF_L1, L4_L43], ids=["linf_l1", "l4_l43"])
def test_core_estimate_random(c):
    rng = np.random.default_rng(11)
    for _ in range(10):
        n = int(rng.integers(2, 9))
        r = core_estimate_residual(c, random_disjoint_tuple(rng, c, n))
        assert r.ok, r


def test_core_estimate_errors():
    with pytest.raises(InputError):
        core_estimate_residual(LINF_L1, [SparseVector.basis(1), SparseVector.basis(1)])
    with pytest.raises(InputError):
        core_estimate_residual(LINF_L1, [2 * SparseVector.basis(1)])


def test_logconvexity_report():
    rep = logconvexity_check(LINF_L1, [1, 2, 4], [0.25, 0.5], budget=4)
    assert rep.ok and len(rep.rows) == 6
    assert all(r["method"] == "closed_form" for r in rep.rows)
    csv = rep.to_csv().splitlines()
    assert csv[0] == "theta,n,value,bound,margin,method" and len(csv) == 7
    assert json.loads(rep.dumps())["ok"] is True


def test_logconvexity_tsirelson_advisory():
    c = Couple(Tsirelson(), Lp(2), 0.5)
    rep = logconvexity_check(c, [2, 4], [0.5], budget=3)
    assert rep.ok
    assert all(r["method"] == "advisory" for r in rep.rows)


def test_singularity_report():
    rep = singularity_report(LINF_L1, [8, 16, 32], budget=4)
    for r in rep.rows:
        assert r["value"] >= 0.4 * math.log(r["n"])
    assert rep.meta["verdict"] == "consistent with disjoint singularity"
    flat = singularity_report(Couple(Lp(2), Lp(2), 0.5), [4, 8], budget=2)
    assert flat.meta["verdict"].startswith("criterion inconclusive")


def test_lambda_flat_closed_form_continues_gauge():
    for sp in (Orlicz(exp_alpha(0.5)), Orlicz(exp_alpha(2.0)), Lp(3)):
        dense = lambda_indicator(sp, 10 ** 6)
        assert lambda_indicator(sp, 10 ** 6 + 1) == pytest.approx(dense, rel=1e-6)
    assert lambda_indicator(Orlicz(exp_alpha(1.0)), 10 ** 30) == pytest.approx(30 * math.log(10))
    with pytest.raises(SizeError):
        lambda_indicator(Tsirelson(), 10 ** 7)


def test_nonequivalence():
    alphas = (0.5, 1.0, 2.0)
    for a in alphas:
        for b in alphas:
            if a != b:
                assert nonequivalence_ratio_test(Orlicz(exp_alpha(a)), Orlicz(exp_alpha(b)))["diverges"]
    X = Orlicz(exp_alpha(1.0))
    same = nonequivalence_ratio_test(X, Orlicz(exp_alpha(1.0)))
    assert not same["diverges"] and max(r["S"] for r in same["rows"]) < 1e-6
    # l_p spaces are power-equivalent to each other
    assert not nonequivalence_ratio_test(Lp(3), Lp(4))["diverges"]
