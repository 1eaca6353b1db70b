"""End-to-end acceptance gate.

Each test prints one PASS/FAIL line (run with ``pytest -s`` to see the
lines for passing criteria too). Criterion 7 needs the released dataset;
point DUELBIAS_DATASET_DIR at a directory with items.csv and duels.csv
to enable it, otherwise it is reported as waived.
"""

import math
import os
import time

import numpy as np
import pytest

from duelbias.bias import (
    bootstrap_ci,
    duel_win_fraction,
    frequency_divergence,
    median_percentile_rank,
    rank_curve,
    score_bias,
)
from duelbias.choice_model import ComparisonGraph, FitConfig, fit, win_probability
from duelbias.choice_model import regularized_log_likelihood
from duelbias.datasets import parse_duels, parse_items
from duelbias.stats import binomial_two_sided, chi_square_2x2, percentile_rank
from duelbias.tags import TagDistribution, distinctive_tags, normalize_tag
from duelbias.tournament import sample_balanced_duels, simulate_rank_recovery
from oracles import (
    chi2_stat_observed_expected,
    exact_binomial_two_sided,
    grid_search_log_likelihood,
)

DATASET_DIR_ENV = "DUELBIAS_DATASET_DIR"


def report(number, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"criterion {number} {status}: {detail}")
    assert ok, f"criterion {number}: {detail}"


class TestCriterion1RankRecovery:
    def test_recovery_curve(self):
        budgets = (100, 200, 500, 1000, 2000)
        start = time.time()
        curve = simulate_rank_recovery(
            50, budgets=budgets, replicates=50, seed=0
        )
        elapsed = time.time() - start
        tau_500 = curve.mean_tau[budgets.index(500)]
        inversions = [
            max(0.0, a - b) for a, b in zip(curve.mean_tau, curve.mean_tau[1:])
        ]
        n_inversions = sum(1 for v in inversions if v > 0)
        ok = (
            0.75 <= tau_500 <= 0.85
            and elapsed < 60.0
            and n_inversions <= 1
            and all(v <= 0.02 for v in inversions)
        )
        report(
            1,
            ok,
            f"mean tau at budget 500 = {tau_500:.4f} (target [0.75, 0.85]), "
            f"curve {[round(t, 3) for t in curve.mean_tau]}, "
            f"{n_inversions} inversion(s), {elapsed:.1f}s (< 60s)",
        )


class TestCriterion2FitOracle:
    def test_grid_search_equivalence(self):
        rng = np.random.default_rng(2024)
        config = FitConfig()
        worst = 0.0
        for _ in range(200):
            n = int(rng.integers(2, 5))
            pairs = []
            for _ in range(int(rng.integers(1, 13))):
                w, l = rng.choice(n, size=2, replace=False)
                pairs.append((int(w), int(l)))
            graph = ComparisonGraph.from_pairs(pairs, items=tuple(range(n)))
            table = fit(graph, config)
            fitted = regularized_log_likelihood(
                graph, table, config.regularization_alpha, table.anchor_score
            )
            oracle = grid_search_log_likelihood(
                n, graph.duels, config.regularization_alpha
            )
            worst = max(worst, abs(fitted - oracle))
        ok = worst <= 1e-3
        report(
            2,
            ok,
            f"200 instances vs grid-search oracle, worst log-likelihood gap "
            f"{worst:.2e} (<= 1e-3); two-item closed form checked separately",
        )

    def test_two_item_closed_form(self):
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(50):
            n = int(rng.integers(2, 30))
            k = int(rng.integers(1, n))  # both items win at least once
            pairs = [("a", "b")] * k + [("b", "a")] * (n - k)
            table = fit(
                ComparisonGraph.from_pairs(pairs),
                FitConfig(regularization_alpha=0.0),
            )
            p_hat = win_probability(table.scores["a"], table.scores["b"])
            worst = max(worst, abs(p_hat - k / n))
        report(
            2,
            worst <= 1e-6,
            f"two-item fits reproduce empirical win rates, worst gap "
            f"{worst:.2e} (<= 1e-6)",
        )


class TestCriterion3ExactTests:
    def test_binomial_enumeration(self):
        worst = 0.0
        for n in range(1, 21):
            for k in range(n + 1):
                got = float(binomial_two_sided(k, n))
                want = float(exact_binomial_two_sided(k, n))
                worst = max(worst, abs(got - want))
        report(
            3,
            worst <= 1e-12,
            f"binomial test vs exact enumeration for all k, n <= 20, worst "
            f"gap {worst:.2e} (<= 1e-12)",
        )

    def test_chi_square_oracles(self):
        scipy_stats = pytest.importorskip("scipy.stats")
        rng = np.random.default_rng(99)
        worst_stat = worst_p = 0.0
        for _ in range(50):
            table = rng.integers(1, 500, size=(2, 2))
            stat, p = chi_square_2x2(table.tolist())
            worst_stat = max(
                worst_stat, abs(stat - chi2_stat_observed_expected(table))
            )
            worst_p = max(worst_p, abs(float(p) - float(scipy_stats.chi2.sf(stat, 1))))
        ok = worst_stat <= 1e-9 and worst_p <= 1e-9
        report(
            3,
            ok,
            f"chi-square on 50 random tables, worst statistic gap "
            f"{worst_stat:.2e} and worst p gap {worst_p:.2e} (<= 1e-9)",
        )


class TestCriterion4BootstrapCoverage:
    def test_coverage(self):
        trials = 200
        replicates = 300
        n, k, delta, sigma = 8, 20, 0.4, 0.25
        config = FitConfig(tolerance=5e-4, regularization_alpha=0.05)
        start = time.time()
        covered = 0
        for seed in range(trials):
            rng = np.random.default_rng(seed)
            log_a = rng.normal(0.0, sigma, n)
            log_b = log_a + delta  # paired offset: group gap is exactly delta
            items_a = [f"a{i}" for i in range(n)]
            items_b = [f"b{i}" for i in range(n)]
            quality = dict(zip(items_a, np.exp(log_a)))
            quality |= dict(zip(items_b, np.exp(log_b)))
            plan = sample_balanced_duels(items_a, items_b, k, seed=seed)
            duels = []
            for a, b in plan.pairs:
                p_a = quality[a] / (quality[a] + quality[b])
                duels.append((a, b) if rng.random() < p_a else (b, a))
            items = items_a + items_b
            full = fit(ComparisonGraph.from_pairs(duels, items=items), config)

            def statistic(sample):
                table = fit(
                    ComparisonGraph.from_pairs(sample, items=items),
                    config,
                    initial_scores=full.scores,
                )
                return score_bias(
                    [table.scores[i] for i in items_a],
                    [table.scores[i] for i in items_b],
                )

            _, low, high = bootstrap_ci(
                duels, statistic, replicates=replicates, seed=seed + 10_000
            )
            covered += low <= delta <= high
        elapsed = time.time() - start
        rate = covered / trials
        ok = 0.90 <= rate <= 0.99 and elapsed <= 300.0
        report(
            4,
            ok,
            f"95% CI covered the true offset in {covered}/{trials} trials "
            f"({rate:.1%}, target 90-99%) at B={replicates}, "
            f"{elapsed:.0f}s (<= 300s)",
        )


class TestCriterion5InvarianceSuite:
    def test_properties(self):
        rng = np.random.default_rng(5)
        cases = 1000
        for _ in range(cases):
            a = np.exp(rng.normal(size=rng.integers(2, 20)))
            b = np.exp(rng.normal(size=rng.integers(2, 20)))
            scale = 2.0 ** rng.integers(-6, 7)

            # gauge invariance of the log-score bias
            assert score_bias(a, b) == pytest.approx(
                score_bias(scale * a, scale * b), abs=1e-9
            )

            # rank curve is non-decreasing
            curve = rank_curve(a, b, grid=(10, 25, 50, 75, 90))
            ys = [p.y for p in curve]
            assert all(y1 <= y2 for y1, y2 in zip(ys, ys[1:]))

            # rank curve at x=50 equals the median percentile rank
            (mid,) = rank_curve(a, b, grid=(50,))
            assert mid.y == pytest.approx(median_percentile_rank(a, b), abs=1e-9)

            # percentile-rank convention identities
            v = float(rng.normal())
            r = percentile_rank(v, a)
            assert 0.0 <= r <= 100.0
            assert r + percentile_rank(-v, -a) == pytest.approx(100.0, abs=1e-9)
            below = 100.0 * np.mean(a < v)
            weak = 100.0 * np.mean(a <= v)
            assert below - 1e-9 <= r <= weak + 1e-9
        report(
            5,
            True,
            f"gauge invariance, rank-curve monotonicity, median/curve "
            f"consistency, and percentile identities held on {cases} "
            f"randomized cases each",
        )


class TestCriterion6TagPipeline:
    def test_planted_tag_and_normalization(self):
        rng = np.random.default_rng(0)
        background = [f"tag{i}" for i in range(20)]
        corpus_a = list(rng.choice(background, size=960)) + ["planted"] * 40
        corpus_b = list(rng.choice(background, size=990)) + ["planted"] * 10
        list_a, _ = distinctive_tags(
            TagDistribution.from_tags(corpus_a),
            TagDistribution.from_tags(corpus_b),
        )
        top = list_a[0]
        planted_ok = top.tag == "planted" and float(top.p_value) < 0.001

        examples_ok = (
            normalize_tag("looks delicious") == ["delicious"]
            and normalize_tag("mouth watering") == ["mouth-watering"]
            and normalize_tag("mouthwatering") == ["mouth-watering"]
        )
        ok = planted_ok and examples_ok
        report(
            6,
            ok,
            f"planted 4x tag ranked first (p = {float(top.p_value):.2e} "
            f"< 0.001) and the three normalization examples reproduced",
        )


class TestCriterion7DatasetReproduction:
    def test_real_dataset_numbers(self):
        dataset_dir = os.environ.get(DATASET_DIR_ENV)
        if not dataset_dir:
            print(
                "criterion 7 WAIVED: no released dataset available "
                f"(set {DATASET_DIR_ENV} to enable); criteria 1-6 "
                "constitute acceptance"
            )
            pytest.skip("released dataset not available")
        catalog = parse_items(os.path.join(dataset_dir, "items.csv"))
        duels = parse_duels(os.path.join(dataset_dir, "duels.csv"), catalog)
        expected_fractions = {
            "tasty": 0.6173,
            "caloric": 0.5846,
            "healthy": 0.4596,
            "home": 0.3808,
        }
        worst = 0.0
        for dim, want in expected_fractions.items():
            dim_duels = [d for d in duels if d.dimension == dim]
            got = duel_win_fraction(dim_duels).fraction
            worst = max(worst, abs(got - want))
        freq = frequency_divergence(catalog)
        rho_ok = freq.spearman_rho is not None and abs(freq.spearman_rho - 0.49) <= 0.01
        ok = worst <= 5e-5 and rho_ok
        report(
            7,
            ok,
            f"win fractions reproduced (worst gap {worst:.1e}) and frequency "
            f"divergence rho = {freq.spearman_rho} (target 0.49 +- 0.01)",
        )
