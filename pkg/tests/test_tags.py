import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from duelbias.errors import ValidationError
from duelbias.records import TagRecord
from duelbias.tags import (
    TagDistribution,
    aggregate_tags,
    default_dash_lexicon,
    default_stopword_prefixes,
    distinctive_tags,
    normalize_tag,
    pointwise_kl,
    significance_stars,
)
from duelbias.stats import PValue
from oracles import chi2_stat_observed_expected


class TestNormalizeTag:
    def test_comma_split_and_lowercase(self):
        assert normalize_tag("Fresh, GREEN, crispy") == ["fresh", "green", "crispy"]

    def test_strips_leading_stopwords(self):
        assert normalize_tag("looks delicious") == ["delicious"]
        assert normalize_tag("very very tasty") == ["tasty"]
        assert normalize_tag("seems appears healthy") == ["healthy"]

    def test_stopword_only_tag_dropped(self):
        assert normalize_tag("looks") == []
        assert normalize_tag("very, fresh") == ["fresh"]

    def test_dash_variants_merge(self):
        assert normalize_tag("mouth watering") == ["mouth-watering"]
        assert normalize_tag("mouthwatering") == ["mouth-watering"]
        assert normalize_tag("mouth-watering") == ["mouth-watering"]

    def test_interior_stopwords_kept(self):
        assert normalize_tag("tastes very good") == ["tastes very good"]

    def test_idempotent(self):
        samples = [
            "Looks Mouth Watering, fresh",
            "very tasty",
            "GREEN,  , crispy",
        ]
        for raw in samples:
            once = normalize_tag(raw)
            again = [t for tag in once for t in normalize_tag(tag)]
            assert once == again

    def test_custom_resources(self):
        tags = normalize_tag(
            "totally rad",
            stopword_prefixes=frozenset({"totally"}),
            dash_merge_lexicon={"rad": "radical"},
        )
        assert tags == ["radical"]

    def test_default_resources_load(self):
        assert "looks" in default_stopword_prefixes()
        assert default_dash_lexicon()["mouthwatering"] == "mouth-watering"


class TestTagDistribution:
    def test_smoothed_probability(self):
        dist = TagDistribution.from_tags(["x", "x", "y"], smoothing_epsilon=0.5)
        vocab = ["x", "y", "z"]
        # (2 + 0.5) / (3 + 0.5 * 3)
        assert dist.probability("x", vocab) == pytest.approx(2.5 / 4.5)
        assert dist.probability("z", vocab) == pytest.approx(0.5 / 4.5)

    def test_probabilities_sum_to_one_over_vocabulary(self):
        dist = TagDistribution.from_tags(["a", "b", "b", "c"])
        vocab = ["a", "b", "c", "d", "e"]
        total = sum(dist.probability(t, vocab) for t in vocab)
        assert total == pytest.approx(1.0)


class TestPointwiseKL:
    def test_derived_values(self):
        assert pointwise_kl(0.02, 0.005) == pytest.approx(0.02 * math.log(4.0))
        assert pointwise_kl(0.005, 0.02) == pytest.approx(0.005 * math.log(0.25))

    def test_sign_tracks_direction(self):
        assert pointwise_kl(0.1, 0.01) > 0
        assert pointwise_kl(0.01, 0.1) < 0
        assert pointwise_kl(0.05, 0.05) == 0.0

    def test_rejects_zero_probability(self):
        with pytest.raises(ValidationError):
            pointwise_kl(0.0, 0.1)
        with pytest.raises(ValidationError):
            pointwise_kl(0.1, 0.0)

    @given(st.floats(1e-6, 1.0), st.floats(1e-6, 1.0))
    def test_antisymmetric_ratio(self, p, q):
        # swapping arguments flips the sign of the log factor
        forward = pointwise_kl(p, q)
        backward = pointwise_kl(q, p)
        if p != q:
            assert (forward > 0) != (backward > 0) or forward == backward == 0


class TestSignificanceStars:
    @pytest.mark.parametrize(
        "p, stars",
        [
            (0.2, ""),
            (0.04, "*"),
            (0.009, "**"),
            (0.0009, "***"),
            (0.00009, "****"),
        ],
    )
    def test_thresholds(self, p, stars):
        assert significance_stars(PValue(value=p)) == stars

    def test_underflowed_pvalue_gets_max_stars(self):
        assert significance_stars(PValue(log10_value=-400.0)) == "****"


class TestDistinctiveTags:
    def test_planted_overrepresented_tag_ranks_first(self):
        rng = np.random.default_rng(0)
        common = [f"t{i}" for i in range(20)]
        tags_a = list(rng.choice(common, size=960)) + ["planted"] * 40
        tags_b = list(rng.choice(common, size=990)) + ["planted"] * 10
        dist_a = TagDistribution.from_tags(tags_a)
        dist_b = TagDistribution.from_tags(tags_b)
        list_a, list_b = distinctive_tags(dist_a, dist_b)
        assert list_a[0].tag == "planted"
        assert list_a[0].count_target == 40
        assert float(list_a[0].p_value) < 0.001
        assert list_a[0].stars in ("***", "****")
        assert all(row.tag != "planted" or row.kl < 0 for row in list_b)

    def test_chi2_matches_observed_expected_oracle(self):
        dist_a = TagDistribution.from_tags(["x"] * 40 + ["other"] * 960)
        dist_b = TagDistribution.from_tags(["x"] * 10 + ["other"] * 990)
        list_a, _ = distinctive_tags(dist_a, dist_b)
        row = next(r for r in list_a if r.tag == "x")
        assert row.chi2 == pytest.approx(
            chi2_stat_observed_expected([[40, 960], [10, 990]]), abs=1e-9
        )

    def test_min_count_filter(self):
        dist_a = TagDistribution.from_tags(["rare"] * 2 + ["common"] * 50)
        dist_b = TagDistribution.from_tags(["common"] * 50)
        list_a, _ = distinctive_tags(dist_a, dist_b, min_count=5)
        assert all(row.tag != "rare" for row in list_a)
        list_a2, _ = distinctive_tags(dist_a, dist_b, min_count=2)
        assert any(row.tag == "rare" for row in list_a2)

    def test_top_k_truncates(self):
        tags = [f"t{i}" for i in range(30) for _ in range(6)]
        dist_a = TagDistribution.from_tags(tags)
        dist_b = TagDistribution.from_tags(tags[::-1])
        list_a, _ = distinctive_tags(dist_a, dist_b, top_k=7)
        assert len(list_a) == 7

    def test_tie_break_is_deterministic(self):
        # symmetric counts force equal KL; ties break by total count then name
        dist_a = TagDistribution.from_tags(["b"] * 10 + ["a"] * 10 + ["z"] * 30)
        dist_b = TagDistribution.from_tags(["b"] * 5 + ["a"] * 5 + ["z"] * 40)
        list_a, _ = distinctive_tags(dist_a, dist_b)
        tied = [r.tag for r in list_a if r.count_target == 10]
        assert tied == sorted(tied)

    def test_empty_distribution_rejected(self):
        with pytest.raises(ValidationError):
            distinctive_tags(
                TagDistribution.from_tags([]), TagDistribution.from_tags(["x"])
            )


class TestAggregateTags:
    def test_per_mention_counts_by_group(self):
        records = [
            TagRecord("d1", item_id="a1", rater_id="r", raw_text="Fresh, looks tasty"),
            TagRecord("d1", item_id="b1", rater_id="r", raw_text="fresh"),
            TagRecord("d2", item_id="a1", rater_id="s", raw_text="fresh"),
        ]
        group_of = {"a1": "A", "b1": "B"}
        dists = aggregate_tags(records, group_of)
        assert dists["A"].counts == {"fresh": 2, "tasty": 1}
        assert dists["B"].counts == {"fresh": 1}

    def test_unknown_item_raises(self):
        records = [TagRecord("d1", item_id="ghost", rater_id="r", raw_text="x")]
        with pytest.raises(KeyError):
            aggregate_tags(records, {})
