import math

import numpy as np
import pytest
import scipy.special
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    brute_auc,
    brute_bh,
    brute_cliffs_delta,
    brute_kendall_tau_b,
    brute_mann_whitney_exact_p,
    brute_spearman,
    brute_u_first,
)
from phonoprofile import stats
from phonoprofile.errors import (
    ClassTooSmall,
    ConstantInput,
    DegenerateRho,
    EmptyGroup,
    InvalidP,
    NearSingular,
    OutOfDomain,
    SingleClass,
    TooFewPairs,
    TooFewStudies,
)


class TestSpearman:
    def test_perfect_monotone(self):
        r = stats.spearman([1, 2, 3, 4], [10, 20, 30, 40])
        assert r.coefficient == 1.0
        assert r.p_value == 0.0

    def test_hand_example(self):
        r = stats.spearman([1, 2, 3, 4], [2, 1, 4, 3])
        assert r.coefficient == pytest.approx(0.6, abs=1e-12)

    def test_constant_input(self):
        with pytest.raises(ConstantInput):
            stats.spearman([1, 2, 3], [5, 5, 5])

    def test_too_few(self):
        with pytest.raises(TooFewPairs):
            stats.spearman([1, 2], [1, 2])

    def test_symmetry_and_monotone_invariance(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=30)
        y = rng.normal(size=30)
        a = stats.spearman(x, y).coefficient
        assert stats.spearman(y, x).coefficient == pytest.approx(a, abs=1e-12)
        assert stats.spearman(np.exp(x), y).coefficient == pytest.approx(a, abs=1e-12)
        assert stats.spearman(x, y ** 3).coefficient == pytest.approx(a, abs=1e-12)

    def test_matches_scipy_with_ties(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            n = int(rng.integers(4, 40))
            x = rng.integers(0, 6, n).astype(float)
            y = rng.integers(0, 6, n).astype(float)
            if len(set(x)) < 2 or len(set(y)) < 2:
                continue
            ours = stats.spearman(x, y)
            ref_r, ref_p = scipy.stats.spearmanr(x, y)
            assert ours.coefficient == pytest.approx(ref_r, abs=1e-12)
            assert ours.p_value == pytest.approx(ref_p, abs=1e-9)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            n = int(rng.integers(3, 10))
            x = rng.integers(0, 5, n).astype(float)
            y = rng.integers(0, 5, n).astype(float)
            expected = brute_spearman(list(x), list(y))
            if expected is None:
                with pytest.raises(ConstantInput):
                    stats.spearman(x, y)
            else:
                assert stats.spearman(x, y).coefficient == pytest.approx(expected, abs=1e-9)


class TestKendall:
    def test_perfect_concordance(self):
        assert stats.kendall_tau([1, 2, 3], [4, 5, 6]).coefficient == 1.0

    def test_one_discordant_pair(self):
        # pairs: C(4,2)=6, one discordant -> (5-1)/6
        r = stats.kendall_tau([1, 2, 3, 4], [1, 2, 4, 3])
        assert r.coefficient == pytest.approx(4 / 6, abs=1e-12)

    def test_all_tied(self):
        with pytest.raises(ConstantInput):
            stats.kendall_tau([1, 1, 1], [1, 2, 3])

    def test_matches_scipy(self):
        rng = np.random.default_rng(13)
        for _ in range(25):
            n = int(rng.integers(4, 30))
            x = rng.integers(0, 5, n).astype(float)
            y = rng.integers(0, 5, n).astype(float)
            if len(set(x)) < 2 or len(set(y)) < 2:
                continue
            ours = stats.kendall_tau(x, y)
            ref = scipy.stats.kendalltau(x, y, method="asymptotic")
            assert ours.coefficient == pytest.approx(ref.statistic, abs=1e-12)
            assert ours.p_value == pytest.approx(ref.pvalue, abs=1e-9)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(17)
        for _ in range(40):
            n = int(rng.integers(3, 9))
            x = rng.integers(0, 4, n).astype(float)
            y = rng.integers(0, 4, n).astype(float)
            expected = brute_kendall_tau_b(list(x), list(y))
            if expected is None:
                with pytest.raises(ConstantInput):
                    stats.kendall_tau(x, y)
            else:
                assert stats.kendall_tau(x, y).coefficient == pytest.approx(expected, abs=1e-9)


class TestPartialSpearman:
    def test_independent_control_changes_little(self):
        rng = np.random.default_rng(19)
        n = 400
        x = rng.normal(size=n)
        y = x + rng.normal(size=n)
        z = rng.normal(size=n)  # independent of both
        plain = stats.spearman(x, y).coefficient
        partial = stats.partial_spearman(x, y, z).coefficient
        assert abs(plain - partial) < 0.05

    def test_collinear_control(self):
        y = [1.0, 2.0, 3.0, 4.0, 5.0]
        x = [2.0, 1.0, 4.0, 3.0, 5.0]
        with pytest.raises(NearSingular):
            stats.partial_spearman(x, y, y)

    def test_identical_xy(self):
        x = [1.0, 2.0, 3.0, 4.0, 5.0]
        z = [5.0, 3.0, 4.0, 1.0, 2.0]
        r = stats.partial_spearman(x, x, z)
        assert r.coefficient == pytest.approx(1.0, abs=1e-12)

    def test_known_value_against_pingouin_formula(self):
        rng = np.random.default_rng(23)
        x = rng.normal(size=50)
        z = rng.normal(size=50)
        y = 0.5 * x + 0.8 * z + 0.3 * rng.normal(size=50)
        rx = scipy.stats.rankdata(x)
        ry = scipy.stats.rankdata(y)
        rz = scipy.stats.rankdata(z)
        r_xy = np.corrcoef(rx, ry)[0, 1]
        r_xz = np.corrcoef(rx, rz)[0, 1]
        r_yz = np.corrcoef(ry, rz)[0, 1]
        expected = (r_xy - r_xz * r_yz) / math.sqrt((1 - r_xz**2) * (1 - r_yz**2))
        assert stats.partial_spearman(x, y, z).coefficient == pytest.approx(expected, abs=1e-12)

    def test_too_few(self):
        with pytest.raises(TooFewPairs):
            stats.partial_spearman([1, 2, 3], [1, 2, 3], [3, 2, 1])


class TestBootstrap:
    def test_degenerate_perfect_correlation(self):
        pairs = [(i, 2 * i) for i in range(1, 8)]
        ci = stats.bootstrap_ci(pairs, "spearman", iterations=200, seed=1)
        assert ci.point == 1.0
        assert ci.lower == 1.0 and ci.upper == 1.0

    def test_deterministic(self):
        rng = np.random.default_rng(29)
        pairs = list(zip(rng.normal(size=40), rng.normal(size=40)))
        a = stats.bootstrap_ci(pairs, "spearman", iterations=300, seed=42)
        b = stats.bootstrap_ci(pairs, "spearman", iterations=300, seed=42)
        assert (a.lower, a.upper, a.point, a.skipped) == (b.lower, b.upper, b.point, b.skipped)
        c = stats.bootstrap_ci(pairs, "spearman", iterations=300, seed=43)
        assert (a.lower, a.upper) != (c.lower, c.upper)

    def test_width_shrinks_with_n(self):
        def sample(n, seed):
            rng = np.random.default_rng(seed)
            x = rng.normal(size=n)
            y = 0.5 * x + math.sqrt(1 - 0.25) * rng.normal(size=n)
            return list(zip(x, y))

        small = stats.bootstrap_ci(sample(50, 31), "spearman", 500, seed=42)
        large = stats.bootstrap_ci(sample(500, 37), "spearman", 500, seed=42)
        ratio = (small.upper - small.lower) / (large.upper - large.lower)
        assert 2.0 <= ratio <= 4.5

    def test_ci_brackets_point_for_well_behaved_data(self):
        rng = np.random.default_rng(41)
        x = rng.normal(size=60)
        y = 0.6 * x + rng.normal(size=60)
        ci = stats.bootstrap_ci(list(zip(x, y)), "spearman", 400, seed=5)
        assert ci.lower <= ci.point <= ci.upper

    def test_kendall_selector(self):
        pairs = [(i, 2 * i) for i in range(1, 8)]
        ci = stats.bootstrap_ci(pairs, "kendall", iterations=100, seed=2)
        assert ci.point == 1.0


class TestBhFdr:
    def test_hand_example(self):
        assert stats.bh_fdr([0.01, 0.02, 0.03]) == pytest.approx([0.03, 0.03, 0.03])

    def test_all_ones(self):
        assert stats.bh_fdr([1.0, 1.0, 1.0]) == [1.0, 1.0, 1.0]

    def test_single_p_unchanged(self):
        assert stats.bh_fdr([0.2]) == [0.2]

    def test_invalid(self):
        with pytest.raises(InvalidP):
            stats.bh_fdr([0.5, 1.5])
        with pytest.raises(InvalidP):
            stats.bh_fdr([-0.1])

    def test_matches_brute_force(self):
        rng = np.random.default_rng(43)
        for _ in range(40):
            m = int(rng.integers(1, 12))
            p = rng.uniform(0, 1, m).round(3).tolist()
            assert stats.bh_fdr(p) == pytest.approx(brute_bh(p), abs=1e-12)

    def test_monotone_in_raw_p(self):
        rng = np.random.default_rng(47)
        p = rng.uniform(0, 1, 20).tolist()
        adjusted = stats.bh_fdr(p)
        order = np.argsort(p)
        adj_sorted = np.asarray(adjusted)[order]
        assert np.all(np.diff(adj_sorted) >= -1e-15)


class TestMannWhitney:
    def test_separated_groups_exact(self):
        r = stats.mann_whitney([1, 2], [3, 4])
        assert r.u == 0.0
        assert r.p_value == pytest.approx(2 / 6)
        assert r.larger == "b"

    def test_identical_groups(self):
        r = stats.mann_whitney(list(range(20)), list(range(20)))
        assert r.p_value == pytest.approx(1.0)

    def test_pair_counting_u(self):
        r = stats.mann_whitney([5], [1, 2, 3])
        assert r.u_first == 3.0  # direct pair counting for the first group
        assert r.u == 0.0  # reported min-U convention
        assert brute_u_first([5], [1, 2, 3]) == 3.0

    def test_empty_group(self):
        with pytest.raises(EmptyGroup):
            stats.mann_whitney([], [1])

    def test_exact_matches_enumeration(self):
        rng = np.random.default_rng(53)
        for _ in range(40):
            n1 = int(rng.integers(1, 6))
            n2 = int(rng.integers(1, 6))
            pool = rng.permutation(100)[: n1 + n2].astype(float)
            a, b = pool[:n1].tolist(), pool[n1:].tolist()
            ours = stats.mann_whitney(a, b)
            assert ours.p_value == pytest.approx(brute_mann_whitney_exact_p(a, b), abs=1e-12)
            assert ours.u_first == brute_u_first(a, b)

    def test_approx_matches_scipy(self):
        rng = np.random.default_rng(59)
        for _ in range(20):
            n1 = int(rng.integers(8, 25))
            n2 = int(rng.integers(8, 25))
            a = rng.integers(0, 10, n1).astype(float)
            b = rng.integers(0, 12, n2).astype(float)
            ours = stats.mann_whitney(a, b)
            ref = scipy.stats.mannwhitneyu(a, b, alternative="two-sided",
                                           method="asymptotic", use_continuity=True)
            assert ours.p_value == pytest.approx(ref.pvalue, abs=1e-9)
            assert min(ref.statistic, n1 * n2 - ref.statistic) == pytest.approx(ours.u)


class TestCliffsDelta:
    def test_complete_separation(self):
        assert stats.cliffs_delta([10, 11], [1, 2]) == 1.0
        assert stats.cliffs_delta([1, 2], [10, 11]) == -1.0

    def test_identical_groups(self):
        assert stats.cliffs_delta([1, 2, 3], [1, 2, 3]) == 0.0

    def test_interleaved(self):
        assert stats.cliffs_delta([1, 4], [2, 3]) == 0.0
        assert stats.cliffs_delta([1, 3], [2, 4]) == -0.5

    def test_matches_brute_force_and_auc_identity(self):
        rng = np.random.default_rng(61)
        for _ in range(40):
            n1 = int(rng.integers(1, 8))
            n2 = int(rng.integers(1, 8))
            a = rng.integers(0, 10, n1).astype(float).tolist()
            b = rng.integers(0, 10, n2).astype(float).tolist()
            delta = stats.cliffs_delta(a, b)
            assert delta == pytest.approx(brute_cliffs_delta(a, b), abs=1e-12)
            assert -1.0 <= delta <= 1.0
            # delta == 2*AUC - 1 where AUC treats group a as positive,
            # higher-score-is-positive (holds with ties via 0.5 credit)
            scores = a + b
            labels = [True] * n1 + [False] * n2
            auc = brute_auc(scores, labels, lower_is_positive=False)
            assert delta == pytest.approx(2 * auc - 1, abs=1e-12)


class TestMeta:
    def test_homogeneous_studies(self):
        meta = stats.dl_meta([(-0.5, 50)] * 4)
        assert meta.tau2 == 0.0
        assert meta.i2 == 0.0
        assert meta.pooled_rho == pytest.approx(-0.5, abs=1e-12)
        assert meta.q_stat == pytest.approx(0.0, abs=1e-20)

    def test_three_study_oracle(self):
        # Frozen from an independent step-by-step computation of the DL
        # formulas on (rho, n) = (-0.9, 58), (-0.5, 100), (-0.3, 220).
        effects = [(-0.9, 58), (-0.5, 100), (-0.3, 220)]
        meta = stats.dl_meta(effects)
        assert meta.k == 3
        assert meta.q_stat == pytest.approx(59.31987851387512, abs=1e-6)
        assert meta.tau2 == pytest.approx(0.27598626231921397, abs=1e-6)
        assert meta.i2 == pytest.approx(0.9662844892790501, abs=1e-6)
        assert meta.pooled_rho == pytest.approx(-0.6455475321633541, abs=1e-6)
        assert meta.dl_ci[0] == pytest.approx(-0.8795443348484651, abs=1e-6)
        assert meta.dl_ci[1] == pytest.approx(-0.1601130849862018, abs=1e-6)

        hksj_ci, hksj_p = stats.hksj_adjust(meta, effects)
        assert hksj_ci[0] == pytest.approx(-0.9795106728043181, abs=1e-6)
        assert hksj_ci[1] == pytest.approx(0.635206350403903, abs=1e-6)
        assert hksj_p == pytest.approx(0.1615034378157183, abs=1e-6)
        # HKSJ CI is wider than DL on this heterogeneous example
        assert hksj_ci[1] - hksj_ci[0] > meta.dl_ci[1] - meta.dl_ci[0]

        pi = stats.prediction_interval(meta, effects)
        assert pi[0] == pytest.approx(-0.9999999193985653, abs=1e-6)
        assert pi[1] == pytest.approx(0.9999982628102144, abs=1e-6)
        assert pi[1] - pi[0] > hksj_ci[1] - hksj_ci[0]

    def test_too_few_studies(self):
        with pytest.raises(TooFewStudies):
            stats.dl_meta([(-0.5, 50)])

    def test_degenerate_rho(self):
        with pytest.raises(DegenerateRho):
            stats.dl_meta([(1.0, 50), (-0.5, 60)])

    def test_small_study_n(self):
        with pytest.raises(TooFewStudies):
            stats.dl_meta([(-0.5, 3), (-0.4, 50)])

    def test_hksj_homogeneous_collapses(self):
        effects = [(-0.5, 50)] * 4
        meta = stats.dl_meta(effects)
        ci, p = stats.hksj_adjust(meta, effects)
        assert ci[0] == pytest.approx(-0.5, abs=1e-9)
        assert ci[1] == pytest.approx(-0.5, abs=1e-9)
        assert p < 1e-10

    def test_hksj_k2_uses_t1_quantile(self):
        effects = [(-0.6, 40), (-0.2, 60)]
        meta = stats.dl_meta(effects)
        ci, p = stats.hksj_adjust(meta, effects)
        z = [math.atanh(-0.6), math.atanh(-0.2)]
        v = [1 / 37, 1 / 57]
        w = [1 / (vi + meta.tau2) for vi in v]
        z_re = math.atanh(meta.pooled_rho)
        q = sum(wi * (zi - z_re) ** 2 for wi, zi in zip(w, z)) / 1
        se = math.sqrt(q / sum(w))
        t1 = 12.706204736174659  # t(0.975, df=1)
        assert ci[0] == pytest.approx(math.tanh(z_re - t1 * se), abs=1e-9)
        assert ci[1] == pytest.approx(math.tanh(z_re + t1 * se), abs=1e-9)

    def test_prediction_interval_no_heterogeneity(self):
        effects = [(-0.45 + 0.001 * i, 500) for i in range(30)]
        meta = stats.dl_meta(effects)
        assert meta.tau2 == pytest.approx(0.0, abs=1e-6)
        pi = stats.prediction_interval(meta, effects)
        assert pi[0] == pytest.approx(meta.dl_ci[0], abs=0.002)
        assert pi[1] == pytest.approx(meta.dl_ci[1], abs=0.002)

    def test_prediction_interval_needs_three(self):
        effects = [(-0.6, 40), (-0.2, 60)]
        meta = stats.dl_meta(effects)
        with pytest.raises(TooFewStudies):
            stats.prediction_interval(meta, effects)


class TestRoc:
    def test_perfect_separation(self):
        r = stats.roc([0.1, 0.2, 0.9, 1.0], [True, True, False, False], "lower")
        assert r.auc == 1.0
        assert r.sensitivity == 1.0 and r.specificity == 1.0

    def test_chance_level_symmetric(self):
        scores = [1, 2, 3, 4, 1, 2, 3, 4]
        labels = [True, True, True, True, False, False, False, False]
        assert stats.roc(scores, labels, "higher").auc == 0.5

    def test_direction_flip(self):
        rng = np.random.default_rng(67)
        scores = rng.normal(size=40)
        labels = rng.random(40) > 0.5
        a = stats.roc(scores, labels, "lower").auc
        b = stats.roc(scores, labels, "higher").auc
        assert a + b == pytest.approx(1.0, abs=1e-12)

    def test_six_point_hand_case(self):
        scores = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
        labels = [True, True, False, True, False, False]
        r = stats.roc(scores, labels, "lower")
        assert r.auc == pytest.approx(brute_auc(scores, labels, True), abs=1e-12)
        # U identity: AUC * n1 * n2 equals the pair-count U
        u = brute_u_first([s for s, l in zip(scores, labels) if not l],
                          [s for s, l in zip(scores, labels) if l])
        assert r.auc * 9 == pytest.approx(u, abs=1e-9)

    def test_single_class(self):
        with pytest.raises(SingleClass):
            stats.roc([1, 2, 3], [True, True, True], "lower")

    def test_youden_threshold_ties_prefer_specificity(self):
        # two thresholds reach J = 0.5; the one with higher specificity wins
        scores = [1, 2, 3, 4]
        labels = [True, True, False, False]
        r = stats.roc(scores, labels, "lower")
        assert r.sensitivity == 1.0 and r.specificity == 1.0
        assert r.optimal_threshold == 2.0

    def test_matches_brute_force_random(self):
        rng = np.random.default_rng(71)
        for _ in range(40):
            n = int(rng.integers(4, 12))
            scores = rng.integers(0, 6, n).astype(float)
            labels = rng.random(n) > 0.5
            if labels.all() or not labels.any():
                continue
            for direction, lower in (("lower", True), ("higher", False)):
                ours = stats.roc(scores, labels, direction)
                assert ours.auc == pytest.approx(
                    brute_auc(scores.tolist(), labels.tolist(), lower), abs=1e-9)


class TestLogisticLoso:
    def _clusters(self, rng, n_per_class=20, spread=0.3):
        centres = np.array([[0.0, 0.0, 2.0], [4.0, 0.0, -2.0], [0.0, 4.0, 0.0]])
        x = []
        y = []
        for ci, centre in enumerate(centres):
            x.append(centre + spread * rng.normal(size=(n_per_class, 3)))
            y += [f"class{ci}"] * n_per_class
        return np.vstack(x), y

    def test_separable_clusters(self):
        rng = np.random.default_rng(73)
        x, y = self._clusters(rng)
        result = stats.logistic_loso(x, y)
        assert result.accuracy == 1.0
        assert all(v == 1.0 for v in result.per_class_recall.values())
        assert result.coefficients.shape == (3,)

    def test_shuffled_labels_near_chance(self):
        rng = np.random.default_rng(79)
        x, y = self._clusters(rng, n_per_class=30)
        shuffled = list(y)
        rng.shuffle(shuffled)
        result = stats.logistic_loso(x, shuffled)
        assert abs(result.accuracy - 1 / 3) < 0.15

    def test_class_too_small(self):
        x = np.zeros((4, 2))
        with pytest.raises(ClassTooSmall):
            stats.logistic_loso(x, ["a", "a", "b", "c"])

    def test_nan_imputation(self):
        rng = np.random.default_rng(83)
        x, y = self._clusters(rng)
        x = x.copy()
        x[::7, 1] = np.nan
        result = stats.logistic_loso(x, y)
        assert result.accuracy > 0.9

    def test_binary_works(self):
        rng = np.random.default_rng(89)
        x = np.vstack([rng.normal(size=(15, 2)), 3 + rng.normal(size=(15, 2))])
        y = ["lo"] * 15 + ["hi"] * 15
        result = stats.logistic_loso(x, y)
        assert result.accuracy > 0.9


class TestDistributions:
    def test_normal_quantile_constant(self):
        assert stats.normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-5)
        assert stats.normal_quantile(0.5) == pytest.approx(0.0, abs=1e-12)

    def test_normal_quantile_matches_scipy(self):
        for p in (1e-8, 0.001, 0.025, 0.2, 0.5, 0.8, 0.975, 0.999, 1 - 1e-8):
            assert stats.normal_quantile(p) == pytest.approx(
                scipy.stats.norm.ppf(p), abs=1e-8)

    def test_normal_quantile_inverts_cdf(self):
        for p in (0.01, 0.3, 0.62, 0.99):
            assert stats.normal_cdf(stats.normal_quantile(p)) == pytest.approx(p, abs=1e-10)

    def test_t_quantile_df1(self):
        assert stats.student_t_quantile(0.975, 1) == pytest.approx(12.7062, abs=1e-3)
        # closed form for df=1: tan(pi * (p - 1/2))
        for p in (0.6, 0.8, 0.95, 0.995):
            assert stats.student_t_quantile(p, 1) == pytest.approx(
                math.tan(math.pi * (p - 0.5)), rel=1e-8)

    def test_t_quantile_median_zero(self):
        for df in (1, 2, 5, 50):
            assert stats.student_t_quantile(0.5, df) == 0.0

    def test_t_quantile_matches_scipy(self):
        for df in (1, 2, 3, 10, 30, 200):
            for p in (0.025, 0.1, 0.5, 0.9, 0.975, 0.999):
                assert stats.student_t_quantile(p, df) == pytest.approx(
                    scipy.stats.t.ppf(p, df), abs=1e-8, rel=1e-9)

    def test_t_sf_matches_scipy(self):
        for df in (1, 4, 17, 100):
            for t in (-5.0, -0.5, 0.0, 1.3, 8.0):
                assert stats.student_t_sf(t, df) == pytest.approx(
                    scipy.stats.t.sf(t, df), abs=1e-10)

    def test_betainc_matches_scipy(self):
        rng = np.random.default_rng(97)
        for _ in range(50):
            a = float(rng.uniform(0.2, 50))
            b = float(rng.uniform(0.2, 50))
            x = float(rng.uniform(0, 1))
            assert stats.betainc_reg(a, b, x) == pytest.approx(
                scipy.special.betainc(a, b, x), abs=1e-10)

    def test_out_of_domain(self):
        with pytest.raises(OutOfDomain):
            stats.normal_quantile(0.0)
        with pytest.raises(OutOfDomain):
            stats.student_t_quantile(1.0, 5)
        with pytest.raises(OutOfDomain):
            stats.student_t_quantile(0.5, 0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 20), min_size=1, max_size=8),
       st.lists(st.integers(0, 20), min_size=1, max_size=8))
def test_cliffs_delta_bounds_property(a, b):
    delta = stats.cliffs_delta(a, b)
    assert -1.0 <= delta <= 1.0
    assert delta == pytest.approx(brute_cliffs_delta(a, b), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 10**6))
def test_mann_whitney_exact_property(n1, n2, seed):
    if n1 + n2 > 10:
        return
    rng = np.random.default_rng(seed)
    pool = rng.permutation(1000)[: n1 + n2].astype(float)
    a, b = pool[:n1].tolist(), pool[n1:].tolist()
    ours = stats.mann_whitney(a, b)
    assert ours.p_value == pytest.approx(brute_mann_whitney_exact_p(a, b), abs=1e-12)
