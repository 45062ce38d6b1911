import math

import numpy as np
import pytest

import promobn as pb
from promobn.errors import (
    EvidenceError,
    InconsistentEvidenceError,
    UndefinedPosteriorError,
    UnsupportedShapeError,
)
from promobn.inference import (
    METHOD_CONVOLUTION,
    METHOD_KDE,
    SampleSet,
    _site_key,
    _site_uniforms,
    conditional_density,
    conditional_density_grid,
    reduce_evidence_to_clamps,
    reweight_equation,
)
from promobn.network import Network, Node, NodeKind

PUBLISHED_CI = {
    "NoPromotion": (15.15, 15.23),
    "InStore": (101.33, 102.67),
    "Catalogue": (325.34, 327.54),
    "overall": (162.72, 168.82),
}


def lognormal_mean(mu, sigma):
    return math.exp(mu + sigma * sigma / 2.0)


def expected_state_means():
    # closed-form oracle for the bundled model's three clamped means
    tri = (9.6 + 12.0 + 24.0) / 3.0
    return {
        "NoPromotion": 0.25 * tri + 0.375 * tri + 0.375 * tri,
        "InStore": lognormal_mean(3.1, 0.5242) + 2 * lognormal_mean(3.507, 0.524),
        "Catalogue": lognormal_mean(4.36, 0.2889) + 2 * lognormal_mean(4.766, 0.2889),
    }


class TestForwardSample:
    def test_bit_reproducible(self, fig2):
        a = pb.forward_sample(fig2, 2000, 123)
        b = pb.forward_sample(fig2, 2000, 123)
        np.testing.assert_array_equal(a.values, b.values)
        for node in a.state_trace:
            np.testing.assert_array_equal(a.state_trace[node], b.state_trace[node])

    def test_seed_changes_values(self, fig2):
        a = pb.forward_sample(fig2, 2000, 1)
        b = pb.forward_sample(fig2, 2000, 2)
        assert not np.array_equal(a.values, b.values)

    def test_worker_partition_reproduces_stream(self):
        # a worker handling iterations [500, 1000) must see the same uniforms
        key = _site_key(7, "chance:Promotions")
        full = _site_uniforms(7, "chance:Promotions", 1000, 2)
        bg = np.random.Philox(key=key)
        bg.advance(500 * 2 // 4)  # advance counts 4-uniform blocks
        chunk = np.random.Generator(bg).random((500, 2)).T
        np.testing.assert_array_equal(full[:, 500:], chunk)

    def test_single_iteration_support_bound(self, fig2):
        ss = pb.forward_sample(fig2, 1, 5, {"Promotions": "NoPromotion"})
        assert ss.n == 1 and ss.values.shape == (1,)
        assert 9.6 <= ss.values[0] <= 24.0

    def test_no_promotion_support_bounds(self, fig2):
        ss = pb.forward_sample(fig2, 5000, 5, {"Promotions": "NoPromotion"})
        assert ss.values.min() >= 9.6 and ss.values.max() <= 24.0

    def test_catalogue_clamped_mean_in_published_ci(self, fig2):
        ss = pb.forward_sample(fig2, 10_000, 42, {"Promotions": "Catalogue"})
        mean, _ = pb.equation_mean_ci(ss)
        lo, hi = PUBLISHED_CI["Catalogue"]
        assert lo < mean < hi

    def test_unknown_evidence_rejected(self, fig2):
        with pytest.raises(EvidenceError):
            pb.forward_sample(fig2, 10, 0, {"Nope": "X"})
        with pytest.raises(EvidenceError):
            pb.forward_sample(fig2, 10, 0, {"Promotions": "NotAState"})
        with pytest.raises(EvidenceError):
            pb.forward_sample(fig2, 10, 0, {"Sales": "High"})

    def test_n_must_be_positive(self, fig2):
        with pytest.raises(ValueError):
            pb.forward_sample(fig2, 0, 0)

    def test_cpt_child_sampling_matches_probabilities(self):
        a = Node("A", NodeKind.CHANCE, states=("a1", "a2"), prior=(0.3, 0.7))
        b = Node(
            "B",
            NodeKind.CHANCE,
            parents=("A",),
            states=("b1", "b2"),
            cpt={("a1",): (0.9, 0.1), ("a2",): (0.2, 0.8)},
        )
        net = Network("cpt", [a, b])
        ss = pb.forward_sample(net, 200_000, 17)
        # P(B=b1) = 0.3*0.9 + 0.7*0.2 = 0.41
        freq = (ss.state_trace["B"] == 0).mean()
        assert freq == pytest.approx(0.41, abs=0.005)


class TestEquationMeanCI:
    def test_constant_samples_zero_width(self):
        ss = SampleSet(n=10, seed=0, values=np.full(10, 5.0), state_trace={}, state_names={})
        mean, (lo, hi) = pb.equation_mean_ci(ss)
        assert mean == 5.0 and lo == hi == 5.0

    def test_needs_two_samples(self):
        ss = SampleSet(n=1, seed=0, values=np.array([1.0]), state_trace={}, state_names={})
        with pytest.raises(ValueError):
            pb.equation_mean_ci(ss)

    def test_catalogue_ci_width(self, fig2):
        ss = pb.forward_sample(fig2, 10_000, 42, {"Promotions": "Catalogue"})
        _, (lo, hi) = pb.equation_mean_ci(ss)
        assert 2.0 < hi - lo < 2.4  # 2 * 1.96 * 56.5 / 100

    def test_no_promotion_ci_matches_published(self, fig2):
        ss = pb.forward_sample(fig2, 10_000, 42, {"Promotions": "NoPromotion"})
        mean, (lo, hi) = pb.equation_mean_ci(ss)
        assert PUBLISHED_CI["NoPromotion"][0] < mean < PUBLISHED_CI["NoPromotion"][1]
        assert 0.06 < hi - lo < 0.09


class TestAnalyticMeans:
    def test_closed_forms(self, fig2):
        expected = expected_state_means()
        for state, value in expected.items():
            assert pb.analytic_state_mean(fig2, state) == pytest.approx(value)
        assert expected["NoPromotion"] == pytest.approx(15.2)
        assert expected["InStore"] == pytest.approx(101.9783, abs=1e-3)
        assert expected["Catalogue"] == pytest.approx(326.4991, abs=1e-3)

    def test_analytic_values_inside_published_cis(self, fig2):
        for state, (lo, hi) in PUBLISHED_CI.items():
            if state == "overall":
                continue
            assert lo < pb.analytic_state_mean(fig2, state) < hi

    def test_mixture_mean(self, fig2):
        mix = pb.analytic_mixture_mean(fig2)
        assert mix == pytest.approx(
            0.47 * 326.49909 + 0.08 * 101.97829 + 0.45 * 15.2, abs=1e-4
        )
        lo, hi = PUBLISHED_CI["overall"]
        assert lo < mix < hi

    def test_clamped_runs_within_three_se(self, fig2):
        for state in ("NoPromotion", "InStore", "Catalogue"):
            ss = pb.forward_sample(fig2, 10_000, 42, {"Promotions": state})
            se = ss.values.std(ddof=1) / math.sqrt(ss.n)
            assert abs(ss.values.mean() - pb.analytic_state_mean(fig2, state)) < 3 * se

    def test_mixture_consistency(self, fig2):
        ss = pb.forward_sample(fig2, 10_000, 42)
        se = ss.values.std(ddof=1) / math.sqrt(ss.n)
        assert abs(ss.values.mean() - pb.analytic_mixture_mean(fig2)) < 3 * se

    def test_multi_chance_shape_rejected(self):
        a = Node("A", NodeKind.CHANCE, states=("x", "y"), prior=(0.5, 0.5))
        b = Node("B", NodeKind.CHANCE, states=("x", "y"), prior=(0.5, 0.5))
        with pytest.raises(UnsupportedShapeError):
            pb.analytic_state_mean(Network("two", [a, b]), "x")


class TestDiscretePosteriorExact:
    def test_no_evidence_reproduces_priors(self, fig2):
        report = pb.discrete_posterior_exact(fig2)
        assert report.method == "exact-enumeration"
        assert report.vector("Promotions") == pytest.approx([0.47, 0.08, 0.45])
        # deterministic children mirror the driver exactly
        assert report.probabilities["Price"]["DiscountedCatalogue"] == pytest.approx(0.47)
        assert report.probabilities["ProductLocation"]["Gondola_NP"] == pytest.approx(0.45)

    def test_catalogue_forces_fixture(self, fig2):
        report = pb.discrete_posterior_exact(fig2, {"Promotions": "Catalogue"})
        assert report.probabilities["ProductLocation"]["Fixture"] == 1.0

    def test_bayes_inversion_of_deterministic_map(self, fig2):
        report = pb.discrete_posterior_exact(fig2, {"Price": "Normal"})
        assert report.probabilities["Promotions"]["NoPromotion"] == 1.0

    def test_inconsistent_evidence(self, fig2):
        with pytest.raises(InconsistentEvidenceError):
            pb.discrete_posterior_exact(
                fig2, {"Promotions": "Catalogue", "Price": "Normal"}
            )

    def test_vectors_normalized(self, fig2):
        report = pb.discrete_posterior_exact(fig2, {"ProductLocation": "Fixture"})
        for node in report.probabilities:
            assert sum(report.vector(node)) == pytest.approx(1.0, abs=1e-9)

    def test_cpt_network_against_hand_enumeration(self):
        a = Node("A", NodeKind.CHANCE, states=("a1", "a2"), prior=(0.3, 0.7))
        b = Node(
            "B",
            NodeKind.CHANCE,
            parents=("A",),
            states=("b1", "b2"),
            cpt={("a1",): (0.9, 0.1), ("a2",): (0.2, 0.8)},
        )
        net = Network("cpt", [a, b])
        report = pb.discrete_posterior_exact(net, {"B": "b1"})
        # oracle: P(a1|b1) = 0.3*0.9 / (0.3*0.9 + 0.7*0.2) = 27/41
        assert report.probabilities["A"]["a1"] == pytest.approx(27.0 / 41.0)

    def test_evidence_on_equation_node_rejected(self, fig2):
        with pytest.raises(EvidenceError):
            pb.discrete_posterior_exact(fig2, {"Sales": "High"})


class TestConditionalDensity:
    def test_zero_outside_support(self, fig2):
        assert conditional_density(fig2, "NoPromotion", 175.0) == 0.0

    def test_normalized(self, fig2):
        for state in ("NoPromotion", "InStore", "Catalogue"):
            grid, density = conditional_density_grid(fig2, state)
            assert np.trapezoid(density, grid) == pytest.approx(1.0, abs=1e-3)

    def test_instore_beats_catalogue_at_175(self, fig2):
        assert conditional_density(fig2, "InStore", 175.0) > conditional_density(
            fig2, "Catalogue", 175.0
        )

    def test_matches_independent_window_estimate(self, fig2):
        # brute-force oracle: fraction of direct draws inside a +/-2 window
        rng = np.random.default_rng(0)
        n = 400_000
        total = np.zeros(n)
        for mu, sigma in ((3.1, 0.5242), (3.507, 0.524), (3.507, 0.524)):
            total += np.exp(mu + sigma * rng.standard_normal(n))
        window = (np.abs(total - 175.0) < 2.0).mean() / 4.0
        assert conditional_density(fig2, "InStore", 175.0) == pytest.approx(
            window, rel=0.1
        )

    def test_grid_step_validated(self, fig2):
        with pytest.raises(ValueError):
            conditional_density_grid(fig2, "InStore", grid_step=0.0)


class TestPosteriorGivenEquationEvidence:
    def test_low_value_pins_no_promotion(self, fig2):
        report = pb.posterior_given_equation_evidence(fig2, 15.0)
        assert report.probabilities["Promotions"]["NoPromotion"] > 0.99

    def test_catalogue_mean_argmax(self, fig2):
        report = pb.posterior_given_equation_evidence(fig2, 326.4991)
        best = max(report.probabilities["Promotions"].items(), key=lambda kv: kv[1])[0]
        assert best == "Catalogue"

    def test_deterministic_nodes_mirror_driver(self, fig2):
        report = pb.posterior_given_equation_evidence(fig2, 175.0)
        promo = report.probabilities["Promotions"]
        assert report.probabilities["Price"]["DiscountedInstore"] == pytest.approx(
            promo["InStore"]
        )
        assert report.probabilities["ProductLocation"]["Fixture"] == pytest.approx(
            promo["Catalogue"]
        )

    def test_normalized_and_method_tagged(self, fig2):
        for method in (METHOD_CONVOLUTION, METHOD_KDE):
            report = pb.posterior_given_equation_evidence(
                fig2, 175.0, method, n=20_000, seed=8
            )
            assert report.method == method
            assert sum(report.vector("Promotions")) == pytest.approx(1.0, abs=1e-9)

    def test_kde_agrees_with_convolution(self, fig2):
        for value in (50.0, 100.0, 175.0, 250.0, 326.0):
            conv = pb.posterior_given_equation_evidence(fig2, value)
            kde = pb.posterior_given_equation_evidence(
                fig2, value, METHOD_KDE, n=100_000, seed=13
            )
            for state in ("Catalogue", "InStore", "NoPromotion"):
                assert abs(
                    conv.probabilities["Promotions"][state]
                    - kde.probabilities["Promotions"][state]
                ) < 0.03

    def test_undefined_posterior_when_all_densities_zero(self, fig2):
        with pytest.raises(UndefinedPosteriorError):
            pb.posterior_given_equation_evidence(fig2, -5.0)

    def test_unknown_method(self, fig2):
        with pytest.raises(ValueError):
            pb.posterior_given_equation_evidence(fig2, 100.0, "magic")


class TestWeights:
    def test_sensitivity_analytic_means_identical(self, fig2):
        rows = pb.weight_sensitivity(
            fig2, [(0.375, 0.375), (0.30, 0.45), (0.35, 0.40)], n=10_000, seed=42
        )
        means = [round(r.analytic_mean, 4) for r in rows]
        assert means.count(means[0]) == len(means)

    def test_degenerate_split_same_mean(self, fig2):
        base = pb.weight_sensitivity(fig2, [(0.375, 0.375)], n=100, seed=1)[0]
        degen = pb.weight_sensitivity(fig2, [(0.75, 0.0)], n=100, seed=1)[0]
        assert degen.analytic_mean == pytest.approx(base.analytic_mean, abs=1e-9)

    def test_mc_means_within_three_se(self, fig2):
        rows = pb.weight_sensitivity(
            fig2, [(0.375, 0.375), (0.30, 0.45), (0.35, 0.40)], n=10_000, seed=42
        )
        sd = 155.7  # mixture SD of the bundled model
        se = sd / math.sqrt(10_000)
        for row in rows:
            assert abs(row.mc_mean - row.analytic_mean) < 3 * se

    def test_bad_split_rejected(self, fig2):
        with pytest.raises(ValueError):
            pb.weight_sensitivity(fig2, [(0.5, 0.5)])

    def test_reweight_argmax_stable_under_common_scaling(self, fig2):
        scaled = reweight_equation(fig2, (0.5, 0.75, 0.75))
        assert pb.analytic_state_mean(scaled, "Catalogue") == pytest.approx(
            2.0 * pb.analytic_state_mean(fig2, "Catalogue")
        )
        base_report = pb.posterior_given_equation_evidence(fig2, 175.0)
        scaled_report = pb.posterior_given_equation_evidence(scaled, 350.0)
        argmax = lambda rep: max(
            rep.probabilities["Promotions"].items(), key=lambda kv: kv[1]
        )[0]
        assert argmax(base_report) == argmax(scaled_report)

    def test_reweight_validates_lengths_and_signs(self, fig2):
        with pytest.raises(ValueError):
            reweight_equation(fig2, (0.5, 0.5))
        with pytest.raises(ValueError):
            reweight_equation(fig2, (-0.1, 0.6, 0.5))
        with pytest.raises(ValueError):
            reweight_equation(fig2, (0.0, 0.0, 0.0))


class TestEvidenceReduction:
    def test_deterministic_evidence_inverts_to_driver_clamp(self, fig2):
        net, clamps = reduce_evidence_to_clamps(fig2, {"Price": "Normal"})
        assert clamps == {"Promotions": "NoPromotion"}
        assert net is fig2

    def test_contradictory_evidence(self, fig2):
        with pytest.raises(InconsistentEvidenceError):
            reduce_evidence_to_clamps(
                fig2, {"Price": "Normal", "ProductLocation": "Fixture"}
            )

    def test_chance_evidence_passes_through(self, fig2):
        net, clamps = reduce_evidence_to_clamps(fig2, {"Promotions": "InStore"})
        assert clamps == {"Promotions": "InStore"} and net is fig2
