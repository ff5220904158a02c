#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "iwcv/error.hpp"
#include "iwcv/shift.hpp"
#include "iwcv/weights.hpp"

using namespace iwcv;

namespace {

ShiftProblem standard_source(GaussianMixture target) {
    return ShiftProblem({GaussianSpec(-1.0, 1.0), GaussianSpec(1.0, 1.0)}, {0.5, 0.5}, std::move(target));
}

/// Target marginal identical to the source mixture.
ShiftProblem identity_shift() {
    return standard_source(GaussianMixture({0.5, 0.5}, {GaussianSpec(-1.0, 1.0), GaussianSpec(1.0, 1.0)}));
}

ShiftProblem single_gaussian_target(double variance) {
    return standard_source(GaussianMixture(GaussianSpec(0.0, variance)));
}

double integrate(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-13);
}

}  // namespace

TEST(GaussianSpec, RejectsNonPositiveVariance) {
    EXPECT_THROW(GaussianSpec(0.0, 0.0), ArgumentError);
    EXPECT_THROW(GaussianSpec(0.0, -1.0), ArgumentError);
}

TEST(GaussianSpec, DensityMatchesClosedForm) {
    const GaussianSpec g(1.0, 4.0);
    EXPECT_NEAR(g.pdf(1.0), 1.0 / (2.0 * std::sqrt(2.0 * std::numbers::pi)), 1e-15);
    EXPECT_NEAR(std::exp(g.log_pdf(3.0)), g.pdf(3.0), 1e-15);
}

TEST(GaussianMixture, RejectsBadWeights) {
    EXPECT_THROW(GaussianMixture({0.3, 0.3}, {GaussianSpec(0, 1), GaussianSpec(1, 1)}), ArgumentError);
    EXPECT_THROW(GaussianMixture({1.2, -0.2}, {GaussianSpec(0, 1), GaussianSpec(1, 1)}), ArgumentError);
}

TEST(ShiftProblem, RejectsBadPriors) {
    const GaussianMixture t(GaussianSpec(0, 1));
    EXPECT_THROW(ShiftProblem({GaussianSpec(-1, 1), GaussianSpec(1, 1)}, {0.4, 0.4}, t), ArgumentError);
    EXPECT_THROW(ShiftProblem({GaussianSpec(-1, 1), GaussianSpec(1, 1)}, {0.0, 1.0}, t), ArgumentError);
}

TEST(SourcePosterior, SymmetricAtZero) {
    EXPECT_DOUBLE_EQ(source_posterior(identity_shift(), 0.0), 0.5);
}

TEST(SourcePosterior, LogisticWithSlopeTwo) {
    EXPECT_NEAR(source_posterior(identity_shift(), 1.0), 1.0 / (1.0 + std::exp(-2.0)), 1e-12);
    EXPECT_NEAR(source_posterior(identity_shift(), 1.0), 0.880797, 1e-6);
}

TEST(SourcePosterior, TendsToOne) {
    EXPECT_NEAR(source_posterior(identity_shift(), 50.0), 1.0, 1e-15);
    EXPECT_NEAR(source_posterior(identity_shift(), -50.0), 0.0, 1e-15);
    EXPECT_TRUE(std::isfinite(source_posterior(identity_shift(), 1e6)));
}

TEST(TargetConditional, IdentityShiftReturnsSourceConditional) {
    const auto p = identity_shift();
    for (double z : {-2.0, 0.0, 2.0}) {
        EXPECT_NEAR(target_conditional_density(p, z, ClassLabel::positive), GaussianSpec(1, 1).pdf(z), 1e-12);
        EXPECT_NEAR(target_conditional_density(p, z, ClassLabel::negative), GaussianSpec(-1, 1).pdf(z), 1e-12);
    }
}

TEST(TargetConditional, LawOfTotalProbability) {
    for (double v : {0.1, 1.0, 4.0}) {
        for (const auto& p : {single_gaussian_target(v), ShiftProblem::variance_shift(v)}) {
            const double z = 0.7;
            const double total = 0.5 * target_conditional_density(p, z, ClassLabel::positive) +
                                 0.5 * target_conditional_density(p, z, ClassLabel::negative);
            EXPECT_NEAR(total, p.target_marginal_density(z), 1e-12);
        }
    }
}

TEST(TargetConditional, IntegratesToOneByQuadrature) {
    for (double v : {0.1, 0.5, 1.0, 2.0, 4.0}) {
        for (const auto& p : {single_gaussian_target(v), ShiftProblem::variance_shift(v)}) {
            const double sd = std::sqrt(v);
            for (ClassLabel y : {ClassLabel::positive, ClassLabel::negative}) {
                const double mass =
                    integrate([&](double z) { return target_conditional_density(p, z, y); }, -30 * sd, 30 * sd);
                EXPECT_NEAR(mass, 1.0, 1e-6) << "variance " << v;
            }
        }
    }
    const auto p = single_gaussian_target(4.0);
    EXPECT_NEAR(integrate([&](double z) { return target_conditional_density(p, z, ClassLabel::positive); }, -30, 30),
                1.0, 1e-6);
}

TEST(TargetConditional, PropertyPosteriorEqualityAtRandomPoints) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> point(-6.0, 6.0);
    std::uniform_real_distribution<double> var(0.1, 10.0);
    std::uniform_real_distribution<double> prior(0.1, 0.9);
    for (int i = 0; i < 100; ++i) {
        const double pi = prior(rng);
        const ShiftProblem p({GaussianSpec(-1.0, var(rng)), GaussianSpec(1.5, var(rng))}, {1 - pi, pi},
                             GaussianMixture(GaussianSpec(point(rng) / 3, var(rng))));
        const double z = point(rng);
        const double joint_pos = target_conditional_density(p, z, ClassLabel::positive) * pi;
        const double joint_neg = target_conditional_density(p, z, ClassLabel::negative) * (1 - pi);
        EXPECT_NEAR(joint_pos / (joint_pos + joint_neg), source_posterior(p, z), 1e-12);
    }
}

TEST(SampleSource, MonteCarloClassMean) {
    Rng rng(123);
    const auto d = sample_source(identity_shift(), 100000, rng);
    double sum = 0;
    int count = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.labels()[i] > 0) {
            sum += d.features()(i, 0);
            ++count;
        }
    }
    EXPECT_NEAR(sum / count, 1.0, 0.02);
}

TEST(SampleSource, BothClassesPresentAcrossSeeds) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        const auto d = sample_source(identity_shift(), 100, rng);
        const auto pos = (d.labels().array() > 0).count();
        EXPECT_GT(pos, 0);
        EXPECT_LT(pos, 100);
    }
}

TEST(SampleSource, Deterministic) {
    Rng a(8), b(8);
    EXPECT_EQ(sample_source(identity_shift(), 50, a).features(), sample_source(identity_shift(), 50, b).features());
}

TEST(SampleSource, PerClassCountsExact) {
    Rng rng(1);
    const auto d = sample_source_per_class(identity_shift(), 30, rng);
    EXPECT_EQ(d.size(), 60u);
    EXPECT_EQ((d.labels().array() > 0).count(), 30);
}

TEST(SampleTarget, SingleGaussianVariance) {
    Rng rng(77);
    const auto d = sample_target(single_gaussian_target(4.0), 100000, rng);
    const Vector z = d.features().col(0);
    const double mean = z.mean();
    const double var = (z.array() - mean).square().sum() / static_cast<double>(z.size() - 1);
    EXPECT_NEAR(var, 4.0, 0.1);
}

TEST(SampleTarget, IdentityShiftBalancedLabels) {
    Rng rng(78);
    const auto d = sample_target(identity_shift(), 100000, rng);
    const double frac = static_cast<double>((d.labels().array() > 0).count()) / 1e5;
    EXPECT_NEAR(frac, 0.5, 0.01);
}

TEST(SampleTarget, LabelFrequencyFollowsPosterior) {
    Rng rng(79);
    const auto d = sample_target(single_gaussian_target(4.0), 400000, rng);
    int inside = 0, pos = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double z = d.features()(i, 0);
        if (z >= 0.9 && z <= 1.1) {
            ++inside;
            if (d.labels()[i] > 0) ++pos;
        }
    }
    ASSERT_GT(inside, 1000);
    EXPECT_NEAR(static_cast<double>(pos) / inside, 0.8808, 0.02);
}

TEST(SampleTarget, ComponentLabelingUsesComponentIndex) {
    Rng rng(80);
    const auto p = ShiftProblem::variance_shift(0.01);
    const auto d = sample_target(p, 2000, rng, TargetLabeling::component);
    for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_EQ(d.labels()[i] > 0, d.features()(i, 0) > 0);  // components at +-1 with sd 0.1
    }
    EXPECT_THROW(sample_target(single_gaussian_target(1.0), 5, rng, TargetLabeling::component), ArgumentError);
}

TEST(SampleTarget, VarianceShiftMarginalMoments) {
    Rng rng(81);
    const auto d = sample_target(ShiftProblem::variance_shift(3.0), 200000, rng, TargetLabeling::component);
    const Vector z = d.features().col(0);
    EXPECT_NEAR(z.mean(), 0.0, 0.02);
    EXPECT_NEAR(z.squaredNorm() / static_cast<double>(z.size()), 4.0, 0.05);  // v + 1
}

TEST(TrueImportanceWeights, IdentityShiftIsOne) {
    const std::vector<double> xs{-3, -1, 0, 0.5, 2, 7};
    const auto w = true_importance_weights(identity_shift(), xs);
    for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(w[i], 1.0, 1e-12);
}

TEST(TrueImportanceWeights, HandEvaluatedAtZero) {
    const std::vector<double> xs{0.0};
    const auto w = true_importance_weights(single_gaussian_target(4.0), xs);
    EXPECT_NEAR(w[0], std::exp(0.5) / 2.0, 1e-12);
    EXPECT_NEAR(w[0], 0.8244, 1e-4);
}

TEST(TrueImportanceWeights, ImportanceSamplingIdentity) {
    Rng rng(21);
    for (const auto& p : {single_gaussian_target(2.0), ShiftProblem::variance_shift(0.5)}) {
        const auto d = sample_source(p, 10000, rng);
        const Vector xs = d.features().col(0);
        const auto w = true_importance_weights(p, std::span<const double>(xs.data(), xs.size()));
        EXPECT_NEAR(w.mean(), 1.0, 0.05);
    }
}

TEST(TrueImportanceWeights, PropertyFinitePositiveOverVarianceRange) {
    for (double ratio : {0.1, 0.3, 1.0, 3.0, 10.0}) {
        const auto p = ShiftProblem::variance_shift(ratio);
        std::vector<double> grid;
        for (double x = -40; x <= 40; x += 0.25) grid.push_back(x);
        const auto w = true_importance_weights(p, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            EXPECT_TRUE(std::isfinite(std::log(w[i])) || w[i] == 0.0) << ratio << " at " << grid[i];
            EXPECT_TRUE(std::isfinite(w[i]));
        }
        // strictly positive where doubles can represent the ratio
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (std::abs(grid[i]) <= 10) EXPECT_GT(w[i], 0.0);
        }
    }
}

TEST(VarianceShift, UnitVarianceIsIdentityShift) {
    const auto p = ShiftProblem::variance_shift(1.0);
    for (double x : {-2.0, 0.3, 4.0}) EXPECT_NEAR(p.target_marginal_density(x), p.source_marginal_density(x), 1e-15);
}
