#include "iwcv/shift.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "iwcv/error.hpp"
#include "iwcv/weights.hpp"

namespace iwcv {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))

double log_sum_exp(double a, double b) noexcept {
    const double hi = std::max(a, b);
    if (std::isinf(hi)) return hi;
    return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
}

}  // namespace

GaussianSpec::GaussianSpec(double mean, double variance) : mean_(mean), variance_(variance) {
    if (!std::isfinite(mean)) throw ArgumentError("Gaussian mean must be finite");
    if (!(variance > 0.0) || !std::isfinite(variance)) {
        throw ArgumentError("Gaussian variance must be positive, got " + std::to_string(variance));
    }
}

double GaussianSpec::stddev() const noexcept { return std::sqrt(variance_); }

double GaussianSpec::log_pdf(double x) const noexcept {
    const double d = x - mean_;
    return -0.5 * d * d / variance_ - 0.5 * std::log(variance_) - kLogSqrt2Pi;
}

double GaussianSpec::pdf(double x) const noexcept { return std::exp(log_pdf(x)); }

GaussianMixture::GaussianMixture(std::vector<double> weights, std::vector<GaussianSpec> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
    if (components_.empty() || weights_.size() != components_.size()) {
        throw ArgumentError("mixture needs one weight per component and at least one component");
    }
    for (double w : weights_) {
        if (!(w > 0.0)) throw ArgumentError("mixture weights must be positive");
    }
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12) throw ArgumentError("mixture weights must sum to 1");
}

GaussianMixture::GaussianMixture(GaussianSpec single) : weights_{1.0}, components_{single} {}

double GaussianMixture::log_pdf(double x) const noexcept {
    double acc = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < components_.size(); ++k) {
        acc = log_sum_exp(acc, std::log(weights_[k]) + components_[k].log_pdf(x));
    }
    return acc;
}

double GaussianMixture::pdf(double x) const noexcept { return std::exp(log_pdf(x)); }

double GaussianMixture::mean() const noexcept {
    double m = 0.0;
    for (std::size_t k = 0; k < components_.size(); ++k) m += weights_[k] * components_[k].mean();
    return m;
}

double GaussianMixture::second_moment() const noexcept {
    double m2 = 0.0;
    for (std::size_t k = 0; k < components_.size(); ++k) {
        const auto& c = components_[k];
        m2 += weights_[k] * (c.variance() + c.mean() * c.mean());
    }
    return m2;
}

ShiftProblem::ShiftProblem(std::array<GaussianSpec, 2> conditionals, std::array<double, 2> priors,
                           GaussianMixture target)
    : source_conditionals(conditionals), class_priors(priors), target_marginal(std::move(target)) {
    for (double p : class_priors) {
        if (!(p > 0.0 && p < 1.0)) throw ArgumentError("class priors must lie in (0, 1)");
    }
    if (std::abs(class_priors[0] + class_priors[1] - 1.0) > 1e-12) {
        throw ArgumentError("class priors must sum to 1");
    }
}

ShiftProblem ShiftProblem::variance_shift(double target_variance) {
    const std::array<double, 2> priors{0.5, 0.5};
    return ShiftProblem({GaussianSpec(-1.0, 1.0), GaussianSpec(1.0, 1.0)}, priors,
                        GaussianMixture({priors[0], priors[1]},
                                        {GaussianSpec(-1.0, target_variance), GaussianSpec(1.0, target_variance)}));
}

double ShiftProblem::source_marginal_density(double x) const noexcept {
    return class_priors[0] * source_conditionals[0].pdf(x) + class_priors[1] * source_conditionals[1].pdf(x);
}

double ShiftProblem::target_marginal_density(double z) const noexcept { return target_marginal.pdf(z); }

double source_posterior(const ShiftProblem& problem, double x) noexcept {
    const double log_neg = std::log(problem.class_priors[0]) + problem.source_conditionals[0].log_pdf(x);
    const double log_pos = std::log(problem.class_priors[1]) + problem.source_conditionals[1].log_pdf(x);
    // logistic of the log-odds; stable in both tails
    const double t = log_pos - log_neg;
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double target_conditional_density(const ShiftProblem& problem, double z, ClassLabel y) noexcept {
    const double p_pos = source_posterior(problem, z);
    const double post = y == ClassLabel::positive ? p_pos : 1.0 - p_pos;
    return post * problem.target_marginal_density(z) / problem.class_priors[class_index(y)];
}

namespace {

double draw_mixture(const GaussianMixture& mix, Rng& rng, std::size_t* component = nullptr) {
    std::size_t k = 0;
    if (mix.components().size() > 1) {
        std::discrete_distribution<std::size_t> pick(mix.weights().begin(), mix.weights().end());
        k = pick(rng);
    }
    if (component) *component = k;
    const auto& c = mix.components()[k];
    return std::normal_distribution<double>(c.mean(), c.stddev())(rng);
}

LabeledDataset one_dimensional(const std::vector<double>& xs, const std::vector<double>& ys) {
    Matrix x(static_cast<Eigen::Index>(xs.size()), 1);
    Vector y(static_cast<Eigen::Index>(ys.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        x(static_cast<Eigen::Index>(i), 0) = xs[i];
        y[static_cast<Eigen::Index>(i)] = ys[i];
    }
    return LabeledDataset(std::move(x), std::move(y), {"x"});
}

}  // namespace

LabeledDataset sample_source(const ShiftProblem& problem, std::size_t n, Rng& rng) {
    if (n < 1) throw ArgumentError("sample_source needs n >= 1");
    std::bernoulli_distribution is_positive(problem.class_priors[1]);
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool pos = is_positive(rng);
        const auto& c = problem.source_conditionals[pos ? 1 : 0];
        xs[i] = std::normal_distribution<double>(c.mean(), c.stddev())(rng);
        ys[i] = pos ? 1.0 : -1.0;
    }
    return one_dimensional(xs, ys);
}

LabeledDataset sample_source_per_class(const ShiftProblem& problem, std::size_t per_class, Rng& rng) {
    if (per_class < 1) throw ArgumentError("sample_source_per_class needs at least one sample per class");
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < 2; ++k) {
        const auto& c = problem.source_conditionals[k];
        std::normal_distribution<double> draw(c.mean(), c.stddev());
        for (std::size_t i = 0; i < per_class; ++i) {
            xs.push_back(draw(rng));
            ys.push_back(k == 1 ? 1.0 : -1.0);
        }
    }
    return one_dimensional(xs, ys);
}

LabeledDataset sample_target(const ShiftProblem& problem, std::size_t m, Rng& rng, TargetLabeling labeling) {
    if (m < 1) throw ArgumentError("sample_target needs m >= 1");
    if (labeling == TargetLabeling::component && problem.target_marginal.components().size() != 2) {
        throw ArgumentError("component labeling needs a two-component target marginal");
    }
    std::vector<double> zs(m), us(m);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t j = 0; j < m; ++j) {
        std::size_t k = 0;
        zs[j] = draw_mixture(problem.target_marginal, rng, &k);
        if (labeling == TargetLabeling::component) {
            us[j] = k == 1 ? 1.0 : -1.0;
        } else {
            us[j] = unit(rng) < source_posterior(problem, zs[j]) ? 1.0 : -1.0;
        }
    }
    return one_dimensional(zs, us);
}

WeightVector true_importance_weights(const ShiftProblem& problem, std::span<const double> points) {
    Vector w(static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double x = points[i];
        const double log_src = std::log(problem.class_priors[0]) + problem.source_conditionals[0].log_pdf(x);
        const double log_src2 = std::log(problem.class_priors[1]) + problem.source_conditionals[1].log_pdf(x);
        w[static_cast<Eigen::Index>(i)] = std::exp(problem.target_marginal.log_pdf(x) - log_sum_exp(log_src, log_src2));
    }
    return WeightVector(std::move(w));
}

}  // namespace iwcv
