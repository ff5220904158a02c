#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "iwcv/dataset.hpp"
#include "iwcv/random.hpp"

namespace iwcv {

class WeightVector;

/// Univariate normal distribution. Throws ArgumentError for variance <= 0.
class GaussianSpec {
public:
    GaussianSpec(double mean, double variance);

    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return variance_; }
    double stddev() const noexcept;
    double pdf(double x) const noexcept;
    double log_pdf(double x) const noexcept;

private:
    double mean_;
    double variance_;
};

/// Finite mixture of univariate normals; a single Gaussian is a one-component mixture.
class GaussianMixture {
public:
    /// Weights must be positive and sum to 1 (within 1e-12).
    GaussianMixture(std::vector<double> weights, std::vector<GaussianSpec> components);
    explicit GaussianMixture(GaussianSpec single);

    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<GaussianSpec>& components() const noexcept { return components_; }

    double pdf(double x) const noexcept;
    double log_pdf(double x) const noexcept;
    double mean() const noexcept;
    double second_moment() const noexcept;

private:
    std::vector<double> weights_;
    std::vector<GaussianSpec> components_;
};

enum class ClassLabel : int { negative = -1, positive = 1 };

inline std::size_t class_index(ClassLabel y) noexcept { return y == ClassLabel::positive ? 1 : 0; }

/// How target labels are drawn.
enum class TargetLabeling {
    /// Draw z from the target marginal, then y ~ Bernoulli(p(+1 | z)) using the
    /// source posterior. The class posterior is identical in both domains.
    posterior,
    /// Target marginal must have exactly two components; component 0 carries
    /// label -1 and component 1 label +1. z is drawn from the chosen component.
    component,
};

/// A covariate-shift problem on the real line. Index 0 of the per-class arrays
/// is class -1, index 1 is class +1.
struct ShiftProblem {
    std::array<GaussianSpec, 2> source_conditionals;
    std::array<double, 2> class_priors;
    GaussianMixture target_marginal;

    /// Validates the priors; throws ArgumentError.
    ShiftProblem(std::array<GaussianSpec, 2> source_conditionals, std::array<double, 2> class_priors,
                 GaussianMixture target_marginal);

    /// Source classes N(-1,1) / N(+1,1) with equal priors, target classes
    /// N(-1, v) / N(+1, v) mixed with the same priors.
    static ShiftProblem variance_shift(double target_variance);

    double source_marginal_density(double x) const noexcept;
    double target_marginal_density(double z) const noexcept;
};

/// p(y = +1 | x) under the source domain.
double source_posterior(const ShiftProblem& problem, double x) noexcept;

/// p(z | y) obtained by combining the source posterior with the target marginal.
double target_conditional_density(const ShiftProblem& problem, double z, ClassLabel y) noexcept;

/// n labeled draws: y from the priors, x from the class conditional.
LabeledDataset sample_source(const ShiftProblem& problem, std::size_t n, Rng& rng);

/// Exactly `per_class` draws from each source class (negative class first).
LabeledDataset sample_source_per_class(const ShiftProblem& problem, std::size_t per_class, Rng& rng);

/// m labeled target draws.
LabeledDataset sample_target(const ShiftProblem& problem, std::size_t m, Rng& rng,
                             TargetLabeling labeling = TargetLabeling::posterior);

/// p_Z(x) / p_X(x) at each point.
WeightVector true_importance_weights(const ShiftProblem& problem, std::span<const double> points);

}  // namespace iwcv
