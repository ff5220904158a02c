#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "iwcv/dataset.hpp"
#include "iwcv/qp.hpp"

namespace iwcv {

/// Nonnegative finite importance weights, one per source sample.
class WeightVector {
public:
    WeightVector() = default;
    /// Throws ArgumentError on a negative or non-finite entry.
    explicit WeightVector(Vector values);

    static WeightVector ones(std::size_t n) { return WeightVector(Vector::Ones(static_cast<Eigen::Index>(n))); }

    const Vector& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
    double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
    double sum() const noexcept { return values_.sum(); }
    double mean() const noexcept { return values_.size() ? values_.mean() : 0.0; }

    WeightVector subset(const std::vector<std::size_t>& indices) const;

private:
    Vector values_;
};

/// exp(-||a - b||^2 / (2 sigma^2)).
double gaussian_kernel(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b, double sigma);

/// Gram matrix K(i, j) = k(rows_a(i), rows_b(j)).
Matrix gaussian_gram(const Matrix& rows_a, const Matrix& rows_b, double sigma);

/// 1.06 * sd * n^(-1/5) per dimension (sample sd), averaged over dimensions
/// with nonzero spread. Throws DegenerateDataError when every dimension is constant.
double silverman_bandwidth(const Matrix& X);

/// Samples stacked row-wise.
Matrix pool_rows(const Matrix& a, const Matrix& b);

struct RgConfig {
    /// Added to every eigenvalue of the fitted covariances; 0 rejects singular fits.
    double variance_floor = 0.0;
};

/// Ratio of Gaussians fitted by maximum likelihood to target and source,
/// evaluated at the source points.
WeightVector estimate_rg(const Matrix& source, const Matrix& target, const RgConfig& cfg = {});

struct KliepConfig {
    /// Absolute kernel widths to try. Empty means `width_multipliers` times the
    /// Silverman bandwidth of the pooled sample.
    std::vector<double> width_candidates;
    std::vector<double> width_multipliers{0.1, 0.2, 0.5, 1.0, 2.0, 5.0};
    std::size_t cv_folds = 3;
    std::size_t max_iterations = 2000;
    /// Relative objective improvement below which the ascent stops.
    double tolerance = 1e-9;
    /// Seed of the target fold assignment used for width selection.
    std::uint64_t seed = 0;
};

struct KliepFit {
    WeightVector weights;
    double width = 0.0;
    /// Mean held-out target log-likelihood per candidate width.
    std::vector<double> cv_scores;
    std::vector<double> candidate_widths;
    /// Mean log w(z_j) after every accepted ascent step, starting point included.
    std::vector<double> objective_trace;
};

/// Kernel model w(x) = sum_l alpha_l k(x, c_l), centers at the target points,
/// alpha >= 0, fitted by projected gradient ascent on sum_j log w(z_j) subject
/// to sum_i w(x_i) = n.
KliepFit fit_kliep(const Matrix& source, const Matrix& target, const KliepConfig& cfg = {});

WeightVector estimate_kliep(const Matrix& source, const Matrix& target, const KliepConfig& cfg = {});

struct KmmConfig {
    double upper_bound = 1000.0;
    /// Sum slack epsilon; nullopt means upper_bound / sqrt(n).
    std::optional<double> sum_slack;
    /// Kernel width; nullopt means Silverman on the pooled sample.
    std::optional<double> bandwidth;
    double solver_tolerance = 1e-6;
    std::size_t max_iterations = 100000;
};

/// Kernel mean matching: min 0.5 w'K_ss w - kappa'w, kappa_i = (n/m) sum_j k(x_i, z_j),
/// with 0 <= w_i <= B and |sum(w) - n| <= n * epsilon.
WeightVector estimate_kmm(const Matrix& source, const Matrix& target, const KmmConfig& cfg = {});

/// Voronoi count: 1 + number of target points whose nearest source point is
/// i. Ties go to the lowest source index.
WeightVector estimate_nn(const Matrix& source, const Matrix& target);

}  // namespace iwcv
