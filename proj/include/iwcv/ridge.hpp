#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "iwcv/dataset.hpp"

namespace iwcv {

class WeightVector;

/// Linear hypothesis h(x) = x'w, no intercept.
struct LinearClassifier {
    Vector weights;

    double predict(const Eigen::Ref<const Vector>& x) const { return x.dot(weights); }
};

/// Reciprocal condition number below which a shifted Gram matrix is treated as singular.
inline constexpr double kSingularRcond = 1e-12;

/// Solves (X'X + lambda I) w = X'y by Cholesky. Negative lambda is allowed as
/// long as the shifted system stays positive definite and well conditioned;
/// otherwise throws SingularSystemError carrying lambda.
LinearClassifier fit_ridge(const Matrix& X, const Vector& y, double lambda);

/// Ridge solutions for many lambdas on one training set: X'X is
/// eigendecomposed once and each solve is O(d^2).
class RidgePath {
public:
    RidgePath(const Matrix& X, const Vector& y);

    /// nullopt when X'X + lambda I is singular, indefinite or too ill conditioned.
    std::optional<LinearClassifier> solve(double lambda) const;

    std::size_t dim() const noexcept { return static_cast<std::size_t>(eigenvalues_.size()); }

private:
    Vector eigenvalues_;
    Matrix eigenvectors_;
    Vector projected_rhs_;  // V' X'y
};

/// (1/n)||Xh - y||^2 through its expansion 1 - (2/n) y'Xh + (1/n) h'X'Xh,
/// which relies on y'y/n = 1 for +-1 labels.
double mse(const LinearClassifier& h, const Matrix& X, const Vector& y);

/// Direct residual form (1/n)||Xh - y||^2.
double mse_residual(const LinearClassifier& h, const Matrix& X, const Vector& y);

enum class WeightedMseMode {
    /// 1 - (2/n) y'WXh + (1/n) h'X'WXh: the constant term stays unweighted.
    as_printed,
    /// (1/n) sum_i w_i (x_i'h - y_i)^2.
    fully_weighted,
};

/// Throws ArgumentError on length mismatch or negative weights.
double weighted_mse(const LinearClassifier& h, const Matrix& X, const Vector& y, const WeightVector& w,
                    WeightedMseMode mode = WeightedMseMode::as_printed);

/// (X'WX)^{-1} X'Wy. Throws SingularSystemError (lambda = 0) when X'WX is singular.
LinearClassifier weighted_ridge_minimizer(const Matrix& X, const Vector& y, const WeightVector& w);

/// Validation risk written as constant - 2 linear'h + h'gram h, so that a
/// whole lambda path can be scored without touching the samples again.
struct QuadraticRisk {
    double constant = 1.0;
    Vector linear;
    Matrix gram;

    double operator()(const LinearClassifier& h) const;

    /// Matches `mse`.
    static QuadraticRisk unweighted(const Matrix& X, const Vector& y);
    /// Matches `weighted_mse` in the given mode.
    static QuadraticRisk weighted(const Matrix& X, const Vector& y, const WeightVector& w, WeightedMseMode mode);
};

struct SvdSpectrum {
    /// Descending.
    std::vector<double> singular_values;
    /// alpha_i / alpha_i^2 = 1/alpha_i; nullopt marks a zero singular value.
    std::vector<std::optional<double>> inverse_spectrum;
};

SvdSpectrum svd_spectrum(const Matrix& X);

}  // namespace iwcv
