#pragma once

#include <cstddef>

#include "iwcv/dataset.hpp"

namespace iwcv {

/// Feasible set {w : 0 <= w_i <= upper, |sum(w) - sum_target| <= slack}.
struct BoxSumConstraints {
    double upper = 1.0;
    double sum_target = 0.0;
    double slack = 0.0;

    double sum_low() const noexcept { return sum_target - slack; }
    double sum_high() const noexcept { return sum_target + slack; }
};

struct QpOptions {
    /// Stop once the scaled projected-gradient norm drops below this.
    double tolerance = 1e-6;
    std::size_t max_iterations = 100000;
};

struct QpResult {
    Vector solution;
    std::size_t iterations = 0;
    /// Infinity norm of (w - P(w - grad/L)) * L at the returned point.
    double projected_gradient_norm = 0.0;
    double objective = 0.0;
};

/// Euclidean projection of `v` onto the box-and-sum-band set. The returned
/// point satisfies the box and band constraints exactly in floating point.
/// Throws ArgumentError when the set is empty.
Vector project_box_sum(const Vector& v, const BoxSumConstraints& c);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double largest_eigenvalue(const Matrix& H, std::size_t max_iterations = 500, double tolerance = 1e-10);

/// Minimizes 0.5 w'Hw - f'w over the box-and-sum-band set by accelerated
/// projected gradient with step 1/L (L = largest eigenvalue of H).
/// Throws ArgumentError for an empty feasible set and EstimationError (with
/// the final residual) when the tolerance is not met in time.
QpResult solve_box_sum_qp(const Matrix& H, const Vector& f, const BoxSumConstraints& constraints,
                          const QpOptions& options = {});

}  // namespace iwcv
