#include "iwcv/qp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iwcv/error.hpp"

namespace iwcv {

namespace {

double clipped_sum(const Vector& v, double shift, double upper) {
    return (v.array() - shift).max(0.0).min(upper).sum();
}

void check_constraints(const BoxSumConstraints& c, Eigen::Index n) {
    if (!(c.upper > 0.0) || !std::isfinite(c.upper)) throw ArgumentError("box upper bound must be positive");
    if (!(c.slack >= 0.0)) throw ArgumentError("sum slack must be nonnegative");
    if (c.sum_low() > c.upper * static_cast<double>(n) || c.sum_high() < 0.0) {
        throw ArgumentError("box and sum band do not intersect: [" + std::to_string(c.sum_low()) + ", " +
                            std::to_string(c.sum_high()) + "] vs box total " +
                            std::to_string(c.upper * static_cast<double>(n)));
    }
}

}  // namespace

Vector project_box_sum(const Vector& v, const BoxSumConstraints& c) {
    const Eigen::Index n = v.size();
    check_constraints(c, n);
    Vector w = v.cwiseMax(0.0).cwiseMin(c.upper);
    const double s = w.sum();
    const double lo = std::max(c.sum_low(), 0.0);
    const double hi = std::min(c.sum_high(), c.upper * static_cast<double>(n));
    if (s >= lo && s <= hi) return w;

    // Aim slightly inside the band so rounding in the final sum cannot leave it.
    const double margin = std::min(0.25 * (hi - lo), 1e-10 * std::max(1.0, std::abs(c.sum_target)));
    const double target = s < lo ? lo + margin : hi - margin;

    // sum(clip(v - tau)) is nonincreasing in tau: bracket then bisect.
    double tau_lo = v.minCoeff() - c.upper;  // sum = n * upper
    double tau_hi = v.maxCoeff();            // sum = 0
    for (int it = 0; it < 200 && tau_hi - tau_lo > 0.0; ++it) {
        const double mid = 0.5 * (tau_lo + tau_hi);
        if (mid <= tau_lo || mid >= tau_hi) break;
        (clipped_sum(v, mid, c.upper) > target ? tau_lo : tau_hi) = mid;
    }
    double tau = 0.5 * (tau_lo + tau_hi);

    // The sum is affine on the bracket's active set; solve that piece exactly.
    double free_sum = 0.0;
    Eigen::Index free_count = 0, upper_count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = v[i] - tau;
        if (t >= c.upper) {
            ++upper_count;
        } else if (t > 0.0) {
            free_sum += v[i];
            ++free_count;
        }
    }
    if (free_count > 0) {
        const double exact =
            (free_sum + c.upper * static_cast<double>(upper_count) - target) / static_cast<double>(free_count);
        const double check = clipped_sum(v, exact, c.upper);
        if (std::abs(check - target) <= std::abs(clipped_sum(v, tau, c.upper) - target)) tau = exact;
    }
    w = (v.array() - tau).max(0.0).min(c.upper);

    // Final guard against rounding: nudge free coordinates toward the band.
    const double total = w.sum();
    if (total < c.sum_low() || total > c.sum_high()) {
        const double gap = (total < c.sum_low() ? c.sum_low() : c.sum_high()) - total;
        for (Eigen::Index i = 0; i < n && gap != 0.0; ++i) {
            const double moved = std::clamp(w[i] + gap, 0.0, c.upper);
            if (moved != w[i]) {
                w[i] = moved;
                break;
            }
        }
    }
    return w;
}

double largest_eigenvalue(const Matrix& H, std::size_t max_iterations, double tolerance) {
    const Eigen::Index n = H.rows();
    if (n == 0) return 0.0;
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i % 7);
    v.normalize();
    double estimate = 0.0;
    for (std::size_t it = 0; it < max_iterations; ++it) {
        Vector hv = H * v;
        const double norm = hv.norm();
        if (norm == 0.0) return 0.0;
        const double next = v.dot(hv);
        v = hv / norm;
        if (std::abs(next - estimate) <= tolerance * std::abs(next)) return next;
        estimate = next;
    }
    return estimate;
}

QpResult solve_box_sum_qp(const Matrix& H, const Vector& f, const BoxSumConstraints& constraints,
                          const QpOptions& options) {
    const Eigen::Index n = f.size();
    if (H.rows() != n || H.cols() != n) throw ArgumentError("H must be square and match f");
    check_constraints(constraints, n);

    // Slight overestimate keeps the step stable when power iteration stops early.
    const double lipschitz = std::max(1.01 * largest_eigenvalue(H), 1e-12);
    const double step = 1.0 / lipschitz;
    const double scale = std::max(1.0, f.cwiseAbs().maxCoeff());

    auto objective = [&](const Vector& w) { return 0.5 * w.dot(H * w) - f.dot(w); };
    auto residual = [&](const Vector& w) {
        const Vector grad = H * w - f;
        return lipschitz * (w - project_box_sum(w - step * grad, constraints)).cwiseAbs().maxCoeff();
    };

    QpResult result;
    Vector w = project_box_sum(Vector::Ones(n), constraints);
    Vector y = w;
    double momentum = 1.0;
    double value = objective(w);
    double res = residual(w);
    std::size_t it = 0;
    bool from_w = true;
    while (res > options.tolerance * scale && it < options.max_iterations) {
        ++it;
        const Vector next = project_box_sum(y - step * (H * y - f), constraints);
        const double next_value = objective(next);
        if (next_value > value && !from_w) {
            // restart the momentum; plain projected step from w
            momentum = 1.0;
            y = w;
            from_w = true;
            continue;
        }
        from_w = false;
        const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        y = next + ((momentum - 1.0) / next_momentum) * (next - w);
        w = next;
        value = next_value;
        momentum = next_momentum;
        if (it % 10 == 0) res = residual(w);
    }
    res = residual(w);
    result.solution = w;
    result.iterations = it;
    result.projected_gradient_norm = res;
    result.objective = value;
    if (res > options.tolerance * scale) {
        throw EstimationError("box-sum QP did not reach tolerance in " + std::to_string(it) +
                                  " iterations (projected gradient " + std::to_string(res) + ")",
                              res);
    }
    return result;
}

}  // namespace iwcv
