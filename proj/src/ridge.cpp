#include "iwcv/ridge.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iwcv/error.hpp"
#include "iwcv/weights.hpp"

namespace iwcv {

namespace {

void check_shapes(const Matrix& X, const Vector& y) {
    if (X.rows() != y.size()) {
        throw ArgumentError("X has " + std::to_string(X.rows()) + " rows but y has " + std::to_string(y.size()) +
                            " entries");
    }
}

void check_weights(const Matrix& X, const WeightVector& w) {
    if (static_cast<Eigen::Index>(w.size()) != X.rows()) {
        throw ArgumentError("weight vector length " + std::to_string(w.size()) + " does not match " +
                            std::to_string(X.rows()) + " samples");
    }
}

}  // namespace

LinearClassifier fit_ridge(const Matrix& X, const Vector& y, double lambda) {
    check_shapes(X, y);
    if (X.rows() < 1) throw ArgumentError("fit_ridge needs at least one sample");
    if (!std::isfinite(lambda)) throw ArgumentError("lambda must be finite");

    Matrix gram = X.transpose() * X;
    gram.diagonal().array() += lambda;
    const Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success || !(llt.rcond() >= kSingularRcond)) {
        throw SingularSystemError("X'X + lambda I is singular or indefinite at lambda = " + std::to_string(lambda),
                                  lambda);
    }
    return {llt.solve(X.transpose() * y)};
}

RidgePath::RidgePath(const Matrix& X, const Vector& y) {
    check_shapes(X, y);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(X.transpose() * X);
    eigenvalues_ = eig.eigenvalues();
    eigenvectors_ = eig.eigenvectors();
    projected_rhs_ = eigenvectors_.transpose() * (X.transpose() * y);
}

std::optional<LinearClassifier> RidgePath::solve(double lambda) const {
    const Vector shifted = eigenvalues_.array() + lambda;
    const double lo = shifted.minCoeff();
    const double hi = shifted.maxCoeff();
    if (!(lo > 0.0) || lo < kSingularRcond * hi) return std::nullopt;
    return LinearClassifier{eigenvectors_ * projected_rhs_.cwiseQuotient(shifted)};
}

double mse(const LinearClassifier& h, const Matrix& X, const Vector& y) {
    check_shapes(X, y);
    const double n = static_cast<double>(X.rows());
    const Vector xh = X * h.weights;
    return 1.0 - 2.0 / n * y.dot(xh) + xh.squaredNorm() / n;
}

double mse_residual(const LinearClassifier& h, const Matrix& X, const Vector& y) {
    check_shapes(X, y);
    return (X * h.weights - y).squaredNorm() / static_cast<double>(X.rows());
}

double weighted_mse(const LinearClassifier& h, const Matrix& X, const Vector& y, const WeightVector& w,
                    WeightedMseMode mode) {
    check_shapes(X, y);
    check_weights(X, w);
    const double n = static_cast<double>(X.rows());
    const Vector xh = X * h.weights;
    const auto& wv = w.values();
    if (mode == WeightedMseMode::fully_weighted) {
        return (wv.array() * (xh - y).array().square()).sum() / n;
    }
    return 1.0 - 2.0 / n * (y.array() * wv.array() * xh.array()).sum() +
           (wv.array() * xh.array().square()).sum() / n;
}

LinearClassifier weighted_ridge_minimizer(const Matrix& X, const Vector& y, const WeightVector& w) {
    check_shapes(X, y);
    check_weights(X, w);
    const Matrix xw = w.values().asDiagonal() * X;
    const Matrix gram = X.transpose() * xw;
    const Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success || !(llt.rcond() >= kSingularRcond)) {
        throw SingularSystemError("weighted Gram matrix X'WX is singular", 0.0);
    }
    return {llt.solve(xw.transpose() * y)};
}

double QuadraticRisk::operator()(const LinearClassifier& h) const {
    return constant - 2.0 * linear.dot(h.weights) + h.weights.dot(gram * h.weights);
}

QuadraticRisk QuadraticRisk::unweighted(const Matrix& X, const Vector& y) {
    check_shapes(X, y);
    const double n = static_cast<double>(X.rows());
    return {1.0, X.transpose() * y / n, X.transpose() * X / n};
}

QuadraticRisk QuadraticRisk::weighted(const Matrix& X, const Vector& y, const WeightVector& w,
                                      WeightedMseMode mode) {
    check_shapes(X, y);
    check_weights(X, w);
    const double n = static_cast<double>(X.rows());
    const Matrix xw = w.values().asDiagonal() * X;
    // y_i^2 = 1, so y'Wy = sum(w)
    const double constant = mode == WeightedMseMode::fully_weighted ? w.sum() / n : 1.0;
    return {constant, xw.transpose() * y / n, X.transpose() * xw / n};
}

SvdSpectrum svd_spectrum(const Matrix& X) {
    if (X.rows() < 1) throw ArgumentError("svd_spectrum needs at least one row");
    const Eigen::JacobiSVD<Matrix> svd(X);
    SvdSpectrum out;
    const Vector& s = svd.singularValues();  // already descending
    const double cutoff = s.size() ? s[0] * static_cast<double>(std::max(X.rows(), X.cols())) *
                                         std::numeric_limits<double>::epsilon()
                                   : 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        out.singular_values.push_back(s[i]);
        if (s[i] > cutoff && s[i] > 0.0) {
            out.inverse_spectrum.emplace_back(s[i] / (s[i] * s[i]));
        } else {
            out.inverse_spectrum.emplace_back(std::nullopt);
        }
    }
    return out;
}

}  // namespace iwcv
