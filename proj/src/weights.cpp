#include "iwcv/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "iwcv/error.hpp"
#include "iwcv/random.hpp"

namespace iwcv {

WeightVector::WeightVector(Vector values) : values_(std::move(values)) {
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
            throw ArgumentError("importance weight " + std::to_string(i) + " is negative or not finite");
        }
    }
}

WeightVector WeightVector::subset(const std::vector<std::size_t>& indices) const {
    Vector out(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t r = 0; r < indices.size(); ++r) {
        if (indices[r] >= size()) throw ArgumentError("weight subset index out of range");
        out[static_cast<Eigen::Index>(r)] = values_[static_cast<Eigen::Index>(indices[r])];
    }
    return WeightVector(std::move(out));
}

double gaussian_kernel(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b, double sigma) {
    if (!(sigma > 0.0)) throw ArgumentError("kernel bandwidth must be positive");
    return std::exp(-(a - b).squaredNorm() / (2.0 * sigma * sigma));
}

Matrix gaussian_gram(const Matrix& rows_a, const Matrix& rows_b, double sigma) {
    if (!(sigma > 0.0)) throw ArgumentError("kernel bandwidth must be positive");
    if (rows_a.cols() != rows_b.cols()) throw ArgumentError("kernel inputs differ in dimension");
    const Vector na = rows_a.rowwise().squaredNorm();
    const Vector nb = rows_b.rowwise().squaredNorm();
    Matrix d2 = -2.0 * rows_a * rows_b.transpose();
    d2.colwise() += na;
    d2.rowwise() += nb.transpose();
    const double scale = -1.0 / (2.0 * sigma * sigma);
    return (d2.array().max(0.0) * scale).exp().matrix();
}

double silverman_bandwidth(const Matrix& X) {
    const Eigen::Index n = X.rows();
    if (n < 2) throw ArgumentError("Silverman's rule needs at least 2 samples");
    const double factor = 1.06 * std::pow(static_cast<double>(n), -0.2);
    double total = 0.0;
    int used = 0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double mean = X.col(j).mean();
        const double var = (X.col(j).array() - mean).square().sum() / static_cast<double>(n - 1);
        const double sd = std::sqrt(var);
        if (sd > 0.0) {
            total += factor * sd;
            ++used;
        }
    }
    if (used == 0) throw DegenerateDataError("Silverman's rule: data has zero spread");
    return total / used;
}

Matrix pool_rows(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw ArgumentError("cannot pool samples of different dimension");
    Matrix out(a.rows() + b.rows(), a.cols());
    out << a, b;
    return out;
}

// ---------------------------------------------------------------------------
// Ratio of Gaussians

namespace {

struct FittedGaussian {
    Vector mean;
    Eigen::LLT<Matrix> chol;
    double log_norm = 0.0;  // -0.5 log det(2 pi Sigma)

    double log_pdf(const Eigen::Ref<const Vector>& x) const {
        return log_norm - 0.5 * chol.matrixL().solve(x - mean).squaredNorm();
    }
};

FittedGaussian fit_gaussian(const Matrix& X, double floor, const char* which) {
    if (X.rows() < 2) throw ArgumentError(std::string("rG: ") + which + " needs at least 2 samples");
    FittedGaussian g;
    g.mean = X.colwise().mean().transpose();
    const Matrix centered = X.rowwise() - g.mean.transpose();
    Matrix cov = centered.transpose() * centered / static_cast<double>(X.rows());
    cov.diagonal().array() += floor;
    g.chol.compute(cov);
    if (g.chol.info() != Eigen::Success || !(g.chol.rcond() >= 1e-12)) {
        throw DegenerateDataError(std::string("rG: fitted ") + which + " covariance is singular");
    }
    const double log_det = 2.0 * g.chol.matrixLLT().diagonal().array().log().sum();
    g.log_norm = -0.5 * (log_det + static_cast<double>(X.cols()) * std::log(2.0 * std::numbers::pi));
    return g;
}

}  // namespace

WeightVector estimate_rg(const Matrix& source, const Matrix& target, const RgConfig& cfg) {
    if (source.cols() != target.cols()) throw ArgumentError("rG: source and target differ in dimension");
    if (!(cfg.variance_floor >= 0.0)) throw ArgumentError("rG: variance floor must be nonnegative");
    const FittedGaussian src = fit_gaussian(source, cfg.variance_floor, "source");
    const FittedGaussian tgt = fit_gaussian(target, cfg.variance_floor, "target");
    Vector w(source.rows());
    for (Eigen::Index i = 0; i < source.rows(); ++i) {
        const Vector x = source.row(i).transpose();
        w[i] = std::exp(tgt.log_pdf(x) - src.log_pdf(x));
        if (!std::isfinite(w[i])) throw DegenerateDataError("rG: density ratio overflowed");
    }
    return WeightVector(std::move(w));
}

// ---------------------------------------------------------------------------
// KLIEP

namespace {

struct AscentResult {
    Vector alpha;
    std::vector<double> trace;
};

double mean_log(const Vector& v) {
    if ((v.array() <= 0.0).any()) return -std::numeric_limits<double>::infinity();
    return v.array().log().mean();
}

// Maximizes mean_j log (A alpha)_j subject to b'alpha = 1, alpha >= 0.
// Returns nullopt when the normalization cannot be met (b vanishes).
std::optional<AscentResult> kliep_ascent(const Matrix& A, const Vector& b, const KliepConfig& cfg) {
    const double bb = b.squaredNorm();
    if (!(b.sum() > std::numeric_limits<double>::min()) || !(bb > 0.0)) return std::nullopt;

    auto project = [&](Vector a) -> std::optional<Vector> {
        a += ((1.0 - b.dot(a)) / bb) * b;
        a = a.cwiseMax(0.0);
        const double norm = b.dot(a);
        if (!(norm > 0.0)) return std::nullopt;
        return Vector(a / norm);
    };

    AscentResult out;
    out.alpha = Vector::Constant(A.cols(), 1.0 / b.sum());
    double value = mean_log(A * out.alpha);
    if (!std::isfinite(value)) return std::nullopt;
    out.trace.push_back(value);

    double step = 0.0;
    for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
        const Vector fitted = A * out.alpha;
        const Vector grad = A.transpose() * fitted.cwiseInverse() / static_cast<double>(A.rows());
        if (step == 0.0) step = out.alpha.norm() / std::max(grad.norm(), 1e-300);

        bool accepted = false;
        for (int tries = 0; tries < 60; ++tries) {
            const auto trial = project(out.alpha + step * grad);
            if (trial) {
                const double trial_value = mean_log(A * *trial);
                if (trial_value > value) {
                    const double gain = trial_value - value;
                    out.alpha = *trial;
                    value = trial_value;
                    out.trace.push_back(value);
                    accepted = true;
                    step *= 2.0;
                    if (gain <= cfg.tolerance * std::max(1.0, std::abs(value))) return out;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    return out;
}

std::vector<double> kliep_widths(const Matrix& source, const Matrix& target, const KliepConfig& cfg) {
    if (!cfg.width_candidates.empty()) {
        for (double w : cfg.width_candidates) {
            if (!(w > 0.0)) throw ArgumentError("KLIEP width candidates must be positive");
        }
        return cfg.width_candidates;
    }
    if (cfg.width_multipliers.empty()) throw ArgumentError("KLIEP needs at least one width candidate");
    const double base = silverman_bandwidth(pool_rows(source, target));
    std::vector<double> out;
    for (double m : cfg.width_multipliers) {
        if (!(m > 0.0)) throw ArgumentError("KLIEP width multipliers must be positive");
        out.push_back(m * base);
    }
    return out;
}

Matrix rows_of(const Matrix& X, const std::vector<std::size_t>& idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), X.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(idx[r]));
    return out;
}

}  // namespace

KliepFit fit_kliep(const Matrix& source, const Matrix& target, const KliepConfig& cfg) {
    if (source.cols() != target.cols()) throw ArgumentError("KLIEP: source and target differ in dimension");
    if (cfg.cv_folds < 2) throw ArgumentError("KLIEP needs at least 2 cross-validation folds");
    const auto n = static_cast<std::size_t>(source.rows());
    const auto m = static_cast<std::size_t>(target.rows());
    if (n < cfg.cv_folds || m < cfg.cv_folds) {
        throw ArgumentError("KLIEP needs at least " + std::to_string(cfg.cv_folds) + " source and target samples");
    }

    KliepFit fit;
    fit.candidate_widths = kliep_widths(source, target, cfg);

    Rng rng(cfg.seed);
    const SplitPlan plan = make_split_plan(m, cfg.cv_folds, rng);
    const double neg_inf = -std::numeric_limits<double>::infinity();
    for (double width : fit.candidate_widths) {
        double score = 0.0;
        for (std::size_t k = 0; k < plan.fold_count && std::isfinite(score); ++k) {
            const Matrix centers = rows_of(target, plan.train_indices[k]);
            const Matrix held_out = rows_of(target, plan.validation_indices[k]);
            const Vector b = gaussian_gram(source, centers, width).colwise().mean().transpose();
            const auto ascent = kliep_ascent(gaussian_gram(centers, centers, width), b, cfg);
            if (!ascent) {
                score = neg_inf;
                break;
            }
            score += mean_log(gaussian_gram(held_out, centers, width) * ascent->alpha);
        }
        fit.cv_scores.push_back(std::isfinite(score) ? score / static_cast<double>(plan.fold_count) : neg_inf);
    }

    const auto best = std::max_element(fit.cv_scores.begin(), fit.cv_scores.end());
    if (!std::isfinite(*best)) {
        throw EstimationError("KLIEP: every candidate width gave -inf held-out likelihood");
    }
    fit.width = fit.candidate_widths[static_cast<std::size_t>(best - fit.cv_scores.begin())];

    const Matrix source_gram = gaussian_gram(source, target, fit.width);
    const Vector b = source_gram.colwise().mean().transpose();
    auto ascent = kliep_ascent(gaussian_gram(target, target, fit.width), b, cfg);
    if (!ascent) throw EstimationError("KLIEP: normalization cannot be met at the selected width");
    fit.objective_trace = std::move(ascent->trace);
    fit.weights = WeightVector(source_gram * ascent->alpha);
    return fit;
}

WeightVector estimate_kliep(const Matrix& source, const Matrix& target, const KliepConfig& cfg) {
    return fit_kliep(source, target, cfg).weights;
}

// ---------------------------------------------------------------------------
// KMM

WeightVector estimate_kmm(const Matrix& source, const Matrix& target, const KmmConfig& cfg) {
    if (source.cols() != target.cols()) throw ArgumentError("KMM: source and target differ in dimension");
    if (source.rows() < 1 || target.rows() < 1) throw ArgumentError("KMM needs n, m >= 1");
    if (!(cfg.upper_bound > 0.0)) throw ArgumentError("KMM upper bound must be positive");
    const double n = static_cast<double>(source.rows());
    const double m = static_cast<double>(target.rows());
    const double eps = cfg.sum_slack.value_or(cfg.upper_bound / std::sqrt(n));
    if (!(eps >= 0.0)) throw ArgumentError("KMM sum slack must be nonnegative");

    double sigma = 0.0;
    if (cfg.bandwidth) {
        sigma = *cfg.bandwidth;
    } else {
        sigma = silverman_bandwidth(pool_rows(source, target));
    }
    const Matrix k_ss = gaussian_gram(source, source, sigma);
    const Vector kappa = (n / m) * gaussian_gram(source, target, sigma).rowwise().sum();

    const BoxSumConstraints constraints{cfg.upper_bound, n, n * eps};
    const QpResult qp = solve_box_sum_qp(k_ss, kappa, constraints, {cfg.solver_tolerance, cfg.max_iterations});
    return WeightVector(qp.solution);
}

// ---------------------------------------------------------------------------
// Nearest neighbour

WeightVector estimate_nn(const Matrix& source, const Matrix& target) {
    if (source.rows() < 1) throw ArgumentError("NN estimator needs at least one source sample");
    if (target.rows() > 0 && source.cols() != target.cols()) {
        throw ArgumentError("NN: source and target differ in dimension");
    }
    Vector w = Vector::Ones(source.rows());
    for (Eigen::Index j = 0; j < target.rows(); ++j) {
        Eigen::Index best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < source.rows(); ++i) {
            const double d2 = (source.row(i) - target.row(j)).squaredNorm();
            if (d2 < best_d2) {
                best_d2 = d2;
                best = i;
            }
        }
        w[best] += 1.0;
    }
    return WeightVector(std::move(w));
}

}  // namespace iwcv
