#include "iwcv/selection.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "iwcv/error.hpp"

namespace iwcv {

LambdaGrid::LambdaGrid(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ArgumentError("lambda grid is empty");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) throw ArgumentError("lambda grid contains a non-finite value");
        if (i > 0 && !(values_[i] > values_[i - 1])) throw ArgumentError("lambda grid is not strictly ascending");
    }
}

LambdaGrid LambdaGrid::linear(double min, double max, double step) {
    if (!(step > 0.0)) throw ArgumentError("lambda grid step must be positive");
    if (!(min < max)) throw ArgumentError("lambda grid needs min < max");
    std::vector<double> values;
    const double slack = 1e-9 * step;
    for (std::size_t k = 0;; ++k) {
        const double v = min + static_cast<double>(k) * step;
        if (v > max + slack) break;
        values.push_back(std::min(v, max));
    }
    return LambdaGrid(std::move(values));
}

LambdaGrid LambdaGrid::exponential_example() { return LambdaGrid({0.0, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0}); }

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SelectionResult finish(const LambdaGrid& grid, std::vector<double> curve) {
    SelectionResult out{grid, std::move(curve)};
    bool found = false;
    double best = kInf;
    for (std::size_t i = 0; i < out.risk_curve.size(); ++i) {
        const double r = out.risk_curve[i];
        if (!std::isfinite(r)) {
            ++out.infeasible_count;
            continue;
        }
        if (!found || r < best) {
            best = r;
            out.lambda_index = i;
            found = true;
        }
    }
    if (!found) throw SelectionError("every lambda on the grid is infeasible");
    out.lambda_hat = grid.values()[out.lambda_index];
    out.boundary = out.lambda_index == 0 || out.lambda_index + 1 == grid.size();
    return out;
}

Matrix rows_of(const Matrix& X, const std::vector<std::size_t>& idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), X.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(idx[r]));
    }
    return out;
}

Vector entries_of(const Vector& v, const std::vector<std::size_t>& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) out[static_cast<Eigen::Index>(r)] = v[static_cast<Eigen::Index>(idx[r])];
    return out;
}

}  // namespace

SelectionResult cv_select(const LabeledDataset& source, const LambdaGrid& grid, const SplitPlan& plan,
                          const std::optional<WeightVector>& weights, WeightedMseMode mode) {
    if (weights && weights->size() != source.size()) {
        throw ArgumentError("weights have length " + std::to_string(weights->size()) + " but source has " +
                            std::to_string(source.size()) + " samples");
    }
    if (plan.train_indices.size() != plan.validation_indices.size() || plan.train_indices.empty()) {
        throw ArgumentError("split plan has no folds");
    }
    std::vector<double> curve(grid.size(), 0.0);
    const auto folds = plan.train_indices.size();
    for (std::size_t k = 0; k < folds; ++k) {
        const auto& train = plan.train_indices[k];
        const auto& valid = plan.validation_indices[k];
        if (train.empty() || valid.empty()) throw ArgumentError("split plan has an empty fold");
        const RidgePath path(rows_of(source.features(), train), entries_of(source.labels(), train));
        const Matrix xv = rows_of(source.features(), valid);
        const Vector yv = entries_of(source.labels(), valid);
        const QuadraticRisk risk = weights ? QuadraticRisk::weighted(xv, yv, weights->subset(valid), mode)
                                           : QuadraticRisk::unweighted(xv, yv);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (!std::isfinite(curve[i])) continue;
            const auto h = path.solve(grid.values()[i]);
            curve[i] = h ? curve[i] + risk(*h) : kInf;
        }
    }
    for (double& r : curve) {
        if (std::isfinite(r)) r /= static_cast<double>(folds);
    }
    return finish(grid, std::move(curve));
}

SelectionResult target_select(const LabeledDataset& source, const LabeledDataset& target_labeled,
                              const LambdaGrid& grid) {
    if (source.dim() != target_labeled.dim()) throw ArgumentError("source and target differ in dimension");
    const RidgePath path(source.features(), source.labels());
    const QuadraticRisk risk = QuadraticRisk::unweighted(target_labeled.features(), target_labeled.labels());
    std::vector<double> curve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto h = path.solve(grid.values()[i]);
        curve[i] = h ? risk(*h) : kInf;
    }
    return finish(grid, std::move(curve));
}

}  // namespace iwcv
