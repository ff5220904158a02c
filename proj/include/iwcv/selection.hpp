#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "iwcv/dataset.hpp"
#include "iwcv/ridge.hpp"
#include "iwcv/weights.hpp"

namespace iwcv {

/// Strictly ascending, nonempty set of regularization values.
class LambdaGrid {
public:
    /// Throws ArgumentError unless values are strictly ascending and nonempty.
    explicit LambdaGrid(std::vector<double> values);

    /// min, min + step, ... up to max (inclusive within rounding).
    static LambdaGrid linear(double min, double max, double step);
    /// {0, 0.01, 0.1, 1, 10, 100, 1000}.
    static LambdaGrid exponential_example();

    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double front() const noexcept { return values_.front(); }
    double back() const noexcept { return values_.back(); }

private:
    std::vector<double> values_;
};

struct SelectionResult {
    LambdaGrid grid;
    /// Mean validation risk per lambda; +inf where the fit was infeasible.
    std::vector<double> risk_curve;
    double lambda_hat = 0.0;
    std::size_t lambda_index = 0;
    std::size_t infeasible_count = 0;
    /// lambda_hat sits on the first or last grid value.
    bool boundary = false;
};

/// Ridge fits on every training part, risk on the matching validation part,
/// averaged over folds. With weights the validation risk is `weighted_mse`
/// restricted to the fold. Ties go to the smallest lambda; a lambda infeasible
/// on any fold scores +inf. Throws SelectionError when nothing is feasible.
SelectionResult cv_select(const LabeledDataset& source, const LambdaGrid& grid, const SplitPlan& plan,
                          const std::optional<WeightVector>& weights = std::nullopt,
                          WeightedMseMode mode = WeightedMseMode::as_printed);

/// Oracle selection: fit on all source data, score `mse` on the labeled target.
SelectionResult target_select(const LabeledDataset& source, const LabeledDataset& target_labeled,
                              const LambdaGrid& grid);

}  // namespace iwcv
