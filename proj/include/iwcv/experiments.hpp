#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "iwcv/config.hpp"
#include "iwcv/dataset.hpp"
#include "iwcv/report.hpp"
#include "iwcv/selection.hpp"
#include "iwcv/shift.hpp"

namespace iwcv {

/// Row labels of the artificial table, in output order.
inline constexpr const char* kRowLambdaV = "lambda_V";
inline constexpr const char* kRowTrueRatio = "pZ/pX";
inline constexpr const char* kRowLambdaZ = "lambda_Z";

/// Display label of an estimator row or column ("rG", "KLIEP", "KMM", "NN").
const char* estimator_label(Estimator e) noexcept;

/// Runs fn(0..count-1) on up to `jobs` threads. Results must be written to
/// per-index slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

LambdaGrid make_grid(const ExperimentConfig& cfg);

/// Artificial covariate-shift experiment: one column per target variance,
/// rows lambda_V, one per estimator, pZ/pX and lambda_Z.
ResultTable run_artificial(const ExperimentConfig& cfg);

struct Hospital {
    char letter;
    const char* name;
    const char* file;
};

/// Cleveland, Virginia, Hungary, Switzerland.
const std::array<Hospital, 4>& hospitals();

/// (source, target) hospital indices in table order.
const std::vector<std::pair<std::size_t, std::size_t>>& heart_pairs();

/// Loads the four hospital files from `data_dir`. Throws IoError naming the
/// missing hospital.
std::array<LabeledDataset, 4> load_hospitals(const std::filesystem::path& data_dir);

/// Heart-disease experiment over all 12 ordered hospital pairs; rows are pairs,
/// columns lambda_V, one per estimator, lambda_Z. Uses `cfg.heart_repeats`.
ResultTable run_heart(const ExperimentConfig& cfg, const std::array<LabeledDataset, 4>& raw_hospitals);
ResultTable run_heart(const ExperimentConfig& cfg, const std::filesystem::path& data_dir);

/// Population target-MSE curves over the lambda grid for the variance-shift
/// family: the fit uses source size n and the source second moments.
struct MseCurves {
    LambdaGrid grid;
    std::vector<double> variances;
    /// mse[v][i]: target MSE at variance v and grid point i (+inf if infeasible).
    std::vector<std::vector<double>> mse;
    std::vector<double> argmin;
};

/// Population target MSE of the ridge fit for one problem, per grid value.
std::vector<double> population_target_mse(const ShiftProblem& problem, const LambdaGrid& grid, std::size_t n,
                                          TargetLabeling labeling);

/// Same for the source-validation risk (target replaced by the source).
std::vector<double> population_source_mse(const ShiftProblem& problem, const LambdaGrid& grid, std::size_t n);

MseCurves compute_mse_curves(const ExperimentConfig& cfg);

/// Tab-delimited: header, one row per grid value, final "argmin" row.
std::string format_mse_curves(const MseCurves& curves);

void emit_mse_curves(const ExperimentConfig& cfg, const std::filesystem::path& path);

}  // namespace iwcv
