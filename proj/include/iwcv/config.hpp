#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "iwcv/ridge.hpp"
#include "iwcv/shift.hpp"

namespace iwcv {

enum class Estimator { rg, kliep, kmm, nn };

const char* estimator_name(Estimator e) noexcept;
/// Accepts "rg", "kliep", "kmm", "nn" (case-insensitive). Throws ConfigError.
Estimator parse_estimator(const std::string& name);

/// Every experimental constant. Defaults reproduce the artificial table; the
/// heart run overrides `repeats` with `heart_repeats`.
struct ExperimentConfig {
    std::uint64_t seed = 20160101;
    std::size_t repeats = 100;
    std::size_t heart_repeats = 10;
    std::size_t source_samples = 100;
    std::size_t target_samples = 100;
    /// When set, the source draws exactly this many samples per class.
    std::optional<std::size_t> samples_per_class;
    std::vector<double> target_variances{0.1, 0.5, 1.0, 2.0, 3.0, 4.0};
    /// Variances drawn by the `curves` command.
    std::vector<double> curve_variances{0.5, 1.0, 2.0, 3.0, 4.0};
    TargetLabeling target_labeling = TargetLabeling::component;

    double grid_min = -100.0;
    double grid_max = 500.0;
    double grid_step = 1.0;
    std::size_t fold_count = 5;
    WeightedMseMode weighted_mse_mode = WeightedMseMode::as_printed;
    bool append_intercept = false;

    std::vector<Estimator> estimators{Estimator::rg, Estimator::kliep, Estimator::kmm, Estimator::nn};
    double rg_variance_floor = 0.0;
    double heart_rg_variance_floor = 1e-6;
    double kmm_upper_bound = 1000.0;
    std::optional<double> kmm_sum_slack;
    double kmm_tolerance = 1e-6;
    std::size_t kmm_max_iterations = 100000;
    std::vector<double> kliep_width_multipliers{0.1, 0.2, 0.5, 1.0, 2.0, 5.0};
    std::size_t kliep_folds = 3;
    std::size_t kliep_max_iterations = 2000;
    double kliep_tolerance = 1e-9;

    double missing_removal_threshold = 0.99;
    std::filesystem::path data_dir = "data";
    std::filesystem::path out_dir = "results";
    /// Any of "csv", "markdown".
    std::vector<std::string> formats{"csv", "markdown"};
    std::size_t jobs = 1;
    /// Largest tolerated fraction of failed (repeat, method) records.
    double max_failure_fraction = 0.05;

    /// Sets one key from its text form. Throws ConfigError on unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    /// Text form of one key. Throws ConfigError on unknown keys.
    std::string get(const std::string& key) const;
    /// Every key in a fixed order.
    static const std::vector<std::string>& keys();

    /// Parses key=value lines; '#' starts a comment.
    void load(std::istream& in);
    void load_file(const std::filesystem::path& path);

    /// Checks cross-field invariants. Throws ConfigError.
    void validate() const;

    /// "key=value" lines in `keys()` order. Output paths and `jobs` are left
    /// out: they do not change results.
    std::string canonical() const;
    /// FNV-1a 64 of `canonical()`, as 16 hex digits.
    std::string hash() const;
};

}  // namespace iwcv
