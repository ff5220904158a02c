#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "iwcv/random.hpp"

namespace iwcv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MissingMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Feature rows with +-1 labels. Raw missing cells are stored as NaN and
/// flagged in the mask until `preprocess` imputes them.
class LabeledDataset {
public:
    LabeledDataset() = default;

    /// Throws ArgumentError when labels are not +-1 or shapes disagree.
    /// Empty feature names are replaced by "x0", "x1", ...
    LabeledDataset(Matrix features, Vector labels, std::vector<std::string> feature_names = {},
                   MissingMask missing_mask = {});

    const Matrix& features() const noexcept { return features_; }
    const Vector& labels() const noexcept { return labels_; }
    const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
    const MissingMask& missing_mask() const noexcept { return missing_mask_; }

    std::size_t size() const noexcept { return static_cast<std::size_t>(features_.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(features_.cols()); }
    bool has_missing() const noexcept { return missing_mask_.any(); }

    /// Rows picked by `indices`, in that order.
    LabeledDataset subset(const std::vector<std::size_t>& indices) const;

private:
    Matrix features_;
    Vector labels_;
    std::vector<std::string> feature_names_;
    MissingMask missing_mask_;
};

/// One train/validation partition per fold.
struct SplitPlan {
    std::vector<std::vector<std::size_t>> train_indices;
    std::vector<std::vector<std::size_t>> validation_indices;
    std::size_t fold_count = 0;
};

struct RemovedFeature {
    std::string name;
    double missing_fraction = 0.0;
};

struct PreprocessReport {
    std::vector<RemovedFeature> removed_features;
    /// Statistics of the retained features, over their non-missing entries.
    std::vector<double> per_feature_mean;
    std::vector<double> per_feature_std;
    /// Names of retained features whose spread was zero (standardized with divisor 1).
    std::vector<std::string> zero_variance_features;
};

/// Column names of the 13 attributes in the UCI "processed" heart-disease files.
const std::vector<std::string>& uci_heart_feature_names();

/// Parses a UCI processed heart-disease stream: 13 attributes and a diagnosis
/// per line, "?" for missing. Diagnosis > 0 maps to +1, 0 to -1.
LabeledDataset parse_uci_heart(std::istream& in, const std::string& domain_name);

/// File variant of `parse_uci_heart`; throws IoError when unreadable.
LabeledDataset load_uci_heart(const std::filesystem::path& path, const std::string& domain_name);

/// Fraction of missing cells per feature.
std::vector<double> missing_fractions(const LabeledDataset& data);

/// Drops features whose missing fraction exceeds `missing_removal_threshold`,
/// z-scores the rest (population std over non-missing entries, divisor 1 for
/// zero spread) and sets missing cells to 0.
std::pair<LabeledDataset, PreprocessReport> preprocess(const LabeledDataset& data,
                                                       double missing_removal_threshold);

/// As `preprocess`, additionally dropping every feature named in `forced_removals`.
/// Used to keep two domains on the same feature set.
std::pair<LabeledDataset, PreprocessReport> preprocess(const LabeledDataset& data,
                                                       double missing_removal_threshold,
                                                       const std::vector<std::string>& forced_removals);

/// Random near-equal partition of {0..n-1} into `fold_count` validation folds.
SplitPlan make_split_plan(std::size_t n, std::size_t fold_count, Rng& rng);

}  // namespace iwcv
