#include "iwcv/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>

#include "iwcv/error.hpp"

namespace iwcv {

LabeledDataset::LabeledDataset(Matrix features, Vector labels, std::vector<std::string> feature_names,
                               MissingMask missing_mask)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      feature_names_(std::move(feature_names)),
      missing_mask_(std::move(missing_mask)) {
    if (labels_.size() != features_.rows()) {
        throw ArgumentError("label count " + std::to_string(labels_.size()) + " does not match row count " +
                            std::to_string(features_.rows()));
    }
    for (Eigen::Index i = 0; i < labels_.size(); ++i) {
        if (labels_[i] != 1.0 && labels_[i] != -1.0) {
            throw ArgumentError("label at row " + std::to_string(i) + " is not -1 or +1");
        }
    }
    if (feature_names_.empty()) {
        for (Eigen::Index j = 0; j < features_.cols(); ++j) {
            feature_names_.push_back("x" + std::to_string(j));
        }
    } else if (feature_names_.size() != static_cast<std::size_t>(features_.cols())) {
        throw ArgumentError("feature name count does not match column count");
    }
    if (missing_mask_.size() == 0) {
        missing_mask_ = MissingMask::Constant(features_.rows(), features_.cols(), false);
    } else if (missing_mask_.rows() != features_.rows() || missing_mask_.cols() != features_.cols()) {
        throw ArgumentError("missing mask dimensions do not match features");
    }
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& indices) const {
    Matrix x(static_cast<Eigen::Index>(indices.size()), features_.cols());
    Vector y(static_cast<Eigen::Index>(indices.size()));
    MissingMask mask(static_cast<Eigen::Index>(indices.size()), features_.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const auto src = static_cast<Eigen::Index>(indices[r]);
        if (indices[r] >= size()) {
            throw ArgumentError("subset index " + std::to_string(indices[r]) + " out of range");
        }
        const auto dst = static_cast<Eigen::Index>(r);
        x.row(dst) = features_.row(src);
        y[dst] = labels_[src];
        mask.row(dst) = missing_mask_.row(src);
    }
    return LabeledDataset(std::move(x), std::move(y), feature_names_, std::move(mask));
}

const std::vector<std::string>& uci_heart_feature_names() {
    static const std::vector<std::string> names = {
        "age", "sex", "cp", "trestbps", "chol", "fbs", "restecg",
        "thalach", "exang", "oldpeak", "slope", "ca", "thal"};
    return names;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Accepts forms like "2.3", ".7", "-1", "6.0".
bool parse_number(std::string_view cell, double& out) {
    if (cell.empty()) return false;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

LabeledDataset parse_uci_heart(std::istream& in, const std::string& domain_name) {
    constexpr std::size_t kColumns = 14;
    const auto& names = uci_heart_feature_names();

    std::vector<std::array<double, kColumns - 1>> rows;
    std::vector<std::array<bool, kColumns - 1>> missing;
    std::vector<double> labels;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (view.empty()) continue;

        std::vector<std::string_view> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = view.find(',', start);
            cells.push_back(trim(view.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                     : comma - start)));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (cells.size() != kColumns) {
            throw ParseError(domain_name + ": expected " + std::to_string(kColumns) + " columns, found " +
                                 std::to_string(cells.size()),
                             line_no);
        }

        std::array<double, kColumns - 1> row{};
        std::array<bool, kColumns - 1> row_missing{};
        for (std::size_t j = 0; j + 1 < kColumns; ++j) {
            if (cells[j] == "?") {
                row[j] = std::numeric_limits<double>::quiet_NaN();
                row_missing[j] = true;
            } else if (!parse_number(cells[j], row[j])) {
                throw ParseError(domain_name + ": non-numeric value '" + std::string(cells[j]) +
                                     "' in column " + names[j],
                                 line_no);
            }
        }
        double diagnosis = 0.0;
        if (!parse_number(cells.back(), diagnosis) || diagnosis < 0.0) {
            throw ParseError(domain_name + ": invalid diagnosis '" + std::string(cells.back()) + "'", line_no);
        }
        rows.push_back(row);
        missing.push_back(row_missing);
        labels.push_back(diagnosis > 0.0 ? 1.0 : -1.0);
    }

    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto d = static_cast<Eigen::Index>(kColumns - 1);
    Matrix x(n, d);
    MissingMask mask(n, d);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            mask(i, j) = missing[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        y[i] = labels[static_cast<std::size_t>(i)];
    }
    return LabeledDataset(std::move(x), std::move(y), names, std::move(mask));
}

LabeledDataset load_uci_heart(const std::filesystem::path& path, const std::string& domain_name) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + domain_name + " data file '" + path.string() + "'");
    }
    return parse_uci_heart(in, domain_name);
}

std::vector<double> missing_fractions(const LabeledDataset& data) {
    std::vector<double> out(data.dim(), 0.0);
    if (data.size() == 0) return out;
    for (std::size_t j = 0; j < data.dim(); ++j) {
        const auto count = data.missing_mask().col(static_cast<Eigen::Index>(j)).count();
        out[j] = static_cast<double>(count) / static_cast<double>(data.size());
    }
    return out;
}

std::pair<LabeledDataset, PreprocessReport> preprocess(const LabeledDataset& data,
                                                       double missing_removal_threshold) {
    return preprocess(data, missing_removal_threshold, {});
}

std::pair<LabeledDataset, PreprocessReport> preprocess(const LabeledDataset& data,
                                                       double missing_removal_threshold,
                                                       const std::vector<std::string>& forced_removals) {
    if (data.size() < 2) {
        throw ArgumentError("preprocess needs at least 2 samples");
    }
    if (!(missing_removal_threshold >= 0.0 && missing_removal_threshold <= 1.0)) {
        throw ArgumentError("missing removal threshold must lie in [0, 1]");
    }

    PreprocessReport report;
    const auto fractions = missing_fractions(data);
    std::vector<Eigen::Index> kept;
    for (std::size_t j = 0; j < data.dim(); ++j) {
        const auto& name = data.feature_names()[j];
        const bool forced = std::find(forced_removals.begin(), forced_removals.end(), name) != forced_removals.end();
        if (forced || fractions[j] > missing_removal_threshold) {
            report.removed_features.push_back({name, fractions[j]});
        } else {
            kept.push_back(static_cast<Eigen::Index>(j));
        }
    }
    if (kept.empty()) {
        throw ConfigError("preprocessing removed every feature (threshold " +
                          std::to_string(missing_removal_threshold) + ")");
    }

    const Eigen::Index n = data.features().rows();
    const auto d = static_cast<Eigen::Index>(kept.size());
    Matrix x(n, d);
    MissingMask mask(n, d);
    std::vector<std::string> names;
    for (Eigen::Index c = 0; c < d; ++c) {
        const Eigen::Index j = kept[static_cast<std::size_t>(c)];
        names.push_back(data.feature_names()[static_cast<std::size_t>(j)]);
        mask.col(c) = data.missing_mask().col(j);

        double sum = 0.0;
        Eigen::Index count = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!mask(i, c)) {
                sum += data.features()(i, j);
                ++count;
            }
        }
        // A column with no observed entry has a missing fraction of 1 and is
        // only kept when the threshold is 1.0; it becomes all zeros.
        const double mean = count > 0 ? sum / static_cast<double>(count) : 0.0;
        double ss = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!mask(i, c)) {
                const double dev = data.features()(i, j) - mean;
                ss += dev * dev;
            }
        }
        const double sd = count > 0 ? std::sqrt(ss / static_cast<double>(count)) : 0.0;
        const double divisor = sd > 0.0 ? sd : 1.0;
        if (!(sd > 0.0)) report.zero_variance_features.push_back(names.back());
        report.per_feature_mean.push_back(mean);
        report.per_feature_std.push_back(sd);

        for (Eigen::Index i = 0; i < n; ++i) {
            x(i, c) = mask(i, c) ? 0.0 : (data.features()(i, j) - mean) / divisor;
        }
    }
    return {LabeledDataset(std::move(x), data.labels(), std::move(names), std::move(mask)), std::move(report)};
}

SplitPlan make_split_plan(std::size_t n, std::size_t fold_count, Rng& rng) {
    if (fold_count < 2 || fold_count > n) {
        throw ArgumentError("fold count " + std::to_string(fold_count) + " must lie in [2, " +
                            std::to_string(n) + "]");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    SplitPlan plan;
    plan.fold_count = fold_count;
    const std::size_t base = n / fold_count;
    const std::size_t extra = n % fold_count;
    std::vector<std::size_t> fold_of(n);
    std::size_t pos = 0;
    for (std::size_t k = 0; k < fold_count; ++k) {
        const std::size_t len = base + (k < extra ? 1 : 0);
        for (std::size_t t = 0; t < len; ++t) fold_of[order[pos++]] = k;
    }
    plan.train_indices.resize(fold_count);
    plan.validation_indices.resize(fold_count);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < fold_count; ++k) {
            (fold_of[i] == k ? plan.validation_indices[k] : plan.train_indices[k]).push_back(i);
        }
    }
    return plan;
}

}  // namespace iwcv
