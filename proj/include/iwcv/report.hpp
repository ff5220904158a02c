#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace iwcv {

inline constexpr const char* kVersion = "0.1.0";

/// Mean and standard error of lambda-hat over the successful repeats of one cell.
struct CellStats {
    double mean = 0.0;
    /// Sample standard deviation / sqrt(successes); 0 with fewer than two successes.
    double std_error = 0.0;
    std::size_t successes = 0;
    std::size_t failures = 0;
    /// Successful repeats whose lambda-hat sat on a grid endpoint.
    std::size_t boundary_hits = 0;

    bool boundary() const noexcept { return successes > 0 && boundary_hits == successes; }
};

CellStats aggregate(std::span<const double> lambda_hats, std::size_t failures, std::size_t boundary_hits);

/// Outcome of one method on one repeat.
struct RepeatRecord {
    std::string row;
    std::string column;
    std::size_t repeat = 0;
    bool ok = false;
    double lambda_hat = 0.0;
    /// lambda-hat divided by the source size, for the averaged-loss convention.
    double lambda_over_n = 0.0;
    bool boundary = false;
    std::string error;
};

struct ResultTable {
    std::string title;
    std::string corner_label;
    std::vector<std::string> row_labels;
    std::vector<std::string> column_labels;
    /// cells[row][column]
    std::vector<std::vector<CellStats>> cells;
    /// Ordered key/value pairs; written into every output.
    std::vector<std::pair<std::string, std::string>> metadata;
    /// Canonical config text ("key=value" lines).
    std::string config_canonical;
    std::vector<RepeatRecord> records;

    std::size_t total_failures() const noexcept;
    std::size_t total_records() const noexcept;
    const std::string* find_metadata(const std::string& key) const noexcept;
};

enum class TableFormat { csv, markdown, repeats_csv, manifest_json };

/// Parses "csv", "markdown"/"md", "repeats", "manifest". Throws ConfigError.
TableFormat parse_table_format(const std::string& name);

std::string format_table(const ResultTable& table, TableFormat format);

/// Writes `format_table` to `path`, creating parent directories. Throws IoError.
void write_table(const ResultTable& table, TableFormat format, const std::filesystem::path& path);

/// Writes text to a file, creating parent directories. Throws IoError naming the path.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace iwcv
