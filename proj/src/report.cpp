#include "iwcv/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "iwcv/error.hpp"

namespace iwcv {

CellStats aggregate(std::span<const double> lambda_hats, std::size_t failures, std::size_t boundary_hits) {
    CellStats s;
    s.successes = lambda_hats.size();
    s.failures = failures;
    s.boundary_hits = boundary_hits;
    if (lambda_hats.empty()) return s;
    double sum = 0.0;
    for (double v : lambda_hats) sum += v;
    s.mean = sum / static_cast<double>(lambda_hats.size());
    if (lambda_hats.size() > 1) {
        double ss = 0.0;
        for (double v : lambda_hats) ss += (v - s.mean) * (v - s.mean);
        const double sd = std::sqrt(ss / static_cast<double>(lambda_hats.size() - 1));
        s.std_error = sd / std::sqrt(static_cast<double>(lambda_hats.size()));
    }
    return s;
}

std::size_t ResultTable::total_failures() const noexcept {
    std::size_t total = 0;
    for (const auto& row : cells) {
        for (const auto& c : row) total += c.failures;
    }
    return total;
}

std::size_t ResultTable::total_records() const noexcept {
    std::size_t total = 0;
    for (const auto& row : cells) {
        for (const auto& c : row) total += c.failures + c.successes;
    }
    return total;
}

const std::string* ResultTable::find_metadata(const std::string& key) const noexcept {
    for (const auto& [k, v] : metadata) {
        if (k == key) return &v;
    }
    return nullptr;
}

TableFormat parse_table_format(const std::string& name) {
    if (name == "csv") return TableFormat::csv;
    if (name == "markdown" || name == "md") return TableFormat::markdown;
    if (name == "repeats") return TableFormat::repeats_csv;
    if (name == "manifest") return TableFormat::manifest_json;
    throw ConfigError("unknown table format '" + name + "'");
}

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    std::string s = buf;
    // "-0", "-0.000000" -> positive zero
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string format_csv(const ResultTable& t) {
    std::ostringstream out;
    out << "# title=" << t.title << "\n";
    for (const auto& [k, v] : t.metadata) out << "# " << k << "=" << v << "\n";
    out << csv_escape(t.corner_label.empty() ? "row" : t.corner_label);
    for (const auto& c : t.column_labels) {
        for (const char* suffix : {"_mean", "_stderr", "_n", "_failed", "_boundary"}) {
            out << "," << csv_escape(c + suffix);
        }
    }
    out << "\n";
    for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
        out << csv_escape(t.row_labels[r]);
        for (std::size_t c = 0; c < t.column_labels.size(); ++c) {
            const CellStats& s = t.cells[r][c];
            if (s.successes == 0) {
                out << ",,";
            } else {
                out << "," << fixed(s.mean, 6) << "," << fixed(s.std_error, 6);
            }
            out << "," << s.successes << "," << s.failures << "," << (s.boundary() ? 1 : 0);
        }
        out << "\n";
    }
    return out.str();
}

std::string format_markdown(const ResultTable& t) {
    std::ostringstream out;
    out << "<!-- " << t.title << " -->\n";
    out << "<!--";
    for (const auto& [k, v] : t.metadata) out << " " << k << "=" << v;
    out << " -->\n\n";
    out << "| " << (t.corner_label.empty() ? " " : t.corner_label) << " |";
    for (const auto& c : t.column_labels) out << " " << c << " |";
    out << "\n|---|";
    for (std::size_t c = 0; c < t.column_labels.size(); ++c) out << "---:|";
    out << "\n";
    bool any_boundary = false;
    for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
        out << "| " << t.row_labels[r] << " |";
        for (std::size_t c = 0; c < t.column_labels.size(); ++c) {
            const CellStats& s = t.cells[r][c];
            if (s.successes == 0) {
                out << " n/a |";
                continue;
            }
            out << " " << fixed(s.mean, 0) << " (" << fixed(s.std_error, 0) << ")";
            if (s.boundary()) {
                out << "*";
                any_boundary = true;
            }
            out << " |";
        }
        out << "\n";
    }
    if (any_boundary) out << "\n\\* every repeat selected a grid endpoint\n";
    return out.str();
}

std::string format_repeats(const ResultTable& t) {
    std::ostringstream out;
    out << "row,column,repeat,status,lambda_hat,lambda_over_n,boundary,error\n";
    for (const auto& rec : t.records) {
        out << csv_escape(rec.row) << "," << csv_escape(rec.column) << "," << rec.repeat << ","
            << (rec.ok ? "ok" : "failed") << ",";
        if (rec.ok) out << fixed(rec.lambda_hat, 6) << "," << fixed(rec.lambda_over_n, 9);
        else out << ",";
        out << "," << (rec.boundary ? 1 : 0) << "," << csv_escape(rec.error) << "\n";
    }
    return out.str();
}

std::string format_manifest(const ResultTable& t) {
    nlohmann::ordered_json j;
    j["title"] = t.title;
    j["version"] = kVersion;
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
    for (const auto& [k, v] : t.metadata) meta[k] = v;
    j["metadata"] = meta;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::istringstream lines(t.config_canonical);
    std::string line;
    while (std::getline(lines, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) config[line.substr(0, eq)] = line.substr(eq + 1);
    }
    j["config"] = config;
    j["failures"]["total"] = t.total_failures();
    j["failures"]["records"] = t.total_records();
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
        for (std::size_t c = 0; c < t.column_labels.size(); ++c) {
            const CellStats& s = t.cells[r][c];
            cells.push_back({{"row", t.row_labels[r]},
                             {"column", t.column_labels[c]},
                             {"successes", s.successes},
                             {"failures", s.failures},
                             {"boundary", s.boundary()}});
        }
    }
    j["failures"]["cells"] = cells;
    return j.dump(2) + "\n";
}

}  // namespace

std::string format_table(const ResultTable& table, TableFormat format) {
    switch (format) {
        case TableFormat::csv: return format_csv(table);
        case TableFormat::markdown: return format_markdown(table);
        case TableFormat::repeats_csv: return format_repeats(table);
        case TableFormat::manifest_json: return format_manifest(table);
    }
    return {};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_table(const ResultTable& table, TableFormat format, const std::filesystem::path& path) {
    write_text_file(path, format_table(table, format));
}

}  // namespace iwcv
