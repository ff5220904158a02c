#include "iwcv/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include "iwcv/error.hpp"

namespace iwcv {

const char* estimator_name(Estimator e) noexcept {
    switch (e) {
        case Estimator::rg: return "rg";
        case Estimator::kliep: return "kliep";
        case Estimator::kmm: return "kmm";
        case Estimator::nn: return "nn";
    }
    return "?";
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    const std::string t = trim(value);
    const char* first = t.data();
    if (!t.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(out)) {
        throw ConfigError("config key '" + key + "': '" + value + "' is not a number");
    }
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    const std::string t = trim(value);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw ConfigError("config key '" + key + "': '" + value + "' is not a nonnegative integer");
    }
    return out;
}

std::size_t to_size(const std::string& key, const std::string& value) {
    return static_cast<std::size_t>(to_u64(key, value));
}

bool to_bool(const std::string& key, const std::string& value) {
    const std::string v = lower(trim(value));
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "': '" + value + "' is not a boolean");
}

std::vector<double> to_doubles(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& item : split_list(value)) out.push_back(to_double(key, item));
    return out;
}

std::string fmt(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string fmt(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
    return out;
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
    return out;
}

struct Field {
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
    bool affects_results = true;
};

#define IWCV_SIZE_FIELD(name)                                                                   \
    {#name,                                                                                     \
     {[](ExperimentConfig& c, const std::string& v) { c.name = to_size(#name, v); },            \
      [](const ExperimentConfig& c) { return std::to_string(c.name); }}}
#define IWCV_DOUBLE_FIELD(name)                                                                 \
    {#name,                                                                                     \
     {[](ExperimentConfig& c, const std::string& v) { c.name = to_double(#name, v); },          \
      [](const ExperimentConfig& c) { return fmt(c.name); }}}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = {
        {"seed",
         {[](ExperimentConfig& c, const std::string& v) { c.seed = to_u64("seed", v); },
          [](const ExperimentConfig& c) { return std::to_string(c.seed); }}},
        IWCV_SIZE_FIELD(repeats),
        IWCV_SIZE_FIELD(heart_repeats),
        IWCV_SIZE_FIELD(source_samples),
        IWCV_SIZE_FIELD(target_samples),
        {"samples_per_class",
         {[](ExperimentConfig& c, const std::string& v) {
              const std::string t = lower(trim(v));
              if (t.empty() || t == "none") {
                  c.samples_per_class.reset();
              } else {
                  c.samples_per_class = to_size("samples_per_class", v);
              }
          },
          [](const ExperimentConfig& c) {
              return c.samples_per_class ? std::to_string(*c.samples_per_class) : std::string("none");
          }}},
        {"target_variances",
         {[](ExperimentConfig& c, const std::string& v) { c.target_variances = to_doubles("target_variances", v); },
          [](const ExperimentConfig& c) { return fmt(c.target_variances); }}},
        {"curve_variances",
         {[](ExperimentConfig& c, const std::string& v) { c.curve_variances = to_doubles("curve_variances", v); },
          [](const ExperimentConfig& c) { return fmt(c.curve_variances); }}},
        {"target_labeling",
         {[](ExperimentConfig& c, const std::string& v) {
              const std::string t = lower(trim(v));
              if (t == "component") {
                  c.target_labeling = TargetLabeling::component;
              } else if (t == "posterior") {
                  c.target_labeling = TargetLabeling::posterior;
              } else {
                  throw ConfigError("target_labeling must be 'component' or 'posterior'");
              }
          },
          [](const ExperimentConfig& c) {
              return std::string(c.target_labeling == TargetLabeling::component ? "component" : "posterior");
          }}},
        IWCV_DOUBLE_FIELD(grid_min),
        IWCV_DOUBLE_FIELD(grid_max),
        IWCV_DOUBLE_FIELD(grid_step),
        IWCV_SIZE_FIELD(fold_count),
        {"weighted_mse_mode",
         {[](ExperimentConfig& c, const std::string& v) {
              const std::string t = lower(trim(v));
              if (t == "as-printed" || t == "as_printed") {
                  c.weighted_mse_mode = WeightedMseMode::as_printed;
              } else if (t == "fully-weighted" || t == "fully_weighted") {
                  c.weighted_mse_mode = WeightedMseMode::fully_weighted;
              } else {
                  throw ConfigError("weighted_mse_mode must be 'as-printed' or 'fully-weighted'");
              }
          },
          [](const ExperimentConfig& c) {
              return std::string(c.weighted_mse_mode == WeightedMseMode::as_printed ? "as-printed"
                                                                                      : "fully-weighted");
          }}},
        {"append_intercept",
         {[](ExperimentConfig& c, const std::string& v) { c.append_intercept = to_bool("append_intercept", v); },
          [](const ExperimentConfig& c) { return std::string(c.append_intercept ? "true" : "false"); }}},
        {"estimators",
         {[](ExperimentConfig& c, const std::string& v) {
              std::vector<Estimator> out;
              for (const auto& name : split_list(v)) {
                  const Estimator e = parse_estimator(name);
                  if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
              }
              // canonical order keeps the table rows fixed
              std::sort(out.begin(), out.end());
              c.estimators = std::move(out);
          },
          [](const ExperimentConfig& c) {
              std::vector<std::string> names;
              for (Estimator e : c.estimators) names.emplace_back(estimator_name(e));
              return join(names);
          }}},
        IWCV_DOUBLE_FIELD(rg_variance_floor),
        IWCV_DOUBLE_FIELD(heart_rg_variance_floor),
        IWCV_DOUBLE_FIELD(kmm_upper_bound),
        {"kmm_sum_slack",
         {[](ExperimentConfig& c, const std::string& v) {
              const std::string t = lower(trim(v));
              if (t.empty() || t == "auto") {
                  c.kmm_sum_slack.reset();
              } else {
                  c.kmm_sum_slack = to_double("kmm_sum_slack", v);
              }
          },
          [](const ExperimentConfig& c) { return c.kmm_sum_slack ? fmt(*c.kmm_sum_slack) : std::string("auto"); }}},
        IWCV_DOUBLE_FIELD(kmm_tolerance),
        IWCV_SIZE_FIELD(kmm_max_iterations),
        {"kliep_width_multipliers",
         {[](ExperimentConfig& c, const std::string& v) {
              c.kliep_width_multipliers = to_doubles("kliep_width_multipliers", v);
          },
          [](const ExperimentConfig& c) { return fmt(c.kliep_width_multipliers); }}},
        IWCV_SIZE_FIELD(kliep_folds),
        IWCV_SIZE_FIELD(kliep_max_iterations),
        IWCV_DOUBLE_FIELD(kliep_tolerance),
        IWCV_DOUBLE_FIELD(missing_removal_threshold),
        {"data_dir",
         {[](ExperimentConfig& c, const std::string& v) { c.data_dir = trim(v); },
          [](const ExperimentConfig& c) { return c.data_dir.string(); }, false}},
        {"out_dir",
         {[](ExperimentConfig& c, const std::string& v) { c.out_dir = trim(v); },
          [](const ExperimentConfig& c) { return c.out_dir.string(); }, false}},
        {"formats",
         {[](ExperimentConfig& c, const std::string& v) {
              std::vector<std::string> out;
              for (auto f : split_list(v)) {
                  f = lower(f);
                  if (f == "md") f = "markdown";
                  if (f == "both") {
                      out = {"csv", "markdown"};
                      continue;
                  }
                  if (f != "csv" && f != "markdown") throw ConfigError("unknown output format '" + f + "'");
                  if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
              }
              c.formats = std::move(out);
          },
          [](const ExperimentConfig& c) { return join(c.formats); }, false}},
        {"jobs",
         {[](ExperimentConfig& c, const std::string& v) { c.jobs = to_size("jobs", v); },
          [](const ExperimentConfig& c) { return std::to_string(c.jobs); }, false}},
        IWCV_DOUBLE_FIELD(max_failure_fraction),
    };
    return table;
}

#undef IWCV_SIZE_FIELD
#undef IWCV_DOUBLE_FIELD

}  // namespace

Estimator parse_estimator(const std::string& name) {
    const std::string n = lower(trim(name));
    if (n == "rg") return Estimator::rg;
    if (n == "kliep") return Estimator::kliep;
    if (n == "kmm") return Estimator::kmm;
    if (n == "nn") return Estimator::nn;
    throw ConfigError("unknown estimator '" + name + "' (expected rg, kliep, kmm or nn)");
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    const auto& table = fields();
    const auto it = table.find(lower(trim(key)));
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second.set(*this, value);
}

std::string ExperimentConfig::get(const std::string& key) const {
    const auto& table = fields();
    const auto it = table.find(lower(trim(key)));
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second.get(*this);
}

const std::vector<std::string>& ExperimentConfig::keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [k, _] : fields()) out.push_back(k);
        return out;
    }();
    return names;
}

void ExperimentConfig::load(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
        }
        try {
            set(line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void ExperimentConfig::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    load(in);
}

void ExperimentConfig::validate() const {
    if (repeats < 1 || heart_repeats < 1) throw ConfigError("repeats must be >= 1");
    if (source_samples < 1 || target_samples < 1) throw ConfigError("sample sizes must be >= 1");
    if (samples_per_class && *samples_per_class < 1) throw ConfigError("samples_per_class must be >= 1");
    if (target_variances.empty()) throw ConfigError("target_variances is empty");
    for (double v : target_variances) {
        if (!(v > 0.0)) throw ConfigError("target variances must be positive");
    }
    for (double v : curve_variances) {
        if (!(v > 0.0)) throw ConfigError("curve variances must be positive");
    }
    if (!(grid_step > 0.0) || !(grid_min < grid_max)) throw ConfigError("grid needs grid_min < grid_max and grid_step > 0");
    if (fold_count < 2) throw ConfigError("fold_count must be >= 2");
    if (estimators.empty()) throw ConfigError("no estimator selected");
    if (!(kmm_upper_bound > 0.0)) throw ConfigError("kmm_upper_bound must be positive");
    if (kmm_sum_slack && !(*kmm_sum_slack >= 0.0)) throw ConfigError("kmm_sum_slack must be nonnegative");
    if (!(kmm_tolerance > 0.0) || kmm_max_iterations < 1) throw ConfigError("invalid KMM solver settings");
    if (kliep_width_multipliers.empty()) throw ConfigError("kliep_width_multipliers is empty");
    for (double v : kliep_width_multipliers) {
        if (!(v > 0.0)) throw ConfigError("KLIEP width multipliers must be positive");
    }
    if (kliep_folds < 2) throw ConfigError("kliep_folds must be >= 2");
    if (!(rg_variance_floor >= 0.0) || !(heart_rg_variance_floor >= 0.0)) {
        throw ConfigError("rG variance floors must be nonnegative");
    }
    if (!(missing_removal_threshold >= 0.0 && missing_removal_threshold <= 1.0)) {
        throw ConfigError("missing_removal_threshold must lie in [0, 1]");
    }
    if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0)) {
        throw ConfigError("max_failure_fraction must lie in [0, 1]");
    }
}

std::string ExperimentConfig::canonical() const {
    std::string out;
    for (const auto& [key, field] : fields()) {
        if (!field.affects_results) continue;
        out += key + "=" + field.get(*this) + "\n";
    }
    return out;
}

std::string ExperimentConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace iwcv
