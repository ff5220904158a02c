// Command-line runner for the covariate-shift experiments.
//
//   iwcv artificial [--config FILE] [--seed N] [--repeats N] [--estimators rg,kmm] ...
//   iwcv heart --data-dir DIR ...
//   iwcv curves ...
//
// Exit codes: 0 ok, 1 configuration error, 2 data error, 3 too many failed repeats.

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iwcv/iwcv.h"

namespace {

enum Exit { kOk = 0, kConfigError = 1, kDataError = 2, kBudgetExceeded = 3 };

struct ConfigDeleter {
    void operator()(iwcv_config* c) const { iwcv_config_destroy(c); }
};
struct TableDeleter {
    void operator()(iwcv_table* t) const { iwcv_table_destroy(t); }
};
using ConfigPtr = std::unique_ptr<iwcv_config, ConfigDeleter>;
using TablePtr = std::unique_ptr<iwcv_table, TableDeleter>;

struct Options {
    std::string config_file;
    std::optional<std::string> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> formats;
    std::optional<std::string> estimators;
    std::optional<std::string> repeats;
    std::optional<std::string> jobs;
    std::optional<std::string> data_dir;
    std::vector<std::string> overrides;
};

int exit_for(iwcv_status s) {
    switch (s) {
        case IWCV_OK: return kOk;
        case IWCV_ERR_CONFIG:
        case IWCV_ERR_ARGUMENT: return kConfigError;
        case IWCV_ERR_DATA:
        case IWCV_ERR_IO: return kDataError;
        default: return kBudgetExceeded;
    }
}

int report(iwcv_status s, const char* what) {
    std::fprintf(stderr, "iwcv: %s: %s (%s)\n", what, iwcv_last_error(), iwcv_status_string(s));
    return exit_for(s);
}

std::string get(const iwcv_config* cfg, const char* key) {
    std::size_t needed = 0;
    iwcv_config_get(cfg, key, nullptr, 0, &needed);
    std::string out(needed, '\0');
    iwcv_config_get(cfg, key, out.data(), out.size(), nullptr);
    out.resize(needed ? needed - 1 : 0);
    return out;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

/// Builds the configuration: file first, then --set overrides, then dedicated flags.
/// Returns an exit code.
int build_config(const Options& opt, const std::string& repeats_key, ConfigPtr& out) {
    iwcv_config* raw = nullptr;
    if (iwcv_status s = iwcv_config_create(&raw); s != IWCV_OK) return report(s, "configuration");
    out.reset(raw);
    if (!opt.config_file.empty()) {
        if (iwcv_status s = iwcv_config_load_file(raw, opt.config_file.c_str()); s != IWCV_OK) {
            return report(s, "configuration");
        }
    }
    std::vector<std::pair<std::string, std::string>> sets;
    for (const auto& kv : opt.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "iwcv: --set expects key=value, got '%s'\n", kv.c_str());
            return kConfigError;
        }
        sets.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (opt.seed) sets.emplace_back("seed", *opt.seed);
    if (opt.out_dir) sets.emplace_back("out_dir", *opt.out_dir);
    if (opt.formats) sets.emplace_back("formats", *opt.formats);
    if (opt.estimators) sets.emplace_back("estimators", *opt.estimators);
    if (opt.repeats) sets.emplace_back(repeats_key, *opt.repeats);
    if (opt.jobs) sets.emplace_back("jobs", *opt.jobs);
    if (opt.data_dir) sets.emplace_back("data_dir", *opt.data_dir);
    for (const auto& [k, v] : sets) {
        if (iwcv_status s = iwcv_config_set(raw, k.c_str(), v.c_str()); s != IWCV_OK) {
            return report(s, "configuration");
        }
    }
    if (iwcv_status s = iwcv_config_validate(raw); s != IWCV_OK) return report(s, "configuration");
    return kOk;
}

const char* extension(const std::string& format) {
    return format == "markdown" || format == "md" ? ".md" : ".csv";
}

int write_outputs(const iwcv_config* cfg, const iwcv_table* table, const std::string& stem) {
    const std::filesystem::path dir = get(cfg, "out_dir");
    for (const auto& format : split_list(get(cfg, "formats"))) {
        const auto path = dir / (stem + extension(format));
        if (iwcv_status s = iwcv_table_write(table, format.c_str(), path.string().c_str()); s != IWCV_OK) {
            return report(s, "writing table");
        }
        std::printf("wrote %s\n", path.string().c_str());
    }
    const auto repeats = dir / (stem + "_repeats.csv");
    const auto manifest = dir / (stem + "_manifest.json");
    if (iwcv_status s = iwcv_table_write(table, "repeats", repeats.string().c_str()); s != IWCV_OK) {
        return report(s, "writing repeats");
    }
    if (iwcv_status s = iwcv_table_write(table, "manifest", manifest.string().c_str()); s != IWCV_OK) {
        return report(s, "writing manifest");
    }
    std::printf("wrote %s\nwrote %s\n", repeats.string().c_str(), manifest.string().c_str());

    std::size_t size = 0;
    iwcv_table_format(table, "markdown", nullptr, 0, &size);
    std::string md(size, '\0');
    iwcv_table_format(table, "markdown", md.data(), md.size(), nullptr);
    std::fputs(md.c_str(), stdout);

    std::size_t failed = 0, total = 0;
    iwcv_table_failures(table, &failed, &total);
    const double budget = std::stod(get(cfg, "max_failure_fraction"));
    if (failed > 0) std::fprintf(stderr, "iwcv: %zu of %zu repeat records failed\n", failed, total);
    if (total > 0 && static_cast<double>(failed) > budget * static_cast<double>(total)) {
        std::fprintf(stderr, "iwcv: failure fraction exceeds budget %s\n", get(cfg, "max_failure_fraction").c_str());
        return kBudgetExceeded;
    }
    return kOk;
}

void add_common(CLI::App* cmd, Options& opt) {
    cmd->add_option("--config", opt.config_file, "key=value configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", opt.seed, "master seed");
    cmd->add_option("--out-dir", opt.out_dir, "output directory");
    cmd->add_option("--format", opt.formats, "comma-separated table formats: csv, markdown");
    cmd->add_option("--estimators", opt.estimators, "comma-separated subset of rg, kliep, kmm, nn");
    cmd->add_option("--repeats", opt.repeats, "number of repeats");
    cmd->add_option("--jobs", opt.jobs, "worker threads");
    cmd->add_option("--set", opt.overrides, "extra key=value config override (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regularization-parameter selection under covariate shift"};
    app.set_version_flag("--version", std::string(iwcv_version()));
    app.require_subcommand(1);

    Options opt;
    auto* artificial = app.add_subcommand("artificial", "artificial variance-shift table");
    auto* heart = app.add_subcommand("heart", "heart-disease hospital-pair table");
    auto* curves = app.add_subcommand("curves", "population target-MSE curves over the lambda grid");
    add_common(artificial, opt);
    add_common(heart, opt);
    add_common(curves, opt);
    heart->add_option("--data-dir", opt.data_dir, "directory holding the four processed.*.data files");
    std::string curves_file = "mse_curves.tsv";
    curves->add_option("--output", curves_file, "curve file name inside the output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    ConfigPtr cfg;
    const std::string repeats_key = heart->parsed() ? "heart_repeats" : "repeats";
    if (int code = build_config(opt, repeats_key, cfg); code != kOk) return code;

    if (curves->parsed()) {
        const auto path = std::filesystem::path(get(cfg.get(), "out_dir")) / curves_file;
        if (iwcv_status s = iwcv_emit_curves(cfg.get(), path.string().c_str()); s != IWCV_OK) {
            return report(s, "curves");
        }
        std::printf("wrote %s\n", path.string().c_str());
        return kOk;
    }

    iwcv_table* raw = nullptr;
    iwcv_status s = artificial->parsed() ? iwcv_run_artificial(cfg.get(), &raw)
                                         : iwcv_run_heart(cfg.get(), nullptr, &raw);
    if (s != IWCV_OK) return report(s, artificial->parsed() ? "artificial" : "heart");
    TablePtr table(raw);
    return write_outputs(cfg.get(), table.get(), artificial->parsed() ? "artificial" : "heart");
}
