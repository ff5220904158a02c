#include "iwcv/iwcv.h"

#include <algorithm>
#include <cstring>
#include <memory>
#include <sstream>
#include <string>

#include "iwcv/config.hpp"
#include "iwcv/dataset.hpp"
#include "iwcv/error.hpp"
#include "iwcv/experiments.hpp"
#include "iwcv/random.hpp"
#include "iwcv/report.hpp"
#include "iwcv/ridge.hpp"
#include "iwcv/selection.hpp"
#include "iwcv/weights.hpp"

struct iwcv_config {
    iwcv::ExperimentConfig value;
};

struct iwcv_table {
    iwcv::ResultTable value;
};

struct iwcv_dataset {
    iwcv::LabeledDataset value;
};

namespace {

thread_local std::string g_last_error;

class NullPointer : public iwcv::Error {
public:
    explicit NullPointer(const char* name) : Error(std::string("null pointer: ") + name) {}
};

class ShortBuffer : public iwcv::Error {
public:
    ShortBuffer() : Error("buffer too small") {}
};

#define IWCV_REQUIRE(p) \
    do { \
        if (!(p)) throw NullPointer(#p); \
    } while (0)

template <class Fn>
iwcv_status guard(Fn&& fn) noexcept {
    try {
        fn();
        g_last_error.clear();
        return IWCV_OK;
    } catch (const NullPointer& e) {
        g_last_error = e.what();
        return IWCV_ERR_NULL_POINTER;
    } catch (const ShortBuffer& e) {
        g_last_error = e.what();
        return IWCV_ERR_INSUFFICIENT_BUFFER;
    } catch (const iwcv::ConfigError& e) {
        g_last_error = e.what();
        return IWCV_ERR_CONFIG;
    } catch (const iwcv::ParseError& e) {
        g_last_error = e.what();
        return IWCV_ERR_DATA;
    } catch (const iwcv::DegenerateDataError& e) {
        g_last_error = e.what();
        return IWCV_ERR_DATA;
    } catch (const iwcv::IoError& e) {
        g_last_error = e.what();
        return IWCV_ERR_IO;
    } catch (const iwcv::SingularSystemError& e) {
        g_last_error = e.what();
        return IWCV_ERR_SINGULAR;
    } catch (const iwcv::EstimationError& e) {
        g_last_error = e.what();
        return IWCV_ERR_ESTIMATION;
    } catch (const iwcv::SelectionError& e) {
        g_last_error = e.what();
        return IWCV_ERR_ESTIMATION;
    } catch (const iwcv::ArgumentError& e) {
        g_last_error = e.what();
        return IWCV_ERR_ARGUMENT;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return IWCV_ERR_UNKNOWN;
    } catch (...) {
        g_last_error = "unknown exception";
        return IWCV_ERR_UNKNOWN;
    }
}

void copy_out(const std::string& s, char* buf, std::size_t cap, std::size_t* needed) {
    if (needed) *needed = s.size() + 1;
    if (!buf || cap < s.size() + 1) throw ShortBuffer();
    std::memcpy(buf, s.c_str(), s.size() + 1);
}

iwcv::Matrix rows_to_matrix(const double* p, std::size_t n, std::size_t d) {
    iwcv::Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) m(i, j) = p[i * d + j];
    }
    return m;
}

const iwcv::ExperimentConfig& config_or_default(const iwcv_config* cfg) {
    static const iwcv::ExperimentConfig defaults;
    return cfg ? cfg->value : defaults;
}

}  // namespace

extern "C" {

const char* iwcv_version(void) { return iwcv::kVersion; }

const char* iwcv_status_string(iwcv_status status) {
    switch (status) {
        case IWCV_OK: return "ok";
        case IWCV_ERR_CONFIG: return "invalid configuration";
        case IWCV_ERR_DATA: return "invalid or degenerate data";
        case IWCV_ERR_ESTIMATION: return "estimation failed";
        case IWCV_ERR_SINGULAR: return "singular system";
        case IWCV_ERR_ARGUMENT: return "invalid argument";
        case IWCV_ERR_IO: return "i/o error";
        case IWCV_ERR_NULL_POINTER: return "null pointer";
        case IWCV_ERR_INSUFFICIENT_BUFFER: return "insufficient buffer";
        case IWCV_ERR_UNKNOWN: return "unknown error";
    }
    return "unrecognized status";
}

const char* iwcv_last_error(void) { return g_last_error.c_str(); }

iwcv_status iwcv_config_create(iwcv_config** out) {
    return guard([&] {
        IWCV_REQUIRE(out);
        *out = new iwcv_config{};
    });
}

void iwcv_config_destroy(iwcv_config* cfg) { delete cfg; }

iwcv_status iwcv_config_load_file(iwcv_config* cfg, const char* path) {
    return guard([&] {
        IWCV_REQUIRE(cfg);
        IWCV_REQUIRE(path);
        cfg->value.load_file(path);
    });
}

iwcv_status iwcv_config_load_string(iwcv_config* cfg, const char* text) {
    return guard([&] {
        IWCV_REQUIRE(cfg);
        IWCV_REQUIRE(text);
        std::istringstream in(text);
        cfg->value.load(in);
    });
}

iwcv_status iwcv_config_set(iwcv_config* cfg, const char* key, const char* value) {
    return guard([&] {
        IWCV_REQUIRE(cfg);
        IWCV_REQUIRE(key);
        IWCV_REQUIRE(value);
        cfg->value.set(key, value);
    });
}

iwcv_status iwcv_config_get(const iwcv_config* cfg, const char* key, char* buf, size_t cap, size_t* needed) {
    return guard([&] {
        IWCV_REQUIRE(cfg);
        IWCV_REQUIRE(key);
        copy_out(cfg->value.get(key), buf, cap, needed);
    });
}

iwcv_status iwcv_config_validate(const iwcv_config* cfg) {
    return guard([&] {
        IWCV_REQUIRE(cfg);
        cfg->value.validate();
    });
}

iwcv_status iwcv_config_hash(const iwcv_config* cfg, char* buf, size_t cap, size_t* needed) {
    return guard([&] {
        IWCV_REQUIRE(cfg);
        copy_out(cfg->value.hash(), buf, cap, needed);
    });
}

iwcv_status iwcv_run_artificial(const iwcv_config* cfg, iwcv_table** out) {
    return guard([&] {
        IWCV_REQUIRE(cfg);
        IWCV_REQUIRE(out);
        *out = new iwcv_table{iwcv::run_artificial(cfg->value)};
    });
}

iwcv_status iwcv_run_heart(const iwcv_config* cfg, const char* data_dir, iwcv_table** out) {
    return guard([&] {
        IWCV_REQUIRE(cfg);
        IWCV_REQUIRE(out);
        const std::filesystem::path dir = data_dir ? std::filesystem::path(data_dir) : cfg->value.data_dir;
        *out = new iwcv_table{iwcv::run_heart(cfg->value, dir)};
    });
}

iwcv_status iwcv_emit_curves(const iwcv_config* cfg, const char* path) {
    return guard([&] {
        IWCV_REQUIRE(cfg);
        IWCV_REQUIRE(path);
        iwcv::emit_mse_curves(cfg->value, path);
    });
}

void iwcv_table_destroy(iwcv_table* table) { delete table; }

iwcv_status iwcv_table_shape(const iwcv_table* table, size_t* rows, size_t* cols) {
    return guard([&] {
        IWCV_REQUIRE(table);
        if (rows) *rows = table->value.row_labels.size();
        if (cols) *cols = table->value.column_labels.size();
    });
}

iwcv_status iwcv_table_row_label(const iwcv_table* table, size_t row, char* buf, size_t cap, size_t* needed) {
    return guard([&] {
        IWCV_REQUIRE(table);
        if (row >= table->value.row_labels.size()) throw iwcv::ArgumentError("row index out of range");
        copy_out(table->value.row_labels[row], buf, cap, needed);
    });
}

iwcv_status iwcv_table_column_label(const iwcv_table* table, size_t col, char* buf, size_t cap, size_t* needed) {
    return guard([&] {
        IWCV_REQUIRE(table);
        if (col >= table->value.column_labels.size()) throw iwcv::ArgumentError("column index out of range");
        copy_out(table->value.column_labels[col], buf, cap, needed);
    });
}

iwcv_status iwcv_table_cell(const iwcv_table* table, size_t row, size_t col, iwcv_cell* out) {
    return guard([&] {
        IWCV_REQUIRE(table);
        IWCV_REQUIRE(out);
        const auto& t = table->value;
        if (row >= t.row_labels.size() || col >= t.column_labels.size()) {
            throw iwcv::ArgumentError("cell index out of range");
        }
        const iwcv::CellStats& s = t.cells[row][col];
        *out = iwcv_cell{s.mean, s.std_error, s.successes, s.failures, s.boundary_hits, s.boundary() ? 1 : 0};
    });
}

iwcv_status iwcv_table_failures(const iwcv_table* table, size_t* failed, size_t* total) {
    return guard([&] {
        IWCV_REQUIRE(table);
        if (failed) *failed = table->value.total_failures();
        if (total) *total = table->value.total_records();
    });
}

iwcv_status iwcv_table_metadata(const iwcv_table* table, const char* key, char* buf, size_t cap, size_t* needed) {
    return guard([&] {
        IWCV_REQUIRE(table);
        IWCV_REQUIRE(key);
        const std::string* v = table->value.find_metadata(key);
        if (!v) throw iwcv::ArgumentError(std::string("no metadata key '") + key + "'");
        copy_out(*v, buf, cap, needed);
    });
}

iwcv_status iwcv_table_format(const iwcv_table* table, const char* format, char* buf, size_t cap, size_t* needed) {
    return guard([&] {
        IWCV_REQUIRE(table);
        IWCV_REQUIRE(format);
        copy_out(iwcv::format_table(table->value, iwcv::parse_table_format(format)), buf, cap, needed);
    });
}

iwcv_status iwcv_table_write(const iwcv_table* table, const char* format, const char* path) {
    return guard([&] {
        IWCV_REQUIRE(table);
        IWCV_REQUIRE(format);
        IWCV_REQUIRE(path);
        iwcv::write_table(table->value, iwcv::parse_table_format(format), path);
    });
}

iwcv_status iwcv_dataset_create(const double* features, const double* labels, size_t n, size_t d,
                                iwcv_dataset** out) {
    return guard([&] {
        IWCV_REQUIRE(features);
        IWCV_REQUIRE(labels);
        IWCV_REQUIRE(out);
        iwcv::Vector y = Eigen::Map<const iwcv::Vector>(labels, static_cast<Eigen::Index>(n));
        *out = new iwcv_dataset{iwcv::LabeledDataset(rows_to_matrix(features, n, d), std::move(y))};
    });
}

iwcv_status iwcv_dataset_load_uci_heart(const char* path, const char* domain, iwcv_dataset** out) {
    return guard([&] {
        IWCV_REQUIRE(path);
        IWCV_REQUIRE(out);
        *out = new iwcv_dataset{iwcv::load_uci_heart(path, domain ? domain : "")};
    });
}

void iwcv_dataset_destroy(iwcv_dataset* data) { delete data; }

iwcv_status iwcv_dataset_shape(const iwcv_dataset* data, size_t* n, size_t* d) {
    return guard([&] {
        IWCV_REQUIRE(data);
        if (n) *n = data->value.size();
        if (d) *d = data->value.dim();
    });
}

iwcv_status iwcv_dataset_copy(const iwcv_dataset* data, double* features, double* labels) {
    return guard([&] {
        IWCV_REQUIRE(data);
        const auto& x = data->value.features();
        if (features) {
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                for (Eigen::Index j = 0; j < x.cols(); ++j) features[i * x.cols() + j] = x(i, j);
            }
        }
        if (labels) {
            const auto& y = data->value.labels();
            std::copy(y.data(), y.data() + y.size(), labels);
        }
    });
}

iwcv_status iwcv_dataset_preprocess(const iwcv_dataset* data, double missing_threshold, iwcv_dataset** out) {
    return guard([&] {
        IWCV_REQUIRE(data);
        IWCV_REQUIRE(out);
        *out = new iwcv_dataset{iwcv::preprocess(data->value, missing_threshold).first};
    });
}

iwcv_status iwcv_fit_ridge(const iwcv_dataset* data, double lambda, double* weights_out) {
    return guard([&] {
        IWCV_REQUIRE(data);
        IWCV_REQUIRE(weights_out);
        const auto h = iwcv::fit_ridge(data->value.features(), data->value.labels(), lambda);
        std::copy(h.weights.data(), h.weights.data() + h.weights.size(), weights_out);
    });
}

iwcv_status iwcv_estimate_weights(const char* estimator, const double* source, size_t n_source,
                                  const double* target, size_t n_target, size_t d, const iwcv_config* cfg,
                                  uint64_t seed, double* weights_out) {
    return guard([&] {
        IWCV_REQUIRE(estimator);
        IWCV_REQUIRE(source);
        IWCV_REQUIRE(target);
        IWCV_REQUIRE(weights_out);
        const auto& c = config_or_default(cfg);
        const iwcv::Matrix xs = rows_to_matrix(source, n_source, d);
        const iwcv::Matrix xt = rows_to_matrix(target, n_target, d);
        iwcv::WeightVector w;
        switch (iwcv::parse_estimator(estimator)) {
            case iwcv::Estimator::rg: w = iwcv::estimate_rg(xs, xt, {c.rg_variance_floor}); break;
            case iwcv::Estimator::kliep: {
                iwcv::KliepConfig k;
                k.width_multipliers = c.kliep_width_multipliers;
                k.cv_folds = c.kliep_folds;
                k.max_iterations = c.kliep_max_iterations;
                k.tolerance = c.kliep_tolerance;
                k.seed = seed;
                w = iwcv::estimate_kliep(xs, xt, k);
                break;
            }
            case iwcv::Estimator::kmm: {
                iwcv::KmmConfig k;
                k.upper_bound = c.kmm_upper_bound;
                k.sum_slack = c.kmm_sum_slack;
                k.solver_tolerance = c.kmm_tolerance;
                k.max_iterations = c.kmm_max_iterations;
                w = iwcv::estimate_kmm(xs, xt, k);
                break;
            }
            case iwcv::Estimator::nn: w = iwcv::estimate_nn(xs, xt); break;
        }
        for (std::size_t i = 0; i < w.size(); ++i) weights_out[i] = w[i];
    });
}

iwcv_status iwcv_cv_select(const iwcv_dataset* data, const iwcv_config* cfg, const double* weights, uint64_t seed,
                           double* lambda_hat) {
    return guard([&] {
        IWCV_REQUIRE(data);
        IWCV_REQUIRE(lambda_hat);
        const auto& c = config_or_default(cfg);
        iwcv::Rng rng = iwcv::make_rng(seed, {});
        const auto plan = iwcv::make_split_plan(data->value.size(), c.fold_count, rng);
        std::optional<iwcv::WeightVector> w;
        if (weights) {
            w = iwcv::WeightVector(
                Eigen::Map<const iwcv::Vector>(weights, static_cast<Eigen::Index>(data->value.size())));
        }
        *lambda_hat = iwcv::cv_select(data->value, iwcv::make_grid(c), plan, w, c.weighted_mse_mode).lambda_hat;
    });
}

}  // extern "C"
