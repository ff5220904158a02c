#include "iwcv/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "iwcv/error.hpp"
#include "iwcv/random.hpp"
#include "iwcv/weights.hpp"

namespace iwcv {

const char* estimator_label(Estimator e) noexcept {
    switch (e) {
        case Estimator::rg: return "rG";
        case Estimator::kliep: return "KLIEP";
        case Estimator::kmm: return "KMM";
        case Estimator::nn: return "NN";
    }
    return "?";
}

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

LambdaGrid make_grid(const ExperimentConfig& cfg) {
    return LambdaGrid::linear(cfg.grid_min, cfg.grid_max, cfg.grid_step);
}

namespace {

std::string fmt_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    std::string s = buf;
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

LabeledDataset with_intercept(const LabeledDataset& d) {
    Matrix x(d.features().rows(), d.features().cols() + 1);
    x << d.features(), Matrix::Ones(d.features().rows(), 1);
    MissingMask mask(x.rows(), x.cols());
    mask << d.missing_mask(), MissingMask::Constant(x.rows(), 1, false);
    auto names = d.feature_names();
    names.push_back("intercept");
    return LabeledDataset(std::move(x), d.labels(), std::move(names), std::move(mask));
}

struct Outcome {
    bool ok = false;
    double lambda_hat = 0.0;
    bool boundary = false;
    std::string error;
};

Outcome outcome_of(const std::function<SelectionResult()>& run) {
    Outcome o;
    try {
        const SelectionResult r = run();
        o.ok = true;
        o.lambda_hat = r.lambda_hat;
        o.boundary = r.boundary;
    } catch (const Error& e) {
        o.error = e.what();
    }
    return o;
}

KliepConfig kliep_config(const ExperimentConfig& cfg, std::uint64_t seed) {
    KliepConfig k;
    k.width_multipliers = cfg.kliep_width_multipliers;
    k.cv_folds = cfg.kliep_folds;
    k.max_iterations = cfg.kliep_max_iterations;
    k.tolerance = cfg.kliep_tolerance;
    k.seed = seed;
    return k;
}

KmmConfig kmm_config(const ExperimentConfig& cfg) {
    KmmConfig k;
    k.upper_bound = cfg.kmm_upper_bound;
    k.sum_slack = cfg.kmm_sum_slack;
    k.solver_tolerance = cfg.kmm_tolerance;
    k.max_iterations = cfg.kmm_max_iterations;
    return k;
}

WeightVector estimate(Estimator e, const Matrix& source, const Matrix& target, const ExperimentConfig& cfg,
                      double rg_floor, std::uint64_t kliep_seed) {
    switch (e) {
        case Estimator::rg: return estimate_rg(source, target, RgConfig{rg_floor});
        case Estimator::kliep: return estimate_kliep(source, target, kliep_config(cfg, kliep_seed));
        case Estimator::kmm: return estimate_kmm(source, target, kmm_config(cfg));
        case Estimator::nn: return estimate_nn(source, target);
    }
    throw ConfigError("unknown estimator");
}

/// Fills cells and records from outcomes[row][column][repeat].
void assemble(ResultTable& table, const std::vector<std::vector<std::vector<Outcome>>>& outcomes,
              const std::vector<std::vector<double>>& source_sizes) {
    table.cells.assign(table.row_labels.size(), std::vector<CellStats>(table.column_labels.size()));
    for (std::size_t r = 0; r < table.row_labels.size(); ++r) {
        for (std::size_t c = 0; c < table.column_labels.size(); ++c) {
            std::vector<double> values;
            std::size_t failures = 0, hits = 0;
            const auto& reps = outcomes[r][c];
            for (std::size_t k = 0; k < reps.size(); ++k) {
                const Outcome& o = reps[k];
                if (o.ok) {
                    values.push_back(o.lambda_hat);
                    if (o.boundary) ++hits;
                } else {
                    ++failures;
                }
                const double n = source_sizes[r][c];
                table.records.push_back({table.row_labels[r], table.column_labels[c], k, o.ok, o.lambda_hat,
                                         o.ok ? o.lambda_hat / n : 0.0, o.boundary, o.error});
            }
            table.cells[r][c] = aggregate(values, failures, hits);
        }
    }
}

void common_metadata(ResultTable& table, const ExperimentConfig& cfg, const LambdaGrid& grid, std::size_t repeats) {
    table.config_canonical = cfg.canonical();
    table.metadata.emplace_back("config_hash", cfg.hash());
    table.metadata.emplace_back("seed", std::to_string(cfg.seed));
    table.metadata.emplace_back("repeats", std::to_string(repeats));
    table.metadata.emplace_back("grid", fmt_number(grid.front()) + ":" + fmt_number(cfg.grid_step) + ":" +
                                            fmt_number(grid.back()) + " (" + std::to_string(grid.size()) +
                                            " points)");
    table.metadata.emplace_back("fold_count", std::to_string(cfg.fold_count));
    table.metadata.emplace_back("weighted_mse_mode", cfg.get("weighted_mse_mode"));
    table.metadata.emplace_back("stderr", "sample std / sqrt(successful repeats)");
    table.metadata.emplace_back("version", kVersion);
}

}  // namespace

// ---------------------------------------------------------------------------

ResultTable run_artificial(const ExperimentConfig& cfg) {
    cfg.validate();
    const LambdaGrid grid = make_grid(cfg);

    ResultTable table;
    table.title = "Artificial covariate shift: mean and standard error of lambda-hat";
    table.corner_label = "sigma2_Z";
    table.row_labels.emplace_back(kRowLambdaV);
    for (Estimator e : cfg.estimators) table.row_labels.emplace_back(estimator_label(e));
    table.row_labels.emplace_back(kRowTrueRatio);
    table.row_labels.emplace_back(kRowLambdaZ);
    for (double v : cfg.target_variances) table.column_labels.push_back(fmt_number(v));

    const std::size_t rows = table.row_labels.size();
    const std::size_t cols = cfg.target_variances.size();
    std::vector<std::vector<std::vector<Outcome>>> outcomes(
        rows, std::vector<std::vector<Outcome>>(cols, std::vector<Outcome>(cfg.repeats)));
    const double source_n = static_cast<double>(cfg.samples_per_class ? 2 * *cfg.samples_per_class
                                                                       : cfg.source_samples);

    parallel_for(cols * cfg.repeats, cfg.jobs, [&](std::size_t task) {
        const std::size_t c = task / cfg.repeats;
        const std::size_t k = task % cfg.repeats;
        const ShiftProblem problem = ShiftProblem::variance_shift(cfg.target_variances[c]);
        Rng rng = make_rng(cfg.seed, {1, c, k});

        LabeledDataset source = cfg.samples_per_class ? sample_source_per_class(problem, *cfg.samples_per_class, rng)
                                                      : sample_source(problem, cfg.source_samples, rng);
        LabeledDataset target = sample_target(problem, cfg.target_samples, rng, cfg.target_labeling);
        const SplitPlan plan = make_split_plan(source.size(), cfg.fold_count, rng);
        const std::uint64_t kliep_seed = rng();

        const Matrix raw_source = source.features();
        const Matrix raw_target = target.features();
        if (cfg.append_intercept) {
            source = with_intercept(source);
            target = with_intercept(target);
        }

        std::size_t row = 0;
        outcomes[row++][c][k] = outcome_of([&] { return cv_select(source, grid, plan); });
        for (Estimator e : cfg.estimators) {
            outcomes[row++][c][k] = outcome_of([&] {
                const WeightVector w = estimate(e, raw_source, raw_target, cfg, cfg.rg_variance_floor, kliep_seed);
                return cv_select(source, grid, plan, w, cfg.weighted_mse_mode);
            });
        }
        outcomes[row++][c][k] = outcome_of([&] {
            const Vector xs = raw_source.col(0);
            const WeightVector w = true_importance_weights(problem, std::span<const double>(xs.data(), xs.size()));
            return cv_select(source, grid, plan, w, cfg.weighted_mse_mode);
        });
        outcomes[row++][c][k] = outcome_of([&] { return target_select(source, target, grid); });
    });

    assemble(table, outcomes, std::vector<std::vector<double>>(rows, std::vector<double>(cols, source_n)));
    common_metadata(table, cfg, grid, cfg.repeats);
    table.metadata.emplace_back("source_samples", cfg.samples_per_class
                                                      ? std::to_string(*cfg.samples_per_class) + " per class"
                                                      : std::to_string(cfg.source_samples));
    table.metadata.emplace_back("target_samples", std::to_string(cfg.target_samples));
    table.metadata.emplace_back("target_labeling", cfg.get("target_labeling"));
    return table;
}

// ---------------------------------------------------------------------------

const std::array<Hospital, 4>& hospitals() {
    static const std::array<Hospital, 4> list{{
        {'C', "Cleveland", "processed.cleveland.data"},
        {'V', "Virginia", "processed.va.data"},
        {'H', "Hungary", "processed.hungarian.data"},
        {'S', "Switzerland", "processed.switzerland.data"},
    }};
    return list;
}

const std::vector<std::pair<std::size_t, std::size_t>>& heart_pairs() {
    // C V, C H, C S, V H, V S, H S, V C, H C, S C, H V, S V, S H
    static const std::vector<std::pair<std::size_t, std::size_t>> pairs{
        {0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}, {1, 0}, {2, 0}, {3, 0}, {2, 1}, {3, 1}, {3, 2}};
    return pairs;
}

std::array<LabeledDataset, 4> load_hospitals(const std::filesystem::path& data_dir) {
    std::array<LabeledDataset, 4> out;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& h = hospitals()[i];
        const auto path = data_dir / h.file;
        if (!std::filesystem::exists(path)) {
            throw IoError(std::string(h.name) + " data file not found: '" + path.string() + "'");
        }
        out[i] = load_uci_heart(path, h.name);
    }
    return out;
}

ResultTable run_heart(const ExperimentConfig& cfg, const std::filesystem::path& data_dir) {
    return run_heart(cfg, load_hospitals(data_dir));
}

ResultTable run_heart(const ExperimentConfig& cfg, const std::array<LabeledDataset, 4>& raw) {
    cfg.validate();
    const LambdaGrid grid = make_grid(cfg);
    const auto& pairs = heart_pairs();
    const std::size_t repeats = cfg.heart_repeats;

    ResultTable table;
    table.title = "Heart disease: mean and standard error of lambda-hat";
    table.corner_label = "X Z";
    for (const auto& [s, t] : pairs) {
        table.row_labels.push_back(std::string{hospitals()[s].letter, ' ', hospitals()[t].letter});
    }
    table.column_labels.emplace_back(kRowLambdaV);
    for (Estimator e : cfg.estimators) table.column_labels.emplace_back(estimator_label(e));
    table.column_labels.emplace_back(kRowLambdaZ);

    const std::size_t cols = table.column_labels.size();
    std::vector<std::vector<std::vector<Outcome>>> outcomes(
        pairs.size(), std::vector<std::vector<Outcome>>(cols, std::vector<Outcome>(repeats)));
    std::vector<std::vector<double>> sizes(pairs.size(), std::vector<double>(cols, 0.0));
    std::vector<std::string> removed(pairs.size());

    // Features are dropped from both domains when either exceeds the threshold.
    std::vector<std::pair<LabeledDataset, LabeledDataset>> prepared(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto& src = raw[pairs[p].first];
        const auto& tgt = raw[pairs[p].second];
        std::vector<std::string> drop;
        const auto fs = missing_fractions(src);
        const auto ft = missing_fractions(tgt);
        for (std::size_t j = 0; j < src.dim(); ++j) {
            if (fs[j] > cfg.missing_removal_threshold || ft[j] > cfg.missing_removal_threshold) {
                drop.push_back(src.feature_names()[j]);
            }
        }
        auto source = preprocess(src, cfg.missing_removal_threshold, drop).first;
        auto target = preprocess(tgt, cfg.missing_removal_threshold, drop).first;
        for (std::size_t i = 0; i < drop.size(); ++i) removed[p] += (i ? "," : "") + drop[i];
        prepared[p] = {std::move(source), std::move(target)};
        std::fill(sizes[p].begin(), sizes[p].end(), static_cast<double>(prepared[p].first.size()));
    }

    // Deterministic parts (lambda_Z and the seed-free estimators) once per pair.
    std::vector<std::vector<std::optional<WeightVector>>> fixed_weights(
        pairs.size(), std::vector<std::optional<WeightVector>>(cfg.estimators.size()));
    std::vector<std::vector<std::string>> fixed_errors(pairs.size(),
                                                       std::vector<std::string>(cfg.estimators.size()));
    std::vector<Outcome> oracle(pairs.size());
    parallel_for(pairs.size(), cfg.jobs, [&](std::size_t p) {
        const auto& [source, target] = prepared[p];
        for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
            if (cfg.estimators[e] == Estimator::kliep) continue;
            try {
                fixed_weights[p][e] = estimate(cfg.estimators[e], source.features(), target.features(), cfg,
                                               cfg.heart_rg_variance_floor, 0);
            } catch (const Error& err) {
                fixed_errors[p][e] = err.what();
            }
        }
        const LabeledDataset s = cfg.append_intercept ? with_intercept(source) : source;
        const LabeledDataset t = cfg.append_intercept ? with_intercept(target) : target;
        oracle[p] = outcome_of([&] { return target_select(s, t, grid); });
    });

    parallel_for(pairs.size() * repeats, cfg.jobs, [&](std::size_t task) {
        const std::size_t p = task / repeats;
        const std::size_t k = task % repeats;
        const auto& [raw_source, raw_target] = prepared[p];
        Rng rng = make_rng(cfg.seed, {2, p, k});
        const SplitPlan plan = make_split_plan(raw_source.size(), cfg.fold_count, rng);
        const std::uint64_t kliep_seed = rng();
        const LabeledDataset source = cfg.append_intercept ? with_intercept(raw_source) : raw_source;

        std::size_t col = 0;
        outcomes[p][col++][k] = outcome_of([&] { return cv_select(source, grid, plan); });
        for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
            outcomes[p][col++][k] = outcome_of([&] {
                if (cfg.estimators[e] == Estimator::kliep) {
                    const WeightVector w = estimate(Estimator::kliep, raw_source.features(), raw_target.features(),
                                                    cfg, cfg.heart_rg_variance_floor, kliep_seed);
                    return cv_select(source, grid, plan, w, cfg.weighted_mse_mode);
                }
                if (!fixed_weights[p][e]) throw EstimationError(fixed_errors[p][e]);
                return cv_select(source, grid, plan, *fixed_weights[p][e], cfg.weighted_mse_mode);
            });
        }
        outcomes[p][col++][k] = oracle[p];
    });

    assemble(table, outcomes, sizes);
    common_metadata(table, cfg, grid, repeats);
    table.metadata.emplace_back("repetition_semantics",
                                "each repetition re-draws the CV split plan and the KLIEP width-selection folds");
    table.metadata.emplace_back("standardization", "each domain z-scored independently");
    table.metadata.emplace_back("missing_removal_threshold", cfg.get("missing_removal_threshold"));
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        table.metadata.emplace_back("removed_features[" + table.row_labels[p] + "]",
                                    removed[p].empty() ? "none" : removed[p]);
    }
    return table;
}

// ---------------------------------------------------------------------------

namespace {

struct SourceMoments {
    double second = 0.0;  // E[x^2]
    double cross = 0.0;   // E[x y]
};

SourceMoments source_moments(const ShiftProblem& problem) {
    SourceMoments m;
    for (std::size_t k = 0; k < 2; ++k) {
        const auto& c = problem.source_conditionals[k];
        const double label = k == 1 ? 1.0 : -1.0;
        m.second += problem.class_priors[k] * (c.variance() + c.mean() * c.mean());
        m.cross += problem.class_priors[k] * label * c.mean();
    }
    return m;
}

double target_cross_moment(const ShiftProblem& problem, TargetLabeling labeling) {
    const auto& mix = problem.target_marginal;
    if (labeling == TargetLabeling::component) {
        if (mix.components().size() != 2) throw ArgumentError("component labeling needs two target components");
        return mix.weights()[1] * mix.components()[1].mean() - mix.weights()[0] * mix.components()[0].mean();
    }
    // E[z (2 p(+|z) - 1)], integrated component by component
    double total = 0.0;
    for (std::size_t k = 0; k < mix.components().size(); ++k) {
        const auto& c = mix.components()[k];
        const auto f = [&](double z) { return z * (2.0 * source_posterior(problem, z) - 1.0) * c.pdf(z); };
        const double half_width = 40.0 * c.stddev();
        total += mix.weights()[k] * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                                        f, c.mean() - half_width, c.mean() + half_width, 15, 1e-12);
    }
    return total;
}

std::vector<double> curve_from_moments(const LambdaGrid& grid, std::size_t n, const SourceMoments& src,
                                       double eval_second, double eval_cross) {
    std::vector<double> out;
    const double nn = static_cast<double>(n);
    for (double lambda : grid.values()) {
        const double denom = nn * src.second + lambda;
        if (!(denom > kSingularRcond * nn * src.second)) {
            out.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        const double h = nn * src.cross / denom;
        out.push_back(1.0 - 2.0 * h * eval_cross + h * h * eval_second);
    }
    return out;
}

}  // namespace

std::vector<double> population_target_mse(const ShiftProblem& problem, const LambdaGrid& grid, std::size_t n,
                                          TargetLabeling labeling) {
    return curve_from_moments(grid, n, source_moments(problem), problem.target_marginal.second_moment(),
                              target_cross_moment(problem, labeling));
}

std::vector<double> population_source_mse(const ShiftProblem& problem, const LambdaGrid& grid, std::size_t n) {
    const SourceMoments m = source_moments(problem);
    return curve_from_moments(grid, n, m, m.second, m.cross);
}

MseCurves compute_mse_curves(const ExperimentConfig& cfg) {
    cfg.validate();
    MseCurves out{make_grid(cfg), cfg.curve_variances, {}, {}};
    const std::size_t n = cfg.samples_per_class ? 2 * *cfg.samples_per_class : cfg.source_samples;
    for (double v : cfg.curve_variances) {
        auto curve = population_target_mse(ShiftProblem::variance_shift(v), out.grid, n, cfg.target_labeling);
        const auto best = std::min_element(curve.begin(), curve.end());
        out.argmin.push_back(out.grid.values()[static_cast<std::size_t>(best - curve.begin())]);
        out.mse.push_back(std::move(curve));
    }
    return out;
}

std::string format_mse_curves(const MseCurves& curves) {
    std::ostringstream out;
    char buf[64];
    out << "lambda";
    for (double v : curves.variances) out << "\tsigma2_Z=" << fmt_number(v);
    out << "\n";
    for (std::size_t i = 0; i < curves.grid.size(); ++i) {
        out << fmt_number(curves.grid.values()[i]);
        for (const auto& curve : curves.mse) {
            std::snprintf(buf, sizeof buf, "%.10g", curve[i]);
            out << "\t" << buf;
        }
        out << "\n";
    }
    out << "argmin";
    for (double a : curves.argmin) out << "\t" << fmt_number(a);
    out << "\n";
    return out.str();
}

void emit_mse_curves(const ExperimentConfig& cfg, const std::filesystem::path& path) {
    write_text_file(path, format_mse_curves(compute_mse_curves(cfg)));
}

}  // namespace iwcv
