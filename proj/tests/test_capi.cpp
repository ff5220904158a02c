#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "iwcv/iwcv.h"

namespace {

std::string config_value(const iwcv_config* cfg, const char* key) {
    size_t needed = 0;
    EXPECT_EQ(iwcv_config_get(cfg, key, nullptr, 0, &needed), IWCV_ERR_INSUFFICIENT_BUFFER);
    std::string buf(needed, '\0');
    EXPECT_EQ(iwcv_config_get(cfg, key, buf.data(), buf.size(), &needed), IWCV_OK);
    buf.resize(needed - 1);
    return buf;
}

iwcv_config* small_config() {
    iwcv_config* cfg = nullptr;
    EXPECT_EQ(iwcv_config_create(&cfg), IWCV_OK);
    EXPECT_EQ(iwcv_config_load_string(cfg,
                                      "repeats=2\nheart_repeats=1\nsource_samples=30\ntarget_samples=30\n"
                                      "target_variances=2\ngrid_min=-10\ngrid_max=100\n"),
              IWCV_OK);
    return cfg;
}

}  // namespace

TEST(CApi, VersionAndStatusStrings) {
    EXPECT_STREQ(iwcv_version(), "0.1.0");
    EXPECT_STRNE(iwcv_status_string(IWCV_ERR_IO), iwcv_status_string(IWCV_OK));
}

TEST(CApi, ConfigRoundTrip) {
    iwcv_config* cfg = nullptr;
    ASSERT_EQ(iwcv_config_create(&cfg), IWCV_OK);
    EXPECT_EQ(iwcv_config_set(cfg, "repeats", "12"), IWCV_OK);
    EXPECT_EQ(config_value(cfg, "repeats"), "12");
    EXPECT_EQ(iwcv_config_validate(cfg), IWCV_OK);
    char hash[17];
    size_t needed = 0;
    EXPECT_EQ(iwcv_config_hash(cfg, hash, sizeof hash, &needed), IWCV_OK);
    EXPECT_EQ(std::strlen(hash), 16u);
    iwcv_config_destroy(cfg);
}

TEST(CApi, ConfigErrors) {
    iwcv_config* cfg = nullptr;
    ASSERT_EQ(iwcv_config_create(&cfg), IWCV_OK);
    EXPECT_EQ(iwcv_config_set(cfg, "no_such_key", "1"), IWCV_ERR_CONFIG);
    EXPECT_NE(std::string(iwcv_last_error()).find("no_such_key"), std::string::npos);
    EXPECT_EQ(iwcv_config_load_string(cfg, "repeats\n"), IWCV_ERR_CONFIG);
    EXPECT_EQ(iwcv_config_load_file(cfg, "/nonexistent.cfg"), IWCV_ERR_CONFIG);
    EXPECT_EQ(iwcv_config_set(cfg, "fold_count", "1"), IWCV_OK);
    EXPECT_EQ(iwcv_config_validate(cfg), IWCV_ERR_CONFIG);
    iwcv_config_destroy(cfg);
}

TEST(CApi, NullPointers) {
    EXPECT_EQ(iwcv_config_create(nullptr), IWCV_ERR_NULL_POINTER);
    EXPECT_EQ(iwcv_config_set(nullptr, "repeats", "1"), IWCV_ERR_NULL_POINTER);
    EXPECT_EQ(iwcv_run_artificial(nullptr, nullptr), IWCV_ERR_NULL_POINTER);
    EXPECT_EQ(iwcv_table_shape(nullptr, nullptr, nullptr), IWCV_ERR_NULL_POINTER);
    iwcv_config_destroy(nullptr);
    iwcv_table_destroy(nullptr);
    iwcv_dataset_destroy(nullptr);
}

TEST(CApi, ShortBufferReportsNeededSize) {
    iwcv_config* cfg = nullptr;
    ASSERT_EQ(iwcv_config_create(&cfg), IWCV_OK);
    char small[2];
    size_t needed = 0;
    EXPECT_EQ(iwcv_config_get(cfg, "seed", small, sizeof small, &needed), IWCV_ERR_INSUFFICIENT_BUFFER);
    EXPECT_EQ(needed, std::string("20160101").size() + 1);
    iwcv_config_destroy(cfg);
}

TEST(CApi, ArtificialTable) {
    iwcv_config* cfg = small_config();
    iwcv_table* table = nullptr;
    ASSERT_EQ(iwcv_run_artificial(cfg, &table), IWCV_OK) << iwcv_last_error();
    size_t rows = 0, cols = 0;
    ASSERT_EQ(iwcv_table_shape(table, &rows, &cols), IWCV_OK);
    EXPECT_EQ(rows, 7u);
    EXPECT_EQ(cols, 1u);
    char label[32];
    size_t needed = 0;
    EXPECT_EQ(iwcv_table_row_label(table, 6, label, sizeof label, &needed), IWCV_OK);
    EXPECT_STREQ(label, "lambda_Z");
    EXPECT_EQ(iwcv_table_column_label(table, 0, label, sizeof label, &needed), IWCV_OK);
    EXPECT_STREQ(label, "2.0");
    iwcv_cell cell;
    EXPECT_EQ(iwcv_table_cell(table, 0, 0, &cell), IWCV_OK);
    EXPECT_EQ(cell.successes + cell.failures, 2u);
    EXPECT_EQ(iwcv_table_cell(table, 99, 0, &cell), IWCV_ERR_ARGUMENT);
    size_t failed = 0, total = 0;
    EXPECT_EQ(iwcv_table_failures(table, &failed, &total), IWCV_OK);
    EXPECT_EQ(total, 14u);

    EXPECT_EQ(iwcv_table_format(table, "csv", nullptr, 0, &needed), IWCV_ERR_INSUFFICIENT_BUFFER);
    std::string csv(needed, '\0');
    EXPECT_EQ(iwcv_table_format(table, "csv", csv.data(), csv.size(), &needed), IWCV_OK);
    EXPECT_NE(csv.find("lambda_V"), std::string::npos);
    EXPECT_EQ(iwcv_table_format(table, "xlsx", csv.data(), csv.size(), &needed), IWCV_ERR_CONFIG);
    EXPECT_EQ(iwcv_table_metadata(table, "seed", label, sizeof label, &needed), IWCV_OK);
    EXPECT_STREQ(label, "20160101");
    EXPECT_EQ(iwcv_table_write(table, "csv", "/proc/iwcv/x.csv"), IWCV_ERR_IO);
    iwcv_table_destroy(table);
    iwcv_config_destroy(cfg);
}

TEST(CApi, HeartMissingDirectoryIsIo) {
    iwcv_config* cfg = small_config();
    iwcv_table* table = nullptr;
    EXPECT_EQ(iwcv_run_heart(cfg, "/nonexistent/heart", &table), IWCV_ERR_IO);
    EXPECT_EQ(table, nullptr);
    EXPECT_EQ(iwcv_run_heart(cfg, IWCV_FIXTURE_DIR, &table), IWCV_OK) << iwcv_last_error();
    size_t rows = 0, cols = 0;
    EXPECT_EQ(iwcv_table_shape(table, &rows, &cols), IWCV_OK);
    EXPECT_EQ(rows, 12u);
    iwcv_table_destroy(table);
    iwcv_config_destroy(cfg);
}

TEST(CApi, DatasetAndRidge) {
    // X = I (2x2), y = (1, -1): w = y / (1 + lambda)
    const double x[] = {1, 0, 0, 1};
    const double y[] = {1, -1};
    iwcv_dataset* d = nullptr;
    ASSERT_EQ(iwcv_dataset_create(x, y, 2, 2, &d), IWCV_OK);
    double w[2];
    EXPECT_EQ(iwcv_fit_ridge(d, 1.0, w), IWCV_OK);
    EXPECT_NEAR(w[0], 0.5, 1e-12);
    EXPECT_NEAR(w[1], -0.5, 1e-12);
    EXPECT_EQ(iwcv_fit_ridge(d, -1.0, w), IWCV_ERR_SINGULAR);
    size_t n = 0, dim = 0;
    EXPECT_EQ(iwcv_dataset_shape(d, &n, &dim), IWCV_OK);
    EXPECT_EQ(n, 2u);
    double back[4];
    EXPECT_EQ(iwcv_dataset_copy(d, back, nullptr), IWCV_OK);
    EXPECT_EQ(back[3], 1.0);
    iwcv_dataset_destroy(d);

    const double bad_y[] = {1, 0};
    EXPECT_EQ(iwcv_dataset_create(x, bad_y, 2, 2, &d), IWCV_ERR_ARGUMENT);
}

TEST(CApi, LoadAndPreprocessFixture) {
    iwcv_dataset* raw = nullptr;
    ASSERT_EQ(iwcv_dataset_load_uci_heart(IWCV_FIXTURE_DIR "/processed.cleveland.data", "Cleveland", &raw), IWCV_OK);
    iwcv_dataset* clean = nullptr;
    ASSERT_EQ(iwcv_dataset_preprocess(raw, 0.99, &clean), IWCV_OK);
    size_t n = 0, d = 0;
    iwcv_dataset_shape(clean, &n, &d);
    EXPECT_EQ(n, 10u);
    std::vector<double> f(n * d);
    iwcv_dataset_copy(clean, f.data(), nullptr);
    for (double v : f) EXPECT_TRUE(std::isfinite(v));
    iwcv_dataset_destroy(clean);
    iwcv_dataset_destroy(raw);
    EXPECT_EQ(iwcv_dataset_load_uci_heart("/nonexistent.data", "x", &raw), IWCV_ERR_IO);
}

TEST(CApi, EstimateWeightsAndSelect) {
    const double source[] = {0, 10};
    const double target[] = {1, 2, 9};
    double w[2];
    ASSERT_EQ(iwcv_estimate_weights("nn", source, 2, target, 3, 1, nullptr, 0, w), IWCV_OK);
    EXPECT_EQ(w[0], 3.0);
    EXPECT_EQ(w[1], 2.0);
    EXPECT_EQ(iwcv_estimate_weights("svm", source, 2, target, 3, 1, nullptr, 0, w), IWCV_ERR_CONFIG);

    std::vector<double> x, y;
    for (int i = 0; i < 40; ++i) {
        x.push_back(std::sin(i * 0.7) + (i % 2 ? 1.0 : -1.0));
        y.push_back(i % 2 ? 1.0 : -1.0);
    }
    iwcv_dataset* d = nullptr;
    ASSERT_EQ(iwcv_dataset_create(x.data(), y.data(), 40, 1, &d), IWCV_OK);
    iwcv_config* cfg = small_config();
    double a = 0, b = 0;
    EXPECT_EQ(iwcv_cv_select(d, cfg, nullptr, 5, &a), IWCV_OK) << iwcv_last_error();
    const std::vector<double> ones(40, 1.0);
    EXPECT_EQ(iwcv_cv_select(d, cfg, ones.data(), 5, &b), IWCV_OK);
    EXPECT_EQ(a, b);
    EXPECT_GE(a, -10.0);
    EXPECT_LE(a, 100.0);
    iwcv_config_destroy(cfg);
    iwcv_dataset_destroy(d);
}
