#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "iwcv/config.hpp"
#include "iwcv/error.hpp"
#include "iwcv/report.hpp"

using namespace iwcv;

namespace {

ResultTable one_cell_table() {
    ResultTable t;
    t.title = "demo";
    t.corner_label = "r";
    t.row_labels = {"a"};
    t.column_labels = {"x"};
    CellStats s;
    s.mean = 5.0;
    s.std_error = 20.0;
    s.successes = 1;
    s.failures = 1;
    t.cells = {{s}};
    t.metadata = {{"seed", "1"}};
    t.config_canonical = "seed=1\nrepeats=3\n";
    t.records = {{"a", "x", 0, true, 4.0, 0.04, false, ""}, {"a", "x", 1, false, 0.0, 0.0, false, "boom"}};
    return t;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST(ExperimentConfig, DefaultsValidate) {
    ExperimentConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.get("grid_min"), "-100");
    EXPECT_EQ(c.get("grid_max"), "500");
    EXPECT_EQ(c.get("fold_count"), "5");
    EXPECT_EQ(c.get("target_variances"), "0.1,0.5,1,2,3,4");
}

TEST(ExperimentConfig, SetGetRoundTripEveryKey) {
    ExperimentConfig c;
    for (const auto& key : ExperimentConfig::keys()) {
        ExperimentConfig d;
        d.set(key, c.get(key));
        EXPECT_EQ(d.get(key), c.get(key)) << key;
    }
}

TEST(ExperimentConfig, SetParsesTypedValues) {
    ExperimentConfig c;
    c.set("repeats", "7");
    c.set("estimators", "KMM,nn");
    c.set("target_labeling", "posterior");
    EXPECT_EQ(c.repeats, 7u);
    EXPECT_EQ(c.estimators, (std::vector<Estimator>{Estimator::kmm, Estimator::nn}));
    EXPECT_EQ(c.target_labeling, TargetLabeling::posterior);
}

TEST(ExperimentConfig, RejectsUnknownKeyAndBadValues) {
    ExperimentConfig c;
    EXPECT_THROW(c.set("no_such_key", "1"), ConfigError);
    EXPECT_THROW(c.get("no_such_key"), ConfigError);
    EXPECT_THROW(c.set("repeats", "-3"), ConfigError);
    EXPECT_THROW(c.set("grid_step", "abc"), ConfigError);
    EXPECT_THROW(c.set("estimators", "svm"), ConfigError);
}

TEST(ExperimentConfig, LoadReportsLineNumber) {
    ExperimentConfig c;
    std::istringstream in("# comment\nrepeats = 4\n\nbogus line\n");
    try {
        c.load(in);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    }
    EXPECT_EQ(c.repeats, 4u);
}

TEST(ExperimentConfig, LoadMissingFile) {
    ExperimentConfig c;
    EXPECT_THROW(c.load_file("/nonexistent/iwcv.cfg"), ConfigError);
}

TEST(ExperimentConfig, ValidateCatchesInvariants) {
    ExperimentConfig c;
    c.fold_count = 1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.grid_min = 10;
    c.grid_max = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.estimators.clear();
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(ExperimentConfig, HashIsStableAndSensitive) {
    ExperimentConfig a, b;
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_EQ(a.hash().size(), 16u);
    b.jobs = 8;
    b.out_dir = "elsewhere";
    EXPECT_EQ(a.hash(), b.hash());
    b.seed += 1;
    EXPECT_NE(a.hash(), b.hash());
}

TEST(Aggregate, MeanAndStandardError) {
    const std::vector<double> v{1, 2, 3, 4};
    const auto s = aggregate(v, 1, 4);
    EXPECT_DOUBLE_EQ(s.mean, 2.5);
    EXPECT_NEAR(s.std_error, std::sqrt(5.0 / 3.0) / 2.0, 1e-12);
    EXPECT_EQ(s.successes, 4u);
    EXPECT_EQ(s.failures, 1u);
    EXPECT_TRUE(s.boundary());
    EXPECT_EQ(aggregate(std::vector<double>{7}, 0, 0).std_error, 0.0);
}

TEST(FormatTable, EmptyTableHasOnlyHeader) {
    ResultTable t;
    t.corner_label = "r";
    const std::string csv = format_table(t, TableFormat::csv);
    EXPECT_EQ(csv, "# title=\nr\n");
    const std::string repeats = format_table(t, TableFormat::repeats_csv);
    EXPECT_EQ(repeats, "row,column,repeat,status,lambda_hat,lambda_over_n,boundary,error\n");
}

TEST(FormatTable, MarkdownMeanWithStandardErrorInParentheses) {
    const std::string md = format_table(one_cell_table(), TableFormat::markdown);
    EXPECT_NE(md.find("| a | 5 (20) |"), std::string::npos) << md;
}

TEST(FormatTable, CsvColumns) {
    const std::string csv = format_table(one_cell_table(), TableFormat::csv);
    EXPECT_NE(csv.find("r,x_mean,x_stderr,x_n,x_failed,x_boundary\n"), std::string::npos);
    EXPECT_NE(csv.find("a,5.000000,20.000000,1,1,0\n"), std::string::npos) << csv;
}

TEST(FormatTable, RepeatsRecordFailures) {
    const std::string r = format_table(one_cell_table(), TableFormat::repeats_csv);
    EXPECT_NE(r.find("a,x,1,failed,,,0,boom"), std::string::npos) << r;
}

TEST(FormatTable, ManifestIsValidJson) {
    const auto j = nlohmann::json::parse(format_table(one_cell_table(), TableFormat::manifest_json));
    EXPECT_EQ(j["title"], "demo");
    EXPECT_EQ(j["config"]["repeats"], "3");
    EXPECT_EQ(j["failures"]["total"], 1);
    EXPECT_EQ(j["failures"]["records"], 2);
}

TEST(WriteTable, ReEmissionIsByteIdentical) {
    const auto dir = std::filesystem::temp_directory_path() / "iwcv_report_test";
    std::filesystem::remove_all(dir);
    const auto t = one_cell_table();
    for (auto f : {TableFormat::csv, TableFormat::markdown, TableFormat::repeats_csv, TableFormat::manifest_json}) {
        write_table(t, f, dir / "a" / "out.txt");
        write_table(t, f, dir / "b" / "out.txt");
        EXPECT_EQ(slurp(dir / "a" / "out.txt"), slurp(dir / "b" / "out.txt"));
        EXPECT_EQ(slurp(dir / "a" / "out.txt"), format_table(t, f));
    }
    std::filesystem::remove_all(dir);
}

TEST(WriteTable, UnwritablePathIsIoError) {
    EXPECT_THROW(write_text_file("/proc/iwcv/nope.txt", "x"), IoError);
}

TEST(ParseTableFormat, Names) {
    EXPECT_EQ(parse_table_format("md"), TableFormat::markdown);
    EXPECT_EQ(parse_table_format("manifest"), TableFormat::manifest_json);
    EXPECT_THROW(parse_table_format("xlsx"), ConfigError);
}
