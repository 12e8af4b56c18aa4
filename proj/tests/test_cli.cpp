#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"
#include "isocl/feature_io.hpp"
#include "isocl/isotropy.hpp"
#include "isocl/synthetic.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;
namespace t = isocl::testing;
using nlohmann::json;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("isocl_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunResult run(const std::string& args) const {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = std::string(ISOCL_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  // Small but complete scenario: 10 classes in 6 dimensions, a few epochs.
  fs::path tiny_config(const std::string& extra) const {
    return write("run.cfg",
                 "data.dim = 6\n"
                 "data.n = 40\n"
                 "eval_per_class = 15\n"
                 "epochs_base = 2\n"
                 "epochs_per_class = 1\n"
                 "centralized_epochs = 2\n"
                 "batch_size = 32\n"
                 "encoder.hidden = 12\n"
                 "encoder.latent = 6\n"
                 "buffer_capacity = 30\n"
                 "probe_epochs = 20\n" +
                     extra);
  }

  fs::path dir_;
};

TEST_F(CliTest, MetricsOnIsotropicGaussianFile) {
  auto rng = t::make_rng(21);
  const isocl::FeatureMatrix x(t::random_gaussian(8, 1000, rng));
  const fs::path file = dir_ / "iso.csv";
  isocl::write_feature_csv(file, x);
  const RunResult r = run("metrics " + file.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["dimension"], 8);
  EXPECT_EQ(j["sample_count"], 1000);
  EXPECT_GE(j["iso_entropy"].get<double>(), 0.99);
  EXPECT_TRUE(j["ratio"].is_null());
}

TEST_F(CliTest, MetricsOnSingleActiveColumnIsZero) {
  std::string text = "label,f0,f1,f2\n";
  for (int i = 0; i < 20; ++i) text += ",0.5" + std::to_string(i) + ",0,0\n";
  const RunResult r = run("metrics " + write("line.csv", text).string());
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["iso_score"].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(j["iso_entropy"].get<double>(), 0.0, 1e-12);
}

TEST_F(CliTest, MetricsWithClassGeometry) {
  const RunResult r = run("metrics --class-geometry " +
                          write("two.csv", "label,f0,f1\n0,1,0.1\n0,1,-0.1\n1,-1,0.1\n1,-1,-0.1\n").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["num_classes"], 2);
  EXPECT_GT(j["ratio"].get<double>(), 1.0);
}

TEST_F(CliTest, MalformedRowReportsLineNumber) {
  const RunResult r = run("metrics " + write("bad.csv", "label,f0,f1\n0,1,2\n1,3,oops\n").string());
  EXPECT_EQ(r.code, isocl::cli::kExitInputError);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST_F(CliTest, MissingFileAndBadArgumentsAreInputErrors) {
  EXPECT_EQ(run("metrics " + (dir_ / "absent.csv").string()).code, isocl::cli::kExitInputError);
  EXPECT_EQ(run("synth --rho notanumber").code, isocl::cli::kExitInputError);
  EXPECT_EQ(run("").code, isocl::cli::kExitInputError);
}

TEST_F(CliTest, ConstantFeaturesAreDegenerate) {
  const RunResult r = run("metrics " + write("flat.csv", "label,f0,f1\n,1,2\n,1,2\n,1,2\n").string());
  EXPECT_EQ(r.code, isocl::cli::kExitDegenerate);
}

TEST_F(CliTest, SynthWritesSweepAndMeansDeterministically) {
  const std::string args = "synth --n 100 --rho 0,2000,5000,10000,20000 --seeds 5 --out ";
  ASSERT_EQ(run(args + (dir_ / "a").string()).code, 0);
  ASSERT_EQ(run(args + (dir_ / "b").string() + " --threads 3").code, 0);
  const std::string sweep = slurp(dir_ / "a" / "sweep.csv");
  const std::string means = slurp(dir_ / "a" / "sweep_mean.csv");
  EXPECT_EQ(lines_of(sweep).size(), 26u);
  EXPECT_EQ(lines_of(means).size(), 6u);
  EXPECT_EQ(sweep, slurp(dir_ / "b" / "sweep.csv"));
  EXPECT_EQ(means, slurp(dir_ / "b" / "sweep_mean.csv"));

  // Entropy falls as the stretch grows.
  const auto rows = lines_of(means);
  double prev = 2.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double e = std::stod(rows[i].substr(rows[i].find(',') + 1));
    EXPECT_LT(e, prev) << rows[i];
    prev = e;
  }
}

TEST_F(CliTest, SynthDumpRoundTripsThroughMetrics) {
  const fs::path dump = dir_ / "dump.csv";
  ASSERT_EQ(run("synth --dim 8 --clusters 3 --k 2 --n 50 --rho 7 --seed-list 4 --out " + dir_.string() +
                " --dump " + dump.string())
                .code,
            0);
  const RunResult r = run("metrics " + dump.string());
  ASSERT_EQ(r.code, 0) << r.err;
  isocl::ClusterSpec s = isocl::ClusterSpec::reference(8, 3);
  s.scaled_dims = 2;
  s.samples_per_cluster = 50;
  s.rho = 7.0;
  s.seed = 4;
  const auto x = isocl::sample_clusters(s);
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["iso_entropy"].get<double>(), isocl::iso_entropy(x), 1e-12);
  EXPECT_NEAR(j["iso_score"].get<double>(), isocl::iso_score(x), 1e-12);
}

TEST_F(CliTest, SynthRejectsNegativeRho) {
  EXPECT_EQ(run("synth --rho -1 --out " + dir_.string()).code, isocl::cli::kExitInputError);
}

TEST_F(CliTest, SimulateIncrementalWritesOneRecordPerExperience) {
  const RunResult r = run("simulate " + tiny_config("loss = co2l\n").string() + " --out " + dir_.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto records = lines_of(slurp(dir_ / "metrics.ndjson"));
  ASSERT_EQ(records.size(), 5u);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const json j = json::parse(records[i]);
    EXPECT_EQ(j["experience"], static_cast<int>(i));
    EXPECT_EQ(j["loss"], "co2l");
    EXPECT_EQ(j["classes"].size(), 2u);
  }
  const auto summary = lines_of(slurp(dir_ / "summary.csv"));
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0], isocl::cli::kSummaryHeader);
}

TEST_F(CliTest, SimulateCentralizedWritesOneRecord) {
  const RunResult r = run("simulate " + tiny_config("scenario = centralized\nloss = supcon\n").string() +
                          " --out " + dir_.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines_of(slurp(dir_ / "metrics.ndjson")).size(), 1u);
}

TEST_F(CliTest, SimulateLambdaSweepAcrossSeeds) {
  const RunResult r = run("simulate " + tiny_config("loss = co2l+iso\n").string() +
                          " --lambda-iso 0,0.5,1,2 --seeds 2 --threads 2 --out " + dir_.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto summary = lines_of(slurp(dir_ / "summary.csv"));
  ASSERT_EQ(summary.size(), 1u + 4u * 2u);
  EXPECT_EQ(lines_of(slurp(dir_ / "metrics.ndjson")).size(), 8u * 5u);
  // Seed-major, lambda-minor.
  EXPECT_EQ(summary[1].rfind("20x5,co2l+iso,0,0,", 0), 0u) << summary[1];
  EXPECT_EQ(summary[8].rfind("20x5,co2l+iso,2,1,", 0), 0u) << summary[8];
}

TEST_F(CliTest, SimulateLambdaOnWrongVariantIsRejected) {
  const RunResult r =
      run("simulate " + tiny_config("loss = co2l\n").string() + " --lambda-iso 1 --out " + dir_.string());
  EXPECT_EQ(r.code, isocl::cli::kExitInputError);
  EXPECT_NE(r.err.find("lambda_iso"), std::string::npos) << r.err;
}

TEST_F(CliTest, SimulateConfigErrorsCarryLineNumbers) {
  const RunResult r = run("simulate " + tiny_config("tau = -1\nnot a pair\n").string());
  EXPECT_EQ(r.code, isocl::cli::kExitInputError);
  EXPECT_NE(r.err.find("line"), std::string::npos) << r.err;
}

TEST_F(CliTest, SimulateDivergenceExitsWithFour) {
  const RunResult r = run("simulate " + tiny_config("loss = supcon\nlr = 1e200\n").string() + " --out " +
                          dir_.string());
  EXPECT_EQ(r.code, isocl::cli::kExitDiverged) << r.err;
  EXPECT_NE(r.err.find("step"), std::string::npos) << r.err;
}

TEST(CliFormatTest, SweepCsvLayout) {
  std::ostringstream out;
  isocl::cli::write_sweep_csv(out, {{2000.0, 0.25, 0.125, 3}});
  EXPECT_EQ(out.str(), "rho,seed,iso_entropy,iso_score\n2000,3,0.25,0.125\n");
}

}  // namespace
