// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "datagen/dataset.hpp"
#include "inference/checkpoint.hpp"
#include "pipeline/commands.hpp"
#include "pipeline/manifest.hpp"
#include "pipeline/report.hpp"
#include "pipeline/run_config.hpp"

namespace fs = std::filesystem;
using namespace mssde;
using namespace mssde::pipeline;

namespace {

const char* kTiny = R"(# tiny advection run
problem = advection
points = 16
t_end = 0.08
dt = 1e-3
obs_every = 10
sigma = 0.05
ic_w_lo = 0.1
ic_w_hi = 0.2
n_train = 2
n_val = 1
n_test = 2
seed = 11

coarse = 4
n_eta = 1
enc_filters = 2,3
enc_kernel = 5
macro_hidden = 5
macro_layers = 1
micro_hidden = 4
micro_layers = 1
m = 4
n_quad = 8
batch = 2
steps = 4
val_every = 2
val_paths = 3
log_every = 1
n_paths = 5
sindy_thresholds = 0.01,0.1
)";

std::string fresh_dir(const std::string& name) {
  const auto d = fs::path(::testing::TempDir()) / ("mssde_pipeline_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d.string();
}

RunOptions opts(const std::string& dir) {
  RunOptions o;
  o.out_dir = dir;
  return o;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(RunConfig, DefaultsCoverEveryKey) {
  const RunConfig c;
  EXPECT_EQ(c.str("problem"), "advection_desk");
  EXPECT_EQ(c.size("n_paths"), 64u);
  EXPECT_DOUBLE_EQ(c.real("dmd_lambda"), 0.01);
  EXPECT_FALSE(c.is_set("points"));
  std::size_t lines = 0;
  for (char ch : c.resolved()) lines += ch == '\n';
  EXPECT_EQ(lines, RunConfig::keys().size());
}

TEST(RunConfig, ParsesCommentsAndLists) {
  const auto c = RunConfig::parse("  seed = 7   # trailing\n\n# only a comment\nsindy_orders = 1, 2\nwide_kernel=false\n");
  EXPECT_EQ(c.u64("seed"), 7u);
  EXPECT_EQ(c.sizes("sindy_orders"), (std::vector<std::size_t>{1, 2}));
  EXPECT_FALSE(c.flag("wide_kernel"));
  EXPECT_NE(c.resolved().find("seed = 7\n"), std::string::npos);
}

TEST(RunConfig, RejectsUnknownRepeatedAndMalformed) {
  EXPECT_THROW(RunConfig::parse("nope = 1\n"), UsageError);
  EXPECT_THROW(RunConfig::parse("seed = 1\nseed = 2\n"), UsageError);
  EXPECT_THROW(RunConfig::parse("seed\n"), UsageError);
  const auto c = RunConfig::parse("seed = abc\nsigma = 1e-2x\npositional = maybe\n");
  EXPECT_THROW(c.u64("seed"), UsageError);
  EXPECT_THROW(c.real("sigma"), UsageError);
  EXPECT_THROW(c.flag("positional"), UsageError);
  try {
    RunConfig::parse("seed = 1\nbogus = 2\n", "run.cfg");
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("run.cfg:2"), std::string::npos);
  }
}

TEST(Manifest, GitBlobHash) {
  // Values from `git hash-object`.
  EXPECT_EQ(git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(git_blob_sha1("what is up, doc?"), "bd9dbf5aae1a3862dd1526723246b20206e5fc37");
}

TEST(Report, SummaryIsMeanAndStdOfTrajectoryMeans) {
  ErrorReport r{"m", {}};
  // trajectory 4 errors {0.1, 0.3}, trajectory 2 errors {0.5, 0.7, 0.9}
  r.rows = {{4, 0.0, 0.1}, {4, 0.1, 0.3}, {2, 0.0, 0.5}, {2, 0.1, 0.7}, {2, 0.2, 0.9}};
  EXPECT_EQ(r.trajectory_ids(), (std::vector<std::size_t>{4, 2}));
  const auto s = summarize(r);
  EXPECT_EQ(s.trajectories, 2u);
  EXPECT_NEAR(s.mean, (0.2 + 0.7) / 2, 1e-15);
  EXPECT_NEAR(s.std, 0.25, 1e-15);
}

TEST(Report, PerfectPredictionsSummarizeToZero) {
  ErrorReport r{"oracle", {{0, 0.0, 0.0}, {0, 0.5, 0.0}, {1, 0.0, 0.0}}};
  const auto s = summarize(r);
  EXPECT_EQ(s.mean, 0.0);
  EXPECT_EQ(s.std, 0.0);
  EXPECT_THROW(summarize(ErrorReport{"empty", {}}), DataError);
}

TEST(Report, FormatRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) EXPECT_EQ(std::stod(fmt(v)), v);
  EXPECT_EQ(fmt(INFINITY), "inf");
  EXPECT_EQ(fmt(NAN), "nan");
}

TEST(Commands, PresetSplitAndOverrides) {
  RunConfig c;
  c.set("problem", "advection");
  const auto s = problem_spec(c);
  EXPECT_EQ(s.n_traj(), 30u);
  EXPECT_EQ(s.n_train, 20u);
  EXPECT_EQ(s.n_val, 5u);
  EXPECT_EQ(s.n_test, 5u);
  c.set("sigma", "0");
  c.set("seed", "9");
  EXPECT_EQ(problem_spec(c).sigma, 0.0);
  EXPECT_EQ(problem_spec(c).seed, 9u);
  c.set("problem", "heat");
  EXPECT_THROW(problem_spec(c), UsageError);
}

TEST(Commands, GenerateIsReproducibleAndNoiselessAtZeroSigma) {
  auto c = RunConfig::parse(kTiny);
  const auto a = fresh_dir("gen_a"), b = fresh_dir("gen_b");
  cmd_generate(c, opts(a));
  cmd_generate(c, opts(b));
  EXPECT_EQ(file_blob_sha1(a + "/dataset.mst"), file_blob_sha1(b + "/dataset.mst"));
  EXPECT_TRUE(fs::exists(a + "/manifest_generate.json"));

  c.set("sigma", "0");
  const auto z = fresh_dir("gen_zero");
  cmd_generate(c, opts(z));
  const Dataset ds = read_dataset(z + "/dataset.mst");
  const ProblemSpec spec = problem_spec(c);
  const auto grid = problem_grid(spec);
  for (std::size_t k = 0; k < ds.trajectories.size(); ++k) {
    const auto& tr = ds.trajectories[k];
    const auto sim = simulate(spec, grid, tr.state(0));
    EXPECT_TRUE(sim.states == tr.states) << "trajectory " << k;
  }
}

class PipelineRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fresh_dir("run");
    const auto c = RunConfig::parse(kTiny);
    cmd_generate(c, opts(dir_));
    cmd_train(c, opts(dir_));
  }
  static std::string dir_;
};
std::string PipelineRun::dir_;

TEST_F(PipelineRun, TrainLogSchema) {
  const auto rows = read_csv(dir_ + "/train_log.csv");
  ASSERT_GT(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"step", "stage", "loglik", "integral", "elbo", "val_eps", "lr"}));
  std::set<std::string> stages;
  unsigned long prev = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 7u);
    const auto step = std::stoul(rows[i][0]);
    EXPECT_GT(step, prev);
    prev = step;
    stages.insert(rows[i][1]);
  }
  EXPECT_EQ(stages, (std::set<std::string>{"0", "1"}));
  for (auto f : {"stage0.ckpt", "stage1.ckpt", "best.ckpt", "last.ckpt", "manifest_train.json"}) {
    EXPECT_TRUE(fs::exists(dir_ + "/" + f)) << f;
  }
  const auto ck = inference::read_checkpoint(dir_ + "/best.ckpt");
  EXPECT_EQ(ck.meta.at("run_config").at("steps"), "4");
}

TEST_F(PipelineRun, ResumeAcrossStagesReproducesLog) {
  auto c = RunConfig::parse(kTiny);
  const auto d = fresh_dir("resume");
  fs::copy_file(dir_ + "/dataset.mst", d + "/dataset.mst");
  fs::copy_file(dir_ + "/dataset.mst.json", d + "/dataset.mst.json");
  auto c0 = c;
  c0.set("n_eta", "0");
  cmd_train(c0, opts(d));
  auto o = opts(d);
  o.resume = true;
  cmd_train(c, o);
  EXPECT_EQ(read_text(d + "/train_log.csv"), read_text(dir_ + "/train_log.csv"));
  EXPECT_EQ(read_text(d + "/stage1.ckpt"), read_text(dir_ + "/stage1.ckpt"));
}

TEST_F(PipelineRun, EvaluateSummaryMatchesErrorTable) {
  const auto c = RunConfig::parse(kTiny);
  const auto d = fresh_dir("eval");
  auto cc = c;
  cc.set("dataset", dir_ + "/dataset.mst");
  cc.set("checkpoint", dir_ + "/best.ckpt");
  cmd_evaluate(cc, opts(d));
  const auto rows = read_csv(d + "/errors.csv");
  EXPECT_EQ(rows[0], (std::vector<std::string>{"trajectory_id", "t", "epsilon"}));
  std::map<std::string, std::vector<double>> per;
  for (std::size_t i = 1; i < rows.size(); ++i) per[rows[i][0]].push_back(std::stod(rows[i][2]));
  ASSERT_EQ(per.size(), 2u);  // two test trajectories
  std::vector<double> means;
  for (auto& [id, v] : per) {
    EXPECT_EQ(v.size(), 9u);
    double s = 0.0;
    for (double e : v) s += e;
    means.push_back(s / v.size());
  }
  const double mean = (means[0] + means[1]) / 2;
  const double sd = std::abs(means[0] - means[1]) / 2;
  const auto sum = read_csv(d + "/summary.csv");
  EXPECT_NEAR(std::stod(sum[1][2]), mean, 1e-15);
  EXPECT_NEAR(std::stod(sum[1][3]), sd, 1e-15);
  const auto js = nlohmann::json::parse(read_text(d + "/summary.json"));
  EXPECT_EQ(js.at("config").at("seed"), "11");
}

TEST_F(PipelineRun, PredictIsDeterministicAcrossThreads) {
  auto c = RunConfig::parse(kTiny);
  c.set("dataset", dir_ + "/dataset.mst");
  c.set("checkpoint", dir_ + "/best.ckpt");
  const auto a = fresh_dir("pred_a"), b = fresh_dir("pred_b");
  cmd_predict(c, opts(a));
  auto ob = opts(b);
  ob.threads = 3;
  cmd_predict(c, ob);
  for (auto f : {"predictions.csv", "errors.csv", "spectrum.csv"}) {
    EXPECT_EQ(read_text(a + "/" + f), read_text(b + "/" + f)) << f;
  }
  const auto rows = read_csv(a + "/predictions.csv");
  EXPECT_EQ(rows[0], (std::vector<std::string>{"trajectory_id", "t", "index", "mean", "std"}));
  EXPECT_EQ(rows.size(), 1u + 2 * 9 * 16);
}

TEST_F(PipelineRun, GridMismatchIsDataError) {
  auto c = RunConfig::parse(kTiny);
  c.set("points", "32");
  c.set("coarse", "8");
  const auto d = fresh_dir("mismatch");
  cmd_generate(c, opts(d));
  c.set("checkpoint", dir_ + "/best.ckpt");
  EXPECT_THROW(cmd_evaluate(c, opts(d)), DataError);
}

TEST_F(PipelineRun, BaselinesReportThreeMethodsAtCheckpointLatentSize) {
  auto c = RunConfig::parse(kTiny);
  c.set("dataset", dir_ + "/dataset.mst");
  c.set("checkpoint", dir_ + "/best.ckpt");
  const auto a = fresh_dir("base_a"), b = fresh_dir("base_b");
  cmd_baseline(c, opts(a));
  cmd_baseline(c, opts(b));
  const auto ck = inference::read_checkpoint(dir_ + "/best.ckpt");
  const auto js = nlohmann::json::parse(read_text(a + "/summary_baselines.json"));
  ASSERT_EQ(js.at("methods").size(), 3u);
  EXPECT_EQ(js.at("details").at("n_latent"), ck.model.n_z());
  EXPECT_EQ(js.at("details").at("dmd").at("rank"), ck.model.n_z());
  EXPECT_EQ(js.at("details").at("n_latent_source"), "checkpoint");
  EXPECT_EQ(read_csv(a + "/summary_baselines.csv").size(), 4u);
  for (auto m : {"coarse_dns", "dmd", "sindy"}) {
    const std::string f = std::string("errors_") + m + ".csv";
    EXPECT_EQ(read_text(a + "/" + f), read_text(b + "/" + f)) << f;
    EXPECT_EQ(read_csv(a + "/" + f)[0], (std::vector<std::string>{"trajectory_id", "t", "epsilon"}));
  }
  c.set("methods", "dmd,gp");
  EXPECT_THROW(cmd_baseline(c, opts(fresh_dir("base_bad"))), UsageError);
}
