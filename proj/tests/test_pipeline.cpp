#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pingpong/pipeline.hpp"

using namespace pingpong;
namespace fs = std::filesystem;

namespace {

const fs::path kData = PINGPONG_DATA_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string what(const std::exception_ptr& e) {
  if (!e) return {};
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& x) {
    return x.what();
  }
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pingpong_pipe_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv(kOutputDirEnv);
  }
  void TearDown() override {
    fs::remove_all(dir_);
    unsetenv(kOutputDirEnv);
  }

  // The bundled toy run without the grid tier, on a coarser level grid.
  RunConfig quick_config() {
    auto c = load_run_config(kData / "toy_run.toml");
    c.stages = {"levels", "dme-map", "design-chain", "simulate-pseudospin", "simulate-rwa", "compare"};
    c.output_dir = dir_ / "out";
    return c;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(PipelineTest, BundledConfigParses) {
  const auto c = load_run_config(kData / "toy_run.toml");
  EXPECT_EQ(c.system_file, kData / "toy_system.toml");
  EXPECT_EQ(c.eig_grid, RadialGrid(1.0, 21.0, 2001));
  EXPECT_EQ(c.initial, (StateLabel{Electronic::X, 5, 4}));
  EXPECT_EQ(c.target, (StateLabel{Electronic::X, 0, 0}));
  EXPECT_EQ(c.n_states, 5);
  EXPECT_DOUBLE_EQ(c.search.min_detuning, 1e-4);
  EXPECT_NEAR(units::to_picoseconds(c.design.sigma), 2.0, 1e-12);
  EXPECT_EQ(c.stages.size(), 7u);
  EXPECT_NO_THROW(validate(c));
  const auto keys = level_keys(c);
  EXPECT_EQ(keys.size(), 10u);
}

TEST_F(PipelineTest, ConfigErrors) {
  auto write = [&](const std::string& text) {
    const auto p = dir_ / "run.toml";
    std::ofstream(p) << text;
    return p;
  };
  EXPECT_THROW(load_run_config(dir_ / "absent.toml"), ConfigError);
  EXPECT_THROW(load_run_config(write("[run]\nsystem = x.toml\ncolour = red\n")), ConfigError);
  EXPECT_THROW(load_run_config(write("[nonsense]\n")), ConfigError);
  EXPECT_THROW(load_run_config(write("[chain]\ninitial = X:5\n")), ConfigError);
  EXPECT_THROW(load_run_config(write("[levels]\npoints = 3\n")), ConfigError);
  EXPECT_THROW(load_run_config(write("[pulses]\nsigma_ps = fast\n")), ConfigError);

  RunConfig c;
  c.system_file = dir_ / "missing.toml";
  EXPECT_THROW(validate(c), ConfigError);
  c.system_file.clear();
  c.stages = {"levels", "dance"};
  EXPECT_THROW(validate(c), ConfigError);
  c.stages = pipeline_stages();
  c.jobs = 0;
  EXPECT_THROW(validate(c), ConfigError);
  c.jobs = 1;
  c.design.sigma = -1.0;
  EXPECT_THROW(validate(c), ConfigError);
  c.design.sigma = 1.0;
  c.full.absorber.fraction = 1.0;
  EXPECT_THROW(validate(c), ConfigError);
  c.full.absorber.fraction = 0.1;
  c.states = {{Electronic::X, 0, 0}};
  EXPECT_THROW(validate(c), ConfigError);
  c.states.clear();
  EXPECT_NO_THROW(validate(c));
  EXPECT_THROW(level_keys(c), ConfigError);
}

TEST_F(PipelineTest, OutputDirectoryOverride) {
  RunConfig c;
  c.output_dir = "from_config";
  EXPECT_EQ(resolve_output_dir(c), "from_config");
  setenv(kOutputDirEnv, "from_env", 1);
  EXPECT_EQ(resolve_output_dir(c), "from_env");
}

TEST_F(PipelineTest, ThreeTierRunAndDeterminism) {
  const auto c = quick_config();
  const auto r = run_pipeline(c);
  ASSERT_FALSE(r.error) << what(r.error);
  const auto out = c.output_dir;
  for (const char* f : {"levels.csv", "levels.bin", "chain.json", "trace_pseudospin.csv", "trace_rwa.csv",
                        "compare.json", "compare.svg", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const auto m = read_json(out / "manifest.json");
  EXPECT_TRUE(m["complete"].get<bool>());
  EXPECT_EQ(m["inputs"]["system"]["sha256"], io::sha256_file(c.system_file));
  EXPECT_NEAR(m["metrics"]["rwa_final_target"].get<double>(), 1.0, 1e-4);
  EXPECT_LT(m["metrics"]["max_deviation_rwa_vs_pseudospin"].get<double>(), 1e-5);

  const auto chain = io::read_chain_file(out / "chain.json");
  const std::vector<StateLabel> expect{{Electronic::X, 5, 4}, {Electronic::A, 1, 3}, {Electronic::X, 3, 2},
                                       {Electronic::A, 2, 1}, {Electronic::X, 0, 0}};
  EXPECT_EQ(chain.chain.states, expect);

  // Every pseudospin row sums to one; header names e:v:J triples.
  const auto ps = read_trace_csv((out / "trace_pseudospin.csv").string());
  EXPECT_EQ(ps.states, expect);
  for (int i = 0; i < ps.samples(); ++i) EXPECT_NEAR(ps.populations.row(i).sum(), 1.0, 1e-10);

  auto again = c;
  again.output_dir = dir_ / "again";
  const auto r2 = run_pipeline(again);
  ASSERT_FALSE(r2.error) << what(r2.error);
  for (const char* f : {"levels.csv", "chain.json", "trace_pseudospin.csv", "trace_rwa.csv", "compare.json"}) {
    EXPECT_EQ(slurp(out / f), slurp(again.output_dir / f)) << f;
  }
}

TEST_F(PipelineTest, PseudospinOnlyFromExistingChain) {
  auto c = quick_config();
  c.stages = {"levels", "design-chain"};
  ASSERT_FALSE(run_pipeline(c).error);
  c.stages = {"simulate-pseudospin"};
  const auto r = run_pipeline(c);
  ASSERT_FALSE(r.error) << what(r.error);
  const auto tr = read_trace_csv((c.output_dir / "trace_pseudospin.csv").string());
  EXPECT_EQ(tr.states.size(), 5u);
  for (int i = 0; i < tr.samples(); ++i) EXPECT_NEAR(tr.populations.row(i).sum(), 1.0, 1e-10);
  EXPECT_NEAR(tr.final_populations()[4], 1.0, 1e-9);
}

TEST_F(PipelineTest, FailingStageIsRecorded) {
  auto c = quick_config();
  c.search.threshold = 100.0;
  const auto r = run_pipeline(c);
  ASSERT_TRUE(r.error);
  EXPECT_THROW(std::rethrow_exception(r.error), InfeasibleError);
  const auto m = read_json(c.output_dir / "manifest.json");
  EXPECT_FALSE(m["complete"].get<bool>());
  const auto& stages = m["stages"];
  EXPECT_EQ(stages.back()["name"], "design-chain");
  EXPECT_EQ(stages.back()["status"], "failed");
  EXPECT_NE(stages.back()["diagnostic"].get<std::string>().find("weakest link"), std::string::npos);
  EXPECT_EQ(stages.front()["status"], "ok");
}

TEST_F(PipelineTest, CompareNeedsTwoTiers) {
  auto c = quick_config();
  c.stages = {"levels", "design-chain", "simulate-rwa", "compare"};
  const auto r = run_pipeline(c);
  ASSERT_TRUE(r.error);
  EXPECT_THROW(std::rethrow_exception(r.error), ConfigError);
}

TEST(Deviation, InterpolatesOntoReference) {
  PopulationTrace a, b;
  a.states = b.states = {{Electronic::X, 0, 0}, {Electronic::A, 1, 1}};
  for (int i = 0; i <= 10; ++i) a.append(i, Eigen::Vector2d(1.0 - 0.1 * i, 0.1 * i), 0.0);
  for (int i = 0; i <= 5; ++i) b.append(2 * i, Eigen::Vector2d(1.0 - 0.2 * i, 0.2 * i + (i == 3 ? 0.05 : 0.0)), 0.0);
  const auto d = max_deviation(a, b);
  EXPECT_NEAR(d.max_abs, 0.05, 1e-12);
  EXPECT_EQ(d.at_time, 6.0);
  EXPECT_EQ(d.state, "A:1:1");
}
