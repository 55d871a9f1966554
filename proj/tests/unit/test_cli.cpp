#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "bispec/experiment.hpp"

using namespace bispec;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("bispec_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const int st = std::system((std::string(BISPEC_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST(Config, ParsesSections) {
  const auto c = parse("[experiment]\nname=evolve\ngeometry=torus\nseed=42\n[params]\ndt=0.01\nT=0.5\n");
  EXPECT_EQ(c.experiment, "evolve");
  EXPECT_EQ(c.geometry, "torus");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.params.at("dt"), "0.01");
  const auto plan = validate_config(c);
  EXPECT_EQ(plan.kind, ExperimentKind::evolve);
  EXPECT_DOUBLE_EQ(plan.dt, 0.01);
}

TEST(Config, FieldLevelErrors) {
  auto field_of = [](const std::string& text) {
    try {
      validate_config(parse(text));
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("none");
  };
  EXPECT_EQ(field_of("[experiment]\nname=evolve\n[params]\ndt=-0.1\n"), "params.dt");
  EXPECT_EQ(field_of("[experiment]\nname=evolve\n[params]\nbogus=1\n"), "params.bogus");
  EXPECT_EQ(field_of("[experiment]\nname=evolve\n[params]\nk_max=abc\n"), "params.k_max");
  EXPECT_EQ(field_of("[experiment]\nname=frobnicate\n"), "experiment.name");
  EXPECT_EQ(field_of("[experiment]\nname=sogge-scan\ngeometry=zoll\n"), "experiment.geometry");
  EXPECT_EQ(field_of("[experiment]\nname=bilinear-scan\n[params]\ndegrees=8,4\n"), "params.degrees");
  EXPECT_EQ(field_of("[experiment]\nname=strichartz-scan\n[params]\nn=1,2\n"), "params.n");
  EXPECT_EQ(field_of("[experiment]\nname=xsb-check\n[params]\nb_linf=0.5\n"), "params.b_linf");
  EXPECT_EQ(field_of("[experiment]\nname=evolve\n"), "none");
  EXPECT_THROW(parse("[other]\nx=1\n"), ConfigError);
  EXPECT_THROW(parse("[experiment]\ngeometry=sphere\n"), ConfigError);
  EXPECT_THROW(parse("[experiment]\nname=evolve\nseed=-3\n"), ConfigError);
}

TEST(Run, BilinearScanWritesReport) {
  const auto dir = scratch("bilinear");
  auto c = parse("[experiment]\nname=bilinear-scan\n[params]\ndegrees=4,8,16,32\nrestarts=0\n");
  const auto out = run(validate_config(c), dir);
  EXPECT_EQ(out.exit_code, kExitOk);
  std::ifstream csv(dir / "bilinear.csv");
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "lambda,mu,constant,iters,residual,restarts_used");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 4);
  EXPECT_TRUE(out.summary.get("bilinear.slope").has_value());
  EXPECT_TRUE(fs::exists(dir / "bilinear.svg"));
  EXPECT_NE(slurp(dir / "summary.txt").find("status=ok"), std::string::npos);
}

TEST(Run, Deterministic) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  auto c = parse("[experiment]\nname=lattice-scan\ngeometry=sphere\n[params]\nn=2,4,8,16,32\n");
  const auto plan = validate_config(c);
  run(plan, a);
  run(plan, b);
  EXPECT_EQ(slurp(a / "lattice.csv"), slurp(b / "lattice.csv"));
  EXPECT_EQ(slurp(a / "summary.txt"), slurp(b / "summary.txt"));
}

TEST(Run, RuntimeFailureMarksSummary) {
  const auto dir = scratch("fail");
  auto c = parse("[experiment]\nname=evolve\n[params]\nk_max=4\nT=1\ndt=0.5\namplitude=1e200\n");
  const auto out = run(validate_config(c), dir);
  EXPECT_EQ(out.exit_code, kExitRuntime);
  EXPECT_NE(slurp(dir / "summary.txt").find("status=failed"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("exit");
  std::ofstream(dir / "bad.ini") << "[experiment]\nname=evolve\n[params]\ndt=-1\n";
  std::ofstream(dir / "ok.ini") << "[experiment]\nname=sogge-scan\n[params]\ndegrees=4,8,16,32\n";
  std::ofstream(dir / "gate.ini") << "[experiment]\nname=lattice-scan\ngeometry=torus\n[params]\na=4,8,16,32\n";
  EXPECT_EQ(run_cli("--config " + (dir / "bad.ini").string() + " --out " + (dir / "o1").string()), 1);
  EXPECT_FALSE(fs::exists(dir / "o1"));
  EXPECT_EQ(run_cli("--config " + (dir / "ok.ini").string() + " --out " + (dir / "o2").string() + " --check"), 0);
  EXPECT_EQ(run_cli("--config " + (dir / "gate.ini").string() + " --out " + (dir / "o3").string()), 0);
  EXPECT_EQ(run_cli("--config " + (dir / "gate.ini").string() + " --out " + (dir / "o4").string() + " --check"), 3);
  EXPECT_EQ(run_cli("--config " + (dir / "missing.ini").string()), 1);
}
