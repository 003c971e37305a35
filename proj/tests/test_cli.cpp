#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "llfisher/cli.hpp"

using namespace llfisher;
using namespace llfisher::cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "llfisher");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, SolveHardWallSingleParticle) {
  const auto r = run_cli({"solve", "--bc", "hardwall", "-N", "1", "-c", "1", "-L", "2"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("\"k\": [1.5707963267948966]"), std::string::npos) << r.out;
}

TEST(Cli, SolveIsByteReproducible) {
  const std::vector<std::string> args = {"solve", "-N", "3", "-c", "0.7", "-L", "2.5"};
  const auto a = run_cli(args), b = run_cli(args);
  ASSERT_EQ(a.code, kOk) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, ExplicitQuantumNumbers) {
  const auto r = run_cli({"solve", "-I=-1,0,2", "-c", "0.5", "-L", "3"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("\"general\""), std::string::npos);
  EXPECT_EQ(run_cli({"solve", "-I=-1,0.5", "-c", "0.5", "-L", "3"}).code, kValidation);
}

TEST(Cli, FisherSweepJsonAndCsv) {
  const auto j = run_cli({"fisher", "-N", "2", "-L", "3", "--axis", "c", "--grid", "0.2:1.0:3", "--format", "json"});
  ASSERT_EQ(j.code, kOk) << j.err;
  EXPECT_NE(j.out.find("\"strictly_decreasing\":true"), std::string::npos) << j.out;
  const auto c = run_cli({"fisher", "-N", "2", "-L", "3", "--axis", "c", "--grid", "0.2,0.6", "--format", "csv"});
  ASSERT_EQ(c.code, kOk) << c.err;
  std::istringstream lines(c.out);
  std::string header, row;
  std::getline(lines, header);
  EXPECT_EQ(header.rfind("state,bc,axis,value,c,L,qfi,cfi,gap", 0), 0u);
  int rows = 0;
  while (std::getline(lines, row))
    if (!row.empty()) ++rows;
  EXPECT_EQ(rows, 2);
}

TEST(Cli, FisherPointFailuresAndAllFailed) {
  const auto partial = run_cli({"fisher", "-N", "2", "-L", "3", "--axis", "c", "--grid", "0,0.5"});
  EXPECT_EQ(partial.code, kOk);
  EXPECT_NE(partial.out.find(",error,"), std::string::npos) << partial.out;
  EXPECT_EQ(run_cli({"fisher", "-N", "2", "-L", "3", "--axis", "c", "--grid", "0"}).code, kSolver);
}

TEST(Cli, ValidationErrors) {
  EXPECT_EQ(run_cli({"fisher", "-N", "2", "-L", "3", "--axis", "c", "--grid", ""}).code, kValidation);
  EXPECT_EQ(run_cli({"fisher", "-N", "2", "-L", "3", "--axis", "c", "--grid", "1,0.5"}).code, kValidation);
  EXPECT_EQ(run_cli({"fisher", "-N", "2", "-c", "3", "--axis", "c", "--grid", "1,2"}).code, kValidation);
  EXPECT_EQ(run_cli({"lmax", "-N", "2", "-c", "0"}).code, kValidation);
  EXPECT_EQ(run_cli({"lmax", "-N", "2", "-c", "0.2", "-L", "3"}).code, kValidation);
  EXPECT_EQ(run_cli({"imaging", "-N", "2", "-c", "0.2", "-L", "3", "--pixels", "0"}).code, kValidation);
  EXPECT_EQ(run_cli({"solve", "-N", "6", "-c", "1", "-L", "1", "--bc", "sphere"}).code, kValidation);
  EXPECT_EQ(run_cli({"fisher", "-N", "6", "-L", "3", "--axis", "c", "--grid", "1"}).code, kValidation);
  EXPECT_NE(run_cli({"bogus"}).code, kOk);
}

TEST(Cli, LmaxAndBracketFailure) {
  const auto r = run_cli({"lmax", "-N", "2", "-c", "0.2"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("\"cL_max\":10.5"), std::string::npos) << r.out;
  EXPECT_EQ(run_cli({"lmax", "-N", "2", "-c", "0.2", "--bracket", "1,20"}).code, kBracket);
}

TEST(Cli, ConfigHashTracksOutputAffectingFields) {
  RunConfig a;
  a.command = Command::fisher;
  a.n = 2;
  a.length = 3.0;
  a.axis = SweepAxis::c;
  a.grid = "0.2,0.4";
  RunConfig b = a;
  b.out = "elsewhere.json";
  b.options.threads = 7;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.options.solver.tolerance_scale = 1e-10;
  EXPECT_NE(config_hash(a), config_hash(b));
  RunConfig d = a;
  d.grid = "0.2,0.5";
  EXPECT_NE(config_hash(a), config_hash(d));
}

TEST(Cli, GridParsing) {
  EXPECT_EQ(parse_grid("1:2:3"), (std::vector<double>{1.0, 1.5, 2.0}));
  EXPECT_EQ(parse_grid("0.5,0.25"), (std::vector<double>{0.5, 0.25}));
  EXPECT_THROW(parse_grid("1:2"), InvalidArgument);
  EXPECT_THROW(parse_grid("a,b"), InvalidArgument);
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(Cli, ImagingWritesShotsAndMle) {
  const auto dir = std::filesystem::temp_directory_path() / "llfisher_cli_test";
  std::filesystem::create_directories(dir);
  const auto shots = (dir / "shots.jsonl").string();
  const auto mle = (dir / "mle.json").string();
  const std::vector<std::string> args = {"imaging", "-N", "2", "-c", "0.5", "-L", "3", "--pixels", "2,4",
                                         "--sample", "200", "--seed", "9", "--shots", shots, "--mle-out", mle};
  const auto r = run_cli(args);
  ASSERT_EQ(r.code, kOk) << r.err;
  const std::string first = slurp(shots);
  std::istringstream lines(first);
  std::string line;
  int count = 0;
  std::getline(lines, line);
  EXPECT_NE(line.find("\"seed\""), std::string::npos);
  while (std::getline(lines, line))
    if (!line.empty()) ++count;
  EXPECT_EQ(count, 200);
  EXPECT_NE(slurp(mle).find("c_hat"), std::string::npos);
  ASSERT_EQ(run_cli(args).code, kOk);
  EXPECT_EQ(slurp(shots), first);
  std::filesystem::remove_all(dir);
}
