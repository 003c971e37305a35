#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "llfisher/fisher.hpp"
#include "llfisher/imaging.hpp"

namespace llfisher::cli {

enum class Command { solve, fisher, lmax, imaging };
enum class OutputFormat { json, csv };

std::string to_string(Command command);

enum ExitCode : int { kOk = 0, kValidation = 2, kSolver = 3, kBracket = 4 };

struct RunConfig {
  Command command = Command::solve;
  BoundaryCondition bc = BoundaryCondition::periodic;
  std::optional<int> n;
  // Exactly one of these selects the state(s); none means the ground state.
  bool ground = false;
  std::optional<int> type1;
  std::optional<int> type2;
  std::vector<std::string> explicit_states;  // each "I_1,...,I_N"
  std::optional<double> c;
  std::optional<double> length;
  std::optional<SweepAxis> axis;
  std::string grid;  // "lo:hi:count" or "v1,v2,..."
  std::optional<std::pair<double, double>> bracket;
  std::vector<int> pixels;
  std::size_t sample = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string shots_out;
  std::string mle_out;
  std::optional<OutputFormat> format;
  FisherOptions options;
};

// Throws InvalidArgument on inconsistent or incomplete configurations.
void validate(const RunConfig& config);
std::vector<StateSpec> states(const RunConfig& config);
std::vector<double> parse_grid(const std::string& text);

// Stable text form of every output-affecting field, and its FNV-1a hash.
std::string canonical(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);

std::string format_double(double x);  // 17 significant digits

// Each returns the primary output document; exceptions propagate.
std::string cmd_solve(const RunConfig& config);
// all_failed, when given, is set if every sweep point failed.
std::string cmd_fisher(const RunConfig& config, std::ostream& warnings, bool* all_failed = nullptr);
std::string cmd_lmax(const RunConfig& config);
std::string cmd_imaging(const RunConfig& config, std::ostream& warnings);

// Runs the command, writes its output to config.out or to out, and maps
// failures to exit codes.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Full command-line entry point.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace llfisher::cli
