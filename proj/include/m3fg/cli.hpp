#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace m3fg {

/// Fully resolved experiment settings (defaults filled in).
struct ExperimentConfig {
  std::string command;
  std::string env;
  std::string solver = "fp";   // fp | fpi
  int bins = 120;
  int iters = 100;
  std::optional<double> gamma;  // discounted objective when set
  std::uint64_t seed = 0;
  std::string out = ".";
  int eval_stride = 1;
  int episodes = 1000;          // 5000 for buffet unless given
  std::vector<int> agents;
  std::vector<int> bins_list;
  std::string policy_in;
  std::string policy;           // "" (solve) | uniform | first
  std::string init = "first";   // first | uniform
  std::optional<int> horizon_steps;
  int slice_t = 0;
  bool timing = false;          // wall_seconds column is 0 unless enabled
  int threads = 0;
  std::map<std::string, std::string> env_params;  // for the selected env
};

/// Exit codes of the command-line runner.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Parses "key = value" lines; '#' starts a comment. Throws ConfigError on
/// malformed lines.
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Resolves a flat key map (config file merged with command-line overrides)
/// into an ExperimentConfig. Throws ConfigError naming the offending key.
ExperimentConfig resolve_config(const std::string& command, const std::map<std::string, std::string>& settings);

/// Entry point shared by the executable and the tests.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace m3fg
