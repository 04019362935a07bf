#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace opilab {

// Exit codes shared by every subcommand.
inline constexpr int kExitPass = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  std::string command;
  double rho = 0.5;
  bool rho_given = false;
  std::string bound = "best";
  int figure = 1;
  int grid = 200;
  std::uint32_t p = 7;
  int m = 6;
  int n = 3;
  bool m_given = false;
  std::vector<std::uint32_t> points;  // empty: 0..m-1
  std::string lists_path;
  std::optional<int> t;
  std::string buckets = "cyclic";
  double lambda = 0;
  double eps = 0.05;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> budget;
  unsigned precision = 60;
  std::string out;
  std::string suite = "all";
  int instances = 3;         // verify: seeded list families per instance
  std::uint64_t search = 0;  // oracle: worst-case search over this many families
  std::string replay;        // verify: where to write the replay file on failure
  bool inject_fault = false; // testing hook: the first check of the run is marked failed
};

// Report for one suite (or all of them) on the configured instance.
// "pass" is false iff some identity failed; "replay" carries the failing instance.
nlohmann::json verify_report(const RunConfig& cfg);

// Full command line, args[0] being the program name. Output goes to cfg.out
// when given, otherwise to `out`; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace opilab
