#pragma once

// Batch front-end of the torsion library.
//
// Exit codes: 0 success, 1 a check suite failed or an I/O error occurred,
// 2 invalid configuration or input, 3 the requested scalar is unavailable
// because a determinant-class verdict is Divergent or Inconclusive (the
// report is still written).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "l2t/category.hpp"

#include <json.hpp>

namespace l2t::cli {

enum class Command { Torsion, FkDet, Density, DetClass, Checks, Examples };
const char* to_string(Command c);

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitUnavailable = 3;

struct RunConfig {
  Command command = Command::Torsion;
  std::string complex_path;
  std::string rep_path;
  std::string backend;  // matrix, group or family; selects the default representation
  std::optional<int> grid;  // Family sample count, default 4096
  std::optional<double> epsilon;
  double tol_rank = kDefaultRankTol;
  double tol_slack = 0.5;
  std::optional<double> tol_agree;
  std::uint64_t seed = 7;
  std::string out_dir;  // empty: the report goes to `out`
  std::string suite = "all";
};

// Throws InputError.
void validate(const RunConfig& cfg);

// Reports go to files in cfg.out_dir, or to `out` when it is empty.
// Diagnostics go to `log`.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& log);

inline constexpr int kDefaultGrid = 4096;

// The check suites selected by cfg.suite; sets pass.
nlohmann::json run_checks(const RunConfig& cfg, bool& pass);

// Writes the bundled inputs; returns the file names in writing order.
std::vector<std::string> emit_examples(const std::string& out_dir);

}  // namespace l2t::cli
