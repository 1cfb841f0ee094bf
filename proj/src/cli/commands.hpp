#ifndef DIPOLEKIT_CLI_COMMANDS_HPP
#define DIPOLEKIT_CLI_COMMANDS_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli/config.hpp"

namespace dipolekit::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kInvalid = 2, kNotConverged = 3 };

enum class RowFlag { None, Divergent, NotConverged };

/// One line of a sweep table.
struct SweepRow {
  double phi = 0.0;
  double r_over_L = 0.0;
  double xi_free_reduced = 0.0;
  double xi_box_reduced = 0.0;
  double ratio = 0.0; ///< meaningful only when flag == None
  RowFlag flag = RowFlag::None;
  int shells_used = 0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

inline constexpr const char* kSweepHeader = "phi,r_over_L,xi_free_reduced,xi_box_reduced,ratio,shells_used";

nlohmann::ordered_json to_json(const SweepRow& row);
SweepRow sweep_row_from_json(const nlohmann::ordered_json& j);
std::string to_csv(const SweepRow& row);

/// 17 significant digits.
std::string format_number(double v);

/// Computes the sweep grid in output order. `warnings` counts rows that did
/// not converge.
std::vector<SweepRow> sweep_rows(const RunConfig& cfg, int& warnings);

/// Runs a parsed config; returns the exit code.
int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Full command line entry point (arguments without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace dipolekit::cli

#endif // DIPOLEKIT_CLI_COMMANDS_HPP
