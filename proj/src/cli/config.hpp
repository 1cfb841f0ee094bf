#ifndef DIPOLEKIT_CLI_CONFIG_HPP
#define DIPOLEKIT_CLI_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dipolekit/core.hpp"
#include "dipolekit/periodic_box.hpp"

namespace dipolekit::cli {

enum class Command { Free, Box, Sweep, Kernel, Check };
enum class Format { Csv, Json };

const char* to_string(Command c);

/// Everything a run needs, after merging the config file and the flags.
struct RunConfig {
  Command command = Command::Free;
  UnitMode units = UnitMode::Natural;
  Format format = Format::Csv;
  std::string out; ///< empty: standard output

  std::optional<Vector3> m1, m2, r;
  std::optional<double> L, omega;
  std::uint64_t seed = 20240601;
  std::optional<double> tol;
  Estimator estimator = Estimator::FullSum;

  // sweep
  Vector3 e_r = Vector3(1.0, 2.0, 3.0).normalized();
  double phi_start = 0.0;
  double phi_end = 6.283185307179586;
  int n_phi = 361;
  std::vector<double> r_over_L{0.1, 0.2, 0.3, 0.4};
  int shell_max = 64;

  // kernel
  std::optional<double> omega_cut;
  int n_s = 301;
  double s_max = 3.0; ///< in units of r/c

  // check
  int count = 100;

  UnitSystem unit_system() const { return units == UnitMode::SI ? UnitSystem::si() : UnitSystem::natural(); }
};

/// Thrown for malformed or out-of-range configuration. `field` names the
/// offending input.
class ConfigError : public ValidationError {
public:
  ConfigError(const std::string& field, const std::string& msg)
      : ValidationError(field + ": " + msg), field_(field) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Parses "x,y,z" into a vector.
Vector3 parse_vector(const std::string& text, const std::string& field);

/// Builds a config from command-line arguments (without the program name).
/// Returns nullopt after printing help.
std::optional<RunConfig> parse_args(const std::vector<std::string>& args, std::ostream& help_out);

/// Applies a JSON config file over `cfg`.
void apply_config_file(RunConfig& cfg, const std::string& path);

/// Checks every numeric field against the preconditions of the command.
void validate(const RunConfig& cfg);

} // namespace dipolekit::cli

#endif // DIPOLEKIT_CLI_CONFIG_HPP
