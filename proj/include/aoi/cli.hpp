#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aoi/simkit.hpp"
#include "aoi/sweep.hpp"

namespace aoi::cli {

inline constexpr const char* kToolVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Everything a config file can describe. Sections other than link,
/// protocol and power are optional and only read by the commands using them.
struct RunConfig {
  sweep::Scenario scenario;
  sim::SimConfig sim;
  bool sim_seed_given = false;
  std::optional<double> sim_p;

  std::optional<sweep::SweepSpec> sweep;

  struct Minimize {
    sweep::Objective objective = sweep::Objective::eta;
    sweep::Variable variable = sweep::Variable::rate;
    double lo = 0.0;
    double hi = 0.0;
    sweep::MinimizeOptions options;
  };
  std::optional<Minimize> minimize;

  /// Canonical resolved form (linear SNR kept alongside dB input).
  nlohmann::json resolved;
};

/// Parses and validates a config document. Throws ConfigError naming the
/// offending field.
RunConfig parse_config(const nlohmann::json& doc);

/// Formats a double with 17 significant digits (round-trips exactly).
std::string format_double(double v);

/// Entry point shared by the executable and the tests. Returns the process
/// exit code; never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aoi::cli
