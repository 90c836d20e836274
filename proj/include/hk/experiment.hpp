#pragma once

// Experiment orchestration behind the hk_lab command line: configuration,
// initial-profile generators, per-mode runs with their audits, and the files
// written for each run.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hk/core.hpp"
#include "hk/json_text.hpp"

namespace hk {

// Malformed configuration or flags; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { sync, async, hetero, spectral_audit, mc };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& name);

inline constexpr int kExitPass = 0;
inline constexpr int kExitAuditFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

struct GeneratorSpec {
  std::string name = "uniform-box";  // uniform-box | line-chain | clustered | paper-example-1
  double side = 1.0;                 // uniform-box: opinions in [0, side)^d
  double spacing = 0.9;              // line-chain: x_i = i * spacing on the first axis
  std::size_t clusters = 2;          // clustered: k
  double spread = 0.05;              // clustered: cube side around each center
  double gap = 1.0;                  // clustered: spacing of centers on the first axis
};

// Whether the generator consumes the seed.
bool generator_is_random(const std::string& name);

struct InitialData {
  OpinionProfile profile;
  std::optional<ConfidenceBounds> bounds;  // set by scenarios that fix their radii
};

// Throws UsageError for an unknown generator or invalid parameters.
InitialData generate_initial(const GeneratorSpec& spec, std::size_t n, std::size_t d, std::uint64_t seed);

struct ExperimentConfig {
  Mode mode = Mode::sync;
  std::size_t n = 0;                 // 0: taken from the profile source
  std::size_t d = 1;
  std::vector<double> eps;           // one value, or one per agent
  std::optional<double> delta;
  std::string scheduler = "uniform";  // uniform | roundrobin | script:PATH
  std::optional<std::uint64_t> seed;
  std::size_t trials = 0;
  std::uint64_t cap = 0;             // 0: mode default
  double tol = kCoincidenceTol;
  double movement_tol = 1e-12;
  std::string profile_path;          // overrides the generator when set
  std::string bounds_path;
  GeneratorSpec generator;
  std::string out_dir = "hk_out";
  bool audit = true;
  std::size_t workers = 0;
};

using Setting = std::pair<std::string, std::string>;

// Flat "key = value" lines; '#' starts a comment. Throws UsageError.
std::vector<Setting> parse_settings(std::istream& in);
std::vector<Setting> load_settings(const std::string& path);

// Applies one setting; later settings override earlier ones. Throws UsageError
// for unknown keys or unparsable values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

// Mode-specific requirements (seed for randomized modes, delta for async and
// mc, ...). Throws UsageError.
void validate(const ExperimentConfig& config);

struct ExperimentResult {
  int exit_code = kExitPass;
  Json summary;
  std::vector<std::string> failed_audits;  // "tag: check"
};

// Runs the configured mode and writes summary.json, trace.jsonl and
// profile_final.txt under config.out_dir. Usage problems throw UsageError;
// IO problems throw std::runtime_error naming the path.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace hk
