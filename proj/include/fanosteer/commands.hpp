#pragma once

#include "fanosteer/bounds.hpp"
#include "fanosteer/config.hpp"
#include "fanosteer/spdc_sim.hpp"
#include "fanosteer/stats.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fanosteer {

inline constexpr const char* kToolVersion = "0.3.0";

enum class Verdict { certified, not_certified, inapplicable };

std::string to_string(Verdict v);

/// Process exit code: 0 certified or success, 1 not certified, 2 inapplicable.
int exit_code(Verdict v);
inline constexpr int kExitError = 3;

/// Error raised by a pipeline stage, labeled with that stage's name.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// What was extracted from one quadrature's joint distribution.
struct AxisSummary {
  double agreement_identity = 0.0;
  double agreement_reversed = 0.0;
  double agreement_best = 0.0;
  std::string best_ordering;  // identity | reversed | permutation
  std::string used_ordering;
  double mu_estimate = 1.0;    // before fill / efficiency
  std::string mu_source;       // config | fit
  std::vector<GaussianFit> fits;
  std::optional<double> mu_true;  // simulator ground truth
  std::optional<std::uint64_t> counts;
};

struct RunRecord {
  std::string command;
  RunConfig config;
  std::optional<CorrelationStats> stats;  // mu values include fill and efficiency
  std::optional<DetectorGeometry> geometry;
  std::optional<SteeringRhs> rhs;
  std::optional<BoundReport> certificate;
  std::optional<BoundReport> windowed_discrete;  // brute force over the window only
  std::optional<KeyRateBound> key_rate;
  std::optional<AxisSummary> position;
  std::optional<AxisSummary> momentum;
  std::optional<Verdict> verdict;
  std::optional<double> hedge_mu;
  std::optional<std::filesystem::path> contour_path;
  std::vector<std::filesystem::path> outputs;
  std::vector<std::string> warnings;
  std::string timestamp;
  std::string version = kToolVersion;

  nlohmann::json to_json() const;
  /// Numeric content only, without timestamp or output paths; equal for
  /// reproducible runs.
  nlohmann::json numeric_json() const;
};

/// Writes `eta_x,eta_k,violation,sigma` records, one per grid cell; sigma is
/// `nan` for grids evaluated without counts.
void save_contour(const ContourGrid& grid, const std::filesystem::path& path);
ContourGrid load_contour(const std::filesystem::path& path);

/// Simulator output for one run: windowed detector data for both quadratures.
struct SimulatedData {
  JointDistribution position;
  JointDistribution momentum;
  double mu_true_x = 1.0;
  double mu_true_k = 1.0;
  double grid_mass_x = 1.0;
  double grid_mass_k = 1.0;
  std::optional<CountMatrix> counts_x;
  std::optional<CountMatrix> counts_k;
};

/// Seeds used for the position and momentum draws of a run.
std::uint64_t position_seed(std::uint64_t seed);
std::uint64_t momentum_seed(std::uint64_t seed);

SimulatedData simulate_data(const RunConfig& config);

RunRecord cmd_simulate(const RunConfig& config);
RunRecord cmd_certify(const RunConfig& config);
RunRecord cmd_hedge(const RunConfig& config);
RunRecord cmd_contour(const RunConfig& config);
RunRecord cmd_keyrate(const RunConfig& config);

/// Writes <output_dir>/<command>_record.json when output_dir is set.
void write_record(const RunRecord& record);

}  // namespace fanosteer
