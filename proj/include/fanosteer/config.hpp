#pragma once

#include "fanosteer/bounds.hpp"
#include "fanosteer/spdc_sim.hpp"
#include "fanosteer/stats.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

// Flat key/value run configuration. One `key = value` per line; `#` starts a
// comment. Keys:
//
//   geometry:  delta_x, delta_k, rhs_bits, n_bar, fill_x, fill_k, efficiency, dims
//   inputs:    input_position, input_momentum
//   model:     sigma_plus, sigma_minus, grid_extent, pixels_per_axis,
//              momentum_extent, window_pixels, total_counts
//   stats:     eta_x, eta_k, mu_x, mu_k, counts_x, counts_k
//   pipeline:  ordering (best | physical), threshold, sigma_multiplier,
//              output_dir, seed, resolution, hedge_mode (common | position |
//              momentum), hedge_fixed_mu

namespace fanosteer {

enum class OrderingPolicy {
  best,      // assignment-optimal relabeling on both quadratures
  physical,  // identity for position, reversed axis for momentum
};

enum class DataSource { inputs, model, direct };

struct RunConfig {
  // Geometry. rhs_bits, when set, replaces delta_x * delta_k.
  std::optional<double> delta_x;
  std::optional<double> delta_k;
  std::optional<double> rhs_bits;
  std::optional<int> n_bar;
  double fill_x = 1.0;
  double fill_k = 1.0;
  double efficiency = 1.0;
  int dims = 1;

  std::optional<std::filesystem::path> input_position;
  std::optional<std::filesystem::path> input_momentum;

  std::optional<BiphotonModel> model;
  std::optional<int> window_pixels;
  std::optional<std::uint64_t> total_counts;

  std::optional<double> eta_x;
  std::optional<double> eta_k;
  std::optional<double> mu_x;
  std::optional<double> mu_k;
  std::optional<std::uint64_t> counts_x;
  std::optional<std::uint64_t> counts_k;

  OrderingPolicy ordering = OrderingPolicy::best;
  double threshold = kDefaultThresholdFraction;
  double sigma_multiplier = 5.0;
  std::optional<std::filesystem::path> output_dir;
  std::uint64_t seed = 1;
  int resolution = 101;
  HedgeMode hedge;

  /// Which of inputs / model / direct statistics feeds the run. Throws
  /// unless exactly one is configured.
  DataSource source() const;
  void validate() const;
};

/// Applies one key/value pair; throws std::invalid_argument on unknown keys
/// or malformed values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Key/value echo of every set field, in the same syntax parse_config reads.
std::map<std::string, std::string> config_entries(const RunConfig& config);
std::string format_config(const RunConfig& config);

std::string to_string(OrderingPolicy policy);

}  // namespace fanosteer
