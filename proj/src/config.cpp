#include "fanosteer/config.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fanosteer {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw std::invalid_argument("config key '" + key + "': not a number: '" + v + "'");
  }
  return d;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v) {
  std::uint64_t u = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), u);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw std::invalid_argument("config key '" + key + "': not a nonnegative integer: '" + v + "'");
  }
  return u;
}

int to_int(const std::string& key, const std::string& v) {
  const std::uint64_t u = to_unsigned(key, v);
  if (u > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
    throw std::invalid_argument("config key '" + key + "': value too large");
  }
  return static_cast<int>(u);
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << v;
  return os.str();
}

BiphotonModel& model_of(RunConfig& c) {
  if (!c.model) c.model.emplace();
  return *c.model;
}

}  // namespace

std::string to_string(OrderingPolicy policy) {
  return policy == OrderingPolicy::best ? "best" : "physical";
}

DataSource RunConfig::source() const {
  const bool inputs = input_position.has_value() || input_momentum.has_value();
  const bool simulated = model.has_value();
  const bool direct = eta_x.has_value() || eta_k.has_value();
  const int set = int(inputs) + int(simulated) + int(direct);
  if (set != 1) {
    throw std::invalid_argument(
        "configure exactly one data source: input files, a biphoton model, or eta_x/eta_k");
  }
  if (inputs) {
    if (!input_position || !input_momentum) {
      throw std::invalid_argument("both input_position and input_momentum are required");
    }
    return DataSource::inputs;
  }
  if (direct) {
    if (!eta_x || !eta_k) throw std::invalid_argument("both eta_x and eta_k are required");
    return DataSource::direct;
  }
  return DataSource::model;
}

void RunConfig::validate() const {
  if (sigma_multiplier < 0.0) throw std::invalid_argument("sigma_multiplier must be >= 0");
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("threshold must lie in [0,1]");
  }
  if (n_bar && *n_bar < 2) throw std::invalid_argument("n_bar must be at least 2");
  if (dims < 1) throw std::invalid_argument("dims must be at least 1");
  if (resolution < 2) throw std::invalid_argument("resolution must be at least 2");
  if (model) model->validate();
  if (window_pixels && *window_pixels < 1) throw std::invalid_argument("window_pixels must be >= 1");
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  const std::string& v = value;
  if (key == "delta_x") c.delta_x = to_double(key, v);
  else if (key == "delta_k") c.delta_k = to_double(key, v);
  else if (key == "rhs_bits") c.rhs_bits = to_double(key, v);
  else if (key == "n_bar") c.n_bar = to_int(key, v);
  else if (key == "fill_x") c.fill_x = to_double(key, v);
  else if (key == "fill_k") c.fill_k = to_double(key, v);
  else if (key == "efficiency") c.efficiency = to_double(key, v);
  else if (key == "dims") c.dims = to_int(key, v);
  else if (key == "input_position") c.input_position = v;
  else if (key == "input_momentum") c.input_momentum = v;
  else if (key == "sigma_plus") model_of(c).sigma_plus = to_double(key, v);
  else if (key == "sigma_minus") model_of(c).sigma_minus = to_double(key, v);
  else if (key == "grid_extent") model_of(c).grid_extent = to_double(key, v);
  else if (key == "pixels_per_axis") model_of(c).pixels_per_axis = to_int(key, v);
  else if (key == "momentum_extent") model_of(c).momentum_extent = to_double(key, v);
  else if (key == "window_pixels") c.window_pixels = to_int(key, v);
  else if (key == "total_counts") c.total_counts = to_unsigned(key, v);
  else if (key == "eta_x") c.eta_x = to_double(key, v);
  else if (key == "eta_k") c.eta_k = to_double(key, v);
  else if (key == "mu_x") c.mu_x = to_double(key, v);
  else if (key == "mu_k") c.mu_k = to_double(key, v);
  else if (key == "counts_x") c.counts_x = to_unsigned(key, v);
  else if (key == "counts_k") c.counts_k = to_unsigned(key, v);
  else if (key == "ordering") {
    if (v == "best") c.ordering = OrderingPolicy::best;
    else if (v == "physical") c.ordering = OrderingPolicy::physical;
    else throw std::invalid_argument("ordering must be 'best' or 'physical'");
  } else if (key == "threshold") c.threshold = to_double(key, v);
  else if (key == "sigma_multiplier") c.sigma_multiplier = to_double(key, v);
  else if (key == "output_dir") c.output_dir = v;
  else if (key == "seed") c.seed = to_unsigned(key, v);
  else if (key == "resolution") c.resolution = to_int(key, v);
  else if (key == "hedge_mode") {
    if (v == "common") c.hedge.kind = HedgeMode::Kind::common;
    else if (v == "position") c.hedge.kind = HedgeMode::Kind::position;
    else if (v == "momentum") c.hedge.kind = HedgeMode::Kind::momentum;
    else throw std::invalid_argument("hedge_mode must be common, position or momentum");
  } else if (key == "hedge_fixed_mu") c.hedge.fixed_mu = to_double(key, v);
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line) + ": expected key = value");
    }
    try {
      set_config_value(c, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line) + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig c = parse_config(buf.str());
  // Relative input paths are taken relative to the config file.
  const auto base = path.parent_path();
  for (auto* p : {&c.input_position, &c.input_momentum}) {
    if (*p && p->value().is_relative()) *p = base / p->value();
  }
  return c;
}

std::map<std::string, std::string> config_entries(const RunConfig& c) {
  std::map<std::string, std::string> e;
  if (c.delta_x) e["delta_x"] = num(*c.delta_x);
  if (c.delta_k) e["delta_k"] = num(*c.delta_k);
  if (c.rhs_bits) e["rhs_bits"] = num(*c.rhs_bits);
  if (c.n_bar) e["n_bar"] = std::to_string(*c.n_bar);
  e["fill_x"] = num(c.fill_x);
  e["fill_k"] = num(c.fill_k);
  e["efficiency"] = num(c.efficiency);
  e["dims"] = std::to_string(c.dims);
  if (c.input_position) e["input_position"] = c.input_position->string();
  if (c.input_momentum) e["input_momentum"] = c.input_momentum->string();
  if (c.model) {
    e["sigma_plus"] = num(c.model->sigma_plus);
    e["sigma_minus"] = num(c.model->sigma_minus);
    e["grid_extent"] = num(c.model->grid_extent);
    e["pixels_per_axis"] = std::to_string(c.model->pixels_per_axis);
    if (c.model->momentum_extent) e["momentum_extent"] = num(*c.model->momentum_extent);
  }
  if (c.window_pixels) e["window_pixels"] = std::to_string(*c.window_pixels);
  if (c.total_counts) e["total_counts"] = std::to_string(*c.total_counts);
  if (c.eta_x) e["eta_x"] = num(*c.eta_x);
  if (c.eta_k) e["eta_k"] = num(*c.eta_k);
  if (c.mu_x) e["mu_x"] = num(*c.mu_x);
  if (c.mu_k) e["mu_k"] = num(*c.mu_k);
  if (c.counts_x) e["counts_x"] = std::to_string(*c.counts_x);
  if (c.counts_k) e["counts_k"] = std::to_string(*c.counts_k);
  e["ordering"] = to_string(c.ordering);
  e["threshold"] = num(c.threshold);
  e["sigma_multiplier"] = num(c.sigma_multiplier);
  if (c.output_dir) e["output_dir"] = c.output_dir->string();
  e["seed"] = std::to_string(c.seed);
  e["resolution"] = std::to_string(c.resolution);
  switch (c.hedge.kind) {
    case HedgeMode::Kind::common: e["hedge_mode"] = "common"; break;
    case HedgeMode::Kind::position: e["hedge_mode"] = "position"; break;
    case HedgeMode::Kind::momentum: e["hedge_mode"] = "momentum"; break;
  }
  e["hedge_fixed_mu"] = num(c.hedge.fixed_mu);
  return e;
}

std::string format_config(const RunConfig& c) {
  std::ostringstream os;
  for (const auto& [k, v] : config_entries(c)) os << k << " = " << v << "\n";
  return os.str();
}

}  // namespace fanosteer
