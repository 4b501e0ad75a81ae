#include "fanosteer/commands.hpp"

#include "fanosteer/joint_io.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace fanosteer {
namespace {

using nlohmann::json;

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Everything the bound needs, before fill factors and efficiency.
struct Collected {
  CorrelationStats raw;
  int n_bar = 0;
  std::optional<double> delta_x;
  std::optional<double> delta_k;
  std::optional<JointDistribution> position;  // thresholded window data
  std::optional<JointDistribution> momentum;
  std::optional<AxisSummary> position_summary;
  std::optional<AxisSummary> momentum_summary;
};

AxisSummary summarize_axis(const JointDistribution& data, bool is_position,
                           std::optional<double> configured_mu, const RunConfig& cfg,
                           JointDistribution& thresholded) {
  AxisSummary s;
  const int n = static_cast<int>(data.rows());
  if (configured_mu) {
    s.mu_estimate = *configured_mu;
    s.mu_source = "config";
  } else {
    // Each detector sees one marginal; the smaller in-window fraction is kept.
    const DomainEstimate a = domain_probability_from_fit(data.marginal_a(), n);
    const DomainEstimate b = domain_probability_from_fit(data.marginal_b(), n);
    s.mu_estimate = std::min(a.mu, b.mu);
    s.mu_source = "fit";
    s.fits = {a.fit, b.fit};
  }
  thresholded = cfg.threshold > 0.0 ? threshold_renormalize(data, cfg.threshold) : data;

  s.agreement_identity = agreement_identity(thresholded);
  s.agreement_reversed = agreement_reversed(thresholded);
  const Agreement best = agreement_best_ordering(thresholded);
  s.agreement_best = best.probability;
  s.best_ordering = to_string(best.ordering.kind);
  if (cfg.ordering == OrderingPolicy::best) {
    s.used_ordering = "best:" + s.best_ordering;
  } else {
    s.used_ordering = is_position ? "identity" : "reversed";
  }
  s.counts = data.total_counts();
  return s;
}

double used_agreement(const AxisSummary& s, const RunConfig& cfg, bool is_position) {
  if (cfg.ordering == OrderingPolicy::best) return s.agreement_best;
  return is_position ? s.agreement_identity : s.agreement_reversed;
}

Collected collect_from_joints(const JointDistribution& jx, const JointDistribution& jk,
                              const RunConfig& cfg) {
  Collected c;
  if (!jx.is_square() || !jk.is_square()) {
    throw std::invalid_argument("joint distributions must be square (N x N window)");
  }
  if (jx.rows() != jk.rows()) {
    throw std::invalid_argument("asymmetric window sizes: position is " +
                                std::to_string(jx.rows()) + " pixels, momentum is " +
                                std::to_string(jk.rows()) + "; one n_bar must serve both");
  }
  c.n_bar = static_cast<int>(jx.rows());
  if (c.n_bar < 2) throw std::invalid_argument("window must have at least 2 pixels");
  if (cfg.n_bar && *cfg.n_bar != c.n_bar) {
    throw std::invalid_argument("configured n_bar " + std::to_string(*cfg.n_bar) +
                                " does not match the " + std::to_string(c.n_bar) +
                                "-pixel data window");
  }

  JointDistribution tx = jx, tk = jk;
  c.position_summary = stage("domain", [&] { return summarize_axis(jx, true, cfg.mu_x, cfg, tx); });
  c.momentum_summary = stage("domain", [&] { return summarize_axis(jk, false, cfg.mu_k, cfg, tk); });
  c.position = tx;
  c.momentum = tk;

  c.raw.eta_x_bar = used_agreement(*c.position_summary, cfg, true);
  c.raw.eta_k_bar = used_agreement(*c.momentum_summary, cfg, false);
  c.raw.mu_x = c.position_summary->mu_estimate;
  c.raw.mu_k = c.momentum_summary->mu_estimate;
  c.raw.n_coinc_x = cfg.counts_x ? cfg.counts_x : jx.total_counts();
  c.raw.n_coinc_k = cfg.counts_k ? cfg.counts_k : jk.total_counts();
  c.delta_x = jx.bin_width_b();
  c.delta_k = jk.bin_width_b();
  return c;
}

Collected collect(const RunConfig& cfg) {
  const DataSource source = stage("config", [&] {
    cfg.validate();
    return cfg.source();
  });
  switch (source) {
    case DataSource::direct: {
      Collected c;
      if (!cfg.n_bar) throw StageError("config", "n_bar is required with eta_x/eta_k");
      c.n_bar = *cfg.n_bar;
      c.raw = CorrelationStats{*cfg.eta_x, *cfg.eta_k, cfg.mu_x.value_or(1.0),
                               cfg.mu_k.value_or(1.0), cfg.counts_x, cfg.counts_k};
      return c;
    }
    case DataSource::inputs: {
      const JointDistribution jx = stage("load", [&] { return load_joint(*cfg.input_position); });
      const JointDistribution jk = stage("load", [&] { return load_joint(*cfg.input_momentum); });
      return stage("agreement", [&] { return collect_from_joints(jx, jk, cfg); });
    }
    case DataSource::model: {
      const SimulatedData sim = stage("simulate", [&] { return simulate_data(cfg); });
      Collected c = stage("agreement",
                          [&] { return collect_from_joints(sim.position, sim.momentum, cfg); });
      c.position_summary->mu_true = sim.mu_true_x;
      c.momentum_summary->mu_true = sim.mu_true_k;
      return c;
    }
  }
  throw StageError("config", "no data source");
}

DetectorGeometry make_geometry(const RunConfig& cfg, const Collected& c) {
  return stage("geometry", [&] {
    DetectorGeometry g;
    if (cfg.rhs_bits) {
      g = DetectorGeometry::from_rhs_bits(*cfg.rhs_bits, c.n_bar, cfg.dims);
    } else {
      const auto dx = cfg.delta_x ? cfg.delta_x : c.delta_x;
      const auto dk = cfg.delta_k ? cfg.delta_k : c.delta_k;
      if (!dx || !dk) {
        throw std::invalid_argument("set rhs_bits or both delta_x and delta_k");
      }
      g.delta_x = *dx;
      g.delta_k = *dk;
      g.n_bar = c.n_bar;
      g.dims = cfg.dims;
    }
    g.fill_x = cfg.fill_x;
    g.fill_k = cfg.fill_k;
    g.efficiency = cfg.efficiency;
    g.validate();
    return g;
  });
}

CorrelationStats effective_stats(const Collected& c, const DetectorGeometry& g) {
  return stage("effective-domain", [&] {
    CorrelationStats s = c.raw;
    s.mu_x = effective_domain(c.raw.mu_x, g.fill_x, g.efficiency);
    s.mu_k = effective_domain(c.raw.mu_k, g.fill_k, g.efficiency);
    s.validate();
    return s;
  });
}

// Shared by certify and keyrate.
RunRecord evaluate_bounds(const std::string& command, const RunConfig& cfg) {
  RunRecord rec;
  rec.command = command;
  rec.config = cfg;
  rec.timestamp = utc_timestamp();

  const Collected c = collect(cfg);
  const DetectorGeometry g = make_geometry(cfg, c);
  const CorrelationStats s = effective_stats(c, g);
  rec.geometry = g;
  rec.stats = s;
  rec.position = c.position_summary;
  rec.momentum = c.momentum_summary;

  stage("certificate", [&] {
    rec.rhs = steering_rhs(g);
    BoundReport cert = steering_certificate(s, g);
    if (s.n_coinc_x && s.n_coinc_k) cert.sigma = lhs_std(s, g.n_bar);
    rec.certificate = cert;
    rec.key_rate = secret_key_rate(s, g);
    if (c.position && c.momentum) {
      rec.windowed_discrete = discrete_steering_check(*c.position, *c.momentum, g);
    }
    return 0;
  });

  if (!rec.rhs->certifiable) {
    rec.warnings.push_back("right-hand side is not positive: bins too coarse to certify anything");
  }
  if (!rec.certificate->applicable) {
    rec.warnings.push_back("eta_bar * mu < 1/2 on at least one quadrature: Fano bound inapplicable");
  }
  if (rec.certificate->sigma && rec.certificate->certifies() &&
      rec.certificate->violation < cfg.sigma_multiplier * *rec.certificate->sigma) {
    rec.warnings.push_back("violation is smaller than sigma_multiplier standard deviations");
  }
  return rec;
}

json fit_json(const GaussianFit& f) {
  return {{"amplitude", f.amplitude}, {"mean", f.mean}, {"sigma", f.sigma},
          {"residual", f.residual}, {"iterations", f.iterations}};
}

json axis_json(const AxisSummary& a) {
  json j = {{"agreement_identity", a.agreement_identity},
            {"agreement_reversed", a.agreement_reversed},
            {"agreement_best", a.agreement_best},
            {"best_ordering", a.best_ordering},
            {"used_ordering", a.used_ordering},
            {"mu_estimate", a.mu_estimate},
            {"mu_source", a.mu_source}};
  json fits = json::array();
  for (const auto& f : a.fits) fits.push_back(fit_json(f));
  j["fits"] = fits;
  if (a.mu_true) j["mu_true"] = *a.mu_true;
  if (a.counts) j["counts"] = *a.counts;
  return j;
}

json report_json(const BoundReport& r) {
  json j = {{"lhs", r.lhs}, {"rhs", r.rhs}, {"violation", r.violation},
            {"applicable", r.applicable}, {"certifies", r.certifies()}};
  j["sigma"] = r.sigma ? json(*r.sigma) : json(nullptr);
  return j;
}

std::filesystem::path output_dir(const RunConfig& cfg) {
  const std::filesystem::path dir = cfg.output_dir.value_or(".");
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::certified: return "certified";
    case Verdict::not_certified: return "not-certified";
    case Verdict::inapplicable: return "inapplicable";
  }
  return "unknown";
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::certified: return 0;
    case Verdict::not_certified: return 1;
    case Verdict::inapplicable: return 2;
  }
  return kExitError;
}

json RunRecord::numeric_json() const {
  json j;
  j["command"] = command;
  json cfg = json::object();
  for (const auto& [k, v] : config_entries(config)) {
    if (k == "output_dir" || k == "input_position" || k == "input_momentum") continue;
    cfg[k] = v;
  }
  j["config"] = cfg;
  if (stats) {
    j["stats"] = {{"eta_x_bar", stats->eta_x_bar},
                  {"eta_k_bar", stats->eta_k_bar},
                  {"mu_x", stats->mu_x},
                  {"mu_k", stats->mu_k}};
    if (stats->n_coinc_x) j["stats"]["n_coinc_x"] = *stats->n_coinc_x;
    if (stats->n_coinc_k) j["stats"]["n_coinc_k"] = *stats->n_coinc_k;
  }
  if (geometry) {
    j["geometry"] = {{"delta_x", geometry->delta_x}, {"delta_k", geometry->delta_k},
                     {"n_bar", geometry->n_bar},     {"fill_x", geometry->fill_x},
                     {"fill_k", geometry->fill_k},   {"efficiency", geometry->efficiency},
                     {"dims", geometry->dims}};
  }
  if (rhs) j["rhs"] = {{"bits", rhs->bits}, {"certifiable", rhs->certifiable}};
  if (certificate) j["certificate"] = report_json(*certificate);
  if (windowed_discrete) j["windowed_discrete_check"] = report_json(*windowed_discrete);
  if (key_rate) {
    j["key_rate"] = {{"bits", key_rate->bits},
                     {"applicable", key_rate->applicable},
                     {"certified", key_rate->certified()}};
  }
  if (position) j["position"] = axis_json(*position);
  if (momentum) j["momentum"] = axis_json(*momentum);
  if (verdict) j["verdict"] = to_string(*verdict);
  if (hedge_mu) j["hedge_min_mu"] = *hedge_mu;
  j["warnings"] = warnings;
  return j;
}

json RunRecord::to_json() const {
  json j = numeric_json();
  j["config"] = config_entries(config);
  j["timestamp"] = timestamp;
  j["version"] = version;
  json out = json::array();
  for (const auto& p : outputs) out.push_back(p.string());
  j["outputs"] = out;
  if (contour_path) j["contour_path"] = contour_path->string();
  return j;
}

void save_contour(const ContourGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "eta_x,eta_k,violation,sigma\n";
  for (std::size_t r = 0; r < grid.eta_x_values.size(); ++r) {
    for (std::size_t c = 0; c < grid.eta_k_values.size(); ++c) {
      const auto ri = static_cast<Eigen::Index>(r);
      const auto ci = static_cast<Eigen::Index>(c);
      out << grid.eta_x_values[r] << ',' << grid.eta_k_values[c] << ',' << grid.violation(ri, ci)
          << ',';
      if (grid.sigma) {
        out << (*grid.sigma)(ri, ci);
      } else {
        out << "nan";
      }
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ContourGrid load_contour(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "eta_x,eta_k,violation,sigma") {
    throw std::runtime_error(path.string() + ": unexpected contour header");
  }
  struct Cell {
    double ex, ek, v, s;
  };
  std::vector<Cell> cells;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 4> f{};
    std::istringstream fields(line);
    std::string tok;
    for (double& x : f) {
      if (!std::getline(fields, tok, ',')) {
        throw std::runtime_error(path.string() + ": short contour record");
      }
      x = std::strtod(tok.c_str(), nullptr);
    }
    cells.push_back({f[0], f[1], f[2], f[3]});
  }
  ContourGrid g;
  for (const Cell& c : cells) {
    if (g.eta_x_values.empty() || g.eta_x_values.back() != c.ex) g.eta_x_values.push_back(c.ex);
  }
  if (g.eta_x_values.empty() || cells.size() % g.eta_x_values.size() != 0) {
    throw std::runtime_error(path.string() + ": contour records do not form a grid");
  }
  const std::size_t cols = cells.size() / g.eta_x_values.size();
  for (std::size_t c = 0; c < cols; ++c) g.eta_k_values.push_back(cells[c].ek);
  const auto rows = static_cast<Eigen::Index>(g.eta_x_values.size());
  g.violation.resize(rows, static_cast<Eigen::Index>(cols));
  const bool has_sigma = !std::isnan(cells.front().s);
  if (has_sigma) g.sigma = Eigen::MatrixXd(rows, static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i / cols);
    const auto c = static_cast<Eigen::Index>(i % cols);
    g.violation(r, c) = cells[i].v;
    if (has_sigma) (*g.sigma)(r, c) = cells[i].s;
  }
  return g;
}

std::uint64_t position_seed(std::uint64_t seed) { return seed; }
std::uint64_t momentum_seed(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ULL; }

SimulatedData simulate_data(const RunConfig& cfg) {
  if (!cfg.model) throw std::invalid_argument("no biphoton model configured");
  const BiphotonModel& m = *cfg.model;
  const int window = cfg.window_pixels.value_or(m.pixels_per_axis);

  const JointDistribution full_x = joint_position_distribution(m);
  const JointDistribution full_k = joint_momentum_distribution(m);
  const WindowedJoint wx = truncate_to_window(full_x, window);
  const WindowedJoint wk = truncate_to_window(full_k, window);

  SimulatedData out{wx.joint, wk.joint, wx.mu_true, wk.mu_true, full_x.mass(), full_k.mass(),
                    std::nullopt, std::nullopt};
  if (cfg.total_counts) {
    out.counts_x = sample_counts(wx.joint, *cfg.total_counts, position_seed(cfg.seed));
    out.counts_k = sample_counts(wk.joint, *cfg.total_counts, momentum_seed(cfg.seed));
    out.position = out.counts_x->to_joint(wx.joint.bin_width_a(), wx.joint.bin_width_b());
    out.momentum = out.counts_k->to_joint(wk.joint.bin_width_a(), wk.joint.bin_width_b());
  }
  return out;
}

RunRecord cmd_simulate(const RunConfig& cfg) {
  RunRecord rec;
  rec.command = "simulate";
  rec.config = cfg;
  rec.timestamp = utc_timestamp();
  stage("config", [&] {
    cfg.validate();
    if (!cfg.model) throw std::invalid_argument("simulate needs a biphoton model");
    return 0;
  });
  const SimulatedData sim = stage("simulate", [&] { return simulate_data(cfg); });

  const auto dir = stage("write", [&] { return output_dir(cfg); });
  const auto px = dir / "position.joint";
  const auto pk = dir / "momentum.joint";
  stage("write", [&] {
    if (sim.counts_x) {
      save_counts(px, *sim.counts_x, sim.position.bin_width_a(), sim.position.bin_width_b(), "x_A",
                  "x_B");
      save_counts(pk, *sim.counts_k, sim.momentum.bin_width_a(), sim.momentum.bin_width_b(), "k_A",
                  "k_B");
    } else {
      save_joint(px, JointFile{sim.position, "x_A", "x_B", std::nullopt});
      save_joint(pk, JointFile{sim.momentum, "k_A", "k_B", std::nullopt});
    }
    return 0;
  });
  rec.outputs = {px, pk};

  AxisSummary ax, ak;
  ax.agreement_identity = agreement_identity(sim.position);
  ax.agreement_reversed = agreement_reversed(sim.position);
  ak.agreement_identity = agreement_identity(sim.momentum);
  ak.agreement_reversed = agreement_reversed(sim.momentum);
  ax.mu_true = sim.mu_true_x;
  ak.mu_true = sim.mu_true_k;
  ax.mu_estimate = sim.mu_true_x;
  ak.mu_estimate = sim.mu_true_k;
  ax.mu_source = ak.mu_source = "simulator";
  ax.counts = sim.position.total_counts();
  ak.counts = sim.momentum.total_counts();
  rec.position = ax;
  rec.momentum = ak;
  return rec;
}

RunRecord cmd_certify(const RunConfig& cfg) {
  RunRecord rec = evaluate_bounds("certify", cfg);
  if (!rec.certificate->applicable) {
    rec.verdict = Verdict::inapplicable;
  } else {
    rec.verdict = rec.certificate->certifies() ? Verdict::certified : Verdict::not_certified;
  }
  return rec;
}

RunRecord cmd_keyrate(const RunConfig& cfg) {
  RunRecord rec = evaluate_bounds("keyrate", cfg);
  if (!rec.key_rate->applicable) {
    rec.verdict = Verdict::inapplicable;
  } else {
    rec.verdict = rec.key_rate->certified() ? Verdict::certified : Verdict::not_certified;
  }
  return rec;
}

RunRecord cmd_hedge(const RunConfig& cfg) {
  RunRecord rec;
  rec.command = "hedge";
  rec.config = cfg;
  rec.timestamp = utc_timestamp();
  const Collected c = collect(cfg);
  const DetectorGeometry g = make_geometry(cfg, c);
  rec.geometry = g;
  rec.rhs = steering_rhs(g);
  rec.stats = c.raw;
  rec.position = c.position_summary;
  rec.momentum = c.momentum_summary;
  rec.hedge_mu = stage("hedge", [&] {
    return hedge_min_domain(c.raw.eta_x_bar, c.raw.eta_k_bar, g.n_bar, rec.rhs->bits, cfg.hedge);
  });
  return rec;
}

RunRecord cmd_contour(const RunConfig& cfg) {
  RunRecord rec;
  rec.command = "contour";
  rec.config = cfg;
  rec.timestamp = utc_timestamp();
  stage("config", [&] {
    cfg.validate();
    return 0;
  });

  // A measured point is optional for a contour; without one, geometry comes
  // from the config alone.
  const bool has_source = cfg.input_position || cfg.input_momentum || cfg.model || cfg.eta_x ||
                          cfg.eta_k;
  Collected c;
  if (has_source) {
    c = collect(cfg);
  } else {
    if (!cfg.n_bar) throw StageError("config", "n_bar is required");
    c.n_bar = *cfg.n_bar;
    c.raw.mu_x = cfg.mu_x.value_or(1.0);
    c.raw.mu_k = cfg.mu_k.value_or(1.0);
    c.raw.n_coinc_x = cfg.counts_x;
    c.raw.n_coinc_k = cfg.counts_k;
  }
  const DetectorGeometry g = make_geometry(cfg, c);
  const CorrelationStats s = effective_stats(c, g);
  rec.geometry = g;
  rec.rhs = steering_rhs(g);

  std::optional<CountPair> counts;
  if (s.n_coinc_x && s.n_coinc_k) counts = CountPair{*s.n_coinc_x, *s.n_coinc_k};
  const ContourGrid grid =
      stage("contour", [&] { return contour_grid(g, s.mu_x, s.mu_k, cfg.resolution, counts); });

  const auto path = stage("write", [&] {
    const auto p = output_dir(cfg) / "contour.csv";
    save_contour(grid, p);
    return p;
  });
  rec.contour_path = path;
  rec.outputs = {path};
  if (has_source) {
    rec.stats = s;
    rec.position = c.position_summary;
    rec.momentum = c.momentum_summary;
    BoundReport point = steering_certificate(s, g);
    if (counts) point.sigma = lhs_std(s, g.n_bar);
    rec.certificate = point;
  }
  return rec;
}

void write_record(const RunRecord& record) {
  if (!record.config.output_dir) return;
  std::filesystem::create_directories(*record.config.output_dir);
  const auto path = *record.config.output_dir / (record.command + "_record.json");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << record.to_json().dump(2) << "\n";
}

}  // namespace fanosteer
