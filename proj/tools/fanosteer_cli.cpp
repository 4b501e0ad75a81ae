// fanosteer: steering certification from joint position/momentum data.
//
//   fanosteer certify --config run.cfg
//   fanosteer certify --eta-x 0.694 --eta-k 0.751 --n-bar 256 --rhs-bits 8.284
//   fanosteer simulate --config sim.cfg --output-dir out/
//
// Exit codes: 0 certified (or success), 1 not certified, 2 inapplicable, 3 error.

#include "fanosteer/commands.hpp"
#include "fanosteer/config.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace fanosteer;

struct Overrides {
  std::string config_path;
  std::map<std::string, std::string> values;
  bool print_json = false;
};

void add_common_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "Run configuration (key = value file)");
  // Each flag sets the config key of the same name.
  static const std::pair<const char*, const char*> kKeys[] = {
      {"--eta-x", "eta_x"},           {"--eta-k", "eta_k"},
      {"--mu-x", "mu_x"},             {"--mu-k", "mu_k"},
      {"--n-bar", "n_bar"},           {"--rhs-bits", "rhs_bits"},
      {"--fill-x", "fill_x"},         {"--fill-k", "fill_k"},
      {"--efficiency", "efficiency"}, {"--seed", "seed"},
      {"--threshold", "threshold"},   {"--output-dir", "output_dir"},
      {"--counts-x", "counts_x"},     {"--counts-k", "counts_k"},
      {"--resolution", "resolution"}, {"--ordering", "ordering"},
      {"--mode", "hedge_mode"},       {"--fixed-mu", "hedge_fixed_mu"},
      {"--dims", "dims"},             {"--sigma-multiplier", "sigma_multiplier"},
  };
  for (const auto& [flag, key] : kKeys) {
    cmd->add_option_function<std::string>(
        flag, [&o, k = std::string(key)](const std::string& v) { o.values[k] = v; },
        std::string("Override config key ") + key);
  }
  cmd->add_option_function<std::vector<std::string>>(
      "--set",
      [&o](const std::vector<std::string>& items) {
        for (const auto& item : items) {
          const auto eq = item.find('=');
          if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value");
          o.values[item.substr(0, eq)] = item.substr(eq + 1);
        }
      },
      "Override any config key, e.g. --set sigma_plus=50");
  cmd->add_flag("--json", o.print_json, "Print the full run record as JSON");
}

RunConfig build_config(const Overrides& o) {
  RunConfig cfg = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  for (const auto& [k, v] : o.values) set_config_value(cfg, k, v);
  cfg.validate();
  return cfg;
}

void print_summary(const RunRecord& rec) {
  std::cout << std::setprecision(6) << std::fixed;
  if (rec.stats) {
    std::cout << "eta_x_bar = " << rec.stats->eta_x_bar << "  eta_k_bar = " << rec.stats->eta_k_bar
              << "\nmu_x      = " << rec.stats->mu_x << "  mu_k      = " << rec.stats->mu_k
              << "\n";
  }
  if (rec.rhs) std::cout << "rhs       = " << rec.rhs->bits << " bits\n";
  if (rec.certificate) {
    const auto& c = *rec.certificate;
    std::cout << "lhs       = " << c.lhs << " bits";
    if (c.sigma) std::cout << " +/- " << *c.sigma;
    std::cout << "\nviolation = " << c.violation << " bits\n";
  }
  if (rec.key_rate && rec.command == "keyrate") {
    std::cout << "key rate  >= " << rec.key_rate->bits << " bits per pair\n";
  }
  if (rec.hedge_mu) std::cout << "minimum mu = " << *rec.hedge_mu << "\n";
  for (const auto& p : rec.outputs) std::cout << "wrote " << p.string() << "\n";
  for (const auto& w : rec.warnings) std::cout << "warning: " << w << "\n";
  if (rec.verdict) std::cout << "verdict: " << to_string(*rec.verdict) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fano steering bounds for discretized position/momentum data"};
  app.require_subcommand(1);

  Overrides o;
  using Command = RunRecord (*)(const RunConfig&);
  const std::pair<const char*, std::pair<const char*, Command>> commands[] = {
      {"simulate", {"Generate synthetic biphoton joint distributions", &cmd_simulate}},
      {"certify", {"Evaluate the Fano steering bound and issue a verdict", &cmd_certify}},
      {"hedge", {"Find the smallest domain probability that still certifies", &cmd_hedge}},
      {"contour", {"Write the violation over a grid of agreement probabilities", &cmd_contour}},
      {"keyrate", {"Lower-bound the one-way secret key rate", &cmd_keyrate}},
  };
  std::map<CLI::App*, Command> dispatch;
  for (const auto& [name, info] : commands) {
    CLI::App* sub = app.add_subcommand(name, info.first);
    add_common_options(sub, o);
    dispatch[sub] = info.second;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    const RunConfig cfg = build_config(o);
    CLI::App* chosen = app.get_subcommands().front();
    const RunRecord rec = dispatch.at(chosen)(cfg);
    write_record(rec);
    if (o.print_json) {
      std::cout << rec.to_json().dump(2) << "\n";
    } else {
      print_summary(rec);
    }
    return rec.verdict ? exit_code(*rec.verdict) : 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
