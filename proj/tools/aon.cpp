// aon: command line driver for the channel, potential, threshold, phase,
// AMP and figure sweeps.
//
// Settings resolve in order: mode defaults, then --config, then flags.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aon/errors.hpp"
#include "aon/harness.hpp"

namespace {

using nlohmann::json;

double parse_number(const std::string& text, const std::string& field) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw aon::ConfigError(field, "cannot parse '" + text + "' as a number");
  }
  if (used != text.size()) throw aon::ConfigError(field, "cannot parse '" + text + "' as a number");
  return v;
}

// "a,b,c" is a list; "min:max:count" or "min:max:count:log" is a range. An
// empty string is an empty list.
json parse_grid(const std::string& text, const std::string& field) {
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() < 3 || parts.size() > 4)
      throw aon::ConfigError(field, "range must be min:max:count[:log|:linear]");
    json j = {{"min", parse_number(parts[0], field)},
              {"max", parse_number(parts[1], field)},
              {"count", parse_number(parts[2], field)}};
    if (parts.size() == 4) j["spacing"] = parts[3];
    return j;
  }
  json arr = json::array();
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) arr.push_back(parse_number(item, field));
  return arr;
}

json read_json_file(const std::string& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw aon::ConfigError(field, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw aon::ConfigError(field, std::string("invalid JSON: ") + e.what());
  }
}

struct GridFlags {
  std::string epsilon, snr, delta, r, s, t, kinds;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"All-or-nothing phase transitions in Bayesian linear regression: numerics and sweeps"};
  app.set_version_flag("--version", std::string(aon::kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int jobs = 1;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory (default: current directory)");
  app.add_option("--seed", seed, "Base random seed");
  app.add_option("--jobs", jobs, "Worker threads for grid cells")->check(CLI::PositiveNumber);

  GridFlags grids;
  std::string prior_file;
  int p = 0, seeds = 0, t_max = 0;
  double k = 0, p_dim = 0, sigma2 = 0;

  auto add_grid = [&](CLI::App* sub, const std::string& name, std::string& target, const std::string& help) {
    sub->add_option("--" + name, target, help + " (a,b,c or min:max:count[:log])");
  };
  auto add_prior = [&](CLI::App* sub) {
    add_grid(sub, "epsilon", grids.epsilon, "Two-point prior weight");
    sub->add_option("--prior-file", prior_file, "JSON prior specification")->check(CLI::ExistingFile);
  };

  auto* channel = app.add_subcommand("channel", "Tabulate I(s) and M(s) for one prior");
  add_prior(channel);
  add_grid(channel, "s", grids.s, "Channel snr grid");

  auto* potential = app.add_subcommand("potential", "Tabulate F(s), F'(s) and locate its minimisers");
  add_prior(potential);
  add_grid(potential, "delta", grids.delta, "Undersampling ratio n/p");
  add_grid(potential, "snr", grids.snr, "Total snr p/sigma2");
  add_grid(potential, "s", grids.s, "Abscissae (default: around the stationary bracket)");

  auto* thresholds = app.add_subcommand("thresholds", "Report delta_MMSE, delta_AMP, r_AMP and L");
  add_prior(thresholds);
  add_grid(thresholds, "snr", grids.snr, "Total snr p/sigma2");
  thresholds->add_option("--k", k, "Sparse mode: expected number of nonzeros");
  thresholds->add_option("--p-dim", p_dim, "Sparse mode: dimension p");
  thresholds->add_option("--sigma2", sigma2, "Sparse mode: noise variance");

  auto* phase = app.add_subcommand("phase", "Sweep transition checks over (epsilon, snr, r)");
  add_grid(phase, "epsilon", grids.epsilon, "Two-point prior weight");
  add_grid(phase, "snr", grids.snr, "Total snr");
  add_grid(phase, "r", grids.r, "delta / delta_MMSE (MMSE) or delta / delta_AMP (AMP)");
  phase->add_option("--kinds", grids.kinds, "Comma separated: MMSE,AMP");

  auto* amp = app.add_subcommand("amp", "Run MMSE-AMP on synthetic instances against state evolution");
  add_prior(amp);
  add_grid(amp, "delta", grids.delta, "Undersampling ratio n/p");
  add_grid(amp, "snr", grids.snr, "Total snr p/sigma2");
  amp->add_option("--p", p, "Number of coefficients");
  amp->add_option("--seeds", seeds, "Number of independent instances");
  amp->add_option("--t-max", t_max, "Iteration cap");

  auto* figure1 = app.add_subcommand("figure1", "Normalised I and M curves for several epsilon");
  add_grid(figure1, "epsilon", grids.epsilon, "Two-point prior weights");
  add_grid(figure1, "t", grids.t, "Abscissae t = s / (2H)");

  auto* figure2 = app.add_subcommand("figure2", "Normalised potential curves (epsilon = 0 is the limit)");
  add_grid(figure2, "epsilon", grids.epsilon, "Two-point prior weights");
  add_grid(figure2, "snr", grids.snr, "Total snr");
  add_grid(figure2, "r", grids.r, "delta / delta_MMSE");
  add_grid(figure2, "t", grids.t, "Abscissae t = s / (2H)");

  app.add_subcommand("selftest", "Run the built-in property checks");

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* sub = app.get_subcommands().front();
    json cfg = config_path.empty() ? json::object() : read_json_file(config_path, "config");
    if (!cfg.is_object()) throw aon::ConfigError("config", "top level must be a JSON object");
    cfg["mode"] = sub->get_name();

    auto given = [&](const std::string& flag) {
      for (auto* s : {sub, &app}) {
        try {
          if (s->get_option(flag)->count() > 0) return true;
        } catch (const CLI::OptionNotFound&) {
        }
      }
      return false;
    };
    const std::pair<const char*, std::string*> grid_flags[] = {
        {"epsilon", &grids.epsilon}, {"snr", &grids.snr}, {"delta", &grids.delta},
        {"r", &grids.r},             {"s", &grids.s},     {"t", &grids.t}};
    for (const auto& [name, value] : grid_flags)
      if (given(std::string("--") + name)) cfg[name] = parse_grid(*value, name);
    if (given("--prior-file")) {
      cfg["prior"] = read_json_file(prior_file, "prior");
      if (!given("--epsilon")) cfg.erase("epsilon");
    } else if (given("--epsilon") && sub->get_name() != "phase" && sub->get_name() != "figure1" &&
               sub->get_name() != "figure2") {
      cfg.erase("prior");
    }
    if (given("--kinds")) {
      json arr = json::array();
      std::stringstream ss(grids.kinds);
      for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) arr.push_back(item);
      cfg["kinds"] = arr;
    }
    if (given("--p")) cfg["p"] = p;
    if (given("--seeds")) cfg["seeds"] = seeds;
    if (given("--t-max")) cfg["t_max"] = t_max;
    if (given("--k")) cfg["k"] = k;
    if (given("--p-dim")) cfg["p_dim"] = p_dim;
    if (given("--sigma2")) cfg["sigma2"] = sigma2;
    if (given("--out")) cfg["out_dir"] = out_dir;
    if (given("--seed")) cfg["seed"] = seed;
    if (given("--jobs")) cfg["jobs"] = jobs;

    aon::SweepSpec spec = aon::spec_from_json(cfg);
    aon::RunResult result = aon::run(spec, std::cout);
    for (const auto& path : result.artifacts) std::cerr << "wrote " << path.string() << '\n';
    return result.exit_code;
  } catch (const aon::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
