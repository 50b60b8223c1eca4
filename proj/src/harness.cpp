#include "aon/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "aon/amp_sim.hpp"
#include "aon/errors.hpp"
#include "aon/potential.hpp"
#include "aon/prior.hpp"
#include "aon/scalar_channel.hpp"
#include "aon/thresholds.hpp"

namespace aon {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  return out;
}

std::vector<double> logspace(double lo, double hi, int count) {
  std::vector<double> out = linspace(std::log(lo), std::log(hi), count);
  for (double& v : out) v = std::exp(v);
  if (!out.empty()) {
    out.front() = lo;
    out.back() = hi;
  }
  return out;
}

// Keeps CSV cells on one line and free of delimiters.
std::string csv_text(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

const std::vector<std::string> kKnownKeys = {"mode", "prior", "epsilon", "snr",    "delta", "r",      "s",
                                             "t",    "kinds", "p",       "seeds",  "t_max", "k",      "p_dim",
                                             "sigma2", "out_dir", "seed", "jobs"};

std::vector<double> default_grid(SweepMode mode, const std::string& field) {
  if (field == "epsilon") {
    if (mode == SweepMode::figure1) return {1e-1, 1e-2, 1e-3};
    if (mode == SweepMode::figure2) return {1e-16, 0.0};
    if (mode == SweepMode::phase) return {1e-2, 1e-4, 1e-6, 1e-8};
    return {};
  }
  if (field == "snr") {
    if (mode == SweepMode::figure2 || mode == SweepMode::phase) return {5.0};
    return {};
  }
  if (field == "r") {
    if (mode == SweepMode::figure2) return {0.25, 0.5, 0.75, 0.9, 1.1, 1.5, 2.0, 2.3, 2.75};
    if (mode == SweepMode::phase) return {0.5, 2.0};
    return {};
  }
  if (field == "s") {
    if (mode == SweepMode::channel) return logspace(1e-3, 50.0, 200);
    return {};  // potential: derived from the bracket at run time
  }
  if (field == "t") {
    if (mode == SweepMode::figure1) return linspace(0.0, 3.0, 301);
    if (mode == SweepMode::figure2) return linspace(0.01, 3.0, 300);
    return {};
  }
  return {};
}

std::vector<double>& grid_ref(SweepSpec& spec, const std::string& f) {
  if (f == "epsilon") return spec.epsilon;
  if (f == "snr") return spec.snr;
  if (f == "delta") return spec.delta;
  if (f == "r") return spec.r;
  if (f == "s") return spec.s;
  return spec.t;
}

const std::vector<double>& grid_ref(const SweepSpec& spec, const std::string& f) {
  return grid_ref(const_cast<SweepSpec&>(spec), f);
}

template <class T>
T get_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) {
      double v = j.get<double>();
      if (v != std::floor(v)) throw ConfigError(field, "expected an integer");
    }
  }
  return j.get<T>();
}

// Configuration keys each mode reads.
std::vector<std::string> fields_for(SweepMode mode) {
  switch (mode) {
    case SweepMode::channel: return {"prior", "epsilon", "s"};
    case SweepMode::potential: return {"prior", "epsilon", "delta", "snr", "s"};
    case SweepMode::thresholds: return {"prior", "epsilon", "snr", "k", "p_dim", "sigma2"};
    case SweepMode::phase: return {"epsilon", "snr", "r", "kinds"};
    case SweepMode::amp: return {"prior", "epsilon", "delta", "snr", "p", "seeds", "t_max"};
    case SweepMode::figure1: return {"epsilon", "t"};
    case SweepMode::figure2: return {"epsilon", "snr", "r", "t"};
    case SweepMode::selftest: return {};
  }
  return {};
}

bool uses(SweepMode mode, const std::string& field) {
  auto f = fields_for(mode);
  return std::find(f.begin(), f.end(), field) != f.end();
}

void require_grid(const SweepSpec& spec, const std::string& field) {
  if (grid_ref(spec, field).empty()) throw ConfigError(field, "grid must be non-empty");
}

void require_single(const SweepSpec& spec, const std::string& field) {
  const auto& g = grid_ref(spec, field);
  if (g.size() != 1)
    throw ConfigError(field, "mode " + std::string(to_string(spec.mode)) + " takes exactly one value (got " +
                                 std::to_string(g.size()) + ")");
}

void check_values(const SweepSpec& spec, const std::string& field, const std::function<bool(double)>& ok,
                  const std::string& domain) {
  for (double v : grid_ref(spec, field))
    if (!std::isfinite(v) || !ok(v)) throw ConfigError(field, "value " + format_double(v) + " outside " + domain);
}

// The prior shared by every cell of single-prior modes.
DiscretePrior single_prior(const SweepSpec& spec) {
  if (spec.prior) return prior_from_json(*spec.prior);
  return two_point(spec.epsilon.at(0));
}

void validate_single_prior(const SweepSpec& spec) {
  if (spec.prior) {
    if (!spec.epsilon.empty()) throw ConfigError("epsilon", "give either a prior or epsilon, not both");
    try {
      (void)prior_from_json(*spec.prior);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("prior", e.what());
    }
    return;
  }
  if (spec.epsilon.empty()) throw ConfigError("prior", "mode requires a prior or a single epsilon");
  require_single(spec, "epsilon");
}

template <class F>
void parallel_for(std::size_t count, int jobs, F&& body) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), count);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string header_lines(const SweepSpec& spec) {
  std::ostringstream os;
  os << "# aon " << kVersion << '\n';
  os << "# mode=" << to_string(spec.mode) << " seed=" << spec.seed << " config_hash=" << config_hash(spec) << '\n';
  return os.str();
}

json meta_json(const SweepSpec& spec) {
  return {{"version", kVersion},
          {"mode", std::string(to_string(spec.mode))},
          {"seed", spec.seed},
          {"config_hash", config_hash(spec)},
          {"config", canonical_json(spec)}};
}

std::filesystem::path write_file(const SweepSpec& spec, const std::string& name, const std::string& body) {
  std::filesystem::create_directories(spec.out_dir);
  std::filesystem::path path = spec.out_dir / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << body;
  out.close();
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
  return path;
}

std::string row(std::initializer_list<std::string> cells) {
  std::string out;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  out += '\n';
  return out;
}

// ---- per-mode runners ----

RunResult run_channel(const SweepSpec& spec, std::ostream& log) {
  DiscretePrior prior = single_prior(spec);
  EvalMode mode = eval_mode(prior);
  std::vector<std::string> rows(spec.s.size());
  std::atomic<int> failed{0};
  parallel_for(spec.s.size(), spec.jobs, [&](std::size_t i) {
    double s = spec.s[i];
    try {
      rows[i] = row({format_double(s), format_double(mutual_info(prior, s)), format_double(mmse(prior, s)),
                     std::string(to_string(mode)), ""});
    } catch (const std::exception& e) {
      ++failed;
      rows[i] = row({format_double(s), "nan", "nan", std::string(to_string(mode)), csv_text(e.what())});
    }
  });
  std::string body = header_lines(spec) + "s,i_nats,mmse,mode,error\n";
  for (auto& r : rows) body += r;
  RunResult res;
  res.failed_cells = failed;
  res.artifacts.push_back(write_file(spec, "channel.csv", body));
  log << "channel: " << spec.s.size() << " rows, prior " << prior.label() << ", mode " << to_string(mode) << '\n';
  return res;
}

json landscape_json(const PotentialLandscape& l) {
  return {{"delta", l.delta},
          {"snr", l.snr},
          {"mode", std::string(to_string(l.mode))},
          {"bracket", {l.bracket.lower, l.bracket.upper}},
          {"f_star", l.f_star},
          {"s_lower_star", l.s_lower_star},
          {"s_upper_star", l.s_upper_star},
          {"s_amp", l.s_amp},
          {"multiple_minima", l.multiple_minima},
          {"gap_upper_lower", l.s_upper_star - l.s_lower_star},
          {"gap_lower_amp", l.s_lower_star - l.s_amp},
          {"m_lower_star", mmse(l.prior, l.s_lower_star)},
          {"m_upper_star", mmse(l.prior, l.s_upper_star)},
          {"m_amp", mmse(l.prior, l.s_amp)}};
}

RunResult run_potential(const SweepSpec& spec, std::ostream& log) {
  DiscretePrior prior = single_prior(spec);
  double delta = spec.delta.front();
  double snr = spec.snr.front();
  std::vector<double> s = spec.s;
  if (s.empty()) {
    Bracket b = stationary_bracket(delta, snr);
    s = logspace(b.lower * 0.5, b.upper * 1.5, 400);
  }
  std::vector<std::string> rows(s.size());
  std::atomic<int> failed{0};
  parallel_for(s.size(), spec.jobs, [&](std::size_t i) {
    try {
      rows[i] = row({format_double(s[i]), format_double(potential(delta, snr, prior, s[i])),
                     format_double(potential_deriv(delta, snr, prior, s[i])), ""});
    } catch (const std::exception& e) {
      ++failed;
      rows[i] = row({format_double(s[i]), "nan", "nan", csv_text(e.what())});
    }
  });
  PotentialLandscape l = landscape(delta, snr, prior);
  std::string body = header_lines(spec) + "s,F,Fprime,error\n";
  for (auto& r : rows) body += r;
  std::ostringstream summary;
  summary << "# summary f_star=" << format_double(l.f_star) << " s_lower_star=" << format_double(l.s_lower_star)
          << " s_upper_star=" << format_double(l.s_upper_star) << " s_amp=" << format_double(l.s_amp)
          << " multiple_minima=" << (l.multiple_minima ? "true" : "false") << '\n';
  body += summary.str();

  json j = {{"meta", meta_json(spec)}, {"prior", prior_to_json(prior)}, {"landscape", landscape_json(l)}};
  RunResult res;
  res.failed_cells = failed;
  res.artifacts.push_back(write_file(spec, "potential.csv", body));
  res.artifacts.push_back(write_file(spec, "potential_summary.json", j.dump(2) + "\n"));
  log << summary.str().substr(2);
  return res;
}

RunResult run_thresholds(const SweepSpec& spec, std::ostream& log) {
  std::vector<ThresholdReport> reports;
  if (spec.k) {
    reports.push_back(sparse_threshold_report(*spec.k, *spec.p_dim, *spec.sigma2));
  } else {
    DiscretePrior prior = single_prior(spec);
    for (double snr : spec.snr) reports.push_back(threshold_report(prior, snr));
  }
  json arr = json::array();
  for (const auto& r : reports) {
    arr.push_back(to_json(r));
    log << to_text(r);
  }
  json j = {{"meta", meta_json(spec)}, {"reports", arr}};
  log << arr.dump(2) << '\n';
  RunResult res;
  res.artifacts.push_back(write_file(spec, "thresholds.json", j.dump(2) + "\n"));
  return res;
}

RunResult run_phase(const SweepSpec& spec, std::ostream& log) {
  struct Cell {
    double eps, snr, r;
    std::string kind;
  };
  std::vector<Cell> cells;
  for (double e : spec.epsilon)
    for (double snr : spec.snr)
      for (double r : spec.r)
        for (const auto& k : spec.kinds) cells.push_back({e, snr, r, k});
  std::vector<std::string> rows(cells.size());
  std::atomic<int> failed{0};
  parallel_for(cells.size(), spec.jobs, [&](std::size_t i) {
    const Cell& c = cells[i];
    std::string m = "nan", err;
    try {
      m = format_double(transition_check(c.eps, c.snr, c.r, transition_kind_from_string(c.kind)).m_value);
    } catch (const std::exception& e) {
      ++failed;
      err = csv_text(e.what());
    }
    rows[i] = row({format_double(c.eps), format_double(c.snr), format_double(c.r), c.kind, m, err});
  });
  std::string body = header_lines(spec) + "epsilon,snr,r,kind,m_value,error\n";
  for (auto& r : rows) body += r;
  RunResult res;
  res.failed_cells = failed;
  res.artifacts.push_back(write_file(spec, "phase.csv", body));
  log << "phase: " << cells.size() << " cells, " << res.failed_cells << " failed\n";
  return res;
}

RunResult run_amp_mode(const SweepSpec& spec, std::ostream& log) {
  DiscretePrior prior = single_prior(spec);
  double delta = spec.delta.front();
  double snr = spec.snr.front();
  const int p = *spec.p;
  const auto n = static_cast<Eigen::Index>(std::llround(delta * p));
  if (n < 1) throw ConfigError("delta", "delta * p rounds to zero rows");
  const double sigma2 = static_cast<double>(p) / snr;
  const int seeds = *spec.seeds;

  struct SeedRun {
    std::uint64_t seed;
    std::string rows;
    json summary;
    double final_mse = kNaN;
  };
  std::vector<SeedRun> runs(static_cast<std::size_t>(seeds));
  std::atomic<int> failed{0};
  AmpOptions opt;
  opt.t_max = spec.t_max;
  parallel_for(runs.size(), spec.jobs, [&](std::size_t i) {
    SeedRun& r = runs[i];
    r.seed = spec.seed + i;
    try {
      RegressionInstance inst = generate(prior, n, p, sigma2, r.seed);
      AmpTrace tr = run_amp(inst, prior, opt);
      for (std::size_t t = 0; t < tr.mse.size(); ++t)
        r.rows += row({std::to_string(r.seed), std::to_string(t), format_double(tr.mse[t]),
                       format_double(tr.se_mse[t]), format_double(t < tr.tau2.size() ? tr.tau2[t] : kNaN)});
      r.final_mse = tr.mse.back();
      r.summary = {{"seed", r.seed},
                   {"iterations", tr.iterations},
                   {"converged", tr.converged},
                   {"final_mse", r.final_mse},
                   {"error", nullptr}};
    } catch (const std::exception& e) {
      ++failed;
      r.summary = {{"seed", r.seed}, {"error", e.what()}};
    }
  });

  std::string body = header_lines(spec) + "seed,t,mse_empirical,mse_se_predicted,tau2\n";
  json per_seed = json::array();
  double sum = 0.0, sum2 = 0.0;
  int ok = 0;
  for (auto& r : runs) {
    body += r.rows;
    per_seed.push_back(r.summary);
    if (std::isfinite(r.final_mse)) {
      sum += r.final_mse;
      sum2 += r.final_mse * r.final_mse;
      ++ok;
    }
  }
  double mean = ok > 0 ? sum / ok : kNaN;
  double se = ok > 1 ? std::sqrt(std::max(0.0, (sum2 - ok * mean * mean) / (ok - 1)) / ok) : kNaN;

  PotentialLandscape l = landscape(delta, snr, prior);
  json se_json;
  try {
    StateEvolution evo = state_evolution(prior, delta, snr, 10000, 1e-10);
    se_json = {{"s_limit", evo.s_limit}, {"m_limit", mmse(prior, evo.s_limit)}, {"steps", evo.iterates.size()}};
  } catch (const ConvergenceError& e) {
    se_json = {{"s_limit", e.last_value()}, {"error", e.what()}};
  }
  double m_amp = mmse(prior, l.s_amp);
  json j = {{"meta", meta_json(spec)},
            {"prior", prior_to_json(prior)},
            {"n", n},
            {"p", p},
            {"delta", delta},
            {"snr", snr},
            {"sigma2", sigma2},
            {"landscape", landscape_json(l)},
            {"state_evolution", se_json},
            {"m_s_amp", m_amp},
            {"mean_final_mse", ok > 0 ? json(mean) : json(nullptr)},
            {"standard_error", ok > 1 ? json(se) : json(nullptr)},
            {"abs_gap_to_m_s_amp", ok > 0 ? json(std::abs(mean - m_amp)) : json(nullptr)},
            {"seeds", per_seed}};
  RunResult res;
  res.failed_cells = failed;
  res.artifacts.push_back(write_file(spec, "amp.csv", body));
  res.artifacts.push_back(write_file(spec, "amp_summary.json", j.dump(2) + "\n"));
  log << "amp: n=" << n << " p=" << p << " seeds=" << seeds << " mean final mse=" << format_double(mean)
      << " M(s_amp)=" << format_double(m_amp) << '\n';
  return res;
}

RunResult run_figure1(const SweepSpec& spec, std::ostream& log) {
  std::size_t nt = spec.t.size();
  std::size_t cells = spec.epsilon.size() * nt;
  std::vector<std::string> rows(cells);
  std::vector<DiscretePrior> priors;
  for (double e : spec.epsilon) priors.push_back(two_point(e));
  std::atomic<int> failed{0};
  parallel_for(cells, spec.jobs, [&](std::size_t i) {
    const DiscretePrior& prior = priors[i / nt];
    double eps = spec.epsilon[i / nt];
    double t = spec.t[i % nt];
    double h = prior.entropy();
    std::string mode(to_string(eval_mode(prior)));
    try {
      rows[i] = row({format_double(eps), format_double(t), format_double(mutual_info(prior, 2.0 * h * t) / h),
                     format_double(mmse(prior, 2.0 * h * t)), mode, ""});
    } catch (const std::exception& e) {
      ++failed;
      rows[i] = row({format_double(eps), format_double(t), "nan", "nan", mode, csv_text(e.what())});
    }
  });
  std::string body = header_lines(spec) + "epsilon,t,i_norm,m_value,mode,error\n";
  for (auto& r : rows) body += r;
  RunResult res;
  res.failed_cells = failed;
  res.artifacts.push_back(write_file(spec, "figure1.csv", body));
  log << "figure1: " << cells << " rows\n";
  return res;
}

RunResult run_figure2(const SweepSpec& spec, std::ostream& log) {
  const double snr = spec.snr.front();
  std::size_t nt = spec.t.size();
  std::size_t curves = spec.epsilon.size() * spec.r.size();
  std::vector<std::string> rows(curves * nt);
  std::vector<std::string> minimizer_rows(curves);
  std::atomic<int> failed{0};

  auto curve_eps = [&](std::size_t c) { return spec.epsilon[c / spec.r.size()]; };
  auto curve_r = [&](std::size_t c) { return spec.r[c % spec.r.size()]; };
  auto mode_of = [](double eps) {
    return eps == 0.0 ? std::string("limit") : std::string(to_string(eval_mode(two_point(eps))));
  };

  parallel_for(curves * nt, spec.jobs, [&](std::size_t i) {
    std::size_t c = i / nt;
    double eps = curve_eps(c), r = curve_r(c), t = spec.t[i % nt];
    std::string mode = mode_of(eps);
    try {
      double f = eps == 0.0 ? limit_potential(r, snr, t) : normalized_potential(two_point(eps), r, snr, t);
      rows[i] = row({format_double(t), format_double(f), format_double(r), format_double(eps), mode, ""});
    } catch (const std::exception& e) {
      ++failed;
      rows[i] = row({format_double(t), "nan", format_double(r), format_double(eps), mode, csv_text(e.what())});
    }
  });

  // Minimiser locations per curve, in units of t = s / (2H).
  parallel_for(curves, spec.jobs, [&](std::size_t c) {
    double eps = curve_eps(c), r = curve_r(c);
    std::string mode = mode_of(eps);
    std::string lo = "nan", up = "nan", amp = "nan", err;
    try {
      if (eps == 0.0) {
        std::string e1, e2;
        try {
          lo = up = format_double(limit_t_star(r, snr));
        } catch (const std::exception& e) {
          e1 = e.what();
        }
        try {
          amp = format_double(limit_t_amp(r, snr));
        } catch (const std::exception& e) {
          e2 = e.what();
        }
        err = e1.empty() ? e2 : (e2.empty() ? e1 : e1 + "; " + e2);
      } else {
        DiscretePrior prior = two_point(eps);
        double h = prior.entropy();
        PotentialLandscape l = landscape(normalized_delta(h, r, snr), snr, prior);
        lo = format_double(l.s_lower_star / (2.0 * h));
        up = format_double(l.s_upper_star / (2.0 * h));
        amp = format_double(l.s_amp / (2.0 * h));
      }
    } catch (const std::exception& e) {
      err = e.what();
    }
    if (!err.empty()) ++failed;
    minimizer_rows[c] = row({format_double(eps), format_double(r), lo, up, amp, mode, csv_text(err)});
  });

  std::string body = header_lines(spec) + "t,F_norm,r,epsilon,mode,error\n";
  for (auto& r : rows) body += r;
  std::string mbody = header_lines(spec) + "epsilon,r,t_lower_star,t_upper_star,t_amp,mode,error\n";
  for (auto& r : minimizer_rows) mbody += r;
  RunResult res;
  res.failed_cells = failed;
  res.artifacts.push_back(write_file(spec, "figure2.csv", body));
  res.artifacts.push_back(write_file(spec, "figure2_minimizers.csv", mbody));
  log << "figure2: " << curves << " curves of " << nt << " points\n" << mbody;
  return res;
}

}  // namespace

std::string_view to_string(SweepMode mode) {
  switch (mode) {
    case SweepMode::channel: return "channel";
    case SweepMode::potential: return "potential";
    case SweepMode::thresholds: return "thresholds";
    case SweepMode::phase: return "phase";
    case SweepMode::amp: return "amp";
    case SweepMode::figure1: return "figure1";
    case SweepMode::figure2: return "figure2";
    case SweepMode::selftest: return "selftest";
  }
  return "unknown";
}

SweepMode sweep_mode_from_string(std::string_view s) {
  for (auto m : {SweepMode::channel, SweepMode::potential, SweepMode::thresholds, SweepMode::phase, SweepMode::amp,
                 SweepMode::figure1, SweepMode::figure2, SweepMode::selftest})
    if (to_string(m) == s) return m;
  throw ConfigError("mode", "unknown mode '" + std::string(s) + "'");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> grid_from_json(const json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>()};
  if (j.is_array()) {
    std::vector<double> out;
    for (const auto& v : j) out.push_back(get_number<double>(v, field));
    return out;
  }
  if (j.is_object()) {
    for (const char* key : {"min", "max", "count"})
      if (!j.contains(key)) throw ConfigError(field, std::string("range is missing '") + key + "'");
    double lo = get_number<double>(j["min"], field + ".min");
    double hi = get_number<double>(j["max"], field + ".max");
    int count = get_number<int>(j["count"], field + ".count");
    std::string spacing = j.value("spacing", std::string("linear"));
    if (count < 0) throw ConfigError(field + ".count", "must be >= 0");
    if (!(lo <= hi)) throw ConfigError(field, "range needs min <= max");
    if (spacing == "linear") return linspace(lo, hi, count);
    if (spacing == "log") {
      if (!(lo > 0.0)) throw ConfigError(field + ".min", "log spacing needs min > 0");
      return logspace(lo, hi, count);
    }
    throw ConfigError(field + ".spacing", "expected 'linear' or 'log'");
  }
  throw ConfigError(field, "expected a number, a list of numbers or a {min,max,count} range");
}

SweepSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "top level must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), it.key()) == kKnownKeys.end())
      throw ConfigError(it.key(), "unknown configuration key");
  if (!j.contains("mode")) throw ConfigError("mode", "missing");
  if (!j["mode"].is_string()) throw ConfigError("mode", "expected a string");

  SweepSpec spec;
  spec.mode = sweep_mode_from_string(j["mode"].get<std::string>());
  if (j.contains("prior") && !j["prior"].is_null()) {
    if (!j["prior"].is_object()) throw ConfigError("prior", "expected an object with a 'kind'");
    spec.prior = j["prior"];
  }
  for (const char* f : {"epsilon", "snr", "delta", "r", "s", "t"}) {
    std::string field = f;
    if (j.contains(field))
      grid_ref(spec, field) = grid_from_json(j[field], field);
    else if (!(spec.prior && field == "epsilon"))
      grid_ref(spec, field) = default_grid(spec.mode, field);
  }
  if (j.contains("kinds")) {
    const json& k = j["kinds"];
    if (k.is_string()) {
      spec.kinds = {k.get<std::string>()};
    } else if (k.is_array()) {
      for (const auto& v : k) {
        if (!v.is_string()) throw ConfigError("kinds", "expected strings");
        spec.kinds.push_back(v.get<std::string>());
      }
    } else {
      throw ConfigError("kinds", "expected a string or a list of strings");
    }
  } else if (spec.mode == SweepMode::phase) {
    spec.kinds = {"MMSE", "AMP"};
  }
  if (j.contains("p")) spec.p = get_number<int>(j["p"], "p");
  if (j.contains("seeds")) spec.seeds = get_number<int>(j["seeds"], "seeds");
  if (j.contains("t_max")) spec.t_max = get_number<int>(j["t_max"], "t_max");
  if (j.contains("k")) spec.k = get_number<double>(j["k"], "k");
  if (j.contains("p_dim")) spec.p_dim = get_number<double>(j["p_dim"], "p_dim");
  if (j.contains("sigma2")) spec.sigma2 = get_number<double>(j["sigma2"], "sigma2");
  if (j.contains("out_dir")) {
    if (!j["out_dir"].is_string()) throw ConfigError("out_dir", "expected a string");
    spec.out_dir = j["out_dir"].get<std::string>();
  }
  if (j.contains("seed")) spec.seed = get_number<std::uint64_t>(j["seed"], "seed");
  if (j.contains("jobs")) spec.jobs = get_number<int>(j["jobs"], "jobs");
  return spec;
}

void validate(const SweepSpec& spec) {
  if (spec.jobs < 1) throw ConfigError("jobs", "must be >= 1");
  const SweepMode m = spec.mode;
  if (m == SweepMode::selftest) return;

  if (spec.prior && !uses(m, "prior"))
    throw ConfigError("prior", "mode " + std::string(to_string(m)) + " builds two-point priors from epsilon");
  for (const char* f : {"epsilon", "snr", "delta", "r", "s", "t"})
    if (!grid_ref(spec, f).empty() && !uses(m, f))
      throw ConfigError(f, "not used by mode " + std::string(to_string(m)));
  if (!spec.kinds.empty() && !uses(m, "kinds"))
    throw ConfigError("kinds", "not used by mode " + std::string(to_string(m)));
  if ((spec.p || spec.seeds) && !uses(m, "p")) throw ConfigError(spec.p ? "p" : "seeds", "only used by mode amp");
  if ((spec.k || spec.p_dim || spec.sigma2) && m != SweepMode::thresholds)
    throw ConfigError(spec.k ? "k" : (spec.p_dim ? "p_dim" : "sigma2"), "only used by mode thresholds");

  auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  auto positive = [](double v) { return v > 0.0; };
  auto nonneg = [](double v) { return v >= 0.0; };

  switch (m) {
    case SweepMode::channel:
      validate_single_prior(spec);
      if (!spec.prior) check_values(spec, "epsilon", open_unit, "(0, 1)");
      require_grid(spec, "s");
      check_values(spec, "s", nonneg, "[0, inf)");
      break;
    case SweepMode::potential:
      validate_single_prior(spec);
      if (!spec.prior) check_values(spec, "epsilon", open_unit, "(0, 1)");
      require_single(spec, "delta");
      require_single(spec, "snr");
      check_values(spec, "delta", positive, "(0, inf)");
      check_values(spec, "snr", positive, "(0, inf)");
      check_values(spec, "s", positive, "(0, inf)");
      break;
    case SweepMode::thresholds: {
      bool sparse = spec.k || spec.p_dim || spec.sigma2;
      if (sparse) {
        if (!spec.k) throw ConfigError("k", "sparse thresholds need k, p_dim and sigma2");
        if (!spec.p_dim) throw ConfigError("p_dim", "sparse thresholds need k, p_dim and sigma2");
        if (!spec.sigma2) throw ConfigError("sigma2", "sparse thresholds need k, p_dim and sigma2");
        if (spec.prior || !spec.epsilon.empty() || !spec.snr.empty())
          throw ConfigError("k", "give either k/p_dim/sigma2 or a prior with snr, not both");
        if (!(*spec.k > 0.0 && *spec.k < *spec.p_dim)) throw ConfigError("k", "needs 0 < k < p_dim");
        if (!(*spec.sigma2 > 0.0) || !std::isfinite(*spec.sigma2)) throw ConfigError("sigma2", "must be > 0");
      } else {
        validate_single_prior(spec);
        if (!spec.prior) check_values(spec, "epsilon", open_unit, "(0, 1)");
        require_grid(spec, "snr");
        check_values(spec, "snr", positive, "(0, inf)");
      }
      break;
    }
    case SweepMode::phase:
      require_grid(spec, "epsilon");
      require_grid(spec, "snr");
      require_grid(spec, "r");
      check_values(spec, "epsilon", open_unit, "(0, 1)");
      check_values(spec, "snr", positive, "(0, inf)");
      check_values(spec, "r", positive, "(0, inf)");
      if (spec.kinds.empty()) throw ConfigError("kinds", "grid must be non-empty");
      for (const auto& k : spec.kinds) {
        try {
          (void)transition_kind_from_string(k);
        } catch (const std::exception&) {
          throw ConfigError("kinds", "unknown kind '" + k + "' (expected MMSE or AMP)");
        }
      }
      break;
    case SweepMode::amp:
      validate_single_prior(spec);
      if (!spec.prior) check_values(spec, "epsilon", open_unit, "(0, 1)");
      require_single(spec, "delta");
      require_single(spec, "snr");
      check_values(spec, "delta", positive, "(0, inf)");
      check_values(spec, "snr", positive, "(0, inf)");
      if (!spec.p) throw ConfigError("p", "amp mode requires p");
      if (!spec.seeds) throw ConfigError("seeds", "amp mode requires seeds");
      if (*spec.p < 1) throw ConfigError("p", "must be >= 1");
      if (*spec.seeds < 1) throw ConfigError("seeds", "must be >= 1");
      if (spec.t_max < 1) throw ConfigError("t_max", "must be >= 1");
      if (std::llround(spec.delta.front() * *spec.p) < 1) throw ConfigError("delta", "delta * p rounds to zero rows");
      break;
    case SweepMode::figure1:
      require_grid(spec, "epsilon");
      require_grid(spec, "t");
      check_values(spec, "epsilon", open_unit, "(0, 1)");
      check_values(spec, "t", nonneg, "[0, inf)");
      break;
    case SweepMode::figure2:
      require_grid(spec, "epsilon");
      require_single(spec, "snr");
      require_grid(spec, "r");
      require_grid(spec, "t");
      check_values(spec, "epsilon", [](double v) { return v >= 0.0 && v < 1.0; }, "[0, 1) (0 selects the limit)");
      check_values(spec, "snr", positive, "(0, inf)");
      check_values(spec, "r", positive, "(0, inf)");
      check_values(spec, "t", positive, "(0, inf)");
      break;
    case SweepMode::selftest: break;
  }
}

json canonical_json(const SweepSpec& spec) {
  json j;
  j["mode"] = std::string(to_string(spec.mode));
  j["prior"] = spec.prior ? *spec.prior : json(nullptr);
  for (const char* f : {"epsilon", "snr", "delta", "r", "s", "t"}) j[f] = grid_ref(spec, f);
  j["kinds"] = spec.kinds;
  j["p"] = spec.p ? json(*spec.p) : json(nullptr);
  j["seeds"] = spec.seeds ? json(*spec.seeds) : json(nullptr);
  j["t_max"] = spec.t_max;
  j["k"] = spec.k ? json(*spec.k) : json(nullptr);
  j["p_dim"] = spec.p_dim ? json(*spec.p_dim) : json(nullptr);
  j["sigma2"] = spec.sigma2 ? json(*spec.sigma2) : json(nullptr);
  j["seed"] = spec.seed;
  return j;
}

std::string config_hash(const SweepSpec& spec) {
  // 64-bit FNV-1a over the canonical JSON text.
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical_json(spec).dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunResult run(const SweepSpec& spec, std::ostream& log) {
  validate(spec);
  RunResult res;
  switch (spec.mode) {
    case SweepMode::channel: res = run_channel(spec, log); break;
    case SweepMode::potential: res = run_potential(spec, log); break;
    case SweepMode::thresholds: res = run_thresholds(spec, log); break;
    case SweepMode::phase: res = run_phase(spec, log); break;
    case SweepMode::amp: res = run_amp_mode(spec, log); break;
    case SweepMode::figure1: res = run_figure1(spec, log); break;
    case SweepMode::figure2: res = run_figure2(spec, log); break;
    case SweepMode::selftest: res.exit_code = run_selftest(log) ? 0 : 1; return res;
  }
  if (res.failed_cells > 0) log << res.failed_cells << " grid cell(s) failed; see the error column\n";
  return res;
}

}  // namespace aon
