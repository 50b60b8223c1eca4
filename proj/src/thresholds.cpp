#include "aon/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "aon/errors.hpp"
#include "aon/scalar_channel.hpp"

namespace aon {

namespace {

void require_threshold_args(double entropy, double snr) {
  if (!(entropy > 0.0) || !std::isfinite(entropy)) throw DomainError("entropy must be finite and > 0");
  if (!(snr > 0.0) || !std::isfinite(snr)) throw DomainError("snr must be finite and > 0");
}

}  // namespace

double delta_mmse(double entropy, double snr) {
  require_threshold_args(entropy, snr);
  return 2.0 * entropy / std::log1p(snr);
}

double delta_amp(double entropy, double snr) {
  require_threshold_args(entropy, snr);
  return 2.0 * entropy * (1.0 + snr) / snr;
}

double l_constant(const DiscretePrior& prior) {
  const double h = prior.entropy();
  return std::clamp(h - mutual_info(prior, 2.0 * h), 0.0, h);
}

SparseThresholds sparse_thresholds(double k, double p, double sigma2) {
  if (!(p > 0.0) || !(k > 0.0) || !(k < p)) throw DomainError("sparse_thresholds: need 0 < k < p");
  if (!(sigma2 > 0.0)) throw DomainError("sparse_thresholds: sigma2 must be > 0");
  const double log_ratio = std::log(p / k);
  return {2.0 * (k / p) * log_ratio / std::log1p(k / sigma2), 2.0 * (k + sigma2) * log_ratio / p};
}

ThresholdReport threshold_report(const DiscretePrior& prior, double snr) {
  const double h = prior.entropy();
  return {h, snr, delta_mmse(h, snr), delta_amp(h, snr), amp_mmse_ratio(snr), l_constant(prior), std::nullopt};
}

ThresholdReport sparse_threshold_report(double k, double p, double sigma2) {
  const auto sparse = sparse_thresholds(k, p, sigma2);
  // p may be non-integral in sweeps; standardize_bernoulli takes a count.
  const double epsilon = k / p;
  const double snr = p * epsilon * (1.0 - epsilon) / sigma2;
  auto report = threshold_report(two_point(epsilon), snr);
  report.sparse_simplifications = sparse;
  return report;
}

nlohmann::json to_json(const ThresholdReport& r) {
  nlohmann::json j = {{"h", r.h},
                      {"snr", r.snr},
                      {"delta_mmse", r.delta_mmse},
                      {"delta_amp", r.delta_amp},
                      {"r_amp", r.r_amp},
                      {"l_constant", r.l_constant}};
  if (r.sparse_simplifications) {
    j["sparse_simplifications"] = {{"delta_mmse", r.sparse_simplifications->delta_mmse},
                                   {"delta_amp", r.sparse_simplifications->delta_amp}};
  } else {
    j["sparse_simplifications"] = nullptr;
  }
  return j;
}

std::string to_text(const ThresholdReport& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  auto row = [&os](const char* name, double v) { os << std::left << std::setw(26) << name << v << '\n'; };
  row("entropy (nats)", r.h);
  row("snr", r.snr);
  row("delta_mmse", r.delta_mmse);
  row("delta_amp", r.delta_amp);
  row("r_amp", r.r_amp);
  row("L = H - I(2H)", r.l_constant);
  if (r.sparse_simplifications) {
    row("delta_mmse (sparse form)", r.sparse_simplifications->delta_mmse);
    row("delta_amp (sparse form)", r.sparse_simplifications->delta_amp);
  }
  return os.str();
}

std::string_view to_string(TransitionKind kind) { return kind == TransitionKind::mmse ? "MMSE" : "AMP"; }

TransitionKind transition_kind_from_string(std::string_view s) {
  if (s == "MMSE" || s == "mmse") return TransitionKind::mmse;
  if (s == "AMP" || s == "amp") return TransitionKind::amp;
  throw DomainError("unknown transition kind '" + std::string(s) + "'");
}

TransitionResult transition_check(const DiscretePrior& prior, double snr, double r, TransitionKind kind) {
  if (!(r > 0.0) || r == 1.0) throw DomainError("transition_check: r must lie in (0,1) or (1,inf)");
  const double h = prior.entropy();
  if (kind == TransitionKind::mmse) {
    const double delta = r * delta_mmse(h, snr);
    const auto m = minimize(delta, snr, prior);
    const double s = r < 1.0 ? m.s_upper_star : m.s_lower_star;
    return {mmse(prior, s), delta, s};
  }
  const double delta = r * delta_amp(h, snr);
  const double s = smallest_stationary(delta, snr, prior);
  return {mmse(prior, s), delta, s};
}

TransitionResult transition_check(double epsilon, double snr, double r, TransitionKind kind) {
  return transition_check(two_point(epsilon), snr, r, kind);
}

}  // namespace aon
