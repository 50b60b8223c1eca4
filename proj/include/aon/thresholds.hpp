#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "aon/potential.hpp"
#include "aon/prior.hpp"

namespace aon {

// 2h / ln(1 + snr)
double delta_mmse(double entropy, double snr);
// 2h (1 + snr) / snr
double delta_amp(double entropy, double snr);

// L = H - I(2H); 0 <= L <= H.
double l_constant(const DiscretePrior& prior);

struct SparseThresholds {
  double delta_mmse;  // 2 (k/p) ln(p/k) / ln(1 + k/sigma2)
  double delta_amp;   // 2 (k + sigma2) ln(p/k) / p
};

SparseThresholds sparse_thresholds(double k, double p, double sigma2);

struct ThresholdReport {
  double h;
  double snr;
  double delta_mmse;
  double delta_amp;
  double r_amp;
  double l_constant;
  std::optional<SparseThresholds> sparse_simplifications;
};

ThresholdReport threshold_report(const DiscretePrior& prior, double snr);

// Bernoulli(k/p) coefficients with noise variance sigma2: standardises to the
// two-point prior with snr = k (1 - k/p) / sigma2 and attaches the sparse
// simplifications.
ThresholdReport sparse_threshold_report(double k, double p, double sigma2);

nlohmann::json to_json(const ThresholdReport& report);
std::string to_text(const ThresholdReport& report);

enum class TransitionKind { mmse, amp };

std::string_view to_string(TransitionKind kind);
TransitionKind transition_kind_from_string(std::string_view s);

struct TransitionResult {
  double m_value;
  double delta;
  double s;  // the minimiser or stationary point M was evaluated at
};

// delta = r * delta_MMSE (kind mmse) or r * delta_AMP (kind amp), then
//   mmse: M(s_upper_star) for r < 1, M(s_lower_star) for r > 1
//   amp:  M(s_amp)
// r = 1 is excluded.
TransitionResult transition_check(const DiscretePrior& prior, double snr, double r, TransitionKind kind);
TransitionResult transition_check(double epsilon, double snr, double r, TransitionKind kind);

}  // namespace aon
