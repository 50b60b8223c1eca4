#pragma once

// Replica-symmetric potential F(s) = I(s) + (delta/2) phi(s / (delta snr)),
// phi(x) = x - ln x - 1, its minimisers and its smallest stationary point.

#include <vector>

#include "aon/prior.hpp"
#include "aon/scalar_channel.hpp"

namespace aon {

double phi(double x);

// Every stationary point of F lies strictly inside (lower, upper) =
// (delta snr / (1 + snr), delta snr).
struct Bracket {
  double lower;
  double upper;
};

Bracket stationary_bracket(double delta, double snr);

double potential(double delta, double snr, const DiscretePrior& prior, double s);

// F'(s) = (M(s) + 1/snr - delta/s) / 2, exact under I' = M/2.
double potential_deriv(double delta, double snr, const DiscretePrior& prior, double s);

// delta_FP(s) = s (M(s) + 1/snr); s is stationary iff delta_FP(s) = delta.
double fixed_point_delta(double snr, const DiscretePrior& prior, double s);

struct MinimizeResult {
  double f_star;
  double s_lower_star;
  double s_upper_star;
  bool multiple_minima;            // s_upper_star - s_lower_star > 1e-6 delta snr
  std::vector<double> local_minima;  // every refined basin, ascending
};

inline constexpr int kMinimizeGridIntervals = 2000;
inline constexpr int kStationaryScanIntervals = 4000;

// Global minimisers of F. A log-spaced scan of F' over the bracket (padded by
// 1e-3 relative) locates every basin; each is refined by bisection on F' and
// basins whose F is within 1e-8 (H + |F*|) of the minimum count as minimisers.
MinimizeResult minimize(double delta, double snr, const DiscretePrior& prior,
                        int grid_intervals = kMinimizeGridIntervals);

// inf{s : F'(s) = 0}: the first upward crossing of delta_FP(s) = delta found
// by an ascending scan, refined by bisection. Throws BracketError when the
// padded bracket holds no crossing.
double smallest_stationary(double delta, double snr, const DiscretePrior& prior,
                           int scan_intervals = kStationaryScanIntervals);

struct PotentialLandscape {
  double delta;
  double snr;
  DiscretePrior prior;
  EvalMode mode;
  Bracket bracket;
  double f_star;
  double s_lower_star;
  double s_upper_star;
  double s_amp;
  bool multiple_minima;
};

PotentialLandscape landscape(double delta, double snr, const DiscretePrior& prior);

// r^AMP = delta_AMP / delta_MMSE = (1 + 1/snr) ln(1 + snr)
double amp_mmse_ratio(double snr);

// delta = 2 r H / ln(1 + snr), the scaling under which r = delta / delta_MMSE.
double normalized_delta(double entropy, double r, double snr);

// F(2 H t) / H with delta = normalized_delta(H, r, snr).
double normalized_potential(const DiscretePrior& prior, double r, double snr, double t);

// Pointwise small-eps limit: min(1, t) + (r / ln(1+snr)) phi(t ln(1+snr) / (r snr)).
double limit_potential(double r, double snr, double t);

// Global minimiser of limit_potential; r = 1 is excluded.
double limit_t_star(double r, double snr);
// Smallest stationary point of limit_potential; r = r^AMP is excluded.
double limit_t_amp(double r, double snr);

struct LimitMinimizers {
  double t_star;
  double t_amp;
};
LimitMinimizers limit_minimizers(double r, double snr);

}  // namespace aon
