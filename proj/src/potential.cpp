#include "aon/potential.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "aon/errors.hpp"

namespace aon {

namespace {

constexpr double kBracketPad = 1e-3;
constexpr double kTieTol = 1e-8;
constexpr double kMultiMinimaTol = 1e-6;
constexpr int kBisectBits = 44;  // ~6e-14 relative in s

void require_params(double delta, double snr) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("delta must be finite and > 0");
  if (!(snr > 0.0) || !std::isfinite(snr)) throw DomainError("snr must be finite and > 0");
}

void require_positive_s(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("potential: s must be finite and > 0");
}

// Log-spaced grid over the padded stationary bracket; `intervals` + 1 points.
std::vector<double> log_grid(double lo, double hi, int intervals) {
  std::vector<double> g(static_cast<std::size_t>(intervals) + 1);
  const double llo = std::log(lo);
  const double step = (std::log(hi) - llo) / intervals;
  for (int k = 0; k <= intervals; ++k) g[k] = std::exp(llo + step * k);
  g.front() = lo;
  g.back() = hi;
  return g;
}

template <class F>
double bisect_root(F&& f, double lo, double hi) {
  boost::math::tools::eps_tolerance<double> tol(kBisectBits);
  std::uintmax_t max_iter = 200;
  auto r = boost::math::tools::bisect(f, lo, hi, tol, max_iter);
  return 0.5 * (r.first + r.second);
}

}  // namespace

double phi(double x) {
  if (!(x > 0.0)) throw DomainError("phi: x must be > 0");
  return x - std::log(x) - 1.0;
}

Bracket stationary_bracket(double delta, double snr) {
  require_params(delta, snr);
  return {delta * snr / (1.0 + snr), delta * snr};
}

double potential(double delta, double snr, const DiscretePrior& prior, double s) {
  require_params(delta, snr);
  require_positive_s(s);
  return mutual_info(prior, s) + 0.5 * delta * phi(s / (delta * snr));
}

double potential_deriv(double delta, double snr, const DiscretePrior& prior, double s) {
  require_params(delta, snr);
  require_positive_s(s);
  return 0.5 * (mmse(prior, s) + 1.0 / snr - delta / s);
}

double fixed_point_delta(double snr, const DiscretePrior& prior, double s) {
  if (!(snr > 0.0)) throw DomainError("snr must be > 0");
  if (!(s >= 0.0)) throw DomainError("fixed_point_delta: s must be >= 0");
  return s * (mmse(prior, s) + 1.0 / snr);
}

MinimizeResult minimize(double delta, double snr, const DiscretePrior& prior, int grid_intervals) {
  const auto br = stationary_bracket(delta, snr);
  const auto grid = log_grid(br.lower * (1.0 - kBracketPad), br.upper * (1.0 + kBracketPad), grid_intervals);

  // F' = (delta_FP(s) - delta) / (2 s): same sign as delta_FP - delta, which
  // is the better-conditioned quantity to bisect.
  auto g = [&](double s) { return fixed_point_delta(snr, prior, s) - delta; };

  std::vector<double> signs(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) signs[k] = g(grid[k]);

  MinimizeResult res{};
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    if (signs[k] < 0.0 && signs[k + 1] >= 0.0) {
      res.local_minima.push_back(signs[k + 1] == 0.0 ? grid[k + 1] : bisect_root(g, grid[k], grid[k + 1]));
    }
  }
  if (res.local_minima.empty())
    throw BracketError("minimize: no downward-to-upward crossing of F' inside the stationary bracket");

  std::vector<double> values;
  values.reserve(res.local_minima.size());
  for (double s : res.local_minima) values.push_back(potential(delta, snr, prior, s));
  res.f_star = *std::min_element(values.begin(), values.end());

  // The tie tolerance follows the entropy so that sparse priors, where F is
  // O(H), keep distinct basins apart.
  const double tie = kTieTol * (prior.entropy() + std::abs(res.f_star));
  res.s_lower_star = res.s_upper_star = 0.0;
  bool first = true;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] - res.f_star > tie) continue;
    if (first) res.s_lower_star = res.local_minima[k];
    res.s_upper_star = res.local_minima[k];
    first = false;
  }
  res.multiple_minima = (res.s_upper_star - res.s_lower_star) > kMultiMinimaTol * delta * snr;
  return res;
}

double smallest_stationary(double delta, double snr, const DiscretePrior& prior, int scan_intervals) {
  const auto br = stationary_bracket(delta, snr);
  const auto grid = log_grid(br.lower * (1.0 - kBracketPad), br.upper * (1.0 + kBracketPad), scan_intervals);
  auto g = [&](double s) { return fixed_point_delta(snr, prior, s) - delta; };

  double prev = g(grid.front());
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double cur = g(grid[k]);
    if (prev < 0.0 && cur >= 0.0) return cur == 0.0 ? grid[k] : bisect_root(g, grid[k - 1], grid[k]);
    prev = cur;
  }
  throw BracketError("smallest_stationary: delta_FP(s) - delta has no sign change in the stationary bracket (delta=" +
                     std::to_string(delta) + ", snr=" + std::to_string(snr) + ")");
}

PotentialLandscape landscape(double delta, double snr, const DiscretePrior& prior) {
  const auto m = minimize(delta, snr, prior);
  const double s_amp = smallest_stationary(delta, snr, prior);
  return {delta,          snr,           prior, eval_mode(prior), stationary_bracket(delta, snr), m.f_star,
          m.s_lower_star, m.s_upper_star, s_amp, m.multiple_minima};
}

double amp_mmse_ratio(double snr) {
  if (!(snr > 0.0) || !std::isfinite(snr)) throw DomainError("snr must be finite and > 0");
  return (1.0 + 1.0 / snr) * std::log1p(snr);
}

double normalized_delta(double entropy, double r, double snr) {
  if (!(entropy > 0.0)) throw DomainError("entropy must be > 0");
  if (!(r > 0.0)) throw DomainError("r must be > 0");
  if (!(snr > 0.0)) throw DomainError("snr must be > 0");
  return 2.0 * r * entropy / std::log1p(snr);
}

double normalized_potential(const DiscretePrior& prior, double r, double snr, double t) {
  if (!(t > 0.0)) throw DomainError("normalized_potential: t must be > 0");
  const double h = prior.entropy();
  return potential(normalized_delta(h, r, snr), snr, prior, 2.0 * h * t) / h;
}

double limit_potential(double r, double snr, double t) {
  if (!(r > 0.0)) throw DomainError("r must be > 0");
  if (!(snr > 0.0)) throw DomainError("snr must be > 0");
  if (!(t > 0.0)) throw DomainError("limit_potential: t must be > 0");
  const double l = std::log1p(snr);
  return std::min(1.0, t) + (r / l) * phi(t * l / (r * snr));
}

double limit_t_star(double r, double snr) {
  if (!(r > 0.0) || r == 1.0) throw DomainError("limit_t_star: r must lie in (0,1) or (1,inf)");
  if (!(snr > 0.0)) throw DomainError("snr must be > 0");
  const double l = std::log1p(snr);
  return r < 1.0 ? r * snr / ((1.0 + snr) * l) : r * snr / l;
}

double limit_t_amp(double r, double snr) {
  const double r_amp = amp_mmse_ratio(snr);
  if (!(r > 0.0) || r == r_amp) throw DomainError("limit_t_amp: r must differ from r^AMP");
  const double l = std::log1p(snr);
  return r < r_amp ? r * snr / ((1.0 + snr) * l) : r * snr / l;
}

LimitMinimizers limit_minimizers(double r, double snr) { return {limit_t_star(r, snr), limit_t_amp(r, snr)}; }

}  // namespace aon
