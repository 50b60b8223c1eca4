#include "aon/scalar_channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "aon/errors.hpp"

namespace aon {

namespace {

constexpr double kRelTol = 1e-8;
constexpr double kAbsTolFactor = 1e-14;
constexpr double kPanelTol = 1e-10;
constexpr unsigned kMaxDepth = 12;

void require_s(double s, const char* who) {
  if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError(std::string(who) + ": s must be finite and >= 0");
}

// Log-domain posterior over atoms. logits[j] are unnormalised log posterior
// weights; on return post[j] holds probabilities and logpost[j] their logs.
void softmax(std::span<const double> logits, std::span<double> post, std::span<double> logpost) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double tail = 0.0;  // sum of exp(l - mx) excluding one copy of the max
  bool seen_max = false;
  for (double l : logits) {
    if (!seen_max && l == mx) {
      seen_max = true;
      continue;
    }
    tail += std::exp(l - mx);
  }
  // (l - mx) is exact for the maximiser, so its log-probability keeps full
  // relative accuracy when the posterior is nearly degenerate.
  const double log_norm = std::log1p(tail);
  for (std::size_t j = 0; j < logits.size(); ++j) {
    logpost[j] = (logits[j] - mx) - log_norm;
    post[j] = std::exp(logpost[j]);
  }
}

// Per-atom channel geometry at a fixed s. For the observation generated by
// atom i, y = sqrt(s) a_i + z and the log-likelihood ratio of atom j against
// atom i is -b_ij z - b_ij^2 / 2 with b_ij = sqrt(s) (a_i - a_j).
struct ChannelGeometry {
  std::size_t k;
  std::vector<double> log_w;
  std::vector<double> b;  // k*k, row i
};

ChannelGeometry make_geometry(const DiscretePrior& prior, double s) {
  const auto atoms = prior.atoms();
  const auto weights = prior.weights();
  ChannelGeometry g{prior.size(), {}, {}};
  g.log_w.resize(g.k);
  g.b.resize(g.k * g.k);
  const double rs = std::sqrt(s);
  for (std::size_t j = 0; j < g.k; ++j) g.log_w[j] = std::log(weights[j]);
  for (std::size_t i = 0; i < g.k; ++i)
    for (std::size_t j = 0; j < g.k; ++j) g.b[i * g.k + j] = rs * (atoms[i] - atoms[j]);
  return g;
}

// Integration range for z ~ N(0,1); phi(z) underflows to 0 beyond it.
constexpr double kZMax = 39.0;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

// Points in z where the posterior switches between two atoms, for data
// generated by atom i. The integrand is a smoothed step of width ~1/|b| at
// each of these, so they become panel boundaries.
std::vector<double> breakpoints(const ChannelGeometry& g, std::size_t i) {
  std::vector<double> pts = {-kZMax, -8.0, -4.0, 0.0, 4.0, 8.0, kZMax};
  const double* bi = &g.b[i * g.k];
  for (std::size_t j = 0; j < g.k; ++j) {
    for (std::size_t m = j + 1; m < g.k; ++m) {
      // logit_j(z) = logit_m(z)
      const double slope = bi[j] - bi[m];
      if (slope == 0.0) continue;
      const double z = (g.log_w[j] - g.log_w[m] - 0.5 * (bi[j] * bi[j] - bi[m] * bi[m])) / slope;
      if (std::abs(z) < kZMax) pts.push_back(z);
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// sum_i w_i E_z[ f(i, post, logpost) ] by adaptive Gauss-Kronrod on each
// panel. `scale` sets the absolute floor of the acceptance test.
template <class F>
double channel_expectation(const DiscretePrior& prior, double s, double scale, const char* who, F&& f) {
  using boost::math::quadrature::gauss_kronrod;
  const auto g = make_geometry(prior, s);
  const auto weights = prior.weights();
  std::vector<double> buf(3 * g.k);
  std::span<double> logits(buf.data(), g.k), post(buf.data() + g.k, g.k), logpost(buf.data() + 2 * g.k, g.k);

  double total = 0.0;
  double total_err = 0.0;
  for (std::size_t i = 0; i < g.k; ++i) {
    const double* bi = &g.b[i * g.k];
    auto integrand = [&](double z) {
      const double phi = kInvSqrt2Pi * std::exp(-0.5 * z * z);
      if (phi == 0.0) return 0.0;
      for (std::size_t j = 0; j < g.k; ++j) logits[j] = g.log_w[j] - bi[j] * z - 0.5 * bi[j] * bi[j];
      softmax(logits, post, logpost);
      return phi * f(i, std::span<const double>(post), std::span<const double>(logpost));
    };
    const auto pts = breakpoints(g, i);
    double acc = 0.0;
    double err = 0.0;
    for (std::size_t m = 0; m + 1 < pts.size(); ++m) {
      double e = 0.0;
      acc += gauss_kronrod<double, 31>::integrate(integrand, pts[m], pts[m + 1], kMaxDepth, kPanelTol, &e);
      err += e;
    }
    total += weights[i] * acc;
    total_err += weights[i] * err;
  }
  if (!(total_err <= kRelTol * std::abs(total) + kAbsTolFactor * scale))
    throw QuadratureError(std::string(who) + ": quadrature did not converge at s=" + std::to_string(s) + " for " +
                          prior.label() + " (error estimate " + std::to_string(total_err) + ")");
  return total;
}

double approx_epsilon(const DiscretePrior& prior) { return prior.min_weight(); }

double approx_mutual_info(double epsilon, double s) {
  if (s == 0.0) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  // Integrate in units of the transition point c so the panels are O(1):
  // the adaptive error control misbehaves on intervals of width ~1e-15.
  const double c = 2.0 * epsilon * std::log(1.0 / epsilon);
  auto f = [epsilon, c](double x) { return x > 0.0 ? mmse_q_approx(epsilon, c * x) : 1.0; };
  const double x_end = s / c;
  double total = 0.0;
  const double knots[] = {0.5, 1.0, 2.0, 8.0, 64.0, x_end};
  double lo = 0.0;
  for (double k : knots) {
    const double hi = std::min(k, x_end);
    if (hi > lo) {
      total += gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, 1e-13);
      lo = hi;
    }
  }
  return 0.5 * c * total;
}

}  // namespace

std::string_view to_string(EvalMode mode) { return mode == EvalMode::approx ? "approx" : "quadrature"; }

EvalMode eval_mode(const DiscretePrior& prior) {
  return (prior.size() == 2 && prior.min_weight() < kApproxModeThreshold) ? EvalMode::approx : EvalMode::quadrature;
}

Posterior denoise(const DiscretePrior& prior, double r, double tau2) {
  if (!(tau2 > 0.0)) throw DomainError("denoise: tau2 must be > 0");
  if (std::isnan(r)) throw DomainError("denoise: observation is NaN");
  const auto atoms = prior.atoms();
  const auto weights = prior.weights();
  const std::size_t k = prior.size();
  if (std::isinf(tau2)) return {prior.mean(), prior.variance()};

  constexpr std::size_t kInline = 8;
  double inline_buf[3 * kInline];
  std::vector<double> heap;
  double* buf = inline_buf;
  if (k > kInline) {
    heap.resize(3 * k);
    buf = heap.data();
  }
  std::span<double> logits(buf, k), post(buf + k, k), logpost(buf + 2 * k, k);
  for (std::size_t j = 0; j < k; ++j) {
    const double d = r - atoms[j];
    logits[j] = std::log(weights[j]) - d * d / (2.0 * tau2);
  }
  softmax(logits, post, logpost);
  double mean = 0.0;
  for (std::size_t j = 0; j < k; ++j) mean += post[j] * atoms[j];
  double var = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double d = atoms[j] - mean;
    var += post[j] * d * d;
  }
  return {mean, var};
}

double mmse_quadrature(const DiscretePrior& prior, double s) {
  require_s(s, "mmse");
  if (s == 0.0) return 1.0;
  const auto atoms = prior.atoms();
  // a_i - E[b|y] = sum_j p_j (a_i - a_j), which avoids cancelling two large
  // numbers when one atom is far out.
  auto sq_err = [&](std::size_t i, std::span<const double> post, std::span<const double>) {
    double e = 0.0;
    for (std::size_t j = 0; j < post.size(); ++j) e += post[j] * (atoms[i] - atoms[j]);
    return e * e;
  };
  return std::clamp(channel_expectation(prior, s, 1.0, "mmse", sq_err), 0.0, 1.0);
}

double mutual_info_quadrature(const DiscretePrior& prior, double s) {
  require_s(s, "mutual_info");
  if (s == 0.0) return 0.0;
  const double h = prior.entropy();
  auto post_entropy = [](std::size_t, std::span<const double> post, std::span<const double> logpost) {
    double e = 0.0;
    for (std::size_t j = 0; j < post.size(); ++j) e -= post[j] * logpost[j];
    return e;
  };
  const double cond = channel_expectation(prior, s, h, "mutual_info", post_entropy);
  return std::clamp(h - cond, 0.0, h);
}

double q_function(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double mmse_q_approx(double epsilon, double s) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("mmse_q_approx: epsilon must lie in (0,1)");
  if (!(s > 0.0)) throw DomainError("mmse_q_approx: s must be > 0");
  const double c = 2.0 * epsilon * std::log(1.0 / epsilon);
  return q_function((s - c) / (2.0 * std::sqrt(s * epsilon)));
}

double mmse(const DiscretePrior& prior, double s) {
  require_s(s, "mmse");
  if (s == 0.0) return 1.0;
  if (eval_mode(prior) == EvalMode::approx) return mmse_q_approx(approx_epsilon(prior), s);
  return mmse_quadrature(prior, s);
}

double mutual_info(const DiscretePrior& prior, double s) {
  require_s(s, "mutual_info");
  if (s == 0.0) return 0.0;
  if (eval_mode(prior) == EvalMode::approx) return approx_mutual_info(approx_epsilon(prior), s);
  return mutual_info_quadrature(prior, s);
}

ChannelCurve tabulate_channel(const DiscretePrior& prior, std::span<const double> s_grid) {
  ChannelCurve c{prior, eval_mode(prior), {s_grid.begin(), s_grid.end()}, {}, {}};
  c.i_values.reserve(s_grid.size());
  c.m_values.reserve(s_grid.size());
  for (std::size_t k = 0; k < s_grid.size(); ++k) {
    if (k > 0 && !(s_grid[k] > s_grid[k - 1])) throw DomainError("tabulate_channel: grid must be increasing");
    c.i_values.push_back(mutual_info(prior, s_grid[k]));
    c.m_values.push_back(mmse(prior, s_grid[k]));
  }
  return c;
}

}  // namespace aon
