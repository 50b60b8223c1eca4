#pragma once

// Reference computations used only by the tests. They share no code with the
// library: plain trapezoid rules on a fine grid in the noise variable, direct
// Monte Carlo, and brute-force grid searches.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

inline double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// Trapezoid rule for E[g(Z)], Z ~ N(0,1), on [-40, 40]. For smooth g the
// periodic-like decay makes this converge geometrically in the step.
inline double gauss_expect(const std::function<double(double)>& g, double step = 1e-3) {
  const double lo = -40.0;
  const int n = static_cast<int>(std::lround(80.0 / step));
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double z = lo + step * i;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    sum += w * std_normal_pdf(z) * g(z);
  }
  return sum * step;
}

// Two-point prior atoms and weights, rebuilt from the defining moments.
struct TwoPoint {
  double a_lo, a_hi, w_lo, w_hi;
};

inline TwoPoint two_point(double eps) {
  return {-std::sqrt(eps / (1.0 - eps)), std::sqrt((1.0 - eps) / eps), 1.0 - eps, eps};
}

inline double binary_entropy(double eps) { return -eps * std::log(eps) - (1.0 - eps) * std::log(1.0 - eps); }

// 1 / (1 - eps + eps e^x) evaluated without overflow.
inline double closed_form_integrand(double eps, double x) {
  const double u = std::log(eps / (1.0 - eps)) + x;
  const double logistic = u > 0 ? std::exp(-u) / (1.0 + std::exp(-u)) : 1.0 / (1.0 + std::exp(u));
  return logistic / (1.0 - eps);
}

// MMSE of the two-point prior through the closed-form expectation
// E[1 / (1 - eps + eps exp(s/(2 eps (1-eps)) + sqrt(s/(eps (1-eps))) N))].
inline double closed_form_mmse(double eps, double s, double step = 1e-3) {
  const double a = s / (eps * (1.0 - eps));
  return gauss_expect([&](double z) { return closed_form_integrand(eps, 0.5 * a + std::sqrt(a) * z); }, step);
}

struct McResult {
  double mean;
  double standard_error;
};

// Monte Carlo of the same closed-form expectation.
inline McResult closed_form_mmse_mc(double eps, double s, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double a = s / (eps * (1.0 - eps));
  const double ra = std::sqrt(a);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t k = 1; k <= samples; ++k) {
    const double v = closed_form_integrand(eps, 0.5 * a + ra * normal(rng));
    const double d = v - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (v - mean);
  }
  const double var = m2 / static_cast<double>(samples - 1);
  return {mean, std::sqrt(var / static_cast<double>(samples))};
}

// Posterior-mean MMSE and mutual information for an arbitrary discrete prior
// by direct integration over the noise for each atom.
inline double direct_mmse(const std::vector<double>& atoms, const std::vector<double>& weights, double s,
                          double step = 1e-3) {
  const double rs = std::sqrt(s);
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    total += weights[i] * gauss_expect(
                              [&](double z) {
                                // log w_j + log phi(y - sqrt(s) a_j), y = sqrt(s) a_i + z, up to a constant
                                std::vector<double> l(atoms.size());
                                double mx = -std::numeric_limits<double>::infinity();
                                for (std::size_t j = 0; j < atoms.size(); ++j) {
                                  const double d = z + rs * (atoms[i] - atoms[j]);
                                  l[j] = std::log(weights[j]) - 0.5 * d * d;
                                  mx = std::max(mx, l[j]);
                                }
                                double norm = 0.0, num = 0.0;
                                for (std::size_t j = 0; j < atoms.size(); ++j) {
                                  const double p = std::exp(l[j] - mx);
                                  norm += p;
                                  num += p * atoms[j];
                                }
                                const double err = atoms[i] - num / norm;
                                return err * err;
                              },
                              step);
  }
  return total;
}

inline double direct_mutual_info(const std::vector<double>& atoms, const std::vector<double>& weights, double s,
                                 double step = 1e-3) {
  const double rs = std::sqrt(s);
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    total += weights[i] * gauss_expect(
                              [&](double z) {
                                // log phi(z) - log sum_j w_j phi(z + sqrt(s)(a_i - a_j))
                                double mx = -std::numeric_limits<double>::infinity();
                                std::vector<double> l(atoms.size());
                                for (std::size_t j = 0; j < atoms.size(); ++j) {
                                  const double d = z + rs * (atoms[i] - atoms[j]);
                                  l[j] = std::log(weights[j]) - 0.5 * d * d;
                                  mx = std::max(mx, l[j]);
                                }
                                double acc = 0.0;
                                for (double v : l) acc += std::exp(v - mx);
                                return -0.5 * z * z - (mx + std::log(acc));
                              },
                              step);
  }
  return total;
}

// Index of the smallest value of f over the grid.
inline std::size_t grid_argmin(const std::vector<double>& grid, const std::function<double(double)>& f) {
  std::size_t best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  return best;
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i)
    g[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * static_cast<double>(i) / (count - 1));
  return g;
}

}  // namespace oracle
