#pragma once

// Single-letter Gaussian channel y = sqrt(s) * b + N, b ~ prior, N ~ N(0,1).

#include <span>
#include <string_view>
#include <vector>

#include "aon/prior.hpp"

namespace aon {

// How M(s) and I(s) were evaluated for a prior.
//   quadrature: adaptive Gauss-Kronrod over the noise, per atom.
//   approx:     two-point prior with min weight below kApproxModeThreshold;
//               M(s) is the Q-function surrogate and I(s) = (1/2) int_0^s M.
enum class EvalMode { quadrature, approx };

std::string_view to_string(EvalMode mode);

inline constexpr double kApproxModeThreshold = 1e-12;

EvalMode eval_mode(const DiscretePrior& prior);

struct Posterior {
  double mean;
  double variance;
};

// Posterior mean and variance of b given b + tau * N = r. tau2 = +inf yields
// the prior moments.
Posterior denoise(const DiscretePrior& prior, double r, double tau2);

// M(s) = mmse(b | sqrt(s) b + N). M(0) = 1.
double mmse(const DiscretePrior& prior, double s);

// I(s) = I(b; sqrt(s) b + N) in nats. I(0) = 0.
double mutual_info(const DiscretePrior& prior, double s);

// Quadrature paths regardless of eval_mode. Throw QuadratureError when the
// error estimate exceeds 1e-8 relative.
double mmse_quadrature(const DiscretePrior& prior, double s);
double mutual_info_quadrature(const DiscretePrior& prior, double s);

// Upper Gaussian tail Q(z) = P(N > z).
double q_function(double z);

// Q((s - 2 eps ln(1/eps)) / (2 sqrt(s eps))), the small-eps surrogate for the
// two-point MMSE. Requires eps in (0,1), s > 0.
double mmse_q_approx(double epsilon, double s);

struct ChannelCurve {
  DiscretePrior prior;
  EvalMode mode;
  std::vector<double> s_grid;
  std::vector<double> i_values;
  std::vector<double> m_values;
};

// Tabulates I and M on an increasing grid of nonnegative s.
ChannelCurve tabulate_channel(const DiscretePrior& prior, std::span<const double> s_grid);

}  // namespace aon
