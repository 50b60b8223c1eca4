#pragma once

// Synthetic Y = X beta + W instances, MMSE-AMP with the posterior-mean
// denoiser, and the state-evolution recursion that predicts its MSE.

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "aon/prior.hpp"

namespace aon {

struct RegressionInstance {
  DiscretePrior prior;  // distribution beta was drawn from
  Eigen::MatrixXd x;    // n x p, i.i.d. N(0,1)
  Eigen::VectorXd beta;
  Eigen::VectorXd noise;  // i.i.d. N(0, sigma2)
  Eigen::VectorXd y;      // x * beta + noise
  double sigma2;
  std::uint64_t seed;

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index p() const { return x.cols(); }
  double delta() const { return static_cast<double>(n()) / static_cast<double>(p()); }
  double snr() const { return static_cast<double>(p()) / sigma2; }
};

// Deterministic in `seed`. With zero_noise the noise vector is forced to 0
// (sigma2 still sets snr()).
RegressionInstance generate(const DiscretePrior& prior, Eigen::Index n, Eigen::Index p, double sigma2,
                            std::uint64_t seed, bool zero_noise = false);

struct StateEvolution {
  double s_limit;
  std::vector<double> iterates;  // s_0 = delta snr / (1 + snr), s_1, ...
};

using MmseFunction = std::function<double(double)>;

// s_{t+1} = delta / (1/snr + M(s_t)) from the cold start (initial MSE 1).
// Stops when |s_{t+1} - s_t| <= tol * s_t; throws ConvergenceError carrying
// the last iterate after t_max steps.
StateEvolution state_evolution(const MmseFunction& mmse_fn, double delta, double snr, int t_max, double tol);
StateEvolution state_evolution(const DiscretePrior& prior, double delta, double snr, int t_max, double tol);

struct AmpOptions {
  int t_max = 200;
  bool onsager = true;  // false drops the memory term; diagnostics only
  double convergence_tol = 1e-6;
  int convergence_window = 3;
};

struct AmpTrace {
  // Index t = 0..iterations. mse[0] is the error of the zero estimate.
  std::vector<double> mse;           // ||beta - x^t||^2 / p
  std::vector<double> tau2;          // ||z^t||^2 / n
  std::vector<double> se_snr;        // state-evolution effective snr s_t
  std::vector<double> se_mse;        // state-evolution MSE prediction at t
  int iterations = 0;
  bool converged = false;
  bool prior_mismatch = false;  // denoiser prior differs from the generating prior
};

AmpTrace run_amp(const RegressionInstance& instance, const DiscretePrior& prior, const AmpOptions& options = {});

struct McEstimate {
  double estimate;
  double standard_error;
};

// Monte Carlo M(s): draw b ~ prior and N, denoise sqrt(s) b + N, average the
// squared error.
McEstimate mc_mmse(const DiscretePrior& prior, double s, std::size_t samples, std::uint64_t seed);

}  // namespace aon
