#include "aon/amp_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "aon/errors.hpp"
#include "aon/scalar_channel.hpp"

namespace aon {

namespace {

constexpr double kDivergenceFactor = 10.0;
constexpr int kDivergenceRun = 3;

// Stream separation so beta, X and W never share generator state.
constexpr std::uint64_t kBetaStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kNoiseStream = 0xbf58476d1ce4e5b9ULL;

bool same_prior(const DiscretePrior& a, const DiscretePrior& b) {
  return std::equal(a.atoms().begin(), a.atoms().end(), b.atoms().begin(), b.atoms().end()) &&
         std::equal(a.weights().begin(), a.weights().end(), b.weights().begin(), b.weights().end());
}

}  // namespace

RegressionInstance generate(const DiscretePrior& prior, Eigen::Index n, Eigen::Index p, double sigma2,
                            std::uint64_t seed, bool zero_noise) {
  if (n < 1 || p < 1) throw DomainError("generate: n and p must be >= 1");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("generate: sigma2 must be finite and > 0");

  RegressionInstance inst{prior, {}, {}, {}, {}, sigma2, seed};
  try {
    inst.x.resize(n, p);
    inst.noise.resize(n);
  } catch (const std::bad_alloc&) {
    throw std::runtime_error("generate: cannot allocate " + std::to_string(n) + "x" + std::to_string(p) +
                             " design matrix");
  }

  const auto b = sample(prior, static_cast<std::size_t>(p), seed ^ kBetaStream);
  inst.beta = Eigen::Map<const Eigen::VectorXd>(b.data(), p);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) inst.x(i, j) = normal(rng);

  if (zero_noise) {
    inst.noise.setZero();
  } else {
    std::mt19937_64 noise_rng(seed ^ kNoiseStream);
    const double sd = std::sqrt(sigma2);
    for (Eigen::Index i = 0; i < n; ++i) inst.noise[i] = sd * normal(noise_rng);
  }
  inst.y = inst.x * inst.beta + inst.noise;
  return inst;
}

StateEvolution state_evolution(const MmseFunction& mmse_fn, double delta, double snr, int t_max, double tol) {
  if (t_max < 1) throw DomainError("state_evolution: t_max must be >= 1");
  if (!(tol > 0.0)) throw DomainError("state_evolution: tol must be > 0");
  if (!(delta > 0.0) || !(snr > 0.0)) throw DomainError("state_evolution: delta and snr must be > 0");

  StateEvolution se{0.0, {}};
  double s = delta / (1.0 / snr + 1.0);
  se.iterates.push_back(s);
  for (int t = 0; t < t_max; ++t) {
    const double next = delta / (1.0 / snr + mmse_fn(s));
    se.iterates.push_back(next);
    if (std::abs(next - s) <= tol * s) {
      se.s_limit = next;
      return se;
    }
    s = next;
  }
  throw ConvergenceError("state_evolution: no convergence within " + std::to_string(t_max) + " iterations", s);
}

StateEvolution state_evolution(const DiscretePrior& prior, double delta, double snr, int t_max, double tol) {
  return state_evolution([&prior](double s) { return mmse(prior, s); }, delta, snr, t_max, tol);
}

AmpTrace run_amp(const RegressionInstance& inst, const DiscretePrior& prior, const AmpOptions& opt) {
  if (opt.t_max < 1) throw DomainError("run_amp: t_max must be >= 1");
  const Eigen::Index n = inst.n();
  const Eigen::Index p = inst.p();
  const double delta = inst.delta();
  const double snr = inst.snr();
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));

  AmpTrace tr;
  tr.prior_mismatch = !same_prior(prior, inst.prior);

  // Columns of A = X / sqrt(n) have unit norm on average.
  const Eigen::VectorXd y = inst.y * inv_sqrt_n;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd z_prev = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z(n), r(p), post_var(p);
  double onsager_prev = 0.0;  // mean denoiser derivative from the last step

  double se_mse = 1.0;
  int above = 0;
  for (int t = 0;; ++t) {
    tr.mse.push_back((inst.beta - x).squaredNorm() / static_cast<double>(p));
    tr.se_mse.push_back(se_mse);
    const double se_s = delta / (1.0 / snr + se_mse);
    tr.se_snr.push_back(se_s);

    z.noalias() = y - inv_sqrt_n * (inst.x * x);
    if (opt.onsager && t > 0) z += (onsager_prev / delta) * z_prev;
    const double tau2 = z.squaredNorm() / static_cast<double>(n);
    tr.tau2.push_back(tau2);

    if (tr.mse.back() > kDivergenceFactor * tr.mse.front()) {
      if (++above >= kDivergenceRun)
        throw DivergenceError("run_amp: MSE above 10x its initial value for 3 consecutive iterations");
    } else {
      above = 0;
    }

    const int w = opt.convergence_window;
    if (t >= w) {
      bool flat = true;
      for (int k = t - w + 1; k <= t; ++k) {
        const double a = tr.mse[k - 1];
        const double b = tr.mse[k];
        if (std::abs(b - a) > opt.convergence_tol * std::max(std::abs(a), 1e-300)) flat = false;
      }
      if (flat) tr.converged = true;
    }
    if (tr.converged || t == opt.t_max) {
      tr.iterations = t;
      break;
    }

    r.noalias() = x + inv_sqrt_n * (inst.x.transpose() * z);
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto post = denoise(prior, r[j], tau2);
      x[j] = post.mean;
      post_var[j] = post.variance;
    }
    onsager_prev = post_var.mean() / tau2;
    z_prev = z;
    se_mse = mmse(prior, se_s);
  }
  return tr;
}

McEstimate mc_mmse(const DiscretePrior& prior, double s, std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("mc_mmse: samples must be >= 1");
  if (!(s >= 0.0)) throw DomainError("mc_mmse: s must be >= 0");
  const auto b = sample(prior, samples, seed ^ kBetaStream);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double rs = std::sqrt(s);
  const double tau2 = s > 0.0 ? 1.0 / s : std::numeric_limits<double>::infinity();

  // Welford accumulation of the squared error.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double noise = normal(rng);
    const double est = s > 0.0 ? denoise(prior, b[k] + noise / rs, tau2).mean : prior.mean();
    const double e = (b[k] - est) * (b[k] - est);
    const double d = e - mean;
    mean += d / static_cast<double>(k + 1);
    m2 += d * (e - mean);
  }
  const double var = samples > 1 ? m2 / static_cast<double>(samples - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(samples))};
}

}  // namespace aon
