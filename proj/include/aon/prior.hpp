#pragma once

// Discrete coefficient distributions with zero mean and unit variance.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace aon {

class DiscretePrior {
 public:
  // Validates on construction; throws DomainError when any invariant fails:
  // strictly positive weights summing to 1 (1e-12), strictly increasing finite
  // atoms, zero mean (1e-10) and unit variance (1e-10).
  DiscretePrior(std::vector<double> atoms, std::vector<double> weights, std::string label = {});

  std::span<const double> atoms() const noexcept { return atoms_; }
  std::span<const double> weights() const noexcept { return weights_; }
  const std::string& label() const noexcept { return label_; }
  std::size_t size() const noexcept { return atoms_.size(); }

  double mean() const;
  double variance() const;
  // Shannon entropy in nats.
  double entropy() const;
  double min_weight() const;

 private:
  std::vector<double> atoms_;
  std::vector<double> weights_;
  std::string label_;
};

// Standardised Bernoulli(eps): atoms (-sqrt(eps/(1-eps)), sqrt((1-eps)/eps)),
// weights (1-eps, eps).
DiscretePrior two_point(double epsilon);

inline double entropy(const DiscretePrior& prior) { return prior.entropy(); }

// -eps ln eps - (1-eps) ln(1-eps)
double binary_entropy(double epsilon);

struct StandardizedBernoulli {
  DiscretePrior prior;
  double snr;  // p * eps * (1 - eps) / sigma2
};

// Reduces beta_j ~ Bern(eps) with noise variance sigma2 in dimension p to the
// unit-variance two-point model: beta~ = (beta - eps)/sqrt(eps(1-eps)), with
// the noise rescaled by the same factor.
StandardizedBernoulli standardize_bernoulli(double epsilon, std::int64_t p, double sigma2);

// i.i.d. draws, deterministic in `seed`.
std::vector<double> sample(const DiscretePrior& prior, std::size_t count, std::uint64_t seed);

// {"kind": "two_point", "epsilon": e} or {"kind": "discrete", "atoms": [...], "weights": [...]}
DiscretePrior prior_from_json(const nlohmann::json& j);
nlohmann::json prior_to_json(const DiscretePrior& prior);

}  // namespace aon
