#include "aon/prior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "aon/errors.hpp"

namespace aon {

namespace {

constexpr double kWeightSumTol = 1e-12;
constexpr double kMomentTol = 1e-10;

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

DiscretePrior::DiscretePrior(std::vector<double> atoms, std::vector<double> weights, std::string label)
    : atoms_(std::move(atoms)), weights_(std::move(weights)), label_(std::move(label)) {
  if (atoms_.empty()) throw DomainError("prior: no atoms");
  if (atoms_.size() != weights_.size()) throw DomainError("prior: atoms/weights length mismatch");
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!std::isfinite(atoms_[i])) throw DomainError("prior: non-finite atom");
    if (i > 0 && !(atoms_[i] > atoms_[i - 1])) throw DomainError("prior: atoms not strictly increasing");
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i]))
      throw DomainError("prior: weights must be strictly positive");
  }
  const double wsum = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(wsum - 1.0) > kWeightSumTol) throw DomainError("prior: weights sum to " + fmt_double(wsum));
  if (std::abs(mean()) > kMomentTol) throw DomainError("prior: mean is " + fmt_double(mean()) + ", expected 0");
  if (std::abs(variance() - 1.0) > kMomentTol)
    throw DomainError("prior: variance is " + fmt_double(variance()) + ", expected 1");
}

double DiscretePrior::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) m += weights_[i] * atoms_[i];
  return m;
}

double DiscretePrior::variance() const {
  // Second moment about zero; the invariant pins the mean at 0.
  double v = 0.0;
  for (std::size_t i = 0; i < size(); ++i) v += weights_[i] * atoms_[i] * atoms_[i];
  return v;
}

double DiscretePrior::entropy() const {
  double h = 0.0;
  for (double w : weights_) h -= w * std::log(w);
  return h;
}

double DiscretePrior::min_weight() const { return *std::min_element(weights_.begin(), weights_.end()); }

double binary_entropy(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("binary_entropy: epsilon must lie in (0,1)");
  return -epsilon * std::log(epsilon) - (1.0 - epsilon) * std::log1p(-epsilon);
}

DiscretePrior two_point(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("two_point: epsilon must lie in (0,1)");
  const double q = 1.0 - epsilon;
  // Both atoms share the factor sqrt(eps*q) so that the weighted sum cancels
  // to rounding at any eps.
  const double root = std::sqrt(epsilon * q);
  const double mu1 = -root / q;
  const double mu2 = root / epsilon;
  return DiscretePrior({mu1, mu2}, {q, epsilon}, "two_point(" + fmt_double(epsilon) + ")");
}

StandardizedBernoulli standardize_bernoulli(double epsilon, std::int64_t p, double sigma2) {
  if (p < 1) throw DomainError("standardize_bernoulli: p must be >= 1");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("standardize_bernoulli: sigma2 must be > 0");
  auto prior = two_point(epsilon);
  const double snr = static_cast<double>(p) * epsilon * (1.0 - epsilon) / sigma2;
  return {std::move(prior), snr};
}

std::vector<double> sample(const DiscretePrior& prior, std::size_t count, std::uint64_t seed) {
  std::vector<double> out;
  out.reserve(count);
  if (count == 0) return out;

  const auto atoms = prior.atoms();
  const auto weights = prior.weights();
  std::vector<double> cdf(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cdf.begin());
  cdf.back() = 1.0;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = unif(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    out.push_back(atoms[static_cast<std::size_t>(it - cdf.begin())]);
  }
  return out;
}

DiscretePrior prior_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("prior", "expected an object");
  if (!j.contains("kind")) throw ConfigError("prior.kind", "missing");
  if (!j.at("kind").is_string()) throw ConfigError("prior.kind", "expected a string");
  const auto kind = j.at("kind").get<std::string>();
  try {
    if (kind == "two_point") {
      if (!j.contains("epsilon")) throw ConfigError("prior.epsilon", "missing");
      return two_point(j.at("epsilon").get<double>());
    }
    if (kind == "discrete") {
      if (!j.contains("atoms")) throw ConfigError("prior.atoms", "missing");
      if (!j.contains("weights")) throw ConfigError("prior.weights", "missing");
      return DiscretePrior(j.at("atoms").get<std::vector<double>>(), j.at("weights").get<std::vector<double>>(),
                           j.value("label", std::string("discrete")));
    }
  } catch (const DomainError& e) {
    throw ConfigError("prior", e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("prior", e.what());
  }
  throw ConfigError("prior.kind", "unknown kind '" + kind + "'");
}

nlohmann::json prior_to_json(const DiscretePrior& prior) {
  return {{"kind", "discrete"},
          {"label", prior.label()},
          {"atoms", std::vector<double>(prior.atoms().begin(), prior.atoms().end())},
          {"weights", std::vector<double>(prior.weights().begin(), prior.weights().end())}};
}

}  // namespace aon
