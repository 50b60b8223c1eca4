#include <doctest.h>

#include <cmath>
#include <vector>

#include "aon/errors.hpp"
#include "aon/prior.hpp"
#include "aon/scalar_channel.hpp"
#include "aon/thresholds.hpp"
#include "oracles.hpp"

using namespace aon;

TEST_CASE("threshold formulas") {
  const double h = oracle::binary_entropy(0.01);
  for (double snr : {0.5, 5.0, 100.0}) {
    CHECK(delta_mmse(h, snr) == doctest::Approx(2.0 * h / std::log(1.0 + snr)).epsilon(1e-14));
    CHECK(delta_amp(h, snr) == doctest::Approx(2.0 * h * (1.0 + snr) / snr).epsilon(1e-14));
    // x/(1+x) < ln(1+x) orders the two thresholds.
    CHECK(delta_mmse(h, snr) < delta_amp(h, snr));
  }
  CHECK_THROWS_AS(delta_mmse(h, 0.0), DomainError);
  CHECK_THROWS_AS(delta_amp(-1.0, 5.0), DomainError);
}

TEST_CASE("L constant lies in [0, H] and matches direct integration") {
  for (double eps : {0.5, 0.1, 0.01}) {
    DiscretePrior p = two_point(eps);
    const double h = p.entropy();
    const double l = l_constant(p);
    CHECK(l >= 0.0);
    CHECK(l <= h);
    std::vector<double> atoms(p.atoms().begin(), p.atoms().end()), w(p.weights().begin(), p.weights().end());
    CHECK(l == doctest::Approx(h - oracle::direct_mutual_info(atoms, w, 2.0 * h)).epsilon(1e-7));
  }
}

TEST_CASE("sparse simplifications") {
  SparseThresholds st = sparse_thresholds(10.0, 1e5, 0.5);
  const double e = 1e-4;
  CHECK(st.delta_mmse == doctest::Approx(2.0 * e * std::log(1.0 / e) / std::log(1.0 + 20.0)));
  CHECK(st.delta_amp == doctest::Approx(2.0 * 10.5 * std::log(1e4) / 1e5));
  CHECK_THROWS_AS(sparse_thresholds(10.0, 10.0, 1.0), DomainError);
  CHECK_THROWS_AS(sparse_thresholds(0.0, 10.0, 1.0), DomainError);
  CHECK_THROWS_AS(sparse_thresholds(1.0, 10.0, 0.0), DomainError);
}

TEST_CASE("sparse report standardizes Bernoulli(k/p)") {
  ThresholdReport r = sparse_threshold_report(10.0, 1e7, 2.0);
  const double eps = 1e-6;
  CHECK(r.h == doctest::Approx(oracle::binary_entropy(eps)).epsilon(1e-12));
  CHECK(r.snr == doctest::Approx(10.0 * (1.0 - eps) / 2.0));
  REQUIRE(r.sparse_simplifications.has_value());
  const double ratio_mmse = r.delta_mmse / r.sparse_simplifications->delta_mmse;
  const double ratio_amp = r.delta_amp / r.sparse_simplifications->delta_amp;
  CHECK(ratio_mmse >= 1.0 / 1.08);
  CHECK(ratio_mmse <= 1.08);
  CHECK(ratio_amp >= 1.0 / 1.08);
  CHECK(ratio_amp <= 1.08);
}

TEST_CASE("threshold report fields and renderings") {
  ThresholdReport r = threshold_report(two_point(0.01), 5.0);
  CHECK(r.r_amp == doctest::Approx(r.delta_amp / r.delta_mmse));
  CHECK(r.r_amp == doctest::Approx(2.15011).epsilon(1e-5));
  CHECK_FALSE(r.sparse_simplifications.has_value());
  auto j = to_json(r);
  CHECK(j.at("delta_mmse").get<double>() == r.delta_mmse);
  CHECK(j.at("sparse_simplifications").is_null());
  std::string text = to_text(r);
  CHECK(text.find("delta_amp") != std::string::npos);
  CHECK(text.find("r_amp") != std::string::npos);
}

TEST_CASE("transition kinds") {
  CHECK(to_string(TransitionKind::mmse) == "MMSE");
  CHECK(transition_kind_from_string("AMP") == TransitionKind::amp);
  CHECK(transition_kind_from_string("mmse") == TransitionKind::mmse);
  CHECK_THROWS_AS(transition_kind_from_string("LASSO"), DomainError);
}

TEST_CASE("transition_check at eps = 1e-8") {
  const double eps = 1e-8, snr = 5.0;
  CHECK(transition_check(eps, snr, 0.5, TransitionKind::mmse).m_value >= 0.95);
  CHECK(transition_check(eps, snr, 2.0, TransitionKind::mmse).m_value <= 0.05);
  CHECK(transition_check(eps, snr, 0.5, TransitionKind::amp).m_value >= 0.95);
  // r = 1.5 with kind AMP scales delta_AMP, i.e. above the AMP threshold.
  CHECK(transition_check(eps, snr, 1.5, TransitionKind::amp).m_value <= 0.05);
  TransitionResult res = transition_check(eps, snr, 2.0, TransitionKind::mmse);
  CHECK(res.delta == doctest::Approx(2.0 * delta_mmse(oracle::binary_entropy(eps), snr)));
  CHECK(mmse(two_point(eps), res.s) == res.m_value);
  CHECK_THROWS_AS(transition_check(eps, snr, 1.0, TransitionKind::mmse), DomainError);
  CHECK_THROWS_AS(transition_check(eps, snr, -1.0, TransitionKind::amp), DomainError);
}
