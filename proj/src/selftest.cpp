// Fast property checks behind `aon selftest`. The unit and acceptance test
// binaries hold the full suites; these run in a few seconds.

#include <cmath>
#include <cstdlib>
#include <functional>
#include <string>

#include "aon/amp_sim.hpp"
#include "aon/harness.hpp"
#include "aon/potential.hpp"
#include "aon/prior.hpp"
#include "aon/scalar_channel.hpp"
#include "aon/thresholds.hpp"

namespace aon {

namespace {

struct Suite {
  std::ostream& log;
  int failures = 0;

  void check(const std::string& name, const std::function<bool()>& body) {
    bool ok = false;
    std::string detail;
    try {
      ok = body();
    } catch (const std::exception& e) {
      detail = std::string(" (") + e.what() + ")";
    }
    log << (ok ? "PASS " : "FAIL ") << name << detail << '\n';
    if (!ok) ++failures;
  }
};

}  // namespace

bool run_selftest(std::ostream& log) {
  Suite suite{log};
  const double eps_list[] = {0.5, 0.1, 0.01};
  const double s_list[] = {1e-3, 0.1, 1.0, 5.0, 20.0};

  suite.check("prior: two_point moments", [&] {
    for (double e : eps_list) {
      DiscretePrior p = two_point(e);
      if (std::abs(p.mean()) > 1e-12 || std::abs(p.variance() - 1.0) > 1e-12) return false;
      if (std::abs(p.entropy() - binary_entropy(e)) > 1e-14) return false;
    }
    return true;
  });

  suite.check("channel: I' = M/2 by central differences", [&] {
    for (double e : eps_list) {
      DiscretePrior p = two_point(e);
      for (double s : s_list) {
        double h = 1e-4 * s;
        double d = (mutual_info(p, s + h) - mutual_info(p, s - h)) / (2.0 * h);
        if (std::abs(d - 0.5 * mmse(p, s)) > 1e-5) return false;
      }
    }
    return true;
  });

  suite.check("channel: M <= 1/(1+s) and I <= min(s/2, H)", [&] {
    for (double e : eps_list) {
      DiscretePrior p = two_point(e);
      for (double s : s_list) {
        if (mmse(p, s) > 1.0 / (1.0 + s) + 1e-9) return false;
        if (mutual_info(p, s) > std::min(0.5 * s, p.entropy()) + 1e-9) return false;
      }
    }
    return true;
  });

  suite.check("potential: stationary points inside the bracket", [&] {
    DiscretePrior p = two_point(0.05);
    for (double delta : {0.3, 0.8}) {
      for (double snr : {2.0, 10.0}) {
        PotentialLandscape l = landscape(delta, snr, p);
        for (double s : {l.s_lower_star, l.s_upper_star, l.s_amp})
          if (!(s > l.bracket.lower && s < l.bracket.upper)) return false;
        if (std::abs(fixed_point_delta(snr, p, l.s_amp) - delta) > 1e-8 * delta) return false;
        if (l.s_amp > l.s_lower_star * (1.0 + 1e-9)) return false;
      }
    }
    return true;
  });

  suite.check("amp: state evolution stops at the smallest stationary point", [&] {
    DiscretePrior p = two_point(0.1);
    double delta = 0.5, snr = 10.0;
    StateEvolution se = state_evolution(p, delta, snr, 10000, 1e-12);
    double s_amp = smallest_stationary(delta, snr, p);
    return std::abs(se.s_limit - s_amp) <= 1e-6 * s_amp;
  });

  suite.check("thresholds: delta_AMP / delta_MMSE = r_AMP", [&] {
    for (double snr : {0.5, 5.0, 50.0}) {
      double h = binary_entropy(0.01);
      if (std::abs(delta_amp(h, snr) / delta_mmse(h, snr) - amp_mmse_ratio(snr)) > 1e-12 * amp_mmse_ratio(snr))
        return false;
    }
    return true;
  });

  suite.check("potential: limit minimisers cross 1 at r = 1 and r = r_AMP", [&] {
    double snr = 5.0, ra = amp_mmse_ratio(snr);
    return limit_t_star(0.99, snr) < 1.0 && limit_t_star(1.01, snr) > 1.0 && limit_t_amp(0.99 * ra, snr) < 1.0 &&
           limit_t_amp(1.01 * ra, snr) > 1.0;
  });

  suite.check("harness: %.17g round trips", [&] {
    for (double v : {0.1, 1.0 / 3.0, 2.718281828459045, 1e-300})
      if (std::strtod(format_double(v).c_str(), nullptr) != v) return false;
    return true;
  });

  log << (suite.failures == 0 ? "selftest: all checks passed" : "selftest: failures present") << '\n';
  return suite.failures == 0;
}

}  // namespace aon
