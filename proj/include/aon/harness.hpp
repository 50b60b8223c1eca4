#pragma once

// Sweep orchestration behind the `aon` command line tool.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace aon {

inline constexpr const char* kVersion = "1.0.0";

enum class SweepMode { channel, potential, thresholds, phase, amp, figure1, figure2, selftest };

std::string_view to_string(SweepMode mode);
SweepMode sweep_mode_from_string(std::string_view s);

struct SweepSpec {
  SweepMode mode = SweepMode::channel;
  std::optional<nlohmann::json> prior;  // {"kind": ...}; falls back to two_point(epsilon[0])
  std::vector<double> epsilon;
  std::vector<double> snr;
  std::vector<double> delta;
  std::vector<double> r;
  std::vector<double> s;  // channel / potential abscissae
  std::vector<double> t;  // figure abscissae
  std::vector<std::string> kinds;  // phase: "MMSE", "AMP"
  // amp
  std::optional<int> p;
  std::optional<int> seeds;
  int t_max = 50;
  // sparse thresholds: Bernoulli(k/p_dim) with noise variance sigma2
  std::optional<double> k;
  std::optional<double> p_dim;
  std::optional<double> sigma2;

  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 0;
  int jobs = 1;
};

// Grid values are either a list of numbers or
// {"min": a, "max": b, "count": n, "spacing": "linear" | "log"}.
std::vector<double> grid_from_json(const nlohmann::json& j, const std::string& field);

// Keys absent from `j` take the mode's defaults; keys present are kept as
// given, so an explicitly empty grid fails validation.
SweepSpec spec_from_json(const nlohmann::json& j);

// Throws ConfigError naming the offending field.
void validate(const SweepSpec& spec);

// Canonical JSON of everything that determines the output (excludes out_dir
// and jobs).
nlohmann::json canonical_json(const SweepSpec& spec);
std::string config_hash(const SweepSpec& spec);

struct RunResult {
  int exit_code = 0;
  std::vector<std::filesystem::path> artifacts;
  int failed_cells = 0;
};

// Validates, then writes the mode's artifacts into spec.out_dir. Human
// readable progress and summaries go to `log`.
RunResult run(const SweepSpec& spec, std::ostream& log);

// Floats in CSV output: 17 significant digits.
std::string format_double(double v);

// Quick property suite used by `aon selftest`; returns true when all pass.
bool run_selftest(std::ostream& log);

}  // namespace aon
