#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aon/errors.hpp"
#include "aon/harness.hpp"

using namespace aon;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("aon_test_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Csv {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

Csv parse_csv(const std::string& text) {
  Csv csv;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) {
    REQUIRE(line.find('\r') == std::string::npos);
    if (line.rfind("#", 0) == 0) {
      csv.comments.push_back(line);
    } else if (csv.header.empty()) {
      csv.header = split(line);
    } else {
      csv.rows.push_back(split(line));
    }
  }
  return csv;
}

double num(const std::string& s) {
  std::size_t used = 0;
  double v = std::stod(s, &used);
  REQUIRE(used == s.size());
  return v;
}

SweepSpec spec_in(const json& j, const fs::path& out) {
  SweepSpec s = spec_from_json(j);
  s.out_dir = out;
  return s;
}

}  // namespace

TEST_CASE("format_double prints 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(INFINITY) == "inf");
}

TEST_CASE("grid_from_json") {
  CHECK(grid_from_json(json::array({1, 2.5}), "x") == std::vector<double>{1.0, 2.5});
  CHECK(grid_from_json(3.0, "x") == std::vector<double>{3.0});
  auto lin = grid_from_json({{"min", 0}, {"max", 1}, {"count", 5}}, "x");
  CHECK(lin == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  auto lg = grid_from_json({{"min", 1e-3}, {"max", 10}, {"count", 5}, {"spacing", "log"}}, "x");
  REQUIRE(lg.size() == 5);
  CHECK(lg.front() == 1e-3);
  CHECK(lg.back() == 10.0);
  CHECK(lg[2] == doctest::Approx(0.1));
  CHECK_THROWS_AS(grid_from_json({{"min", 0}, {"max", 1}, {"count", 5}, {"spacing", "log"}}, "x"), ConfigError);
  CHECK_THROWS_AS(grid_from_json({{"min", 0}, {"max", 1}}, "x"), ConfigError);
  CHECK_THROWS_AS(grid_from_json("abc", "x"), ConfigError);
  CHECK(grid_from_json(json::array(), "x").empty());
}

TEST_CASE("mode names round trip") {
  for (auto m : {SweepMode::channel, SweepMode::potential, SweepMode::thresholds, SweepMode::phase, SweepMode::amp,
                 SweepMode::figure1, SweepMode::figure2, SweepMode::selftest})
    CHECK(sweep_mode_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(sweep_mode_from_string("plot"), ConfigError);
}

TEST_CASE("defaults fill absent keys only") {
  SweepSpec f1 = spec_from_json({{"mode", "figure1"}});
  CHECK(f1.epsilon == std::vector<double>{1e-1, 1e-2, 1e-3});
  CHECK(f1.t.size() == 301);
  SweepSpec f2 = spec_from_json({{"mode", "figure2"}});
  CHECK(f2.epsilon == std::vector<double>{1e-16, 0.0});
  CHECK(f2.snr == std::vector<double>{5.0});
  CHECK(f2.r.front() > 0.0);
  CHECK(f2.r.back() < 3.0);
  SweepSpec empty = spec_from_json({{"mode", "figure1"}, {"epsilon", json::array()}});
  CHECK(empty.epsilon.empty());
}

TEST_CASE("validation names the offending field") {
  auto field_of = [](const json& j) {
    try {
      validate(spec_from_json(j));
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<valid>");
  };
  CHECK(field_of({{"mode", "figure1"}}) == "<valid>");
  CHECK(field_of({{"mode", "figure1"}, {"epsilon", json::array()}}) == "epsilon");
  CHECK(field_of({{"mode", "figure1"}, {"t", json::array()}}) == "t");
  CHECK(field_of({{"mode", "phase"}, {"epsilon", {1.5}}}) == "epsilon");
  CHECK(field_of({{"mode", "phase"}, {"kinds", {"LASSO"}}}) == "kinds");
  CHECK(field_of({{"mode", "amp"}, {"epsilon", 0.1}, {"delta", 1.0}, {"snr", 10}, {"seeds", 2}}) == "p");
  CHECK(field_of({{"mode", "amp"}, {"epsilon", 0.1}, {"delta", 1.0}, {"snr", 10}, {"p", 100}}) == "seeds");
  CHECK(field_of({{"mode", "potential"}, {"epsilon", 0.1}, {"delta", {0.5, 0.6}}, {"snr", 10}}) == "delta");
  CHECK(field_of({{"mode", "channel"}}) == "prior");
  CHECK(field_of({{"mode", "channel"}, {"epsilon", {0.1, 0.2}}}) == "epsilon");
  CHECK(field_of({{"mode", "channel"}, {"epsilon", 0.1}, {"s", {-1.0}}}) == "s");
  CHECK(field_of({{"mode", "thresholds"}, {"k", 10}, {"p_dim", 100}}) == "sigma2");
  CHECK(field_of({{"mode", "figure1"}, {"delta", {1.0}}}) == "delta");
  CHECK(field_of({{"mode", "figure1"}, {"jobs", 0}}) == "jobs");
  CHECK(field_of({{"mode", "figure2"}, {"t", {0.0, 1.0}}}) == "t");
  CHECK(field_of({{"mode", "channel"}, {"prior", {{"kind", "two_point"}, {"epsilon", 3}}}}) == "prior");
  CHECK_THROWS_AS(spec_from_json({{"mode", "figure1"}, {"colour", "red"}}), ConfigError);
  CHECK_THROWS_AS(spec_from_json({{"epsilon", 0.1}}), ConfigError);
}

TEST_CASE("empty grid writes nothing") {
  TempDir dir;
  fs::path out = dir.path / "out";
  SweepSpec s = spec_in({{"mode", "figure1"}, {"epsilon", json::array()}}, out);
  std::ostringstream log;
  CHECK_THROWS_AS(run(s, log), ConfigError);
  CHECK_FALSE(fs::exists(out / "figure1.csv"));
}

TEST_CASE("config hash ignores output location and parallelism") {
  SweepSpec a = spec_from_json({{"mode", "figure1"}, {"seed", 3}});
  SweepSpec b = a;
  b.out_dir = "/elsewhere";
  b.jobs = 4;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  SweepSpec c = a;
  c.seed = 4;
  CHECK(config_hash(a) != config_hash(c));
  c = a;
  c.t.back() = 2.0;
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("figure1 output is reproducible and well formed") {
  TempDir dir;
  json cfg = {{"mode", "figure1"}, {"t", {{"min", 0}, {"max", 3}, {"count", 31}}}};
  SweepSpec one = spec_in(cfg, dir.path / "a");
  SweepSpec par = spec_in(cfg, dir.path / "b");
  par.jobs = 3;
  std::ostringstream log;
  RunResult r1 = run(one, log);
  RunResult r2 = run(par, log);
  CHECK(r1.exit_code == 0);
  CHECK(r1.failed_cells == 0);
  REQUIRE(r1.artifacts.size() == 1);
  const std::string text = slurp(r1.artifacts[0]);
  CHECK(text == slurp(r2.artifacts[0]));

  Csv csv = parse_csv(text);
  REQUIRE(csv.comments.size() >= 2);
  CHECK(csv.comments[0] == std::string("# aon ") + kVersion);
  CHECK(csv.comments[1].find("config_hash=" + config_hash(one)) != std::string::npos);
  CHECK(csv.comments[1].find("seed=0") != std::string::npos);
  CHECK(csv.header == std::vector<std::string>{"epsilon", "t", "i_norm", "m_value", "mode", "error"});
  CHECK(csv.rows.size() == 3 * 31);
  for (const auto& row : csv.rows) {
    REQUIRE(row.size() == csv.header.size());
    const double eps = num(row[0]), t = num(row[1]), i = num(row[2]), m = num(row[3]);
    CHECK(eps > 0.0);
    CHECK(t >= 0.0);
    CHECK(i >= 0.0);
    CHECK(i <= 1.0 + 1e-12);
    CHECK(m >= 0.0);
    CHECK(m <= 1.0);
    CHECK(row[4] == "quadrature");
    CHECK(row[5].empty());
  }
}

TEST_CASE("phase records failed cells in the error column") {
  TempDir dir;
  SweepSpec s = spec_in({{"mode", "phase"}, {"epsilon", {1e-2}}, {"r", {0.5, 1.0}}, {"kinds", {"MMSE"}}}, dir.path);
  std::ostringstream log;
  RunResult res = run(s, log);
  CHECK(res.exit_code == 0);
  CHECK(res.failed_cells == 1);
  Csv csv = parse_csv(slurp(dir.path / "phase.csv"));
  CHECK(csv.header == std::vector<std::string>{"epsilon", "snr", "r", "kind", "m_value", "error"});
  REQUIRE(csv.rows.size() == 2);
  CHECK(csv.rows[0][5].empty());
  CHECK(num(csv.rows[0][4]) > 0.5);
  CHECK(csv.rows[1][4] == "nan");
  CHECK_FALSE(csv.rows[1][5].empty());
}

TEST_CASE("figure2 stamps the evaluation path") {
  TempDir dir;
  SweepSpec s = spec_in({{"mode", "figure2"}, {"r", {0.9, 1.1}}, {"t", {0.5, 1.5}}}, dir.path);
  std::ostringstream log;
  RunResult res = run(s, log);
  CHECK(res.failed_cells == 0);
  Csv csv = parse_csv(slurp(dir.path / "figure2.csv"));
  CHECK(csv.header == std::vector<std::string>{"t", "F_norm", "r", "epsilon", "mode", "error"});
  REQUIRE(csv.rows.size() == 8);
  for (const auto& row : csv.rows) {
    CHECK(row[4] == (num(row[3]) == 0.0 ? "limit" : "approx"));
    CHECK(std::isfinite(num(row[1])));
  }
  Csv mins = parse_csv(slurp(dir.path / "figure2_minimizers.csv"));
  REQUIRE(mins.rows.size() == 4);
  // r = 0.9 minimiser below t = 1, r = 1.1 above, in both panels.
  for (const auto& row : mins.rows) {
    const double r = num(row[1]), t = num(row[2]);
    CHECK((r < 1.0 ? t < 1.0 : t > 1.0));
  }
}

TEST_CASE("channel, potential, thresholds and amp artifacts") {
  TempDir dir;
  std::ostringstream log;

  SweepSpec ch = spec_in({{"mode", "channel"},
                          {"prior", {{"kind", "discrete"}, {"atoms", {-1, 1}}, {"weights", {0.5, 0.5}}}},
                          {"s", {0.0, 1.0}}},
                         dir.path);
  run(ch, log);
  Csv c = parse_csv(slurp(dir.path / "channel.csv"));
  CHECK(c.header == std::vector<std::string>{"s", "i_nats", "mmse", "mode", "error"});
  REQUIRE(c.rows.size() == 2);
  CHECK(num(c.rows[1][2]) == doctest::Approx(0.449599509206673).epsilon(1e-12));

  SweepSpec pot = spec_in({{"mode", "potential"}, {"epsilon", 0.1}, {"delta", 0.5}, {"snr", 10}}, dir.path);
  run(pot, log);
  Csv p = parse_csv(slurp(dir.path / "potential.csv"));
  CHECK(p.header == std::vector<std::string>{"s", "F", "Fprime", "error"});
  CHECK(p.rows.size() == 400);
  CHECK(p.comments.back().rfind("# summary f_star=", 0) == 0);
  json ps = json::parse(slurp(dir.path / "potential_summary.json"));
  CHECK(ps["landscape"]["s_amp"].get<double>() <= ps["landscape"]["s_lower_star"].get<double>() * (1 + 1e-10));

  SweepSpec th = spec_in({{"mode", "thresholds"}, {"k", 10}, {"p_dim", 1e7}, {"sigma2", 2}}, dir.path);
  run(th, log);
  json tj = json::parse(slurp(dir.path / "thresholds.json"));
  CHECK(tj["meta"]["config_hash"] == config_hash(th));
  CHECK(tj["reports"][0]["sparse_simplifications"].is_object());

  SweepSpec amp = spec_in(
      {{"mode", "amp"}, {"epsilon", 0.1}, {"delta", 1.0}, {"snr", 10}, {"p", 200}, {"seeds", 2}, {"t_max", 10}},
      dir.path);
  amp.seed = 5;
  run(amp, log);
  Csv a = parse_csv(slurp(dir.path / "amp.csv"));
  CHECK(a.header == std::vector<std::string>{"seed", "t", "mse_empirical", "mse_se_predicted", "tau2"});
  REQUIRE_FALSE(a.rows.empty());
  CHECK(a.rows.front()[0] == "5");
  CHECK(a.rows.back()[0] == "6");
  json as = json::parse(slurp(dir.path / "amp_summary.json"));
  CHECK(as["seeds"].size() == 2);
  CHECK(as["n"] == 200);
  CHECK(as.contains("m_s_amp"));
}
