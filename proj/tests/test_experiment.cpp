#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "memcap/capacity.hpp"
#include "memcap/experiment.hpp"

using namespace memcap;

namespace {

SweepConfig small_config() {
  SweepConfig cfg;
  cfg.n = 5;
  cfg.activation = Tanh{};
  cfg.grid.count = 4;
  cfg.trajectory_length = 3000;
  cfg.washout = 200;
  cfg.replications = 3;
  cfg.base_seed = 11;
  return cfg;
}

std::string csv_of(const SweepResult& r) {
  std::ostringstream out;
  write_csv(out, r);
  return out.str();
}

SweepConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_sweep_config(in);
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("config parsing") {
    const SweepConfig cfg = parse(
        "# comment\n"
        "n = 12\n"
        "ensemble = sparse:sparsity=0.2,conditioning=0.5\n"
        "activation = pws:delta=0.5,d=2\n"
        "sigma_count = 5\n"
        "sigma_bounds = 1e-3, 10\n"
        "replications = 4\n"
        "base_seed = 18446744073709551615\n"
        "fixed_reservoir = yes\n");
    CHECK(cfg.n == 12);
    CHECK(std::get<SparseConditionedGaussian>(cfg.ensemble).conditioning == 0.5);
    REQUIRE(cfg.activation.piecewise() != nullptr);
    CHECK(cfg.grid.count == 5);
    REQUIRE(cfg.grid.bounds.has_value());
    CHECK(cfg.grid.bounds->first == 1e-3);
    CHECK(cfg.grid.bounds->second == 10.0);
    CHECK(cfg.base_seed == 18446744073709551615ull);
    CHECK(cfg.fixed_reservoir);

    CHECK(parse("[sweep]\nn = 7\n").n == 7);
    CHECK(!parse("sigma_bounds = auto\n").grid.bounds.has_value());
  }

  TEST_CASE("config round-trips through its text form") {
    SweepConfig cfg = small_config();
    cfg.grid.bounds = std::make_pair(0.001, 3.5);
    cfg.ridge = 1e-9;
    cfg.tau_max = 12;
    const std::string text = format_sweep_config(cfg);
    CHECK(format_sweep_config(parse(text)) == text);
  }

  TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse("n = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("n = abc\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("spectral_norm = 1.0\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("colour = red\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("sigma_bounds = 10, 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("sigma_bounds = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("activation = softsign\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("activation = pws:delta=0.5,d=10\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("replications = 0\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("sigma_count = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("fixed_reservoir = maybe\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse("[other]\nn = 3\n"), std::invalid_argument);
    CHECK_THROWS_AS(load_sweep_config("/nonexistent/memcap.ini"), std::invalid_argument);
  }

  TEST_CASE("log grid") {
    const auto g = log_grid(1e-3, 10.0, 5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 1e-3);
    CHECK(g.back() == 10.0);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(10.0).epsilon(1e-12));
    CHECK_THROWS_AS(log_grid(1.0, 1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(log_grid(0.0, 1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(log_grid(1.0, 2.0, 1), std::invalid_argument);
  }

  TEST_CASE("cell seeds") {
    SweepConfig cfg = small_config();
    CHECK(reservoir_seed(cfg, 0, 0) != reservoir_seed(cfg, 1, 0));
    CHECK(reservoir_seed(cfg, 0, 0) != reservoir_seed(cfg, 0, 1));
    CHECK(input_seed(cfg, 0, 0) != reservoir_seed(cfg, 0, 0));
    cfg.fixed_reservoir = true;
    CHECK(reservoir_seed(cfg, 0, 2) == reservoir_seed(cfg, 3, 2));
    CHECK(input_seed(cfg, 0, 2) != input_seed(cfg, 3, 2));
  }

  TEST_CASE("sweep bookkeeping and determinism across job counts") {
    const SweepConfig cfg = small_config();
    const SweepResult one = run_sweep(cfg, 1);
    const SweepResult four = run_sweep(cfg, 4);
    CHECK(csv_of(one) == csv_of(four));
    CHECK(to_json(one) == to_json(four));
    REQUIRE(one.rows.size() == 4);
    CHECK(one.rows.front().sigma == doctest::Approx(one.grid_lower).epsilon(1e-15));
    CHECK(one.rows.back().sigma == doctest::Approx(one.grid_upper).epsilon(1e-15));
    for (const SigmaRow& row : one.rows) {
      CHECK(row.n_ok + row.n_failed == cfg.replications);
      CHECK(row.regime_saturated + row.regime_linear + row.regime_intermediate == row.n_ok);
      CHECK(row.mc_mean >= 0.0);
      CHECK(row.mc_mean <= cfg.n);
      CHECK(row.mc_sd >= 0.0);
    }
  }

  TEST_CASE("sweep row mean and sd against the cells") {
    // Oracle: rerun each cell by hand from the published seeds.
    SweepConfig cfg = small_config();
    cfg.grid.bounds = std::make_pair(0.1, 1.0);
    cfg.grid.count = 2;
    const SweepResult result = run_sweep(cfg, 1);
    for (int k = 0; k < 2; ++k) {
      double sum = 0.0;
      double sq = 0.0;
      for (int r = 0; r < cfg.replications; ++r) {
        const ReservoirSpec spec =
            sample_reservoir(cfg.n, cfg.ensemble, cfg.spectral_norm, reservoir_seed(cfg, k, r));
        const InputProcess p{result.rows[k].sigma, cfg.trajectory_length, *cfg.washout, input_seed(cfg, k, r)};
        const double mc = estimate_total_mc(run(spec, cfg.activation, p, Vector::Zero(cfg.n))).total;
        sum += mc;
        sq += mc * mc;
      }
      const double mean = sum / cfg.replications;
      const double sd = std::sqrt((sq - cfg.replications * mean * mean) / (cfg.replications - 1));
      CHECK(result.rows[k].mc_mean == doctest::Approx(mean).epsilon(1e-12));
      CHECK(result.rows[k].mc_sd == doctest::Approx(sd).epsilon(1e-6));
    }
  }

  TEST_CASE("piecewise sigmoid sweep spans the two regimes") {
    SweepConfig cfg = small_config();
    cfg.n = 6;
    cfg.activation = PiecewiseSigmoid{0.5, 2.0};
    cfg.fixed_reservoir = true;
    cfg.trajectory_length = 20000;
    // Linear memory at |A| = 0.95 decays slowly; the default 3N lags miss part of it.
    cfg.tau_max = 100;
    cfg.grid.count = 2;
    const SweepResult result = run_sweep(cfg, 2);
    // The auto grid ends at the outermost thresholds of all draws, so every
    // replication is linear on the left end and saturated on the right end.
    const SigmaRow& left = result.rows.front();
    const SigmaRow& right = result.rows.back();
    CHECK(left.regime_linear == cfg.replications);
    CHECK(right.regime_saturated == cfg.replications);
    CHECK(left.mc_mean >= 0.9 * cfg.n);
    CHECK(std::abs(right.mc_mean - 1.0) <= 0.05);
    CHECK(left.mc_mean >= right.mc_mean);
  }

  TEST_CASE("csv round-trip and header") {
    const SweepResult result = run_sweep(small_config(), 1);
    const std::string text = csv_of(result);
    CHECK(text.rfind(std::string(kSweepCsvHeader) + "\n", 0) == 0);
    std::istringstream in(text);
    const auto rows = parse_csv(in);
    REQUIRE(rows.size() == result.rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].sigma == result.rows[i].sigma);
      CHECK(rows[i].mc_mean == result.rows[i].mc_mean);
      CHECK(rows[i].mc_sd == result.rows[i].mc_sd);
      CHECK(rows[i].n_ok == result.rows[i].n_ok);
      CHECK(rows[i].regime_intermediate == result.rows[i].regime_intermediate);
    }
    std::istringstream bad("sigma,mc\n1,2\n");
    CHECK_THROWS_AS(parse_csv(bad), std::invalid_argument);
  }

  TEST_CASE("empty grid refuses to serialize") {
    SweepResult empty;
    std::ostringstream out;
    CHECK_THROWS_AS(write_csv(out, empty), std::invalid_argument);
    CHECK_THROWS_AS(emit_plot(empty, "/tmp/memcap-never.svg"), std::invalid_argument);
  }

  TEST_CASE("json echo and svg") {
    SweepConfig cfg = small_config();
    cfg.keep_profiles = true;
    const SweepResult result = run_sweep(cfg, 1);
    const auto doc = nlohmann::json::parse(to_json(result));
    CHECK(doc["config"].get<std::string>() == format_sweep_config(cfg));
    CHECK(doc["format"] == "memcap.sweep");
    CHECK(doc["rows"].size() == 4);
    CHECK(doc["rows"][0].contains("mean_profile"));

    std::ostringstream svg;
    write_plot_svg(svg, result);
    const std::string s = svg.str();
    CHECK(s.find("<svg") != std::string::npos);
    CHECK(s.find("</svg>") != std::string::npos);
    CHECK(s.find("<rect") != std::string::npos);
  }
}
