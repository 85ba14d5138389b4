#include <catch2/catch_amalgamated.hpp>

#include "ostbc/sim.hpp"

using namespace ostbc;

TEST_CASE("substreams are deterministic and distinct") {
  GaussianRng a = GaussianRng::substream(42, 0, 0);
  GaussianRng b = GaussianRng::substream(42, 0, 0);
  GaussianRng c = GaussianRng::substream(43, 0, 0);
  GaussianRng d = GaussianRng::substream(42, 0, 1);
  const auto [a0, a1] = a.gaussian_pair();
  const auto [b0, b1] = b.gaussian_pair();
  const auto [c0, c1] = c.gaussian_pair();
  const auto [d0, d1] = d.gaussian_pair();
  CHECK(a0 == b0);
  CHECK(a1 == b1);
  CHECK(a0 != c0);
  CHECK(a0 != d0);
}

TEST_CASE("channel draws are reproducible and unit-variance") {
  GaussianRng r1 = GaussianRng::substream(7, 0, 0);
  GaussianRng r2 = GaussianRng::substream(7, 0, 0);
  const ChannelRealization h1 = draw_channel(r1, 3, 2);
  const ChannelRealization h2 = draw_channel(r2, 3, 2);
  CHECK((h1.coeffs - h2.coeffs).cwiseAbs().maxCoeff() == 0.0);

  GaussianRng r3 = GaussianRng::substream(8, 0, 0);
  const ChannelRealization h3 = draw_channel(r3, 3, 2);
  CHECK((h1.coeffs - h3.coeffs).cwiseAbs().maxCoeff() > 0.0);

  // law of large numbers on E|h|^2 = 1
  GaussianRng r4 = GaussianRng::substream(9, 0, 0);
  double acc = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) acc += std::norm(r4.gaussian_complex(1.0));
  CHECK(acc / n > 0.98);
  CHECK(acc / n < 1.02);
}

TEST_CASE("transmit adds calibrated noise") {
  const CodeSpec& spec = builtin("G2");
  GaussianRng r = GaussianRng::substream(5, 0, 0);
  const ChannelRealization ch = draw_channel(r, 2, 1);
  const std::vector<cplx> s = {cplx(1, 1), cplx(-1, 3)};

  // no noise: exact encode * channel
  GaussianRng r0 = GaussianRng::substream(5, 1, 0);
  const Eigen::MatrixXcd y0 = transmit(spec, ch, s, 0.0, r0);
  CHECK((y0 - encode(spec, s) * ch.coeffs).cwiseAbs().maxCoeff() == 0.0);

  // reproducibility
  GaussianRng ra = GaussianRng::substream(5, 2, 0);
  GaussianRng rb = GaussianRng::substream(5, 2, 0);
  const Eigen::MatrixXcd ya = transmit(spec, ch, s, 0.5, ra);
  const Eigen::MatrixXcd yb = transmit(spec, ch, s, 0.5, rb);
  CHECK((ya - yb).cwiseAbs().maxCoeff() == 0.0);

  // empirical variance within 2%
  const double n0 = 0.8;
  GaussianRng rv = GaussianRng::substream(6, 0, 0);
  double acc = 0.0;
  const int trials = 50000;  // 100k noise entries (the block is 2x1)
  for (int i = 0; i < trials; ++i) {
    const Eigen::MatrixXcd y = transmit(spec, ch, s, n0, rv);
    acc += (y - y0).squaredNorm();
  }
  const double measured = acc / (trials * 2.0);
  CHECK(measured > 0.98 * n0);
  CHECK(measured < 1.02 * n0);

  CHECK_THROWS_AS(transmit(spec, ch, s, -1.0, rv), std::invalid_argument);
}

TEST_CASE("monte carlo runs are reproducible byte for byte") {
  SimConfig cfg;
  cfg.code = "G2";
  cfg.n_rx = 1;
  cfg.constellation_half = 2;
  cfg.snr_db = {10.0, 20.0};
  cfg.trials = 2000;
  cfg.seed = 99;
  cfg.crosscheck_fraction = 0.05;
  const std::vector<SerRecord> run1 = run_monte_carlo(cfg);
  const std::vector<SerRecord> run2 = run_monte_carlo(cfg);
  CHECK(to_csv(cfg, run1) == to_csv(cfg, run2));
  for (const SerRecord& rec : run1) {
    CHECK(rec.disagreements == 0);
    CHECK(rec.crosschecks == 100);
    CHECK(rec.ser >= 0.0);
    CHECK(rec.ser <= 1.0);
  }
}

TEST_CASE("noiseless simulation has zero error rate") {
  SimConfig cfg;
  cfg.code = "H3";
  cfg.snr_db = {std::numeric_limits<double>::infinity()};
  cfg.trials = 200;
  cfg.seed = 3;
  const std::vector<SerRecord> recs = run_monte_carlo(cfg);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].sym_errors == 0);
  CHECK(recs[0].real_errors == 0);
  CHECK(recs[0].ser == 0.0);
}

TEST_CASE("error rate falls with rising signal-to-noise ratio") {
  SimConfig cfg;
  cfg.code = "G2";
  cfg.snr_db = {10.0, 30.0};
  cfg.trials = 10000;
  cfg.seed = 17;
  const std::vector<SerRecord> recs = run_monte_carlo(cfg);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].ser > recs[1].ser);
  CHECK(recs[0].sym_errors > 0);
}

TEST_CASE("error rate is monotone across a grid up to sampling noise") {
  SimConfig cfg;
  cfg.code = "G2";
  cfg.snr_db = {8.0, 12.0, 16.0, 20.0, 24.0};
  cfg.trials = 10000;
  cfg.seed = 31;
  const std::vector<SerRecord> recs = run_monte_carlo(cfg);
  for (size_t i = 1; i < recs.size(); ++i) {
    const double n = static_cast<double>(recs[i].trials) * 2;  // decisions per point
    const double se = std::sqrt(std::max(recs[i - 1].ser * (1 - recs[i - 1].ser), 1e-12) / n);
    CHECK(recs[i].ser <= recs[i - 1].ser + 3 * se);
  }
}

TEST_CASE("decoder choice does not change the decisions") {
  SimConfig base;
  base.code = "G3";
  base.n_rx = 2;
  base.snr_db = {12.0};
  base.trials = 300;
  base.seed = 23;
  std::vector<long> errors;
  for (DecodeMethod m : {DecodeMethod::trace, DecodeMethod::lattice, DecodeMethod::combining}) {
    SimConfig cfg = base;
    cfg.decoder = m;
    errors.push_back(run_monte_carlo(cfg)[0].sym_errors);
  }
  CHECK(errors[0] == errors[1]);
  CHECK(errors[1] == errors[2]);
}

TEST_CASE("csv format is stable") {
  SimConfig cfg;
  cfg.code = "G2";
  cfg.snr_db = {std::numeric_limits<double>::infinity()};
  cfg.trials = 10;
  cfg.seed = 1;
  const std::string csv = to_csv(cfg, run_monte_carlo(cfg));
  CHECK(csv.find("snr_db,trials,sym_errors,ser,crosschecks,disagreements\n") !=
        std::string::npos);
  CHECK(csv.find("inf,10,0,0,0,0\n") != std::string::npos);
  CHECK(csv.rfind("# ostbc simulate code=G2", 0) == 0);
}

TEST_CASE("config validation") {
  SimConfig cfg;
  cfg.trials = 0;
  CHECK_THROWS_AS(run_monte_carlo(cfg), std::invalid_argument);
  cfg.trials = 10;
  cfg.crosscheck_fraction = 1.5;
  CHECK_THROWS_AS(run_monte_carlo(cfg), std::invalid_argument);
}
