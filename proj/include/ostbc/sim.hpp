// sim.hpp - deterministic Monte Carlo link simulation.
//
// Trials are driven by per-trial random substreams so results are bitwise
// reproducible for a given configuration regardless of execution order.
// Substream derivation: the generator is std::mt19937_64 seeded with
//     s = splitmix64(splitmix64(splitmix64(seed) ^ point_index) ^ trial_index)
// and Gaussian variates come from a Box-Muller transform of 53-bit uniforms.
//
// SNR convention: snr_db is Es/N0 where Es = 2(4L^2-1)/3 is the mean energy
// of one complex symbol of the squared alphabet and N0 the complex noise
// variance per received sample. The CSV header repeats this.

#pragma once

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "ostbc/decode.hpp"
#include "ostbc/schedule.hpp"

namespace ostbc {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

class GaussianRng {
 public:
  explicit GaussianRng(uint64_t seed) : eng_(seed) {}

  static GaussianRng substream(uint64_t seed, uint64_t point, uint64_t trial) {
    return GaussianRng(splitmix64(splitmix64(splitmix64(seed) ^ point) ^ trial));
  }

  // uniform in [0, 1) with 53 random bits
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  int uniform_index(int n) {
    const int v = static_cast<int>(uniform() * n);
    return v >= n ? n - 1 : v;
  }

  // standard normal pair (Box-Muller)
  std::pair<double, double> gaussian_pair() {
    constexpr double two_pi = 6.283185307179586476925287;
    double u1 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = two_pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

  // complex circularly-symmetric Gaussian with total variance `var`
  cplx gaussian_complex(double var) {
    auto [z0, z1] = gaussian_pair();
    const double s = std::sqrt(var / 2.0);
    return {s * z0, s * z1};
  }

 private:
  std::mt19937_64 eng_;
};

// i.i.d. unit-variance complex Gaussian coefficients (variance 1/2 per
// real dimension).
inline ChannelRealization draw_channel(GaussianRng& rng, int n_tx, int n_rx) {
  Eigen::MatrixXcd h(n_tx, n_rx);
  for (int j = 0; j < n_rx; ++j)
    for (int i = 0; i < n_tx; ++i) h(i, j) = rng.gaussian_complex(1.0);
  return ChannelRealization(h);
}

// Y = G(s) H + V with complex noise variance n0 per entry.
inline Eigen::MatrixXcd transmit(const CodeSpec& spec, const ChannelRealization& channel,
                                 std::span<const cplx> s, double n0, GaussianRng& rng) {
  if (n0 < 0.0) throw std::invalid_argument("transmit: noise variance must be >= 0");
  Eigen::MatrixXcd y = encode(spec, s) * channel.coeffs;
  if (n0 > 0.0) {
    for (Eigen::Index j = 0; j < y.cols(); ++j)
      for (Eigen::Index t = 0; t < y.rows(); ++t) y(t, j) += rng.gaussian_complex(n0);
  }
  return y;
}

struct SimConfig {
  std::string code = "G2";
  int n_rx = 1;
  int constellation_half = 2;  // L
  std::vector<double> snr_db;  // +inf means noiseless
  long trials = 10000;
  uint64_t seed = 1;
  DecodeMethod decoder = DecodeMethod::lattice;
  double crosscheck_fraction = 0.0;  // leading fraction of trials checked against the oracle
};

struct SerRecord {
  double snr_db = 0.0;
  long trials = 0;
  long sym_errors = 0;
  long real_errors = 0;  // wrong real components (2K per trial)
  double ser = 0.0;
  long crosschecks = 0;
  long disagreements = 0;
};

inline std::vector<SerRecord> run_monte_carlo(const SimConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("simulate: trials must be >= 1");
  if (cfg.crosscheck_fraction < 0.0 || cfg.crosscheck_fraction > 1.0)
    throw std::invalid_argument("simulate: crosscheck fraction must lie in [0, 1]");
  const CodeSpec spec = resolve_code(cfg.code);
  const Constellation constellation(cfg.constellation_half);
  const std::vector<int> points = constellation.points();
  const double es = constellation.symbol_energy();
  const long n_checked = static_cast<long>(cfg.crosscheck_fraction * cfg.trials);

  std::vector<SerRecord> records;
  for (size_t p = 0; p < cfg.snr_db.size(); ++p) {
    const double snr = cfg.snr_db[p];
    const double n0 = std::isinf(snr) ? 0.0 : es * std::pow(10.0, -snr / 10.0);
    SerRecord rec;
    rec.snr_db = snr;
    rec.trials = cfg.trials;
    for (long t = 0; t < cfg.trials; ++t) {
      GaussianRng rng = GaussianRng::substream(cfg.seed, p, static_cast<uint64_t>(t));
      std::vector<cplx> sent(static_cast<size_t>(spec.n_symbols));
      for (cplx& s : sent)
        s = cplx(points[static_cast<size_t>(rng.uniform_index(constellation.size()))],
                 points[static_cast<size_t>(rng.uniform_index(constellation.size()))]);
      const ChannelRealization channel = draw_channel(rng, spec.n_tx, cfg.n_rx);
      const Eigen::MatrixXcd y = transmit(spec, channel, sent, n0, rng);
      const DecodeOutcome out =
          decode_block(spec, channel, y, cfg.constellation_half, cfg.decoder);
      for (int k = 0; k < spec.n_symbols; ++k) {
        const cplx& a = out.hard[static_cast<size_t>(k)];
        const cplx& b = sent[static_cast<size_t>(k)];
        if (a != b) rec.sym_errors++;
        if (a.real() != b.real()) rec.real_errors++;
        if (a.imag() != b.imag()) rec.real_errors++;
      }
      if (t < n_checked) {
        rec.crosschecks++;
        const OracleResult oracle = oracle_ml(spec, channel, y, cfg.constellation_half);
        if (oracle.unique && oracle.hard != out.hard) rec.disagreements++;
      }
    }
    rec.ser = static_cast<double>(rec.sym_errors) /
              (static_cast<double>(rec.trials) * spec.n_symbols);
    records.push_back(rec);
  }
  return records;
}

namespace detail {

inline std::string fmt_g(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

inline std::string to_csv(const SimConfig& cfg, const std::vector<SerRecord>& records) {
  std::string out = "# ostbc simulate code=" + cfg.code + " m=" + std::to_string(cfg.n_rx) +
                    " L=" + std::to_string(cfg.constellation_half) +
                    " trials=" + std::to_string(cfg.trials) +
                    " seed=" + std::to_string(cfg.seed) + " decoder=" + to_string(cfg.decoder) +
                    " crosscheck=" + detail::fmt_g(cfg.crosscheck_fraction) +
                    " snr=Es/N0 Es=" + detail::fmt_g(2.0 * (4.0 * cfg.constellation_half *
                                                            cfg.constellation_half - 1.0) / 3.0) +
                    "\n";
  out += "snr_db,trials,sym_errors,ser,crosschecks,disagreements\n";
  for (const SerRecord& r : records) {
    out += detail::fmt_g(r.snr_db) + "," + std::to_string(r.trials) + "," +
           std::to_string(r.sym_errors) + "," + detail::fmt_g(r.ser) + "," +
           std::to_string(r.crosschecks) + "," + std::to_string(r.disagreements) + "\n";
  }
  return out;
}

}  // namespace ostbc
