// ostbc - command-line front end: code inspection and verification, lattice
// dumps, decoding demos, decoder-equivalence checks, operation counting and
// Monte Carlo simulation. Exit codes: 0 success, 1 assertion/equivalence
// failure, 2 usage error.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ostbc/code.hpp"
#include "ostbc/decode.hpp"
#include "ostbc/lattice.hpp"
#include "ostbc/schedule.hpp"
#include "ostbc/sim.hpp"

namespace {

using nlohmann::json;
using namespace ostbc;

std::string fmt(double v) { return ostbc::detail::fmt_g(v); }

std::string fmt(cplx v) {
  const std::string im = fmt(std::abs(v.imag()));
  return fmt(v.real()) + (v.imag() < 0 ? " - " : " + ") + im + "i";
}

DecodeMethod parse_method(const std::string& s) {
  if (s == "trace") return DecodeMethod::trace;
  if (s == "complex") return DecodeMethod::complex_matched;
  if (s == "real") return DecodeMethod::real_matched;
  if (s == "lattice") return DecodeMethod::lattice;
  if (s == "combining") return DecodeMethod::combining;
  throw CLI::ValidationError("--method", "unknown method \"" + s + "\"");
}

std::vector<double> parse_snr_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "inf") {
      out.push_back(std::numeric_limits<double>::infinity());
    } else {
      out.push_back(std::stod(item));
    }
  }
  if (out.empty()) throw CLI::ValidationError("--snr", "empty SNR list");
  return out;
}

json opcount_json(const OpCount& c) {
  return json{{"R_D", c.divs}, {"R_M", c.mults}, {"R_A", c.adds}};
}

// Soft estimates of all five decoders, reordered to complex symbols.
std::vector<std::vector<cplx>> all_soft(const CodeSpec& spec, const ChannelRealization& channel,
                                        const Eigen::MatrixXcd& y) {
  const LatticeSystem sys = build_check_H(spec, channel, /*with_symbolic=*/false);
  Eigen::MatrixXcd ym = y;
  const Eigen::VectorXcd yv = Eigen::Map<Eigen::VectorXcd>(ym.data(), ym.size());
  Eigen::VectorXd yp(2 * yv.size());
  yp << yv.real(), yv.imag();
  return {
      decode_trace(spec, channel, y),
      pair_stacked(decode_complex_matched(spec, channel, yv)),
      pair_stacked(decode_real_matched(sys, yp)),
      pair_interleaved(decode_lattice(sys, vectorize_received(y))),
      decode_combining(spec, channel, y),
  };
}

int run_verify(const std::string& code, int trials, double tol) {
  const CodeSpec spec = resolve_code(code);
  const ValidationReport rep = validate(spec, trials, tol);
  if (!rep.ok) {
    std::cout << "validation FAILED for " << spec.name << ": " << rep.message << "\n";
    return 1;
  }
  std::cout << "c = " << rep.detected_gain << "\n";
  if (rep.gain_mismatch) std::cout << rep.message << "\n";
  return 0;
}

int run_lattice(const std::string& code, int m) {
  const CodeSpec spec = resolve_code(code);
  std::cout << symbolic_lattice(spec, m).text();
  return 0;
}

int run_codes_list(bool as_json) {
  if (as_json) {
    json out = json::array();
    for (const std::string& n : builtin_names()) {
      const CodeSpec& spec = builtin(n);
      out.push_back({{"name", spec.name},
                     {"N", spec.n_tx},
                     {"T", spec.n_periods},
                     {"K", spec.n_symbols},
                     {"c", spec.gain},
                     {"rate", static_cast<double>(spec.n_symbols) / spec.n_periods}});
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  std::cout << "name  N  T  K  c  rate\n";
  for (const std::string& n : builtin_names()) {
    const CodeSpec& spec = builtin(n);
    std::printf("%-4s %2d %2d %2d %2d  %s\n", spec.name.c_str(), spec.n_tx, spec.n_periods,
                spec.n_symbols, spec.gain,
                fmt(static_cast<double>(spec.n_symbols) / spec.n_periods).c_str());
  }
  return 0;
}

int run_decode(const std::string& code, int m, int L, uint64_t seed, double snr, bool noiseless,
               const std::string& method_name, bool as_json) {
  const CodeSpec spec = resolve_code(code);
  const Constellation constellation(L);
  GaussianRng rng = GaussianRng::substream(seed, 0, 0);
  const std::vector<int> points = constellation.points();
  std::vector<cplx> sent(static_cast<size_t>(spec.n_symbols));
  for (cplx& s : sent)
    s = cplx(points[static_cast<size_t>(rng.uniform_index(constellation.size()))],
             points[static_cast<size_t>(rng.uniform_index(constellation.size()))]);
  const ChannelRealization channel = draw_channel(rng, spec.n_tx, m);
  const double n0 =
      noiseless ? 0.0 : constellation.symbol_energy() * std::pow(10.0, -snr / 10.0);
  const Eigen::MatrixXcd y = transmit(spec, channel, sent, n0, rng);

  auto outcome_of = [&](DecodeMethod dm) { return decode_block(spec, channel, y, L, dm); };
  std::vector<std::pair<std::string, DecodeOutcome>> outcomes;
  if (method_name == "all") {
    for (DecodeMethod dm : {DecodeMethod::trace, DecodeMethod::complex_matched,
                            DecodeMethod::real_matched, DecodeMethod::lattice, DecodeMethod::combining})
      outcomes.emplace_back(to_string(dm), outcome_of(dm));
  } else {
    const DecodeMethod dm = parse_method(method_name);
    outcomes.emplace_back(to_string(dm), outcome_of(dm));
  }

  if (as_json) {
    json out;
    out["code"] = spec.name;
    out["m"] = m;
    out["L"] = L;
    out["seed"] = seed;
    out["n0"] = n0;
    for (size_t k = 0; k < sent.size(); ++k)
      out["sent"].push_back({sent[k].real(), sent[k].imag()});
    for (const auto& [name, oc] : outcomes) {
      json jm;
      for (const cplx& v : oc.soft) jm["soft"].push_back({v.real(), v.imag()});
      for (const cplx& v : oc.hard) jm["hard"].push_back({v.real(), v.imag()});
      jm["residual"] = oc.residual;
      out["decoders"][name] = jm;
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  std::cout << "code " << spec.name << ", M = " << m << ", L = " << L << ", seed = " << seed
            << ", N0 = " << fmt(n0) << "\n";
  for (size_t k = 0; k < sent.size(); ++k)
    std::cout << "  sent s" << k + 1 << " = " << fmt(sent[k]) << "\n";
  for (const auto& [name, oc] : outcomes) {
    std::cout << name << ":\n";
    for (size_t k = 0; k < oc.soft.size(); ++k)
      std::cout << "  s" << k + 1 << " ~ " << fmt(oc.soft[k]) << "  -> " << fmt(oc.hard[k])
                << "\n";
    std::cout << "  residual " << fmt(oc.residual) << "\n";
  }
  const bool recovered =
      std::all_of(outcomes.begin(), outcomes.end(),
                  [&](const auto& p) { return p.second.hard == sent; });
  if (noiseless) std::cout << (recovered ? "recovered = transmitted\n" : "RECOVERY FAILED\n");
  return noiseless && !recovered ? 1 : 0;
}

int run_compare(const std::string& code, int m, int L, long trials, uint64_t seed,
                bool noiseless, double snr) {
  const CodeSpec spec = resolve_code(code);
  const Constellation constellation(L);
  const std::vector<int> points = constellation.points();
  const double n0 =
      noiseless ? 0.0 : constellation.symbol_energy() * std::pow(10.0, -snr / 10.0);
  const bool oracle_feasible =
      std::pow(2.0 * L, 2.0 * spec.n_symbols) <= 1e7;
  if (!oracle_feasible)
    std::cout << "note: (2L)^(2K) exceeds the enumeration guard; oracle check skipped\n";

  double worst = 0.0;
  long oracle_checked = 0;
  for (long t = 0; t < trials; ++t) {
    GaussianRng rng = GaussianRng::substream(seed, 1, static_cast<uint64_t>(t));
    std::vector<cplx> sent(static_cast<size_t>(spec.n_symbols));
    for (cplx& s : sent)
      s = cplx(points[static_cast<size_t>(rng.uniform_index(constellation.size()))],
               points[static_cast<size_t>(rng.uniform_index(constellation.size()))]);
    const ChannelRealization channel = draw_channel(rng, spec.n_tx, m);
    const Eigen::MatrixXcd y = transmit(spec, channel, sent, n0, rng);
    const auto softs = all_soft(spec, channel, y);

    double scale = 1.0;
    for (const cplx& v : softs[0]) scale = std::max(scale, std::abs(v));
    for (size_t a = 1; a < softs.size(); ++a) {
      for (size_t k = 0; k < softs[a].size(); ++k) {
        const double dev = std::abs(softs[a][k] - softs[0][k]) / scale;
        worst = std::max(worst, dev);
        if (dev > 1e-9) {
          std::cout << "DISAGREEMENT at trial " << t << ": trace vs " << a << " symbol " << k + 1
                    << ": " << fmt(softs[0][k]) << " vs " << fmt(softs[a][k]) << "\n";
          return 1;
        }
      }
    }
    const std::vector<cplx> hard = quantize_hard(softs[3], L);
    for (size_t a = 0; a < softs.size(); ++a) {
      if (quantize_hard(softs[a], L) != hard) {
        std::cout << "HARD-DECISION DISAGREEMENT at trial " << t << "\n";
        return 1;
      }
    }
    if (oracle_feasible) {
      const OracleResult oracle = oracle_ml(spec, channel, y, L);
      ++oracle_checked;
      if (oracle.unique && oracle.hard != hard) {
        std::cout << "ORACLE DISAGREEMENT at trial " << t << "\n";
        for (size_t k = 0; k < hard.size(); ++k)
          std::cout << "  s" << k + 1 << ": decoder " << fmt(hard[k]) << ", oracle "
                    << fmt(oracle.hard[k]) << "\n";
        return 1;
      }
    }
    if (noiseless && hard != sent) {
      std::cout << "NOISELESS RECOVERY FAILED at trial " << t << "\n";
      return 1;
    }
  }
  std::cout << trials << " trials, max soft deviation " << fmt(worst) << ", oracle checked "
            << oracle_checked << ", all decoders agree\n";
  if (noiseless) std::cout << "recovered symbols equal transmitted in every trial\n";
  return 0;
}

int run_count(const std::string& code, int m, const std::string& level_name,
              const std::string& policy_name, bool include_gain_mult, bool as_json) {
  const CodeSpec spec = resolve_code(code);
  const DivisionPolicy policy =
      policy_name == "rd" ? DivisionPolicy::count_divisions : DivisionPolicy::four_mults;
  const ScheduleLevel selected = parse_level(level_name);

  const std::array<ScheduleLevel, 4> levels = {ScheduleLevel::dense, ScheduleLevel::zero_skip,
                                               ScheduleLevel::grouped, ScheduleLevel::full};
  std::array<OpCount, 4> counts;
  for (size_t i = 0; i < levels.size(); ++i)
    counts[i] = count_decode(spec, m, levels[i], policy, include_gain_mult);
  const OpCount f_col = formula(spec.n_symbols, m, spec.n_periods, spec.n_tx, spec.gain,
                                SigmaVariant::from_column, policy);
  const OpCount f_chan = formula(spec.n_symbols, m, spec.n_periods, spec.n_tx, spec.gain,
                                 SigmaVariant::from_channel, policy);
  const OpCount sel = counts[static_cast<size_t>(selected)];

  if (as_json) {
    json out;
    out["code"] = spec.name;
    out["m"] = m;
    out["div_policy"] = policy_name;
    out["include_c_mult"] = include_gain_mult;
    for (size_t i = 0; i < levels.size(); ++i)
      out["levels"][to_string(levels[i])] = opcount_json(counts[i]);
    out["formula"]["sigma_2MT"] = opcount_json(f_col);
    out["formula"]["sigma_2MN"] = opcount_json(f_chan);
    out["formula"]["variants_differ"] = f_col != f_chan;
    out["selected"]["level"] = to_string(selected);
    out["selected"]["count"] = opcount_json(sel);
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  std::cout << "operation counts for " << spec.name << ", M = " << m << " ("
            << (policy == DivisionPolicy::four_mults ? "division booked as 4 multiplications"
                                                     : "divisions counted separately")
            << ", gain multiplication " << (include_gain_mult ? "included" : "excluded") << ")\n";
  std::printf("  %-10s %6s %6s %6s\n", "level", "R_D", "R_M", "R_A");
  for (size_t i = 0; i < levels.size(); ++i)
    std::printf("  %-10s %6lld %6lld %6lld\n", to_string(levels[i]), counts[i].divs,
                counts[i].mults, counts[i].adds);
  std::printf("closed form, sigma over a lattice column (2MT): %lld R_D, %lld R_M, %lld R_A\n",
              f_col.divs, f_col.mults, f_col.adds);
  std::printf("closed form, sigma over the channel matrix (2MN): %lld R_D, %lld R_M, %lld R_A\n",
              f_chan.divs, f_chan.mults, f_chan.adds);
  if (f_col != f_chan)
    std::printf("note: the two sigma conventions disagree here by %lld R_M / %lld R_A\n",
                f_col.mults - f_chan.mults, f_col.adds - f_chan.adds);
  if (spec.gain > 1)
    std::cout << "note: sigma costs one extra multiplication (gain " << spec.gain
              << "); the closed form never includes it\n";
  std::cout << "note: with L = 2 the scaling by 1/sigma never changes the sign decisions, so "
               "sigma, its inverse and the final scaling can be skipped\n";
  std::printf("selected level %s: %lld R_M, %lld R_A", to_string(selected), sel.mults, sel.adds);
  if (policy == DivisionPolicy::count_divisions) std::printf(", %lld R_D", sel.divs);
  std::printf("\n");
  return 0;
}

int run_formula(const std::string& code, int k, int m, int t, int n, int c,
                const std::string& policy_name, bool as_json) {
  if (!code.empty()) {
    const CodeSpec spec = resolve_code(code);
    k = spec.n_symbols;
    t = spec.n_periods;
    n = spec.n_tx;
    c = spec.gain;
  }
  if (k < 1 || m < 1 || t < 1 || n < 1)
    throw CLI::ValidationError("formula", "need a code name or positive --k --m --t --n");
  const DivisionPolicy policy =
      policy_name == "rd" ? DivisionPolicy::count_divisions : DivisionPolicy::four_mults;
  const OpCount f_col = formula(k, m, t, n, c, SigmaVariant::from_column, policy);
  const OpCount f_chan = formula(k, m, t, n, c, SigmaVariant::from_channel, policy);
  if (as_json) {
    json out;
    out["K"] = k;
    out["M"] = m;
    out["T"] = t;
    out["N"] = n;
    out["sigma_2MT"] = opcount_json(f_col);
    out["sigma_2MN"] = opcount_json(f_chan);
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  std::printf("K=%d M=%d T=%d N=%d\n", k, m, t, n);
  std::printf("sigma over a lattice column (2MT): %lld R_D, %lld R_M, %lld R_A\n", f_col.divs,
              f_col.mults, f_col.adds);
  std::printf("sigma over the channel matrix (2MN): %lld R_D, %lld R_M, %lld R_A\n", f_chan.divs,
              f_chan.mults, f_chan.adds);
  if (f_col != f_chan)
    std::printf("note: the conventions differ by %lld R_M / %lld R_A\n",
                f_col.mults - f_chan.mults, f_col.adds - f_chan.adds);
  return 0;
}

int run_simulate(const SimConfig& cfg, const std::string& out_path) {
  const std::vector<SerRecord> records = run_monte_carlo(cfg);
  const std::string csv = to_csv(cfg, records);
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << csv;
  }
  long disagreements = 0;
  for (const SerRecord& r : records) disagreements += r.disagreements;
  if (disagreements > 0) {
    std::cerr << "oracle crosscheck disagreements: " << disagreements << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orthogonal space-time block code decoding and operation counting"};
  app.require_subcommand(1);

  // codes-list
  auto* sc_list = app.add_subcommand("codes-list", "list the built-in codes");
  bool list_json = false;
  sc_list->add_flag("--json", list_json, "machine-readable output");

  // verify
  auto* sc_verify = app.add_subcommand("verify", "check the orthogonality property, detect c");
  std::string v_code;
  int v_trials = 100;
  double v_tol = 1e-9;
  sc_verify->add_option("code", v_code, "built-in name or JSON file")->required();
  sc_verify->add_option("--trials", v_trials, "random symbol draws")->check(CLI::PositiveNumber);
  sc_verify->add_option("--tol", v_tol, "tolerance")->check(CLI::PositiveNumber);

  // lattice
  auto* sc_lattice = app.add_subcommand("lattice", "print the symbolic lattice matrix");
  std::string l_code;
  int l_m = 1;
  sc_lattice->add_option("code", l_code, "built-in name or JSON file")->required();
  sc_lattice->add_option("--m", l_m, "receive antennas")->check(CLI::PositiveNumber);

  // decode
  auto* sc_decode = app.add_subcommand("decode", "decode one random block");
  std::string d_code, d_method = "all";
  int d_m = 1, d_l = 2;
  uint64_t d_seed = 1;
  double d_snr = 20.0;
  bool d_noiseless = false, d_json = false;
  sc_decode->add_option("code", d_code)->required();
  sc_decode->add_option("--m", d_m)->check(CLI::PositiveNumber);
  sc_decode->add_option("--l", d_l)->check(CLI::PositiveNumber);
  sc_decode->add_option("--seed", d_seed);
  sc_decode->add_option("--snr", d_snr, "Es/N0 in dB");
  sc_decode->add_flag("--noiseless", d_noiseless);
  sc_decode->add_option("--method", d_method, "trace|complex|real|lattice|combining|all");
  sc_decode->add_flag("--json", d_json);

  // compare
  auto* sc_compare = app.add_subcommand("compare", "check that all decoders agree");
  std::string c_code;
  int c_m = 1, c_l = 2;
  long c_trials = 100;
  uint64_t c_seed = 1;
  double c_snr = 10.0;
  bool c_noiseless = false;
  sc_compare->add_option("code", c_code)->required();
  sc_compare->add_option("--m", c_m)->check(CLI::PositiveNumber);
  sc_compare->add_option("--l", c_l)->check(CLI::PositiveNumber);
  sc_compare->add_option("--trials", c_trials)->check(CLI::PositiveNumber);
  sc_compare->add_option("--seed", c_seed);
  sc_compare->add_option("--snr", c_snr, "Es/N0 in dB");
  sc_compare->add_flag("--noiseless", c_noiseless);

  // count
  auto* sc_count = app.add_subcommand("count", "operation counts per schedule level");
  std::string n_code, n_level = "full", n_policy = "mul4";
  int n_m = 1;
  bool n_gain_mult = true, n_json = false;
  sc_count->add_option("code", n_code)->required();
  sc_count->add_option("--m", n_m)->check(CLI::PositiveNumber);
  sc_count->add_option("--level", n_level, "dense|zero_skip|grouped|full");
  sc_count->add_option("--div-policy", n_policy, "rd|mul4")
      ->check(CLI::IsMember({"rd", "mul4"}));
  sc_count->add_option("--include-c-mult", n_gain_mult,
                       "count the sigma gain multiplication (default 1)");
  sc_count->add_flag("--json", n_json);

  // formula
  auto* sc_formula = app.add_subcommand("formula", "closed-form counts");
  std::string f_code, f_policy = "mul4";
  int f_k = 0, f_m = 1, f_t = 0, f_n = 0, f_c = 1;
  bool f_json = false;
  sc_formula->add_option("code", f_code, "built-in name or JSON file (or give dimensions)");
  sc_formula->add_option("--k", f_k, "complex symbols per block");
  sc_formula->add_option("--m", f_m, "receive antennas");
  sc_formula->add_option("--t", f_t, "block length");
  sc_formula->add_option("--n", f_n, "transmit antennas");
  sc_formula->add_option("--c", f_c, "code gain");
  sc_formula->add_option("--div-policy", f_policy)->check(CLI::IsMember({"rd", "mul4"}));
  sc_formula->add_flag("--json", f_json);

  // simulate
  auto* sc_sim = app.add_subcommand("simulate", "Monte Carlo symbol error rate");
  SimConfig cfg;
  std::string s_snr = "10,20,30", s_decoder = "lattice", s_out;
  sc_sim->add_option("code", cfg.code)->required();
  sc_sim->add_option("--m", cfg.n_rx)->check(CLI::PositiveNumber);
  sc_sim->add_option("--l", cfg.constellation_half)->check(CLI::PositiveNumber);
  sc_sim->add_option("--snr", s_snr, "comma-separated Es/N0 list in dB; \"inf\" = noiseless");
  sc_sim->add_option("--trials", cfg.trials, "trials per SNR point")->check(CLI::PositiveNumber);
  sc_sim->add_option("--seed", cfg.seed);
  sc_sim->add_option("--decoder", s_decoder, "trace|complex|real|lattice|combining");
  sc_sim->add_option("--crosscheck-fraction", cfg.crosscheck_fraction,
                     "fraction of trials checked against the exhaustive oracle")
      ->check(CLI::Range(0.0, 1.0));
  sc_sim->add_option("--out", s_out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sc_list->parsed()) return run_codes_list(list_json);
    if (sc_verify->parsed()) return run_verify(v_code, v_trials, v_tol);
    if (sc_lattice->parsed()) return run_lattice(l_code, l_m);
    if (sc_decode->parsed())
      return run_decode(d_code, d_m, d_l, d_seed, d_snr, d_noiseless, d_method, d_json);
    if (sc_compare->parsed())
      return run_compare(c_code, c_m, c_l, c_trials, c_seed, c_noiseless, c_snr);
    if (sc_count->parsed())
      return run_count(n_code, n_m, n_level, n_policy, n_gain_mult, n_json);
    if (sc_formula->parsed())
      return run_formula(f_code, f_k, f_m, f_t, f_n, f_c, f_policy, f_json);
    if (sc_sim->parsed()) {
      cfg.snr_db = parse_snr_list(s_snr);
      cfg.decoder = parse_method(s_decoder);
      return run_simulate(cfg, s_out);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
