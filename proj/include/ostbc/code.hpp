// code.hpp - orthogonal space-time block code definitions.
//
// A code is a pair of exact coefficient matrix families (A_k, B_k), k=1..K,
// each T x N, encoding a block as
//     G(s) = sum_k Re(s_k) A_k + i Im(s_k) B_k.
// Orthogonality means G^H G = gain * (sum_k |s_k|^2) I_N with a positive
// integer gain. Four classic codes are built in; arbitrary codes load from
// a JSON definition file.

#pragma once

#include <complex>
#include <fstream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ostbc/coeff.hpp"

namespace ostbc {

using cplx = std::complex<double>;

struct CoeffMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Coeff> a;

  CoeffMatrix() = default;
  CoeffMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}

  Coeff& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  const Coeff& at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

  Eigen::MatrixXd numeric() const {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = at(r, c).value();
    return m;
  }

  bool operator==(const CoeffMatrix& o) const {
    return rows == o.rows && cols == o.cols && a == o.a;
  }
};

struct CodeSpec {
  std::string name;
  int n_tx = 0;      // N, transmit antennas (columns of the code matrix)
  int n_periods = 0; // T, symbol periods per block (rows)
  int n_symbols = 0; // K, complex symbols per block
  int gain = 1;      // c in G^H G = c (sum |s_k|^2) I
  std::vector<CoeffMatrix> a_mats;  // K matrices multiplying Re(s_k)
  std::vector<CoeffMatrix> b_mats;  // K matrices multiplying i*Im(s_k)
};

// Conjugate-linear representation G = sum_k s_k P_k + conj(s_k) Q_k with
// P_k = (A_k+B_k)/2, Q_k = (A_k-B_k)/2. Exact in Coeff arithmetic.
inline std::pair<CoeffMatrix, CoeffMatrix> conjugate_pair(const CodeSpec& spec, int k) {
  const CoeffMatrix& A = spec.a_mats.at(k);
  const CoeffMatrix& B = spec.b_mats.at(k);
  CoeffMatrix P(A.rows, A.cols), Q(A.rows, A.cols);
  for (int r = 0; r < A.rows; ++r) {
    for (int c = 0; c < A.cols; ++c) {
      P.at(r, c) = (A.at(r, c) + B.at(r, c)).halved();
      Q.at(r, c) = (A.at(r, c) - B.at(r, c)).halved();
    }
  }
  return {P, Q};
}

namespace detail {

// One symbol occurrence in the displayed code matrix: coefficient w on
// s_k (or conj(s_k)) at row t, column i. All indices 1-based as displayed.
struct CodeTerm {
  int t, i, k;
  bool conj;
  Coeff w;
};

inline CodeSpec make_code(std::string name, int n, int t, int k, int gain,
                          const std::vector<CodeTerm>& terms) {
  CodeSpec spec;
  spec.name = std::move(name);
  spec.n_tx = n;
  spec.n_periods = t;
  spec.n_symbols = k;
  spec.gain = gain;
  spec.a_mats.assign(k, CoeffMatrix(t, n));
  spec.b_mats.assign(k, CoeffMatrix(t, n));
  for (const CodeTerm& term : terms) {
    Coeff& a = spec.a_mats[term.k - 1].at(term.t - 1, term.i - 1);
    Coeff& b = spec.b_mats[term.k - 1].at(term.t - 1, term.i - 1);
    a = a + term.w;
    b = term.conj ? b - term.w : b + term.w;
  }
  return spec;
}

inline CodeSpec make_g2() {
  const Coeff u = Coeff::one();
  return make_code("G2", 2, 2, 2, 1,
                   {{1, 1, 1, false, u},
                    {1, 2, 2, false, u},
                    {2, 1, 2, true, -u},
                    {2, 2, 1, true, u}});
}

inline CodeSpec make_g3() {
  const Coeff u = Coeff::one();
  std::vector<CodeTerm> terms = {
      {1, 1, 1, false, u},  {1, 2, 2, false, u},  {1, 3, 3, false, u},
      {2, 1, 2, false, -u}, {2, 2, 1, false, u},  {2, 3, 4, false, -u},
      {3, 1, 3, false, -u}, {3, 2, 4, false, u},  {3, 3, 1, false, u},
      {4, 1, 4, false, -u}, {4, 2, 3, false, -u}, {4, 3, 2, false, u},
  };
  // Periods 5..8 repeat 1..4 with every symbol conjugated.
  std::vector<CodeTerm> all = terms;
  for (CodeTerm term : terms) {
    term.t += 4;
    term.conj = true;
    all.push_back(term);
  }
  return make_code("G3", 3, 8, 4, 2, all);
}

inline CodeSpec make_g4() {
  const Coeff u = Coeff::one();
  std::vector<CodeTerm> terms = {
      {1, 1, 1, false, u},  {1, 2, 2, false, u},  {1, 3, 3, false, u},  {1, 4, 4, false, u},
      {2, 1, 2, false, -u}, {2, 2, 1, false, u},  {2, 3, 4, false, -u}, {2, 4, 3, false, u},
      {3, 1, 3, false, -u}, {3, 2, 4, false, u},  {3, 3, 1, false, u},  {3, 4, 2, false, -u},
      {4, 1, 4, false, -u}, {4, 2, 3, false, -u}, {4, 3, 2, false, u},  {4, 4, 1, false, u},
  };
  std::vector<CodeTerm> all = terms;
  for (CodeTerm term : terms) {
    term.t += 4;
    term.conj = true;
    all.push_back(term);
  }
  return make_code("G4", 4, 8, 4, 2, all);
}

inline CodeSpec make_h3() {
  const Coeff u = Coeff::one();
  const Coeff r = Coeff::inv_sqrt2();
  const Coeff h = Coeff::half();
  return make_code("H3", 3, 4, 3, 1,
                   {{1, 1, 1, false, u},
                    {1, 2, 2, false, u},
                    {1, 3, 3, false, r},
                    {2, 1, 2, true, -u},
                    {2, 2, 1, true, u},
                    {2, 3, 3, false, r},
                    {3, 1, 3, true, r},
                    {3, 2, 3, true, r},
                    {3, 3, 1, false, -h},
                    {3, 3, 1, true, -h},
                    {3, 3, 2, false, h},
                    {3, 3, 2, true, -h},
                    {4, 1, 3, true, r},
                    {4, 2, 3, true, -r},
                    {4, 3, 1, false, h},
                    {4, 3, 1, true, -h},
                    {4, 3, 2, false, h},
                    {4, 3, 2, true, h}});
}

}  // namespace detail

inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {"G2", "G3", "G4", "H3"};
  return names;
}

inline const CodeSpec& builtin(const std::string& name) {
  static const CodeSpec g2 = detail::make_g2();
  static const CodeSpec g3 = detail::make_g3();
  static const CodeSpec g4 = detail::make_g4();
  static const CodeSpec h3 = detail::make_h3();
  if (name == "G2") return g2;
  if (name == "G3") return g3;
  if (name == "G4") return g4;
  if (name == "H3") return h3;
  throw std::invalid_argument("unknown code \"" + name + "\" (built-ins: G2, G3, G4, H3)");
}

inline Eigen::MatrixXcd encode(const CodeSpec& spec, std::span<const cplx> s) {
  if (static_cast<int>(s.size()) != spec.n_symbols)
    throw std::invalid_argument("encode: expected " + std::to_string(spec.n_symbols) +
                                " symbols, got " + std::to_string(s.size()));
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(spec.n_periods, spec.n_tx);
  for (int k = 0; k < spec.n_symbols; ++k) {
    const Eigen::MatrixXd a = spec.a_mats[k].numeric();
    const Eigen::MatrixXd b = spec.b_mats[k].numeric();
    g += s[k].real() * a.cast<cplx>() + cplx(0.0, s[k].imag()) * b.cast<cplx>();
  }
  return g;
}

struct ValidationReport {
  bool ok = false;
  int detected_gain = 0;     // meaningful when ok
  bool gain_mismatch = false; // detected gain differs from the declared one
  std::string message;
};

// Checks G^H G == g * (sum |s_k|^2) I over random symbol draws and detects
// the integer g. Never trusts the gain declared in the definition.
inline ValidationReport validate(const CodeSpec& spec, int trials = 100, double tol = 1e-9,
                                 uint64_t seed = 20240901u) {
  ValidationReport rep;
  if (trials < 1 || tol <= 0.0) {
    rep.message = "validate: trials must be >= 1 and tol > 0";
    return rep;
  }
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double ratio0 = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<cplx> s(spec.n_symbols);
    for (cplx& v : s) v = cplx(gauss(eng), gauss(eng));
    double energy = 0.0;
    for (const cplx& v : s) energy += std::norm(v);
    const Eigen::MatrixXcd g = encode(spec, s);
    const Eigen::MatrixXcd gram = g.adjoint() * g;
    for (int r = 0; r < spec.n_tx; ++r) {
      for (int c = 0; c < spec.n_tx; ++c) {
        if (r == c) continue;
        if (std::abs(gram(r, c)) > tol * energy) {
          std::ostringstream os;
          os << "Gram(" << r + 1 << "," << c + 1 << ") = " << gram(r, c)
             << " is not zero (trial " << trial + 1 << ")";
          rep.message = os.str();
          return rep;
        }
      }
    }
    const double ratio = gram(0, 0).real() / energy;
    for (int r = 0; r < spec.n_tx; ++r) {
      if (std::abs(gram(r, r).real() / energy - ratio) > tol ||
          std::abs(gram(r, r).imag()) > tol * energy) {
        std::ostringstream os;
        os << "Gram(" << r + 1 << "," << r + 1 << ")/energy = " << gram(r, r).real() / energy
           << " differs from Gram(1,1)/energy = " << ratio << " (trial " << trial + 1 << ")";
        rep.message = os.str();
        return rep;
      }
    }
    if (trial == 0) {
      ratio0 = ratio;
    } else if (std::abs(ratio - ratio0) > tol) {
      std::ostringstream os;
      os << "gain ratio varies across trials: " << ratio0 << " vs " << ratio;
      rep.message = os.str();
      return rep;
    }
  }
  const double rounded = std::round(ratio0);
  if (rounded < 1.0 || std::abs(ratio0 - rounded) > tol) {
    std::ostringstream os;
    os << "gain ratio " << ratio0 << " is not a positive integer";
    rep.message = os.str();
    return rep;
  }
  rep.ok = true;
  rep.detected_gain = static_cast<int>(rounded);
  rep.gain_mismatch = rep.detected_gain != spec.gain;
  if (rep.gain_mismatch) {
    std::ostringstream os;
    os << "warning: declared gain " << spec.gain << " but measured " << rep.detected_gain;
    rep.message = os.str();
  }
  return rep;
}

// --- code-definition files -------------------------------------------------
//
// {"name": "...", "N": 2, "T": 2, "K": 2, "c": 1,
//  "A": [K][T][N] coefficient strings, "B": likewise}
// Coefficient strings come from the closed set
// {"0","1","-1","1/2","-1/2","1/sqrt2","-1/sqrt2","2","-2"}.

inline nlohmann::json code_to_json(const CodeSpec& spec) {
  nlohmann::json j;
  j["name"] = spec.name;
  j["N"] = spec.n_tx;
  j["T"] = spec.n_periods;
  j["K"] = spec.n_symbols;
  j["c"] = spec.gain;
  auto mats = [&](const std::vector<CoeffMatrix>& ms) {
    nlohmann::json out = nlohmann::json::array();
    for (const CoeffMatrix& m : ms) {
      nlohmann::json rows = nlohmann::json::array();
      for (int r = 0; r < m.rows; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < m.cols; ++c) row.push_back(m.at(r, c).str());
        rows.push_back(row);
      }
      out.push_back(rows);
    }
    return out;
  };
  j["A"] = mats(spec.a_mats);
  j["B"] = mats(spec.b_mats);
  return j;
}

inline CodeSpec code_from_json(const nlohmann::json& j) {
  CodeSpec spec;
  spec.name = j.at("name").get<std::string>();
  spec.n_tx = j.at("N").get<int>();
  spec.n_periods = j.at("T").get<int>();
  spec.n_symbols = j.at("K").get<int>();
  spec.gain = j.at("c").get<int>();
  if (spec.n_tx < 1 || spec.n_periods < 1 || spec.n_symbols < 1 || spec.gain < 1)
    throw std::invalid_argument("code file: N, T, K, c must all be >= 1");
  if (spec.n_symbols > spec.n_periods)
    throw std::invalid_argument("code file: rate K/T exceeds 1");
  auto mats = [&](const nlohmann::json& arr, const char* which) {
    if (static_cast<int>(arr.size()) != spec.n_symbols)
      throw std::invalid_argument(std::string("code file: ") + which + " must hold K matrices");
    std::vector<CoeffMatrix> ms;
    for (const auto& mj : arr) {
      CoeffMatrix m(spec.n_periods, spec.n_tx);
      if (static_cast<int>(mj.size()) != spec.n_periods)
        throw std::invalid_argument(std::string("code file: ") + which + " matrix must have T rows");
      for (int r = 0; r < spec.n_periods; ++r) {
        if (static_cast<int>(mj[r].size()) != spec.n_tx)
          throw std::invalid_argument(std::string("code file: ") + which + " row must have N entries");
        for (int c = 0; c < spec.n_tx; ++c) m.at(r, c) = Coeff::parse(mj[r][c].get<std::string>());
      }
      ms.push_back(std::move(m));
    }
    return ms;
  };
  spec.a_mats = mats(j.at("A"), "A");
  spec.b_mats = mats(j.at("B"), "B");
  return spec;
}

inline CodeSpec load_code(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open code file " + path);
  nlohmann::json j;
  in >> j;
  return code_from_json(j);
}

// Accepts a built-in name or a path to a JSON definition.
inline CodeSpec resolve_code(const std::string& name_or_path) {
  for (const std::string& n : builtin_names())
    if (n == name_or_path) return builtin(n);
  return load_code(name_or_path);
}

}  // namespace ostbc
