// lattice.hpp - real-valued lattice representation of the block system.
//
// The complex relation Y = G(s) H + V is rewritten as a real system
// y_check = H_check x + v_check, where y_check interleaves (Re, Im) of the
// column-stacked received block and x interleaves (Re, Im) of the symbols.
// H_check is assembled from the stacked column representation
//     y = F_a sbar + F_b stilde + v
// by stacking real and imaginary parts and permuting rows/columns, and is
// produced twice: numerically for a given channel draw, and symbolically as
// signed exact-coefficient combinations of the real channel components
// h1..h_{2NM}. The symbolic form is what the operation scheduler consumes.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ostbc/code.hpp"

namespace ostbc {

// Column-stacks a complex matrix and interleaves (Re, Im) per entry.
inline Eigen::VectorXd interleave_columns(const Eigen::MatrixXcd& x) {
  Eigen::VectorXd out(2 * x.size());
  Eigen::Index p = 0;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      out[2 * p] = x(r, c).real();
      out[2 * p + 1] = x(r, c).imag();
      ++p;
    }
  }
  return out;
}

inline Eigen::MatrixXcd deinterleave_columns(const Eigen::VectorXd& v, int rows, int cols) {
  if (v.size() != 2 * static_cast<Eigen::Index>(rows) * cols)
    throw std::invalid_argument("deinterleave: size mismatch");
  Eigen::MatrixXcd x(rows, cols);
  Eigen::Index p = 0;
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r, ++p) x(r, c) = cplx(v[2 * p], v[2 * p + 1]);
  return x;
}

// Received block as the interleaved real vector.
inline Eigen::VectorXd vectorize_received(const Eigen::MatrixXcd& y) {
  return interleave_columns(y);
}

struct ChannelRealization {
  Eigen::MatrixXcd coeffs;  // N x M, entry (i,j): transmit antenna i+1 -> receive j+1

  ChannelRealization() = default;
  explicit ChannelRealization(Eigen::MatrixXcd h) : coeffs(std::move(h)) {}

  int n_tx() const { return static_cast<int>(coeffs.rows()); }
  int n_rx() const { return static_cast<int>(coeffs.cols()); }

  // Real components h1..h_{2NM}: (Re, Im) of each coefficient, columns stacked.
  Eigen::VectorXd real_vector() const { return interleave_columns(coeffs); }

  static ChannelRealization from_real(const Eigen::VectorXd& v, int n_tx, int n_rx) {
    return ChannelRealization(deinterleave_columns(v, n_tx, n_rx));
  }
};

// --- symbolic entries -------------------------------------------------------

struct SymbolicTerm {
  Coeff weight;
  int h_index = 0;  // 1-based index into the real channel vector

  bool operator==(const SymbolicTerm& o) const {
    return weight == o.weight && h_index == o.h_index;
  }
};

// A signed exact-coefficient combination of real channel components,
// canonical: terms sorted by index, no zero weights, one term per index.
struct SymbolicEntry {
  std::vector<SymbolicTerm> terms;

  void add_term(const Coeff& w, int h_index) {
    if (w.is_zero()) return;
    auto it = terms.begin();
    while (it != terms.end() && it->h_index < h_index) ++it;
    if (it != terms.end() && it->h_index == h_index) {
      Coeff sum = it->weight + w;
      if (sum.is_zero())
        terms.erase(it);
      else
        it->weight = sum;
    } else {
      terms.insert(it, SymbolicTerm{w, h_index});
    }
  }

  bool is_zero() const { return terms.empty(); }

  double eval(const Eigen::VectorXd& h) const {
    double v = 0.0;
    for (const SymbolicTerm& t : terms) v += t.weight.value() * h[t.h_index - 1];
    return v;
  }

  // Magnitude shared by every weight in the entry, if there is one.
  std::optional<Coeff> common_scale() const {
    if (terms.empty()) return std::nullopt;
    Coeff mag = terms.front().weight.abs();
    for (const SymbolicTerm& t : terms)
      if (t.weight.abs() != mag) return std::nullopt;
    return mag;
  }

  bool operator==(const SymbolicEntry& o) const { return terms == o.terms; }

  std::string text() const;
};

struct SymbolicMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<SymbolicEntry> e;

  SymbolicMatrix() = default;
  SymbolicMatrix(int r, int c) : rows(r), cols(c), e(static_cast<size_t>(r) * c) {}

  SymbolicEntry& at(int r, int c) { return e[static_cast<size_t>(r) * cols + c]; }
  const SymbolicEntry& at(int r, int c) const { return e[static_cast<size_t>(r) * cols + c]; }

  Eigen::MatrixXd eval(const Eigen::VectorXd& h) const {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = at(r, c).eval(h);
    return m;
  }

  // One row per line, entries space-separated; the golden-file format.
  std::string text() const {
    std::string out;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        if (c) out += ' ';
        out += at(r, c).text();
      }
      out += '\n';
    }
    return out;
  }
};

namespace detail {

// "2h5", "h5/2", "h5/sqrt2" style pieces; mag must be positive.
inline std::string scale_prefix(const Coeff& mag) {
  return std::abs(mag.num()) == 2 ? "2" : "";
}
inline std::string scale_suffix(const Coeff& mag) {
  std::string s;
  if (mag.den() == 2) s += "/2";
  if (mag.has_inv_sqrt2()) s += "/sqrt2";
  return s;
}
inline std::string term_text(const SymbolicTerm& t, bool leading) {
  const Coeff mag = t.weight.abs();
  std::string s;
  if (t.weight.sign() < 0)
    s += '-';
  else if (!leading)
    s += '+';
  s += scale_prefix(mag) + "h" + std::to_string(t.h_index) + scale_suffix(mag);
  return s;
}

}  // namespace detail

inline std::string SymbolicEntry::text() const {
  if (terms.empty()) return "0";
  if (terms.size() == 1) return detail::term_text(terms.front(), true);
  const std::optional<Coeff> scale = common_scale();
  if (scale && !scale->is_one()) {
    std::string inner;
    bool lead = true;
    for (const SymbolicTerm& t : terms) {
      inner += (t.weight.sign() < 0 ? "-" : (lead ? "" : "+")) + ("h" + std::to_string(t.h_index));
      lead = false;
    }
    return detail::scale_prefix(*scale) + "(" + inner + ")" + detail::scale_suffix(*scale);
  }
  std::string out;
  bool lead = true;
  for (const SymbolicTerm& t : terms) {
    out += detail::term_text(t, lead);
    lead = false;
  }
  return out;
}

// --- stacked-column representation -------------------------------------------

// F_a(:,k) = vec(A_k H), F_b(:,k) = i * vec(B_k H); the received vector obeys
// vec(Y) = F_a Re(s) + F_b Im(s) + vec(V).
inline std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> build_F(const CodeSpec& spec,
                                                             const ChannelRealization& channel) {
  if (channel.n_tx() != spec.n_tx)
    throw std::invalid_argument("build_F: channel has " + std::to_string(channel.n_tx()) +
                                " transmit antennas, code needs " + std::to_string(spec.n_tx));
  const int mt = spec.n_periods * channel.n_rx();
  Eigen::MatrixXcd f_a(mt, spec.n_symbols), f_b(mt, spec.n_symbols);
  for (int k = 0; k < spec.n_symbols; ++k) {
    Eigen::MatrixXcd pa = spec.a_mats[k].numeric().cast<cplx>() * channel.coeffs;
    Eigen::MatrixXcd pb = spec.b_mats[k].numeric().cast<cplx>() * channel.coeffs;
    f_a.col(k) = Eigen::Map<Eigen::VectorXcd>(pa.data(), mt);
    f_b.col(k) = cplx(0.0, 1.0) * Eigen::Map<Eigen::VectorXcd>(pb.data(), mt);
  }
  return {f_a, f_b};
}

// Real stacking [[Re F_a, Re F_b], [Im F_a, Im F_b]] of F = [F_a F_b].
inline Eigen::MatrixXd build_F_prime(const Eigen::MatrixXcd& f_a, const Eigen::MatrixXcd& f_b) {
  const Eigen::Index mt = f_a.rows(), k = f_a.cols();
  Eigen::MatrixXd fp(2 * mt, 2 * k);
  fp.topLeftCorner(mt, k) = f_a.real();
  fp.topRightCorner(mt, k) = f_b.real();
  fp.bottomLeftCorner(mt, k) = f_a.imag();
  fp.bottomRightCorner(mt, k) = f_b.imag();
  return fp;
}

// Index maps relating the interleaved and the stacked orderings:
//   y_check[r] = y_prime[perm_y[r]]   and   x[c] = s_prime[perm_s[c]]
// (0-based). Both are involutions composed of 2-cycles by construction.
inline std::pair<std::vector<int>, std::vector<int>> permutations(int n_rx, int n_periods,
                                                                  int n_symbols) {
  const int mt = n_rx * n_periods;
  std::vector<int> perm_y(2 * mt), perm_s(2 * n_symbols);
  for (int p = 0; p < mt; ++p) {
    perm_y[2 * p] = p;
    perm_y[2 * p + 1] = mt + p;
  }
  for (int k = 0; k < n_symbols; ++k) {
    perm_s[2 * k] = k;
    perm_s[2 * k + 1] = n_symbols + k;
  }
  return {perm_y, perm_s};
}

// The channel-independent symbolic form of H_check for a given receive count.
inline SymbolicMatrix symbolic_lattice(const CodeSpec& spec, int n_rx) {
  const int n = spec.n_tx, t_len = spec.n_periods, k_sym = spec.n_symbols;
  const int mt = t_len * n_rx;
  // Complex symbolic channel coefficient (i, j), 0-based antennas: the real
  // component indices follow the interleaved column-stacked layout.
  auto re_index = [&](int i, int j) { return 2 * i + 1 + 2 * j * n; };      // 1-based
  auto im_index = [&](int i, int j) { return 2 * i + 2 + 2 * j * n; };

  // Symbolic complex entries of F = [F_a F_b] as (re, im) pairs.
  SymbolicMatrix f_re(mt, 2 * k_sym), f_im(mt, 2 * k_sym);
  for (int k = 0; k < k_sym; ++k) {
    for (int j = 0; j < n_rx; ++j) {
      for (int t = 0; t < t_len; ++t) {
        const int row = j * t_len + t;
        for (int i = 0; i < n; ++i) {
          const Coeff a = spec.a_mats[k].at(t, i);
          const Coeff b = spec.b_mats[k].at(t, i);
          // vec(A_k H): a * (h_re + i h_im)
          f_re.at(row, k).add_term(a, re_index(i, j));
          f_im.at(row, k).add_term(a, im_index(i, j));
          // i * vec(B_k H): b * (i h_re - h_im) ... i*(re+i*im) = -im + i*re
          f_re.at(row, k_sym + k).add_term(-b, im_index(i, j));
          f_im.at(row, k_sym + k).add_term(b, re_index(i, j));
        }
      }
    }
  }
  // F' stacks real over imaginary rows; H_check permutes rows and columns.
  auto [perm_y, perm_s] = permutations(n_rx, t_len, k_sym);
  SymbolicMatrix h_check(2 * mt, 2 * k_sym);
  for (int r = 0; r < 2 * mt; ++r) {
    const int pr = perm_y[r];
    const SymbolicMatrix& block = pr < mt ? f_re : f_im;
    const int br = pr < mt ? pr : pr - mt;
    for (int c = 0; c < 2 * k_sym; ++c) h_check.at(r, c) = block.at(br, perm_s[c]);
  }
  return h_check;
}

struct LatticeSystem {
  CodeSpec spec;
  int n_rx = 0;
  Eigen::MatrixXcd f_a, f_b;  // MT x K
  Eigen::MatrixXd f_prime;    // 2MT x 2K
  std::vector<int> perm_y;    // y_check[r] = y_prime[perm_y[r]]
  std::vector<int> perm_s;    // x[c] = s_prime[perm_s[c]]
  Eigen::MatrixXd check_h;    // 2MT x 2K
  SymbolicMatrix symbolic_h;  // empty when built without symbolic form
  double sigma = 0.0;         // gain * ||H||^2, the common squared column norm
};

inline double sigma(const CodeSpec& spec, const ChannelRealization& channel) {
  return spec.gain * channel.coeffs.squaredNorm();
}

// Full construction: numeric route (Eigen products from the coefficient
// matrices) plus, optionally, the independent symbolic route. Tests compare
// the two entry-wise.
inline LatticeSystem build_check_H(const CodeSpec& spec, const ChannelRealization& channel,
                                   bool with_symbolic = true) {
  LatticeSystem sys;
  sys.spec = spec;
  sys.n_rx = channel.n_rx();
  std::tie(sys.f_a, sys.f_b) = build_F(spec, channel);
  sys.f_prime = build_F_prime(sys.f_a, sys.f_b);
  std::tie(sys.perm_y, sys.perm_s) = permutations(sys.n_rx, spec.n_periods, spec.n_symbols);
  const int rows = static_cast<int>(sys.f_prime.rows());
  const int cols = static_cast<int>(sys.f_prime.cols());
  sys.check_h.resize(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) sys.check_h(r, c) = sys.f_prime(sys.perm_y[r], sys.perm_s[c]);
  if (with_symbolic) sys.symbolic_h = symbolic_lattice(spec, sys.n_rx);
  sys.sigma = sigma(spec, channel);
  return sys;
}

}  // namespace ostbc
