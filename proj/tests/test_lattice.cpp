#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <sstream>

#include "ostbc/lattice.hpp"

using namespace ostbc;

namespace {

std::mt19937_64& rng() {
  static std::mt19937_64 eng(101);
  return eng;
}

ChannelRealization random_channel(int n, int m) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd h(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) h(i, j) = cplx(gauss(rng()), gauss(rng()));
  return ChannelRealization(h);
}

std::vector<cplx> random_symbols(int k) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cplx> s(static_cast<size_t>(k));
  for (cplx& v : s) v = cplx(gauss(rng()), gauss(rng()));
  return s;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("interleaved vectorization") {
  Eigen::MatrixXcd y(2, 1);
  y << cplx(1, 2), cplx(3, 4);
  const Eigen::VectorXd v = vectorize_received(y);
  REQUIRE(v.size() == 4);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 2.0);
  CHECK(v[2] == 3.0);
  CHECK(v[3] == 4.0);

  CHECK(vectorize_received(Eigen::MatrixXcd::Zero(3, 2)).isZero());

  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd r(4, 3);
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 4; ++i) r(i, j) = cplx(gauss(rng()), gauss(rng()));
  CHECK(std::abs(vectorize_received(r).squaredNorm() - r.squaredNorm()) < 1e-12);

  CHECK((deinterleave_columns(vectorize_received(r), 4, 3) - r).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("channel real components follow the interleaved column layout") {
  const ChannelRealization ch = random_channel(3, 2);
  const Eigen::VectorXd v = ch.real_vector();
  REQUIRE(v.size() == 12);
  // component for transmit antenna i, receive antenna j sits at
  // 2i-1+2(j-1)N (real part, 1-based), the next slot holds the imaginary part
  CHECK(v[0] == ch.coeffs(0, 0).real());
  CHECK(v[1] == ch.coeffs(0, 0).imag());
  CHECK(v[6] == ch.coeffs(0, 1).real());
  CHECK(v[7] == ch.coeffs(0, 1).imag());
  CHECK(v[10] == ch.coeffs(2, 1).real());

  const ChannelRealization back = ChannelRealization::from_real(v, 3, 2);
  CHECK((back.coeffs - ch.coeffs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stacked representation reproduces the received block") {
  for (const std::string& name : builtin_names()) {
    const CodeSpec& spec = builtin(name);
    for (int m : {1, 2}) {
      const ChannelRealization ch = random_channel(spec.n_tx, m);
      const auto [f_a, f_b] = build_F(spec, ch);
      const std::vector<cplx> s = random_symbols(spec.n_symbols);

      Eigen::VectorXd sbar(spec.n_symbols), stil(spec.n_symbols);
      for (int k = 0; k < spec.n_symbols; ++k) {
        sbar[k] = s[static_cast<size_t>(k)].real();
        stil[k] = s[static_cast<size_t>(k)].imag();
      }
      Eigen::MatrixXcd prod = encode(spec, s) * ch.coeffs;
      const Eigen::VectorXcd want = Eigen::Map<Eigen::VectorXcd>(prod.data(), prod.size());
      const Eigen::VectorXcd got = f_a * sbar + f_b * stil;
      INFO(name << " M=" << m);
      CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("G2 first matched column is the channel itself") {
  const ChannelRealization ch = random_channel(2, 1);
  const auto [f_a, f_b] = build_F(builtin("G2"), ch);
  CHECK(f_a(0, 0) == ch.coeffs(0, 0));
  CHECK(f_a(1, 0) == ch.coeffs(1, 0));
}

TEST_CASE("matched-filter Gram identities") {
  const CodeSpec& g3 = builtin("G3");
  for (int m : {1, 2}) {
    const ChannelRealization ch = random_channel(g3.n_tx, m);
    const auto [f_a, f_b] = build_F(g3, ch);
    Eigen::MatrixXcd f(f_a.rows(), f_a.cols() + f_b.cols());
    f << f_a, f_b;
    const Eigen::MatrixXd gram = (f.adjoint() * f).real();
    const double want = g3.gain * ch.coeffs.squaredNorm();
    const Eigen::MatrixXd target = want * Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
    INFO("M=" << m);
    CHECK((gram - target).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, want));
  }
}

TEST_CASE("real stacking keeps the Gram identity") {
  for (const std::string& name : builtin_names()) {
    const CodeSpec& spec = builtin(name);
    const ChannelRealization ch = random_channel(spec.n_tx, 2);
    const auto [f_a, f_b] = build_F(spec, ch);
    const Eigen::MatrixXd fp = build_F_prime(f_a, f_b);
    const double want = spec.gain * ch.coeffs.squaredNorm();
    const Eigen::MatrixXd target = want * Eigen::MatrixXd::Identity(fp.cols(), fp.cols());
    CHECK((fp.transpose() * fp - target).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, want));
  }
}

TEST_CASE("real channel leaves the lower-left stacking block empty") {
  Eigen::MatrixXcd h(2, 1);
  h << cplx(0.7, 0.0), cplx(-1.3, 0.0);
  const auto [f_a, f_b] = build_F(builtin("G2"), ChannelRealization(h));
  const Eigen::MatrixXd fp = build_F_prime(f_a, f_b);
  // a real channel makes F_a real and F_b purely imaginary
  CHECK(fp.bottomLeftCorner(2, 2).isZero(0.0));
  CHECK(fp.topRightCorner(2, 2).isZero(0.0));
}

TEST_CASE("zero channel gives a zero stacking") {
  const ChannelRealization ch(Eigen::MatrixXcd::Zero(2, 1));
  const auto [f_a, f_b] = build_F(builtin("G2"), ch);
  CHECK(build_F_prime(f_a, f_b).isZero(0.0));
}

TEST_CASE("permutation index maps") {
  {
    const auto [py, ps] = permutations(1, 2, 2);
    CHECK(ps == std::vector<int>{0, 2, 1, 3});
    CHECK(py == std::vector<int>{0, 2, 1, 3});
  }
  // permutation property: the inverse map composes to the identity
  const auto [py, ps] = permutations(2, 8, 4);
  auto check_perm = [](const std::vector<int>& p) {
    std::vector<int> inv(p.size(), -1);
    for (size_t i = 0; i < p.size(); ++i) {
      REQUIRE(p[i] >= 0);
      REQUIRE(p[i] < static_cast<int>(p.size()));
      inv[static_cast<size_t>(p[i])] = static_cast<int>(i);
    }
    for (size_t i = 0; i < p.size(); ++i)
      CHECK(p[static_cast<size_t>(inv[i])] == static_cast<int>(i));
  };
  check_perm(py);
  check_perm(ps);
}

TEST_CASE("lattice matrix of G2 matches the displayed form") {
  const std::vector<std::string> want = {
      "h1 -h2 h3 -h4",
      "h2 h1 h4 h3",
      "h3 h4 -h1 -h2",
      "h4 -h3 -h2 h1",
  };
  CHECK(lines_of(symbolic_lattice(builtin("G2"), 1).text()) == want);
}

TEST_CASE("lattice matrix of G3 matches the displayed rows") {
  const std::vector<std::string> lines = lines_of(symbolic_lattice(builtin("G3"), 2).text());
  REQUIRE(lines.size() == 32);
  CHECK(lines[0] == "h1 -h2 h3 -h4 h5 -h6 0 0");
  CHECK(lines[1] == "h2 h1 h4 h3 h6 h5 0 0");
  CHECK(lines[16] == "h7 -h8 h9 -h10 h11 -h12 0 0");
  CHECK(lines[17] == "h8 h7 h10 h9 h12 h11 0 0");
  CHECK(lines[30] == "0 0 h11 h12 -h9 -h10 -h7 -h8");
  CHECK(lines[31] == "0 0 h12 -h11 -h10 h9 -h8 h7");
  // every column holds each channel component exactly twice, plus 8 zeros
  const SymbolicMatrix sym = symbolic_lattice(builtin("G3"), 2);
  for (int c = 0; c < sym.cols; ++c) {
    std::map<int, int> seen;
    int zeros = 0;
    for (int r = 0; r < sym.rows; ++r) {
      const SymbolicEntry& e = sym.at(r, c);
      if (e.is_zero()) {
        ++zeros;
        continue;
      }
      REQUIRE(e.terms.size() == 1);
      CHECK(e.terms.front().weight.is_unit());
      seen[e.terms.front().h_index]++;
    }
    CHECK(zeros == 8);
    CHECK(seen.size() == 12);
    for (const auto& [idx, n] : seen) CHECK(n == 2);
  }
}

TEST_CASE("lattice matrix of G4 matches the displayed rows") {
  const std::vector<std::string> lines = lines_of(symbolic_lattice(builtin("G4"), 1).text());
  REQUIRE(lines.size() == 16);
  CHECK(lines[1] == "h2 h1 h4 h3 h6 h5 h8 h7");
  CHECK(lines[2] == "h3 -h4 -h1 h2 h7 -h8 -h5 h6");
  CHECK(lines[3] == "h4 h3 -h2 -h1 h8 h7 -h6 -h5");
  CHECK(lines[13] == "h6 -h5 -h8 h7 -h2 h1 h4 -h3");
  // The published display shows +h8 in the two rows below, but that sign
  // breaks the orthogonality of the columns that the same source asserts;
  // the constructed matrix keeps the consistent sign and is pinned here.
  CHECK(lines[0] == "h1 -h2 h3 -h4 h5 -h6 h7 -h8");
  CHECK(lines[12] == "h5 h6 -h7 -h8 -h1 -h2 h3 h4");
}

TEST_CASE("lattice matrix of H3 matches the displayed form") {
  const std::vector<std::string> lines = lines_of(symbolic_lattice(builtin("H3"), 1).text());
  REQUIRE(lines.size() == 8);
  CHECK(lines[0] == "h1 -h2 h3 -h4 h5/sqrt2 -h6/sqrt2");
  CHECK(lines[1] == "h2 h1 h4 h3 h6/sqrt2 h5/sqrt2");
  CHECK(lines[2] == "h3 h4 -h1 -h2 h5/sqrt2 -h6/sqrt2");
  CHECK(lines[3] == "h4 -h3 -h2 h1 h6/sqrt2 h5/sqrt2");
  CHECK(lines[4] == "-h5 0 0 -h6 (h1+h3)/sqrt2 (h2+h4)/sqrt2");
  CHECK(lines[5] == "-h6 0 0 h5 (h2+h4)/sqrt2 (-h1-h3)/sqrt2");
  // The published display negates the second-column entries of the last two
  // rows; as printed that column would not be orthogonal to the fifth and
  // sixth columns, so the constructed signs below are the consistent ones.
  CHECK(lines[6] == "0 -h6 h5 0 (h1-h3)/sqrt2 (h2-h4)/sqrt2");
  CHECK(lines[7] == "0 h5 h6 0 (h2-h4)/sqrt2 (-h1+h3)/sqrt2");
}

TEST_CASE("lattice system invariants") {
  for (const std::string& name : builtin_names()) {
    const CodeSpec& spec = builtin(name);
    for (int m : {1, 2}) {
      for (int trial = 0; trial < 20; ++trial) {
        const ChannelRealization ch = random_channel(spec.n_tx, m);
        const LatticeSystem sys = build_check_H(spec, ch);
        const double want = spec.gain * ch.coeffs.squaredNorm();
        INFO(name << " M=" << m << " trial " << trial);

        // orthogonality with common squared column norm
        const Eigen::MatrixXd gram = sys.check_h.transpose() * sys.check_h;
        const Eigen::MatrixXd target =
            want * Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
        CHECK((gram - target).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, want));

        // sigma equals the first column's squared norm and the channel norm
        CHECK(std::abs(sys.check_h.col(0).squaredNorm() - sys.sigma) <
              1e-12 * std::max(1.0, want));
        CHECK(sys.sigma == want);

        // symbolic and numeric forms agree at the channel realization
        const Eigen::MatrixXd sym_eval = sys.symbolic_h.eval(ch.real_vector());
        CHECK((sym_eval - sys.check_h).cwiseAbs().maxCoeff() < 1e-14 * std::max(1.0, want));
      }
    }
  }
}

TEST_CASE("lattice equals the permuted stacking on symbol vectors") {
  for (const std::string& name : builtin_names()) {
    const CodeSpec& spec = builtin(name);
    const ChannelRealization ch = random_channel(spec.n_tx, 2);
    const LatticeSystem sys = build_check_H(spec, ch, false);
    const std::vector<cplx> s = random_symbols(spec.n_symbols);

    Eigen::VectorXd x(2 * spec.n_symbols), sp(2 * spec.n_symbols);
    for (int k = 0; k < spec.n_symbols; ++k) {
      x[2 * k] = s[static_cast<size_t>(k)].real();
      x[2 * k + 1] = s[static_cast<size_t>(k)].imag();
      sp[k] = s[static_cast<size_t>(k)].real();
      sp[spec.n_symbols + k] = s[static_cast<size_t>(k)].imag();
    }
    const Eigen::VectorXd lhs = sys.check_h * x;
    const Eigen::VectorXd fps = sys.f_prime * sp;
    Eigen::VectorXd rhs(lhs.size());
    for (Eigen::Index i = 0; i < rhs.size(); ++i) rhs[i] = fps[sys.perm_y[i]];
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);

    // and both equal the vectorized noiseless received block
    const Eigen::VectorXd direct = vectorize_received(encode(spec, s) * ch.coeffs);
    CHECK((lhs - direct).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("sigma basics") {
  CHECK(sigma(builtin("G2"), ChannelRealization(Eigen::MatrixXcd::Zero(2, 1))) == 0.0);

  const CodeSpec& g3 = builtin("G3");
  const ChannelRealization ch = random_channel(3, 2);
  double sum = 0.0;
  const Eigen::VectorXd v = ch.real_vector();
  for (Eigen::Index i = 0; i < v.size(); ++i) sum += v[i] * v[i];
  CHECK(std::abs(sigma(g3, ch) - 2.0 * sum) < 1e-12 * std::max(1.0, sum));
}

TEST_CASE("symbolic entry text forms") {
  SymbolicEntry zero;
  CHECK(zero.text() == "0");

  SymbolicEntry neg;
  neg.add_term(-Coeff::one(), 2);
  CHECK(neg.text() == "-h2");

  SymbolicEntry scaled;
  scaled.add_term(Coeff::inv_sqrt2(), 5);
  CHECK(scaled.text() == "h5/sqrt2");

  SymbolicEntry halfterm;
  halfterm.add_term(-Coeff::half(), 3);
  CHECK(halfterm.text() == "-h3/2");

  SymbolicEntry combo;
  combo.add_term(Coeff::inv_sqrt2(), 1);
  combo.add_term(Coeff::inv_sqrt2(), 3);
  CHECK(combo.text() == "(h1+h3)/sqrt2");

  SymbolicEntry diff;
  diff.add_term(-Coeff::inv_sqrt2(), 1);
  diff.add_term(Coeff::inv_sqrt2(), 3);
  CHECK(diff.text() == "(-h1+h3)/sqrt2");

  SymbolicEntry unit_sum;
  unit_sum.add_term(Coeff::one(), 1);
  unit_sum.add_term(-Coeff::one(), 4);
  CHECK(unit_sum.text() == "h1-h4");

  SymbolicEntry mixed;
  mixed.add_term(Coeff::half(), 1);
  mixed.add_term(Coeff::inv_sqrt2(), 2);
  CHECK(mixed.text() == "h1/2+h2/sqrt2");

  // adding a cancelling term removes it
  SymbolicEntry cancel;
  cancel.add_term(Coeff::one(), 1);
  cancel.add_term(-Coeff::one(), 1);
  CHECK(cancel.is_zero());
}
