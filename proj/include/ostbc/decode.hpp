// decode.hpp - optimum decoders for orthogonal space-time block codes.
//
// Because G^H G = c (sum |s_k|^2) I, maximum-likelihood detection reduces to
// a matched filter plus per-component quantization. The same soft estimate
// can be computed four ways (trace form, complex matched filter, real
// matched filter, real lattice form) plus a fifth route through the
// classical per-symbol decision statistic r_k; all agree to rounding.
// An exhaustive search over the constellation provides the ground-truth
// oracle for tests.

#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "ostbc/constellation.hpp"
#include "ostbc/lattice.hpp"

namespace ostbc {

enum class DecodeMethod { trace, complex_matched, real_matched, lattice, combining };

inline const char* to_string(DecodeMethod m) {
  switch (m) {
    case DecodeMethod::trace: return "trace";
    case DecodeMethod::complex_matched: return "complex-matched";
    case DecodeMethod::real_matched: return "real-matched";
    case DecodeMethod::lattice: return "lattice";
    case DecodeMethod::combining: return "combining";
  }
  return "?";
}

struct DecodeOutcome {
  std::vector<cplx> soft;  // K complex soft estimates
  std::vector<cplx> hard;  // K constellation decisions
  double residual = 0.0;   // ||Y - G(hard) H||_F^2, diagnostic only
};

// --- orderings ----------------------------------------------------------------

// Interleaved real vector (Re s1, Im s1, ...) -> complex symbols.
inline std::vector<cplx> pair_interleaved(const Eigen::VectorXd& x) {
  std::vector<cplx> s(static_cast<size_t>(x.size() / 2));
  for (size_t k = 0; k < s.size(); ++k) s[k] = cplx(x[2 * k], x[2 * k + 1]);
  return s;
}

// Stacked real vector (Re s1..Re sK, Im s1..Im sK) -> complex symbols.
inline std::vector<cplx> pair_stacked(const Eigen::VectorXd& sp) {
  const Eigen::Index k = sp.size() / 2;
  std::vector<cplx> s(static_cast<size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) s[static_cast<size_t>(i)] = cplx(sp[i], sp[k + i]);
  return s;
}

inline Eigen::VectorXd interleave_symbols(std::span<const cplx> s) {
  Eigen::VectorXd x(2 * s.size());
  for (size_t k = 0; k < s.size(); ++k) {
    x[2 * k] = s[k].real();
    x[2 * k + 1] = s[k].imag();
  }
  return x;
}

namespace detail {

inline double matched_denominator(const CodeSpec& spec, const ChannelRealization& channel) {
  const double d = spec.gain * channel.coeffs.squaredNorm();
  if (d <= 0.0) throw std::domain_error("decode: degenerate channel (sigma = 0)");
  return d;
}

}  // namespace detail

// Trace form: s_hat_k = [Re Tr(H^H A_k^H Y) + i Im Tr(H^H B_k^H Y)] / (c ||H||^2).
// Only the real part of the first trace and the imaginary part of the second
// are ever formed; the discarded parts would be wasted work.
inline std::vector<cplx> decode_trace(const CodeSpec& spec, const ChannelRealization& channel,
                                      const Eigen::MatrixXcd& y) {
  const double denom = detail::matched_denominator(spec, channel);
  std::vector<cplx> soft(static_cast<size_t>(spec.n_symbols));
  for (int k = 0; k < spec.n_symbols; ++k) {
    const Eigen::MatrixXcd p = spec.a_mats[k].numeric().cast<cplx>() * channel.coeffs;
    const Eigen::MatrixXcd q = spec.b_mats[k].numeric().cast<cplx>() * channel.coeffs;
    const double re =
        (p.real().cwiseProduct(y.real()) + p.imag().cwiseProduct(y.imag())).sum();
    const double im =
        (q.real().cwiseProduct(y.imag()) - q.imag().cwiseProduct(y.real())).sum();
    soft[static_cast<size_t>(k)] = cplx(re, im) / denom;
  }
  return soft;
}

// Complex matched filter: s'_hat = Re[F^H y] / (c ||H||^2), stacked ordering.
inline Eigen::VectorXd decode_complex_matched(const CodeSpec& spec,
                                              const ChannelRealization& channel,
                                              const Eigen::VectorXcd& y_vec) {
  const double denom = detail::matched_denominator(spec, channel);
  auto [f_a, f_b] = build_F(spec, channel);
  Eigen::MatrixXcd f(f_a.rows(), f_a.cols() + f_b.cols());
  f << f_a, f_b;
  // Re[F^H y] without forming the complex products.
  Eigen::VectorXd out = f.real().transpose() * y_vec.real() + f.imag().transpose() * y_vec.imag();
  return out / denom;
}

// Real matched filter: s'_hat = F'^T y' / (c ||H||^2), stacked ordering.
inline Eigen::VectorXd decode_real_matched(const LatticeSystem& sys,
                                           const Eigen::VectorXd& y_prime) {
  if (sys.sigma <= 0.0) throw std::domain_error("decode: degenerate channel (sigma = 0)");
  return sys.f_prime.transpose() * y_prime / sys.sigma;
}

// Lattice form: x_hat = H_check^T y_check / sigma, interleaved ordering.
inline Eigen::VectorXd decode_lattice(const LatticeSystem& sys, const Eigen::VectorXd& y_check) {
  if (sys.sigma <= 0.0) throw std::domain_error("decode: degenerate channel (sigma = 0)");
  return sys.check_h.transpose() * y_check / sys.sigma;
}

// Classical decision statistic: for every occurrence of s_k in the code
// matrix the received sample is combined with the conjugated channel
// coefficient, and for every occurrence of conj(s_k) the conjugated sample
// with the plain coefficient. Coefficient weights carry through, which
// also covers entries where s_k and conj(s_k) appear mixed.
inline std::vector<cplx> combining_statistic(const CodeSpec& spec,
                                             const ChannelRealization& channel,
                                             const Eigen::MatrixXcd& y) {
  std::vector<cplx> r(static_cast<size_t>(spec.n_symbols), cplx(0.0, 0.0));
  for (int k = 0; k < spec.n_symbols; ++k) {
    const auto [on_sym, on_conj] = conjugate_pair(spec, k);
    cplx acc(0.0, 0.0);
    for (int t = 0; t < spec.n_periods; ++t) {
      for (int i = 0; i < spec.n_tx; ++i) {
        const Coeff& a = on_sym.at(t, i);
        const Coeff& b = on_conj.at(t, i);
        if (a.is_zero() && b.is_zero()) continue;
        for (int j = 0; j < channel.n_rx(); ++j) {
          if (!a.is_zero()) acc += a.value() * std::conj(channel.coeffs(i, j)) * y(t, j);
          if (!b.is_zero()) acc += b.value() * channel.coeffs(i, j) * std::conj(y(t, j));
        }
      }
    }
    r[static_cast<size_t>(k)] = acc;
  }
  return r;
}

inline std::vector<cplx> decode_combining(const CodeSpec& spec, const ChannelRealization& channel,
                                          const Eigen::MatrixXcd& y) {
  const double denom = detail::matched_denominator(spec, channel);
  std::vector<cplx> r = combining_statistic(spec, channel, y);
  for (cplx& v : r) v /= denom;
  return r;
}

// The per-symbol metric in its unsimplified form,
//   |s - r_k|^2 + (c sum |h_ij|^2 - 1) |s|^2.
// Minimizing it over the constellation is equivalent to quantizing
// r_k / (c ||H||^2), but evaluating it as written costs work per candidate.
inline double metric_combining_naive(const CodeSpec& spec, const ChannelRealization& channel,
                                     const Eigen::MatrixXcd& y, int k, cplx candidate) {
  const cplx r = combining_statistic(spec, channel, y).at(static_cast<size_t>(k));
  const double ch = spec.gain * channel.coeffs.squaredNorm();
  return std::norm(candidate - r) + (ch - 1.0) * std::norm(candidate);
}

inline std::vector<cplx> quantize_hard(std::span<const cplx> soft, int L) {
  std::vector<cplx> hard(soft.size());
  for (size_t k = 0; k < soft.size(); ++k) hard[k] = quantize(soft[k], L);
  return hard;
}

// --- exhaustive oracle --------------------------------------------------------

struct OracleResult {
  std::vector<cplx> hard;
  double best = 0.0;
  double second = std::numeric_limits<double>::infinity();
  // true when the runner-up metric is clearly separated from the minimum
  bool unique = true;
};

// Minimizes ||Y - G(s) H||_F^2 over every symbol vector in the squared
// alphabet, scanning in lexicographic order of (Re s1, Im s1, Re s2, ...)
// so ties resolve to the lexicographically smallest vector.
inline OracleResult oracle_ml(const CodeSpec& spec, const ChannelRealization& channel,
                              const Eigen::MatrixXcd& y, int L) {
  const int k_sym = spec.n_symbols;
  const int digits = 2 * k_sym;
  const double space = std::pow(2.0 * L, static_cast<double>(digits));
  if (space > 1e7)
    throw std::invalid_argument("oracle: search space (2L)^(2K) = " + std::to_string(space) +
                                " exceeds the enumeration guard");

  // Per-component contributions: G(s) H = sum_k Re(s_k) A_k H + Im(s_k) (i B_k H).
  std::vector<Eigen::MatrixXcd> basis(static_cast<size_t>(digits));
  for (int k = 0; k < k_sym; ++k) {
    basis[static_cast<size_t>(2 * k)] = spec.a_mats[k].numeric().cast<cplx>() * channel.coeffs;
    basis[static_cast<size_t>(2 * k + 1)] =
        cplx(0.0, 1.0) * (spec.b_mats[k].numeric().cast<cplx>() * channel.coeffs);
  }

  const std::vector<int> points = Constellation(L).points();
  std::vector<int> digit(static_cast<size_t>(digits), 0);
  // partial[d] = y - contributions of digits 0..d; avoids rebuilding the
  // whole candidate signal when only trailing digits move.
  std::vector<Eigen::MatrixXcd> partial(static_cast<size_t>(digits));
  auto refresh_from = [&](int d) {
    for (int i = d; i < digits; ++i) {
      const Eigen::MatrixXcd& prev = i == 0 ? y : partial[static_cast<size_t>(i - 1)];
      partial[static_cast<size_t>(i)] =
          prev - static_cast<double>(points[static_cast<size_t>(digit[static_cast<size_t>(i)])]) *
                     basis[static_cast<size_t>(i)];
    }
  };
  refresh_from(0);

  OracleResult res;
  res.best = std::numeric_limits<double>::infinity();
  std::vector<int> best_digits = digit;
  for (;;) {
    const double metric = partial[static_cast<size_t>(digits - 1)].squaredNorm();
    if (metric < res.best) {
      res.second = res.best;
      res.best = metric;
      best_digits = digit;
    } else if (metric < res.second) {
      res.second = metric;
    }
    // odometer, digit 0 most significant
    int d = digits - 1;
    while (d >= 0 && digit[static_cast<size_t>(d)] + 1 == static_cast<int>(points.size())) {
      digit[static_cast<size_t>(d)] = 0;
      --d;
    }
    if (d < 0) break;
    ++digit[static_cast<size_t>(d)];
    refresh_from(d);
  }

  res.hard.resize(static_cast<size_t>(k_sym));
  for (int k = 0; k < k_sym; ++k)
    res.hard[static_cast<size_t>(k)] =
        cplx(points[static_cast<size_t>(best_digits[static_cast<size_t>(2 * k)])],
             points[static_cast<size_t>(best_digits[static_cast<size_t>(2 * k + 1)])]);
  res.unique = res.second - res.best > 1e-12 * std::max(1.0, res.best);
  return res;
}

// Convenience wrapper: soft estimates by any method, quantized decisions,
// and the residual metric of the decision.
inline DecodeOutcome decode_block(const CodeSpec& spec, const ChannelRealization& channel,
                                  const Eigen::MatrixXcd& y, int L,
                                  DecodeMethod method = DecodeMethod::lattice) {
  DecodeOutcome out;
  switch (method) {
    case DecodeMethod::trace:
      out.soft = decode_trace(spec, channel, y);
      break;
    case DecodeMethod::complex_matched: {
      Eigen::MatrixXcd ym = y;
      const Eigen::VectorXcd yv = Eigen::Map<Eigen::VectorXcd>(ym.data(), ym.size());
      out.soft = pair_stacked(decode_complex_matched(spec, channel, yv));
      break;
    }
    case DecodeMethod::real_matched: {
      const LatticeSystem sys = build_check_H(spec, channel, /*with_symbolic=*/false);
      Eigen::VectorXd yp(2 * y.size());
      Eigen::MatrixXcd ym = y;
      const Eigen::VectorXcd yv = Eigen::Map<Eigen::VectorXcd>(ym.data(), ym.size());
      yp << yv.real(), yv.imag();
      out.soft = pair_stacked(decode_real_matched(sys, yp));
      break;
    }
    case DecodeMethod::lattice: {
      const LatticeSystem sys = build_check_H(spec, channel, /*with_symbolic=*/false);
      out.soft = pair_interleaved(decode_lattice(sys, vectorize_received(y)));
      break;
    }
    case DecodeMethod::combining:
      out.soft = decode_combining(spec, channel, y);
      break;
  }
  out.hard = quantize_hard(out.soft, L);
  out.residual = (y - encode(spec, out.hard) * channel.coeffs).squaredNorm();
  return out;
}

}  // namespace ostbc
