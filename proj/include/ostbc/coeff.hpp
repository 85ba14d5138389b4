// coeff.hpp - exact code-matrix coefficients.
//
// Code matrices are stored with exact entries of the form
// (num/den) * (1/sqrt(2))^f with den in {1,2}, |num| <= 2 and f in {0,1}.
// Keeping these exact lets the complexity planner recognize structure
// (zeros, repeated channel symbols, shared scalar factors) without any
// floating-point pattern matching.

#pragma once

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace ostbc {

class Coeff {
 public:
  constexpr Coeff() = default;

  Coeff(int num, int den, bool inv_sqrt2) : num_(num), den_(den), sqrt_(inv_sqrt2) {
    normalize();
  }

  static Coeff zero() { return Coeff(); }
  static Coeff one() { return Coeff(1, 1, false); }
  static Coeff inv_sqrt2() { return Coeff(1, 1, true); }
  static Coeff half() { return Coeff(1, 2, false); }

  int num() const { return num_; }
  int den() const { return den_; }
  bool has_inv_sqrt2() const { return sqrt_; }

  bool is_zero() const { return num_ == 0; }
  bool is_one() const { return num_ == 1 && den_ == 1 && !sqrt_; }
  // |coeff| == 1, i.e. a bare +/- channel symbol when used as a weight.
  bool is_unit() const { return std::abs(num_) == 1 && den_ == 1 && !sqrt_; }
  int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }

  Coeff abs() const { return Coeff(std::abs(num_), den_, sqrt_); }

  double value() const {
    double v = static_cast<double>(num_) / static_cast<double>(den_);
    return sqrt_ ? v * 0.70710678118654752440 : v;
  }

  Coeff operator-() const { return Coeff(-num_, den_, sqrt_); }

  // Sums arise when passing between the two linear code representations.
  // Mixing rational and 1/sqrt(2)-scaled coefficients is not representable.
  Coeff operator+(const Coeff& o) const {
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    if (sqrt_ != o.sqrt_)
      throw std::domain_error("coeff: cannot add rational and 1/sqrt2-scaled values");
    return Coeff(num_ * o.den_ + o.num_ * den_, den_ * o.den_, sqrt_);
  }

  Coeff operator-(const Coeff& o) const { return *this + (-o); }

  Coeff halved() const {
    if (num_ % 2 == 0) return Coeff(num_ / 2, den_, sqrt_);
    if (den_ == 1) return Coeff(num_, 2, sqrt_);
    throw std::domain_error("coeff: halving would need denominator 4");
  }

  bool operator==(const Coeff& o) const {
    return num_ == o.num_ && den_ == o.den_ && sqrt_ == o.sqrt_;
  }
  bool operator!=(const Coeff& o) const { return !(*this == o); }

  // Canonical string form, the closed set used in code-definition files.
  std::string str() const {
    if (is_zero()) return "0";
    if (sqrt_) {
      if (std::abs(num_) != 1 || den_ != 1)
        throw std::domain_error("coeff: " + debug_str() + " has no file form");
      return num_ > 0 ? "1/sqrt2" : "-1/sqrt2";
    }
    std::string s = std::to_string(num_);
    if (den_ == 2) s += "/2";
    return s;
  }

  static Coeff parse(const std::string& s) {
    if (s == "0") return zero();
    if (s == "1") return one();
    if (s == "-1") return -one();
    if (s == "2") return Coeff(2, 1, false);
    if (s == "-2") return Coeff(-2, 1, false);
    if (s == "1/2") return half();
    if (s == "-1/2") return -half();
    if (s == "1/sqrt2") return inv_sqrt2();
    if (s == "-1/sqrt2") return -inv_sqrt2();
    throw std::invalid_argument("coeff: unrecognized coefficient \"" + s + "\"");
  }

  std::string debug_str() const {
    return std::to_string(num_) + "/" + std::to_string(den_) + (sqrt_ ? "/sqrt2" : "");
  }

 private:
  void normalize() {
    if (num_ == 0) {
      den_ = 1;
      sqrt_ = false;
      return;
    }
    if (den_ < 0) {
      den_ = -den_;
      num_ = -num_;
    }
    while (den_ % 2 == 0 && num_ % 2 == 0) {
      den_ /= 2;
      num_ /= 2;
    }
    if (den_ != 1 && den_ != 2)
      throw std::domain_error("coeff: denominator " + std::to_string(den_) + " out of range");
    if (num_ < -2 || num_ > 2)
      throw std::domain_error("coeff: numerator " + std::to_string(num_) + " out of range");
  }

  int num_ = 0;
  int den_ = 1;
  bool sqrt_ = false;
};

}  // namespace ostbc
