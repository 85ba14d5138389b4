// opcount.hpp - real-operation accounting.
//
// Complexity is measured in counts of real divisions, multiplications and
// additions. Counts come from two independent places: closed-form planning
// and instrumented execution through a counting scalar. The two must agree
// exactly, which is what the test suite enforces.

#pragma once

#include <cstdint>
#include <string>

namespace ostbc {

struct OpCount {
  long long divs = 0;
  long long mults = 0;
  long long adds = 0;

  OpCount& operator+=(const OpCount& o) {
    divs += o.divs;
    mults += o.mults;
    adds += o.adds;
    return *this;
  }
  friend OpCount operator+(OpCount a, const OpCount& b) { return a += b; }
  bool operator==(const OpCount& o) const {
    return divs == o.divs && mults == o.mults && adds == o.adds;
  }
  bool operator!=(const OpCount& o) const { return !(*this == o); }

  std::string str() const {
    return std::to_string(divs) + " div, " + std::to_string(mults) + " mul, " +
           std::to_string(adds) + " add";
  }
};

// A real division either stands on its own or is booked as 4 real
// multiplications; the conversion is exact in both directions.
enum class DivisionPolicy { count_divisions, four_mults };

inline OpCount apply_policy(OpCount c, DivisionPolicy p) {
  if (p == DivisionPolicy::four_mults) {
    c.mults += 4 * c.divs;
    c.divs = 0;
  }
  return c;
}

// Per-invocation accumulator; never global, so concurrent executions
// cannot share counters.
struct OpCounter {
  OpCount ops;
};

// Counting scalar: every arithmetic operation on it increments the
// attached accumulator. Negation is free (sign handling costs nothing).
class Counted {
 public:
  Counted(double v, OpCounter& ctx) : v_(v), ctx_(&ctx) {}

  double value() const { return v_; }

  Counted operator-() const { return Counted(-v_, *ctx_); }

  friend Counted operator+(const Counted& a, const Counted& b) {
    a.ctx_->ops.adds++;
    return Counted(a.v_ + b.v_, *a.ctx_);
  }
  friend Counted operator-(const Counted& a, const Counted& b) {
    a.ctx_->ops.adds++;
    return Counted(a.v_ - b.v_, *a.ctx_);
  }
  friend Counted operator*(const Counted& a, const Counted& b) {
    a.ctx_->ops.mults++;
    return Counted(a.v_ * b.v_, *a.ctx_);
  }
  friend Counted operator/(const Counted& a, const Counted& b) {
    a.ctx_->ops.divs++;
    return Counted(a.v_ / b.v_, *a.ctx_);
  }

 private:
  double v_;
  OpCounter* ctx_;
};

}  // namespace ostbc
