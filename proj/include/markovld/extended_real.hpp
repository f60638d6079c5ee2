#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <stdexcept>
#include <string>

namespace markovld {

/// A value in [-inf, +inf] with the infinite case carried as an explicit
/// flag. Finite payloads are always finite doubles.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  ExtendedReal(double v) : value_(v) {  // NOLINT(google-explicit-constructor)
    if (!std::isfinite(v)) throw std::invalid_argument("ExtendedReal: non-finite payload");
  }

  static constexpr ExtendedReal infinity() { return ExtendedReal(1); }
  static constexpr ExtendedReal negative_infinity() { return ExtendedReal(-1); }

  constexpr bool is_finite() const { return sign_ == 0; }
  constexpr bool is_pos_infinity() const { return sign_ > 0; }
  constexpr bool is_neg_infinity() const { return sign_ < 0; }

  /// Finite payload; throws on an infinite value.
  double value() const {
    if (!is_finite()) throw std::domain_error("ExtendedReal: value() on infinity");
    return value_;
  }

  /// Lossy view for numerics and printing.
  double to_double() const {
    if (sign_ > 0) return std::numeric_limits<double>::infinity();
    if (sign_ < 0) return -std::numeric_limits<double>::infinity();
    return value_;
  }

  ExtendedReal& operator+=(const ExtendedReal& o) {
    if (!is_finite() || !o.is_finite()) {
      if (sign_ * o.sign_ < 0) throw std::domain_error("ExtendedReal: inf - inf");
      if (sign_ == 0) sign_ = o.sign_;
      value_ = 0.0;
      return *this;
    }
    value_ += o.value_;
    return *this;
  }
  friend ExtendedReal operator+(ExtendedReal a, const ExtendedReal& b) { return a += b; }
  friend ExtendedReal operator-(const ExtendedReal& a) {
    ExtendedReal r = a;
    r.sign_ = -a.sign_;
    r.value_ = -a.value_;
    return r;
  }

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    return a.sign_ == b.sign_ && (a.sign_ != 0 || a.value_ == b.value_);
  }
  friend std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.sign_ != b.sign_ && (a.sign_ != 0 || b.sign_ != 0)) {
      return a.to_double() <=> b.to_double();
    }
    if (a.sign_ != 0) return std::partial_ordering::equivalent;
    return a.value_ <=> b.value_;
  }

  /// "inf", "-inf" or the shortest round-tripping decimal.
  std::string str() const;

 private:
  constexpr explicit ExtendedReal(int sign) : sign_(sign) {}

  double value_ = 0.0;
  int sign_ = 0;
};

}  // namespace markovld
