#pragma once

// Minimal RAII wrapper over mpfr_t. Every value carries its own precision; binary
// operations round to the precision of the left operand.

#include <mpfr.h>

#include <string>

namespace warp_harmonic::detail {

class MpFloat {
 public:
  explicit MpFloat(mpfr_prec_t bits);
  MpFloat(mpfr_prec_t bits, double x);
  MpFloat(mpfr_prec_t bits, const std::string& decimal);
  MpFloat(const MpFloat& other);
  MpFloat(MpFloat&& other) noexcept;
  MpFloat& operator=(const MpFloat& other);
  MpFloat& operator=(MpFloat&& other) noexcept;
  ~MpFloat();

  mpfr_prec_t precision() const { return mpfr_get_prec(x_); }
  mpfr_ptr get() { return x_; }
  mpfr_srcptr get() const { return x_; }

  double to_double() const { return mpfr_get_d(x_, MPFR_RNDN); }
  /// log10 |x| without underflow (x != 0).
  double log10_abs() const;
  /// Scientific notation with `digits` significant digits; 0 picks the full precision.
  std::string to_string(int digits = 0) const;
  int sign() const { return mpfr_sgn(x_); }

  MpFloat operator+(const MpFloat& o) const;
  MpFloat operator-(const MpFloat& o) const;
  MpFloat operator*(const MpFloat& o) const;
  MpFloat operator/(const MpFloat& o) const;
  MpFloat operator*(double o) const;
  MpFloat operator-() const;
  bool operator<(const MpFloat& o) const { return mpfr_less_p(x_, o.x_) != 0; }
  bool operator>(const MpFloat& o) const { return mpfr_greater_p(x_, o.x_) != 0; }

  static MpFloat pi(mpfr_prec_t bits);

 private:
  mpfr_t x_;
};

MpFloat sin(const MpFloat& a);
MpFloat cos(const MpFloat& a);
MpFloat tan(const MpFloat& a);
MpFloat exp(const MpFloat& a);
MpFloat abs(const MpFloat& a);
MpFloat reciprocal(const MpFloat& a);

/// Decimal digits that represent `bits` binary digits exactly enough to round-trip.
int decimal_digits(mpfr_prec_t bits);

}  // namespace warp_harmonic::detail
