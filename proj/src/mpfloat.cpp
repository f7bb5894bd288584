#include "mpfloat.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "warp_harmonic/error.hpp"

namespace warp_harmonic::detail {

MpFloat::MpFloat(mpfr_prec_t bits) {
  mpfr_init2(x_, bits);
  mpfr_set_zero(x_, 1);
}

MpFloat::MpFloat(mpfr_prec_t bits, double x) {
  mpfr_init2(x_, bits);
  mpfr_set_d(x_, x, MPFR_RNDN);
}

MpFloat::MpFloat(mpfr_prec_t bits, const std::string& decimal) {
  mpfr_init2(x_, bits);
  if (mpfr_set_str(x_, decimal.c_str(), 10, MPFR_RNDN) != 0 && mpfr_nan_p(x_)) {
    mpfr_clear(x_);
    throw ConfigError("not a decimal number: " + decimal);
  }
}

MpFloat::MpFloat(const MpFloat& other) {
  mpfr_init2(x_, other.precision());
  mpfr_set(x_, other.x_, MPFR_RNDN);
}

MpFloat::MpFloat(MpFloat&& other) noexcept {
  // mpfr_t is an array type; swap the limb pointers and leave other empty-but-valid
  mpfr_init2(x_, other.precision());
  mpfr_swap(x_, other.x_);
}

MpFloat& MpFloat::operator=(const MpFloat& other) {
  if (this != &other) {
    mpfr_set_prec(x_, other.precision());
    mpfr_set(x_, other.x_, MPFR_RNDN);
  }
  return *this;
}

MpFloat& MpFloat::operator=(MpFloat&& other) noexcept {
  if (this != &other) mpfr_swap(x_, other.x_);
  return *this;
}

MpFloat::~MpFloat() { mpfr_clear(x_); }

double MpFloat::log10_abs() const {
  long e = 0;
  const double m = mpfr_get_d_2exp(&e, x_, MPFR_RNDN);
  return std::log10(std::abs(m)) + static_cast<double>(e) * std::log10(2.0);
}

std::string MpFloat::to_string(int digits) const {
  if (digits <= 0) digits = decimal_digits(precision());
  if (mpfr_zero_p(x_)) return "0";
  const int n = mpfr_snprintf(nullptr, 0, "%.*Re", digits - 1, x_);
  std::vector<char> buf(static_cast<std::size_t>(n) + 1);
  mpfr_snprintf(buf.data(), buf.size(), "%.*Re", digits - 1, x_);
  return std::string(buf.data());
}

MpFloat MpFloat::operator+(const MpFloat& o) const {
  MpFloat r(precision());
  mpfr_add(r.x_, x_, o.x_, MPFR_RNDN);
  return r;
}
MpFloat MpFloat::operator-(const MpFloat& o) const {
  MpFloat r(precision());
  mpfr_sub(r.x_, x_, o.x_, MPFR_RNDN);
  return r;
}
MpFloat MpFloat::operator*(const MpFloat& o) const {
  MpFloat r(precision());
  mpfr_mul(r.x_, x_, o.x_, MPFR_RNDN);
  return r;
}
MpFloat MpFloat::operator/(const MpFloat& o) const {
  MpFloat r(precision());
  mpfr_div(r.x_, x_, o.x_, MPFR_RNDN);
  return r;
}
MpFloat MpFloat::operator*(double o) const {
  MpFloat r(precision());
  mpfr_mul_d(r.x_, x_, o, MPFR_RNDN);
  return r;
}
MpFloat MpFloat::operator-() const {
  MpFloat r(precision());
  mpfr_neg(r.x_, x_, MPFR_RNDN);
  return r;
}

MpFloat MpFloat::pi(mpfr_prec_t bits) {
  MpFloat r(bits);
  mpfr_const_pi(r.x_, MPFR_RNDN);
  return r;
}

namespace {
template <int (*Fn)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t)>
MpFloat unary(const MpFloat& a) {
  MpFloat r(a.precision());
  Fn(r.get(), a.get(), MPFR_RNDN);
  return r;
}
}  // namespace

MpFloat sin(const MpFloat& a) { return unary<mpfr_sin>(a); }
MpFloat cos(const MpFloat& a) { return unary<mpfr_cos>(a); }
MpFloat tan(const MpFloat& a) { return unary<mpfr_tan>(a); }
MpFloat exp(const MpFloat& a) { return unary<mpfr_exp>(a); }
MpFloat abs(const MpFloat& a) { return unary<mpfr_abs>(a); }
MpFloat reciprocal(const MpFloat& a) {
  MpFloat r(a.precision());
  mpfr_ui_div(r.get(), 1, a.get(), MPFR_RNDN);
  return r;
}

int decimal_digits(mpfr_prec_t bits) {
  return static_cast<int>(std::ceil(static_cast<double>(bits) * std::log10(2.0))) + 2;
}

}  // namespace warp_harmonic::detail
