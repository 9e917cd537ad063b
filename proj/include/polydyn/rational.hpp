// Exact scalar types: dyadic rationals (pixel coordinates, potential
// ladders) and angles in R/Z with base-2/base-3 digit views.
#pragma once

#include "polydyn/ball.hpp"

#include <gmpxx.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace polydyn {

// value = mantissa * 2^exponent, mantissa odd or zero (canonical form).
class Dyadic {
 public:
  Dyadic() : man_(0), exp_(0) {}
  Dyadic(long m) : man_(m), exp_(0) { canonicalize(); }
  Dyadic(mpz_class m, long e) : man_(std::move(m)), exp_(e) { canonicalize(); }

  static Dyadic pow2(long e) { return Dyadic(mpz_class(1), e); }
  // Exact value of a finite double (doubles are dyadic).
  static Dyadic from_double(double d) {
    if (d == 0.0) return Dyadic();
    int e = 0;
    double f = std::frexp(d, &e);           // f in [0.5, 1)
    double m = std::ldexp(f, 53);           // 53-bit integer, exact
    return Dyadic(mpz_class(static_cast<long>(m)), e - 53);
  }

  const mpz_class& mantissa() const { return man_; }
  long exponent() const { return exp_; }
  bool is_zero() const { return man_ == 0; }
  int sgn() const { return mpz_sgn(man_.get_mpz_t()); }

  Dyadic operator-() const { return Dyadic(-man_, exp_); }
  Dyadic operator+(const Dyadic& o) const {
    long e = std::min(exp_, o.exp_);
    mpz_class a = man_ << static_cast<unsigned long>(exp_ - e);
    mpz_class b = o.man_ << static_cast<unsigned long>(o.exp_ - e);
    return Dyadic(a + b, e);
  }
  Dyadic operator-(const Dyadic& o) const { return *this + (-o); }
  Dyadic operator*(const Dyadic& o) const { return Dyadic(man_ * o.man_, exp_ + o.exp_); }
  Dyadic mul_int(const mpz_class& k) const { return Dyadic(man_ * k, exp_); }
  Dyadic half() const { return Dyadic(man_, exp_ - 1); }
  Dyadic scale2(long k) const { return Dyadic(man_, exp_ + k); }

  bool operator==(const Dyadic& o) const { return man_ == o.man_ && exp_ == o.exp_; }
  bool operator<(const Dyadic& o) const { return (*this - o).sgn() < 0; }
  bool operator<=(const Dyadic& o) const { return (*this - o).sgn() <= 0; }
  bool operator>(const Dyadic& o) const { return o < *this; }
  bool operator>=(const Dyadic& o) const { return o <= *this; }

  mpq_class to_mpq() const {
    mpq_class q(man_);
    if (exp_ >= 0)
      q <<= static_cast<unsigned long>(exp_);
    else
      q /= mpq_class(mpz_class(1) << static_cast<unsigned long>(-exp_));
    return q;
  }
  double to_double() const { return to_mpq().get_d(); }

  std::string str() const {
    return man_.get_str() + (exp_ ? ("*2^" + std::to_string(exp_)) : "");
  }

 private:
  void canonicalize() {
    if (man_ == 0) {
      exp_ = 0;
      return;
    }
    unsigned long tz = mpz_scan1(man_.get_mpz_t(), 0);
    if (tz > 0) {
      man_ >>= tz;
      exp_ += static_cast<long>(tz);
    }
  }
  mpz_class man_;
  long exp_;
};

// ------------------------------------------------------------ conversion ----
template <class S>
RBall<S> rball_from_mpq(const mpq_class& q, long p) {
  if constexpr (S::arbitrary_precision) {
    typename S::Real c(S::clamp_prec(p));
    int inexact = mpfr_set_q(c.raw(), q.get_mpq_t(), MPFR_RNDN);
    typename S::Real r = inexact ? ulp_err<S>(c, p) : S::zero(kRadPrec);
    return {std::move(c), std::move(r)};
  } else {
    double d = q.get_d();
    if (!std::isfinite(d)) return RBall<S>::indeterminate();
    double inf = std::numeric_limits<double>::infinity();
    double rad = std::max(std::nextafter(d, inf) - d, d - std::nextafter(d, -inf));
    if (mpq_class(d) == q) rad = 0.0;
    return {d, rad};
  }
}

template <class S>
RBall<S> rball_from_dyadic(const Dyadic& d, long p) {
  return rball_from_mpq<S>(d.to_mpq(), p);
}

template <class S>
CBall<S> cball_from_mpq(const mpq_class& x, const mpq_class& y, long p) {
  RBall<S> bx = rball_from_mpq<S>(x, p), by = rball_from_mpq<S>(y, p);
  return {bx.c, by.c, rad_add<S>(bx.r, by.r)};
}

// -------------------------------------------------------------- angles ----
// Exact angle in R/Z, stored as a reduced rational in [0,1).
class Angle {
 public:
  Angle() : q_(0) {}
  explicit Angle(mpq_class q) : q_(std::move(q)) { normalize(); }
  Angle(long num, long den) : q_(mpq_class(num, den)) { normalize(); }

  static Angle parse(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Angle(mpq_class(mpz_class(s)));
    mpz_class n(s.substr(0, slash)), d(s.substr(slash + 1));
    if (d == 0) throw std::invalid_argument("angle with zero denominator");
    return Angle(mpq_class(n) / mpq_class(d));
  }

  const mpq_class& value() const { return q_; }
  const mpz_class num() const { return q_.get_num(); }
  const mpz_class den() const { return q_.get_den(); }
  bool is_zero() const { return q_ == 0; }

  Angle operator+(const Angle& o) const { return Angle(q_ + o.q_); }
  Angle operator-(const Angle& o) const { return Angle(q_ - o.q_); }
  Angle times(long k) const { return Angle(q_ * k); }
  // (t + k)/d, the k-th d-th-root preimage under angle multiplication.
  Angle preimage(long k, long d) const { return Angle((q_ + k) / d); }
  Angle div3_shift(const mpq_class& base, long pow3) const {  // base + t/3^pow
    mpq_class p3(1);
    for (long i = 0; i < pow3; ++i) p3 *= 3;
    return Angle(base + q_ / p3);
  }

  bool operator==(const Angle& o) const { return q_ == o.q_; }
  bool operator<(const Angle& o) const { return q_ < o.q_; }

  bool is_dyadic() const {
    mpz_class d = q_.get_den();
    return mpz_scan1(d.get_mpz_t(), 0) == mpz_sizeinbase(d.get_mpz_t(), 2) - 1;
  }

  // Distance in R/Z to another angle, as exact rational in [0, 1/2].
  mpq_class circle_dist(const Angle& o) const {
    mpq_class d = q_ - o.q_;
    if (d < 0) d = -d;
    if (d > mpq_class(1, 2)) d = 1 - d;
    return d;
  }

  template <class S>
  RBall<S> ball(long p) const {
    return rball_from_mpq<S>(q_, p);
  }

  double to_double() const { return q_.get_d(); }
  std::string str() const { return q_.get_str(); }

 private:
  void normalize() {
    q_.canonicalize();
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), q_.get_num().get_mpz_t(), q_.get_den().get_mpz_t());
    q_ -= mpq_class(fl);
    q_.canonicalize();
  }
  mpq_class q_;
};

// Eventually periodic base-b expansion of t in [0,1): digits = prefix then
// repeating cycle (empty cycle means the expansion terminates).
struct DigitExpansion {
  std::vector<int> prefix;
  std::vector<int> cycle;
};

inline DigitExpansion digit_expansion(const Angle& t, int base) {
  DigitExpansion out;
  std::vector<mpq_class> seen;
  mpq_class x = t.value();
  for (;;) {
    if (x == 0) return out;  // terminating
    for (size_t i = 0; i < seen.size(); ++i) {
      if (seen[i] == x) {
        out.cycle.assign(out.prefix.begin() + static_cast<long>(i), out.prefix.end());
        out.prefix.resize(i);
        return out;
      }
    }
    seen.push_back(x);
    x *= base;
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), x.get_num().get_mpz_t(), x.get_den().get_mpz_t());
    out.prefix.push_back(static_cast<int>(fl.get_si()));
    x -= mpq_class(fl);
    x.canonicalize();
  }
}

// Value of a digit expansion in base b, exact.
inline mpq_class digits_value(const DigitExpansion& e, int base) {
  mpq_class acc = 0, scale = 1;
  for (int d : e.prefix) {
    scale /= base;
    acc += d * scale;
  }
  if (!e.cycle.empty()) {
    mpq_class cval = 0, cscale = 1, p = 1;
    for (int d : e.cycle) {
      cscale /= base;
      cval += d * cscale;
      p *= base;
    }
    acc += scale * cval / (1 - mpq_class(1) / p);
  }
  return acc;
}

// TRUE iff the whole forward orbit of t under multiplication by 3 stays in
// [0, 1/2] mod 1 (endpoints included). Rational input makes the orbit finite.
inline bool theta_member(const Angle& t) {
  std::vector<mpq_class> seen;
  mpq_class half(1, 2);
  Angle x = t;
  for (;;) {
    if (x.value() > half) return false;
    for (const auto& s : seen)
      if (s == x.value()) return true;
    seen.push_back(x.value());
    x = x.times(3);
  }
}

// Reads the binary expansion of t as a base-3 number: sum eps_i 2^-i maps to
// sum eps_i 3^-i. Output lies in the forward-invariant Cantor set Theta.
inline Angle theta_embed(const Angle& t) {
  DigitExpansion e = digit_expansion(t, 2);
  return Angle(digits_value(e, 3));
}

// Wake combinatorics attached to a dyadic angle (2p+1)/2^k.
struct WakeAngles {
  Angle theta;        // the dyadic input
  long k = 0;         // dyadic level
  Angle minus, plus;  // wake boundary pair: plus = minus + 1/(2*3^k)
  Angle ray_minus, ray_plus;  // parameter ray angles minus/3, plus/3
};

inline WakeAngles wake_angles(const Angle& theta) {
  if (!theta.is_dyadic() || theta.is_zero())
    throw std::invalid_argument("wake_angles requires a dyadic angle (2p+1)/2^k in (0,1)");
  WakeAngles w;
  w.theta = theta;
  DigitExpansion e = digit_expansion(theta, 2);
  w.k = static_cast<long>(e.prefix.size());
  mpq_class acc = 0, scale = 1;
  for (int d : e.prefix) {
    scale /= 3;
    acc += (d + 1) * scale;  // digit weights (eps_i + 1) 3^-i
  }
  w.minus = Angle(acc);
  w.plus = Angle(acc + scale / 2);  // + 1/(2*3^k)
  w.ray_minus = Angle(w.minus.value() / 3);
  w.ray_plus = Angle(w.plus.value() / 3);
  return w;
}

}  // namespace polydyn
