// Scalar backends for ball arithmetic: an arbitrary-precision MPFR wrapper
// and a plain double fallback, both exposing directed-rounding primitives.
#pragma once

#include <mpfr.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>

namespace polydyn {

enum class Rnd { N, U, D };  // to nearest, toward +inf, toward -inf

inline mpfr_rnd_t to_mpfr(Rnd r) {
  switch (r) {
    case Rnd::U: return MPFR_RNDU;
    case Rnd::D: return MPFR_RNDD;
    default: return MPFR_RNDN;
  }
}

// RAII value type over mpfr_t. Precision is a property of the value;
// operations write into a result created at the caller's precision.
class MpfrReal {
 public:
  explicit MpfrReal(mpfr_prec_t prec = 64) {
    mpfr_init2(v_, prec);
    mpfr_set_zero(v_, 1);
  }
  MpfrReal(const MpfrReal& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  MpfrReal(MpfrReal&& o) noexcept {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
  }
  MpfrReal& operator=(const MpfrReal& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  MpfrReal& operator=(MpfrReal&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~MpfrReal() { mpfr_clear(v_); }

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }
  mpfr_prec_t prec() const { return mpfr_get_prec(v_); }

  double to_double(Rnd r = Rnd::N) const { return mpfr_get_d(v_, to_mpfr(r)); }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  int sgn() const { return mpfr_sgn(v_); }

 private:
  mpfr_t v_;
};

// Arbitrary-precision backend. All static ops take an explicit target
// precision and rounding mode; soundness of the ball layer depends on mpfr's
// correctly rounded semantics (error <= 1/2 ulp for RNDN, directed otherwise).
struct MpfrScalar {
  using Real = MpfrReal;
  static constexpr bool arbitrary_precision = true;

  static long clamp_prec(long p) { return p < MPFR_PREC_MIN ? MPFR_PREC_MIN : p; }

  static Real zero(long prec) { return Real(clamp_prec(prec)); }
  static Real from_double(double d, long prec) {
    Real r(clamp_prec(prec));
    mpfr_set_d(r.raw(), d, MPFR_RNDN);  // doubles embed exactly for prec >= 53
    return r;
  }
  static Real from_si(long s, long prec) {
    Real r(clamp_prec(prec));
    mpfr_set_si(r.raw(), s, MPFR_RNDN);
    return r;
  }

  // The optional out-parameter reports whether the rounded result is exact.
#define POLYDYN_MPFR_UN(name, fn)                                             \
  static Real name(const Real& a, long prec, Rnd rnd, bool* exact = nullptr) { \
    Real r(clamp_prec(prec));                                                 \
    int t = fn(r.raw(), a.raw(), to_mpfr(rnd));                               \
    if (exact) *exact = (t == 0);                                             \
    return r;                                                                 \
  }
#define POLYDYN_MPFR_BIN(name, fn)                                            \
  static Real name(const Real& a, const Real& b, long prec, Rnd rnd,          \
                   bool* exact = nullptr) {                                   \
    Real r(clamp_prec(prec));                                                 \
    int t = fn(r.raw(), a.raw(), b.raw(), to_mpfr(rnd));                      \
    if (exact) *exact = (t == 0);                                             \
    return r;                                                                 \
  }

  POLYDYN_MPFR_BIN(add, mpfr_add)
  POLYDYN_MPFR_BIN(sub, mpfr_sub)
  POLYDYN_MPFR_BIN(mul, mpfr_mul)
  POLYDYN_MPFR_BIN(div, mpfr_div)
  POLYDYN_MPFR_BIN(hypot, mpfr_hypot)
  POLYDYN_MPFR_BIN(atan2, mpfr_atan2)
  POLYDYN_MPFR_BIN(pow, mpfr_pow)
  POLYDYN_MPFR_UN(sqrt, mpfr_sqrt)
  POLYDYN_MPFR_UN(log, mpfr_log)
  POLYDYN_MPFR_UN(log1p, mpfr_log1p)
  POLYDYN_MPFR_UN(exp, mpfr_exp)
  POLYDYN_MPFR_UN(expm1, mpfr_expm1)
  POLYDYN_MPFR_UN(sin, mpfr_sin)
  POLYDYN_MPFR_UN(cos, mpfr_cos)
  POLYDYN_MPFR_UN(neg, mpfr_neg)
  POLYDYN_MPFR_UN(abs, mpfr_abs)
#undef POLYDYN_MPFR_UN
#undef POLYDYN_MPFR_BIN

  static Real mul_2si(const Real& a, long e, long prec, Rnd rnd, bool* exact = nullptr) {
    Real r(clamp_prec(prec));
    int t = mpfr_mul_2si(r.raw(), a.raw(), e, to_mpfr(rnd));
    if (exact) *exact = (t == 0);
    return r;
  }
  static Real pow_si(const Real& a, long e, long prec, Rnd rnd) {
    Real r(clamp_prec(prec));
    mpfr_pow_si(r.raw(), a.raw(), e, to_mpfr(rnd));
    return r;
  }
  static Real pi(long prec, Rnd rnd) {
    Real r(clamp_prec(prec));
    mpfr_const_pi(r.raw(), to_mpfr(rnd));
    return r;
  }
  // a*b + c*d and a*b - c*d with a single rounding, for complex products.
  static Real fmma(const Real& a, const Real& b, const Real& c, const Real& d,
                   long prec, Rnd rnd, bool* exact = nullptr) {
    Real r(clamp_prec(prec));
    int t = mpfr_fmma(r.raw(), a.raw(), b.raw(), c.raw(), d.raw(), to_mpfr(rnd));
    if (exact) *exact = (t == 0);
    return r;
  }
  static Real fmms(const Real& a, const Real& b, const Real& c, const Real& d,
                   long prec, Rnd rnd, bool* exact = nullptr) {
    Real r(clamp_prec(prec));
    int t = mpfr_fmms(r.raw(), a.raw(), b.raw(), c.raw(), d.raw(), to_mpfr(rnd));
    if (exact) *exact = (t == 0);
    return r;
  }

  static int cmp(const Real& a, const Real& b) { return mpfr_cmp(a.raw(), b.raw()); }
  static int sgn(const Real& a) { return mpfr_sgn(a.raw()); }
  static long prec_of(const Real& a) { return a.prec(); }
  static bool is_finite(const Real& a) { return a.is_finite(); }
  static bool is_zero(const Real& a) { return a.is_zero(); }
  static double to_double(const Real& a, Rnd rnd = Rnd::N) { return a.to_double(rnd); }
  static Real inf() {
    Real r(MPFR_PREC_MIN);
    mpfr_set_inf(r.raw(), 1);
    return r;
  }
  static long exponent_of(const Real& a) {
    if (a.is_zero() || !a.is_finite()) return 0;
    return static_cast<long>(mpfr_get_exp(a.raw()));
  }
  static std::string to_string(const Real& a, int digits = 17) {
    char buf[64];
    mpfr_snprintf(buf, sizeof buf, "%.*Rg", digits, a.raw());
    return buf;
  }
};

// Fixed-precision backend for throughput-bound callers (the renderer).
// Directed rounding is emulated by ulp bumps after each libm call; bumps are
// two ulps for transcendental functions, whose libm error can exceed 1/2 ulp.
struct DoubleScalar {
  using Real = double;
  static constexpr bool arbitrary_precision = false;

  static long clamp_prec(long) { return 52; }

  static double bump(double x, Rnd rnd, int ulps) {
    if (rnd == Rnd::N || !std::isfinite(x)) return x;
    double limit = rnd == Rnd::U ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
    for (int i = 0; i < ulps; ++i) x = std::nextafter(x, limit);
    return x;
  }

  static Real zero(long) { return 0.0; }
  static Real from_double(double d, long) { return d; }
  static Real from_si(long s, long) { return static_cast<double>(s); }

  static void put(bool* exact, bool v) {
    if (exact) *exact = v;
  }

  static Real add(Real a, Real b, long, Rnd r, bool* exact = nullptr) {
    double s = a + b;
    if (exact) {  // 2Sum error term
      double bp = s - a;
      *exact = std::isfinite(s) && (a - (s - bp)) + (b - bp) == 0.0;
    }
    return bump(s, r, 1);
  }
  static Real sub(Real a, Real b, long p, Rnd r, bool* exact = nullptr) {
    return add(a, -b, p, r, exact);
  }
  static Real mul(Real a, Real b, long, Rnd r, bool* exact = nullptr) {
    double s = a * b;
    put(exact, std::isfinite(s) && std::fma(a, b, -s) == 0.0);
    return bump(s, r, 1);
  }
  static Real div(Real a, Real b, long, Rnd r, bool* exact = nullptr) {
    double q = a / b;
    put(exact, std::isfinite(q) && std::fma(q, b, -a) == 0.0);
    return bump(q, r, 1);
  }
  static Real sqrt(Real a, long, Rnd r, bool* exact = nullptr) {
    double s = std::sqrt(a);
    put(exact, std::isfinite(s) && std::fma(s, s, -a) == 0.0);
    return bump(s, r, 1);
  }
  static Real hypot(Real a, Real b, long, Rnd r, bool* exact = nullptr) {
    put(exact, b == 0.0 || a == 0.0 ? true : false);
    if (b == 0.0) return bump(std::fabs(a), r, 0);
    if (a == 0.0) return bump(std::fabs(b), r, 0);
    return bump(std::hypot(a, b), r, 2);
  }
  static Real atan2(Real a, Real b, long, Rnd r, bool* exact = nullptr) {
    put(exact, a == 0.0 && b > 0.0);
    return bump(std::atan2(a, b), r, 2);
  }
  static Real pow(Real a, Real b, long, Rnd r, bool* exact = nullptr) {
    put(exact, false);
    return bump(std::pow(a, b), r, 2);
  }
  static Real log(Real a, long, Rnd r, bool* exact = nullptr) {
    put(exact, a == 1.0);
    return bump(std::log(a), r, 2);
  }
  static Real log1p(Real a, long, Rnd r, bool* exact = nullptr) {
    put(exact, a == 0.0);
    return bump(std::log1p(a), r, 2);
  }
  static Real exp(Real a, long, Rnd r, bool* exact = nullptr) {
    put(exact, a == 0.0);
    return bump(std::exp(a), r, 2);
  }
  static Real expm1(Real a, long, Rnd r, bool* exact = nullptr) {
    put(exact, a == 0.0);
    return bump(std::expm1(a), r, 2);
  }
  static Real sin(Real a, long, Rnd r, bool* exact = nullptr) {
    put(exact, a == 0.0);
    return bump(std::sin(a), r, 2);
  }
  static Real cos(Real a, long, Rnd r, bool* exact = nullptr) {
    put(exact, a == 0.0);
    return bump(std::cos(a), r, 2);
  }
  static Real neg(Real a, long, Rnd, bool* exact = nullptr) {
    put(exact, true);
    return -a;
  }
  static Real abs(Real a, long, Rnd, bool* exact = nullptr) {
    put(exact, true);
    return std::fabs(a);
  }
  static Real mul_2si(Real a, long e, long, Rnd r, bool* exact = nullptr) {
    double s = std::ldexp(a, static_cast<int>(e));
    bool ex = std::isfinite(s) && std::ldexp(s, static_cast<int>(-e)) == a;
    put(exact, ex);
    return ex ? s : bump(s, r, 1);
  }
  static Real pow_si(Real a, long e, long, Rnd r) {
    return bump(std::pow(a, static_cast<double>(e)), r, 2);
  }
  static Real pi(long, Rnd r) { return bump(3.14159265358979323846, r, 1); }
  static Real fmma(Real a, Real b, Real c, Real d, long, Rnd r, bool* exact = nullptr) {
    double s = a * b + c * d;
    if (exact) {
      if (a == 0.0 || b == 0.0)
        *exact = std::isfinite(s) && std::fma(c, d, -s) == 0.0;
      else if (c == 0.0 || d == 0.0)
        *exact = std::isfinite(s) && std::fma(a, b, -s) == 0.0;
      else
        *exact = false;
    }
    return bump(s, r, 2);
  }
  static Real fmms(Real a, Real b, Real c, Real d, long, Rnd r, bool* exact = nullptr) {
    double s = a * b - c * d;
    if (exact) {
      if (c == 0.0 || d == 0.0)
        *exact = std::isfinite(s) && std::fma(a, b, -s) == 0.0;
      else if (a == 0.0 || b == 0.0)
        *exact = std::isfinite(s) && std::fma(c, d, s) == 0.0;
      else
        *exact = false;
    }
    return bump(s, r, 2);
  }

  static int cmp(Real a, Real b) { return a < b ? -1 : (a > b ? 1 : 0); }
  static int sgn(Real a) { return a < 0 ? -1 : (a > 0 ? 1 : 0); }
  static long prec_of(Real) { return 52; }
  static bool is_finite(Real a) { return std::isfinite(a); }
  static bool is_zero(Real a) { return a == 0.0; }
  static double to_double(Real a, Rnd = Rnd::N) { return a; }
  static Real inf() { return std::numeric_limits<double>::infinity(); }
  static long exponent_of(Real a) {
    if (a == 0.0 || !std::isfinite(a)) return 0;
    int e = 0;
    std::frexp(a, &e);
    return e;
  }
  static std::string to_string(Real a, int = 17) { return std::to_string(a); }
};

}  // namespace polydyn
