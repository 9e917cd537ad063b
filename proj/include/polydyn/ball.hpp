// Complex and real ball arithmetic with guaranteed containment: every
// operation returns a ball that contains the exact image of every point of
// its input balls. Centers are rounded to the working precision; radii are
// propagated with upward rounding and include the center rounding error.
//
// Radii are handled at a few bits above the working precision and each op
// inflates its radius by a relative 2^(6-p). Containment only gains from the
// inflation, and it makes refinement monotone: recomputing the same op at a
// doubled working precision never enlarges the returned radius.
#pragma once

#include "polydyn/scalar.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace polydyn {

inline constexpr long kRadPrec = 32;

inline long rad_prec(long p) { return std::max(kRadPrec, std::min(p, 4096L) + 8); }

// ---------------------------------------------------------------- radii ----
// Radius helpers: nonnegative magnitudes, always rounded up.
template <class S>
typename S::Real rad_add(const typename S::Real& a, const typename S::Real& b,
                         long rp = kRadPrec) {
  return S::add(a, b, rp, Rnd::U);
}
template <class S>
typename S::Real rad_mul(const typename S::Real& a, const typename S::Real& b,
                         long rp = kRadPrec) {
  return S::mul(a, b, rp, Rnd::U);
}
template <class S>
typename S::Real rad_div(const typename S::Real& a, const typename S::Real& b,
                         long rp = kRadPrec) {
  return S::div(a, b, rp, Rnd::U);
}
template <class S>
typename S::Real rad_max(const typename S::Real& a, const typename S::Real& b) {
  return S::cmp(a, b) >= 0 ? a : b;
}
template <class S>
typename S::Real rad_pow2(long e) {
  return S::mul_2si(S::from_si(1, kRadPrec), e, kRadPrec, Rnd::U);
}

// Bound on the rounding error of a center component computed at precision p
// with round-to-nearest: |fl(x) - x| <= |fl(x)| 2^-p. One extra bit of slack.
template <class S>
typename S::Real ulp_err(const typename S::Real& x, long p, long rp = kRadPrec) {
  if (!S::is_finite(x)) return S::inf();
  return S::mul_2si(S::abs(x, rp, Rnd::U), 1 - S::clamp_prec(p), rp, Rnd::U);
}
template <class S>
typename S::Real ulp_err_if(bool exact, const typename S::Real& x, long p, long rp = kRadPrec) {
  return exact ? S::zero(kRadPrec) : ulp_err<S>(x, p, rp);
}

// Relative inflation 2^(6-p) that makes refinement monotone.
template <class S>
typename S::Real finalize_rad(const typename S::Real& r, long p, long rp) {
  if (S::is_zero(r) || !S::is_finite(r)) return r;
  long shift = 6 - std::min(S::clamp_prec(p), 4096L);
  return S::add(r, S::mul_2si(r, shift, rp, Rnd::U), rp, Rnd::U);
}

// ------------------------------------------------------------- real ball ----
template <class S>
struct RBall {
  using Real = typename S::Real;
  Real c;  // center
  Real r;  // radius >= 0; +inf marks an indeterminate result

  RBall() : c(S::zero(kRadPrec)), r(S::zero(kRadPrec)) {}
  RBall(Real center, Real radius) : c(std::move(center)), r(std::move(radius)) {}

  bool is_valid() const { return S::is_finite(c) && S::is_finite(r); }
  bool is_exact() const { return S::is_zero(r); }
  static RBall indeterminate() {
    RBall b;
    b.r = S::inf();
    return b;
  }
};

template <class S>
RBall<S> rball_from_double(double d, long p) {
  return {S::from_double(d, S::clamp_prec(std::max(p, 53L))), S::zero(kRadPrec)};
}
template <class S>
RBall<S> rball_from_si(long v, long p) {
  return {S::from_si(v, p), S::zero(kRadPrec)};
}

template <class S>
typename S::Real rball_upper(const RBall<S>& a, long p = kRadPrec) {
  return S::add(a.c, a.r, p, Rnd::U);
}
template <class S>
typename S::Real rball_lower(const RBall<S>& a, long p = kRadPrec) {
  return S::sub(a.c, a.r, p, Rnd::D);
}

template <class S>
bool rball_certainly_lt(const RBall<S>& a, const RBall<S>& b, long p = kRadPrec) {
  if (!a.is_valid() || !b.is_valid()) return false;
  return S::cmp(rball_upper(a, p), rball_lower(b, p)) < 0;
}
template <class S>
bool rball_certainly_gt(const RBall<S>& a, const RBall<S>& b, long p = kRadPrec) {
  return rball_certainly_lt(b, a, p);
}
template <class S>
bool rball_contains_zero(const RBall<S>& a) {
  if (!a.is_valid()) return true;
  return S::cmp(S::abs(a.c, kRadPrec, Rnd::D), a.r) <= 0;
}
// Certified containment of interval b inside interval a.
template <class S>
bool rball_contains(const RBall<S>& a, const RBall<S>& b, long p = kRadPrec) {
  if (!a.is_valid()) return true;
  if (!b.is_valid()) return false;
  typename S::Real d1 = S::abs(S::sub(a.c, b.c, p, Rnd::U), p, Rnd::U);
  typename S::Real d2 = S::abs(S::sub(b.c, a.c, p, Rnd::U), p, Rnd::U);
  return S::cmp(rad_add<S>(rad_max<S>(d1, d2), b.r, p), a.r) <= 0;
}

template <class S>
RBall<S> radd(const RBall<S>& a, const RBall<S>& b, long p) {
  long rp = rad_prec(p);
  bool ex = false;
  typename S::Real c = S::add(a.c, b.c, p, Rnd::N, &ex);
  typename S::Real r = rad_add<S>(rad_add<S>(a.r, b.r, rp), ulp_err_if<S>(ex, c, p, rp), rp);
  return {std::move(c), finalize_rad<S>(r, p, rp)};
}
template <class S>
RBall<S> rsub(const RBall<S>& a, const RBall<S>& b, long p) {
  long rp = rad_prec(p);
  bool ex = false;
  typename S::Real c = S::sub(a.c, b.c, p, Rnd::N, &ex);
  typename S::Real r = rad_add<S>(rad_add<S>(a.r, b.r, rp), ulp_err_if<S>(ex, c, p, rp), rp);
  return {std::move(c), finalize_rad<S>(r, p, rp)};
}
template <class S>
RBall<S> rneg(const RBall<S>& a) {
  return {S::neg(a.c, S::prec_of(a.c), Rnd::N), a.r};  // exact
}
template <class S>
RBall<S> rabs(const RBall<S>& a) {
  return {S::abs(a.c, S::prec_of(a.c), Rnd::N), a.r};  // still contains |x|
}

template <class S>
RBall<S> rmul(const RBall<S>& a, const RBall<S>& b, long p) {
  long rp = rad_prec(p);
  bool ex = false;
  typename S::Real c = S::mul(a.c, b.c, p, Rnd::N, &ex);
  typename S::Real ma = S::abs(a.c, rp, Rnd::U);
  typename S::Real mb = S::abs(b.c, rp, Rnd::U);
  typename S::Real r = rad_add<S>(rad_mul<S>(ma, b.r, rp), rad_mul<S>(mb, a.r, rp), rp);
  r = rad_add<S>(r, rad_mul<S>(a.r, b.r, rp), rp);
  r = rad_add<S>(r, ulp_err_if<S>(ex, c, p, rp), rp);
  return {std::move(c), finalize_rad<S>(r, p, rp)};
}

template <class S>
RBall<S> rscale_2si(const RBall<S>& a, long e) {
  bool ex = false;
  typename S::Real c = S::mul_2si(a.c, e, S::prec_of(a.c), Rnd::N, &ex);
  typename S::Real r = S::mul_2si(a.r, e, kRadPrec, Rnd::U);
  if (!ex) r = rad_add<S>(r, ulp_err<S>(c, S::prec_of(a.c)));
  return {std::move(c), std::move(r)};
}

template <class S>
RBall<S> rdiv(const RBall<S>& a, const RBall<S>& b, long p) {
  long rp = rad_prec(p);
  typename S::Real lb = S::sub(S::abs(b.c, rp, Rnd::D), b.r, rp, Rnd::D);
  if (S::sgn(lb) <= 0) return RBall<S>::indeterminate();
  bool ex = false;
  typename S::Real c = S::div(a.c, b.c, p, Rnd::N, &ex);
  // |a/w - a.c/b.c| <= r_a/|w| + |a.c| r_b/(|b.c||w|), |w| >= lb
  typename S::Real t1 = rad_div<S>(a.r, lb, rp);
  typename S::Real ma = S::abs(a.c, rp, Rnd::U);
  typename S::Real t2 =
      rad_div<S>(rad_mul<S>(ma, b.r, rp), S::mul(S::abs(b.c, rp, Rnd::D), lb, rp, Rnd::D), rp);
  typename S::Real r = rad_add<S>(rad_add<S>(t1, t2, rp), ulp_err_if<S>(ex, c, p, rp), rp);
  return {std::move(c), finalize_rad<S>(r, p, rp)};
}

template <class S>
RBall<S> rsqrt(const RBall<S>& a, long p) {
  long rp = rad_prec(p);
  typename S::Real lo = S::sub(a.c, a.r, rp, Rnd::D);
  if (S::sgn(lo) <= 0) return RBall<S>::indeterminate();
  bool ex = false;
  typename S::Real c = S::sqrt(a.c, p, Rnd::N, &ex);
  typename S::Real den = S::mul_2si(S::sqrt(lo, rp, Rnd::D), 1, rp, Rnd::D);
  typename S::Real r = rad_add<S>(rad_div<S>(a.r, den, rp), ulp_err_if<S>(ex, c, p, rp), rp);
  return {std::move(c), finalize_rad<S>(r, p, rp)};
}

template <class S>
RBall<S> rlog(const RBall<S>& a, long p) {
  long rp = rad_prec(p);
  typename S::Real lo = S::sub(a.c, a.r, rp, Rnd::D);
  if (S::sgn(lo) <= 0) return RBall<S>::indeterminate();
  bool ex = false;
  typename S::Real c = S::log(a.c, p, Rnd::N, &ex);
  typename S::Real r = rad_add<S>(rad_div<S>(a.r, lo, rp), ulp_err_if<S>(ex, c, p, rp), rp);
  return {std::move(c), finalize_rad<S>(r, p, rp)};
}

template <class S>
RBall<S> rexp(const RBall<S>& a, long p) {
  long rp = rad_prec(p);
  bool ex = false;
  typename S::Real c = S::exp(a.c, p, Rnd::N, &ex);
  if (!S::is_finite(c)) return RBall<S>::indeterminate();
  typename S::Real hi = S::add(a.c, a.r, rp, Rnd::U);
  typename S::Real mag = S::exp(hi, rp, Rnd::U);
  typename S::Real r = rad_add<S>(rad_mul<S>(mag, S::expm1(a.r, rp, Rnd::U), rp),
                                  ulp_err_if<S>(ex, c, p, rp), rp);
  return {std::move(c), finalize_rad<S>(r, p, rp)};
}

template <class S>
RBall<S> rball_hull(const RBall<S>& a, const RBall<S>& b, long p) {
  if (!a.is_valid() || !b.is_valid()) return RBall<S>::indeterminate();
  long rp = rad_prec(p);
  typename S::Real c = S::mul_2si(S::add(a.c, b.c, p, Rnd::N), -1, p, Rnd::N);
  typename S::Real d1 = S::abs(S::sub(a.c, b.c, rp, Rnd::U), rp, Rnd::U);
  typename S::Real d2 = S::abs(S::sub(b.c, a.c, rp, Rnd::U), rp, Rnd::U);
  typename S::Real r = rad_add<S>(S::mul_2si(rad_max<S>(d1, d2), -1, rp, Rnd::U),
                                  rad_max<S>(a.r, b.r), rp);
  r = rad_add<S>(r, ulp_err<S>(c, p, rp), rp);
  return {std::move(c), std::move(r)};
}

// --------------------------------------------------------- complex ball ----
template <class S>
struct CBall {
  using Real = typename S::Real;
  Real re, im;  // center
  Real r;       // radius >= 0; +inf marks an indeterminate result

  CBall() : re(S::zero(kRadPrec)), im(S::zero(kRadPrec)), r(S::zero(kRadPrec)) {}
  CBall(Real x, Real y, Real rad) : re(std::move(x)), im(std::move(y)), r(std::move(rad)) {}

  bool is_valid() const { return S::is_finite(re) && S::is_finite(im) && S::is_finite(r); }
  bool is_exact() const { return S::is_zero(r); }
  static CBall indeterminate() {
    CBall b;
    b.r = S::inf();
    return b;
  }
};

template <class S>
CBall<S> cball_from_double(double x, double y, long p) {
  long q = S::clamp_prec(std::max(p, 53L));
  return {S::from_double(x, q), S::from_double(y, q), S::zero(kRadPrec)};
}
template <class S>
CBall<S> cball_from_real(const RBall<S>& a) {
  return {a.c, S::zero(kRadPrec), a.r};
}
template <class S>
CBall<S> cball_from_parts(const RBall<S>& x, const RBall<S>& y) {
  return {x.c, y.c, rad_add<S>(x.r, y.r, kRadPrec + 32)};
}

template <class S>
typename S::Real mag_ub(const CBall<S>& a, long rp = kRadPrec) {  // upper bound on |center|
  return S::hypot(a.re, a.im, rp, Rnd::U);
}
template <class S>
typename S::Real mag_lb(const CBall<S>& a, long rp = kRadPrec) {  // lower bound on |center|
  return S::hypot(a.re, a.im, rp, Rnd::D);
}
// Lower bound on |w| over the whole disk; negative means 0 may be inside.
template <class S>
typename S::Real disk_mag_lb(const CBall<S>& a, long rp = kRadPrec) {
  return S::sub(mag_lb(a, rp), a.r, rp, Rnd::D);
}
template <class S>
bool contains_zero(const CBall<S>& a) {
  if (!a.is_valid()) return true;
  return S::sgn(disk_mag_lb(a)) <= 0;
}

template <class S>
RBall<S> cabs(const CBall<S>& a, long p) {
  if (!a.is_valid()) return RBall<S>::indeterminate();
  long rp = rad_prec(p);
  bool ex = false;
  typename S::Real c = S::hypot(a.re, a.im, p, Rnd::N, &ex);
  typename S::Real r = rad_add<S>(a.r, ulp_err_if<S>(ex, c, p, rp), rp);
  return {std::move(c), finalize_rad<S>(r, p, rp)};
}

// Real and imaginary parts as real balls.
template <class S>
RBall<S> creal(const CBall<S>& a) {
  return {a.re, a.r};
}
template <class S>
RBall<S> cimag(const CBall<S>& a) {
  return {a.im, a.r};
}

template <class S>
CBall<S> cadd(const CBall<S>& a, const CBall<S>& b, long p) {
  long rp = rad_prec(p);
  bool e1 = false, e2 = false;
  typename S::Real x = S::add(a.re, b.re, p, Rnd::N, &e1);
  typename S::Real y = S::add(a.im, b.im, p, Rnd::N, &e2);
  typename S::Real r = rad_add<S>(a.r, b.r, rp);
  r = rad_add<S>(r, rad_add<S>(ulp_err_if<S>(e1, x, p, rp), ulp_err_if<S>(e2, y, p, rp), rp), rp);
  return {std::move(x), std::move(y), finalize_rad<S>(r, p, rp)};
}
template <class S>
CBall<S> csub(const CBall<S>& a, const CBall<S>& b, long p) {
  long rp = rad_prec(p);
  bool e1 = false, e2 = false;
  typename S::Real x = S::sub(a.re, b.re, p, Rnd::N, &e1);
  typename S::Real y = S::sub(a.im, b.im, p, Rnd::N, &e2);
  typename S::Real r = rad_add<S>(a.r, b.r, rp);
  r = rad_add<S>(r, rad_add<S>(ulp_err_if<S>(e1, x, p, rp), ulp_err_if<S>(e2, y, p, rp), rp), rp);
  return {std::move(x), std::move(y), finalize_rad<S>(r, p, rp)};
}
template <class S>
CBall<S> cneg(const CBall<S>& a) {
  CBall<S> b = a;
  b.re = S::neg(b.re, S::prec_of(b.re), Rnd::N);
  b.im = S::neg(b.im, S::prec_of(b.im), Rnd::N);
  return b;
}
template <class S>
CBall<S> cconj(const CBall<S>& a) {
  CBall<S> b = a;
  b.im = S::neg(b.im, S::prec_of(b.im), Rnd::N);
  return b;
}
template <class S>
CBall<S> cmul_i(const CBall<S>& a) {  // multiply by i, exact
  CBall<S> b;
  b.re = S::neg(a.im, S::prec_of(a.im), Rnd::N);
  b.im = a.re;
  b.r = a.r;
  return b;
}

template <class S>
CBall<S> cmul(const CBall<S>& a, const CBall<S>& b, long p) {
  long rp = rad_prec(p);
  bool e1 = false, e2 = false;
  // fmms/fmma round once per component
  typename S::Real x = S::fmms(a.re, b.re, a.im, b.im, p, Rnd::N, &e1);
  typename S::Real y = S::fmma(a.re, b.im, a.im, b.re, p, Rnd::N, &e2);
  typename S::Real ma = mag_ub(a, rp), mb = mag_ub(b, rp);
  typename S::Real r = rad_add<S>(rad_mul<S>(ma, b.r, rp), rad_mul<S>(mb, a.r, rp), rp);
  r = rad_add<S>(r, rad_mul<S>(a.r, b.r, rp), rp);
  r = rad_add<S>(r, rad_add<S>(ulp_err_if<S>(e1, x, p, rp), ulp_err_if<S>(e2, y, p, rp), rp), rp);
  return {std::move(x), std::move(y), finalize_rad<S>(r, p, rp)};
}

template <class S>
CBall<S> cmul_real(const CBall<S>& a, const RBall<S>& t, long p) {
  long rp = rad_prec(p);
  bool e1 = false, e2 = false;
  typename S::Real x = S::mul(a.re, t.c, p, Rnd::N, &e1);
  typename S::Real y = S::mul(a.im, t.c, p, Rnd::N, &e2);
  typename S::Real ma = mag_ub(a, rp);
  typename S::Real mt = S::abs(t.c, rp, Rnd::U);
  typename S::Real r = rad_add<S>(rad_mul<S>(ma, t.r, rp), rad_mul<S>(mt, a.r, rp), rp);
  r = rad_add<S>(r, rad_mul<S>(a.r, t.r, rp), rp);
  r = rad_add<S>(r, rad_add<S>(ulp_err_if<S>(e1, x, p, rp), ulp_err_if<S>(e2, y, p, rp), rp), rp);
  return {std::move(x), std::move(y), finalize_rad<S>(r, p, rp)};
}

template <class S>
CBall<S> cscale_2si(const CBall<S>& a, long e) {
  bool e1 = false, e2 = false;
  CBall<S> b;
  b.re = S::mul_2si(a.re, e, S::prec_of(a.re), Rnd::N, &e1);
  b.im = S::mul_2si(a.im, e, S::prec_of(a.im), Rnd::N, &e2);
  b.r = S::mul_2si(a.r, e, kRadPrec, Rnd::U);
  if (!e1) b.r = rad_add<S>(b.r, ulp_err<S>(b.re, S::prec_of(a.re)));
  if (!e2) b.r = rad_add<S>(b.r, ulp_err<S>(b.im, S::prec_of(a.im)));
  return b;
}

template <class S>
CBall<S> cinv(const CBall<S>& b, long p) {
  long rp = rad_prec(p);
  typename S::Real lb = disk_mag_lb(b, rp);
  if (!b.is_valid() || S::sgn(lb) <= 0) return CBall<S>::indeterminate();
  typename S::Real den = S::fmma(b.re, b.re, b.im, b.im, p, Rnd::N);
  typename S::Real x = S::div(b.re, den, p, Rnd::N);
  typename S::Real y = S::neg(S::div(b.im, den, p, Rnd::N), p, Rnd::N);
  // |1/w - 1/c| <= r/(|c| |w|) <= r/(|c|_lb * lb)
  typename S::Real r = rad_div<S>(b.r, S::mul(mag_lb(b, rp), lb, rp, Rnd::D), rp);
  // center error: one rounding in den, one in each quotient; 8 ulps cover it
  typename S::Real ce = rad_add<S>(ulp_err<S>(x, p - 2, rp), ulp_err<S>(y, p - 2, rp), rp);
  r = rad_add<S>(r, ce, rp);
  return {std::move(x), std::move(y), finalize_rad<S>(r, p, rp)};
}

template <class S>
CBall<S> cdiv(const CBall<S>& a, const CBall<S>& b, long p) {
  CBall<S> ib = cinv(b, p);
  if (!ib.is_valid()) return CBall<S>::indeterminate();
  return cmul(a, ib, p);
}

// Distance from the center to the branch cut (-inf, 0]; the cut includes 0.
template <class S>
typename S::Real cut_dist_lb(const CBall<S>& a) {
  if (S::sgn(a.re) >= 0) return mag_lb(a);
  return S::abs(a.im, kRadPrec, Rnd::D);
}
template <class S>
bool clear_of_cut(const CBall<S>& a) {
  if (!a.is_valid()) return false;
  return S::cmp(cut_dist_lb(a), a.r) > 0;
}

// Principal square root. Requires the disk to avoid the cut (-inf, 0].
template <class S>
CBall<S> csqrt(const CBall<S>& a, long p) {
  if (!clear_of_cut(a)) return CBall<S>::indeterminate();
  long rp = rad_prec(p);
  typename S::Real x, y;
  bool crisp = false;
  if (S::is_zero(a.im) && S::sgn(a.re) > 0) {
    bool ex = false;  // real positive center: one correctly rounded sqrt
    x = S::sqrt(a.re, p, Rnd::N, &ex);
    y = S::zero(p);
    crisp = ex;
  } else {
    typename S::Real m = S::hypot(a.re, a.im, p, Rnd::N);
    if (S::sgn(a.re) >= 0) {
      typename S::Real u =
          S::sqrt(S::mul_2si(S::add(m, a.re, p, Rnd::N), -1, p, Rnd::N), p, Rnd::N);
      x = u;
      y = S::div(a.im, S::mul_2si(u, 1, p, Rnd::N), p, Rnd::N);
    } else {
      typename S::Real u =
          S::sqrt(S::mul_2si(S::sub(m, a.re, p, Rnd::N), -1, p, Rnd::N), p, Rnd::N);
      x = S::div(S::abs(a.im, p, Rnd::N), S::mul_2si(u, 1, p, Rnd::N), p, Rnd::N);
      y = S::sgn(a.im) >= 0 ? u : S::neg(u, p, Rnd::N);
    }
  }
  // Lipschitz bound over the disk: |(sqrt)'| <= 1/(2 sqrt(|c|-r)).
  typename S::Real lb = disk_mag_lb(a, rp);
  typename S::Real den = S::mul_2si(S::sqrt(lb, rp, Rnd::D), 1, rp, Rnd::D);
  typename S::Real r = rad_div<S>(a.r, den, rp);
  if (!crisp) {
    // center formula accumulates a few roundings: charge ~16 ulps
    r = rad_add<S>(r, rad_add<S>(ulp_err<S>(x, p - 3, rp), ulp_err<S>(y, p - 3, rp), rp), rp);
  }
  return {std::move(x), std::move(y), finalize_rad<S>(r, p, rp)};
}

// Principal log. Requires the disk to avoid the cut (-inf, 0].
template <class S>
CBall<S> clog(const CBall<S>& a, long p) {
  if (!clear_of_cut(a)) return CBall<S>::indeterminate();
  long rp = rad_prec(p);
  typename S::Real m = S::hypot(a.re, a.im, p, Rnd::N);
  typename S::Real x = S::log(m, p, Rnd::N);
  typename S::Real y = S::atan2(a.im, a.re, p, Rnd::N);
  typename S::Real lb = disk_mag_lb(a, rp);
  typename S::Real r = rad_div<S>(a.r, lb, rp);
  // |log(m(1+d)) - log m| <= 2^(1-p); atan2 and log round once more each
  r = rad_add<S>(r, rad_pow2<S>(1 - S::clamp_prec(p)), rp);
  r = rad_add<S>(r, rad_add<S>(ulp_err<S>(x, p - 1, rp), ulp_err<S>(y, p - 1, rp), rp), rp);
  return {std::move(x), std::move(y), finalize_rad<S>(r, p, rp)};
}

// Principal argument as a real ball (same cut requirement as clog).
template <class S>
RBall<S> carg(const CBall<S>& a, long p) {
  if (!clear_of_cut(a)) return RBall<S>::indeterminate();
  long rp = rad_prec(p);
  bool ex = false;
  typename S::Real y = S::atan2(a.im, a.re, p, Rnd::N, &ex);
  typename S::Real r =
      rad_add<S>(rad_div<S>(a.r, disk_mag_lb(a, rp), rp), ulp_err_if<S>(ex, y, p - 1, rp), rp);
  return {std::move(y), finalize_rad<S>(r, p, rp)};
}

template <class S>
CBall<S> cexp(const CBall<S>& a, long p) {
  if (!a.is_valid()) return CBall<S>::indeterminate();
  long rp = rad_prec(p);
  bool e1 = false, e2 = false, e3 = false, e4 = false, e5 = false;
  typename S::Real ex = S::exp(a.re, p, Rnd::N, &e1);
  if (!S::is_finite(ex)) return CBall<S>::indeterminate();
  typename S::Real x = S::mul(ex, S::cos(a.im, p, Rnd::N, &e2), p, Rnd::N, &e3);
  typename S::Real y = S::mul(ex, S::sin(a.im, p, Rnd::N, &e4), p, Rnd::N, &e5);
  bool crisp = e1 && e2 && e3 && e4 && e5;
  typename S::Real mag = S::exp(S::add(a.re, a.r, rp, Rnd::U), rp, Rnd::U);
  typename S::Real r = rad_mul<S>(mag, S::expm1(a.r, rp, Rnd::U), rp);
  if (!crisp) {
    r = rad_add<S>(r, rad_add<S>(ulp_err<S>(x, p - 2, rp), ulp_err<S>(y, p - 2, rp), rp), rp);
    r = rad_add<S>(r, S::mul_2si(mag, 2 - S::clamp_prec(p), rp, Rnd::U), rp);
  }
  return {std::move(x), std::move(y), finalize_rad<S>(r, p, rp)};
}

// Ball enclosing 2*pi.
template <class S>
RBall<S> rball_two_pi(long p) {
  typename S::Real c = S::mul_2si(S::pi(p, Rnd::N), 1, p, Rnd::N);
  return {c, ulp_err<S>(c, p)};
}

// exp(v + 2 pi i t) from real balls v and t.
template <class S>
CBall<S> cexp_polar(const RBall<S>& v, const RBall<S>& t, long p) {
  RBall<S> ang = rmul(rball_two_pi<S>(p), t, p);
  CBall<S> z{v.c, ang.c, rad_add<S>(v.r, ang.r, rad_prec(p))};
  return cexp(z, p);
}

// Integer power by binary exponentiation.
template <class S>
CBall<S> cpow_ui(const CBall<S>& a, unsigned long e, long p) {
  CBall<S> acc = cball_from_double<S>(1.0, 0.0, p);
  CBall<S> base = a;
  while (e) {
    if (e & 1) acc = cmul(acc, base, p);
    e >>= 1;
    if (e) base = cmul(base, base, p);
  }
  return acc;
}

// Principal rational power via exp(q log a); cut conditions from clog.
template <class S>
CBall<S> cpow_rational(const CBall<S>& a, long num, long den, long p) {
  CBall<S> lg = clog(a, p);
  if (!lg.is_valid()) return CBall<S>::indeterminate();
  RBall<S> q = rdiv(rball_from_si<S>(num, p), rball_from_si<S>(den, p), p);
  return cexp(cmul_real(lg, q, p), p);
}

// Upper bound on the distance between the two centers.
template <class S>
typename S::Real center_dist_ub(const CBall<S>& a, const CBall<S>& b, long rp = kRadPrec) {
  typename S::Real dx1 = S::abs(S::sub(a.re, b.re, rp, Rnd::U), rp, Rnd::U);
  typename S::Real dx2 = S::abs(S::sub(b.re, a.re, rp, Rnd::U), rp, Rnd::U);
  typename S::Real dy1 = S::abs(S::sub(a.im, b.im, rp, Rnd::U), rp, Rnd::U);
  typename S::Real dy2 = S::abs(S::sub(b.im, a.im, rp, Rnd::U), rp, Rnd::U);
  return S::hypot(rad_max<S>(dx1, dx2), rad_max<S>(dy1, dy2), rp, Rnd::U);
}

// Certified containment of ball b inside ball a.
template <class S>
bool cball_contains(const CBall<S>& a, const CBall<S>& b) {
  if (!a.is_valid()) return true;
  if (!b.is_valid()) return false;
  typename S::Real need = rad_add<S>(center_dist_ub(a, b), b.r);
  return S::cmp(need, a.r) <= 0;
}
// Certified strict containment in the interior.
template <class S>
bool cball_contains_interior(const CBall<S>& a, const CBall<S>& b) {
  if (!a.is_valid() || !b.is_valid()) return false;
  typename S::Real need = rad_add<S>(center_dist_ub(a, b), b.r);
  return S::cmp(need, a.r) < 0;
}
// Certified disjointness.
template <class S>
bool cball_disjoint(const CBall<S>& a, const CBall<S>& b) {
  if (!a.is_valid() || !b.is_valid()) return false;
  long p = kRadPrec + 64;
  typename S::Real dx = S::sub(a.re, b.re, p, Rnd::N);
  typename S::Real dy = S::sub(a.im, b.im, p, Rnd::N);
  typename S::Real d = S::hypot(dx, dy, kRadPrec, Rnd::D);
  d = S::sub(d, ulp_err<S>(dx, p - 1), kRadPrec, Rnd::D);
  d = S::sub(d, ulp_err<S>(dy, p - 1), kRadPrec, Rnd::D);
  return S::cmp(d, rad_add<S>(a.r, b.r)) > 0;
}

// Smallest reported ball covering both inputs.
template <class S>
CBall<S> cball_hull(const CBall<S>& a, const CBall<S>& b, long p) {
  if (!a.is_valid() || !b.is_valid()) return CBall<S>::indeterminate();
  long rp = rad_prec(p);
  typename S::Real x = S::mul_2si(S::add(a.re, b.re, p, Rnd::N), -1, p, Rnd::N);
  typename S::Real y = S::mul_2si(S::add(a.im, b.im, p, Rnd::N), -1, p, Rnd::N);
  typename S::Real half = S::mul_2si(center_dist_ub(a, b, rp), -1, rp, Rnd::U);
  typename S::Real r = rad_add<S>(half, rad_max<S>(a.r, b.r), rp);
  r = rad_add<S>(r, rad_add<S>(ulp_err<S>(x, p, rp), ulp_err<S>(y, p, rp), rp), rp);
  return {std::move(x), std::move(y), std::move(r)};
}

// Enclosure of { t z : t in [0,1], z in B } (segment hull from the origin).
template <class S>
CBall<S> cball_segment01(const CBall<S>& a) {
  CBall<S> h = cscale_2si(a, -1);
  h.r = rad_add<S>(a.r, S::mul_2si(mag_ub(a), -1, kRadPrec, Rnd::U));
  return h;
}

// Inflate the radius.
template <class S>
CBall<S> cball_widen(const CBall<S>& a, const typename S::Real& extra) {
  CBall<S> b = a;
  b.r = rad_add<S>(b.r, extra);
  return b;
}

template <class S>
std::string cball_str(const CBall<S>& a) {
  return "(" + S::to_string(a.re) + ", " + S::to_string(a.im) + ") +/- " + S::to_string(a.r, 3);
}
template <class S>
std::string rball_str(const RBall<S>& a) {
  return S::to_string(a.c) + " +/- " + S::to_string(a.r, 3);
}

}  // namespace polydyn
