// Green's function of the filled Julia set with a certified truncation
// error: G(z) = (1/d^m) log|f^m(z)| plus a tail controlled by the orbit's
// actual distance from the escape radius.
#pragma once

#include "polydyn/poly.hpp"

#include <string>

namespace polydyn {

template <class S>
struct GreenValue {
  RBall<S> value;  // G_f(z) >= 0
  long level = 0;  // iterate count m backing the logarithm term
};

namespace detail {

// Upper bound on the tail sum_{n>=m} d^{-(n+1)} |log(1+a_n)| given a lower
// bound W on |f^m(z)|: |a_n| <= C/W along the rest of the orbit and the terms
// sum to at most -log(1-C/W) / (d^m (d-1)).
template <class S>
typename S::Real green_tail_bound(const typename S::Real& coeff_sum, const typename S::Real& W,
                                  long d, long m, long rp) {
  typename S::Real mu = S::div(coeff_sum, W, rp, Rnd::U);
  if (S::sgn(mu) == 0) return S::zero(kRadPrec);
  typename S::Real one = S::from_si(1, rp);
  typename S::Real om = S::sub(one, mu, rp, Rnd::D);
  if (S::sgn(om) <= 0) return S::inf();
  typename S::Real L = S::neg(S::log(om, rp, Rnd::D), rp, Rnd::U);
  // d^m (d-1) in the denominator; m can be large, go through pow_si
  typename S::Real dm = S::pow_si(S::from_si(d, rp), -m, rp, Rnd::U);
  typename S::Real t = S::mul(L, dm, rp, Rnd::U);
  return S::div(t, S::from_si(d - 1, rp), rp, Rnd::U);
}

}  // namespace detail

// The paper's worst-case two-sided window for G - (1/d^k) log|f^k(z)| at an
// escape level k: [log(3/4), log(5/4)] / (d^k (d-1)). Used by property tests.
template <class S>
RBall<S> green_paper_window(long d, long k, long p = 64) {
  RBall<S> lo = rlog(rdiv(rball_from_si<S>(3, p), rball_from_si<S>(4, p), p), p);
  RBall<S> hi = rlog(rdiv(rball_from_si<S>(5, p), rball_from_si<S>(4, p), p), p);
  RBall<S> dk{S::pow_si(S::from_si(d, p), -k, p, Rnd::N), S::zero(kRadPrec)};
  dk.r = ulp_err<S>(dk.c, p);
  RBall<S> scale = rdiv(dk, rball_from_si<S>(d - 1, p), p);
  RBall<S> a = rmul(scale, lo, p);
  RBall<S> b = rmul(scale, hi, p);
  RBall<S> mid = rscale_2si(radd(a, b, p), -1);
  mid.r = rad_add<S>(mid.r, rball_upper(rscale_2si(rsub(b, a, p), -1)));
  return mid;  // ball over the interval [lo,hi]/(d^k(d-1))
}

struct GreenOptions {
  long max_iter = 4096;
  long start_bits = 64;
  long max_bits = 1 << 14;
};

// G_f(z) with radius <= 2^-out_bits, or "unresolved" when the orbit is not
// certified escaping within the cap (z may be in or near K(f)).
template <class S>
Result<GreenValue<S>> green(const MonicPoly<S>& f, const CBall<S>& z, long out_bits,
                            GreenOptions opt = {}) {
  typename S::Real R = escape_radius(f);
  typename S::Real C = coeff_sum_ub(f);
  long d = f.degree;
  bool precision_limited = false;
  for (long p = S::clamp_prec(std::max(opt.start_bits, out_bits + 16));; p *= 2) {
    long rp = rad_prec(p);
    CBall<S> w = z;
    long k = -1;
    precision_limited = false;
    for (long i = 0; i <= opt.max_iter; ++i) {
      if (!w.is_valid()) {
        precision_limited = true;
        break;
      }
      if (S::cmp(disk_mag_lb(w), R) > 0) {
        k = i;
        break;
      }
      // a wide enclosure can hide an escape: remember to retry at higher bits
      if (S::cmp(w.r, S::mul_2si(rad_max<S>(S::from_si(1, kRadPrec), mag_ub(w)), -8, kRadPrec,
                                 Rnd::U)) > 0)
        precision_limited = true;
      if (i < opt.max_iter) w = poly_eval(f, w, p);
    }
    if (k < 0) {
      if (precision_limited && S::arbitrary_precision && p < opt.max_bits) continue;
      return Result<GreenValue<S>>::fail(Status::Unresolved,
                                         "no certified escape within " +
                                             std::to_string(opt.max_iter) + " iterations");
    }
    // extend the orbit until the tail bound is negligible
    long m = k;
    typename S::Real tail = detail::green_tail_bound<S>(C, disk_mag_lb(w), d, m, rp);
    typename S::Real target = rad_pow2<S>(-out_bits - 1);
    typename S::Real mu_cap = S::from_double(0.2, kRadPrec);
    bool overflow = false;
    while (S::cmp(tail, target) > 0 ||
           S::cmp(S::div(C, disk_mag_lb(w), kRadPrec, Rnd::U), mu_cap) > 0) {
      if (m - k > 64 || S::exponent_of(w.re) > (1L << 28) || S::exponent_of(w.im) > (1L << 28)) {
        overflow = true;
        break;
      }
      w = poly_eval(f, w, p);
      if (!w.is_valid()) {
        overflow = true;
        break;
      }
      ++m;
      tail = detail::green_tail_bound<S>(C, disk_mag_lb(w), d, m, rp);
    }
    if (!overflow) {
      RBall<S> lw = rlog(cabs(w, p), p);
      RBall<S> dm = {S::pow_si(S::from_si(d, p), -m, p, Rnd::N), S::zero(kRadPrec)};
      dm.r = ulp_err<S>(dm.c, p, rp);
      RBall<S> val = rmul(lw, dm, p);
      val.r = rad_add<S>(val.r, tail, rp);
      if (S::cmp(val.r, rad_pow2<S>(-out_bits)) <= 0) {
        GreenValue<S> g;
        g.value = val;
        g.level = m;
        return g;
      }
    }
    if (!S::arbitrary_precision || p >= opt.max_bits)
      return Result<GreenValue<S>>::fail(Status::PrecisionExhausted,
                                         "green at " + std::to_string(p) + " bits");
  }
}

}  // namespace polydyn
