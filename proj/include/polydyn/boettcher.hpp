// Boettcher coordinate near infinity as a certified infinite product,
//   phi(z) = z * prod_{n>=0} (1 + a_n(z))^{d^-(n+1)},
//   a_n = (f(w_n) - w_n^d) / w_n^d,  w_n = f^n(z),
// together with its logarithmic derivative (needed by ray continuation) and
// the truncation bound machinery.
#pragma once

#include "polydyn/green.hpp"
#include "polydyn/poly.hpp"

#include <vector>

namespace polydyn {

// h'(w) where h(z) = f(z) - z^d.
template <class S>
CBall<S> poly_eval_tail_deriv(const MonicPoly<S>& f, const CBall<S>& z, long p) {
  long d = f.degree;
  if (d == 1) return CBall<S>();
  CBall<S> acc = cmul_real(f.coeffs[static_cast<size_t>(d - 1)], rball_from_si<S>(d - 1, p), p);
  for (long j = d - 2; j >= 1; --j) {
    CBall<S> cj = cmul_real(f.coeffs[static_cast<size_t>(j)], rball_from_si<S>(j, p), p);
    acc = cadd(cmul(acc, z, p), cj, p);
  }
  return acc;
}

// Argument of u in some branch (a real ball; callers reduce mod 2 pi).
// Works for balls near the negative real axis by rotating half a turn.
template <class S>
RBall<S> carg_any(const CBall<S>& u, long p) {
  if (clear_of_cut(u)) return carg(u, p);
  CBall<S> mu = cneg(u);
  if (!clear_of_cut(mu)) return RBall<S>::indeterminate();
  RBall<S> a = carg(mu, p);
  RBall<S> pi{S::pi(p, Rnd::N), S::zero(kRadPrec)};
  pi.r = ulp_err<S>(pi.c, p);
  return radd(a, pi, p);
}

// Near-zone threshold: the product is evaluated only at |u| >= this value,
// comfortably above the escape radius so truncation tails decay fast.
template <class S>
typename S::Real near_zone_radius(const MonicPoly<S>& f) {
  typename S::Real twoR = S::mul_2si(escape_radius(f), 1, kRadPrec, Rnd::U);
  return rad_max<S>(twoR, S::from_si(1 << 16, kRadPrec));
}

template <class S>
struct InfProductEval {
  CBall<S> value;       // phi(u)
  CBall<S> log_factor;  // log(phi(u)/u) = sum of the product's log terms
  CBall<S> log_deriv;   // (log phi)'(u) = phi'(u)/phi(u)
  bool ok = false;
  long terms = 0;
};

// Evaluate the product (and optionally its logarithmic derivative) at a ball
// u in the near zone, accumulating terms until the certified tails drop
// below 2^-target_bits (relative for the derivative).
template <class S>
InfProductEval<S> boettcher_inf(const MonicPoly<S>& f, const CBall<S>& u, long p,
                                long target_bits, bool want_deriv, long max_terms = 96) {
  InfProductEval<S> out;
  long d = f.degree;
  long rp = rad_prec(p);
  typename S::Real R = escape_radius(f);
  if (!u.is_valid() || S::cmp(disk_mag_lb(u, rp), R) <= 0) return out;
  typename S::Real C = coeff_sum_ub(f);

  CBall<S> logsum;  // zero
  CBall<S> lds;     // log-derivative accumulator
  CBall<S> T = cball_from_double<S>(1, 0, p);  // (f^n)'(u)
  if (want_deriv) lds = cinv(u, p);
  CBall<S> w = u;
  RBall<S> q = rball_from_si<S>(1, p);  // becomes d^-(n+1)
  typename S::Real dm1 = S::from_si(d - 1, rp);
  typename S::Real val_target = rad_pow2<S>(-target_bits);
  typename S::Real der_target =
      rad_div<S>(rad_pow2<S>(-target_bits), mag_ub(u, rp), rp);

  for (long n = 0; n < max_terms; ++n) {
    typename S::Real W = disk_mag_lb(w, rp);
    if (S::sgn(W) <= 0 || S::cmp(W, R) <= 0) return out;  // chain left the zone
    // value tail: |sum_{j>=n} d^-(j+1) log(1+a_j)| <= -log(1-C/W) d^-n/(d-1)
    typename S::Real mu = S::div(C, W, rp, Rnd::U);
    typename S::Real om = S::sub(S::from_si(1, rp), mu, rp, Rnd::D);
    if (S::sgn(om) > 0) {
      typename S::Real L = S::neg(S::log(om, rp, Rnd::D), rp, Rnd::U);
      typename S::Real dpow = S::pow_si(S::from_si(d, rp), -n, rp, Rnd::U);
      typename S::Real vtail = S::div(rad_mul<S>(L, dpow, rp), dm1, rp, Rnd::U);
      bool val_done = S::cmp(vtail, val_target) <= 0;
      bool der_done = !want_deriv;
      typename S::Real dtail = S::zero(kRadPrec);
      // derivative tail ratio argument needs |w| clear of the escape radius
      bool deriv_zone = S::cmp(W, S::from_si(8, rp)) >= 0;
      if (want_deriv && deriv_zone) {
        // |term_j| <= d^-(j+1) (4/3)(2d-1) C T_j / W_j^2, ratio <= 1/2
        typename S::Real That = rad_add<S>(mag_ub(T, rp), T.r, rp);
        typename S::Real num = rad_mul<S>(S::from_double((4.0 / 3.0) * (2 * d - 1), rp),
                                          rad_mul<S>(C, That, rp), rp);
        typename S::Real den = S::mul(W, W, rp, Rnd::D);
        typename S::Real term = rad_div<S>(num, den, rp);
        term = rad_mul<S>(term, S::pow_si(S::from_si(d, rp), -(n + 1), rp, Rnd::U), rp);
        dtail = S::mul_2si(term, 1, rp, Rnd::U);
        der_done = S::cmp(dtail, der_target) <= 0;
      }
      if (val_done && der_done && (!want_deriv || deriv_zone)) {
        logsum.r = rad_add<S>(logsum.r, vtail, rp);
        if (want_deriv) lds.r = rad_add<S>(lds.r, dtail, rp);
        out.log_factor = logsum;
        out.value = cmul(u, cexp(logsum, p), p);
        out.log_deriv = lds;
        out.ok = out.value.is_valid() && (!want_deriv || lds.is_valid());
        out.terms = n;
        return out;
      }
    }
    // term n
    q = rdiv(q, rball_from_si<S>(d, p), p);  // d^-(n+1)
    CBall<S> h = poly_eval_tail(f, w, p);
    CBall<S> wd = cpow_ui(w, static_cast<unsigned long>(d), p);
    CBall<S> a = cdiv(h, wd, p);
    CBall<S> one_a = cadd(cball_from_double<S>(1, 0, p), a, p);
    CBall<S> lg = clog(one_a, p);
    if (!lg.is_valid()) return out;
    logsum = cadd(logsum, cmul_real(lg, q, p), p);
    if (want_deriv) {
      CBall<S> hp = poly_eval_tail_deriv(f, w, p);
      CBall<S> num = csub(cmul(hp, w, p), cmul_real(h, rball_from_si<S>(d, p), p), p);
      CBall<S> wd1 = cmul(wd, w, p);  // w^{d+1}
      CBall<S> ap = cmul(cdiv(num, wd1, p), T, p);
      lds = cadd(lds, cmul_real(cdiv(ap, one_a, p), q, p), p);
      T = cmul(T, poly_eval_deriv(f, w, p), p);
    }
    w = cadd(wd, h, p);  // f(w)
    if (!w.is_valid()) return out;
  }
  return out;
}

// Finite product truncation phi_k(z) = z prod_{n<k} (...): no tail attached.
// Used by the truncation-honesty checks against the level-k reported bound.
template <class S>
Result<CBall<S>> boettcher_truncated(const MonicPoly<S>& f, const CBall<S>& z, long k, long p) {
  long d = f.degree;
  typename S::Real R = escape_radius(f);
  if (!z.is_valid() || S::cmp(disk_mag_lb(z), R) < 0)
    return Result<CBall<S>>::fail(Status::OutsideValidity, "|z| below escape radius");
  CBall<S> logsum;
  CBall<S> w = z;
  RBall<S> q = rball_from_si<S>(1, p);
  for (long n = 0; n < k; ++n) {
    q = rdiv(q, rball_from_si<S>(d, p), p);
    CBall<S> h = poly_eval_tail(f, w, p);
    CBall<S> wd = cpow_ui(w, static_cast<unsigned long>(d), p);
    CBall<S> a = cdiv(h, wd, p);
    CBall<S> one_a = cadd(cball_from_double<S>(1, 0, p), a, p);
    CBall<S> lg = clog(one_a, p);
    if (!lg.is_valid())
      return Result<CBall<S>>::fail(Status::Indeterminate, "product factor near the cut");
    logsum = cadd(logsum, cmul_real(lg, q, p), p);
    w = cadd(wd, h, p);
    if (!w.is_valid())
      return Result<CBall<S>>::fail(Status::PrecisionExhausted, "orbit enclosure blew up");
  }
  return cmul(z, cexp(logsum, p), p);
}

// The reported level-k truncation bound:
//   |z| (5/4)^{1/(d-1)} ((5/4)^{1/(d^k(d-1))} - 1),
// an upper bound on |phi(z) - phi_k(z)| for |z| >= R.
template <class S>
typename S::Real boettcher_tail_bound_level(const MonicPoly<S>& f, const CBall<S>& z, long k,
                                            long p = 96) {
  long d = f.degree;
  RBall<S> five_fourth = rdiv(rball_from_si<S>(5, p), rball_from_si<S>(4, p), p);
  RBall<S> lg = rlog(five_fourth, p);
  RBall<S> e1 = rdiv(lg, rball_from_si<S>(d - 1, p), p);
  RBall<S> outer = rexp(e1, p);  // (5/4)^{1/(d-1)}
  RBall<S> dkd{S::pow_si(S::from_si(d, p), k, p, Rnd::N), S::zero(kRadPrec)};
  dkd.r = ulp_err<S>(dkd.c, p);
  dkd = rmul(dkd, rball_from_si<S>(d - 1, p), p);
  RBall<S> e2 = rdiv(lg, dkd, p);
  RBall<S> inner = rexp(e2, p);  // (5/4)^{1/(d^k(d-1))}
  RBall<S> diff = rsub(inner, rball_from_si<S>(1, p), p);
  RBall<S> zb = cabs(z, p);
  RBall<S> bound = rmul(rmul(zb, outer, p), diff, p);
  return rball_upper(bound);
}

enum class BoettcherRoute { NearInfinity, Flowed };

template <class S>
struct BoettcherEval {
  CBall<S> value;      // phi_f(z)
  RBall<S> potential;  // G_f(z) = log|phi_f(z)|
  BoettcherRoute route = BoettcherRoute::NearInfinity;
};

// phi_f(z) for |z| certified >= escape_radius, radius <= 2^-out_bits.
template <class S>
Result<BoettcherEval<S>> boettcher_near_infinity(const MonicPoly<S>& f, const CBall<S>& z,
                                                 long out_bits, long max_bits = 1 << 14) {
  typename S::Real R = escape_radius(f);
  if (!z.is_valid() || S::cmp(disk_mag_lb(z), R) < 0)
    return Result<BoettcherEval<S>>::fail(Status::OutsideValidity,
                                          "|z| not certified >= escape radius");
  for (long p = S::clamp_prec(std::max(64L, out_bits + 16));; p *= 2) {
    InfProductEval<S> ie = boettcher_inf(f, z, p, out_bits + 8, false);
    if (ie.ok && S::cmp(ie.value.r, rad_pow2<S>(-out_bits)) <= 0) {
      BoettcherEval<S> ev;
      ev.value = ie.value;
      ev.potential = rlog(cabs(ie.value, p), p);
      ev.route = BoettcherRoute::NearInfinity;
      return ev;
    }
    if (p >= max_bits || !S::arbitrary_precision)
      return Result<BoettcherEval<S>>::fail(Status::PrecisionExhausted, "boettcher product");
  }
}

// External angle (in turns, some integer-shift branch) of a near-zone point:
// arg phi(u) / 2pi = (arg u + Im log(phi/u)) / 2pi.
template <class S>
Result<RBall<S>> external_angle_inf(const MonicPoly<S>& f, const CBall<S>& u, long p,
                                    long target_bits) {
  InfProductEval<S> ie = boettcher_inf(f, u, p, target_bits, false);
  if (!ie.ok) return Result<RBall<S>>::fail(Status::PrecisionExhausted, "angle product");
  RBall<S> base = carg_any(u, p);
  if (!base.is_valid())
    return Result<RBall<S>>::fail(Status::Indeterminate, "argument enclosure");
  RBall<S> ang = radd(base, cimag(ie.log_factor), p);
  return rdiv(ang, rball_two_pi<S>(p), p);
}

}  // namespace polydyn
