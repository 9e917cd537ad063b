// Monic complex polynomials with enclosure coefficients: evaluation,
// iteration, escape radius and the certified escape verdict.
#pragma once

#include "polydyn/ball.hpp"
#include "polydyn/rational.hpp"
#include "polydyn/result.hpp"

#include <vector>

namespace polydyn {

// f(z) = z^d + a_{d-1} z^{d-1} + ... + a_1 z + a_0, d >= 2.
template <class S>
struct MonicPoly {
  long degree = 2;
  std::vector<CBall<S>> coeffs;  // a_0 .. a_{d-1}

  MonicPoly() : coeffs(2) {}
  explicit MonicPoly(long d) : degree(d), coeffs(static_cast<size_t>(d)) {}

  static MonicPoly pure_power(long d, long p) {
    MonicPoly f(d);
    for (auto& c : f.coeffs) c = cball_from_double<S>(0, 0, p);
    return f;
  }
  // z^2 + c
  static MonicPoly quadratic(const CBall<S>& c, long p) {
    MonicPoly f(2);
    f.coeffs[0] = c;
    f.coeffs[1] = cball_from_double<S>(0, 0, p);
    return f;
  }
  // z^3 + b z^2 + lambda z
  static MonicPoly cubic(const CBall<S>& lambda, const CBall<S>& b, long p) {
    MonicPoly f(3);
    f.coeffs[0] = cball_from_double<S>(0, 0, p);
    f.coeffs[1] = lambda;
    f.coeffs[2] = b;
    return f;
  }
  // lambda z + z^2 (the quadratic family member)
  static MonicPoly quad_family(const CBall<S>& lambda, long p) {
    MonicPoly f(2);
    f.coeffs[0] = cball_from_double<S>(0, 0, p);
    f.coeffs[1] = lambda;
    return f;
  }
};

template <class S>
CBall<S> poly_eval(const MonicPoly<S>& f, const CBall<S>& z, long p) {
  CBall<S> acc = cball_from_double<S>(1, 0, p);  // implicit leading coefficient
  for (long j = f.degree - 1; j >= 0; --j)
    acc = cadd(cmul(acc, z, p), f.coeffs[static_cast<size_t>(j)], p);
  return acc;
}

// f'(z) = d z^{d-1} + sum j a_j z^{j-1}
template <class S>
CBall<S> poly_eval_deriv(const MonicPoly<S>& f, const CBall<S>& z, long p) {
  CBall<S> acc = cball_from_real<S>(rball_from_si<S>(f.degree, p));
  for (long j = f.degree - 1; j >= 1; --j) {
    CBall<S> cj = cmul_real(f.coeffs[static_cast<size_t>(j)], rball_from_si<S>(j, p), p);
    acc = cadd(cmul(acc, z, p), cj, p);
  }
  return acc;
}

// f''(z), used by inverse-branch certification.
template <class S>
CBall<S> poly_eval_deriv2(const MonicPoly<S>& f, const CBall<S>& z, long p) {
  long d = f.degree;
  CBall<S> acc = cball_from_real<S>(rball_from_si<S>(d * (d - 1), p));
  for (long j = d - 1; j >= 2; --j) {
    CBall<S> cj =
        cmul_real(f.coeffs[static_cast<size_t>(j)], rball_from_si<S>(j * (j - 1), p), p);
    acc = cadd(cmul(acc, z, p), cj, p);
  }
  return acc;
}

// h(z) = f(z) - z^d (the non-leading part), used by the product formulas.
template <class S>
CBall<S> poly_eval_tail(const MonicPoly<S>& f, const CBall<S>& z, long p) {
  CBall<S> acc = f.coeffs[static_cast<size_t>(f.degree - 1)];
  for (long j = f.degree - 2; j >= 0; --j)
    acc = cadd(cmul(acc, z, p), f.coeffs[static_cast<size_t>(j)], p);
  return acc;
}

// Upper bound on sum_j |a_j| (j < d).
template <class S>
typename S::Real coeff_sum_ub(const MonicPoly<S>& f) {
  typename S::Real s = S::zero(kRadPrec);
  for (const auto& c : f.coeffs) s = rad_add<S>(s, rad_add<S>(mag_ub(c), c.r));
  return s;
}

// R = max{4 sum |a_j|, 4/3}: for |z| >= R the induction bound
// |f(w) - w^d| / |w|^d <= 1/4 holds along the escaping orbit.
template <class S>
typename S::Real escape_radius(const MonicPoly<S>& f) {
  typename S::Real four_sum = S::mul_2si(coeff_sum_ub(f), 2, kRadPrec, Rnd::U);
  typename S::Real four_thirds = S::div(S::from_si(4, kRadPrec), S::from_si(3, kRadPrec),
                                        kRadPrec, Rnd::U);
  return rad_max<S>(four_sum, four_thirds);
}

// n-fold iteration at fixed precision (no ladder).
template <class S>
CBall<S> poly_iterate_raw(const MonicPoly<S>& f, CBall<S> z, long n, long p) {
  for (long i = 0; i < n && z.is_valid(); ++i) z = poly_eval(f, z, p);
  return z;
}

// Iteration with a precision ladder: raises working bits until the result
// radius stays below 2^-out_bits relative to max(1, |result|).
template <class S>
Result<CBall<S>> poly_iterate(const MonicPoly<S>& f, const CBall<S>& z, long n, long out_bits,
                              long max_bits = 1 << 14) {
  long p = S::clamp_prec(std::max(64L, out_bits + 16));
  for (;; p *= 2) {
    CBall<S> w = poly_iterate_raw(f, z, n, p);
    if (w.is_valid()) {
      typename S::Real scale = rad_max<S>(S::from_si(1, kRadPrec), mag_ub(w));
      typename S::Real budget = S::mul_2si(scale, -out_bits, kRadPrec, Rnd::D);
      if (S::cmp(w.r, budget) <= 0) return w;
    }
    if (p >= max_bits || !S::arbitrary_precision)
      return Result<CBall<S>>::fail(Status::PrecisionExhausted,
                                    "iterate at " + std::to_string(p) + " bits");
  }
}

struct EscapeVerdict {
  bool escapes = false;
  long steps = 0;  // first k with |f^k(z)| certified outside the escape ball
};

// ESCAPES(k) only when the k-th iterate enclosure lies entirely outside the
// closed escape-radius ball; UNRESOLVED is a normal outcome, never a claim.
template <class S>
EscapeVerdict escape_verdict(const MonicPoly<S>& f, const CBall<S>& z, long max_iter, long p) {
  typename S::Real R = escape_radius(f);
  CBall<S> w = z;
  for (long k = 0; k <= max_iter; ++k) {
    if (!w.is_valid()) return {};
    if (S::cmp(disk_mag_lb(w), R) > 0) return {true, k};
    if (k < max_iter) w = poly_eval(f, w, p);
  }
  return {};
}

// Escape with a precision ladder (for points that escape slowly).
template <class S>
EscapeVerdict escape_verdict_ladder(const MonicPoly<S>& f, const CBall<S>& z, long max_iter,
                                    long start_bits = 64, long max_bits = 4096) {
  for (long p = start_bits; p <= max_bits; p *= 2) {
    EscapeVerdict v = escape_verdict(f, z, max_iter, p);
    if (v.escapes) return v;
    if (!S::arbitrary_precision) break;
  }
  return {};
}

}  // namespace polydyn
