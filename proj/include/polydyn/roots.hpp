// Krawczyk-certified zero finding: a generic contraction test for analytic
// maps given by ball evaluators, box subdivision for isolating all zeros in
// a region, and the fixed/periodic point front ends.
#pragma once

#include "polydyn/green.hpp"
#include "polydyn/poly.hpp"

#include <deque>
#include <functional>
#include <utility>
#include <vector>

namespace polydyn {

template <class S>
struct FnEval {
  CBall<S> value;
  CBall<S> deriv;
};

// Fn: (CBall, prec) -> FnEval, an analytic function with ball enclosures.

// One Krawczyk contraction test on the disk D:
//   K = m - Y F(m) + (1 - Y F'(D)) (D - m),  Y = 1/F'(m) (approximate).
// K inside the interior of D certifies existence and uniqueness of a zero in
// D, and the zero lies in K.
template <class S, class Fn>
std::optional<CBall<S>> krawczyk_step(Fn&& fn, const CBall<S>& D, long p) {
  CBall<S> m{D.re, D.im, S::zero(kRadPrec)};
  FnEval<S> at_m = fn(m, p);
  FnEval<S> at_D = fn(D, p);
  if (!at_m.value.is_valid() || !at_D.deriv.is_valid()) return std::nullopt;
  CBall<S> Yb = cinv(CBall<S>{at_m.deriv.re, at_m.deriv.im, S::zero(kRadPrec)}, p);
  if (!Yb.is_valid()) return std::nullopt;
  CBall<S> Y{Yb.re, Yb.im, S::zero(kRadPrec)};  // any fixed nonsingular Y works
  CBall<S> one = cball_from_double<S>(1, 0, p);
  CBall<S> slope = csub(one, cmul(Y, at_D.deriv, p), p);
  CBall<S> dm{S::zero(p), S::zero(p), D.r};  // D - m
  CBall<S> K = cadd(csub(m, cmul(Y, at_m.value, p), p), cmul(slope, dm, p), p);
  if (!K.is_valid()) return std::nullopt;
  if (!cball_contains_interior(D, K)) return std::nullopt;
  return K;
}

// Iterate the Krawczyk contraction toward radius <= 2^-out_bits, raising
// precision as needed. The input disk must already pass the Krawczyk test.
// Returns the tightest certified enclosure reached, which may be wider than
// the target; callers that require the target compare radii themselves.
template <class S, class Fn>
Result<CBall<S>> krawczyk_refine(Fn&& fn, CBall<S> D, long out_bits, long start_bits,
                                 long max_bits = 1 << 14) {
  typename S::Real target = rad_pow2<S>(-out_bits);
  long p = S::clamp_prec(start_bits);
  CBall<S> best = D;
  for (int guard = 0; guard < 200; ++guard) {
    if (S::cmp(best.r, target) <= 0) return best;
    auto K = krawczyk_step<S>(fn, best, p);
    bool progress = false;
    if (K && S::cmp(K->r, best.r) < 0) {
      // meaningful shrink: at least 1/2 of the previous radius
      typename S::Real shrunk = S::mul_2si(best.r, -1, kRadPrec, Rnd::U);
      progress = S::cmp(K->r, shrunk) <= 0;
      best = *K;
    }
    if (!progress) {
      if (p >= max_bits || !S::arbitrary_precision) break;
      p *= 2;
    }
  }
  return best;
}

template <class S>
bool meets_bits(const CBall<S>& b, long out_bits) {
  return b.is_valid() && S::cmp(b.r, rad_pow2<S>(-out_bits)) <= 0;
}

// Solve F = 0 near a seed by plain Newton on centers followed by Krawczyk
// certification on a small disk around the limit.
template <class S, class Fn>
Result<CBall<S>> newton_certify(Fn&& fn, const CBall<S>& seed, long out_bits, long start_bits,
                                long max_bits = 1 << 14) {
  long p = S::clamp_prec(start_bits);
  for (; p <= max_bits; p *= 2) {
    CBall<S> x{seed.re, seed.im, S::zero(kRadPrec)};
    bool diverged = false;
    for (int it = 0; it < 64; ++it) {
      FnEval<S> e = fn(x, p);
      if (!e.value.is_valid() || !e.deriv.is_valid() || contains_zero(e.deriv)) {
        diverged = true;
        break;
      }
      CBall<S> step = cdiv(e.value, e.deriv, p);
      x = csub(x, step, p);
      x.r = S::zero(kRadPrec);
      if (!x.is_valid()) {
        diverged = true;
        break;
      }
      if (S::cmp(mag_ub(step), rad_pow2<S>(-out_bits - 8)) <= 0 && it >= 2) break;
    }
    if (!diverged) {
      // certify on a disk a few bits wider than the requested output
      for (long rb : {out_bits + 4, out_bits, out_bits - 4, out_bits - 8}) {
        CBall<S> D = x;
        D.r = rad_pow2<S>(-rb);
        if (auto K = krawczyk_step<S>(fn, D, p)) {
          auto ref = krawczyk_refine<S>(fn, *K, out_bits, p, max_bits);
          if (ref.ok() && meets_bits(*ref, out_bits)) return ref;
        }
      }
    }
    if (!S::arbitrary_precision) break;
  }
  return Result<CBall<S>>::fail(Status::InversionUnresolved, "newton did not certify");
}

struct RootIsolationOptions {
  long out_bits = 48;
  long start_bits = 96;
  long max_bits = 1 << 14;
  long min_half_bits = 40;   // subdivision floor: boxes of half-width 2^-40
  long max_boxes = 1 << 20;  // subdivision work cap
};

template <class S>
struct RootSet {
  std::vector<CBall<S>> roots;     // certified pairwise-distinct simple zeros
  std::vector<CBall<S>> clusters;  // unresolved boxes (possible multiple zeros)
};

// Isolate all zeros of fn inside the square [cx +- half] x [cy +- half].
template <class S, class Fn>
RootSet<S> isolate_roots(Fn&& fn, double cx, double cy, double half,
                         RootIsolationOptions opt = {}) {
  struct Box {
    double x, y, h;
  };
  RootSet<S> out;
  long p = S::clamp_prec(opt.start_bits);
  std::deque<Box> queue{{cx, cy, half}};
  long budget = opt.max_boxes;
  double min_half = std::ldexp(1.0, -static_cast<int>(opt.min_half_bits));
  while (!queue.empty() && budget-- > 0) {
    Box b = queue.front();
    queue.pop_front();
    CBall<S> D = cball_from_double<S>(b.x, b.y, p);
    D.r = S::from_double(b.h * 1.4142135623730951 * 1.0000001, kRadPrec);
    FnEval<S> e = fn(D, p);
    if (e.value.is_valid() && !contains_zero(e.value)) continue;  // no zero here
    // try to certify on a slightly inflated disk (covers corner zeros)
    CBall<S> DI = D;
    DI.r = rad_mul<S>(D.r, S::from_double(1.5, kRadPrec));
    if (auto K = krawczyk_step<S>(fn, DI, p)) {
      auto ref = krawczyk_refine<S>(fn, *K, opt.out_bits, p, opt.max_bits);
      CBall<S> root = ref.ok() ? *ref : *K;
      bool dup = false;
      for (auto& known : out.roots) {
        if (!cball_disjoint(root, known)) {
          dup = true;
          break;
        }
      }
      if (!dup) out.roots.push_back(root);
      continue;
    }
    if (b.h <= min_half) {
      CBall<S> cl = D;
      bool dup = false;
      for (auto& known : out.roots)
        if (!cball_disjoint(cl, known)) dup = true;
      if (!dup) out.clusters.push_back(cl);
      continue;
    }
    double h2 = b.h / 2;
    queue.push_back({b.x - h2, b.y - h2, h2});
    queue.push_back({b.x + h2, b.y - h2, h2});
    queue.push_back({b.x - h2, b.y + h2, h2});
    queue.push_back({b.x + h2, b.y + h2, h2});
  }
  // work cap reached: whatever is left is honestly unresolved
  for (const Box& b : queue) {
    CBall<S> D = cball_from_double<S>(b.x, b.y, p);
    D.r = S::from_double(b.h * 1.4142135623730951 * 1.0000001, kRadPrec);
    out.clusters.push_back(D);
  }
  return out;
}

// ------------------------------------------------- dynamics front ends ----

enum class Stability { Repelling, Attracting, Indeterminate };

template <class S>
struct FixedPointInfo {
  CBall<S> location;
  CBall<S> multiplier;  // derivative of f^p at the point
  Stability stability = Stability::Indeterminate;
  bool separated = true;  // false for cluster enclosures
};

template <class S>
Stability classify_multiplier(const CBall<S>& m) {
  if (S::cmp(disk_mag_lb(m), S::from_si(1, kRadPrec)) > 0) return Stability::Repelling;
  typename S::Real hi = rad_add<S>(mag_ub(m), m.r);
  if (S::cmp(hi, S::from_si(1, kRadPrec)) < 0) return Stability::Attracting;
  return Stability::Indeterminate;
}

// Evaluator for F(z) = f^p(z) - z with derivative by the chain rule.
template <class S>
auto periodic_fn(const MonicPoly<S>& f, long period) {
  return [&f, period](const CBall<S>& z, long p) -> FnEval<S> {
    CBall<S> w = z;
    CBall<S> dw = cball_from_double<S>(1, 0, p);
    for (long i = 0; i < period; ++i) {
      dw = cmul(dw, poly_eval_deriv(f, w, p), p);
      w = poly_eval(f, w, p);
    }
    CBall<S> one = cball_from_double<S>(1, 0, p);
    return {csub(w, z, p), csub(dw, one, p)};
  };
}

// Multiplier of f^p along the orbit of a point enclosure.
template <class S>
CBall<S> orbit_multiplier(const MonicPoly<S>& f, const CBall<S>& z, long period, long p) {
  CBall<S> w = z;
  CBall<S> dw = cball_from_double<S>(1, 0, p);
  for (long i = 0; i < period; ++i) {
    dw = cmul(dw, poly_eval_deriv(f, w, p), p);
    w = poly_eval(f, w, p);
  }
  return dw;
}

// All solutions of f^p(z) = z as disjoint enclosures where separable;
// clusters are flagged unseparated. Periodic points lie inside the escape
// radius, so the search box is [-(R+1), R+1]^2.
template <class S>
std::vector<FixedPointInfo<S>> periodic_points(const MonicPoly<S>& f, long period, long out_bits,
                                               RootIsolationOptions opt = {}) {
  opt.out_bits = out_bits;
  double R = S::to_double(escape_radius(f), Rnd::U);
  auto fn = periodic_fn(f, period);
  RootSet<S> rs = isolate_roots<S>(fn, 0.0, 0.0, R + 1.0, opt);
  std::vector<FixedPointInfo<S>> out;
  long p = S::clamp_prec(std::max(opt.start_bits, out_bits + 16));
  for (const auto& root : rs.roots) {
    FixedPointInfo<S> info;
    info.location = root;
    info.multiplier = orbit_multiplier(f, root, period, p);
    info.stability = classify_multiplier(info.multiplier);
    out.push_back(std::move(info));
  }
  for (const auto& cl : rs.clusters) {
    FixedPointInfo<S> info;
    info.location = cl;
    info.multiplier = orbit_multiplier(f, cl, period, p);
    info.stability = Stability::Indeterminate;
    info.separated = false;
    out.push_back(std::move(info));
  }
  return out;
}

template <class S>
std::vector<FixedPointInfo<S>> fixed_points(const MonicPoly<S>& f, long out_bits,
                                            RootIsolationOptions opt = {}) {
  return periodic_points(f, 1, out_bits, opt);
}

// Evaluator for a general polynomial sum c_j z^j given coefficient balls
// (c_0..c_n); used for critical points (zeros of f').
template <class S>
auto gen_poly_fn(std::vector<CBall<S>> coeffs) {
  return [coeffs = std::move(coeffs)](const CBall<S>& z, long p) -> FnEval<S> {
    long n = static_cast<long>(coeffs.size()) - 1;
    CBall<S> acc = coeffs[static_cast<size_t>(n)];
    CBall<S> dacc;
    for (long j = n - 1; j >= 0; --j) {
      dacc = cadd(cmul(dacc, z, p), acc, p);
      acc = cadd(cmul(acc, z, p), coeffs[static_cast<size_t>(j)], p);
    }
    return {acc, dacc};
  };
}

// Zeros of f' (the critical points of f).
template <class S>
RootSet<S> critical_points_of(const MonicPoly<S>& f, long out_bits,
                              RootIsolationOptions opt = {}) {
  opt.out_bits = out_bits;
  long p = S::clamp_prec(opt.start_bits);
  long d = f.degree;
  std::vector<CBall<S>> dc(static_cast<size_t>(d));
  for (long j = 1; j < d; ++j)
    dc[static_cast<size_t>(j - 1)] =
        cmul_real(f.coeffs[static_cast<size_t>(j)], rball_from_si<S>(j, p), p);
  dc[static_cast<size_t>(d - 1)] = cball_from_real<S>(rball_from_si<S>(d, p));
  // Cauchy bound: 1 + max |c_j / c_lead|, with c_lead = d exact
  double bound = 1.0;
  for (long j = 0; j < d; ++j) {
    double m = S::to_double(rad_add<S>(mag_ub(dc[static_cast<size_t>(j)]),
                                       dc[static_cast<size_t>(j)].r),
                            Rnd::U) /
               static_cast<double>(d);
    bound = std::max(bound, 1.0 + m);
  }
  return isolate_roots<S>(gen_poly_fn<S>(dc), 0.0, 0.0, bound, opt);
}

}  // namespace polydyn
