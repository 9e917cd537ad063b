// Certified continuation along curves in the log-Boettcher plane
// (external rays, equipotentials, gradient-flow lines).
//
// A continuation step from a certified curve point z1 to the point at
// log-displacement delta (real delta dv: potential move; the curves here
// are radial) is certified in logarithmic form. With j the first chain
// level taking a neighbourhood into the product zone and
// chi(z) = phi(f^j(z)), the target satisfies the exact relative identity
//     chi(z(s2)) = chi(z(s1)) e^{d^j dv},
// and F(z) = d^-j log(chi(z)/Wrel) has derivative F' = H = (log phi)', a
// quantity with no d^j amplification. The step certificate is:
//   - a Picard box B encloses the arc (solution of dz/ds = dv/H(z)), and
//     the endpoint lies in E = z1 + dv/H(B);
//   - a Krawczyk test for F on a small disk D around the polished predictor
//     certifies a unique zero of F in D;
//   - the endpoint's log-branch is pinned by the path bound
//     d^j (|F(m)| + sup_B |H| len(m..E)) < 2 pi, which forces the endpoint
//     to be that unique zero rather than a sibling-sheet solution.
// Rungs are periodically re-anchored against the exact target (rational
// angle, dyadic potential), erasing reference drift.
#pragma once

#include "polydyn/boettcher.hpp"
#include "polydyn/roots.hpp"

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <utility>
#include <vector>

namespace polydyn {

// Radius target measured relative to the ball's magnitude scale.
template <class S>
long scale_bits(const CBall<S>& z, long bits) {
  long e = S::exponent_of(mag_ub(z));
  return e > 0 ? bits - e : bits;
}

inline mpz_class int_pow(long base, long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(base),
                static_cast<unsigned long>(e));
  return r;
}

inline Angle angle_times_pow(const Angle& t, long d, long m) {
  Angle a = t;
  for (long i = 0; i < m; ++i) a = a.times(d);
  return a;
}

// Zone where the infinite product (value and derivative tails) is evaluated.
template <class S>
typename S::Real product_zone_radius(const MonicPoly<S>& f) {
  return rad_max<S>(S::mul_2si(escape_radius(f), 1, kRadPrec, Rnd::U),
                    S::from_si(16, kRadPrec));
}

template <class S>
struct ZoneChain {
  CBall<S> w;  // f^j(z), certified inside the product zone
  CBall<S> T;  // (f^j)'(z)
  long j = 0;
  bool ok = false;
};

template <class S>
ZoneChain<S> chain_to_zone(const MonicPoly<S>& f, const CBall<S>& z, long p, bool want_deriv,
                           long max_j = 384) {
  ZoneChain<S> out;
  typename S::Real zone = product_zone_radius(f);
  typename S::Real hopeless = S::mul_2si(escape_radius(f), 2, kRadPrec, Rnd::U);
  CBall<S> w = z;
  CBall<S> T = cball_from_double<S>(1, 0, p);
  for (long j = 0; j <= max_j; ++j) {
    if (!w.is_valid()) return out;
    if (S::cmp(disk_mag_lb(w), zone) >= 0) {
      out.w = w;
      out.T = T;
      out.j = j;
      out.ok = true;
      return out;
    }
    // a zero-containing ball with escape-scale radius can never certify
    if (S::sgn(disk_mag_lb(w)) <= 0 && S::cmp(w.r, hopeless) > 0) return out;
    if (S::exponent_of(w.re) > (1L << 24) || S::exponent_of(w.im) > (1L << 24)) return out;
    if (want_deriv) T = cmul(T, poly_eval_deriv(f, w, p), p);
    w = poly_eval(f, w, p);
  }
  return out;
}

template <class S>
struct IntrinsicEval {
  CBall<S> chi;        // phi(f^j(z))
  CBall<S> chi_deriv;  // d/dz phi(f^j(z))
  CBall<S> H;          // (log phi)'(z)
  long j = 0;
  bool ok = false;
};

// chi and H at the shortest chain level that reaches the product zone.
template <class S>
IntrinsicEval<S> intrinsic_eval(const MonicPoly<S>& f, const CBall<S>& z, long p,
                                long target_bits, bool want_deriv) {
  IntrinsicEval<S> out;
  ZoneChain<S> ck = chain_to_zone(f, z, p, want_deriv);
  if (!ck.ok) return out;
  InfProductEval<S> ie = boettcher_inf(f, ck.w, p, target_bits, want_deriv);
  if (!ie.ok) return out;
  out.chi = ie.value;
  out.j = ck.j;
  if (want_deriv) {
    CBall<S> hinfT = cmul(ie.log_deriv, ck.T, p);
    out.chi_deriv = cmul(ie.value, hinfT, p);
    RBall<S> dj{S::pow_si(S::from_si(f.degree, p), -ck.j, p, Rnd::N), S::zero(kRadPrec)};
    dj.r = ulp_err<S>(dj.c, p);
    out.H = cmul_real(hinfT, dj, p);
  }
  out.ok = true;
  return out;
}

// chi (and chi', H) at a prescribed level m; callers pass narrow balls whose
// level-m chain stays certified.
template <class S>
IntrinsicEval<S> eval_at_level(const MonicPoly<S>& f, const CBall<S>& z, long m, long p,
                               long target_bits, bool want_deriv) {
  IntrinsicEval<S> out;
  CBall<S> w = z;
  CBall<S> T = cball_from_double<S>(1, 0, p);
  for (long i = 0; i < m; ++i) {
    if (!w.is_valid()) return out;
    if (want_deriv) T = cmul(T, poly_eval_deriv(f, w, p), p);
    w = poly_eval(f, w, p);
  }
  InfProductEval<S> ie = boettcher_inf(f, w, p, target_bits, want_deriv);
  if (!ie.ok) return out;
  out.chi = ie.value;
  out.j = m;
  if (want_deriv) {
    CBall<S> hinfT = cmul(ie.log_deriv, T, p);
    out.chi_deriv = cmul(ie.value, hinfT, p);
    RBall<S> dj{S::pow_si(S::from_si(f.degree, p), -m, p, Rnd::N), S::zero(kRadPrec)};
    dj.r = ulp_err<S>(dj.c, p);
    out.H = cmul_real(hinfT, dj, p);
  }
  out.ok = true;
  return out;
}

// G(z) as d^-j log|chi_j(z)| from the intrinsic chain.
template <class S>
Result<RBall<S>> potential_from_chain(const MonicPoly<S>& f, const CBall<S>& z, long p,
                                      long target_bits = 48) {
  IntrinsicEval<S> ie = intrinsic_eval(f, z, p, target_bits, false);
  if (!ie.ok) return Result<RBall<S>>::fail(Status::Unresolved, "chain");
  RBall<S> dj{S::pow_si(S::from_si(f.degree, p), -ie.j, p, Rnd::N), S::zero(kRadPrec)};
  dj.r = ulp_err<S>(dj.c, p);
  return rmul(rlog(cabs(ie.chi, p), p), dj, p);
}

// Target generator: enclosure of the required chi value at witness level m
// and ladder coordinate s (potential = pot_offset + s along the curve).
template <class S>
using TraceTarget = std::function<CBall<S>(long m, const Dyadic& s, long p)>;

// Exact-ray target: chi = exp(d^m (s + 2 pi i t)), t an exact angle.
template <class S>
TraceTarget<S> ray_target(const MonicPoly<S>& f, const Angle& t) {
  long d = f.degree;
  return [d, t](long m, const Dyadic& s, long p) -> CBall<S> {
    Dyadic vm = s.mul_int(int_pow(d, m));
    Angle tm = angle_times_pow(t, d, m);
    return cexp_polar(rball_from_dyadic<S>(vm, p), tm.ball<S>(p), p);
  };
}

// Inverse target: chi = w^{d^m} e^{d^m s} for a fixed target ball w
// (boettcher_inverse descends s from the anchor offset to 0).
template <class S>
TraceTarget<S> power_target(const MonicPoly<S>& f, const CBall<S>& w) {
  long d = f.degree;
  return [d, w](long m, const Dyadic& s, long p) -> CBall<S> {
    mpz_class e = int_pow(d, m);
    if (!e.fits_ulong_p()) return CBall<S>::indeterminate();
    CBall<S> base = cpow_ui(w, e.get_ui(), p);
    if (s.is_zero()) return base;
    Dyadic sm = s.mul_int(e);
    RBall<S> scale = rexp(rball_from_dyadic<S>(sm, p), p);
    if (!scale.is_valid()) return CBall<S>::indeterminate();
    return cmul_real(base, scale, p);
  };
}

namespace detail {

// One first-order Picard piece: encloses the arc z(u), u in [0,1], of
// dz/du = delta / H(z) from a certified start ball, and its endpoint.
template <class S>
struct ArcPiece {
  CBall<S> box;       // contains this piece of the arc
  CBall<S> endpoint;  // contains z(1)
  CBall<S> H_box;     // H over the piece
  long j = 0;
  bool ok = false;
};

template <class S>
ArcPiece<S> picard_piece(const MonicPoly<S>& f, const CBall<S>& from, const CBall<S>& delta,
                         long p, bool* zero_grad) {
  ArcPiece<S> out;
  IntrinsicEval<S> at0 = intrinsic_eval(f, from, p, 20, true);
  if (!at0.ok) return out;
  if (contains_zero(at0.H)) {
    *zero_grad = true;
    return out;
  }
  CBall<S> vf0 = cdiv(delta, at0.H, p);
  if (!vf0.is_valid()) return out;
  // initial trial: tube around the predicted arc, inflated
  CBall<S> seg = cball_segment01(vf0);
  seg.r = rad_add<S>(rad_mul<S>(seg.r, S::from_double(1.6, kRadPrec)),
                     rad_mul<S>(mag_ub(vf0), S::from_double(0.25, kRadPrec)));
  CBall<S> box = cadd(from, seg, p);
  for (int tries = 0; tries < 4; ++tries) {
    IntrinsicEval<S> onb = intrinsic_eval(f, box, p, 20, true);
    if (!onb.ok) return out;
    if (contains_zero(onb.H)) {
      *zero_grad = true;
      return out;
    }
    CBall<S> vf = cdiv(delta, onb.H, p);
    CBall<S> cand = cadd(from, cball_segment01(vf), p);
    if (cball_contains(box, cand)) {
      out.box = cand;
      out.endpoint = cadd(from, vf, p);
      out.H_box = onb.H;
      out.j = onb.j;
      out.ok = true;
      return out;
    }
    CBall<S> grow = cand;
    grow.r = rad_mul<S>(grow.r, S::from_double(1.6, kRadPrec));
    box = cball_hull(box, grow, p);
  }
  return out;
}

}  // namespace detail

template <class S>
struct StepPoint {
  CBall<S> z;                // certified endpoint enclosure
  typename S::Real seg_rad;  // largest Picard piece radius along the arc
  long level = 0;            // chain level used by the relative certificate
};

struct StepOptions {
  long cruise_bits = 30;  // relative rung tightness while stepping
  long start_bits = 96;
  long max_bits = 1 << 13;
};

// One certified relative continuation step by potential displacement dv
// (dyadic, either sign). On success the returned enclosure contains the
// point of the same external ray at potential (potential of z1) + dv.
// The arc is enclosed by a chain of cheap first-order Picard pieces; the
// endpoint is pinned by a single Krawczyk test in logarithmic form, with
// the log branch fixed by a path bound (geometric=true marks failures that
// a smaller step, not higher precision, would fix).
template <class S>
Result<StepPoint<S>> log_step(const MonicPoly<S>& f, const CBall<S>& z1, const Dyadic& dv,
                              long p, const StepOptions& opt, bool* zero_grad,
                              bool* geometric = nullptr) {
  static const bool dbg = getenv("POLYDYN_STEP_DEBUG") != nullptr;
  if (geometric) *geometric = false;
  long d = f.degree;

  // estimate the chain depth to size the subdivision
  ZoneChain<S> zc = chain_to_zone(f, z1, p, false);
  if (!zc.ok) return Result<StepPoint<S>>::fail(Status::ContinuationStalled, "start chain");
  double dj = std::pow(static_cast<double>(d), static_cast<double>(zc.j));
  long n = 1;
  double want = 3.0 * std::fabs(dv.to_double()) * dj;
  while (n < 512 && static_cast<double>(n) < want) n *= 2;

  for (; n <= 512; n *= 2) {
    Dyadic piece = dv;
    long k = n;
    while (k > 1) {
      piece = piece.half();
      k /= 2;
    }
    CBall<S> pdelta = cball_from_real<S>(rball_from_dyadic<S>(piece, p));
    CBall<S> P = z1;
    typename S::Real seg_rad = S::zero(kRadPrec);
    CBall<S> last_box;
    long max_j = 0;
    bool piece_fail = false;
    for (long i = 0; i < n; ++i) {
      detail::ArcPiece<S> arc = detail::picard_piece(f, P, pdelta, p, zero_grad);
      if (!arc.ok) {
        piece_fail = true;
        break;
      }
      P = arc.endpoint;
      last_box = arc.box;
      seg_rad = rad_max<S>(seg_rad, arc.box.r);
      max_j = std::max(max_j, arc.j);
    }
    if (piece_fail) {
      if (*zero_grad) return Result<StepPoint<S>>::fail(Status::NearSeparatrix, "gradient");
      continue;  // finer subdivision
    }

    // chain level for the endpoint certificate
    ZoneChain<S> ec = chain_to_zone(f, P, p, false);
    if (!ec.ok) continue;
    long j = ec.j;
    IntrinsicEval<S> ref = eval_at_level(f, z1, j, p, opt.cruise_bits + 10, false);
    if (!ref.ok) continue;
    Dyadic djs = dv.mul_int(int_pow(d, j));
    RBall<S> growth = rexp(rball_from_dyadic<S>(djs, p), p);
    if (!growth.is_valid()) continue;
    CBall<S> Wrel = cmul_real(ref.chi, growth, p);
    RBall<S> inv_dj{S::pow_si(S::from_si(d, p), -j, p, Rnd::N), S::zero(kRadPrec)};
    inv_dj.r = ulp_err<S>(inv_dj.c, p);

    // F(z) = d^-j log(chi_j(z)/Wrel); F' = H.
    auto fnF = [&](const CBall<S>& zb, long pp) -> FnEval<S> {
      IntrinsicEval<S> ce = eval_at_level(f, zb, j, pp, opt.cruise_bits + 10, true);
      if (!ce.ok) return {CBall<S>::indeterminate(), CBall<S>::indeterminate()};
      CBall<S> ratio = cdiv(ce.chi, Wrel, pp);
      CBall<S> val = CBall<S>::indeterminate();
      if (ratio.is_valid() && clear_of_cut(ratio)) val = cmul_real(clog(ratio, pp), inv_dj, pp);
      return {val, ce.H};
    };

    // polish the predictor with plain Newton on centers
    CBall<S> m{P.re, P.im, S::zero(kRadPrec)};
    for (int it = 0; it < 3; ++it) {
      FnEval<S> e = fnF(m, p);
      if (!e.value.is_valid() || !e.deriv.is_valid() || contains_zero(e.deriv)) break;
      CBall<S> stepc = cdiv(e.value, e.deriv, p);
      m = csub(m, stepc, p);
      m.r = S::zero(kRadPrec);
      if (!m.is_valid()) break;
    }
    if (!m.is_valid()) continue;
    // Krawczyk disk around the polished predictor must cover the endpoint
    typename S::Real dist_me = rad_add<S>(center_dist_ub(m, P), P.r);
    typename S::Real floor_r = S::mul_2si(rad_max<S>(S::from_si(1, kRadPrec), mag_ub(m)),
                                          -opt.cruise_bits - 6, kRadPrec, Rnd::U);
    dist_me = rad_max<S>(dist_me, floor_r);
    CBall<S> D = m;
    D.r = rad_mul<S>(dist_me, S::from_double(1.5, kRadPrec));
    auto K = krawczyk_step<S>(fnF, D, p);
    if (!K) {
      D.r = rad_mul<S>(dist_me, S::from_double(3.0, kRadPrec));
      K = krawczyk_step<S>(fnF, D, p);
    }
    if (!K) {
      if (dbg) fprintf(stderr, "  log_step dv=%.4g n=%ld FAIL krawczyk\n", dv.to_double(), n);
      continue;
    }
    if (!cball_contains(D, P)) {
      if (dbg) fprintf(stderr, "  log_step dv=%.4g n=%ld FAIL endpoint-out\n", dv.to_double(), n);
      continue;
    }
    // sheet pinning: d^j (|F(m)| + sup|H| dist(m, endpoint)) < 2 pi, with H
    // over a region containing the hop path from m to the endpoint
    {
      FnEval<S> at_m = fnF(m, p);
      if (!at_m.value.is_valid()) continue;
      CBall<S> hop = cball_hull(last_box, D, p);
      IntrinsicEval<S> hh = intrinsic_eval(f, hop, p, 16, true);
      if (!hh.ok) continue;
      typename S::Real fm = rad_add<S>(mag_ub(at_m.value), at_m.value.r);
      typename S::Real hb = rad_add<S>(mag_ub(hh.H), hh.H.r);
      typename S::Real djr = S::pow_si(S::from_si(d, kRadPrec), j, kRadPrec, Rnd::U);
      typename S::Real lhs = rad_mul<S>(djr, rad_add<S>(fm, rad_mul<S>(hb, dist_me)));
      typename S::Real budget = S::from_double(6.0, kRadPrec);  // < 2 pi with margin
      if (S::cmp(lhs, budget) >= 0) {
        if (dbg) fprintf(stderr, "  log_step dv=%.4g n=%ld FAIL sheet\n", dv.to_double(), n);
        if (geometric) *geometric = true;
        return Result<StepPoint<S>>::fail(Status::ContinuationStalled, "sheet bound");
      }
    }
    auto tight = krawczyk_refine<S>(fnF, *K, scale_bits(*K, opt.cruise_bits), p, opt.max_bits);
    StepPoint<S> out;
    out.z = tight.ok() ? *tight : *K;
    out.seg_rad = seg_rad;
    out.level = j;
    return out;
  }
  if (dbg) fprintf(stderr, "  log_step dv=%.4g FAIL subdivision exhausted\n", dv.to_double());
  if (geometric) *geometric = true;
  return Result<StepPoint<S>>::fail(Status::ContinuationStalled, "picard subdivision");
}

template <class S>
struct TraceRung {
  Dyadic s;                  // ladder coordinate
  CBall<S> z;                // certified enclosure of the curve point
  typename S::Real seg_rad;  // Picard box radius covering the arc from the previous rung
  long level = 0;            // witness level of the last exact re-anchoring
  bool exact = false;        // re-anchored against the exact target at s
};

struct TraceOptions {
  long vert_bits = 46;    // rung enclosure target at recorded coordinates
  long cruise_bits = 30;  // relative tightness between recorded coordinates
  long tube_bits = 4;     // ceiling on Picard box radius (2^-tube_bits)
  double tube_cap_below = -1;  // apply the ceiling only below this coordinate
  long start_bits = 96;
  long max_bits = 1 << 13;
  long max_steps = 40000;
  int max_halvings = 46;
  int exactify_every = 8;  // drift-erasing cadence
};

template <class S>
class Continuation {
 public:
  Continuation(const MonicPoly<S>& f, TraceTarget<S> target, double pot_offset,
               TraceOptions opt = {})
      : f_(f), target_(std::move(target)), pot_offset_(pot_offset), opt_(opt) {
    zone_log_ = std::log(S::to_double(product_zone_radius(f), Rnd::U));
    near_log_ = std::log(std::max(2.0 * S::to_double(escape_radius(f), Rnd::U), 65536.0));
  }

  // Witness level at which the exact target is re-anchored.
  long exact_level(const Dyadic& s) const {
    double pot = pot_offset_ + s.to_double();
    if (pot <= 0) return -1;
    long m = 0;
    double need = zone_log_ * 1.1;
    while (pot < need && m < 320) {
      pot *= static_cast<double>(f_.degree);
      ++m;
    }
    return m < 320 ? m : -1;
  }

  double anchor_pot() const { return near_log_ * 1.1; }

  // Direct near-zone solve at ladder coordinate s0 (level 0).
  Result<TraceRung<S>> anchor(const Dyadic& s0) {
    for (long p = S::clamp_prec(opt_.start_bits); p <= opt_.max_bits; p *= 2) {
      CBall<S> W = target_(0, s0, p);
      if (!W.is_valid()) break;
      auto fn = exact_fn(0, s0);
      CBall<S> seed{W.re, W.im, S::zero(kRadPrec)};
      long rb = scale_bits(W, opt_.vert_bits);
      auto root = newton_certify<S>(fn, seed, rb, p, opt_.max_bits);
      if (root.ok()) {
        TraceRung<S> r;
        r.s = s0;
        r.z = *root;
        r.seg_rad = S::zero(kRadPrec);
        r.level = 0;
        r.exact = true;
        return r;
      }
      if (!S::arbitrary_precision) break;
    }
    return Result<TraceRung<S>>::fail(Status::ContinuationStalled, "anchor solve failed");
  }

  // One certified continuation step from `from` to ladder coordinate s2.
  Result<TraceRung<S>> step(const TraceRung<S>& from, const Dyadic& s2, bool want_exact) {
    bool saw_zero_grad = false;
    StepOptions sopt;
    sopt.cruise_bits = opt_.cruise_bits;
    sopt.start_bits = opt_.start_bits;
    sopt.max_bits = opt_.max_bits;
    long p0 = S::clamp_prec(opt_.start_bits);
    for (long p = p0; p <= std::min(opt_.max_bits, 4 * p0);
         p *= (S::arbitrary_precision ? 2 : opt_.max_bits)) {
      bool geometric = false;
      auto st = log_step(f_, from.z, s2 - from.s, p, sopt, &saw_zero_grad, &geometric);
      if (!st.ok()) {
        if (geometric) break;
        continue;
      }
      if (opt_.tube_cap_below >= 0 && s2.to_double() < opt_.tube_cap_below &&
          S::cmp(st->seg_rad, rad_pow2<S>(-opt_.tube_bits)) > 0)
        return Result<TraceRung<S>>::fail(Status::ContinuationStalled, "tube too wide");
      TraceRung<S> out;
      out.s = s2;
      out.z = st->z;
      out.seg_rad = st->seg_rad;
      out.level = st->level;
      out.exact = false;
      if (want_exact) {
        if (!exactify(out, p))
          return Result<TraceRung<S>>::fail(Status::PrecisionExhausted, "exact re-anchor");
      }
      return out;
    }
    return Result<TraceRung<S>>::fail(
        saw_zero_grad ? Status::NearSeparatrix : Status::ContinuationStalled,
        "step " + from.s.str() + " -> " + s2.str());
  }

  // Re-anchor a rung against the exact target and refine to vert_bits.
  bool exactify(TraceRung<S>& rung, long p) {
    long m2 = exact_level(rung.s);
    if (m2 < 0) return false;
    auto fnx = exact_fn(m2, rung.s);
    CBall<S> Dx = rung.z;
    Dx.r = rad_mul<S>(Dx.r, S::from_double(3.0, kRadPrec));
    auto KX = krawczyk_step<S>(fnx, Dx, p);
    if (!KX) {
      Dx.r = rad_mul<S>(rung.z.r, S::from_double(8.0, kRadPrec));
      KX = krawczyk_step<S>(fnx, Dx, p);
    }
    if (!KX) return false;
    long rb = scale_bits(*KX, opt_.vert_bits);
    auto xr = krawczyk_refine<S>(fnx, *KX, rb, p, opt_.max_bits);
    rung.z = xr.ok() ? *xr : *KX;
    rung.level = m2;
    rung.exact = true;
    return true;
  }

  // Descend the ladder coordinate from s_hi to s_lo (s_hi >= s_lo), with
  // automatic step halving. Records every accepted rung. Coordinates listed
  // in `must_hit` (descending) are landed on exactly and re-anchored.
  Result<std::vector<TraceRung<S>>> run_down(const Dyadic& s_hi, const Dyadic& s_lo,
                                             const std::vector<Dyadic>& must_hit = {}) {
    std::vector<TraceRung<S>> rungs;
    Dyadic anchor_s = s_hi;
    double ap = anchor_pot() - pot_offset_;
    Dyadic ap_d = Dyadic::from_double(ap);
    if (anchor_s < ap_d) anchor_s = ap_d;
    auto a = anchor(anchor_s);
    if (!a.ok()) return Result<std::vector<TraceRung<S>>>::fail(a.status, a.detail);
    TraceRung<S> cur = *a;
    rungs.push_back(cur);
    size_t hit_idx = 0;
    while (hit_idx < must_hit.size() && !(must_hit[hit_idx] < cur.s)) ++hit_idx;
    long steps = 0;
    int since_exact = 0;
    double frac = 0.05;  // accepted step size as a fraction of the potential
    while (s_lo < cur.s) {
      if (++steps > opt_.max_steps)
        return Result<std::vector<TraceRung<S>>>::fail(Status::ContinuationStalled,
                                                       "step budget exhausted");
      double cs = cur.s.to_double();
      double pot = pot_offset_ + cs;
      double dec = pot * std::min(0.5, frac * 2);
      Dyadic gap = cur.s - s_lo;  // exact
      Dyadic next = gap.to_double() <= dec * 1.5 ? s_lo : cur.s - Dyadic::from_double(dec);
      if (next < s_lo) next = s_lo;
      bool hit = false;
      if (hit_idx < must_hit.size() && !(must_hit[hit_idx] < next)) {
        next = must_hit[hit_idx];
        hit = true;
      }
      if (next == s_lo) hit = true;
      bool want_exact = hit || ++since_exact >= opt_.exactify_every;
      Result<TraceRung<S>> st = step(cur, next, want_exact);
      int halvings = 0;
      while (!st.ok() && halvings < opt_.max_halvings) {
        next = (cur.s + next).half();  // shrink the step toward cur.s
        hit = hit_idx < must_hit.size() && next == must_hit[hit_idx];
        want_exact = hit || since_exact >= opt_.exactify_every;
        st = step(cur, next, want_exact);
        ++halvings;
      }
      if (!st.ok()) return Result<std::vector<TraceRung<S>>>::fail(st.status, st.detail);
      if (st->exact) since_exact = 0;
      frac = std::max(1e-12, (cs - st->s.to_double()) / pot);
      cur = *st;
      if (getenv("POLYDYN_TRACE_DEBUG"))
        fprintf(stderr, "trace: step %ld s=%.8g frac=%.4g halvings=%d r=%.3g lvl=%ld%s\n",
                steps, cur.s.to_double(), frac, halvings, S::to_double(cur.z.r), cur.level,
                cur.exact ? " exact" : "");
      if (hit_idx < must_hit.size() && cur.s == must_hit[hit_idx]) ++hit_idx;
      rungs.push_back(cur);
    }
    return rungs;
  }

  const TraceOptions& options() const { return opt_; }

  // F(z) = d^-m log(chi_m(z)/W(m, s)): the exact-target equation in the
  // same logarithmic form as the stepping certificate.
  auto exact_fn(long m, const Dyadic& s) {
    RBall<S> inv_dm{S::pow_si(S::from_si(f_.degree, 128), -m, 128, Rnd::N), S::zero(kRadPrec)};
    inv_dm.r = ulp_err<S>(inv_dm.c, 128);
    return [this, m, s, inv_dm](const CBall<S>& zb, long pp) -> FnEval<S> {
      CBall<S> Wp = target_(m, s, pp);
      IntrinsicEval<S> ce = eval_at_level(f_, zb, m, pp, opt_.vert_bits + 10, true);
      if (!ce.ok || !Wp.is_valid())
        return {CBall<S>::indeterminate(), CBall<S>::indeterminate()};
      CBall<S> ratio = cdiv(ce.chi, Wp, pp);
      CBall<S> val = CBall<S>::indeterminate();
      if (ratio.is_valid() && clear_of_cut(ratio)) val = cmul_real(clog(ratio, pp), inv_dm, pp);
      return {val, ce.H};
    };
  }

 private:
  const MonicPoly<S>& f_;
  TraceTarget<S> target_;
  double pot_offset_;
  TraceOptions opt_;
  double zone_log_;
  double near_log_;
};

// ----------------------------------------------------------- gradient flow --

template <class S>
struct FlowStep {
  CBall<S> z;          // certified point on the flow line
  RBall<S> potential;  // enclosure of G at this point
  typename S::Real seg_rad;
};

template <class S>
struct FlowPath {
  std::vector<FlowStep<S>> steps;  // potential strictly increases
  RBall<S> angle_turns;            // external angle measured at the far end
  RBall<S> start_potential;
  long escape_steps = 0;
};

struct FlowOptions {
  long point_bits = 46;
  long start_bits = 96;
  long max_bits = 1 << 13;
  long max_steps = 100000;
  int max_halvings = 46;
};

// Follow the gradient flow of G from an escaping point up to the near zone
// and measure the external angle there. The flow line is the external ray
// through z, so the measured angle is the external angle of z itself.
template <class S>
Result<FlowPath<S>> flow_to_infinity(const MonicPoly<S>& f, const CBall<S>& z0,
                                     FlowOptions opt = {}) {
  double stop_log = std::log(std::max(2.0 * S::to_double(escape_radius(f), Rnd::U), 65536.0));
  bool saw_zero_grad = false;
  StepOptions sopt;
  sopt.cruise_bits = opt.point_bits;
  sopt.start_bits = opt.start_bits;
  sopt.max_bits = opt.max_bits;
  for (long p = S::clamp_prec(opt.start_bits); p <= opt.max_bits;
       p *= (S::arbitrary_precision ? 2 : opt.max_bits)) {
    FlowPath<S> path;
    auto pot0 = potential_from_chain(f, z0, p, opt.point_bits + 4);
    if (!pot0.ok()) {
      if (!S::arbitrary_precision) break;
      continue;
    }
    {
      ZoneChain<S> c0 = chain_to_zone(f, z0, p, false);
      path.escape_steps = c0.ok ? c0.j : 0;
    }
    path.start_potential = *pot0;
    CBall<S> cur = z0;
    path.steps.push_back({cur, *pot0, S::zero(kRadPrec)});
    bool done = false, failed = false;
    double pot_hat = S::to_double(pot0->c);
    double step_frac = 0.05;
    long guard = 0;
    while (!done && !failed) {
      if (++guard > opt.max_steps) {
        failed = true;
        break;
      }
      if (pot_hat >= stop_log * 1.02 &&
          S::cmp(disk_mag_lb(cur), product_zone_radius(f)) >= 0) {
        done = true;
        break;
      }
      Dyadic dv = Dyadic::from_double(pot_hat * std::min(0.5, step_frac * 2));
      bool stepped = false;
      for (int halve = 0; halve <= opt.max_halvings; ++halve, dv = dv.half()) {
        auto st = log_step(f, cur, dv, p, sopt, &saw_zero_grad);
        if (!st.ok()) continue;
        // reject a step that fattens the state enough to endanger later steps
        typename S::Real fat =
            rad_mul<S>(rad_max<S>(S::from_si(1, kRadPrec), mag_ub(st->z)), rad_pow2<S>(-20));
        if (S::cmp(st->z.r, fat) > 0) continue;
        auto potn = potential_from_chain(f, st->z, p, opt.point_bits + 4);
        if (!potn.ok()) continue;
        path.steps.push_back({st->z, *potn, st->seg_rad});
        step_frac = dv.to_double() / pot_hat;
        cur = st->z;
        pot_hat = S::to_double(potn->c);
        stepped = true;
        break;
      }
      if (!stepped) failed = true;
      if (getenv("POLYDYN_FLOW_DEBUG"))
        fprintf(stderr, "flow: guard=%ld pot=%.5f frac=%.4g stepped=%d r=%.3g\n", guard, pot_hat,
                step_frac, stepped ? 1 : 0, S::to_double(cur.r));
    }
    if (done) {
      auto ang = external_angle_inf(f, cur, p, opt.point_bits);
      if (ang.ok()) {
        path.angle_turns = *ang;
        return path;
      }
    }
    if (!S::arbitrary_precision) break;
  }
  return Result<FlowPath<S>>::fail(
      saw_zero_grad ? Status::NearSeparatrix : Status::ContinuationStalled, "flow");
}

}  // namespace polydyn
