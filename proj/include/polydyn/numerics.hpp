// Enclosure operation dispatcher, unit-circle parameters from rotation
// numbers, and the covering semi-decision on finite Hausdorff samples.
#pragma once

#include "polydyn/ball.hpp"
#include "polydyn/rational.hpp"
#include "polydyn/result.hpp"

#include <functional>
#include <vector>

namespace polydyn {

enum class EncOp { Add, Sub, Mul, Div, Sqrt, Exp, Log, Abs, NthRoot };

// Applies one arithmetic step to enclosures at the given working precision.
// The output contains the exact image of every point of the inputs; a
// singular or cut-straddling input yields an indeterminate result.
template <class S>
Result<CBall<S>> enc_apply(EncOp op, const std::vector<CBall<S>>& args, long working_bits,
                           long root_n = 2) {
  long p = S::clamp_prec(working_bits);
  auto need = [&](size_t n) { return args.size() == n; };
  CBall<S> out;
  switch (op) {
    case EncOp::Add:
      if (!need(2)) return Result<CBall<S>>::fail(Status::Indeterminate, "arity");
      out = cadd(args[0], args[1], p);
      break;
    case EncOp::Sub:
      if (!need(2)) return Result<CBall<S>>::fail(Status::Indeterminate, "arity");
      out = csub(args[0], args[1], p);
      break;
    case EncOp::Mul:
      if (!need(2)) return Result<CBall<S>>::fail(Status::Indeterminate, "arity");
      out = cmul(args[0], args[1], p);
      break;
    case EncOp::Div:
      if (!need(2)) return Result<CBall<S>>::fail(Status::Indeterminate, "arity");
      out = cdiv(args[0], args[1], p);
      break;
    case EncOp::Sqrt:
      if (!need(1)) return Result<CBall<S>>::fail(Status::Indeterminate, "arity");
      out = csqrt(args[0], p);
      break;
    case EncOp::Exp:
      if (!need(1)) return Result<CBall<S>>::fail(Status::Indeterminate, "arity");
      out = cexp(args[0], p);
      break;
    case EncOp::Log:
      if (!need(1)) return Result<CBall<S>>::fail(Status::Indeterminate, "arity");
      out = clog(args[0], p);
      break;
    case EncOp::Abs:
      if (!need(1)) return Result<CBall<S>>::fail(Status::Indeterminate, "arity");
      out = cball_from_real(cabs(args[0], p));
      break;
    case EncOp::NthRoot:
      if (!need(1)) return Result<CBall<S>>::fail(Status::Indeterminate, "arity");
      out = cpow_rational(args[0], 1, root_n, p);
      break;
  }
  if (!out.is_valid())
    return Result<CBall<S>>::fail(Status::Indeterminate,
                                  "enclosure touches a branch cut or singularity");
  return out;
}

// A convergent sequence of real enclosures: stream(prec) must return a ball
// of radius at most 2^-prec around a fixed real number.
template <class S>
using RealStream = std::function<RBall<S>(long)>;

// (sqrt(5)-1)/2, the golden-mean rotation number.
template <class S>
RBall<S> golden_mean(long prec) {
  long p = S::clamp_prec(prec + 8);
  RBall<S> five = rball_from_si<S>(5, p);
  RBall<S> r = rsqrt(five, p);
  r = rsub(r, rball_from_si<S>(1, p), p);
  return rscale_2si(r, -1);
}

// Enclosure of e^{2 pi i theta} with radius <= 2^-out_bits, from an exact
// rational angle. |lambda| = 1 within the returned radius by construction.
template <class S>
Result<CBall<S>> lambda_from_theta(const Angle& theta, long out_bits) {
  for (long p = S::clamp_prec(out_bits + 16);; p *= 2) {
    CBall<S> z = cexp_polar(rball_from_si<S>(0, p), theta.ball<S>(p), p);
    if (z.is_valid() && S::cmp(z.r, S::mul_2si(S::from_si(1, kRadPrec), -out_bits, kRadPrec, Rnd::D)) <= 0)
      return z;
    if (p > 64 * (out_bits + 64) || !S::arbitrary_precision)
      return Result<CBall<S>>::fail(Status::NeedsRefinement, "lambda_from_theta");
  }
}

// Same from a convergent enclosure stream (non-rational rotation numbers).
template <class S>
Result<CBall<S>> lambda_from_theta(const RealStream<S>& theta, long out_bits) {
  for (long p = S::clamp_prec(out_bits + 16);; p *= 2) {
    RBall<S> t = theta(p);
    if (!t.is_valid()) return Result<CBall<S>>::fail(Status::NeedsRefinement, "stream");
    CBall<S> z = cexp_polar(rball_from_si<S>(0, p), t, p);
    if (z.is_valid() && S::cmp(z.r, S::mul_2si(S::from_si(1, kRadPrec), -out_bits, kRadPrec, Rnd::D)) <= 0)
      return z;
    if (p > 64 * (out_bits + 64) || !S::arbitrary_precision)
      return Result<CBall<S>>::fail(Status::NeedsRefinement, "lambda_from_theta");
  }
}

// Rational ball (section 2.1 style): rational center, positive rational radius.
struct RatBall {
  mpq_class re, im;
  mpq_class radius;  // > 0
};

enum class CoverVerdict { True, Unknown };

struct CoverResult {
  CoverVerdict verdict = CoverVerdict::Unknown;
  long witness = -1;  // index of an uncovered cloud point when Unknown
};

// Semi-decision for "the balls cover K", realized on a finite sample:
// cloud[i] encloses a sample point x_i of K and dist_H(samples, K) <= eps.
// TRUE is returned only when every x_i sits in some ball with slack > eps,
// which certifies that all of K is covered. UNKNOWN is never a "no".
template <class S>
CoverResult covers(const std::vector<CBall<S>>& cloud, const mpq_class& eps,
                   const std::vector<RatBall>& balls, long prec = 64) {
  long p = S::clamp_prec(prec);
  CoverResult res;
  RBall<S> slack = rball_from_mpq<S>(eps, p);
  for (size_t i = 0; i < cloud.size(); ++i) {
    bool covered = false;
    for (const RatBall& b : balls) {
      CBall<S> center = cball_from_mpq<S>(b.re, b.im, p);
      CBall<S> diff = csub(cloud[i], center, p);
      RBall<S> dist = cabs(diff, p);
      // need dist + eps < radius, certified
      RBall<S> lhs = radd(dist, slack, p);
      RBall<S> rad = rball_from_mpq<S>(b.radius, p);
      if (rball_certainly_lt(lhs, rad, p)) {
        covered = true;
        break;
      }
    }
    if (!covered) {
      res.witness = static_cast<long>(i);
      return res;
    }
  }
  res.verdict = CoverVerdict::True;
  return res;
}

}  // namespace polydyn
