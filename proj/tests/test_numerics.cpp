#include "polydyn/numerics.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

using namespace polydyn;
using S = MpfrScalar;
using C = CBall<S>;
using R = RBall<S>;

namespace {

double rad_d(const C& b) { return S::to_double(b.r, Rnd::U); }

// Containment of an oracle value in a ball, with the comparison done in
// oracle arithmetic (distance at 4x precision vs radius).
bool ball_contains_bigc(const C& b, const oracle::BigC& v) {
  mpfr_t dx, dy, d;
  long prec = v.prec();
  mpfr_init2(dx, prec);
  mpfr_init2(dy, prec);
  mpfr_init2(d, prec);
  mpfr_sub(dx, v.re(), b.re.raw(), MPFR_RNDU);
  mpfr_sub(dy, v.im(), b.im.raw(), MPFR_RNDU);
  mpfr_hypot(d, dx, dy, MPFR_RNDU);
  int cmp = mpfr_cmp(d, b.r.raw());
  mpfr_clears(dx, dy, d, static_cast<mpfr_ptr>(nullptr));
  return cmp <= 0;
}

}  // namespace

TEST_CASE("exact unit product stays exact") {
  C one = cball_from_double<S>(1.0, 0.0, 64);
  auto r = enc_apply<S>(EncOp::Mul, {one, one}, 64);
  REQUIRE(r.ok());
  CHECK(r->is_exact());
  CHECK(S::to_double(r->re) == 1.0);
  CHECK(S::to_double(r->im) == 0.0);
}

TEST_CASE("addition adds radii") {
  C a = cball_from_double<S>(1.0, 0.0, 64);
  a.r = S::mul_2si(S::from_si(1, kRadPrec), -10, kRadPrec, Rnd::N);
  C b = cball_from_double<S>(2.0, 0.0, 64);
  b.r = S::mul_2si(S::from_si(1, kRadPrec), -10, kRadPrec, Rnd::N);
  auto r = enc_apply<S>(EncOp::Add, {a, b}, 64);
  REQUIRE(r.ok());
  CHECK(S::to_double(r->re) == 3.0);
  double rr = rad_d(*r);
  CHECK(rr >= std::ldexp(1.0, -9));
  CHECK(rr <= std::ldexp(1.0, -9) * (1.0 + 1e-9));
}

TEST_CASE("sqrt enclosure of (4 +- 1e-6)") {
  C a = cball_from_double<S>(4.0, 0.0, 64);
  a.r = S::from_double(1e-6, kRadPrec);
  auto r = enc_apply<S>(EncOp::Sqrt, {a}, 64);
  REQUIRE(r.ok());
  // brute-force oracle: sample the input disk boundary and interior
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);
  std::uniform_real_distribution<double> rad(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    double t = ang(rng), s = rad(rng) * 0.999999e-6;
    oracle::BigC z(4.0 + s * std::cos(t), s * std::sin(t));
    CHECK(ball_contains_bigc(*r, z.sqrt()));
  }
  CHECK(rad_d(*r) <= 1e-6);
  oracle::BigC two(2.0, 0.0);
  CHECK(ball_contains_bigc(*r, two));
}

TEST_CASE("division by an enclosure containing zero is indeterminate") {
  C one = cball_from_double<S>(1.0, 0.0, 64);
  C z = cball_from_double<S>(0.25, 0.0, 64);
  z.r = S::from_double(0.5, kRadPrec);
  auto r = enc_apply<S>(EncOp::Div, {one, z}, 64);
  CHECK_FALSE(r.ok());
  CHECK(r.status == Status::Indeterminate);
}

TEST_CASE("log straddling the branch cut is indeterminate") {
  C z = cball_from_double<S>(-1.0, 0.0, 64);
  z.r = S::from_double(0.25, kRadPrec);
  auto r = enc_apply<S>(EncOp::Log, {z}, 64);
  CHECK_FALSE(r.ok());
}

TEST_CASE("containment soundness over randomized op chains") {
  // 1e5 chains; the exact value (4x precision oracle) must stay inside.
  std::mt19937_64 rng(20260809);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  std::uniform_int_distribution<int> opd(0, 6);
  std::uniform_real_distribution<double> raddist(0.0, 0.01);
  const long wb = 64;
  long violations = 0;
  for (int chain = 0; chain < 100000; ++chain) {
    double x = coord(rng), y = coord(rng), rr = raddist(rng);
    double ox = x + rr * 0.7, oy = y - rr * 0.5;  // a point inside the ball
    C b = cball_from_double<S>(x, y, wb);
    b.r = S::from_double(rr, kRadPrec);
    oracle::BigC v(ox, oy);
    for (int step = 0; step < 4; ++step) {
      int op = opd(rng);
      C nb;
      oracle::BigC nv = v;
      switch (op) {
        case 0: {
          double cx = coord(rng), cy = coord(rng);
          C c = cball_from_double<S>(cx, cy, wb);
          nb = cadd(b, c, wb);
          nv = v + oracle::BigC(cx, cy);
          break;
        }
        case 1: {
          double cx = coord(rng), cy = coord(rng);
          C c = cball_from_double<S>(cx, cy, wb);
          nb = cmul(b, c, wb);
          nv = v * oracle::BigC(cx, cy);
          break;
        }
        case 2:
          nb = cmul(b, b, wb);
          nv = v * v;
          break;
        case 3:
          nb = cinv(b, wb);
          nv = oracle::BigC(1.0, 0.0) / v;
          break;
        case 4:
          nb = csqrt(b, wb);
          nv = v.sqrt();
          break;
        case 5:
          nb = cexp(b, wb);
          nv = v.exp();
          break;
        default:
          nb = clog(b, wb);
          nv = v.log();
          break;
      }
      if (!nb.is_valid()) break;  // indeterminate: fine, nothing to check
      if (!ball_contains_bigc(nb, nv)) ++violations;
      b = nb;
      v = nv;
      if (S::to_double(mag_ub(b)) > 1e6) break;  // keep exp in range
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("monotone refinement: doubling working bits never grows the radius") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  std::uniform_real_distribution<double> raddist(0.0, 0.1);
  for (long wb : {48L, 64L, 96L}) {
    for (int iter = 0; iter < 2000; ++iter) {
      double x = coord(rng), y = coord(rng), rr = raddist(rng);
      C a = cball_from_double<S>(x, y, wb);
      a.r = S::from_double(rr, kRadPrec);
      double cx = coord(rng), cy = coord(rng);
      C c = cball_from_double<S>(cx, cy, wb);
      for (EncOp op : {EncOp::Add, EncOp::Mul, EncOp::Div, EncOp::Sqrt, EncOp::Exp, EncOp::Log}) {
        std::vector<C> args =
            (op == EncOp::Add || op == EncOp::Mul || op == EncOp::Div)
                ? std::vector<C>{a, c}
                : std::vector<C>{a};
        auto lo = enc_apply<S>(op, args, wb);
        auto hi = enc_apply<S>(op, args, 2 * wb);
        if (!lo.ok() || !hi.ok()) continue;
        // hi radius <= lo radius * (1 + 2^-wb)
        R lor{lo->r, S::zero(kRadPrec)};
        R allowance = rmul(lor,
                           radd(rball_from_si<S>(1, 64),
                                {S::mul_2si(S::from_si(1, 64), -wb, 64, Rnd::N), S::zero(kRadPrec)},
                                64),
                           64);
        CHECK(S::cmp(hi->r, rball_upper(allowance, 64)) <= 0);
      }
    }
  }
}

TEST_CASE("lambda_from_theta at rational angles") {
  auto at0 = lambda_from_theta<S>(Angle(0, 1), 40);
  REQUIRE(at0.ok());
  CHECK(S::to_double(at0->re) == 1.0);
  CHECK(at0->is_exact());

  auto half = lambda_from_theta<S>(Angle(1, 2), 40);
  REQUIRE(half.ok());
  CHECK(std::abs(S::to_double(half->re) + 1.0) <= std::ldexp(1.0, -40));
  CHECK(rad_d(*half) <= std::ldexp(1.0, -40));
  oracle::BigC minus_one(-1.0, 0.0);
  CHECK(ball_contains_bigc(*half, minus_one));
}

TEST_CASE("lambda_from_theta at the golden mean") {
  RealStream<S> gm = [](long prec) { return golden_mean<S>(prec); };
  auto lam = lambda_from_theta<S>(gm, 48);
  REQUIRE(lam.ok());
  CHECK(rad_d(*lam) <= std::ldexp(1.0, -48));
  // high-precision trig oracle
  double theta = (std::sqrt(5.0) - 1.0) / 2.0;
  oracle::BigC want = oracle::unit_cis(theta, 320);
  CHECK(std::abs(S::to_double(lam->re) - want.re_d()) < 1e-9);
  CHECK(std::abs(S::to_double(lam->im) - want.im_d()) < 1e-9);
  CHECK(ball_contains_bigc(*lam, want));
  // leading digits per the oracle: -0.73736888 - 0.67549029 i
  CHECK(std::abs(S::to_double(lam->re)) > 0.7373);
  CHECK(std::abs(S::to_double(lam->re)) < 0.7375);
  CHECK(std::abs(S::to_double(lam->im)) > 0.6754);
  CHECK(std::abs(S::to_double(lam->im)) < 0.6756);
  // |center| within radius of 1
  double m = std::hypot(S::to_double(lam->re), S::to_double(lam->im));
  CHECK(std::abs(m - 1.0) <= 2 * rad_d(*lam) + 1e-15);
}

TEST_CASE("covers: point in a ball") {
  std::vector<C> cloud{cball_from_double<S>(0.0, 0.0, 64)};
  std::vector<RatBall> balls{{mpq_class(0), mpq_class(0), mpq_class(1)}};
  auto res = covers<S>(cloud, mpq_class(1, 1024), balls);
  CHECK(res.verdict == CoverVerdict::True);
}

TEST_CASE("covers: disjoint ball never certifies") {
  // unit circle sampled at 2^-6 against B(0, 1/2)
  std::vector<C> cloud;
  int n = 512;
  for (int k = 0; k < n; ++k) {
    double t = 2.0 * 3.14159265358979323846 * k / n;
    cloud.push_back(cball_from_double<S>(std::cos(t), std::sin(t), 64));
  }
  std::vector<RatBall> balls{{mpq_class(0), mpq_class(0), mpq_class(1, 2)}};
  auto res = covers<S>(cloud, mpq_class(1, 64), balls);
  CHECK(res.verdict == CoverVerdict::Unknown);
  CHECK(res.witness >= 0);
}

TEST_CASE("covers: segment by overlapping balls") {
  // [0,1] sampled at 2^-8; balls B(k/8, 1/4)
  std::vector<C> cloud;
  for (int j = 0; j <= 256; ++j)
    cloud.push_back(cball_from_mpq<S>(mpq_class(j, 256), mpq_class(0), 64));
  std::vector<RatBall> balls;
  for (int k = 0; k <= 8; ++k) balls.push_back({mpq_class(k, 8), mpq_class(0), mpq_class(1, 4)});
  auto res = covers<S>(cloud, mpq_class(1, 256), balls);
  CHECK(res.verdict == CoverVerdict::True);
}

TEST_CASE("covers never returns TRUE with an uncovered witness") {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<C> cloud;
    for (int i = 0; i < 20; ++i) cloud.push_back(cball_from_double<S>(u(rng), u(rng), 64));
    std::vector<RatBall> balls;
    for (int i = 0; i < 5; ++i) {
      balls.push_back({mpq_class(static_cast<long>(u(rng) * 64), 64),
                       mpq_class(static_cast<long>(u(rng) * 64), 64), mpq_class(1, 3)});
    }
    auto res = covers<S>(cloud, mpq_class(1, 128), balls);
    if (res.verdict == CoverVerdict::True) {
      // verify every point truly sits in some ball with slack
      for (const C& pt : cloud) {
        bool in = false;
        for (const RatBall& b : balls) {
          double dx = S::to_double(pt.re) - b.re.get_d();
          double dy = S::to_double(pt.im) - b.im.get_d();
          if (std::hypot(dx, dy) + 1.0 / 128 < b.radius.get_d()) in = true;
        }
        REQUIRE(in);
      }
    }
  }
}
