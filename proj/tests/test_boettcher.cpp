#include "polydyn/boettcher_ext.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace polydyn;
using S = MpfrScalar;
using C = CBall<S>;
using R = RBall<S>;

namespace {

MonicPoly<S> chebyshev() { return MonicPoly<S>::quadratic(cball_from_double<S>(-2, 0, 64), 64); }

double dd(const typename S::Real& x) { return S::to_double(x); }

// phi for z^2-2: inverse of w + 1/w, i.e. phi(z) = (z + sqrt(z^2-4))/2.
oracle::BigC cheb_phi(const oracle::BigC& z) {
  oracle::BigC four(4, 0, z.prec());
  oracle::BigC s = (z * z - four).sqrt();
  oracle::BigC w = (z + s) / oracle::BigC(2, 0, z.prec());
  if (w.abs_d() < 1.0) w = (z - s) / oracle::BigC(2, 0, z.prec());
  return w;
}

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

TEST_CASE("pure power: phi is the identity") {
  auto f = MonicPoly<S>::pure_power(2, 64);
  for (double x : {1.5, 2.0, 100.0}) {
    auto ev = boettcher_near_infinity(f, cball_from_double<S>(x, 0.5, 64), 45);
    REQUIRE(ev.ok());
    CHECK(std::abs(dd(ev->value.re) - x) < 1e-13);
    CHECK(std::abs(dd(ev->value.im) - 0.5) < 1e-13);
  }
}

TEST_CASE("Chebyshev phi against the closed form") {
  auto f = chebyshev();
  auto ev = boettcher_near_infinity(f, cball_from_double<S>(10, 0, 64), 45);
  REQUIRE(ev.ok());
  double want = 5.0 + 2.0 * std::sqrt(6.0);  // phi(10)
  CHECK(std::abs(dd(ev->value.re) - want) < 1e-12);
  CHECK(ball_contains_bigc(ev->value, cheb_phi(oracle::BigC(10, 0, 320))));
  CHECK(S::to_double(ev->value.r, Rnd::U) <= std::ldexp(1.0, -45));

  // at |z| = 9 > R = 8 the product also applies
  auto ev9 = boettcher_near_infinity(f, cball_from_double<S>(9, 0, 64), 45);
  REQUIRE(ev9.ok());
  CHECK(ball_contains_bigc(ev9->value, cheb_phi(oracle::BigC(9, 0, 320))));
}

TEST_CASE("truncation bound honesty on random cubics") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int iter = 0; iter < 10; ++iter) {
    auto f = MonicPoly<S>::cubic(cball_from_double<S>(u(rng), u(rng), 96),
                                 cball_from_double<S>(u(rng), u(rng), 96), 96);
    double R2 = 2.0 * S::to_double(escape_radius(f), Rnd::U);
    C z = cball_from_double<S>(R2, 0, 96);
    for (long k : {2L, 4L, 6L}) {
      auto pk = boettcher_truncated(f, z, k, 160);
      auto pk10 = boettcher_truncated(f, z, k + 10, 160);
      REQUIRE(pk.ok());
      REQUIRE(pk10.ok());
      C diff = csub(*pk, *pk10, 160);
      double dmag = S::to_double(rad_add<S>(mag_ub(diff), diff.r), Rnd::U);
      double bound = S::to_double(boettcher_tail_bound_level(f, z, k), Rnd::U);
      CHECK(dmag <= bound);
    }
  }
}

TEST_CASE("conjugacy |phi(f z) - phi(z)^d| on certified points") {
  auto f = chebyshev();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-12.0, 12.0);
  int done = 0;
  while (done < 40) {
    C z = cball_from_double<S>(u(rng), u(rng), 96);
    if (S::cmp(disk_mag_lb(z), escape_radius(f)) <= 0) continue;
    auto a = boettcher_near_infinity(f, poly_eval(f, z, 96), 46);
    auto b = boettcher_near_infinity(f, z, 46);
    if (!a.ok() || !b.ok()) continue;
    C lhs = a->value;
    C rhs = cmul(b->value, b->value, 96);
    CHECK(!cball_disjoint(lhs, rhs));
    ++done;
  }
}

TEST_CASE("tangency at infinity: |phi(z)/z - 1| decreases") {
  auto f = chebyshev();
  double prev = 1e9;
  for (double x : {1e2, 1e4, 1e6}) {
    auto ev = boettcher_near_infinity(f, cball_from_double<S>(x, 0, 64), 50);
    REQUIRE(ev.ok());
    C ratio = cdiv(ev->value, cball_from_double<S>(x, 0, 64), 96);
    C dev = csub(ratio, cball_from_double<S>(1, 0, 96), 96);
    double m = S::to_double(rad_add<S>(mag_ub(dev), dev.r), Rnd::U);
    CHECK(m < prev);
    prev = m;
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("flow from a real point of z^2 stays real and reaches the near zone") {
  auto f = MonicPoly<S>::pure_power(2, 64);
  auto flow = flow_to_infinity(f, cball_from_double<S>(2, 0, 64));
  REQUIRE(flow.ok());
  REQUIRE(flow->steps.size() >= 2);
  double prev_pot = -1;
  for (const auto& st : flow->steps) {
    CHECK(std::abs(dd(st.z.im)) <= S::to_double(st.z.r, Rnd::U) + 1e-20);
    double pot = dd(st.potential.c);
    CHECK(pot > prev_pot);
    prev_pot = pot;
  }
  // angle of the positive real ray is 0 (mod 1)
  double ang = dd(flow->angle_turns.c);
  CHECK(std::abs(ang - std::round(ang)) < 1e-9);
  // start potential = log 2
  CHECK(std::abs(dd(flow->start_potential.c) - std::log(2.0)) < 1e-10);
}

TEST_CASE("flow along the Chebyshev angle-0 ray") {
  auto f = chebyshev();
  auto flow = flow_to_infinity(f, cball_from_double<S>(3, 0, 64));
  REQUIRE(flow.ok());
  for (const auto& st : flow->steps) {
    CHECK(dd(st.z.re) >= 2.0);
    CHECK(std::abs(dd(st.z.im)) <= S::to_double(st.z.r, Rnd::U) + 1e-20);
  }
  double ang = dd(flow->angle_turns.c);
  CHECK(std::abs(ang - std::round(ang)) < 1e-9);
}

TEST_CASE("flow along the Chebyshev imaginary ray has angle 1/4") {
  auto f = chebyshev();
  auto flow = flow_to_infinity(f, cball_from_double<S>(0, 3, 64));
  REQUIRE(flow.ok());
  double ang = dd(flow->angle_turns.c);
  ang -= std::floor(ang);
  CHECK(std::abs(ang - 0.25) < 1e-9);
}

TEST_CASE("extended value: pure power identity off the near zone") {
  auto f = MonicPoly<S>::pure_power(2, 64);
  // |z| = 1.2 < R = 4/3, so only the flow route applies
  auto ev = boettcher_extended(f, cball_from_double<S>(1.2, 0, 64), 40);
  REQUIRE(ev.ok());
  CHECK(ev->route == BoettcherRoute::Flowed);
  CHECK(std::abs(dd(ev->value.re) - 1.2) < 1e-10);
  CHECK(std::abs(dd(ev->value.im)) < 1e-10);
  CHECK(S::to_double(ev->value.r, Rnd::U) <= std::ldexp(1.0, -40));
}

TEST_CASE("extended value: Chebyshev phi(2.5) = 2") {
  auto f = chebyshev();
  auto ev = boettcher_extended(f, cball_from_double<S>(2.5, 0, 64), 40);
  REQUIRE(ev.ok());
  CHECK(std::abs(dd(ev->value.re) - 2.0) < 1e-10);
  CHECK(std::abs(dd(ev->value.im)) < 1e-10);
  // potential consistency: log|phi| = G
  auto g = green(f, cball_from_double<S>(2.5, 0, 64), 40);
  REQUIRE(g.ok());
  R logphi = rlog(cabs(ev->value, 96), 96);
  CHECK(rball_contains_zero(rsub(logphi, g->value, 96)));
}

TEST_CASE("extended agrees with the product in the overlap") {
  auto f = chebyshev();
  C z = cball_from_double<S>(11, 3, 64);
  auto a = boettcher_near_infinity(f, z, 42);
  REQUIRE(a.ok());
  // force the flow route by starting the extension from the same point
  auto g = green(f, z, 50);
  REQUIRE(g.ok());
  FlowOptions fopt;
  fopt.point_bits = 50;
  auto flow = flow_to_infinity(f, z, fopt);
  REQUIRE(flow.ok());
  C val = cexp_polar(g->value, flow->angle_turns, 96);
  CHECK(!cball_disjoint(val, a->value));
}

TEST_CASE("inverse: pure power identity") {
  auto f = MonicPoly<S>::pure_power(2, 64);
  auto z = boettcher_inverse(f, cball_from_double<S>(2, 1, 64), 42);
  REQUIRE(z.ok());
  CHECK(std::abs(dd(z->re) - 2.0) < 1e-11);
  CHECK(std::abs(dd(z->im) - 1.0) < 1e-11);
}

TEST_CASE("inverse: Chebyshev w + 1/w") {
  auto f = chebyshev();
  auto z = boettcher_inverse(f, cball_from_double<S>(2, 0, 64), 42);
  REQUIRE(z.ok());
  CHECK(std::abs(dd(z->re) - 2.5) < 1e-11);
  CHECK(std::abs(dd(z->im)) < 1e-11);

  // round trip through the extension
  auto ev = boettcher_extended(f, *z, 40);
  REQUIRE(ev.ok());
  oracle::BigC w(2, 0, 320);
  CHECK(ball_contains_bigc(ev->value, w));
}

TEST_CASE("inverse rejects |w| <= 1") {
  auto f = chebyshev();
  auto z = boettcher_inverse(f, cball_from_double<S>(0.5, 0.5, 64), 40);
  CHECK_FALSE(z.ok());
  CHECK(z.status == Status::OutsideValidity);
}

TEST_CASE("equipotential of z^2 at level log 2") {
  auto f = MonicPoly<S>::pure_power(2, 64);
  Dyadic v = Dyadic::from_double(std::log(2.0));
  auto pts = equipotential(f, v, 4, 42);
  REQUIRE(pts.ok());
  REQUIRE(pts->size() == 4);
  double want[4][2] = {{2, 0}, {0, 2}, {-2, 0}, {0, -2}};
  for (int j = 0; j < 4; ++j) {
    CHECK(std::abs(dd((*pts)[static_cast<size_t>(j)].re) - want[j][0]) < 1e-9);
    CHECK(std::abs(dd((*pts)[static_cast<size_t>(j)].im) - want[j][1]) < 1e-9);
  }
}

TEST_CASE("equipotential of Chebyshev at level log 2") {
  auto f = chebyshev();
  Dyadic v = Dyadic::from_double(std::log(2.0));
  auto pts = equipotential(f, v, 2, 42);
  REQUIRE(pts.ok());
  REQUIRE(pts->size() == 2);
  CHECK(std::abs(dd((*pts)[0].re) - 2.5) < 1e-9);
  CHECK(std::abs(dd((*pts)[1].re) + 2.5) < 1e-9);
  // green at each output contains the level
  for (const auto& z : *pts) {
    auto g = green(f, z, 40);
    REQUIRE(g.ok());
    R lvl = rball_from_dyadic<S>(v, 96);
    CHECK(rball_contains_zero(rsub(g->value, lvl, 96)));
  }
}
