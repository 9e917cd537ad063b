// Test-only oracles: plain high-precision complex arithmetic (no balls, no
// radius bookkeeping) used to independently check enclosure containment.
#pragma once

#include <mpfr.h>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

// Minimal complex number over mpfr at a fixed precision, round-to-nearest.
class BigC {
 public:
  explicit BigC(long prec = 256) : prec_(prec) {
    mpfr_init2(re_, prec);
    mpfr_init2(im_, prec);
    mpfr_set_zero(re_, 1);
    mpfr_set_zero(im_, 1);
  }
  BigC(double x, double y, long prec = 256) : BigC(prec) {
    mpfr_set_d(re_, x, MPFR_RNDN);
    mpfr_set_d(im_, y, MPFR_RNDN);
  }
  BigC(const BigC& o) : BigC(o.prec_) {
    mpfr_set(re_, o.re_, MPFR_RNDN);
    mpfr_set(im_, o.im_, MPFR_RNDN);
  }
  BigC& operator=(const BigC& o) {
    mpfr_set_prec(re_, o.prec_);
    mpfr_set_prec(im_, o.prec_);
    prec_ = o.prec_;
    mpfr_set(re_, o.re_, MPFR_RNDN);
    mpfr_set(im_, o.im_, MPFR_RNDN);
    return *this;
  }
  ~BigC() {
    mpfr_clear(re_);
    mpfr_clear(im_);
  }

  long prec() const { return prec_; }
  mpfr_srcptr re() const { return re_; }
  mpfr_srcptr im() const { return im_; }
  mpfr_ptr re() { return re_; }
  mpfr_ptr im() { return im_; }

  double re_d() const { return mpfr_get_d(re_, MPFR_RNDN); }
  double im_d() const { return mpfr_get_d(im_, MPFR_RNDN); }

  friend BigC operator+(const BigC& a, const BigC& b) {
    BigC r(a.prec_);
    mpfr_add(r.re_, a.re_, b.re_, MPFR_RNDN);
    mpfr_add(r.im_, a.im_, b.im_, MPFR_RNDN);
    return r;
  }
  friend BigC operator-(const BigC& a, const BigC& b) {
    BigC r(a.prec_);
    mpfr_sub(r.re_, a.re_, b.re_, MPFR_RNDN);
    mpfr_sub(r.im_, a.im_, b.im_, MPFR_RNDN);
    return r;
  }
  friend BigC operator*(const BigC& a, const BigC& b) {
    BigC r(a.prec_);
    mpfr_fmms(r.re_, a.re_, b.re_, a.im_, b.im_, MPFR_RNDN);
    mpfr_fmma(r.im_, a.re_, b.im_, a.im_, b.re_, MPFR_RNDN);
    return r;
  }
  friend BigC operator/(const BigC& a, const BigC& b) {
    BigC r(a.prec_);
    mpfr_t den, t;
    mpfr_init2(den, a.prec_);
    mpfr_init2(t, a.prec_);
    mpfr_fmma(den, b.re_, b.re_, b.im_, b.im_, MPFR_RNDN);
    mpfr_fmma(t, a.re_, b.re_, a.im_, b.im_, MPFR_RNDN);
    mpfr_div(r.re_, t, den, MPFR_RNDN);
    mpfr_fmms(t, a.im_, b.re_, a.re_, b.im_, MPFR_RNDN);
    mpfr_div(r.im_, t, den, MPFR_RNDN);
    mpfr_clear(den);
    mpfr_clear(t);
    return r;
  }

  double abs_d() const {
    mpfr_t t;
    mpfr_init2(t, prec_);
    mpfr_hypot(t, re_, im_, MPFR_RNDN);
    double d = mpfr_get_d(t, MPFR_RNDN);
    mpfr_clear(t);
    return d;
  }

  BigC sqrt() const {  // principal branch
    BigC r(prec_);
    mpfr_t m, u;
    mpfr_init2(m, prec_);
    mpfr_init2(u, prec_);
    mpfr_hypot(m, re_, im_, MPFR_RNDN);
    if (mpfr_sgn(re_) >= 0) {
      mpfr_add(u, m, re_, MPFR_RNDN);
      mpfr_div_2si(u, u, 1, MPFR_RNDN);
      mpfr_sqrt(u, u, MPFR_RNDN);
      mpfr_set(r.re_, u, MPFR_RNDN);
      if (mpfr_zero_p(u))
        mpfr_set_zero(r.im_, 1);
      else {
        mpfr_mul_2si(u, u, 1, MPFR_RNDN);
        mpfr_div(r.im_, im_, u, MPFR_RNDN);
      }
    } else {
      mpfr_sub(u, m, re_, MPFR_RNDN);
      mpfr_div_2si(u, u, 1, MPFR_RNDN);
      mpfr_sqrt(u, u, MPFR_RNDN);
      if (mpfr_sgn(im_) >= 0)
        mpfr_set(r.im_, u, MPFR_RNDN);
      else
        mpfr_neg(r.im_, u, MPFR_RNDN);
      mpfr_mul_2si(u, u, 1, MPFR_RNDN);
      mpfr_abs(r.re_, im_, MPFR_RNDN);
      mpfr_div(r.re_, r.re_, u, MPFR_RNDN);
    }
    mpfr_clear(m);
    mpfr_clear(u);
    return r;
  }

  BigC exp() const {
    BigC r(prec_);
    mpfr_t e, c, s;
    mpfr_init2(e, prec_);
    mpfr_init2(c, prec_);
    mpfr_init2(s, prec_);
    mpfr_exp(e, re_, MPFR_RNDN);
    mpfr_sin_cos(s, c, im_, MPFR_RNDN);
    mpfr_mul(r.re_, e, c, MPFR_RNDN);
    mpfr_mul(r.im_, e, s, MPFR_RNDN);
    mpfr_clear(e);
    mpfr_clear(c);
    mpfr_clear(s);
    return r;
  }

  BigC log() const {  // principal branch
    BigC r(prec_);
    mpfr_t m;
    mpfr_init2(m, prec_);
    mpfr_hypot(m, re_, im_, MPFR_RNDN);
    mpfr_log(r.re_, m, MPFR_RNDN);
    mpfr_atan2(r.im_, im_, re_, MPFR_RNDN);
    mpfr_clear(m);
    return r;
  }

 private:
  long prec_;
  mpfr_t re_, im_;
};

// e^{2 pi i t} at high precision.
inline BigC unit_cis(double t, long prec = 256) {
  BigC r(prec);
  mpfr_t tp, ang;
  mpfr_init2(tp, prec);
  mpfr_init2(ang, prec);
  mpfr_const_pi(tp, MPFR_RNDN);
  mpfr_mul_2si(tp, tp, 1, MPFR_RNDN);
  mpfr_set_d(ang, t, MPFR_RNDN);
  mpfr_mul(ang, ang, tp, MPFR_RNDN);
  mpfr_t c, s;
  mpfr_init2(c, prec);
  mpfr_init2(s, prec);
  mpfr_sin_cos(s, c, ang, MPFR_RNDN);
  mpfr_set(r.re(), c, MPFR_RNDN);
  mpfr_set(r.im(), s, MPFR_RNDN);
  mpfr_clears(tp, ang, c, s, static_cast<mpfr_ptr>(nullptr));
  return r;
}

}  // namespace oracle
