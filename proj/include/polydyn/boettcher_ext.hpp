// Boettcher coordinate beyond the near zone: the gradient-flow extension to
// V_f, the certified inverse, and equipotential sampling.
#pragma once

#include "polydyn/continuation.hpp"

#include <vector>

namespace polydyn {

// phi_f(z) on V_f: near infinity via the product; elsewhere via the flow
// extension exp(G(z)) e^{2 pi i angle}, the angle measured at the flow's far
// end (flow lines are external rays, so the angle is z's external angle).
template <class S>
Result<BoettcherEval<S>> boettcher_extended(const MonicPoly<S>& f, const CBall<S>& z,
                                            long out_bits, GreenOptions gopt = {}) {
  if (z.is_valid() && S::cmp(disk_mag_lb(z), escape_radius(f)) > 0) {
    auto near = boettcher_near_infinity(f, z, out_bits);
    if (near.ok()) return near;
  }
  auto g = green(f, z, out_bits + 8, gopt);
  if (!g.ok()) return Result<BoettcherEval<S>>::fail(g.status, g.detail);
  double pot = S::to_double(g->value.c);
  long extra = 8;
  if (pot > 0) extra += static_cast<long>(pot * 1.4426950408889634) + 2;  // log2 e^G
  FlowOptions fopt;
  fopt.point_bits = out_bits + extra;
  for (int attempt = 0; attempt < 4; ++attempt) {
    auto flow = flow_to_infinity(f, z, fopt);
    if (!flow.ok()) return Result<BoettcherEval<S>>::fail(flow.status, flow.detail);
    CBall<S> val = cexp_polar(g->value, flow->angle_turns, S::clamp_prec(fopt.point_bits + 16));
    if (val.is_valid() && S::cmp(val.r, rad_pow2<S>(-out_bits)) <= 0) {
      BoettcherEval<S> ev;
      ev.value = val;
      ev.potential = g->value;
      ev.route = BoettcherRoute::Flowed;
      return ev;
    }
    fopt.point_bits *= 2;
  }
  return Result<BoettcherEval<S>>::fail(Status::PrecisionExhausted, "extended value");
}

// z with phi_f(z) = w, via certified continuation from the near zone down
// the ray through w. Requires |w| certified > 1.
template <class S>
Result<CBall<S>> boettcher_inverse(const MonicPoly<S>& f, const CBall<S>& w, long out_bits,
                                   TraceOptions opt = {}) {
  if (!w.is_valid() || S::cmp(disk_mag_lb(w), S::from_si(1, kRadPrec)) <= 0)
    return Result<CBall<S>>::fail(Status::OutsideValidity, "|w| not certified > 1");
  opt.vert_bits = out_bits + 6;
  double v_hat = std::log(S::to_double(mag_lb(w), Rnd::D));
  Continuation<S> trace(f, power_target(f, w), v_hat, opt);
  Dyadic s0 = Dyadic::from_double(std::max(0.0, trace.anchor_pot() - v_hat));
  Result<std::vector<TraceRung<S>>> rungs = trace.run_down(s0, Dyadic());
  if (!rungs.ok()) {
    Status st = rungs.status == Status::ContinuationStalled ? Status::InversionUnresolved
                                                            : rungs.status;
    return Result<CBall<S>>::fail(st, rungs.detail);
  }
  if (!meets_bits(rungs->back().z, out_bits))
    return Result<CBall<S>>::fail(Status::PrecisionExhausted, "inverse enclosure too wide");
  return rungs->back().z;
}

// m certified samples of the equipotential G^{-1}(v): the points
// phi^{-1}(e^{v + 2 pi i j/m}), j = 0..m-1.
template <class S>
Result<std::vector<CBall<S>>> equipotential(const MonicPoly<S>& f, const Dyadic& v, long m,
                                            long out_bits, TraceOptions opt = {}) {
  if (!(Dyadic() < v) || m <= 0)
    return Result<std::vector<CBall<S>>>::fail(Status::OutsideValidity, "level must be > 0");
  opt.vert_bits = out_bits + 6;
  std::vector<CBall<S>> pts;
  for (long j = 0; j < m; ++j) {
    Continuation<S> trace(f, ray_target<S>(f, Angle(j, m)), 0.0, opt);
    auto rungs = trace.run_down(v, v);
    if (!rungs.ok()) return Result<std::vector<CBall<S>>>::fail(rungs.status, rungs.detail);
    pts.push_back(rungs->back().z);
  }
  return pts;
}

}  // namespace polydyn
