// Outcome carrier for operations whose failure modes are a computational
// verdict, not a bug: "unresolved" and friends are first-class results.
#pragma once

#include <optional>
#include <string>
#include <utility>

namespace polydyn {

enum class Status {
  Ok,
  Indeterminate,        // enclosure touches a singularity or branch cut
  NeedsRefinement,      // input precision insufficient for requested output
  PrecisionExhausted,   // precision ladder hit its ceiling
  Unresolved,           // semi-decision did not certify within the cap
  OutsideValidity,      // precondition region not certified
  NearSeparatrix,       // gradient enclosure contains 0
  ContinuationStalled,  // Newton continuation failed after max subdivisions
  MayBifurcate,         // potential range crosses a critical value level
  LandingNotCertified,  // ray segment never certified inside trapping disk
  PairingUnresolved,    // angle enclosure straddles candidates at the cap
  Degenerate,           // degenerate configuration (e.g. critical fixed point)
  Unseparated,          // root cluster not separable at working precision
  InversionUnresolved,  // certified inversion failed after max refinements
  Inconsistent,         // internal invariant violated; indicates a bug
};

inline const char* status_name(Status s) {
  switch (s) {
    case Status::Ok: return "ok";
    case Status::Indeterminate: return "indeterminate";
    case Status::NeedsRefinement: return "needs refinement";
    case Status::PrecisionExhausted: return "precision exhausted";
    case Status::Unresolved: return "unresolved";
    case Status::OutsideValidity: return "outside validity region";
    case Status::NearSeparatrix: return "near separatrix";
    case Status::ContinuationStalled: return "continuation stalled";
    case Status::MayBifurcate: return "ray may bifurcate";
    case Status::LandingNotCertified: return "landing not certified";
    case Status::PairingUnresolved: return "pairing unresolved";
    case Status::Degenerate: return "degenerate";
    case Status::Unseparated: return "unseparated";
    case Status::InversionUnresolved: return "inversion unresolved";
    case Status::Inconsistent: return "internal inconsistency";
  }
  return "?";
}

template <class T>
struct Result {
  std::optional<T> value;
  Status status = Status::Ok;
  std::string detail;

  Result() = default;
  Result(T v) : value(std::move(v)) {}

  static Result success(T v) { return Result(std::move(v)); }
  static Result fail(Status s, std::string d = {}) {
    Result r;
    r.status = s;
    r.detail = std::move(d);
    return r;
  }

  bool ok() const { return value.has_value(); }
  explicit operator bool() const { return ok(); }
  const T& operator*() const { return *value; }
  T& operator*() { return *value; }
  const T* operator->() const { return &*value; }
  T* operator->() { return &*value; }
  std::string message() const {
    std::string m = status_name(status);
    if (!detail.empty()) m += ": " + detail;
    return m;
  }
};

}  // namespace polydyn
