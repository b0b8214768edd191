#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace hcmm {

class RootBracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bisection on [lo, hi] where f(lo) < 0 < f(hi). Stops when the bracket is
// narrower than `tol` or cannot shrink any further in double precision.
template <class F>
double bisect(F&& f, double lo, double hi, double tol = 1e-12) {
  double flo = f(lo);
  double fhi = f(hi);
  if (!(flo < 0.0 && fhi > 0.0)) {
    throw RootBracketError("bisect: no sign change on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
  }
  while (hi - lo > tol) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    (fm < 0.0 ? lo : hi) = mid;
  }
  return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

}  // namespace hcmm
