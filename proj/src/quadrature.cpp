#include "hydronls/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hydronls/error.hpp"

namespace hydronls {

double quadrature_integrate(std::span<const double> samples, const Grid& grid) {
  if (samples.size() != grid.size()) {
    throw InvalidArgument("quadrature: sample count does not match grid");
  }
  const double sum = std::accumulate(samples.begin(), samples.end(), 0.0);
  if (!std::isfinite(sum)) throw InvalidArgument("quadrature: non-finite samples");
  return grid.cell_volume() * sum;
}

}  // namespace hydronls

namespace hydronls {
namespace {

struct SimpsonState {
  const std::function<double(double)>& f;
  int depth_exhausted = 0;

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol,
                 int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0) {
      ++depth_exhausted;
      return left + right + delta / 15.0;
    }
    // Tolerances below the rounding level of the partial sums cannot be met.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(left + right);
    if (std::abs(delta) <= 15.0 * std::max(tol, floor)) return left + right + delta / 15.0;
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
  }
};

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol,
                        int max_depth) {
  if (a == b) return 0.0;
  if (!(abs_tol > 0.0)) throw InvalidArgument("adaptive_simpson: tolerance must be positive");
  SimpsonState st{f};
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double value = st.recurse(a, b, fa, fm, fb, whole, abs_tol, max_depth);
  if (st.depth_exhausted > 0 || !std::isfinite(value)) {
    throw SolverError("adaptive_simpson: tolerance not reached within the recursion limit");
  }
  return value;
}

}  // namespace hydronls
