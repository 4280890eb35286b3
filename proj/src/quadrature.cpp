#include "spd/quadrature.hpp"

#include <cmath>

namespace spd {

namespace {

struct Simpson {
  const std::function<double(double)>& f;
  const QuadratureOptions& opt;
  QuadratureResult& out;

  double eval(double x) {
    ++out.evaluations;
    return f(x);
  }

  void recurse(double a, double b, double fa, double fm, double fb, double whole, double tol,
               int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double h = b - a;
    const double left = h / 12.0 * (fa + 4.0 * flm + fm);
    const double right = h / 12.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;

    if (depth >= opt.min_depth && std::abs(delta) <= 15.0 * tol) {
      out.value += left + right + delta / 15.0;
      out.error_estimate += std::abs(delta) / 15.0;
      return;
    }
    if (depth >= opt.max_depth || m <= a || m >= b) {
      out.value += left + right + delta / 15.0;
      out.error_estimate += std::abs(delta) / 15.0;
      out.converged = false;
      return;
    }
    recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1);
    recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  }
};

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureOptions& options) {
  QuadratureResult result;
  if (!(b > a)) return result;
  Simpson s{f, options, result};
  const double fa = s.eval(a);
  const double fb = s.eval(b);
  const double m = 0.5 * (a + b);
  const double fm = s.eval(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  s.recurse(a, b, fa, fm, fb, whole, options.abs_tolerance, 0);
  return result;
}

}  // namespace spd
