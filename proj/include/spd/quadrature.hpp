#pragma once

#include <functional>

namespace spd {

struct QuadratureOptions {
  double abs_tolerance = 1e-8;
  int max_depth = 40;
  // Subdivision depth forced before the error test is trusted, so narrow peaks
  // between the first five sample points are not missed.
  int min_depth = 5;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
  long evaluations = 0;
};

// Adaptive Simpson quadrature on [a, b] with Richardson correction.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureOptions& options = {});

}  // namespace spd
