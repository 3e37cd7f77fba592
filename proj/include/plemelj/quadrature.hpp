#pragma once

#include <functional>
#include <span>
#include <vector>

#include "plemelj/common.hpp"
#include "plemelj/parallel.hpp"

namespace plemelj::quad {

using Integrand = std::function<Complex(double)>;

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  int max_subdivisions = 2000;
  Exec exec = Exec::parallel;
};

struct Interval {
  double a;
  double b;
};

struct Panel {
  double a;
  double b;
  Complex value;
  double error;
};

struct Result {
  Complex value{};
  double error = 0.0;
  bool ok = false;  ///< error target met before max_subdivisions
  int evaluations = 0;
  std::vector<Panel> panels;  ///< final partition, sorted by left end
};

/// Adaptive Gauss-Kronrod (7/15) quadrature over the partition given by
/// `breakpoints` (sorted, at least two entries). Panels are refined in rounds;
/// each round's new panels are evaluated as one batch, which runs in parallel
/// under Exec::parallel. Summation is pairwise over panels ordered by position,
/// so the value does not depend on the thread count.
Result integrate(const Integrand& f, std::span<const double> breakpoints,
                 const Options& opts = {});

Result integrate(const Integrand& f, double a, double b, const Options& opts = {});

/// Sum of the values of panels lying inside [lo, hi].
Complex sum_panels(const Result& r, double lo, double hi);
double error_panels(const Result& r, double lo, double hi);

Complex pairwise_sum(std::span<const Complex> xs);
double pairwise_sum(std::span<const double> xs);

/// Breakpoints on [lo, hi] graded geometrically toward `center` with the given
/// ratio, until the innermost panel is narrower than `min_width`. `center` may
/// coincide with an end of the interval.
std::vector<double> graded_breakpoints(double lo, double hi, double center,
                                       double min_width, double ratio = 0.5);

}  // namespace plemelj::quad
