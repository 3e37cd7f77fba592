#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "plemelj/common.hpp"
#include "plemelj/curve.hpp"
#include "plemelj/density.hpp"
#include "plemelj/quadrature.hpp"

namespace plemelj {

/// Numerator f of f(t)/(t - t0). `offset(base, h)` must return f(base + h);
/// supplying it lets the integrators resolve |h| far below ulp(base).
struct Integrand1D {
  std::function<Complex(double)> f;
  std::function<Complex(double, double)> at;

  Integrand1D() = default;
  Integrand1D(std::function<Complex(double)> fn) : f(std::move(fn)) {}
  Integrand1D(std::function<Complex(double)> fn, std::function<Complex(double, double)> off)
      : f(std::move(fn)), at(std::move(off)) {}

  Complex operator()(double x) const { return f(x); }
  Complex offset(double base, double h) const { return at ? at(base, h) : f(base + h); }
};

enum class PVMethod { excision, subtraction, pullback, automatic };
const char* to_string(PVMethod m);

struct PVConfig {
  std::vector<double> excision_seq = default_excision_sequence();
  quad::Options quadrature{};
  bool richardson = true;
  /// Interval method used under pv_curve: automatic = subtraction, falling
  /// back to excision when subtraction does not converge.
  PVMethod method = PVMethod::automatic;

  /// eps_k = 2^-k for k = first..last.
  static std::vector<double> default_excision_sequence(int first = 4, int last = 40);
};

struct TracePoint {
  double epsilon;
  Complex value;
};

struct PVResult {
  Complex value{};
  std::vector<TracePoint> trace;
  double error_estimate = 0.0;
  PVMethod method = PVMethod::excision;
  bool converged = false;
  std::string note;  ///< extrapolation model used, or the reason for non-convergence
};

/// Limit of the integral over [a, b] minus (t0 - eps_k, t0 + eps_k).
PVResult pv_interval_excision(const Integrand1D& f, double t0, double a, double b,
                              const PVConfig& cfg = {});

/// Integral of (f(t) - f(t0))/(t - t0) plus f(t0) log((b - t0)/(t0 - a)).
PVResult pv_interval_subtraction(const Integrand1D& f, double t0, double a, double b,
                                 const PVConfig& cfg = {});

/// Plain integral over [a, b] minus (t0 - eps, t0 + eps) at one fixed eps,
/// computed directly (no shells, no extrapolation).
quad::Result excised_integral(const Integrand1D& f, double t0, double a, double b, double eps,
                              const quad::Options& opts = {});

/// P.V. of the integral of phi(s)/(s - t0) ds along c, t0 = c.point(tau0),
/// pulled back to the frame parameter with the regularized kernel.
PVResult pv_curve(const Curve& c, const Density& d, double tau0, const PVConfig& cfg = {});

/// Same integral with the curve excised by the disk |s - t0| < eps_k; cut
/// parameters found by bisection on |psi~| = eps.
PVResult pv_curve_disk_excision(const Curve& c, const Density& d, double tau0,
                                const PVConfig& cfg = {});

/// Symmetric-parameter partial minus disk partial at radius eps.
Complex asymmetric_cut_correction(const Curve& c, const Density& d, double tau0, double eps,
                                  const quad::Options& opts = {});

/// (f_e(x), f_o(x)).
std::pair<Complex, Complex> even_odd_split(const std::function<Complex(double)>& f, double x);

enum class Existence { exists, fails, inconclusive };
const char* to_string(Existence e);

struct ExistenceResult {
  Existence verdict = Existence::inconclusive;
  double l1_estimate = 0.0;         ///< integral of |f_o(x)/x| over [2^-K, 1]
  std::vector<TracePoint> l1_trace; ///< (delta_k, integral over [delta_k, 1]) as a real value
  double decay_exponent = 0.0;
  Complex pv{};                     ///< 2 P.V. integral of f_o(x)/x over [0, 1], when it exists
  double pv_error = 0.0;
};

/// Numerical L1 test on the odd part for the P.V. over [-1, 1] at 0.
ExistenceResult pv_exists_predicate(const std::function<Complex(double)>& f, const PVConfig& cfg = {},
                                    int depth = 40);

}  // namespace plemelj
