#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace plemelj {

using Complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr Complex two_pi_i{0.0, 2.0 * std::numbers::pi};

/// Failure categories. The CLI maps each to its own message prefix.
enum class ErrorKind {
  invalid_argument,   ///< precondition on an input value
  degenerate_geometry,
  not_simple,         ///< self-intersection found on the verification grid
  endpoint,           ///< point at (or too close to) an endpoint of an open curve
  on_curve,           ///< evaluation point lies on the contour
  outside_window,     ///< side classification requested outside the local frame
  out_of_domain,      ///< tabulated data would need extrapolation
  evaluation,         ///< density evaluator produced a non-finite value
  io,
  schema,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline bool is_finite(Complex z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

}  // namespace plemelj
