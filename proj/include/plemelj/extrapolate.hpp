#pragma once

#include <span>
#include <vector>

#include "plemelj/common.hpp"

// Limit estimation for sequences of partial integrals: excision traces
// S(eps_k) with eps_k = 2^-k, and dyadic shell ladders.

namespace plemelj::extrap {

struct Estimate {
  Complex value{};
  double error = 0.0;
  bool valid = false;
};

/// Value at h = 0 of the interpolating polynomial through (h_i, v_i).
Complex neville_at_zero(std::span<const double> h, std::span<const Complex> v);

/// Polynomial extrapolation in 1/k. Suited to tails of the form
/// c1/k + c2/k^2 + ..., which is what a modulus ~ 1/log^2 produces on a
/// dyadic excision sequence. Error = gap between the top two orders.
Estimate richardson_in_inverse_index(std::span<const double> k, std::span<const Complex> s);

/// Tail c * eps^beta on a geometric eps sequence: the increments of the last
/// four partials form a geometric progression. Rejected (valid = false) when
/// the two measured ratios differ by more than `max_ratio_mismatch` (relative)
/// or the ratio is not contracting.
Estimate geometric_tail(std::span<const Complex> last4, double max_ratio_mismatch = 0.1);

enum class TailClass { convergent, divergent, inconclusive };

struct TailVerdict {
  TailClass cls = TailClass::inconclusive;
  bool geometric = false;       ///< last three increments each shrank by >= 1.5
  double decay_exponent = 0.0;  ///< p in increments ~ C k^-p (last 8 points)
};

/// Decides whether sum_k increments[k] converges. `index` holds the k of each
/// increment (needed for the algebraic fit).
TailVerdict classify_increments(std::span<const double> index, std::span<const double> increments);

const char* to_string(TailClass c);

}  // namespace plemelj::extrap
