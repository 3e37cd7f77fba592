#include "plemelj/extrapolate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace plemelj::extrap {

Complex neville_at_zero(std::span<const double> h, std::span<const Complex> v) {
  std::vector<Complex> p(v.begin(), v.end());
  const std::size_t n = p.size();
  for (std::size_t m = 1; m < n; ++m)
    for (std::size_t i = 0; i + m < n; ++i)
      p[i] = (h[i + m] * p[i] - h[i] * p[i + 1]) / (h[i + m] - h[i]);
  return n ? p[0] : Complex{};
}

Estimate richardson_in_inverse_index(std::span<const double> k, std::span<const Complex> s) {
  Estimate e;
  const std::size_t n = std::min(k.size(), s.size());
  if (n < 3) return e;
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = 1.0 / k[i];
  const Complex top = neville_at_zero(h, s.subspan(0, n));
  // One order lower, dropping the coarsest point.
  const std::size_t drop = k.front() < k.back() ? 1 : 0;
  const Complex lower = neville_at_zero(std::span<const double>(h).subspan(drop, n - 1),
                                        s.subspan(drop, n - 1));
  e.value = top;
  e.error = std::abs(top - lower);
  e.valid = is_finite(top) && std::isfinite(e.error);
  return e;
}

Estimate geometric_tail(std::span<const Complex> last4, double max_ratio_mismatch) {
  Estimate e;
  if (last4.size() < 4) return e;
  const Complex d1 = last4[1] - last4[0];
  const Complex d2 = last4[2] - last4[1];
  const Complex d3 = last4[3] - last4[2];
  e.value = last4[3];
  if (d3 == Complex{}) {
    e.error = std::abs(d2);
    e.valid = true;
    return e;
  }
  if (d1 == Complex{} || d2 == Complex{}) return e;
  const Complex q1 = d2 / d1;
  const Complex q2 = d3 / d2;
  const double aq = std::abs(q2);
  if (!(aq < 0.95)) return e;
  const double mismatch = std::abs(q1 - q2) / aq;
  if (mismatch > max_ratio_mismatch) return e;
  const Complex tail = d3 * q2 / (1.0 - q2);
  e.value = last4[3] + tail;
  e.error = std::abs(tail) * std::max(mismatch, 1e-3) +
            4.0 * std::numeric_limits<double>::epsilon() * std::abs(e.value);
  e.valid = is_finite(e.value);
  return e;
}

TailVerdict classify_increments(std::span<const double> index, std::span<const double> increments) {
  TailVerdict v;
  const std::size_t n = std::min(index.size(), increments.size());
  if (n < 4) return v;
  std::vector<double> inc(n);
  for (std::size_t i = 0; i < n; ++i) inc[i] = std::abs(increments[i]);

  const double a = inc[n - 3], b = inc[n - 2], c = inc[n - 1];
  if (b == 0.0 && c == 0.0) {
    v.cls = TailClass::convergent;
    v.geometric = true;
    v.decay_exponent = std::numeric_limits<double>::infinity();
    return v;
  }
  if (b > 0 && c > 0 && a >= 1.5 * b && b >= 1.5 * c) {
    v.cls = TailClass::convergent;
    v.geometric = true;
  }

  // Least-squares slope of log inc against log k over the last 8 points.
  const std::size_t first = n > 8 ? n - 8 : 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = first; i < n; ++i) {
    if (!(inc[i] > 0) || !(index[i] > 0)) continue;
    const double x = std::log(index[i]);
    const double y = std::log(inc[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m >= 3) {
    const double denom = m * sxx - sx * sx;
    if (denom > 0) v.decay_exponent = -(m * sxy - sx * sy) / denom;
  }
  if (v.geometric) return v;
  if (m < 3) return v;
  if (v.decay_exponent >= 1.5)
    v.cls = TailClass::convergent;
  else if (v.decay_exponent <= 1.1)
    v.cls = TailClass::divergent;
  return v;
}

const char* to_string(TailClass c) {
  switch (c) {
    case TailClass::convergent: return "convergent";
    case TailClass::divergent: return "divergent";
    case TailClass::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

}  // namespace plemelj::extrap
