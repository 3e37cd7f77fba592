#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "plemelj/common.hpp"
#include "plemelj/parallel.hpp"

namespace plemelj {

enum class CurveKind { analytic_builtin, spline_from_points };

/// Geometry backend. `displacement` must stay accurate when |dtau| is far below
/// the spacing of representable values near tau.
class CurveImpl {
 public:
  virtual ~CurveImpl() = default;
  virtual Complex point(double tau) const = 0;
  virtual Complex deriv(double tau) const = 0;
  virtual Complex displacement(double tau, double dtau) const {
    return point(tau + dtau) - point(tau);
  }
};

/// Simple smooth oriented curve psi : [a, b] -> C. Immutable, cheap to copy.
class Curve {
 public:
  Curve() = default;
  Curve(std::shared_ptr<const CurveImpl> impl, double a, double b, bool closed, CurveKind kind,
        std::string name);

  Complex point(double tau) const;
  Complex deriv(double tau) const;
  /// psi(tau + dtau) - psi(tau); closed curves wrap the parameter.
  Complex displacement(double tau, double dtau) const;

  double a() const { return a_; }
  double b() const { return b_; }
  double period() const { return b_ - a_; }
  bool closed() const { return closed_; }
  /// +1 for counterclockwise closed curves and for every open curve, -1 for
  /// clockwise closed curves.
  int orientation() const { return orientation_; }
  CurveKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double length() const { return length_; }

  /// Maps tau into [a, b) for closed curves; identity for open ones.
  double wrap(double tau) const;

  /// n + 1 samples on [a, b] (n for closed curves, the end point is the start).
  std::vector<Complex> sample(std::size_t n) const;

  /// Nearest parameter to z: coarse scan followed by local refinement.
  double nearest_parameter(Complex z, double* distance = nullptr) const;

 private:
  std::shared_ptr<const CurveImpl> impl_;
  double a_ = 0.0, b_ = 1.0;
  bool closed_ = false;
  CurveKind kind_ = CurveKind::analytic_builtin;
  std::string name_;
  int orientation_ = 1;
  double length_ = 0.0;
};

struct CurveChecks {
  std::size_t samples = 4096;
  double min_distance = 1e-9;
};

/// Throws not_simple / degenerate_geometry when the sampled curve crosses
/// itself or its derivative vanishes.
void verify_curve(const Curve& c, const CurveChecks& checks = {}, Exec exec = Exec::parallel);

/// segment [a, b] (real ends) or [re_a, im_a, re_b, im_b]; circle [r (, cx, cy)];
/// arc [r, theta0, theta1 (, cx, cy)]; parabola-graph [k (, a, b)].
Curve make_builtin_curve(const std::string& name, const std::vector<double>& params);

/// Curve from user supplied closed-form psi and psi'. The displacement falls
/// back to plain differencing.
Curve make_custom_curve(std::function<Complex(double)> psi, std::function<Complex(double)> dpsi,
                        double a, double b, bool closed, const std::string& name = "custom");

/// C2 cubic spline through the points (natural for open, periodic for closed,
/// chord-length knots) reparameterized by arc length.
Curve curve_from_points(std::vector<Complex> points, bool closed);

/// Point files: CSV with header `re,im`, or JSON {"points": [[re, im], ...], "closed": bool}.
struct PointSet {
  std::vector<Complex> points;
  bool closed = false;
};
PointSet read_points(const std::string& path);

/// Local coordinates at t0 = psi(tau0): psi~(lambda) = r (psi(tau0 + lambda/s0) - t0)
/// with s0 = |psi'(tau0)|, so psi~(0) = 0 and psi~'(0) = 1.
struct NormalizedFrame {
  double tau0 = 0.0;
  Complex t0{};
  Complex rotation{1.0, 0.0};  ///< r, |r| = 1, r psi'(tau0) = |psi'(tau0)|
  double speed = 1.0;          ///< s0
  double window_lo = 0.0;      ///< tau range on which u = Re psi~ is increasing
  double window_hi = 0.0;
  Complex d2{};                ///< psi~''(0)
  Complex d3{};                ///< psi~'''(0)
  double footprint = 0.0;      ///< radius of the disk around t0 where sides are decided locally

  Complex to_frame(Complex z) const { return rotation * (z - t0); }
  Complex from_frame(Complex w) const { return t0 + w / rotation; }
  double lambda_of(double tau) const { return (tau - tau0) * speed; }
  double tau_of(double lambda) const { return tau0 + lambda / speed; }
  Complex tangent() const { return 1.0 / rotation; }
};

inline constexpr double endpoint_tolerance = 1e-9;
inline constexpr double h_switch = 1e-4;

NormalizedFrame normalize_at(const Curve& c, double tau0);

/// psi~(lambda) with the offset kept separate from tau0.
Complex frame_point(const Curve& c, const NormalizedFrame& f, double lambda);
/// psi~'(lambda).
Complex frame_deriv(const Curve& c, const NormalizedFrame& f, double lambda);

/// h(lambda) = lambda / psi~(lambda), series branch for |lambda| <= h_switch.
Complex regularized_kernel(const Curve& c, const NormalizedFrame& f, double lambda);

/// Local graph G(x) = v(u^-1(x)) in frame coordinates.
double frame_graph(const Curve& c, const NormalizedFrame& f, double x);

enum class Side { left, right, on_curve };
const char* to_string(Side s);

Side classify_side(const Curve& c, const NormalizedFrame& f, Complex z);

}  // namespace plemelj
