#pragma once

#include <string>
#include <vector>

#include "plemelj/common.hpp"
#include "plemelj/curve.hpp"
#include "plemelj/density.hpp"
#include "plemelj/pv.hpp"

namespace plemelj {

struct TransformConfig {
  quad::Options quadrature{};
  double near_distance = 1e-3;  ///< below this, panels are graded toward the nearest parameter
  double on_curve_distance = 1e-13;
};

struct TransformValue {
  Complex value{};
  double error = 0.0;
  bool ok = false;
  double distance = 0.0;  ///< to the curve
  double nearest_tau = 0.0;
};

/// Phi(z) = (1/2 pi i) integral of phi(s)/(s - z) ds along c, for z off the curve.
TransformValue cauchy_transform(const Curve& c, const Density& d, Complex z, const TransformConfig& cfg = {});

/// Plemelj boundary values at c.point(tau). "plus" is the left side.
struct BoundaryValue {
  double tau = 0.0;
  Complex point{};
  Complex phi_plus{};
  Complex phi_minus{};
  Complex pv_part{};        ///< P.V. / (2 pi i)
  Complex density_value{};
  PVResult pv;
  bool converged = false;   ///< copied from the P.V. computation
};

BoundaryValue boundary_values(const Curve& c, const Density& d, double tau, const PVConfig& cfg = {});

enum class ApproachShape { normal, tangential_graph, custom };
const char* to_string(ApproachShape s);

struct ApproachSequence {
  double tau = 0.0;
  Complex target{};
  Side side = Side::left;
  ApproachShape shape = ApproachShape::normal;
  std::vector<double> radii;
  std::vector<Complex> points;
  bool conditioning_warning = false;  ///< set for custom lists
};

/// r_n = 2^-n, n = 1..count.
std::vector<double> dyadic_radii(int count);

/// normal: z_n = t + s i r_n T with T the unit tangent, s = +1 (left) or -1;
/// tangential_graph: frame point (r_n, G(r_n) +/- ratio r_n). Every z_n is
/// checked with classify_side.
ApproachSequence make_sequence(const Curve& c, const NormalizedFrame& f, Side side, ApproachShape shape,
                               const std::vector<double>& radii, double ratio = 0.5);
ApproachSequence make_custom_sequence(const Curve& c, const NormalizedFrame& f, Side side,
                                      const std::vector<Complex>& points);

struct ConvergenceConfig {
  PVConfig pv{};
  TransformConfig transform{};
  double tol = 1e-6;  ///< verdict threshold on the final errors
  Exec exec = Exec::parallel;  ///< across sequence points; each transform then runs serially
};

struct ConvergenceRecord {
  int n = 0;
  Complex z{};
  Complex phi{};
  double abs_error = 0.0;
  double quad_error = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRecord> records;
  bool converged = false;
  double final_error = 0.0;
  bool truncated = false;
  std::string truncation_reason;
  bool sequence_settles = false;  ///< successive differences summable (tail test) or already below tol
  Complex limit{};                ///< the boundary value compared against
  BoundaryValue boundary;
};

ConvergenceReport run_convergence(const Curve& c, const Density& d, const ApproachSequence& seq,
                                  const ConvergenceConfig& cfg = {});
/// Same, reusing boundary values computed earlier at seq.tau.
ConvergenceReport run_convergence(const Curve& c, const Density& d, const ApproachSequence& seq,
                                  const BoundaryValue& bv, const ConvergenceConfig& cfg = {});

struct JumpReport {
  double jump_residual = 0.0;
  double sum_residual = 0.0;
  Complex left_limit{};
  Complex right_limit{};
  ConvergenceReport left;
  ConvergenceReport right;
  bool limits_exist = false;  ///< both sequences settle
};

/// Residuals from two independent runs (left and right normal sequences).
JumpReport verify_jump(const Curve& c, const Density& d, double tau, const ConvergenceConfig& cfg = {},
                       int depth = 20);

}  // namespace plemelj
