#include "plemelj/transform.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>

namespace plemelj {

TransformValue cauchy_transform(const Curve& c, const Density& d, Complex z, const TransformConfig& cfg) {
  if (!is_finite(z)) throw Error(ErrorKind::invalid_argument, "transform: non-finite point");
  TransformValue out;
  out.nearest_tau = c.nearest_parameter(z, &out.distance);
  if (out.distance <= cfg.on_curve_distance)
    throw Error(ErrorKind::on_curve, "transform: point lies on the curve (distance " +
                                         std::to_string(out.distance) + ")");

  quad::Result r;
  if (out.distance >= cfg.near_distance) {
    auto g = [&](double tau) {
      const Complex s = c.point(tau);
      return d({tau, s}) * c.deriv(tau) / (s - z);
    };
    r = quad::integrate(g, c.a(), c.b(), cfg.quadrature);
  } else {
    // Offset variable around the nearest parameter, graded toward it.
    const double ts = out.nearest_tau;
    const CurveSample base{ts, c.point(ts)};
    const Complex gap = base.z - z;
    auto g = [&](double sigma) {
      const Complex disp = c.displacement(ts, sigma);
      const Complex phi = sigma == 0.0 ? d(base) : d.at_offset(base, sigma, disp);
      return phi * c.deriv(ts + sigma) / (gap + disp);
    };
    const double lo = c.closed() ? -0.5 * c.period() : c.a() - ts;
    const double hi = c.closed() ? 0.5 * c.period() : c.b() - ts;
    const double speed = std::abs(c.deriv(ts));
    const double width = std::max(1e-15, 0.01 * out.distance) / speed;
    const auto bp = quad::graded_breakpoints(lo, hi, 0.0, width, 0.5);
    quad::Options o = cfg.quadrature;
    o.max_subdivisions = std::max<int>(o.max_subdivisions, 8 * static_cast<int>(bp.size()));
    r = quad::integrate(g, bp, o);
  }
  out.value = r.value / two_pi_i;
  out.error = r.error / (2 * pi);
  out.ok = r.ok && is_finite(out.value);
  return out;
}

BoundaryValue boundary_values(const Curve& c, const Density& d, double tau, const PVConfig& cfg) {
  BoundaryValue bv;
  bv.pv = pv_curve(c, d, tau, cfg);
  bv.tau = c.wrap(tau);
  bv.point = c.point(bv.tau);
  bv.density_value = d({bv.tau, bv.point});
  bv.pv_part = bv.pv.value / two_pi_i;
  bv.phi_plus = 0.5 * bv.density_value + bv.pv_part;
  bv.phi_minus = -0.5 * bv.density_value + bv.pv_part;
  bv.converged = bv.pv.converged;
  const double scale = std::abs(bv.density_value) + std::abs(bv.pv_part) + 1.0;
  const double jump = std::abs((bv.phi_plus - bv.phi_minus) - bv.density_value);
  const double sum = std::abs((bv.phi_plus + bv.phi_minus) - 2.0 * bv.pv_part);
  if (jump > 1e-14 * scale || sum > 1e-14 * scale)
    throw std::logic_error("boundary_values: jump/sum identities violated");
  return bv;
}

const char* to_string(ApproachShape s) {
  switch (s) {
    case ApproachShape::normal: return "normal";
    case ApproachShape::tangential_graph: return "tangential";
    case ApproachShape::custom: return "custom";
  }
  return "custom";
}

std::vector<double> dyadic_radii(int count) {
  std::vector<double> r;
  for (int n = 1; n <= count; ++n) r.push_back(std::ldexp(1.0, -n));
  return r;
}

namespace {

void check_points(const Curve& c, const NormalizedFrame& f, ApproachSequence& seq) {
  for (std::size_t i = 0; i < seq.points.size(); ++i) {
    const Side s = classify_side(c, f, seq.points[i]);
    if (s == Side::on_curve)
      throw Error(ErrorKind::degenerate_geometry, "sequence point " + std::to_string(i + 1) + " lies on the curve");
    if (s != seq.side)
      throw Error(ErrorKind::degenerate_geometry, "sequence point " + std::to_string(i + 1) + " is on the " +
                                                      to_string(s) + " side");
  }
}

}  // namespace

ApproachSequence make_sequence(const Curve& c, const NormalizedFrame& f, Side side, ApproachShape shape,
                               const std::vector<double>& radii, double ratio) {
  if (side == Side::on_curve) throw Error(ErrorKind::invalid_argument, "sequence side must be left or right");
  if (shape == ApproachShape::custom)
    throw Error(ErrorKind::invalid_argument, "custom sequences take explicit points");
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (!(radii[i] > 0) || (i > 0 && !(radii[i] < radii[i - 1])))
      throw Error(ErrorKind::invalid_argument, "radii must be positive and strictly decreasing");
  if (shape == ApproachShape::tangential_graph && !(ratio > 0))
    throw Error(ErrorKind::invalid_argument, "tangential offset ratio must be positive");

  ApproachSequence seq;
  seq.tau = f.tau0;
  seq.target = f.t0;
  seq.side = side;
  seq.shape = shape;
  seq.radii = radii;
  const double sgn = side == Side::left ? 1.0 : -1.0;
  for (double r : radii) {
    if (shape == ApproachShape::normal) {
      seq.points.push_back(f.t0 + Complex(0.0, sgn * r) * f.tangent());
    } else {
      const double y = frame_graph(c, f, r) + sgn * ratio * r;
      seq.points.push_back(f.from_frame({r, y}));
    }
  }
  check_points(c, f, seq);
  return seq;
}

ApproachSequence make_custom_sequence(const Curve& c, const NormalizedFrame& f, Side side,
                                      const std::vector<Complex>& points) {
  if (side == Side::on_curve) throw Error(ErrorKind::invalid_argument, "sequence side must be left or right");
  ApproachSequence seq;
  seq.tau = f.tau0;
  seq.target = f.t0;
  seq.side = side;
  seq.shape = ApproachShape::custom;
  seq.points = points;
  for (const auto& z : points) seq.radii.push_back(std::abs(z - f.t0));
  seq.conditioning_warning = true;
  check_points(c, f, seq);
  return seq;
}

ConvergenceReport run_convergence(const Curve& c, const Density& d, const ApproachSequence& seq,
                                  const ConvergenceConfig& cfg) {
  return run_convergence(c, d, seq, boundary_values(c, d, seq.tau, cfg.pv), cfg);
}

ConvergenceReport run_convergence(const Curve& c, const Density& d, const ApproachSequence& seq,
                                  const BoundaryValue& bv, const ConvergenceConfig& cfg) {
  ConvergenceReport rep;
  rep.boundary = bv;
  rep.limit = seq.side == Side::left ? bv.phi_plus : bv.phi_minus;

  const std::size_t n = seq.points.size();
  std::vector<TransformValue> values(n);
  std::vector<std::exception_ptr> failures(n);
  TransformConfig tc = cfg.transform;
  const bool outer = cfg.exec == Exec::parallel && n > 1;
  if (outer) tc.quadrature.exec = Exec::serial;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(parallel::effective_threads()) if (outer)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      values[i] = cauchy_transform(c, d, seq.points[i], tc);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (failures[i]) {
      try {
        std::rethrow_exception(failures[i]);
      } catch (const std::exception& e) {
        rep.truncated = true;
        rep.truncation_reason = "n = " + std::to_string(i + 1) + ": " + e.what();
      }
      break;
    }
    const auto& v = values[i];
    const double err = std::abs(v.value - rep.limit);
    if (!v.ok) {
      rep.truncated = true;
      rep.truncation_reason = "n = " + std::to_string(i + 1) + ": quadrature did not reach its tolerance";
      break;
    }
    if (v.error > 0.1 * std::max(err, cfg.tol)) {
      rep.truncated = true;
      rep.truncation_reason = "n = " + std::to_string(i + 1) + ": quadrature error above 10% of the distance to the limit";
      break;
    }
    rep.records.push_back({static_cast<int>(i + 1), seq.points[i], v.value, err, v.error});
  }

  const std::size_t m = rep.records.size();
  if (m > 0) rep.final_error = rep.records.back().abs_error;
  if (m >= 5) {
    bool ok = true;
    for (std::size_t i = m - 5; i < m; ++i) {
      const double e = rep.records[i].abs_error;
      if (!(e <= cfg.tol)) ok = false;
      if (i > 0 && e > 2.0 * std::max(rep.records[i - 1].abs_error, 1e-3 * cfg.tol)) ok = false;
    }
    rep.converged = ok;
  }
  if (m >= 4) {
    std::vector<double> idx, diff;
    for (std::size_t i = 1; i < m; ++i) {
      idx.push_back(rep.records[i].n);
      diff.push_back(std::abs(rep.records[i].phi - rep.records[i - 1].phi));
    }
    const auto v = extrap::classify_increments(idx, diff);
    rep.sequence_settles = diff.back() <= cfg.tol || v.cls == extrap::TailClass::convergent;
  }
  return rep;
}

JumpReport verify_jump(const Curve& c, const Density& d, double tau, const ConvergenceConfig& cfg, int depth) {
  const auto frame = normalize_at(c, tau);
  const auto bv = boundary_values(c, d, tau, cfg.pv);
  const auto radii = dyadic_radii(depth);
  JumpReport out;
  out.left = run_convergence(c, d, make_sequence(c, frame, Side::left, ApproachShape::normal, radii), bv, cfg);
  out.right = run_convergence(c, d, make_sequence(c, frame, Side::right, ApproachShape::normal, radii), bv, cfg);
  if (out.left.records.empty() || out.right.records.empty())
    throw Error(ErrorKind::evaluation, "verify_jump: a lateral run produced no values");
  out.left_limit = out.left.records.back().phi;
  out.right_limit = out.right.records.back().phi;
  out.jump_residual = std::abs((out.left_limit - out.right_limit) - bv.density_value);
  out.sum_residual = std::abs((out.left_limit + out.right_limit) - 2.0 * bv.pv_part);
  out.limits_exist = out.left.sequence_settles && out.right.sequence_settles;
  return out;
}

}  // namespace plemelj
