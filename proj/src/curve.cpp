#include "plemelj/curve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include "plemelj/kernels.hpp"

namespace plemelj {

namespace {

constexpr double eps = std::numeric_limits<double>::epsilon();

// e^{i d} - 1 without cancellation.
Complex expm1_i(double d) {
  const double s = std::sin(0.5 * d);
  return {-2.0 * s * s, std::sin(d)};
}

class SegmentImpl final : public CurveImpl {
 public:
  SegmentImpl(Complex origin, Complex dir) : origin_(origin), dir_(dir) {}
  Complex point(double tau) const override { return origin_ + dir_ * tau; }
  Complex deriv(double) const override { return dir_; }
  Complex displacement(double, double dtau) const override { return dir_ * dtau; }

 private:
  Complex origin_, dir_;
};

class CircleImpl final : public CurveImpl {
 public:
  CircleImpl(double r, Complex center) : r_(r), center_(center) {}
  Complex point(double tau) const override { return center_ + r_ * std::polar(1.0, tau); }
  Complex deriv(double tau) const override { return Complex(0, r_) * std::polar(1.0, tau); }
  Complex displacement(double tau, double dtau) const override {
    return r_ * std::polar(1.0, tau) * expm1_i(dtau);
  }

 private:
  double r_;
  Complex center_;
};

class ParabolaImpl final : public CurveImpl {
 public:
  explicit ParabolaImpl(double k) : k_(k) {}
  Complex point(double tau) const override { return {tau, k_ * tau * tau}; }
  Complex deriv(double tau) const override { return {1.0, 2.0 * k_ * tau}; }
  Complex displacement(double tau, double dtau) const override {
    return {dtau, k_ * dtau * (2.0 * tau + dtau)};
  }

 private:
  double k_;
};

class CustomImpl final : public CurveImpl {
 public:
  CustomImpl(std::function<Complex(double)> psi, std::function<Complex(double)> dpsi)
      : psi_(std::move(psi)), dpsi_(std::move(dpsi)) {}
  Complex point(double tau) const override { return psi_(tau); }
  Complex deriv(double tau) const override { return dpsi_(tau); }

 private:
  std::function<Complex(double)> psi_, dpsi_;
};

// Cubic spline in the chord-length variable u, exposed in arc length sigma.
class SplineImpl final : public CurveImpl {
 public:
  SplineImpl(const std::vector<Complex>& pts, bool closed);

  double total_length() const { return cum_.back(); }

  Complex point(double sigma) const override {
    const auto [j, s] = locate(sigma, 0.0);
    return eval(j, s);
  }
  Complex deriv(double sigma) const override {
    const auto [j, s] = locate(sigma, 0.0);
    const Complex d = eval_d(j, s);
    return d / std::abs(d);
  }
  Complex displacement(double sigma, double dsigma) const override;

 private:
  struct Seg {
    double h;
    Complex c0, c1, c2, c3;
  };
  std::vector<Seg> seg_;
  std::vector<double> cum_;  // arc length at the start of each segment, plus total
  bool closed_;
  double min_seg_len_ = 0.0;

  Complex eval(std::size_t j, double s) const {
    const Seg& g = seg_[j];
    return g.c0 + s * (g.c1 + s * (g.c2 + s * g.c3));
  }
  Complex eval_d(std::size_t j, double s) const {
    const Seg& g = seg_[j];
    return g.c1 + s * (2.0 * g.c2 + 3.0 * s * g.c3);
  }
  // P_j(s + ds) - P_j(s) with ds kept separate.
  Complex eval_diff(std::size_t j, double s, double ds) const {
    const Seg& g = seg_[j];
    return ds * (g.c1 + g.c2 * (2.0 * s + ds) + g.c3 * (3.0 * s * s + 3.0 * s * ds + ds * ds));
  }
  double speed(std::size_t j, double s) const { return std::abs(eval_d(j, s)); }
  // Arc length of segment j between local s and s + ds.
  double arc(std::size_t j, double s, double ds) const {
    auto f = [&](double x) { return speed(j, s + x); };
    return boost::math::quadrature::gauss<double, 20>::integrate(f, 0.0, ds);
  }
  // Local ds in segment j with arc(j, s, ds) = target.
  double solve_ds(std::size_t j, double s, double target) const {
    double ds = target / speed(j, s);
    for (int it = 0; it < 60; ++it) {
      const double step = (arc(j, s, ds) - target) / speed(j, s + ds);
      ds -= step;
      if (std::abs(step) <= 4.0 * eps * std::max(std::abs(ds), 1e-300)) break;
    }
    return ds;
  }
  // Segment and local coordinate for sigma. At a knot, `dir` < 0 selects the
  // segment on the left.
  std::pair<std::size_t, double> locate(double sigma, double dir) const {
    const double L = cum_.back();
    if (closed_) {
      sigma = std::fmod(sigma, L);
      if (sigma < 0) sigma += L;
      if (sigma >= L) sigma -= L;
    }
    const std::size_t n = seg_.size();
    std::size_t j;
    if (sigma <= 0.0) {
      j = 0;
      if (closed_ && dir < 0 && sigma == 0.0) return {n - 1, seg_[n - 1].h};
    } else if (sigma >= L) {
      j = n - 1;
    } else {
      j = static_cast<std::size_t>(std::upper_bound(cum_.begin(), cum_.end(), sigma) - cum_.begin()) - 1;
      j = std::min(j, n - 1);
      if (dir < 0 && sigma == cum_[j] && (j > 0 || closed_)) {
        const std::size_t k = j > 0 ? j - 1 : n - 1;
        return {k, seg_[k].h};
      }
    }
    const double rem = sigma - cum_[j];
    const double seglen = cum_[j + 1] - cum_[j];
    double s = seg_[j].h * rem / seglen;
    if (rem == 0.0) return {j, 0.0};
    // Newton for arc(j, 0, s) = rem, bracketed inside the segment when possible.
    for (int it = 0; it < 60; ++it) {
      const double step = (arc(j, 0.0, s) - rem) / speed(j, s);
      s -= step;
      if (std::abs(step) <= 4.0 * eps * std::max(std::abs(s), seg_[j].h)) break;
    }
    return {j, s};
  }
};

void solve_tridiagonal(std::vector<double> lo, std::vector<double> di, std::vector<double> up,
                       std::vector<Complex>& rhs) {
  const std::size_t n = di.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = lo[i] / di[i - 1];
    di[i] -= m * up[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] /= di[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - up[i] * rhs[i + 1]) / di[i];
}

// Cyclic tridiagonal system via Sherman-Morrison. lo[0] couples to x[n-1],
// up[n-1] couples to x[0].
void solve_cyclic(const std::vector<double>& lo, const std::vector<double>& di,
                  const std::vector<double>& up, std::vector<Complex>& rhs) {
  const std::size_t n = di.size();
  const double alpha = up[n - 1];
  const double beta = lo[0];
  const double gamma = -di[0];
  std::vector<double> d2 = di;
  d2[0] -= gamma;
  d2[n - 1] -= alpha * beta / gamma;
  std::vector<Complex> x = rhs;
  solve_tridiagonal(lo, d2, up, x);
  std::vector<Complex> u(n, Complex{});
  u[0] = gamma;
  u[n - 1] = alpha;
  solve_tridiagonal(lo, d2, up, u);
  const Complex fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + u[0] + beta * u[n - 1] / gamma);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = x[i] - fact * u[i];
}

SplineImpl::SplineImpl(const std::vector<Complex>& pts, bool closed) : closed_(closed) {
  const std::size_t np = pts.size();
  const std::size_t n = closed ? np : np - 1;  // segments
  auto y = [&](std::size_t i) { return pts[i % np]; };
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = std::abs(y(i + 1) - y(i));

  std::vector<Complex> M(closed ? n : np, Complex{});
  if (closed) {
    std::vector<double> lo(n), di(n), up(n);
    std::vector<Complex> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t p = (i + n - 1) % n;
      lo[i] = h[p];
      di[i] = 2.0 * (h[p] + h[i]);
      up[i] = h[i];
      rhs[i] = 6.0 * ((y(i + 1) - y(i)) / h[i] - (y(i) - y(p)) / h[p]);
    }
    solve_cyclic(lo, di, up, rhs);
    M = rhs;
    M.push_back(M[0]);
  } else if (np > 2) {
    const std::size_t m = np - 2;
    std::vector<double> lo(m), di(m), up(m);
    std::vector<Complex> rhs(m);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = k + 1;
      lo[k] = h[i - 1];
      di[k] = 2.0 * (h[i - 1] + h[i]);
      up[k] = h[i];
      rhs[k] = 6.0 * ((y(i + 1) - y(i)) / h[i] - (y(i) - y(i - 1)) / h[i - 1]);
    }
    solve_tridiagonal(lo, di, up, rhs);
    for (std::size_t k = 0; k < m; ++k) M[k + 1] = rhs[k];
  }

  seg_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    Seg& g = seg_[j];
    g.h = h[j];
    g.c0 = y(j);
    g.c2 = 0.5 * M[j];
    g.c3 = (M[j + 1] - M[j]) / (6.0 * h[j]);
    g.c1 = (y(j + 1) - y(j)) / h[j] - h[j] * (2.0 * M[j] + M[j + 1]) / 6.0;
  }
  cum_.assign(n + 1, 0.0);
  min_seg_len_ = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    const double len = arc(j, 0.0, h[j]);
    cum_[j + 1] = cum_[j] + len;
    min_seg_len_ = std::min(min_seg_len_, len);
  }
}

Complex SplineImpl::displacement(double sigma, double dsigma) const {
  if (dsigma == 0.0) return {};
  if (std::abs(dsigma) > 0.25 * min_seg_len_) return point(sigma + dsigma) - point(sigma);
  auto [j, s] = locate(sigma, dsigma);
  const std::size_t n = seg_.size();
  // Walk at most a couple of knots, keeping every offset local.
  Complex total{};
  double remaining = dsigma;
  for (int hop = 0; hop < 4; ++hop) {
    const double to_end = dsigma > 0 ? arc(j, s, seg_[j].h - s) : arc(j, s, -s);
    const bool last_segment = closed_ ? false : (dsigma > 0 ? j == n - 1 : j == 0);
    if (std::abs(remaining) <= std::abs(to_end) || last_segment) {
      total += eval_diff(j, s, solve_ds(j, s, remaining));
      return total;
    }
    const double ds_end = dsigma > 0 ? seg_[j].h - s : -s;
    total += eval_diff(j, s, ds_end);
    remaining -= to_end;
    if (dsigma > 0) {
      j = (j + 1) % n;
      s = 0.0;
    } else {
      j = (j + n - 1) % n;
      s = seg_[j].h;
    }
  }
  return point(sigma + dsigma) - point(sigma);
}

double shoelace(const std::vector<Complex>& p) {
  double area = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Complex q = p[(i + 1) % p.size()];
    area += p[i].real() * q.imag() - q.real() * p[i].imag();
  }
  return 0.5 * area;
}

// psi' derivatives by 4th-order central differences.
void derivative_stencil(const Curve& c, double tau, double h, Complex& d2, Complex& d3) {
  const Complex fm2 = c.deriv(tau - 2 * h), fm1 = c.deriv(tau - h), f0 = c.deriv(tau);
  const Complex fp1 = c.deriv(tau + h), fp2 = c.deriv(tau + 2 * h);
  d2 = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
  d3 = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
}

}  // namespace

Curve::Curve(std::shared_ptr<const CurveImpl> impl, double a, double b, bool closed, CurveKind kind,
             std::string name)
    : impl_(std::move(impl)), a_(a), b_(b), closed_(closed), kind_(kind), name_(std::move(name)) {
  if (!(a_ < b_)) throw Error(ErrorKind::degenerate_geometry, "curve: empty parameter domain");
  auto speed = [this](double t) { return std::abs(impl_->deriv(t)); };
  length_ = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(speed, a_, b_, 15, 1e-13);
  if (closed_) orientation_ = shoelace(sample(4096)) >= 0 ? 1 : -1;
}

double Curve::wrap(double tau) const {
  if (!closed_) return tau;
  const double p = period();
  double t = std::fmod(tau - a_, p);
  if (t < 0) t += p;
  if (t >= p) t -= p;
  return a_ + t;
}

Complex Curve::point(double tau) const { return impl_->point(wrap(tau)); }
Complex Curve::deriv(double tau) const { return impl_->deriv(wrap(tau)); }
Complex Curve::displacement(double tau, double dtau) const {
  return impl_->displacement(wrap(tau), dtau);
}

std::vector<Complex> Curve::sample(std::size_t n) const {
  std::vector<Complex> out;
  const std::size_t m = closed_ ? n : n + 1;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back(point(a_ + period() * double(i) / double(n)));
  return out;
}

double Curve::nearest_parameter(Complex z, double* distance) const {
  constexpr std::size_t n = 1024;
  const double h = period() / n;
  double best_tau = a_;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t m = closed_ ? n : n + 1;
  for (std::size_t i = 0; i < m; ++i) {
    const double t = a_ + h * double(i);
    const double d = std::abs(point(t) - z);
    if (d < best) {
      best = d;
      best_tau = t;
    }
  }
  double lo = best_tau - h, hi = best_tau + h;
  if (!closed_) {
    lo = std::max(lo, a_);
    hi = std::min(hi, b_);
  }
  auto dist2 = [&](double t) { return std::norm(point(t) - z); };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = dist2(x1), f2 = dist2(x2);
  for (int it = 0; it < 200 && hi - lo > 4 * eps * std::max(1.0, std::abs(hi)); ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = dist2(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = dist2(x2);
    }
  }
  double t = 0.5 * (lo + hi);
  double d = std::sqrt(dist2(t));
  // Newton on Re(conj(psi - z) psi') = 0 to remove the golden-section plateau.
  for (int it = 0; it < 6; ++it) {
    const Complex w = point(t) - z;
    const Complex d1 = deriv(t);
    const double step_h = 1e-6 * std::max(1.0, std::abs(t));
    const Complex dd = (deriv(t + step_h) - deriv(t - step_h)) / (2 * step_h);
    const double gval = (std::conj(w) * d1).real();
    const double gder = std::norm(d1) + (std::conj(w) * dd).real();
    if (!(gder > 0)) break;
    double tn = t - gval / gder;
    if (!closed_) tn = std::clamp(tn, a_, b_);
    // Near the minimum the distance is flat to rounding, so judge by the step.
    const double dn = std::abs(point(tn) - z);
    if (!(dn <= d * (1 + 8 * eps)) && std::abs(tn - t) > 1e-3 * h) break;
    const double step = std::abs(tn - t);
    t = tn;
    d = std::min(d, dn);
    if (step <= 4 * eps * std::max(1.0, std::abs(t))) break;
  }
  d = std::abs(point(t) - z);
  if (distance) *distance = d;
  return wrap(t);
}

void verify_curve(const Curve& c, const CurveChecks& checks, Exec exec) {
  const auto pts = c.sample(checks.samples);
  const double h = c.period() / double(checks.samples);
  const double mean_speed = c.length() / c.period();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double s = std::abs(c.deriv(c.a() + h * double(i)));
    if (!(s > 1e-10 * mean_speed) || !std::isfinite(s))
      throw Error(ErrorKind::degenerate_geometry, "curve: vanishing derivative at grid point " +
                                                      std::to_string(i));
  }
  const auto prox = kernels::min_nonadjacent_distance(pts, c.closed(), exec);
  if (prox.distance < checks.min_distance) {
    std::ostringstream os;
    os << "curve: self-intersection near parameters " << c.a() + h * double(prox.i) << " and "
       << c.a() + h * double(prox.j);
    throw Error(ErrorKind::not_simple, os.str());
  }
  if (c.closed() && std::abs(c.point(c.a()) - c.point(c.b())) > 1e-9 * std::max(1.0, c.length()))
    throw Error(ErrorKind::degenerate_geometry, "curve: closed curve does not close");
}

Curve make_builtin_curve(const std::string& name, const std::vector<double>& p) {
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (p.size() < lo || p.size() > hi)
      throw Error(ErrorKind::invalid_argument, name + ": wrong number of parameters");
  };
  for (double v : p)
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, name + ": non-finite parameter");

  Curve c;
  if (name == "segment") {
    if (p.size() == 2) {
      if (p[0] == p[1]) throw Error(ErrorKind::degenerate_geometry, "segment: zero length");
      if (p[0] < p[1])
        c = Curve(std::make_shared<SegmentImpl>(0.0, 1.0), p[0], p[1], false,
                  CurveKind::analytic_builtin, name);
      else
        c = Curve(std::make_shared<SegmentImpl>(p[0], p[1] - p[0]), 0.0, 1.0, false,
                  CurveKind::analytic_builtin, name);
    } else {
      need(4, 4);
      const Complex A(p[0], p[1]), B(p[2], p[3]);
      if (A == B) throw Error(ErrorKind::degenerate_geometry, "segment: zero length");
      c = Curve(std::make_shared<SegmentImpl>(A, B - A), 0.0, 1.0, false,
                CurveKind::analytic_builtin, name);
    }
  } else if (name == "circle") {
    if (p.size() != 1 && p.size() != 3) need(1, 1);
    if (!(p[0] > 0)) throw Error(ErrorKind::degenerate_geometry, "circle: radius must be positive");
    const Complex center = p.size() == 3 ? Complex(p[1], p[2]) : Complex{};
    c = Curve(std::make_shared<CircleImpl>(p[0], center), 0.0, 2.0 * pi, true,
              CurveKind::analytic_builtin, name);
  } else if (name == "arc") {
    if (p.size() != 3 && p.size() != 5) need(3, 3);
    if (!(p[0] > 0)) throw Error(ErrorKind::degenerate_geometry, "arc: radius must be positive");
    if (!(p[1] < p[2]) || p[2] - p[1] >= 2.0 * pi)
      throw Error(ErrorKind::degenerate_geometry, "arc: need theta0 < theta1 < theta0 + 2 pi");
    const Complex center = p.size() == 5 ? Complex(p[3], p[4]) : Complex{};
    c = Curve(std::make_shared<CircleImpl>(p[0], center), p[1], p[2], false,
              CurveKind::analytic_builtin, name);
  } else if (name == "parabola-graph") {
    if (p.size() != 1 && p.size() != 3) need(1, 1);
    const double a = p.size() == 3 ? p[1] : -1.0;
    const double b = p.size() == 3 ? p[2] : 1.0;
    if (!(a < b)) throw Error(ErrorKind::degenerate_geometry, "parabola-graph: need a < b");
    c = Curve(std::make_shared<ParabolaImpl>(p[0]), a, b, false, CurveKind::analytic_builtin, name);
  } else {
    throw Error(ErrorKind::invalid_argument, "unknown curve '" + name + "'");
  }
  verify_curve(c);
  return c;
}

Curve make_custom_curve(std::function<Complex(double)> psi, std::function<Complex(double)> dpsi,
                        double a, double b, bool closed, const std::string& name) {
  Curve c(std::make_shared<CustomImpl>(std::move(psi), std::move(dpsi)), a, b, closed,
          CurveKind::analytic_builtin, name);
  verify_curve(c);
  return c;
}

Curve curve_from_points(std::vector<Complex> points, bool closed) {
  for (const auto& z : points)
    if (!is_finite(z)) throw Error(ErrorKind::invalid_argument, "points: non-finite coordinate");
  if (closed && points.size() > 1 && points.front() == points.back()) points.pop_back();
  if (points.size() < 4) throw Error(ErrorKind::invalid_argument, "points: need at least 4 distinct points");
  const std::size_t n = points.size();
  for (std::size_t i = 1; i < n; ++i)
    if (points[i] == points[i - 1])
      throw Error(ErrorKind::invalid_argument, "points: consecutive duplicates at index " + std::to_string(i));
  auto impl = std::make_shared<SplineImpl>(points, closed);
  Curve c(impl, 0.0, impl->total_length(), closed, CurveKind::spline_from_points, "spline");
  verify_curve(c);
  return c;
}

PointSet read_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open points file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  PointSet out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
      for (const auto& p : j.at("points")) {
        if (!p.is_array() || p.size() != 2)
          throw Error(ErrorKind::schema, path + ": each point must be [re, im]");
        out.points.emplace_back(p[0].get<double>(), p[1].get<double>());
      }
      out.closed = j.value("closed", false);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::schema, path + ": " + e.what());
    }
    return out;
  }
  std::istringstream lines(text);
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(lines, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!header) {
      std::string h;
      for (char ch : line)
        if (ch != ' ' && ch != '\t') h += ch;
      if (h != "re,im") throw Error(ErrorKind::schema, path + ":" + std::to_string(lineno) + ": expected header 're,im'");
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw Error(ErrorKind::schema, path + ":" + std::to_string(lineno) + ": expected 're,im'");
    try {
      std::size_t used = 0;
      const double re = std::stod(line.substr(0, comma));
      const std::string rest = line.substr(comma + 1);
      const double im = std::stod(rest, &used);
      if (rest.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("trailing");
      out.points.emplace_back(re, im);
    } catch (const std::exception&) {
      throw Error(ErrorKind::schema, path + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  if (!header) throw Error(ErrorKind::schema, path + ": empty points file");
  return out;
}

NormalizedFrame normalize_at(const Curve& c, double tau0) {
  if (!std::isfinite(tau0)) throw Error(ErrorKind::invalid_argument, "normalize_at: non-finite parameter");
  if (!c.closed() && (tau0 - c.a() < endpoint_tolerance || c.b() - tau0 < endpoint_tolerance))
    throw Error(ErrorKind::endpoint, "normalize_at: parameter at or near an endpoint of an open curve");
  tau0 = c.wrap(tau0);

  NormalizedFrame f;
  f.tau0 = tau0;
  f.t0 = c.point(tau0);
  const Complex d1 = c.deriv(tau0);
  f.speed = std::abs(d1);
  if (!(f.speed > 0)) throw Error(ErrorKind::degenerate_geometry, "normalize_at: zero derivative");
  f.rotation = std::conj(d1) / f.speed;

  const double h = std::min(1e-3, 0.05 * c.period());
  Complex psi2, psi3;
  derivative_stencil(c, tau0, h, psi2, psi3);
  f.d2 = f.rotation * psi2 / (f.speed * f.speed);
  f.d3 = f.rotation * psi3 / (f.speed * f.speed * f.speed);

  auto uprime = [&](double tau) { return (f.rotation * c.deriv(tau)).real(); };
  auto monotone = [&](int dir, double delta) {
    constexpr int m = 64;
    for (int k = 1; k <= m; ++k)
      if (!(uprime(tau0 + dir * delta * k / m) > 0)) return false;
    return true;
  };
  double extent[2];
  for (int side = 0; side < 2; ++side) {
    const int dir = side == 0 ? -1 : 1;
    const double limit = c.closed() ? 0.5 * c.period() : (dir < 0 ? tau0 - c.a() : c.b() - tau0);
    double good = 0.0;
    double bad = std::min(1e-3, limit);
    while (monotone(dir, bad)) {
      good = bad;
      if (bad >= limit) break;
      bad = std::min(2.0 * bad, limit);
    }
    if (good < bad) {
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (good + bad);
        if (monotone(dir, mid))
          good = mid;
        else
          bad = mid;
      }
    }
    if (!(good > 0)) throw Error(ErrorKind::degenerate_geometry, "normalize_at: no monotone window");
    extent[side] = good;
  }
  f.window_lo = tau0 - extent[0];
  f.window_hi = tau0 + extent[1];

  // Footprint: stay clear of the window ends and of the rest of the curve.
  const double end_reach = std::min(std::abs(c.point(f.window_lo) - f.t0), std::abs(c.point(f.window_hi) - f.t0));
  double outside = std::numeric_limits<double>::infinity();
  const auto scan = [&](double lo, double hi) {
    if (!(hi > lo)) return;
    constexpr int m = 2048;
    for (int k = 0; k <= m; ++k) outside = std::min(outside, std::abs(c.point(lo + (hi - lo) * k / m) - f.t0));
  };
  if (c.closed()) {
    scan(f.window_hi, f.window_lo + c.period());
  } else {
    scan(f.window_hi, c.b());
    scan(c.a(), f.window_lo);
  }
  f.footprint = std::min(0.5 * outside, 0.999 * end_reach);
  return f;
}

Complex frame_point(const Curve& c, const NormalizedFrame& f, double lambda) {
  return f.rotation * c.displacement(f.tau0, lambda / f.speed);
}

Complex frame_deriv(const Curve& c, const NormalizedFrame& f, double lambda) {
  return f.rotation * c.deriv(f.tau0 + lambda / f.speed) / f.speed;
}

Complex regularized_kernel(const Curve& c, const NormalizedFrame& f, double lambda) {
  if (lambda == 0.0) return {1.0, 0.0};
  if (std::abs(lambda) <= h_switch) {
    const Complex a2 = 0.5 * f.d2;
    const Complex a3 = f.d3 / 6.0;
    return 1.0 - a2 * lambda + (a2 * a2 - a3) * (lambda * lambda);
  }
  return lambda / frame_point(c, f, lambda);
}

double frame_graph(const Curve& c, const NormalizedFrame& f, double x) {
  double lo = f.lambda_of(f.window_lo), hi = f.lambda_of(f.window_hi);
  const double ulo = frame_point(c, f, lo).real(), uhi = frame_point(c, f, hi).real();
  if (!(x >= ulo && x <= uhi))
    throw Error(ErrorKind::outside_window, "frame_graph: abscissa outside the monotone window");
  double lam = std::clamp(x, lo, hi);
  for (int it = 0; it < 200; ++it) {
    const double u = frame_point(c, f, lam).real() - x;
    if (u == 0.0) break;
    if (u > 0)
      hi = lam;
    else
      lo = lam;
    const double up = frame_deriv(c, f, lam).real();
    double next = lam - u / up;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - lam);
    lam = next;
    if (step <= 2 * eps * std::max(std::abs(lam), 1e-300) || hi - lo <= 2 * eps * std::max(std::abs(lo), std::abs(hi))) break;
  }
  return frame_point(c, f, lam).imag();
}

const char* to_string(Side s) {
  switch (s) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::on_curve: return "on-curve";
  }
  return "on-curve";
}

Side classify_side(const Curve& c, const NormalizedFrame& f, Complex z) {
  const Complex w = f.to_frame(z);
  if (!(std::abs(w) <= f.footprint))
    throw Error(ErrorKind::outside_window, "classify_side: point outside the local frame footprint");
  const double g = frame_graph(c, f, w.real());
  const double d = w.imag() - g;
  if (std::abs(d) <= 1e-12) return Side::on_curve;
  return d > 0 ? Side::left : Side::right;
}

}  // namespace plemelj
