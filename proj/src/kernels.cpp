#include "plemelj/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace plemelj::kernels {

namespace {

struct Gk15Rule {
  std::array<double, 8> x;   // Kronrod abscissae, x[0] = 0
  std::array<double, 8> wk;  // Kronrod weights
  std::array<double, 8> wg;  // Gauss weights on the shared nodes, 0 elsewhere
};

const Gk15Rule& rule() {
  static const Gk15Rule r = [] {
    Gk15Rule out{};
    const auto& kx = boost::math::quadrature::gauss_kronrod<double, 15>::abscissa();
    const auto& kw = boost::math::quadrature::gauss_kronrod<double, 15>::weights();
    const auto& gx = boost::math::quadrature::gauss<double, 7>::abscissa();
    const auto& gw = boost::math::quadrature::gauss<double, 7>::weights();
    for (std::size_t i = 0; i < 8; ++i) {
      out.x[i] = kx[i];
      out.wk[i] = kw[i];
      out.wg[i] = 0.0;
      for (std::size_t j = 0; j < gx.size(); ++j)
        if (std::abs(gx[j] - kx[i]) < 1e-14) out.wg[i] = gw[j];
    }
    return out;
  }();
  return r;
}

// Runs body(i) for i in [0, n) and rethrows the first exception after the
// parallel region; exceptions must not cross an OpenMP boundary.
template <class Body>
void omp_for(std::size_t n, Body&& body) {
  std::exception_ptr first;
  std::mutex m;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(parallel::effective_threads()) if (n > 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(m);
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
}

double point_segment_distance(Complex p, Complex a, Complex b) {
  const Complex ab = b - a;
  const double len2 = std::norm(ab);
  double t = len2 > 0 ? ((p - a) * std::conj(ab)).real() / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

double cross(Complex u, Complex v) { return u.real() * v.imag() - u.imag() * v.real(); }

double segment_distance(Complex a, Complex b, Complex c, Complex d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

std::size_t segment_count(std::size_t npts, bool closed) {
  if (npts < 2) return 0;
  return closed ? npts : npts - 1;
}

bool adjacent(std::size_t i, std::size_t j, std::size_t m, bool closed) {
  if (j <= i + 1) return true;
  return closed && i == 0 && j == m - 1;
}

SegmentProximity scan_row(std::span<const Complex> pts, bool closed, std::size_t i) {
  const std::size_t n = pts.size();
  const std::size_t m = segment_count(n, closed);
  SegmentProximity best{std::numeric_limits<double>::infinity(), i, i};
  const Complex a = pts[i];
  const Complex b = pts[(i + 1) % n];
  for (std::size_t j = i + 2; j < m; ++j) {
    if (adjacent(i, j, m, closed)) continue;
    const double d = segment_distance(a, b, pts[j], pts[(j + 1) % n]);
    if (d < best.distance) best = {d, i, j};
  }
  return best;
}

bool better(const SegmentProximity& x, const SegmentProximity& y) {
  if (x.distance != y.distance) return x.distance < y.distance;
  if (x.i != y.i) return x.i < y.i;
  return x.j < y.j;
}

}  // namespace

PanelEstimate gk15(const quad::Integrand& f, double a, double b) {
  const auto& r = rule();
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  std::array<Complex, 15> fv;
  fv[0] = f(center);
  for (std::size_t i = 1; i < 8; ++i) {
    fv[2 * i - 1] = f(center - half * r.x[i]);
    fv[2 * i] = f(center + half * r.x[i]);
  }

  Complex resk = r.wk[0] * fv[0];
  Complex resg = r.wg[0] * fv[0];
  double resabs = r.wk[0] * std::abs(fv[0]);
  for (std::size_t i = 1; i < 8; ++i) {
    const Complex pair = fv[2 * i - 1] + fv[2 * i];
    resk += r.wk[i] * pair;
    resg += r.wg[i] * pair;
    resabs += r.wk[i] * (std::abs(fv[2 * i - 1]) + std::abs(fv[2 * i]));
  }
  const Complex mean = 0.5 * resk;
  double resasc = r.wk[0] * std::abs(fv[0] - mean);
  for (std::size_t i = 1; i < 8; ++i)
    resasc += r.wk[i] * (std::abs(fv[2 * i - 1] - mean) + std::abs(fv[2 * i] - mean));

  const double scale = std::abs(half);
  resk *= half;
  resg *= half;
  resabs *= scale;
  resasc *= scale;

  double err = std::abs(resk - resg);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
    err = std::max(50.0 * eps * resabs, err);
  if (!is_finite(resk) || !std::isfinite(err)) err = std::numeric_limits<double>::infinity();
  return {resk, err};
}

void gk15_batch_serial(const quad::Integrand& f, std::span<const quad::Interval> panels,
                       std::span<PanelEstimate> out) {
  for (std::size_t i = 0; i < panels.size(); ++i) out[i] = gk15(f, panels[i].a, panels[i].b);
}

void gk15_batch_omp(const quad::Integrand& f, std::span<const quad::Interval> panels,
                    std::span<PanelEstimate> out) {
  omp_for(panels.size(), [&](std::size_t i) { out[i] = gk15(f, panels[i].a, panels[i].b); });
}

void gk15_batch(const quad::Integrand& f, std::span<const quad::Interval> panels,
                std::span<PanelEstimate> out, Exec exec) {
  // Small batches are not worth a parallel region.
  if (exec == Exec::serial || panels.size() < 4)
    gk15_batch_serial(f, panels, out);
  else
    gk15_batch_omp(f, panels, out);
}

void pair_differences_serial(const ParamFunction& g, std::span<const ParamPair> pairs,
                             std::span<double> out) {
  for (std::size_t i = 0; i < pairs.size(); ++i)
    out[i] = std::abs(g(pairs[i].tau1) - g(pairs[i].tau2));
}

void pair_differences_omp(const ParamFunction& g, std::span<const ParamPair> pairs,
                          std::span<double> out) {
  omp_for(pairs.size(),
          [&](std::size_t i) { out[i] = std::abs(g(pairs[i].tau1) - g(pairs[i].tau2)); });
}

void pair_differences(const ParamFunction& g, std::span<const ParamPair> pairs,
                      std::span<double> out, Exec exec) {
  if (exec == Exec::serial)
    pair_differences_serial(g, pairs, out);
  else
    pair_differences_omp(g, pairs, out);
}

SegmentProximity min_nonadjacent_distance_serial(std::span<const Complex> pts, bool closed) {
  SegmentProximity best{std::numeric_limits<double>::infinity(), 0, 0};
  const std::size_t m = segment_count(pts.size(), closed);
  for (std::size_t i = 0; i < m; ++i) {
    const auto row = scan_row(pts, closed, i);
    if (better(row, best)) best = row;
  }
  return best;
}

SegmentProximity min_nonadjacent_distance_omp(std::span<const Complex> pts, bool closed) {
  const std::size_t m = segment_count(pts.size(), closed);
  std::vector<SegmentProximity> rows(m);
  omp_for(m, [&](std::size_t i) { rows[i] = scan_row(pts, closed, i); });
  SegmentProximity best{std::numeric_limits<double>::infinity(), 0, 0};
  for (const auto& row : rows)
    if (better(row, best)) best = row;
  return best;
}

SegmentProximity min_nonadjacent_distance(std::span<const Complex> pts, bool closed, Exec exec) {
  return exec == Exec::serial ? min_nonadjacent_distance_serial(pts, closed)
                              : min_nonadjacent_distance_omp(pts, closed);
}

}  // namespace plemelj::kernels
