#include "plemelj/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "plemelj/kernels.hpp"

namespace plemelj::quad {

namespace {

template <class T>
T pairwise(std::span<const T> xs) {
  if (xs.empty()) return T{};
  if (xs.size() <= 8) {
    T s{};
    for (const auto& x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise(xs.subspan(0, half)) + pairwise(xs.subspan(half));
}

bool splittable(const Panel& p) {
  const double scale = std::max(std::abs(p.a), std::abs(p.b));
  const double w = p.b - p.a;
  return w > 64.0 * std::numeric_limits<double>::epsilon() * scale &&
         w > 1e4 * std::numeric_limits<double>::min();
}

void evaluate(const Integrand& f, const std::vector<Interval>& todo, std::vector<Panel>& into,
              Exec exec, int& evaluations) {
  std::vector<kernels::PanelEstimate> est(todo.size());
  kernels::gk15_batch(f, todo, est, exec);
  for (std::size_t i = 0; i < todo.size(); ++i)
    into.push_back({todo[i].a, todo[i].b, est[i].value, est[i].error});
  evaluations += 15 * static_cast<int>(todo.size());
}

void totals(std::vector<Panel>& panels, Complex& value, double& error) {
  std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  std::vector<Complex> v(panels.size());
  std::vector<double> e(panels.size());
  for (std::size_t i = 0; i < panels.size(); ++i) {
    v[i] = panels[i].value;
    e[i] = panels[i].error;
  }
  value = pairwise<Complex>(v);
  error = pairwise<double>(e);
}

}  // namespace

Complex pairwise_sum(std::span<const Complex> xs) { return pairwise(xs); }
double pairwise_sum(std::span<const double> xs) { return pairwise(xs); }

Result integrate(const Integrand& f, std::span<const double> breakpoints, const Options& opts) {
  if (breakpoints.size() < 2) throw Error(ErrorKind::invalid_argument, "integrate: need two breakpoints");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] >= breakpoints[i - 1]))
      throw Error(ErrorKind::invalid_argument, "integrate: breakpoints must be sorted");

  Result r;
  std::vector<Interval> todo;
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (breakpoints[i] > breakpoints[i - 1]) todo.push_back({breakpoints[i - 1], breakpoints[i]});
  if (todo.empty()) {
    r.ok = true;
    return r;
  }
  evaluate(f, todo, r.panels, opts.exec, r.evaluations);

  for (;;) {
    totals(r.panels, r.value, r.error);
    const double tol = std::max(opts.abs_tol, opts.rel_tol * std::abs(r.value));
    if (r.error <= tol) {
      r.ok = true;
      break;
    }
    if (!std::isfinite(r.error) && !is_finite(r.value)) break;
    const auto room = static_cast<std::size_t>(opts.max_subdivisions) > r.panels.size()
                          ? static_cast<std::size_t>(opts.max_subdivisions) - r.panels.size()
                          : 0;
    if (room == 0) break;

    // Bulk marking: split the largest-error panels until they carry at least
    // half of the total error estimate.
    std::vector<std::size_t> order(r.panels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
      return r.panels[i].error > r.panels[j].error;
    });
    std::vector<char> mark(r.panels.size(), 0);
    double marked = 0.0;
    std::size_t n_marked = 0;
    for (std::size_t idx : order) {
      if (n_marked >= room || marked >= 0.5 * r.error) break;
      if (!splittable(r.panels[idx])) continue;
      mark[idx] = 1;
      marked += r.panels[idx].error;
      ++n_marked;
    }
    if (n_marked == 0) break;

    std::vector<Panel> kept;
    todo.clear();
    for (std::size_t i = 0; i < r.panels.size(); ++i) {
      const auto& p = r.panels[i];
      if (!mark[i]) {
        kept.push_back(p);
        continue;
      }
      const double mid = 0.5 * (p.a + p.b);
      todo.push_back({p.a, mid});
      todo.push_back({mid, p.b});
    }
    r.panels = std::move(kept);
    evaluate(f, todo, r.panels, opts.exec, r.evaluations);
  }
  return r;
}

Result integrate(const Integrand& f, double a, double b, const Options& opts) {
  const double bp[2] = {a, b};
  return integrate(f, bp, opts);
}

Complex sum_panels(const Result& r, double lo, double hi) {
  std::vector<Complex> v;
  for (const auto& p : r.panels)
    if (p.a >= lo && p.b <= hi) v.push_back(p.value);
  return pairwise_sum(v);
}

double error_panels(const Result& r, double lo, double hi) {
  std::vector<double> e;
  for (const auto& p : r.panels)
    if (p.a >= lo && p.b <= hi) e.push_back(p.error);
  return pairwise_sum(e);
}

std::vector<double> graded_breakpoints(double lo, double hi, double center, double min_width,
                                       double ratio) {
  if (!(lo < hi) || center < lo || center > hi || !(min_width > 0) || !(ratio > 0 && ratio < 1))
    throw Error(ErrorKind::invalid_argument, "graded_breakpoints: bad arguments");
  std::vector<double> pts{lo, hi, center};
  for (int side : {-1, 1}) {
    const double len = side > 0 ? hi - center : center - lo;
    if (len <= 0) continue;
    double w = len * ratio;
    while (w >= min_width) {
      pts.push_back(center + side * w);
      w *= ratio;
    }
    pts.push_back(center + side * std::min(w, len));
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace plemelj::quad
