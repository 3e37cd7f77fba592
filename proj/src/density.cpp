#include "plemelj/density.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

// Boost 1.74 pchip calls isnan unqualified.
#include <math.h>
#include <boost/math/interpolators/pchip.hpp>

#include "plemelj/kernels.hpp"

namespace plemelj {

namespace {

const double dini_cut = std::exp(-3.0);

class ConstantDensity final : public DensityImpl {
 public:
  explicit ConstantDensity(Complex c) : c_(c) {}
  Complex at(const CurveSample&) const override { return c_; }
  Complex at_offset(const CurveSample&, double, Complex) const override { return c_; }

 private:
  Complex c_;
};

class LinearDensity final : public DensityImpl {
 public:
  LinearDensity(Complex a, Complex b) : a_(a), b_(b) {}
  Complex at(const CurveSample& s) const override { return a_ * s.z + b_; }
  Complex at_offset(const CurveSample& s, double, Complex dz) const override {
    return (a_ * s.z + b_) + a_ * dz;
  }

 private:
  Complex a_, b_;
};

class HolderPowerDensity final : public DensityImpl {
 public:
  HolderPowerDensity(double alpha, Complex c) : alpha_(alpha), c_(c) {}
  Complex at(const CurveSample& s) const override { return std::pow(std::abs(s.z - c_), alpha_); }
  Complex at_offset(const CurveSample& s, double, Complex dz) const override {
    return std::pow(std::abs((s.z - c_) + dz), alpha_);
  }

 private:
  double alpha_;
  Complex c_;
};

class DiniLogDensity final : public DensityImpl {
 public:
  explicit DiniLogDensity(Complex c) : c_(c) {}
  Complex at(const CurveSample& s) const override { return dini_log_profile((s.z - c_).real()); }
  Complex at_offset(const CurveSample& s, double, Complex dz) const override {
    return dini_log_profile((s.z - c_).real() + dz.real());
  }

 private:
  Complex c_;
};

class StepDensity final : public DensityImpl {
 public:
  explicit StepDensity(Complex c) : c_(c) {}
  Complex at(const CurveSample& s) const override { return value(s.z - c_); }
  Complex at_offset(const CurveSample& s, double, Complex dz) const override {
    return value((s.z - c_) + dz);
  }

 private:
  static Complex value(Complex w) { return w == Complex{} ? Complex(1.0) : w; }
  Complex c_;
};

class FunctionDensity final : public DensityImpl {
 public:
  explicit FunctionDensity(std::function<Complex(Complex)> f) : f_(std::move(f)) {}
  Complex at(const CurveSample& s) const override { return f_(s.z); }

 private:
  std::function<Complex(Complex)> f_;
};

class TabulatedDensity final : public DensityImpl {
 public:
  using Pchip = boost::math::interpolators::pchip<std::vector<double>>;

  TabulatedDensity(std::vector<double> tau, const std::vector<Complex>& v)
      : lo_(tau.front()), hi_(tau.back()), tau_(tau) {
    std::vector<double> re(v.size()), im(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      re[i] = v[i].real();
      im[i] = v[i].imag();
    }
    std::vector<double> tau2 = tau;
    re_ = std::make_unique<Pchip>(std::move(tau), std::move(re));
    im_ = std::make_unique<Pchip>(std::move(tau2), std::move(im));
  }
  Complex at(const CurveSample& s) const override {
    if (!(s.tau >= lo_ && s.tau <= hi_))
      throw Error(ErrorKind::out_of_domain, "tabulated density: parameter " + std::to_string(s.tau) +
                                                " outside [" + std::to_string(lo_) + ", " +
                                                std::to_string(hi_) + "]");
    return {(*re_)(s.tau), (*im_)(s.tau)};
  }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double max_gap() const {
    double g = 0.0;
    for (std::size_t i = 1; i < tau_.size(); ++i) g = std::max(g, tau_[i] - tau_[i - 1]);
    return g;
  }

 private:
  double lo_, hi_;
  std::vector<double> tau_;
  std::unique_ptr<Pchip> re_, im_;
};

std::vector<double> default_grid() {
  std::vector<double> g;
  for (int k = 24; k >= 0; --k) g.push_back(std::ldexp(1.0, -k));
  return g;
}

// Integral of omega(t)/t over [delta, 1], omega linear in log t between grid
// points and constant beyond the grid.
double log_integral(const std::vector<double>& grid, const std::vector<double>& omega, double delta) {
  const double lo = std::log(delta);
  const double hi = 0.0;
  if (!(lo < hi)) return 0.0;
  std::vector<double> x, y;
  x.push_back(std::min(lo, std::log(grid.front())));
  y.push_back(omega.front());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    x.push_back(std::log(grid[i]));
    y.push_back(omega[i]);
  }
  x.push_back(std::max(hi, std::log(grid.back())) + 1.0);
  y.push_back(omega.back());
  auto interp = [&](double v) {
    for (std::size_t i = 1; i < x.size(); ++i)
      if (v <= x[i]) {
        const double w = x[i] > x[i - 1] ? (v - x[i - 1]) / (x[i] - x[i - 1]) : 1.0;
        return y[i - 1] + w * (y[i] - y[i - 1]);
      }
    return y.back();
  };
  double sum = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double a = std::max(x[i - 1], lo);
    const double b = std::min(x[i], hi);
    if (b <= a) continue;
    sum += (b - a) * 0.5 * (interp(a) + interp(b));
  }
  return sum;
}

}  // namespace

double dini_log_profile(double x) {
  if (!(x > 0.0)) return 0.0;
  if (x >= dini_cut) return 1.0 / 9.0;
  const double l = std::log(x);
  return 1.0 / (l * l);
}

double dini_log_indicator_form(double x) {
  if (x < 0.0 || x >= dini_cut) return 0.0;
  if (x == 0.0) return 0.0;
  const double l = std::log(x);
  return 1.0 / (l * l);
}

Density::Density(std::shared_ptr<const DensityImpl> impl, std::string name, bool tabulated,
                 DeclaredClass declared)
    : impl_(std::move(impl)), name_(std::move(name)), tabulated_(tabulated), declared_(declared) {}

Complex Density::operator()(const CurveSample& s) const {
  const Complex v = impl_->at(s);
  if (!is_finite(v))
    throw Error(ErrorKind::evaluation, "density '" + name_ + "' is not finite at tau = " + std::to_string(s.tau));
  return v;
}

Complex Density::at_offset(const CurveSample& s, double dtau, Complex dz) const {
  const Complex v = impl_->at_offset(s, dtau, dz);
  if (!is_finite(v))
    throw Error(ErrorKind::evaluation, "density '" + name_ + "' is not finite near tau = " + std::to_string(s.tau));
  return v;
}

Density builtin_density(const std::string& name, const std::vector<double>& p) {
  for (double v : p)
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, name + ": non-finite parameter");
  auto too_many = [&](std::size_t n) {
    if (p.size() > n) throw Error(ErrorKind::invalid_argument, name + ": too many parameters");
  };
  if (name == "constant") {
    too_many(2);
    const Complex c = p.empty() ? Complex(1.0) : p.size() == 1 ? Complex(p[0]) : Complex(p[0], p[1]);
    return Density(std::make_shared<ConstantDensity>(c), name, false, {Regularity::holder, 1.0});
  }
  if (name == "linear") {
    too_many(2);
    const Complex a = p.size() >= 1 ? p[0] : 1.0;
    const Complex b = p.size() >= 2 ? p[1] : 0.0;
    return Density(std::make_shared<LinearDensity>(a, b), name, false, {Regularity::holder, 1.0});
  }
  if (name == "holder-power") {
    if (p.empty()) throw Error(ErrorKind::invalid_argument, "holder-power: exponent required");
    too_many(3);
    const double alpha = p[0];
    if (!(alpha > 0.0 && alpha <= 1.0))
      throw Error(ErrorKind::invalid_argument, "holder-power: exponent must lie in (0, 1]");
    const Complex c = p.size() == 1 ? Complex{} : p.size() == 2 ? Complex(p[1]) : Complex(p[1], p[2]);
    return Density(std::make_shared<HolderPowerDensity>(alpha, c), name, false,
                   {Regularity::holder, alpha});
  }
  if (name == "dini-log") {
    too_many(2);
    const Complex c = p.empty() ? Complex{} : p.size() == 1 ? Complex(p[0]) : Complex(p[0], p[1]);
    return Density(std::make_shared<DiniLogDensity>(c), name, false, {Regularity::dini, 0.0});
  }
  if (name == "step") {
    too_many(2);
    const Complex c = p.empty() ? Complex{} : p.size() == 1 ? Complex(p[0]) : Complex(p[0], p[1]);
    return Density(std::make_shared<StepDensity>(c), name, false, {Regularity::discontinuous, 0.0});
  }
  throw Error(ErrorKind::invalid_argument, "unknown density '" + name + "'");
}

Density make_function_density(std::function<Complex(Complex)> f, const std::string& name,
                              DeclaredClass declared) {
  return Density(std::make_shared<FunctionDensity>(std::move(f)), name, false, declared);
}

Density tabulated_density(std::vector<double> tau, std::vector<Complex> values) {
  if (tau.size() != values.size()) throw Error(ErrorKind::invalid_argument, "tabulated density: size mismatch");
  if (tau.size() < 4) throw Error(ErrorKind::invalid_argument, "tabulated density: need at least 4 samples");
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (!std::isfinite(tau[i]) || !is_finite(values[i]))
      throw Error(ErrorKind::invalid_argument, "tabulated density: non-finite sample at row " + std::to_string(i + 1));
    if (i > 0 && !(tau[i] > tau[i - 1]))
      throw Error(ErrorKind::invalid_argument, "tabulated density: tau must be strictly increasing (row " +
                                                   std::to_string(i + 1) + ")");
  }
  return Density(std::make_shared<TabulatedDensity>(std::move(tau), values), "tabulated", true,
                 {Regularity::continuous_only, 0.0});
}

Density read_tabulated_density(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open density file '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  std::vector<double> tau;
  std::vector<Complex> vals;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!header) {
      std::string h;
      for (char ch : line)
        if (ch != ' ' && ch != '\t') h += ch;
      if (h != "tau,re,im")
        throw Error(ErrorKind::schema, path + ":" + std::to_string(lineno) + ": expected header 'tau,re,im'");
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw Error(ErrorKind::schema, path + ":" + std::to_string(lineno) + ": malformed number");
      }
    }
    if (row.size() != 3) throw Error(ErrorKind::schema, path + ":" + std::to_string(lineno) + ": expected 3 columns");
    tau.push_back(row[0]);
    vals.emplace_back(row[1], row[2]);
  }
  return tabulated_density(std::move(tau), std::move(vals));
}

void check_coverage(const Density& d, const Curve& c, double max_gap) {
  const auto* tab = dynamic_cast<const TabulatedDensity*>(d.impl());
  if (tab == nullptr) return;
  if (tab->lo() > c.a() || tab->hi() < c.b())
    throw Error(ErrorKind::out_of_domain, "tabulated density does not cover the curve parameter domain");
  if (max_gap <= 0.0) max_gap = c.period() / 16.0;
  if (tab->max_gap() > max_gap)
    throw Error(ErrorKind::invalid_argument, "tabulated density: sample gap " + std::to_string(tab->max_gap()) +
                                                 " exceeds " + std::to_string(max_gap));
}

ModulusEstimate modulus_from_values(std::vector<double> grid, std::vector<double> omega) {
  if (grid.empty() || grid.size() != omega.size())
    throw Error(ErrorKind::invalid_argument, "modulus: grid and values differ in size");
  ModulusEstimate m;
  m.grid = std::move(grid);
  m.omega = std::move(omega);
  if (m.std_error.size() != m.grid.size()) m.std_error.assign(m.grid.size(), 0.0);
  for (int k = 3; k <= 20; ++k) {
    const double delta = std::ldexp(1.0, -k);
    m.tail_delta.push_back(delta);
    m.dini_tail.push_back(log_integral(m.grid, m.omega, delta));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < m.grid.size(); ++i) {
    const double t = m.grid[i];
    if (t < holder_fit_lo * (1 - 1e-12) || t > holder_fit_hi * (1 + 1e-12) || !(m.omega[i] > 0)) continue;
    pts.emplace_back(std::log(t), std::log(m.omega[i]));
  }
  if (pts.size() >= 3) {
    for (auto [x, y] : pts) {
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double n = double(pts.size());
    const double den = n * sxx - sx * sx;
    if (den > 0) {
      const double slope = (n * sxy - sx * sy) / den;
      const double icpt = (sy - slope * sx) / n;
      double ss = 0;
      for (auto [x, y] : pts) ss += (y - icpt - slope * x) * (y - icpt - slope * x);
      m.holder = {slope, std::exp(icpt), std::sqrt(ss / n), true};
    }
  }
  return m;
}

ModulusEstimate estimate_modulus(const Density& d, const Curve& c, const ModulusOptions& opts) {
  if (opts.n_pairs < 1000) throw Error(ErrorKind::invalid_argument, "estimate_modulus: need at least 1000 pairs per level");
  std::vector<double> grid = opts.t_grid.empty() ? default_grid() : opts.t_grid;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!(grid[i] > 0 && grid[i] <= 1) || (i > 0 && !(grid[i] > grid[i - 1])))
      throw Error(ErrorKind::invalid_argument, "estimate_modulus: grid must increase within (0, 1]");

  const std::size_t levels = grid.size();
  const kernels::ParamFunction g = [&](double tau) { return d({tau, c.point(tau)}); };
  std::vector<std::vector<double>> kept(levels);
  std::vector<double> raw(levels, 0.0);
  bool have_best = false;
  kernels::ParamPair best{};

  auto clip = [&](double t1, double t2) {
    if (c.closed()) return t2;
    if (t2 < c.a() || t2 > c.b()) t2 = 2 * t1 - t2;
    return std::clamp(t2, c.a(), c.b());
  };

  for (std::size_t li = levels; li-- > 0;) {
    const double t = grid[li];
    std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                      static_cast<std::uint32_t>(li)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n_local = have_best ? opts.n_pairs / 2 : 0;
    std::vector<kernels::ParamPair> pairs;
    pairs.reserve(opts.n_pairs);
    for (std::size_t i = 0; i < opts.n_pairs; ++i) {
      double t1, sep;
      if (i < n_local) {
        // Either end of the previous best pair may hold the steepest point.
        const double center = i % 2 == 0 ? best.tau1 : best.tau2;
        const double s = std::abs(c.deriv(center));
        t1 = center + (2 * unit(rng) - 1) * t / s;
        if (!c.closed()) t1 = std::clamp(t1, c.a(), c.b());
        sep = t * (0.5 + 0.5 * unit(rng));
      } else {
        t1 = c.a() + c.period() * unit(rng);
        sep = t * (1.0 - unit(rng));
      }
      const double dir = unit(rng) < 0.5 ? -1.0 : 1.0;
      const double dt = sep / std::abs(c.deriv(t1));
      pairs.push_back({t1, clip(t1, t1 + dir * dt)});
    }
    // Keep only pairs that satisfy the distance constraint in C.
    std::vector<kernels::ParamPair> valid;
    valid.reserve(pairs.size());
    for (const auto& p : pairs)
      if (std::abs(c.point(p.tau1) - c.point(p.tau2)) <= t) valid.push_back(p);
    std::vector<double> diff(valid.size());
    kernels::pair_differences(g, valid, diff, opts.exec);
    double mx = 0.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < diff.size(); ++i)
      if (diff[i] > mx) {
        mx = diff[i];
        arg = i;
      }
    kernels::ParamPair level_best = valid.empty() ? kernels::ParamPair{} : valid[arg];
    if (!valid.empty() && mx > 0) {
      // Random pairs rarely put an end exactly on a cusp. Stretch the best pair to
      // the full separation and slide it by pattern search, halving on failure.
      auto stretched = [&](double x, double dir) {
        if (!c.closed()) x = std::clamp(x, c.a(), c.b());
        return kernels::ParamPair{x, clip(x, x + dir * t / std::abs(c.deriv(x)))};
      };
      auto value = [&](const kernels::ParamPair& p) {
        if (!(std::abs(c.point(p.tau1) - c.point(p.tau2)) <= t)) return -1.0;
        return std::abs(g(p.tau1) - g(p.tau2));
      };
      const double dir = level_best.tau2 >= level_best.tau1 ? 1.0 : -1.0;
      double x = level_best.tau1, sgn = dir;
      double fx = value(stretched(x, sgn));
      if (const double f2 = value(stretched(level_best.tau2, -dir)); f2 > fx) {
        x = level_best.tau2;
        sgn = -dir;
        fx = f2;
      }
      double h = 0.5 * t / std::abs(c.deriv(x));
      for (int it = 0; it < 400 && h > 1e-16 * std::max(1.0, std::abs(x)); ++it) {
        const double fp = value(stretched(x + h, sgn)), fm = value(stretched(x - h, sgn));
        if (fp > fx && fp >= fm) {
          x += h;
          fx = fp;
        } else if (fm > fx) {
          x -= h;
          fx = fm;
        } else {
          h *= 0.5;
        }
      }
      if (fx > mx) {
        mx = fx;
        level_best = stretched(x, sgn);
      }
      diff.push_back(std::max(fx, 0.0));
    }
    raw[li] = mx;
    kept[li] = std::move(diff);
    if (mx > 0) {
      best = level_best;
      have_best = true;
    }
  }

  std::vector<double> omega(levels);
  double run = 0.0;
  for (std::size_t i = 0; i < levels; ++i) omega[i] = run = std::max(run, raw[i]);

  // Bootstrap: resample each level's differences and redo the running max.
  std::vector<std::vector<double>> boot(opts.bootstrap, std::vector<double>(levels, 0.0));
  for (int b = 0; b < opts.bootstrap; ++b) {
    std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                      0x9e3779b9u, static_cast<std::uint32_t>(b)};
    std::mt19937_64 rng(seq);
    double r = 0.0;
    for (std::size_t i = 0; i < levels; ++i) {
      const auto& k = kept[i];
      double mx = 0.0;
      if (!k.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, k.size() - 1);
        for (std::size_t s = 0; s < k.size(); ++s) mx = std::max(mx, k[pick(rng)]);
      }
      boot[b][i] = r = std::max(r, mx);
    }
  }
  std::vector<double> se(levels, 0.0);
  if (opts.bootstrap > 1) {
    for (std::size_t i = 0; i < levels; ++i) {
      double mean = 0;
      for (int b = 0; b < opts.bootstrap; ++b) mean += boot[b][i];
      mean /= opts.bootstrap;
      double var = 0;
      for (int b = 0; b < opts.bootstrap; ++b) var += (boot[b][i] - mean) * (boot[b][i] - mean);
      se[i] = std::sqrt(var / (opts.bootstrap - 1));
    }
  }

  ModulusEstimate m = modulus_from_values(grid, omega);
  m.std_error = std::move(se);
  return m;
}

RegularityClass classify_regularity(const ModulusEstimate& m) {
  RegularityClass out;
  const bool all_zero = std::all_of(m.omega.begin(), m.omega.end(), [](double w) { return w <= 0.0; });
  if (all_zero) {
    out.kind = Regularity::holder;
    out.alpha = 1.0;
    out.tail.cls = extrap::TailClass::convergent;
    out.tail.geometric = true;
    return out;
  }
  std::vector<double> idx, inc;
  for (std::size_t i = 1; i < m.dini_tail.size(); ++i) {
    idx.push_back(-std::log2(m.tail_delta[i]));
    inc.push_back(m.dini_tail[i] - m.dini_tail[i - 1]);
  }
  out.tail = extrap::classify_increments(idx, inc);
  if (m.holder.valid && m.holder.residual < holder_residual_max && m.holder.alpha >= holder_alpha_min) {
    out.kind = Regularity::holder;
    out.alpha = m.holder.alpha;
    return out;
  }
  out.kind = out.tail.cls == extrap::TailClass::convergent ? Regularity::dini : Regularity::unknown;
  return out;
}

const char* to_string(Regularity r) {
  switch (r) {
    case Regularity::holder: return "holder";
    case Regularity::dini: return "dini";
    case Regularity::continuous_only: return "continuous-only";
    case Regularity::discontinuous: return "discontinuous";
    case Regularity::unknown: return "inconclusive";
  }
  return "inconclusive";
}

}  // namespace plemelj
