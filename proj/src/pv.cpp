#include "plemelj/pv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plemelj/extrapolate.hpp"

namespace plemelj {

namespace {

constexpr double ln2 = 0.69314718055994530942;

struct Limit {
  Complex value{};
  double error = 0.0;
  std::string note;
  bool divergent = false;
};

double spread_last3(const std::vector<Complex>& s) {
  const std::size_t n = s.size();
  if (n < 2) return std::numeric_limits<double>::infinity();
  const std::size_t first = n >= 3 ? n - 3 : 0;
  double sp = 0.0;
  for (std::size_t i = first; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) sp = std::max(sp, std::abs(s[i] - s[j]));
  return sp;
}

std::size_t nearest_index(const std::vector<double>& k, double target) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < k.size(); ++i)
    if (std::abs(k[i] - target) < std::abs(k[best] - target)) best = i;
  return best;
}

// Limit of partial sums s[i] indexed by k[i] (increasing k = deeper).
Limit limit_of_sequence(const std::vector<double>& k, const std::vector<Complex>& s, bool extrapolate,
                        double abs_tol) {
  Limit out;
  const std::size_t n = s.size();
  out.value = s.back();
  out.error = spread_last3(s);
  out.note = "last partial";
  if (n < 5) return out;

  std::vector<double> idx, inc;
  for (std::size_t i = 1; i < n; ++i) {
    idx.push_back(k[i]);
    inc.push_back(std::abs(s[i] - s[i - 1]));
  }
  const auto verdict = extrap::classify_increments(idx, inc);
  if (verdict.cls == extrap::TailClass::divergent) {
    out.divergent = true;
    out.note = "divergent partial sums (decay exponent " + std::to_string(verdict.decay_exponent) + ")";
    return out;
  }
  if (!extrapolate || out.error <= 0.1 * abs_tol) {
    if (out.error <= 0.1 * abs_tol) out.note = "plateau";
    return out;
  }

  std::vector<Complex> last4(s.end() - 4, s.end());
  const auto geo = extrap::geometric_tail(last4);

  std::vector<std::size_t> picks;
  const double K = k.back();
  for (double frac : {1.0 / 8, 1.0 / 4, 1.0 / 2, 1.0}) {
    const std::size_t i = nearest_index(k, K * frac);
    if (picks.empty() || i > picks.back()) picks.push_back(i);
  }
  extrap::Estimate ric;
  if (picks.size() >= 3) {
    std::vector<double> kk;
    std::vector<Complex> ss;
    for (auto i : picks) {
      kk.push_back(k[i]);
      ss.push_back(s[i]);
    }
    ric = extrap::richardson_in_inverse_index(kk, ss);
  }
  if (geo.valid && (!ric.valid || geo.error <= ric.error) && geo.error < out.error) {
    out.value = geo.value;
    out.error = geo.error;
    out.note = "geometric tail";
  } else if (ric.valid && ric.error < out.error) {
    out.value = ric.value;
    out.error = ric.error;
    out.note = "richardson in 1/k";
  }
  return out;
}

quad::Options inner_options(const PVConfig& cfg, double share) {
  quad::Options o = cfg.quadrature;
  o.abs_tol = cfg.quadrature.abs_tol * share;
  o.rel_tol = 0.0;
  return o;
}

void check_interval(double t0, double a, double b) {
  if (!std::isfinite(t0) || !std::isfinite(a) || !std::isfinite(b) || !(a < b))
    throw Error(ErrorKind::invalid_argument, "pv: need finite a < b");
  if (!(t0 > a && t0 < b)) throw Error(ErrorKind::invalid_argument, "pv: t0 must lie inside (a, b)");
  if (t0 - a <= 1e-12 || b - t0 <= 1e-12)
    throw Error(ErrorKind::endpoint, "pv: t0 within 1e-12 of an interval endpoint");
}

// Signed integral for lo > hi as well.
quad::Result signed_integrate(const quad::Integrand& g, double lo, double hi, const quad::Options& o) {
  if (lo <= hi) return quad::integrate(g, lo, hi, o);
  auto r = quad::integrate(g, hi, lo, o);
  r.value = -r.value;
  return r;
}

struct Ladder {
  std::vector<Complex> inc;  // inc[j-1] = shell j
  double error = 0.0;
  bool ok = true;
};

// Shells [V - j ln2, V - (j-1) ln2] for j = j0+1..j1, integrated in one call.
void extend_ladder(const quad::Integrand& g, double V, int j0, int j1, const quad::Options& o, Ladder& L) {
  std::vector<double> bp;
  for (int j = j1; j >= j0; --j) bp.push_back(V - j * ln2);
  quad::Options oo = o;
  oo.max_subdivisions = std::max(o.max_subdivisions, 8 * (j1 - j0));
  const auto r = quad::integrate(g, bp, oo);
  for (int j = j0 + 1; j <= j1; ++j) {
    const double lo = V - j * ln2;
    const double hi = V - (j - 1) * ln2;
    L.inc.push_back(quad::sum_panels(r, lo, hi));
  }
  L.error += r.error;
  L.ok = L.ok && r.ok;
}

PVResult finish(PVResult r, double quad_error, bool quad_ok, const Limit& lim, double abs_tol) {
  r.value = lim.value;
  r.error_estimate = lim.error + quad_error;
  r.converged = !lim.divergent && quad_ok && r.error_estimate <= abs_tol && is_finite(r.value);
  r.note = lim.note;
  if (!quad_ok) r.note += "; quadrature did not reach its tolerance";
  return r;
}

// Numerator pulled back to the frame parameter: phi * psi~' * h.
struct Pullback {
  const Curve& c;
  const Density& d;
  NormalizedFrame f;
  CurveSample base;

  Complex numerator(double lambda) const {
    const double dtau = lambda / f.speed;
    const Complex disp = c.displacement(f.tau0, dtau);
    const Complex phi = lambda == 0.0 ? d(base) : d.at_offset(base, dtau, disp);
    Complex h;
    if (lambda == 0.0) {
      h = 1.0;
    } else if (std::abs(lambda) <= h_switch) {
      const Complex a2 = 0.5 * f.d2;
      const Complex a3 = f.d3 / 6.0;
      h = 1.0 - a2 * lambda + (a2 * a2 - a3) * (lambda * lambda);
    } else {
      h = lambda / (f.rotation * disp);
    }
    return phi * frame_deriv(c, f, lambda) * h;
  }
  double lambda_lo() const { return c.closed() ? -0.5 * c.period() * f.speed : (c.a() - f.tau0) * f.speed; }
  double lambda_hi() const { return c.closed() ? 0.5 * c.period() * f.speed : (c.b() - f.tau0) * f.speed; }

  // Smallest lambda > 0 with |psi~(side lambda)| = eps.
  double cut(double eps, int side) const {
    const double limit = side > 0 ? lambda_hi() : -lambda_lo();
    auto r = [&](double lam) { return std::abs(frame_point(c, f, side * lam)); };
    double lo = 0.0, hi = std::min(eps, limit);
    while (r(hi) < eps) {
      lo = hi;
      if (hi >= limit) throw Error(ErrorKind::invalid_argument, "excision radius exceeds the curve");
      hi = std::min(2 * hi, limit);
    }
    for (int it = 0; it < 200 && hi - lo > 2 * std::numeric_limits<double>::epsilon() * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (r(mid) < eps ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
};

}  // namespace

std::vector<double> PVConfig::default_excision_sequence(int first, int last) {
  std::vector<double> e;
  for (int k = first; k <= last; ++k) e.push_back(std::ldexp(1.0, -k));
  return e;
}

const char* to_string(PVMethod m) {
  switch (m) {
    case PVMethod::excision: return "excision";
    case PVMethod::subtraction: return "subtraction";
    case PVMethod::pullback: return "pullback";
    case PVMethod::automatic: return "automatic";
  }
  return "automatic";
}

quad::Result excised_integral(const Integrand1D& f, double t0, double a, double b, double eps,
                              const quad::Options& opts) {
  if (!(eps > 0)) throw Error(ErrorKind::invalid_argument, "excised_integral: eps must be positive");
  quad::Result total;
  total.ok = true;
  for (int side : {-1, 1}) {
    const double len = side > 0 ? b - t0 : t0 - a;
    if (len <= eps) continue;
    auto g = [&, side](double s) { return f.offset(t0, side * s) / s; };
    const auto bp = quad::graded_breakpoints(eps, len, eps, eps, 0.5);
    quad::Options o = opts;
    o.max_subdivisions = std::max<int>(opts.max_subdivisions, 4 * static_cast<int>(bp.size()));
    const auto r = quad::integrate(g, bp, o);
    // s runs outward on both sides; the left half enters with a minus sign.
    total.value += double(side) * r.value;
    total.error += r.error;
    total.ok = total.ok && r.ok;
    total.evaluations += r.evaluations;
  }
  return total;
}

PVResult pv_interval_excision(const Integrand1D& f, double t0, double a, double b, const PVConfig& cfg) {
  check_interval(t0, a, b);
  const double d = std::min(t0 - a, b - t0);
  std::vector<double> eps;
  for (std::size_t i = 0; i < cfg.excision_seq.size(); ++i) {
    const double e = cfg.excision_seq[i];
    if (!(e > 0) || (i > 0 && !(e < cfg.excision_seq[i - 1])))
      throw Error(ErrorKind::invalid_argument, "excision sequence must be positive and strictly decreasing");
    if (e < d) eps.push_back(e);
  }
  if (eps.size() < 2) throw Error(ErrorKind::invalid_argument, "excision sequence too short for this t0");

  const auto o = inner_options(cfg, 0.05);
  PVResult res;
  res.method = PVMethod::excision;
  const auto outer = excised_integral(f, t0, a, b, eps.front(), o);

  auto g = [&](double v) {
    const double s = std::exp(v);
    return f.offset(t0, s) - f.offset(t0, -s);
  };
  std::vector<double> bp;
  for (auto it = eps.rbegin(); it != eps.rend(); ++it) bp.push_back(std::log(*it));
  quad::Options so = o;
  so.max_subdivisions = std::max<int>(o.max_subdivisions, 8 * static_cast<int>(bp.size()));
  const auto shells = quad::integrate(g, bp, so);

  std::vector<double> k;
  std::vector<Complex> s;
  Complex partial = outer.value;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (i > 0) partial += quad::sum_panels(shells, std::log(eps[i]), std::log(eps[i - 1]));
    res.trace.push_back({eps[i], partial});
    k.push_back(-std::log2(eps[i]));
    s.push_back(partial);
  }
  const auto lim = limit_of_sequence(k, s, cfg.richardson, cfg.quadrature.abs_tol);
  return finish(std::move(res), outer.error + shells.error, outer.ok && shells.ok, lim, cfg.quadrature.abs_tol);
}

PVResult pv_interval_subtraction(const Integrand1D& f, double t0, double a, double b, const PVConfig& cfg) {
  check_interval(t0, a, b);
  const Complex f0 = f.offset(t0, 0.0);
  if (!is_finite(f0)) throw Error(ErrorKind::evaluation, "pv: numerator not finite at t0");
  const double m = std::min(t0 - a, b - t0);
  const auto o = inner_options(cfg, 0.02);

  PVResult res;
  res.method = PVMethod::subtraction;
  double qerr = 0.0;
  bool qok = true;

  // Part of the longer side beyond the symmetric core.
  Complex rem{};
  if (b - t0 > m || t0 - a > m) {
    const int side = b - t0 > m ? 1 : -1;
    const double far = side > 0 ? b - t0 : t0 - a;
    auto g = [&, side](double s) { return (f.offset(t0, side * s) - f0) / s; };
    const auto r = quad::integrate(g, m, far, o);
    rem = double(side) * r.value;
    qerr += r.error;
    qok = qok && r.ok;
  }
  const Complex logterm = f0 * std::log((b - t0) / (t0 - a));

  // Symmetric core in the log variable, dyadic shells downward from ln m.
  auto core = [&](double v) {
    const double s = std::exp(v);
    return (f.offset(t0, s) - f0) - (f.offset(t0, -s) - f0);
  };
  const double V = std::log(m);
  Ladder L;
  extend_ladder(core, V, 0, 64, o, L);
  std::vector<Complex> S(L.inc.size());
  auto rebuild = [&] {
    S.resize(L.inc.size());
    Complex acc{};
    for (std::size_t j = 0; j < L.inc.size(); ++j) S[j] = acc += L.inc[j];
  };
  rebuild();

  Limit lim;
  std::vector<Complex> last4(S.end() - 4, S.end());
  const auto geo = extrap::geometric_tail(last4);
  if (geo.valid && geo.error <= 0.01 * cfg.quadrature.abs_tol) {
    lim.value = geo.value;
    lim.error = geo.error;
    lim.note = "geometric tail";
  } else {
    const int jmax = static_cast<int>(std::floor((V + 700.0) / ln2));
    for (int j0 = 64; j0 < jmax; j0 += 64) extend_ladder(core, V, j0, std::min(j0 + 64, jmax), inner_options(cfg, 0.001), L);
    rebuild();
    const int J = static_cast<int>(S.size());

    std::vector<double> idx, inc;
    for (int i = 0;; ++i) {
      const int j = static_cast<int>(std::lround(16.0 * std::pow(2.0, 0.5 * i)));
      if (j > J) break;
      idx.push_back(j);
      inc.push_back(std::abs(L.inc[j - 1]));
    }
    const auto verdict = extrap::classify_increments(idx, inc);
    lim.value = S.back();
    lim.error = std::abs(S.back() - S[J / 2 - 1]);
    if (verdict.cls == extrap::TailClass::divergent) {
      lim.divergent = true;
      lim.note = "divergent shell sums (decay exponent " + std::to_string(verdict.decay_exponent) + ")";
    } else {
      std::vector<double> kk;
      std::vector<Complex> ss;
      for (int div : {16, 8, 4, 2, 1}) {
        const int j = J / div;
        kk.push_back(j);
        ss.push_back(S[j - 1]);
      }
      const auto ric = extrap::richardson_in_inverse_index(kk, ss);
      std::vector<Complex> tail4(S.end() - 4, S.end());
      const auto geo2 = extrap::geometric_tail(tail4);
      lim.note = "shell sums";
      if (ric.valid && ric.error < lim.error) {
        lim.value = ric.value;
        lim.error = ric.error;
        lim.note = "richardson in 1/J";
      }
      if (geo2.valid && geo2.error < lim.error) {
        lim.value = geo2.value;
        lim.error = geo2.error;
        lim.note = "geometric tail";
      }
    }
  }
  qerr += L.error;
  qok = qok && L.ok;
  // Coarse trace: the core truncated at s = 2^-j m.
  for (std::size_t j = 0; j < S.size(); j = j < 64 ? j + 1 : j * 2 + 1)
    res.trace.push_back({m * std::ldexp(1.0, -static_cast<int>(j + 1)), S[j] + rem + logterm});
  lim.value += rem + logterm;
  return finish(std::move(res), qerr, qok, lim, cfg.quadrature.abs_tol);
}

PVResult pv_curve(const Curve& c, const Density& d, double tau0, const PVConfig& cfg) {
  Pullback pb{c, d, normalize_at(c, tau0), {}};
  pb.base = {pb.f.tau0, pb.f.t0};
  Integrand1D f([&pb](double lam) { return pb.numerator(lam); },
                [&pb](double base, double h) { return pb.numerator(base + h); });
  const double lo = pb.lambda_lo(), hi = pb.lambda_hi();

  PVResult r;
  if (cfg.method == PVMethod::excision) {
    r = pv_interval_excision(f, 0.0, lo, hi, cfg);
    r.note = "excision: " + r.note;
  } else {
    r = pv_interval_subtraction(f, 0.0, lo, hi, cfg);
    r.note = "subtraction: " + r.note;
    if (!r.converged && cfg.method == PVMethod::automatic) {
      auto ex = pv_interval_excision(f, 0.0, lo, hi, cfg);
      if (ex.converged || ex.error_estimate < r.error_estimate) {
        ex.note = "excision fallback: " + ex.note;
        r = std::move(ex);
      }
    }
  }
  r.method = PVMethod::pullback;
  return r;
}

PVResult pv_curve_disk_excision(const Curve& c, const Density& d, double tau0, const PVConfig& cfg) {
  Pullback pb{c, d, normalize_at(c, tau0), {}};
  pb.base = {pb.f.tau0, pb.f.t0};
  const double lo = pb.lambda_lo(), hi = pb.lambda_hi();
  const double reach = 0.5 * std::min(std::abs(frame_point(c, pb.f, lo)), std::abs(frame_point(c, pb.f, hi)));
  std::vector<double> eps;
  for (double e : cfg.excision_seq)
    if (e < reach) eps.push_back(e);
  if (eps.size() < 2) throw Error(ErrorKind::invalid_argument, "excision sequence too short for this curve");

  const auto o = inner_options(cfg, 0.01);
  auto over_lambda = [&](double lam) { return pb.numerator(lam) / lam; };
  auto right = [&](double w) { return pb.numerator(std::exp(w)); };
  auto left = [&](double w) { return pb.numerator(-std::exp(w)); };

  PVResult res;
  res.method = PVMethod::excision;
  double c1 = pb.cut(eps[0], -1), c2 = pb.cut(eps[0], 1);
  const auto oa = quad::integrate(over_lambda, lo, -c1, o);
  const auto ob = quad::integrate(over_lambda, c2, hi, o);
  double qerr = oa.error + ob.error;
  bool qok = oa.ok && ob.ok;
  Complex partial = oa.value + ob.value;
  std::vector<double> k;
  std::vector<Complex> s;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (i > 0) {
      const double n1 = pb.cut(eps[i], -1), n2 = pb.cut(eps[i], 1);
      const auto rr = quad::integrate(right, std::log(n2), std::log(c2), o);
      const auto rl = quad::integrate(left, std::log(n1), std::log(c1), o);
      partial += rr.value - rl.value;
      qerr += rr.error + rl.error;
      qok = qok && rr.ok && rl.ok;
      c1 = n1;
      c2 = n2;
    }
    res.trace.push_back({eps[i], partial});
    k.push_back(-std::log2(eps[i]));
    s.push_back(partial);
  }
  const auto lim = limit_of_sequence(k, s, cfg.richardson, cfg.quadrature.abs_tol);
  return finish(std::move(res), qerr, qok, lim, cfg.quadrature.abs_tol);
}

Complex asymmetric_cut_correction(const Curve& c, const Density& d, double tau0, double eps,
                                  const quad::Options& opts) {
  Pullback pb{c, d, normalize_at(c, tau0), {}};
  pb.base = {pb.f.tau0, pb.f.t0};
  const double c1 = pb.cut(eps, -1), c2 = pb.cut(eps, 1);
  auto right = [&](double w) { return pb.numerator(std::exp(w)); };
  auto left = [&](double w) { return pb.numerator(-std::exp(w)); };
  const double le = std::log(eps);
  return signed_integrate(right, le, std::log(c2), opts).value +
         signed_integrate(left, std::log(c1), le, opts).value;
}

std::pair<Complex, Complex> even_odd_split(const std::function<Complex(double)>& f, double x) {
  const Complex p = f(x);
  const Complex q = x == 0.0 ? p : f(-x);
  return {0.5 * (p + q), 0.5 * (p - q)};
}

const char* to_string(Existence e) {
  switch (e) {
    case Existence::exists: return "exists";
    case Existence::fails: return "fails";
    case Existence::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

ExistenceResult pv_exists_predicate(const std::function<Complex(double)>& f, const PVConfig& cfg, int depth) {
  if (depth < 8) throw Error(ErrorKind::invalid_argument, "exists: depth must be at least 8");
  auto odd = [&](double x) { return 0.5 * (f(x) - f(-x)); };
  auto g_abs = [&](double v) { return Complex(std::abs(odd(std::exp(v)))); };
  auto g = [&](double v) { return odd(std::exp(v)); };
  std::vector<double> bp;
  for (int k = depth; k >= 0; --k) bp.push_back(-k * ln2);
  quad::Options o = inner_options(cfg, 0.05);
  o.max_subdivisions = std::max(o.max_subdivisions, 8 * depth);
  const auto ra = quad::integrate(g_abs, bp, o);
  const auto rs = quad::integrate(g, bp, o);

  ExistenceResult out;
  std::vector<double> k, inc;
  std::vector<Complex> l1, pv;
  double t = 0.0;
  Complex p{};
  for (int j = 1; j <= depth; ++j) {
    const double lo = -j * ln2, hi = -(j - 1) * ln2;
    const double shell = quad::sum_panels(ra, lo, hi).real();
    t += shell;
    p += 2.0 * quad::sum_panels(rs, lo, hi);
    k.push_back(j);
    inc.push_back(shell);
    l1.emplace_back(t);
    pv.push_back(p);
    out.l1_trace.push_back({std::ldexp(1.0, -j), Complex(t)});
  }
  const auto verdict = extrap::classify_increments(k, inc);
  out.decay_exponent = verdict.decay_exponent;
  out.l1_estimate = t;
  if (verdict.cls == extrap::TailClass::convergent) {
    out.verdict = Existence::exists;
    const auto ll = limit_of_sequence(k, l1, true, cfg.quadrature.abs_tol);
    out.l1_estimate = ll.value.real();
    const auto lp = limit_of_sequence(k, pv, true, cfg.quadrature.abs_tol);
    out.pv = lp.value;
    out.pv_error = lp.error + 2.0 * rs.error;
  } else if (verdict.cls == extrap::TailClass::divergent) {
    out.verdict = Existence::fails;
    out.pv = p;
    out.pv_error = std::numeric_limits<double>::infinity();
  } else {
    out.pv = p;
    out.pv_error = std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace plemelj
