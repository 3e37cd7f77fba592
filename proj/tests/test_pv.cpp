#include <doctest.h>

#include <cmath>
#include <random>

#include "plemelj/pv.hpp"

using namespace plemelj;

namespace {

Integrand1D from_density(const Density& d) {
  return Integrand1D([d](double x) { return d({x, x}); },
                     [d](double base, double h) { return d.at_offset({base, base}, h, h); });
}

Integrand1D fn(std::function<Complex(double)> f) { return Integrand1D(std::move(f)); }

void check_contract(const PVResult& r, double abs_tol) {
  if (r.converged) CHECK(r.error_estimate <= abs_tol);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].epsilon < r.trace[i - 1].epsilon);
}

}  // namespace

TEST_SUITE("pv") {
  TEST_CASE("excision on the interval") {
    auto r = pv_interval_excision(fn([](double) { return Complex(1); }), 0.0, -1, 1);
    CHECK(r.converged);
    CHECK(std::abs(r.value) < 1e-12);
    CHECK(r.method == PVMethod::excision);
    check_contract(r, 1e-10);

    r = pv_interval_excision(fn([](double t) { return Complex(t); }), 0.0, -1, 1);
    CHECK(std::abs(r.value - 2.0) < 1e-10);

    r = pv_interval_excision(fn([](double) { return Complex(1); }), 0.25, -1, 1);
    const double exact = std::log(0.75 / 1.25);
    CHECK(std::abs(r.value - exact) < 1e-10);
    CHECK(r.trace.size() == 37);
    check_contract(r, 1e-10);
    // Brute force at a single tiny epsilon.
    const auto b = excised_integral(fn([](double) { return Complex(1); }), 0.25, -1, 1, 1e-10);
    CHECK(std::abs(b.value - exact) < 1e-9);
  }

  TEST_CASE("subtraction on the interval") {
    auto r = pv_interval_subtraction(fn([](double) { return Complex(1); }), 0.0, -1, 1);
    CHECK(r.converged);
    CHECK(std::abs(r.value) < 1e-12);
    CHECK(r.method == PVMethod::subtraction);

    // Integral of (t^2 - 1/4)/(t - 1/2) = t + 1/2 over [0, 1] is 1.
    r = pv_interval_subtraction(fn([](double t) { return Complex(t * t); }), 0.5, 0, 1);
    CHECK(std::abs(r.value - 1.0) < 1e-10);
    check_contract(r, 1e-10);
  }

  TEST_CASE("dini-log at its singular point: subtraction matches excision") {
    const double c = std::exp(-3.0) / 2;
    const auto d = builtin_density("dini-log", {c});
    const auto f = from_density(d);
    const auto s = pv_interval_subtraction(f, c, -1, 1);
    const auto e = pv_interval_excision(f, c, -1, 1);
    CHECK(std::abs(s.value - e.value) < 1e-6);
    check_contract(s, 1e-10);
    check_contract(e, 1e-10);
  }

  TEST_CASE("endpoints and divergence") {
    try {
      pv_interval_excision(fn([](double) { return Complex(1); }), 1.0 - 1e-13, -1, 1);
      FAIL("endpoint accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::endpoint);
    }
    // sign(t)/t has no P.V. at 0: reported, not fabricated.
    const auto sign = fn([](double t) { return Complex(t > 0 ? 1.0 : t < 0 ? -1.0 : 0.0); });
    const auto r = pv_interval_excision(sign, 0.0, -1, 1);
    CHECK_FALSE(r.converged);
    CHECK(r.trace.size() == 37);
    // Partials grow like 2 log(1/eps).
    CHECK(r.trace.back().value.real() > r.trace.front().value.real() + 2 * std::log(2.0) * 30);
    const auto s = pv_interval_subtraction(sign, 0.0, -1, 1);
    CHECK_FALSE(s.converged);
  }

  TEST_CASE("curve pullback") {
    const auto seg = make_builtin_curve("segment", {-1, 1});
    auto r = pv_curve(seg, builtin_density("constant", {1}), 0.0);
    CHECK(std::abs(r.value) < 1e-10);
    CHECK(r.method == PVMethod::pullback);
    r = pv_curve(seg, builtin_density("linear", {1, 0}), 0.0);
    CHECK(std::abs(r.value - 2.0) < 1e-10);

    const auto circ = make_builtin_curve("circle", {1});
    for (double t : {0.0, 0.7, 2.0, 4.5}) {
      const auto p = pv_curve(circ, builtin_density("constant", {1}), t);
      CHECK(p.converged);
      CHECK(std::abs(p.value - Complex(0, pi)) < 1e-9);
      // Independent check: disk excision in the plane.
      const auto q = pv_curve_disk_excision(circ, builtin_density("constant", {1}), t);
      CHECK(std::abs(q.value - Complex(0, pi)) < 1e-8);
    }
    CHECK_THROWS_AS(pv_curve(seg, builtin_density("constant", {1}), -1.0), Error);
  }

  TEST_CASE("asymmetric cut correction vanishes") {
    const auto par = make_builtin_curve("parabola-graph", {1.0});
    const auto d = builtin_density("holder-power", {0.5, 0.2});
    double prev = 1e300;
    for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
      const double c = std::abs(asymmetric_cut_correction(par, d, 0.2, eps));
      CHECK(c < prev);
      prev = c;
    }
    CHECK(prev < 1e-7);
  }

  TEST_CASE("even/odd split") {
    auto p = even_odd_split([](double x) { return Complex(x * x + x); }, 0.5);
    CHECK(std::abs(p.first - 0.25) < 1e-15);
    CHECK(std::abs(p.second - 0.5) < 1e-15);
    p = even_odd_split([](double x) { return Complex(std::exp(x)); }, 1.0);
    CHECK(std::abs(p.first - std::cosh(1.0)) < 1e-15);
    CHECK(std::abs(p.second - std::sinh(1.0)) < 1e-15);
    p = even_odd_split([](double x) { return Complex(std::cos(x) + 3 * x); }, 0.0);
    CHECK(p.first == Complex(1));
    CHECK(p.second == Complex(0));
  }

  TEST_CASE("existence predicate") {
    auto r = pv_exists_predicate([](double x) { return Complex(x); });
    CHECK(r.verdict == Existence::exists);
    CHECK(std::abs(r.pv - 2.0) < 1e-8);
    CHECK(std::abs(pv_interval_excision(fn([](double x) { return Complex(x); }), 0.0, -1, 1).value - r.pv) < 1e-8);

    r = pv_exists_predicate([](double x) { return Complex(x > 0 ? 1.0 : -1.0); });
    CHECK(r.verdict == Existence::fails);
    CHECK(r.decay_exponent < 0.5);
    // L1 trace grows by log 2 per level.
    const auto n = r.l1_trace.size();
    CHECK(r.l1_trace[n - 1].value.real() - r.l1_trace[n - 2].value.real() == doctest::Approx(std::log(2.0)));

    r = pv_exists_predicate([](double x) { return Complex(std::cos(x)); });
    CHECK(r.verdict == Existence::exists);
    CHECK(std::abs(r.pv) < 1e-12);
    CHECK(r.l1_estimate == 0.0);
  }

  TEST_CASE("method equivalence on random interior points") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-0.95, 0.95);
    const std::vector<Density> ds{builtin_density("constant", {1, 0.5}), builtin_density("linear", {1, 0.2}),
                                  builtin_density("holder-power", {0.5}), builtin_density("holder-power", {0.25, 0.3}),
                                  builtin_density("dini-log", {0.1})};
    for (const auto& d : ds) {
      const auto f = from_density(d);
      for (int i = 0; i < 100; ++i) {
        const double t0 = u(rng);
        const auto a = pv_interval_excision(f, t0, -1, 1);
        const auto b = pv_interval_subtraction(f, t0, -1, 1);
        CHECK(std::abs(a.value - b.value) <= 1e-6);
      }
    }
  }

  TEST_CASE("parameterization invariance") {
    const double s = std::tanh(2.0);
    const auto id = make_builtin_curve("segment", {-1, 1});
    const auto re = make_custom_curve([s](double t) { return Complex(std::tanh(2 * t) / s); },
                                      [s](double t) { return Complex(2.0 / (s * std::cosh(2 * t) * std::cosh(2 * t))); },
                                      -1, 1, false, "tanh-segment");
    for (const auto& d : {builtin_density("holder-power", {0.5, 0.1}), builtin_density("linear", {2, 1})}) {
      for (double x : {-0.4, 0.1, 0.6}) {
        const double tau = std::atanh(x * s) / 2;  // same point on the reparameterized curve
        const auto a = pv_curve(id, d, x);
        const auto b = pv_curve(re, d, tau);
        CHECK(std::abs(a.value - b.value) < 1e-8);
      }
    }
  }

  TEST_CASE("even numerators vanish at the center") {
    for (auto f : {std::function<Complex(double)>([](double x) { return Complex(std::cos(3 * x)); }),
                   std::function<Complex(double)>([](double x) { return Complex(std::sqrt(std::abs(x)), x * x); })}) {
      const auto r = pv_interval_excision(fn(f), 0.0, -1, 1);
      CHECK(std::abs(r.value) <= std::max(r.error_estimate, 1e-14));
    }
  }

  TEST_CASE("shrinking and widening") {
    auto f = fn([](double t) { return Complex(std::exp(t), std::sqrt(std::abs(t - 0.1))); });
    const auto full = pv_interval_subtraction(f, 0.0, -1, 1);
    for (double c : {0.25, 0.5, 0.75}) {
      auto g = [&](double t) { return f(t) / t; };
      const auto outer_l = quad::integrate(g, -1, -c);
      const auto outer_r = quad::integrate(g, c, 1);
      const auto inner = pv_interval_subtraction(f, 0.0, -c, c);
      CHECK(std::abs(full.value - outer_l.value - outer_r.value - inner.value) < 1e-9);
    }
  }

  TEST_CASE("linearity") {
    auto f = [](double t) { return Complex(std::sin(t) + 1.0); };
    auto g = [](double t) { return Complex(std::sqrt(std::abs(t - 0.3)), 1.0); };
    const Complex alpha(2, -1), beta(0.5, 3);
    const double t0 = 0.3;
    const auto pf = pv_interval_subtraction(fn(f), t0, -1, 1);
    const auto pg = pv_interval_subtraction(fn(g), t0, -1, 1);
    const auto ph = pv_interval_subtraction(fn([&](double t) { return alpha * f(t) + beta * g(t); }), t0, -1, 1);
    const double bound = std::abs(alpha) * pf.error_estimate + std::abs(beta) * pg.error_estimate + ph.error_estimate;
    CHECK(std::abs(ph.value - alpha * pf.value - beta * pg.value) <= bound + 1e-12);
  }

  TEST_CASE("spline fidelity") {
    const auto circ = make_builtin_curve("circle", {1});
    std::vector<Complex> pts;
    for (int k = 0; k < 256; ++k) pts.push_back(std::exp(Complex(0, 2 * pi * k / 256)));
    const auto sp = curve_from_points(pts, true);
    const auto d = builtin_density("linear", {1, 0.5});
    for (double t : {0.3, 2.0, 5.0}) {
      const Complex z = circ.point(t);
      const double tau = sp.nearest_parameter(z);
      const auto a = pv_curve(circ, d, t);
      const auto b = pv_curve(sp, d, tau);
      CHECK(std::abs(a.value - b.value) < 1e-5);
    }
  }
}
