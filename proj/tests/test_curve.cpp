#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "plemelj/curve.hpp"
#include "plemelj/quadrature.hpp"

using namespace plemelj;

namespace {

// Winding number of the closed curve around z by quadrature of dpsi/(psi - z).
double winding(const Curve& c, Complex z) {
  auto g = [&](double t) { return c.deriv(t) / (c.point(t) - z); };
  return (quad::integrate(g, c.a(), c.b()).value / two_pi_i).real();
}

std::string temp_file(const std::string& name, const std::string& body) {
  const auto p = std::filesystem::temp_directory_path() / ("plemelj_test_" + name);
  std::ofstream(p) << body;
  return p.string();
}

}  // namespace

TEST_SUITE("curve") {
  TEST_CASE("builtin segment, circle, parabola") {
    const auto seg = make_builtin_curve("segment", {-1, 1});
    CHECK_FALSE(seg.closed());
    CHECK(seg.point(0.3) == Complex(0.3, 0));
    CHECK(seg.deriv(-0.7) == Complex(1, 0));
    CHECK(seg.length() == doctest::Approx(2.0).epsilon(1e-14));

    const auto circ = make_builtin_curve("circle", {1});
    CHECK(circ.closed());
    CHECK(circ.a() == 0.0);
    CHECK(circ.b() == doctest::Approx(2 * pi));
    CHECK(circ.orientation() == 1);
    CHECK(std::abs(circ.point(1.2) - std::exp(Complex(0, 1.2))) < 1e-15);
    CHECK(circ.length() == doctest::Approx(2 * pi).epsilon(1e-13));

    const auto par = make_builtin_curve("parabola-graph", {0.5});
    CHECK(par.a() == -1.0);
    CHECK(par.b() == 1.0);
    CHECK(std::abs(par.point(0.5) - Complex(0.5, 0.125)) < 1e-15);
    // Simplicity and non-vanishing derivative on a 10^4 grid.
    CHECK_NOTHROW(verify_curve(par, {10000, 1e-9}));
    double min_speed = 1e300;
    for (int k = 0; k <= 10000; ++k) min_speed = std::min(min_speed, std::abs(par.deriv(-1.0 + 2.0 * k / 10000)));
    CHECK(min_speed >= 1.0);
  }

  TEST_CASE("builtin argument errors") {
    CHECK_THROWS_AS(make_builtin_curve("spiral", {}), Error);
    CHECK_THROWS_AS(make_builtin_curve("circle", {0}), Error);
    CHECK_THROWS_AS(make_builtin_curve("segment", {1, 1}), Error);
    CHECK_THROWS_AS(make_builtin_curve("arc", {1, 0, 7}), Error);
    try {
      make_builtin_curve("circle", {-1});
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::degenerate_geometry);
    }
  }

  TEST_CASE("spline through 64 circle samples") {
    std::vector<Complex> pts;
    for (int k = 0; k < 64; ++k) pts.push_back(std::exp(Complex(0, 2 * pi * k / 64)));
    const auto c = curve_from_points(pts, true);
    CHECK(c.closed());
    CHECK(c.kind() == CurveKind::spline_from_points);
    double dev = 0, speed_dev = 0;
    for (int k = 0; k < 4096; ++k) {
      const double t = c.a() + c.period() * k / 4096;
      dev = std::max(dev, std::abs(std::abs(c.point(t)) - 1.0));
      speed_dev = std::max(speed_dev, std::abs(std::abs(c.deriv(t)) - 1.0));
    }
    CHECK(dev < 1e-6);
    // Arc-length parameter.
    CHECK(speed_dev < 1e-8);
    CHECK(c.length() == doctest::Approx(2 * pi).epsilon(1e-5));
  }

  TEST_CASE("spline through collinear points is the segment") {
    const auto c = curve_from_points({{0, 0}, {0.3, 0}, {0.7, 0}, {1, 0}}, false);
    CHECK(c.length() == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = 0; k <= 100; ++k) {
      const double t = c.a() + (c.b() - c.a()) * k / 100;
      CHECK(std::abs(c.point(t).imag()) < 1e-14);
      CHECK(std::abs(c.point(t).real() - (t - c.a())) < 1e-12);
    }
  }

  TEST_CASE("spline input errors") {
    // Figure eight.
    std::vector<Complex> eight;
    for (int k = 0; k < 64; ++k) {
      const double t = 2 * pi * k / 64;
      eight.emplace_back(std::sin(t), std::sin(t) * std::cos(t));
    }
    try {
      curve_from_points(eight, true);
      FAIL("figure eight accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::not_simple);
    }
    CHECK_THROWS_AS(curve_from_points({{0, 0}, {1, 0}, {2, 0}}, false), Error);
    CHECK_THROWS_AS(curve_from_points({{0, 0}, {1, 0}, {1, 0}, {2, 0}, {3, 0}}, false), Error);
  }

  TEST_CASE("point files") {
    auto csv = temp_file("pts.csv", "re,im\n0,0\n0.3,0\n0.7,0\n1,0\n");
    auto ps = read_points(csv);
    CHECK(ps.points.size() == 4);
    CHECK_FALSE(ps.closed);
    auto js = temp_file("pts.json", R"({"points": [[1,0],[0,1],[-1,0],[0,-1]], "closed": true})");
    ps = read_points(js);
    CHECK(ps.points.size() == 4);
    CHECK(ps.closed);
    auto bad = temp_file("bad.csv", "re,im\n0,0\n1,x\n");
    try {
      read_points(bad);
      FAIL("bad row accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::schema);
      CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
    CHECK_THROWS_AS(read_points("/nonexistent/points.csv"), Error);
  }

  TEST_CASE("normalization of the segment is the identity") {
    const auto seg = make_builtin_curve("segment", {-1, 1});
    const auto f = normalize_at(seg, 0.0);
    CHECK(f.rotation == Complex(1, 0));
    CHECK(f.speed == 1.0);
    CHECK(f.window_lo == doctest::Approx(-1.0));
    CHECK(f.window_hi == doctest::Approx(1.0));
    CHECK(frame_point(seg, f, 0.0) == Complex(0, 0));
    CHECK(std::abs(frame_deriv(seg, f, 0.0) - 1.0) < 1e-15);
  }

  TEST_CASE("circle frame at i: graph is flat at the origin") {
    const auto circ = make_builtin_curve("circle", {1});
    const auto f = normalize_at(circ, pi / 2);
    CHECK(std::abs(frame_point(circ, f, 0.0)) < 1e-15);
    CHECK(std::abs(frame_deriv(circ, f, 0.0) - 1.0) < 1e-14);
    CHECK(std::abs(frame_graph(circ, f, 0.0)) < 1e-14);
    const double h = 1e-4;
    const double gp = (frame_graph(circ, f, h) - frame_graph(circ, f, -h)) / (2 * h);
    CHECK(std::abs(gp) < 1e-6);
  }

  TEST_CASE("endpoints are rejected") {
    const auto seg = make_builtin_curve("segment", {-1, 1});
    try {
      normalize_at(seg, -1.0);
      FAIL("endpoint accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::endpoint);
    }
    CHECK_THROWS_AS(normalize_at(seg, 1.0 - 1e-10), Error);
    CHECK_NOTHROW(normalize_at(seg, 1.0 - 1e-6));
    // Closed curves have no endpoints.
    const auto circ = make_builtin_curve("circle", {1});
    CHECK_NOTHROW(normalize_at(circ, 0.0));
  }

  TEST_CASE("regularized kernel") {
    const auto seg = make_builtin_curve("segment", {-1, 1});
    const auto fs = normalize_at(seg, 0.0);
    for (double l : {-0.5, -1e-5, 0.0, 1e-7, 0.3}) CHECK(std::abs(regularized_kernel(seg, fs, l) - 1.0) < 1e-15);

    const auto circ = make_builtin_curve("circle", {1});
    const auto f = normalize_at(circ, 0.0);
    CHECK(regularized_kernel(circ, f, 0.0) == Complex(1, 0));
    // Frame at 1: psi~(l) = -i (e^{il} - 1), psi~''(0) = i.
    CHECK(std::abs(f.d2 - Complex(0, 1)) < 1e-6);
    const double h = 1e-3;
    const Complex hp = (regularized_kernel(circ, f, h) - regularized_kernel(circ, f, -h)) / (2 * h);
    CHECK(std::abs(hp + f.d2 / 2.0) < 1e-6);
    // Closed form h(l) = i l / (e^{il} - 1).
    for (double l : {1e-3, 0.5, -2.0}) {
      const Complex exact = Complex(0, l) / (std::exp(Complex(0, l)) - 1.0);
      CHECK(std::abs(regularized_kernel(circ, f, l) - exact) < 1e-12);
    }
    // Continuity across the series switch.
    const double a = h_switch * (1 - 1e-9), b = h_switch * (1 + 1e-9);
    CHECK(std::abs(regularized_kernel(circ, f, a) - regularized_kernel(circ, f, b)) < 1e-10);
  }

  TEST_CASE("kernel on a refining grid has vanishing jumps") {
    const auto par = make_builtin_curve("parabola-graph", {0.5});
    const auto f = normalize_at(par, 0.1);
    double prev = 1e300;
    for (int n : {1000, 4000, 16000}) {
      double jump = 0;
      const double lo = -0.5, hi = 0.5;
      for (int k = 0; k < n; ++k) {
        const double l1 = lo + (hi - lo) * k / n, l2 = lo + (hi - lo) * (k + 1) / n;
        jump = std::max(jump, std::abs(regularized_kernel(par, f, l1) - regularized_kernel(par, f, l2)));
      }
      CHECK(jump < prev);
      prev = jump;
    }
    CHECK(prev < 1e-4);
  }

  TEST_CASE("side classification") {
    const auto seg = make_builtin_curve("segment", {-1, 1});
    const auto fs = normalize_at(seg, 0.0);
    CHECK(classify_side(seg, fs, {0, 0.1}) == Side::left);
    CHECK(classify_side(seg, fs, {0, -0.1}) == Side::right);
    CHECK(classify_side(seg, fs, {0.2, 0}) == Side::on_curve);
    try {
      classify_side(seg, fs, {0, 5});
      FAIL("far point classified");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::outside_window);
    }

    // Reflection across the segment swaps the label.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    for (int i = 0; i < 200; ++i) {
      const Complex z(u(rng), u(rng));
      if (std::abs(z.imag()) < 1e-9) continue;
      const auto a = classify_side(seg, fs, z), b = classify_side(seg, fs, std::conj(z));
      CHECK(a != b);
      CHECK(a != Side::on_curve);
    }

    // Counterclockwise circle: the interior is on the left.
    const auto circ = make_builtin_curve("circle", {1});
    const auto fc = normalize_at(circ, 0.0);
    CHECK(std::abs(winding(circ, 0.9) - 1.0) < 1e-9);
    CHECK(classify_side(circ, fc, 0.9) == Side::left);
    CHECK(std::abs(winding(circ, 1.1)) < 1e-9);
    CHECK(classify_side(circ, fc, 1.1) == Side::right);
  }

  TEST_CASE("clockwise closed curves flip orientation") {
    const auto cw = make_custom_curve([](double t) { return std::exp(Complex(0, -t)); },
                                      [](double t) { return Complex(0, -1) * std::exp(Complex(0, -t)); }, 0.0,
                                      2 * pi, true, "cw-circle");
    CHECK(cw.orientation() == -1);
    const auto f = normalize_at(cw, 0.0);
    // Walking clockwise, the interior is on the right.
    CHECK(classify_side(cw, f, 0.9) == Side::right);
  }

  TEST_CASE("nearest parameter") {
    const auto circ = make_builtin_curve("circle", {1});
    double d = 0;
    const double t = circ.nearest_parameter(std::polar(1.5, 2.0), &d);
    CHECK(t == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(d == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("displacement keeps tiny offsets") {
    const auto circ = make_builtin_curve("circle", {1});
    const Complex d = circ.displacement(1.0, 1e-20);
    CHECK(std::abs(d - Complex(0, 1e-20) * std::exp(Complex(0, 1.0))) < 1e-33);
    std::vector<Complex> pts;
    for (int k = 0; k < 64; ++k) pts.push_back(std::exp(Complex(0, 2 * pi * k / 64)));
    const auto s = curve_from_points(pts, true);
    const Complex ds = s.displacement(1.0, -1e-18);
    CHECK(std::abs(std::abs(ds) - 1e-18) < 1e-24);
  }
}
