#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "plemelj/common.hpp"
#include "plemelj/curve.hpp"
#include "plemelj/extrapolate.hpp"
#include "plemelj/parallel.hpp"

namespace plemelj {

/// A point on a curve: parameter and position.
struct CurveSample {
  double tau;
  Complex z;
};

enum class Regularity { unknown, holder, dini, continuous_only, discontinuous };

struct DeclaredClass {
  Regularity kind = Regularity::unknown;
  double alpha = 0.0;  ///< Hölder exponent when kind == holder
};

class DensityImpl {
 public:
  virtual ~DensityImpl() = default;
  virtual Complex at(const CurveSample& s) const = 0;
  /// Value at the curve point s.z + dz (parameter s.tau + dtau). Builtins keep
  /// the offset separate so points far closer than ulp(s.z) stay distinct.
  virtual Complex at_offset(const CurveSample& s, double dtau, Complex dz) const {
    return at({s.tau + dtau, s.z + dz});
  }
};

class Density {
 public:
  Density() = default;
  Density(std::shared_ptr<const DensityImpl> impl, std::string name, bool tabulated,
          DeclaredClass declared);

  /// Throws ErrorKind::evaluation on non-finite values.
  Complex operator()(const CurveSample& s) const;
  Complex at_offset(const CurveSample& s, double dtau, Complex dz) const;
  /// Convenience for curves whose points are given by tau.
  Complex on(const Curve& c, double tau) const { return (*this)({tau, c.point(tau)}); }

  const std::string& name() const { return name_; }
  bool tabulated() const { return tabulated_; }
  const DeclaredClass& declared() const { return declared_; }
  const DensityImpl* impl() const { return impl_.get(); }

 private:
  std::shared_ptr<const DensityImpl> impl_;
  std::string name_;
  bool tabulated_ = false;
  DeclaredClass declared_;
};

/// constant [c | re, im]; linear [(a (, b))] = a z + b, default z;
/// holder-power [alpha (, c)] = |z - c|^alpha; dini-log [(c)] = L(Re(z - c))
/// with L(x) = log(x)^-2 on (0, e^-3), 1/9 for x >= e^-3, 0 for x <= 0;
/// step [(c)] = z - c, except 1 at z = c.
Density builtin_density(const std::string& name, const std::vector<double>& params);

/// Density from a closed-form function of the curve point.
Density make_function_density(std::function<Complex(Complex)> f, const std::string& name = "custom",
                              DeclaredClass declared = {});

/// Samples (tau, value), strictly increasing tau, at least 4 rows, all finite.
/// Interpolated by PCHIP on each component; evaluation outside the sampled
/// range throws out_of_domain.
Density tabulated_density(std::vector<double> tau, std::vector<Complex> values);
/// CSV with header `tau,re,im`.
Density read_tabulated_density(const std::string& path);

/// Tabulated coverage of [c.a(), c.b()] with no gap above `max_gap` (default
/// 1/16 of the domain).
void check_coverage(const Density& d, const Curve& c, double max_gap = 0.0);

/// The literal indicator form 1_[0,e^-3)(x) log(x)^-2 (zero from e^-3 on).
/// Kept only to document its jump at e^-3.
double dini_log_indicator_form(double x);
double dini_log_profile(double x);

struct ModulusOptions {
  std::size_t n_pairs = 4096;  ///< per grid value
  std::vector<double> t_grid;  ///< increasing in (0, 1]; empty = 2^-k, k = 24..0
  std::uint64_t seed = 1;
  int bootstrap = 16;
  Exec exec = Exec::parallel;
};

struct HolderFit {
  double alpha = 0.0;
  double C = 0.0;
  double residual = 0.0;  ///< RMS in log space
  bool valid = false;
};

struct ModulusEstimate {
  std::vector<double> grid;
  std::vector<double> omega;       ///< running maximum, non-decreasing in t
  std::vector<double> std_error;   ///< bootstrap standard error per grid point
  std::vector<double> tail_delta;  ///< delta_k = 2^-k, k = 3..20
  std::vector<double> dini_tail;   ///< integral of omega(t)/t over [delta_k, 1]
  HolderFit holder;
};

inline constexpr double holder_fit_lo = 1e-6;
inline constexpr double holder_fit_hi = 1e-1;
inline constexpr double holder_residual_max = 0.05;
inline constexpr double holder_alpha_min = 0.05;

/// Sampled modulus of continuity of d on c in the Euclidean metric of C.
/// Underestimates the true supremum.
ModulusEstimate estimate_modulus(const Density& d, const Curve& c, const ModulusOptions& opts = {});

/// Tail integrals and Hölder fit for a given omega on a grid.
ModulusEstimate modulus_from_values(std::vector<double> grid, std::vector<double> omega);

struct RegularityClass {
  Regularity kind = Regularity::unknown;  ///< holder, dini, or unknown (= inconclusive)
  double alpha = 0.0;
  extrap::TailVerdict tail;
};

RegularityClass classify_regularity(const ModulusEstimate& m);
const char* to_string(Regularity r);

}  // namespace plemelj
