#pragma once

// Data-parallel inner loops. Each kernel has a serial reference version and an
// OpenMP version; tests require them to agree bit for bit and bench/ compares
// their throughput.

#include <cstddef>
#include <functional>
#include <span>

#include "plemelj/common.hpp"
#include "plemelj/parallel.hpp"
#include "plemelj/quadrature.hpp"

namespace plemelj::kernels {

struct PanelEstimate {
  Complex value;
  double error;
};

/// One Gauss-Kronrod 7/15 estimate per panel. Error estimate follows the
/// QUADPACK heuristic (scaled |K15 - G7| with a round-off floor).
PanelEstimate gk15(const quad::Integrand& f, double a, double b);

void gk15_batch_serial(const quad::Integrand& f, std::span<const quad::Interval> panels,
                       std::span<PanelEstimate> out);
void gk15_batch_omp(const quad::Integrand& f, std::span<const quad::Interval> panels,
                    std::span<PanelEstimate> out);
void gk15_batch(const quad::Integrand& f, std::span<const quad::Interval> panels,
                std::span<PanelEstimate> out, Exec exec);

struct ParamPair {
  double tau1;
  double tau2;
};

/// |g(tau1) - g(tau2)| for every pair.
using ParamFunction = std::function<Complex(double)>;
void pair_differences_serial(const ParamFunction& g, std::span<const ParamPair> pairs,
                             std::span<double> out);
void pair_differences_omp(const ParamFunction& g, std::span<const ParamPair> pairs,
                          std::span<double> out);
void pair_differences(const ParamFunction& g, std::span<const ParamPair> pairs,
                      std::span<double> out, Exec exec);

struct SegmentProximity {
  double distance;  ///< smallest distance between non-adjacent polyline segments
  std::size_t i;
  std::size_t j;
};

/// Brute-force O(n^2) scan of a sampled polyline. Adjacent segments (and the
/// wrap-around pair when `closed`) are skipped.
SegmentProximity min_nonadjacent_distance_serial(std::span<const Complex> pts, bool closed);
SegmentProximity min_nonadjacent_distance_omp(std::span<const Complex> pts, bool closed);
SegmentProximity min_nonadjacent_distance(std::span<const Complex> pts, bool closed, Exec exec);

}  // namespace plemelj::kernels
