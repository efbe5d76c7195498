#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "spip/dynamics.hpp"

namespace spip {

struct RunConfig {
  std::string label;
  int steps = 1;
  int transforms = 1;
  Rational epsilon;
  std::uint64_t trials = 1000;
  std::uint64_t map_seed = 1;
  std::uint64_t noise_seed = 1;
};

struct RunMetrics {
  double entropy_bits = 0.0;
  std::uint64_t unique_endpoints = 0;
  /// Endpoints hit at least twice.
  std::uint64_t collisions = 0;
  std::uint64_t most_frequent_count = 0;
  /// Mean Euclidean distance of endpoints from x0.
  double avg_distance = 0.0;
  /// entropy_bits / log₂(transforms); equals entropy_bits when transforms = 1.
  double symbolic_freedom = 0.0;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

/// −Σ pᵢ log₂ pᵢ over the counts. Throws EmptyHistogram when all counts are zero.
double shannon_entropy(std::span<const std::uint64_t> counts);

template <class Key>
double shannon_entropy(const std::map<Key, std::uint64_t>& histogram) {
  std::vector<std::uint64_t> counts;
  counts.reserve(histogram.size());
  for (const auto& [k, c] : histogram) counts.push_back(c);
  return shannon_entropy(counts);
}

double symbolic_freedom(double entropy_bits, int transforms);

/// Map family used by the simulation harness: A = s·R(θ) with s ∈ [0.3, 0.7] and
/// θ ∈ [0, 2π) rounded to rationals over 2¹⁶, b with half-integer components in [−3, 3].
TransformSet generate_transform_set(int transforms, std::uint64_t seed);

/// N trajectories from x0 = (0, 0) with uniform codes; trial i draws from
/// RandomStream::derive(noise_seed, i), so results do not depend on `threads`.
RunMetrics run_metrics(const RunConfig& cfg, unsigned threads = 1);

/// The eight (steps, transforms, ε) configurations of the reference study.
std::vector<RunConfig> default_suite(std::uint64_t map_seed = 1, std::uint64_t noise_seed = 2,
                                     std::uint64_t trials = 1000);

std::vector<RunMetrics> run_suite(std::span<const RunConfig> cfgs, unsigned threads = 1);

inline constexpr const char* kSuiteCsvHeader =
    "experiment,steps,transforms,epsilon,entropy_bits,unique_endpoints,collisions,most_frequent_count,avg_"
    "distance,symbolic_freedom";

std::string suite_csv(std::span<const RunConfig> cfgs, std::span<const RunMetrics> metrics);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> xs, std::span<const double> ys);

/// Branching proxy ⌈10·ε⌉, at least 1.
std::int64_t noise_branching_proxy(const Rational& epsilon);

struct SurfaceCell {
  int steps = 0;
  Rational epsilon;
  double log2_space = 0.0;
};

/// log₂((m·⌈10ε⌉)ⁿ) = n·log₂(m·⌈10ε⌉) for every (n, ε) pair.
std::vector<SurfaceCell> sweep_surface(std::span<const int> steps, std::span<const Rational> epsilons, int transforms);

inline constexpr const char* kSurfaceCsvHeader = "n,epsilon,log2_space";

std::string surface_csv(std::span<const SurfaceCell> cells);

struct GroverCost {
  double log2_space = 0.0;
  double log2_grover = 0.0;
};

GroverCost grover_cost(std::int64_t m, std::int64_t k, std::int64_t n);

/// Decimal rendering of an exact rational: exact when the expansion terminates
/// within `digits` places, otherwise rounded.
std::string decimal(const Rational& q, int digits = 6);

}  // namespace spip
