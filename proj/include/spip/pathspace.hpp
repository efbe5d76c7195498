#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "spip/dynamics.hpp"

namespace spip {

/// One inversion problem: maps, noise, path length, start and optional target.
struct SpipInstance {
  TransformSet maps;
  NoiseBound noise;
  int steps = 0;
  LatticePoint x0;
  std::optional<LatticePoint> target;

  std::size_t alphabet_size() const { return maps.size(); }
};

/// A (symbolic code, rounded state sequence) pair.
struct Path {
  SymbolicCode code;
  std::vector<LatticePoint> states;

  friend bool operator==(const Path&, const Path&) = default;
  friend auto operator<=>(const Path&, const Path&) = default;
};

struct BranchStats {
  Rational min;
  Rational max;
  Rational mean;
};

struct PathSpaceCensus {
  BigInt total_pairs;
  std::map<LatticePoint, BigInt> endpoints;
  /// Over every expanded (state, symbol) pair.
  BranchStats branching;
  std::vector<Path> paths;
  bool paths_truncated = false;
};

struct EnumerateOptions {
  BigInt cap = BigInt(10'000'000);
  /// Number of paths to keep in the census; 0 keeps none.
  std::size_t retain_paths = 0;
  unsigned threads = 1;
};

inline constexpr std::size_t kDefaultRetainedPaths = 100'000;

/// Exhaustive DFS over every code and every rounding outcome. Throws CapExceeded
/// once more than `cap` (code, path) pairs have been visited.
PathSpaceCensus enumerate_paths(const SpipInstance& inst, const EnumerateOptions& options = {});

/// Exact multiplicity of every endpoint by layered dynamic programming.
/// `cap` bounds the number of (state, symbol, outcome) expansions.
std::map<LatticePoint, BigInt> endpoint_counts(const SpipInstance& inst, const BigInt& cap = BigInt(100'000'000));

/// Number of (code, path) pairs that end at inst.target.
BigInt count_paths_to(const SpipInstance& inst, const BigInt& cap = BigInt(100'000'000));

/// Exact min/max/mean of |branch_set| over states × all symbols.
BranchStats branching_stats(const TransformSet& ts, const NoiseBound& noise, std::span<const LatticePoint> states);

/// Distinct states at each layer 0..n reachable from x0.
std::vector<std::vector<LatticePoint>> reachable_layers(const SpipInstance& inst, const BigInt& cap = BigInt(100'000'000));

struct BoundReport {
  std::int64_t k_lower = 1;
  BigInt bound_kn;
  BigInt bound_mkn;
};

/// k^n and (m·k)^n.
BoundReport growth_bounds(std::int64_t m, std::int64_t k, std::int64_t n);

nlohmann::json census_to_json(const PathSpaceCensus& census);

}  // namespace spip
