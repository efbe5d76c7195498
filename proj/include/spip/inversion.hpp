#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "spip/pathspace.hpp"

namespace spip {

using Solution = Path;

struct InversionResult {
  /// Sorted, deduplicated by (code, states).
  std::vector<Solution> solutions;
  BigInt nodes_expanded;
  double wall_time = 0.0;
  /// True when the whole search space was covered, so `solutions` is complete.
  bool exhausted = false;
  /// Random search only.
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;

  double hit_rate() const { return trials == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(trials); }
};

/// True iff the states start at x0, end at the target (when set), and every step
/// lands in the branch set of its map. Branch membership witnesses an admissible δ.
/// Throws LengthMismatch / InvalidCode.
bool verify_path(const SpipInstance& inst, std::span<const int> code, std::span<const LatticePoint> states);

enum class Pruning {
  none,
  /// Drop a node when the target lies outside its forward reach box.
  reach_box,
  /// Restrict to states that are both forward reachable and co-reachable.
  layered,
};

struct DfsOptions {
  std::size_t max_solutions = std::numeric_limits<std::size_t>::max();
  /// Bound on expanded nodes.
  BigInt cap = BigInt(50'000'000);
  Pruning pruning = Pruning::reach_box;
  unsigned threads = 1;
};

InversionResult invert_dfs(const SpipInstance& inst, const DfsOptions& options = {});

struct MitmOptions {
  /// Bound on stored half-paths and joined solutions.
  BigInt cap = BigInt(10'000'000);
  /// Largest backward window, in lattice cells, before WindowOverflow.
  std::uint64_t max_window_cells = 1ull << 22;
};

/// Meet in the middle: forward half-paths from x0 joined with backward
/// preimage chains from the target. Requires n ≥ 2.
InversionResult invert_mitm(const SpipInstance& inst, const MitmOptions& options = {});

/// Blind sampling of (code, noise) realizations; hits are verified.
InversionResult invert_random(const SpipInstance& inst, std::uint64_t trials, RandomStream& rng);

/// {"code":[...],"states":[[x,y],...]}
std::string solution_json_line(const Solution& s);

}  // namespace spip
