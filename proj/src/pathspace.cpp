#include "spip/pathspace.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "spip/errors.hpp"
#include "spip/parallel.hpp"

namespace spip {
namespace {

std::uint64_t clamp_cap(const BigInt& cap) {
  if (cap < 0) return 0;
  if (cap > BigInt(std::numeric_limits<std::uint64_t>::max())) return std::numeric_limits<std::uint64_t>::max();
  return cap.convert_to<std::uint64_t>();
}

// DFS from one top-level outcome (layer 1). Leaves are counted locally and
// published in batches so the cap can be enforced across workers.
class SubtreeWalker {
 public:
  SubtreeWalker(const SpipInstance& inst, std::uint64_t cap, std::atomic<std::uint64_t>& published,
                std::size_t retain)
      : inst_(inst), cap_(cap), published_(published), retain_(retain) {
    code_.resize(static_cast<std::size_t>(inst.steps));
    states_.resize(static_cast<std::size_t>(inst.steps) + 1);
  }

  void run(int first_symbol, LatticePoint x0, LatticePoint x1) {
    states_[0] = x0;
    expanded_.insert(x0);
    code_[0] = first_symbol;
    states_[1] = x1;
    descend(1);
    flush();
  }

  std::uint64_t leaves = 0;
  std::unordered_map<LatticePoint, std::uint64_t> endpoints;
  std::unordered_set<LatticePoint> expanded_;
  std::vector<Path> paths;
  bool truncated = false;

 private:
  void descend(std::size_t depth) {
    const std::size_t n = code_.size();
    if (depth == n) {
      ++leaves;
      ++endpoints[states_[n]];
      if (paths.size() < retain_) {
        paths.push_back({code_, states_});
      } else if (retain_ > 0) {
        truncated = true;
      }
      if (++unpublished_ == 4096) flush();
      return;
    }
    const LatticePoint x = states_[depth];
    expanded_.insert(x);
    for (std::size_t j = 0; j < inst_.maps.size(); ++j) {
      code_[depth] = static_cast<int>(j + 1);
      const Box box = branch_box(inst_.maps[j], x, inst_.noise);
      for (std::int64_t a = box.x_min; a <= box.x_max; ++a)
        for (std::int64_t b = box.y_min; b <= box.y_max; ++b) {
          states_[depth + 1] = {a, b};
          descend(depth + 1);
        }
    }
  }

  void flush() {
    const std::uint64_t total = published_.fetch_add(unpublished_) + unpublished_;
    unpublished_ = 0;
    if (total > cap_) throw CapExceeded("path space exceeds cap of " + std::to_string(cap_) + " pairs");
  }

  const SpipInstance& inst_;
  std::uint64_t cap_;
  std::atomic<std::uint64_t>& published_;
  std::size_t retain_;
  std::uint64_t unpublished_ = 0;
  SymbolicCode code_;
  std::vector<LatticePoint> states_;
};

}  // namespace

PathSpaceCensus enumerate_paths(const SpipInstance& inst, const EnumerateOptions& options) {
  if (inst.steps < 0) throw InputError("path length must be non-negative");
  PathSpaceCensus census;
  const std::uint64_t cap = clamp_cap(options.cap);

  if (inst.steps == 0) {
    if (cap < 1) throw CapExceeded("path space exceeds cap");
    census.total_pairs = 1;
    census.endpoints[inst.x0] = 1;
    const LatticePoint only[] = {inst.x0};
    census.branching = branching_stats(inst.maps, inst.noise, only);
    if (options.retain_paths > 0) census.paths.push_back({{}, {inst.x0}});
    return census;
  }

  struct Task {
    int symbol;
    LatticePoint first;
  };
  std::vector<Task> tasks;
  for (std::size_t j = 0; j < inst.maps.size(); ++j)
    for (const LatticePoint& p : branch_set(inst.maps[j], inst.x0, inst.noise))
      tasks.push_back({static_cast<int>(j + 1), p});

  std::atomic<std::uint64_t> published{0};
  std::vector<std::optional<SubtreeWalker>> walkers(tasks.size());
  parallel_for(tasks.size(), options.threads, [&](std::size_t i) {
    walkers[i].emplace(inst, cap, published, options.retain_paths);
    walkers[i]->run(tasks[i].symbol, inst.x0, tasks[i].first);
  });

  std::uint64_t total = 0;
  std::unordered_map<LatticePoint, std::uint64_t> endpoints;
  std::unordered_set<LatticePoint> expanded;
  for (auto& w : walkers) {
    total += w->leaves;
    for (const auto& [p, c] : w->endpoints) endpoints[p] += c;
    expanded.insert(w->expanded_.begin(), w->expanded_.end());
    for (auto& path : w->paths) {
      if (census.paths.size() < options.retain_paths) {
        census.paths.push_back(std::move(path));
      } else {
        census.paths_truncated = true;
      }
    }
    census.paths_truncated = census.paths_truncated || w->truncated;
  }
  census.total_pairs = total;
  for (const auto& [p, c] : endpoints) census.endpoints[p] = c;
  std::vector<LatticePoint> states(expanded.begin(), expanded.end());
  std::sort(states.begin(), states.end());
  census.branching = branching_stats(inst.maps, inst.noise, states);
  return census;
}

std::map<LatticePoint, BigInt> endpoint_counts(const SpipInstance& inst, const BigInt& cap) {
  if (inst.steps < 0) throw InputError("path length must be non-negative");
  const std::uint64_t limit = clamp_cap(cap);
  std::uint64_t work = 0;
  std::unordered_map<LatticePoint, BigInt> layer{{inst.x0, BigInt(1)}};
  for (int i = 0; i < inst.steps; ++i) {
    std::unordered_map<LatticePoint, BigInt> next;
    for (const auto& [x, count] : layer) {
      for (const auto& map : inst.maps) {
        const Box box = branch_box(map, x, inst.noise);
        work += box.cells();
        if (work > limit) throw CapExceeded("layered count exceeds cap of " + std::to_string(limit) + " expansions");
        box.for_each([&](LatticePoint y) { next[y] += count; });
      }
    }
    layer = std::move(next);
  }
  return {layer.begin(), layer.end()};
}

BigInt count_paths_to(const SpipInstance& inst, const BigInt& cap) {
  if (!inst.target) throw InputError("count_paths_to needs a target");
  const auto counts = endpoint_counts(inst, cap);
  auto it = counts.find(*inst.target);
  return it == counts.end() ? BigInt(0) : it->second;
}

std::vector<std::vector<LatticePoint>> reachable_layers(const SpipInstance& inst, const BigInt& cap) {
  const std::uint64_t limit = clamp_cap(cap);
  std::uint64_t work = 0;
  std::vector<std::vector<LatticePoint>> layers{{inst.x0}};
  for (int i = 0; i < inst.steps; ++i) {
    std::unordered_set<LatticePoint> next;
    for (const LatticePoint& x : layers.back())
      for (const auto& map : inst.maps) {
        const Box box = branch_box(map, x, inst.noise);
        work += box.cells();
        if (work > limit) throw CapExceeded("reachability exceeds cap of " + std::to_string(limit) + " expansions");
        box.for_each([&](LatticePoint y) { next.insert(y); });
      }
    std::vector<LatticePoint> sorted(next.begin(), next.end());
    std::sort(sorted.begin(), sorted.end());
    layers.push_back(std::move(sorted));
  }
  return layers;
}

BranchStats branching_stats(const TransformSet& ts, const NoiseBound& noise, std::span<const LatticePoint> states) {
  if (states.empty()) throw InputError("branching_stats needs at least one state");
  std::uint64_t lo = std::numeric_limits<std::uint64_t>::max(), hi = 0;
  BigInt sum = 0;
  for (const LatticePoint& x : states)
    for (const auto& map : ts) {
      const std::uint64_t size = branch_box(map, x, noise).cells();
      lo = std::min(lo, size);
      hi = std::max(hi, size);
      sum += size;
    }
  const BigInt pairs = BigInt(states.size()) * BigInt(ts.size());
  return {Rational(lo), Rational(hi), Rational(sum, pairs)};
}

BoundReport growth_bounds(std::int64_t m, std::int64_t k, std::int64_t n) {
  if (m < 1 || k < 1 || n < 0) throw InputError("growth_bounds needs m ≥ 1, k ≥ 1, n ≥ 0");
  const auto exponent = static_cast<unsigned>(n);
  return {k, boost::multiprecision::pow(BigInt(k), exponent), boost::multiprecision::pow(BigInt(m) * k, exponent)};
}

nlohmann::json census_to_json(const PathSpaceCensus& census) {
  nlohmann::json endpoints = nlohmann::json::array();
  for (const auto& [p, c] : census.endpoints) endpoints.push_back({p.x, p.y, to_string(c)});
  return {
      {"total_pairs", to_string(census.total_pairs)},
      {"endpoints", std::move(endpoints)},
      {"branch_min", to_string(census.branching.min)},
      {"branch_max", to_string(census.branching.max)},
      {"branch_mean", to_string(census.branching.mean)},
  };
}

}  // namespace spip
