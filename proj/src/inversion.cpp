#include "spip/inversion.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "spip/errors.hpp"
#include "spip/parallel.hpp"

namespace spip {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t clamp_cap(const BigInt& cap) {
  if (cap < 0) return 0;
  if (cap > BigInt(std::numeric_limits<std::uint64_t>::max())) return std::numeric_limits<std::uint64_t>::max();
  return cap.convert_to<std::uint64_t>();
}

const LatticePoint& require_target(const SpipInstance& inst) {
  if (!inst.target) throw InputError("inversion needs a target");
  return *inst.target;
}

using StateSet = std::unordered_set<LatticePoint>;

// Layer i holds states reachable from x0 in i steps that can still reach the target.
std::vector<StateSet> coreachable_layers(const SpipInstance& inst, const BigInt& cap) {
  const auto forward = reachable_layers(inst, cap);
  const auto n = static_cast<std::size_t>(inst.steps);
  std::vector<StateSet> layers(n + 1);
  if (std::binary_search(forward[n].begin(), forward[n].end(), *inst.target)) layers[n].insert(*inst.target);
  for (std::size_t i = n; i-- > 0;) {
    for (const LatticePoint& x : forward[i]) {
      bool hit = false;
      for (const auto& map : inst.maps) {
        const Box box = branch_box(map, x, inst.noise);
        if (box.cells() <= layers[i + 1].size()) {
          box.for_each([&](LatticePoint y) { hit = hit || layers[i + 1].contains(y); });
        } else {
          for (const LatticePoint& y : layers[i + 1]) hit = hit || box.contains(y);
        }
        if (hit) break;
      }
      if (hit) layers[i].insert(x);
    }
  }
  return layers;
}

class DfsWorker {
 public:
  DfsWorker(const SpipInstance& inst, const DfsOptions& options, std::atomic<std::uint64_t>& nodes,
            const std::vector<StateSet>* layers)
      : inst_(inst), options_(options), nodes_(nodes), layers_(layers), cap_(clamp_cap(options.cap)) {
    code_.resize(static_cast<std::size_t>(inst.steps));
    states_.resize(static_cast<std::size_t>(inst.steps) + 1);
    reach_cache_.resize(static_cast<std::size_t>(inst.steps) + 1);
  }

  // Explores the subtree whose first step is (symbol, first).
  void run(int symbol, LatticePoint first) {
    states_[0] = inst_.x0;
    code_[0] = symbol;
    states_[1] = first;
    if (admissible(1, first)) descend(1);
    flush();
  }

  std::vector<Solution> solutions;
  bool stopped_early = false;
  std::uint64_t expanded = 0;

 private:
  bool admissible(std::size_t depth, LatticePoint x) {
    const std::size_t remaining = code_.size() - depth;
    switch (options_.pruning) {
      case Pruning::none:
        return remaining > 0 || x == *inst_.target;
      case Pruning::layered:
        return (*layers_)[depth].contains(x);
      case Pruning::reach_box: {
        auto& cache = reach_cache_[remaining];
        auto it = cache.find(x);
        if (it == cache.end())
          it = cache.emplace(x, reach_box(inst_.maps, inst_.noise, Box::point(x), static_cast<int>(remaining))).first;
        return it->second.contains(*inst_.target);
      }
    }
    return true;
  }

  void descend(std::size_t depth) {
    if (stopped_early) return;
    ++expanded;
    if (++unpublished_ == 4096) flush();
    const std::size_t n = code_.size();
    if (depth == n) {
      if (states_[n] == *inst_.target) {
        solutions.push_back({code_, states_});
        if (solutions.size() >= options_.max_solutions) stopped_early = true;
      }
      return;
    }
    const LatticePoint x = states_[depth];
    for (std::size_t j = 0; j < inst_.maps.size() && !stopped_early; ++j) {
      code_[depth] = static_cast<int>(j + 1);
      const Box box = branch_box(inst_.maps[j], x, inst_.noise);
      for (std::int64_t a = box.x_min; a <= box.x_max && !stopped_early; ++a)
        for (std::int64_t b = box.y_min; b <= box.y_max && !stopped_early; ++b) {
          const LatticePoint y{a, b};
          if (!admissible(depth + 1, y)) continue;
          states_[depth + 1] = y;
          descend(depth + 1);
        }
    }
  }

  void flush() {
    const std::uint64_t total = nodes_.fetch_add(unpublished_) + unpublished_;
    unpublished_ = 0;
    if (total > cap_) throw CapExceeded("search exceeds cap of " + std::to_string(cap_) + " nodes");
  }

  const SpipInstance& inst_;
  const DfsOptions& options_;
  std::atomic<std::uint64_t>& nodes_;
  const std::vector<StateSet>* layers_;
  std::uint64_t cap_;
  std::uint64_t unpublished_ = 0;
  SymbolicCode code_;
  std::vector<LatticePoint> states_;
  std::vector<std::unordered_map<LatticePoint, Box>> reach_cache_;
};

void finalize(InversionResult& r) {
  std::sort(r.solutions.begin(), r.solutions.end());
  r.solutions.erase(std::unique(r.solutions.begin(), r.solutions.end()), r.solutions.end());
}

}  // namespace

bool verify_path(const SpipInstance& inst, std::span<const int> code, std::span<const LatticePoint> states) {
  const auto n = static_cast<std::size_t>(inst.steps);
  if (code.size() != n || states.size() != n + 1)
    throw LengthMismatch("expected " + std::to_string(n) + " symbols and " + std::to_string(n + 1) + " states");
  validate_code(inst.maps, code);
  if (states.front() != inst.x0) return false;
  if (inst.target && states.back() != *inst.target) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (!in_branch_set(inst.maps.at(code[i]), states[i], inst.noise, states[i + 1])) return false;
  return true;
}

InversionResult invert_dfs(const SpipInstance& inst, const DfsOptions& options) {
  const auto start = Clock::now();
  const LatticePoint target = require_target(inst);
  InversionResult result;
  if (options.max_solutions == 0) {
    result.wall_time = seconds_since(start);
    return result;
  }
  if (inst.steps == 0) {
    result.nodes_expanded = 1;
    result.exhausted = true;
    if (inst.x0 == target) result.solutions.push_back({{}, {inst.x0}});
    result.wall_time = seconds_since(start);
    return result;
  }

  std::vector<StateSet> layers;
  if (options.pruning == Pruning::layered) layers = coreachable_layers(inst, options.cap);

  struct Task {
    int symbol;
    LatticePoint first;
  };
  std::vector<Task> tasks;
  for (std::size_t j = 0; j < inst.maps.size(); ++j)
    for (const LatticePoint& p : branch_set(inst.maps[j], inst.x0, inst.noise))
      tasks.push_back({static_cast<int>(j + 1), p});

  std::atomic<std::uint64_t> nodes{0};
  std::vector<std::optional<DfsWorker>> workers(tasks.size());
  std::vector<bool> skipped(tasks.size(), false);
  std::vector<bool> done(tasks.size(), false);
  std::vector<std::size_t> found(tasks.size(), 0);
  std::mutex progress;
  parallel_for(tasks.size(), options.threads, [&](std::size_t i) {
    {
      // Skip a subtree only when earlier subtrees, all finished, already fill the quota.
      std::lock_guard lock(progress);
      std::size_t before = 0;
      bool all_done = true;
      for (std::size_t k = 0; k < i && all_done; ++k) {
        all_done = done[k];
        before += found[k];
      }
      if (all_done && before >= options.max_solutions) {
        skipped[i] = true;
        done[i] = true;
        return;
      }
    }
    workers[i].emplace(inst, options, nodes, options.pruning == Pruning::layered ? &layers : nullptr);
    workers[i]->run(tasks[i].symbol, tasks[i].first);
    std::lock_guard lock(progress);
    done[i] = true;
    found[i] = workers[i]->solutions.size();
  });

  bool complete = true;
  std::uint64_t expanded = 1;  // root
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (skipped[i]) {
      complete = false;
      continue;
    }
    expanded += workers[i]->expanded;
    complete = complete && !workers[i]->stopped_early;
    for (auto& s : workers[i]->solutions)
      if (result.solutions.size() < options.max_solutions) {
        result.solutions.push_back(std::move(s));
      } else {
        complete = false;
      }
  }
  result.nodes_expanded = expanded;
  result.exhausted = complete;
  finalize(result);
  result.wall_time = seconds_since(start);
  return result;
}

InversionResult invert_mitm(const SpipInstance& inst, const MitmOptions& options) {
  const auto start = Clock::now();
  const LatticePoint target = require_target(inst);
  if (inst.steps < 2) throw InputError("meet-in-the-middle needs n ≥ 2");
  const auto n = static_cast<std::size_t>(inst.steps);
  const std::size_t half = n / 2;
  const std::uint64_t cap = clamp_cap(options.cap);
  std::uint64_t nodes = 0;

  // Forward half: every (prefix code, prefix states) grouped by meeting state.
  std::unordered_map<LatticePoint, std::vector<Path>> frontier;
  std::uint64_t stored = 0;
  {
    Path prefix{SymbolicCode(half), std::vector<LatticePoint>(half + 1)};
    prefix.states[0] = inst.x0;
    auto forward = [&](auto&& self, std::size_t depth) -> void {
      ++nodes;
      if (depth == half) {
        if (++stored > cap) throw CapExceeded("forward frontier exceeds cap of " + std::to_string(cap));
        frontier[prefix.states[half]].push_back(prefix);
        return;
      }
      for (std::size_t j = 0; j < inst.maps.size(); ++j) {
        prefix.code[depth] = static_cast<int>(j + 1);
        const Box box = branch_box(inst.maps[j], prefix.states[depth], inst.noise);
        box.for_each([&](LatticePoint y) {
          prefix.states[depth + 1] = y;
          self(self, depth + 1);
        });
      }
    };
    forward(forward, 0);
  }

  // Sound per-layer windows: every state reachable from x0 in i steps lies in windows[i].
  std::vector<Box> windows(n + 1);
  windows[0] = Box::point(inst.x0);
  for (std::size_t i = 0; i < n; ++i) windows[i + 1] = reach_box(inst.maps, inst.noise, windows[i], 1);

  // Backward half: edges[i][x] lists (symbol, y) with y ∈ B_{i+1} and y ∈ branch(x).
  struct Edge {
    int symbol;
    LatticePoint next;
  };
  std::vector<std::unordered_map<LatticePoint, std::vector<Edge>>> edges(n);
  StateSet layer;
  if (windows[n].contains(target)) layer.insert(target);
  for (std::size_t i = n; i-- > half;) {
    const Box& window = windows[i];
    if (window.cells() > options.max_window_cells)
      throw WindowOverflow("backward window of " + std::to_string(window.cells()) + " cells exceeds limit");
    StateSet previous;
    std::vector<LatticePoint> ordered(layer.begin(), layer.end());
    std::sort(ordered.begin(), ordered.end());
    for (const LatticePoint& y : ordered)
      for (std::size_t j = 0; j < inst.maps.size(); ++j)
        for (const LatticePoint& x : preimage_set(inst.maps[j], y, inst.noise, window)) {
          ++nodes;
          edges[i][x].push_back({static_cast<int>(j + 1), y});
          previous.insert(x);
        }
    layer = std::move(previous);
  }

  // Join on the meeting layer.
  InversionResult result;
  std::uint64_t joined = 0;
  Path suffix{SymbolicCode(n - half), std::vector<LatticePoint>(n - half + 1)};
  auto emit = [&](const std::vector<Path>& prefixes) {
    for (const Path& p : prefixes) {
      if (++joined > cap) throw CapExceeded("joined solutions exceed cap of " + std::to_string(cap));
      Solution s{p.code, p.states};
      s.code.insert(s.code.end(), suffix.code.begin(), suffix.code.end());
      s.states.insert(s.states.end(), suffix.states.begin() + 1, suffix.states.end());
      result.solutions.push_back(std::move(s));
    }
  };
  auto backward = [&](auto&& self, std::size_t layer_index, const std::vector<Path>& prefixes) -> void {
    ++nodes;
    const std::size_t offset = layer_index - half;
    if (layer_index == n) {
      emit(prefixes);
      return;
    }
    auto it = edges[layer_index].find(suffix.states[offset]);
    if (it == edges[layer_index].end()) return;
    for (const Edge& e : it->second) {
      suffix.code[offset] = e.symbol;
      suffix.states[offset + 1] = e.next;
      self(self, layer_index + 1, prefixes);
    }
  };
  std::vector<LatticePoint> meeting;
  for (const auto& [x, prefixes] : frontier)
    if (layer.contains(x)) meeting.push_back(x);
  std::sort(meeting.begin(), meeting.end());
  for (const LatticePoint& x : meeting) {
    suffix.states[0] = x;
    backward(backward, half, frontier.at(x));
  }

  result.nodes_expanded = nodes;
  result.exhausted = true;
  finalize(result);
  result.wall_time = seconds_since(start);
  return result;
}

InversionResult invert_random(const SpipInstance& inst, std::uint64_t trials, RandomStream& rng) {
  const auto start = Clock::now();
  const LatticePoint target = require_target(inst);
  InversionResult result;
  result.trials = trials;
  const auto m = static_cast<std::int64_t>(inst.maps.size());
  SymbolicCode code(static_cast<std::size_t>(inst.steps));
  for (std::uint64_t t = 0; t < trials; ++t) {
    for (int& s : code) s = static_cast<int>(rng.uniform_int(1, m));
    Trajectory traj = sample_trajectory(inst.maps, code, inst.x0, inst.noise, rng);
    if (traj.endpoint() != target) continue;
    if (!verify_path(inst, code, traj.states)) throw std::logic_error("sampled trajectory failed verification");
    ++result.hits;
    result.solutions.push_back({code, std::move(traj.states)});
  }
  result.nodes_expanded = BigInt(trials) * inst.steps;
  finalize(result);
  result.wall_time = seconds_since(start);
  return result;
}

std::string solution_json_line(const Solution& s) {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& p : s.states) states.push_back({p.x, p.y});
  return nlohmann::json{{"code", s.code}, {"states", std::move(states)}}.dump();
}

}  // namespace spip
