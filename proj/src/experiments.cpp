#include "spip/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>

#include "spip/errors.hpp"
#include "spip/parallel.hpp"

namespace spip {
namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Rational rationalize(double v, std::int64_t scale) {
  return Rational(static_cast<std::int64_t>(std::llround(v * static_cast<double>(scale))), scale);
}

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double shannon_entropy(std::span<const std::uint64_t> counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0,
                                       [](double acc, std::uint64_t c) { return acc + static_cast<double>(c); });
  if (total <= 0.0) throw EmptyHistogram("entropy of an empty histogram");
  double h = 0.0;
  for (std::uint64_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h == 0.0 ? 0.0 : h;  // no negative zero
}

double symbolic_freedom(double entropy_bits, int transforms) {
  if (transforms < 2) return entropy_bits;
  return entropy_bits / std::log2(static_cast<double>(transforms));
}

TransformSet generate_transform_set(int transforms, std::uint64_t seed) {
  if (transforms < 1) throw InputError("need at least one transform");
  constexpr std::int64_t kScale = 1 << 16;
  RandomStream rng(seed);
  std::vector<AffineMap> maps;
  maps.reserve(static_cast<std::size_t>(transforms));
  for (int j = 0; j < transforms; ++j) {
    const double s = 0.3 + 0.4 * rng.uniform_real();
    const double theta = 2.0 * std::numbers::pi * rng.uniform_real();
    const Rational c = rationalize(s * std::cos(theta), kScale);
    const Rational d = rationalize(s * std::sin(theta), kScale);
    const Rational bx = Rational(rng.uniform_int(-3, 2)) + Rational(1, 2);
    const Rational by = Rational(rng.uniform_int(-3, 2)) + Rational(1, 2);
    maps.push_back(make_affine_map(c, -d, d, c, bx, by));
  }
  return TransformSet(std::move(maps));
}

RunMetrics run_metrics(const RunConfig& cfg, unsigned threads) {
  if (cfg.steps < 1 || cfg.transforms < 1 || cfg.trials < 1)
    throw InputError("run config needs steps ≥ 1, transforms ≥ 1, trials ≥ 1");
  const TransformSet ts = generate_transform_set(cfg.transforms, cfg.map_seed);
  const NoiseBound noise(cfg.epsilon);
  const LatticePoint x0{0, 0};

  std::vector<LatticePoint> endpoints(cfg.trials);
  constexpr std::size_t kChunk = 64;
  const std::size_t chunks = (cfg.trials + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t chunk) {
    const std::size_t end = std::min<std::size_t>(cfg.trials, (chunk + 1) * kChunk);
    for (std::size_t t = chunk * kChunk; t < end; ++t) {
      RandomStream rng = RandomStream::derive(cfg.noise_seed, t);
      LatticePoint x = x0;
      for (int i = 0; i < cfg.steps; ++i) {
        const int symbol = static_cast<int>(rng.uniform_int(0, cfg.transforms - 1));
        x = apply_sample(ts[static_cast<std::size_t>(symbol)], x, noise, draw_noise(noise, rng));
      }
      endpoints[t] = x;
    }
  });

  std::map<LatticePoint, std::uint64_t> histogram;
  double distance = 0.0;
  for (const LatticePoint& p : endpoints) {
    ++histogram[p];
    distance += std::hypot(static_cast<double>(p.x - x0.x), static_cast<double>(p.y - x0.y));
  }
  RunMetrics m;
  m.entropy_bits = shannon_entropy(histogram);
  m.unique_endpoints = histogram.size();
  for (const auto& [p, c] : histogram) {
    if (c >= 2) ++m.collisions;
    m.most_frequent_count = std::max(m.most_frequent_count, c);
  }
  m.avg_distance = distance / static_cast<double>(cfg.trials);
  m.symbolic_freedom = symbolic_freedom(m.entropy_bits, cfg.transforms);
  return m;
}

std::vector<RunConfig> default_suite(std::uint64_t map_seed, std::uint64_t noise_seed, std::uint64_t trials) {
  struct Row {
    int steps, transforms;
    const char* epsilon;
  };
  static constexpr Row rows[] = {{30, 2, "0.05"},  {60, 4, "0.10"},  {120, 6, "0.25"},  {200, 8, "0.40"},
                                 {300, 12, "0.50"}, {500, 20, "0.60"}, {800, 30, "0.70"}, {1200, 40, "0.80"}};
  std::vector<RunConfig> out;
  std::uint64_t i = 0;
  for (const Row& r : rows) {
    ++i;
    out.push_back({"Run " + std::to_string(i), r.steps, r.transforms, parse_rational(r.epsilon), trials,
                   map_seed * 1000 + i, noise_seed * 1000 + i});
  }
  return out;
}

std::vector<RunMetrics> run_suite(std::span<const RunConfig> cfgs, unsigned threads) {
  std::vector<RunMetrics> out;
  out.reserve(cfgs.size());
  for (const RunConfig& c : cfgs) out.push_back(run_metrics(c, threads));
  return out;
}

std::string suite_csv(std::span<const RunConfig> cfgs, std::span<const RunMetrics> metrics) {
  std::ostringstream os;
  os << kSuiteCsvHeader << '\n';
  for (std::size_t i = 0; i < cfgs.size() && i < metrics.size(); ++i) {
    const RunConfig& c = cfgs[i];
    const RunMetrics& m = metrics[i];
    os << c.label << ',' << c.steps << ',' << c.transforms << ',' << decimal(c.epsilon) << ','
       << fixed(m.entropy_bits) << ',' << m.unique_endpoints << ',' << m.collisions << ',' << m.most_frequent_count
       << ',' << fixed(m.avg_distance) << ',' << fixed(m.symbolic_freedom) << '\n';
  }
  return os.str();
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw InputError("spearman needs two equal-length samples");
  const auto rx = ranks(xs), ry = ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::int64_t noise_branching_proxy(const Rational& epsilon) {
  const BigInt k = ceil(epsilon * 10);
  return k < 1 ? 1 : k.convert_to<std::int64_t>();
}

std::vector<SurfaceCell> sweep_surface(std::span<const int> steps, std::span<const Rational> epsilons, int transforms) {
  if (transforms < 1) throw InputError("need at least one transform");
  std::vector<SurfaceCell> cells;
  cells.reserve(steps.size() * epsilons.size());
  for (int n : steps)
    for (const Rational& eps : epsilons) {
      const double per_step = std::log2(static_cast<double>(transforms) * static_cast<double>(noise_branching_proxy(eps)));
      cells.push_back({n, eps, static_cast<double>(n) * per_step});
    }
  return cells;
}

std::string surface_csv(std::span<const SurfaceCell> cells) {
  std::ostringstream os;
  os << kSurfaceCsvHeader << '\n';
  for (const SurfaceCell& c : cells) os << c.steps << ',' << decimal(c.epsilon) << ',' << fixed(c.log2_space, 9) << '\n';
  return os.str();
}

GroverCost grover_cost(std::int64_t m, std::int64_t k, std::int64_t n) {
  if (m < 1 || k < 1 || n < 0) throw InputError("grover_cost needs m ≥ 1, k ≥ 1, n ≥ 0");
  const double space = static_cast<double>(n) * std::log2(static_cast<double>(m) * static_cast<double>(k));
  return {space, space / 2.0};
}

std::string decimal(const Rational& q, int digits) {
  const BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(digits));
  const Rational scaled = q * Rational(scale);
  BigInt r = floor(scaled + Rational(1, 2));
  const bool negative = r < 0;
  if (negative) r = -r;
  std::string s = r.str();
  if (static_cast<int>(s.size()) <= digits) s.insert(0, static_cast<std::size_t>(digits + 1) - s.size(), '0');
  std::string out = s.substr(0, s.size() - static_cast<std::size_t>(digits));
  std::string frac = s.substr(s.size() - static_cast<std::size_t>(digits));
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  if (!frac.empty()) out += "." + frac;
  return (negative && out != "0" ? "-" : "") + out;
}

}  // namespace spip
