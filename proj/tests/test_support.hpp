#pragma once

// Shared fixtures for the test binaries. Oracles here are deliberately naive
// and independent of the library's stepping kernel.

#include <set>
#include <vector>

#include "spip/dynamics.hpp"
#include "spip/errors.hpp"
#include "spip/pathspace.hpp"
#include "spip/rng.hpp"

namespace spip::testing {

inline Rational q(std::int64_t p, std::int64_t d = 1) { return Rational(p, d); }

inline AffineMap half_identity(const Rational& bx, const Rational& by) {
  return make_affine_map(q(1, 2), 0, 0, q(1, 2), bx, by);
}

/// The two-map, three-step worked example: A = ½I, b = (1,0) and (0,1), ε = ½, x0 = 0.
inline SpipInstance worked_example(std::optional<LatticePoint> target = std::nullopt) {
  return SpipInstance{TransformSet({half_identity(1, 0), half_identity(0, 1)}), NoiseBound(q(1, 2)), 3, {0, 0},
                      target};
}

/// Random contractive map with small-denominator entries.
inline AffineMap random_map(RandomStream& rng, std::int64_t coeff_den = 8, std::int64_t offset_range = 3) {
  for (;;) {
    Matrix2q a;
    for (int i = 0; i < 4; ++i) a(i / 2, i % 2) = q(rng.uniform_int(-coeff_den + 1, coeff_den - 1), coeff_den);
    if (!is_contractive(a)) continue;
    const Vector2q b(q(rng.uniform_int(-4 * offset_range, 4 * offset_range), 4),
                     q(rng.uniform_int(-4 * offset_range, 4 * offset_range), 4));
    return AffineMap(a, b);
  }
}

inline TransformSet random_transform_set(RandomStream& rng, int m) {
  std::vector<AffineMap> maps;
  for (int i = 0; i < m; ++i) maps.push_back(random_map(rng));
  return TransformSet(std::move(maps));
}

/// Brute-force branch set: floors of A·x + b + δ over δ on a grid of step 1/den
/// covering [−ε, ε]² (endpoints included when ε·den is integral).
inline std::set<LatticePoint> grid_branch_oracle(const AffineMap& map, LatticePoint x, const Rational& eps,
                                                  std::int64_t den = 1000) {
  const Vector2q v = map.image(x);
  const BigInt r = floor(eps * den);
  const std::int64_t radius = r.convert_to<std::int64_t>();
  // Floors separate per coordinate, so the δ grid is scanned once per axis.
  std::set<std::int64_t> xs, ys;
  for (std::int64_t i = -radius; i <= radius; ++i) {
    xs.insert(floor(v(0) + q(i, den)).convert_to<std::int64_t>());
    ys.insert(floor(v(1) + q(i, den)).convert_to<std::int64_t>());
  }
  std::set<LatticePoint> out;
  for (auto a : xs)
    for (auto b : ys) out.insert({a, b});
  return out;
}

/// Every (code, path) pair by plain recursion over Σⁿ and over each branch set,
/// using naive per-point floors of A·x + b ± ε rather than the library's box kernel.
inline std::vector<Path> brute_force_paths(const SpipInstance& inst) {
  std::vector<Path> out;
  Path cur{SymbolicCode(static_cast<std::size_t>(inst.steps)), std::vector<LatticePoint>(static_cast<std::size_t>(inst.steps) + 1)};
  cur.states[0] = inst.x0;
  const Rational& eps = inst.noise.epsilon();
  auto rec = [&](auto&& self, std::size_t depth) -> void {
    if (depth == cur.code.size()) {
      out.push_back(cur);
      return;
    }
    for (std::size_t j = 0; j < inst.maps.size(); ++j) {
      const Vector2q v = inst.maps[j].image(cur.states[depth]);
      const auto x_lo = floor(v(0) - eps).convert_to<std::int64_t>(), x_hi = floor(v(0) + eps).convert_to<std::int64_t>();
      const auto y_lo = floor(v(1) - eps).convert_to<std::int64_t>(), y_hi = floor(v(1) + eps).convert_to<std::int64_t>();
      cur.code[depth] = static_cast<int>(j + 1);
      for (auto a = x_lo; a <= x_hi; ++a)
        for (auto b = y_lo; b <= y_hi; ++b) {
          cur.states[depth + 1] = {a, b};
          self(self, depth + 1);
        }
    }
  };
  rec(rec, 0);
  return out;
}

}  // namespace spip::testing
