#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spip/exact.hpp"
#include "spip/lattice.hpp"
#include "spip/rng.hpp"

namespace spip {

/// Exact spectral-norm test ‖A‖₂ < 1: both roots of λ² − tλ + d (t = tr AᵀA,
/// d = det AᵀA) lie strictly below one iff t < 2 and 1 − t + d > 0.
template <class Scalar>
bool is_contractive(const Matrix2<Scalar>& a) {
  const Matrix2<Scalar> gram = a.transpose() * a;
  const Scalar t = gram.trace();
  const Scalar d = gram.determinant();
  return t < Scalar(2) && Scalar(1) - t + d > Scalar(0);
}

namespace detail {

// A and b written over one common positive denominator. The int64 copies are
// valid only when `small` is set.
struct MapNumerators {
  BigInt a[4];
  BigInt b[2];
  BigInt den;
  bool small = false;
  std::int64_t sa[4] = {};
  std::int64_t sb[2] = {};
  std::int64_t sden = 1;
};

struct NoiseNumerators {
  BigInt p, q, big_q;
  bool small = false;
  std::int64_t sp = 0, sq = 1, sbig_q = 1;
};

}  // namespace detail

/// One contractive affine map x ↦ A x + b, before noise and rounding.
class AffineMap {
 public:
  /// Throws NotContractive unless ‖A‖₂ < 1.
  AffineMap(Matrix2q a, Vector2q b);

  const Matrix2q& linear() const { return a_; }
  const Vector2q& offset() const { return b_; }

  /// A·x + b, exact.
  Vector2q image(LatticePoint x) const;

  const detail::MapNumerators& numerators() const { return num_; }

  friend bool operator==(const AffineMap& l, const AffineMap& r) { return l.a_ == r.a_ && l.b_ == r.b_; }

 private:
  Matrix2q a_;
  Vector2q b_;
  detail::MapNumerators num_;
};

AffineMap make_affine_map(const Rational& a11, const Rational& a12, const Rational& a21, const Rational& a22,
                          const Rational& b1, const Rational& b2);

/// Noise δ ∈ [−ε, ε]², sampled on the grid {k/Q}.
class NoiseBound {
 public:
  static inline const BigInt kDefaultDenominator = BigInt(1) << 32;

  explicit NoiseBound(Rational epsilon, BigInt sample_denominator = kDefaultDenominator);

  const Rational& epsilon() const { return epsilon_; }
  const BigInt& sample_denominator() const { return big_q_; }
  /// Largest k with k/Q ≤ ε.
  std::int64_t grid_radius() const { return grid_radius_; }

  bool admits(const Vector2q& delta) const;

  const detail::NoiseNumerators& numerators() const { return num_; }

 private:
  Rational epsilon_;
  BigInt big_q_;
  std::int64_t grid_radius_ = 0;
  detail::NoiseNumerators num_;
};

/// A sampled grid noise vector δ = (kx/Q, ky/Q).
struct NoiseSample {
  std::int64_t kx = 0;
  std::int64_t ky = 0;

  Vector2q delta(const NoiseBound& noise) const;
};

/// Ordered family of maps indexed by symbols 1..m.
class TransformSet {
 public:
  explicit TransformSet(std::vector<AffineMap> maps);

  std::size_t size() const { return maps_.size(); }
  /// 1-based symbol lookup; throws InvalidCode when out of range.
  const AffineMap& at(int symbol) const;
  /// 0-based access.
  const AffineMap& operator[](std::size_t i) const { return maps_[i]; }

  auto begin() const { return maps_.begin(); }
  auto end() const { return maps_.end(); }

 private:
  std::vector<AffineMap> maps_;
};

/// Symbols are 1-based, as in Σ = {1..m}.
using SymbolicCode = std::vector<int>;

void validate_code(const TransformSet& ts, std::span<const int> code);

struct Trajectory {
  std::vector<LatticePoint> states;
  std::optional<std::vector<Vector2q>> noises;

  const LatticePoint& endpoint() const { return states.back(); }
};

/// ⌊A·x + b + δ⌋, component-wise toward −∞.
LatticePoint apply_with_noise(const AffineMap& map, LatticePoint x, const Vector2q& delta);

/// Every rounding outcome over δ ∈ [−ε, ε]², as the product box of two integer ranges.
Box branch_box(const AffineMap& map, LatticePoint x, const NoiseBound& noise);

/// branch_box expanded into points, x-major order.
std::vector<LatticePoint> branch_set(const AffineMap& map, LatticePoint x, const NoiseBound& noise);

inline bool in_branch_set(const AffineMap& map, LatticePoint x, const NoiseBound& noise, LatticePoint y) {
  return branch_box(map, x, noise).contains(y);
}

NoiseSample draw_noise(const NoiseBound& noise, RandomStream& rng);

/// Same as apply_with_noise for δ = sample.delta(noise), without building rationals.
LatticePoint apply_sample(const AffineMap& map, LatticePoint x, const NoiseBound& noise, NoiseSample sample);

struct Step {
  LatticePoint point;
  Vector2q delta;
};

Step sample_step(const AffineMap& map, LatticePoint x, const NoiseBound& noise, RandomStream& rng);

/// { x ∈ window : y ∈ branch_set(map, x, noise) }, x-major order. Throws EmptyWindow.
std::vector<LatticePoint> preimage_set(const AffineMap& map, LatticePoint y, const NoiseBound& noise,
                                       const Box& window);

/// Bounding box of the union of branch sets over all x in `from`. Exact for boxes,
/// since the affine image of a box attains its extremes at corners.
Box image_box(const AffineMap& map, const Box& from, const NoiseBound& noise);

/// Box containing every state reachable from `from` in `steps` steps under any symbol.
Box reach_box(const TransformSet& ts, const NoiseBound& noise, Box from, int steps);

Trajectory sample_trajectory(const TransformSet& ts, std::span<const int> code, LatticePoint x0,
                             const NoiseBound& noise, RandomStream& rng);

/// Replays a fixed noise realization. Does not check δ against any bound.
Trajectory replay_trajectory(const TransformSet& ts, std::span<const int> code, LatticePoint x0,
                             std::span<const Vector2q> deltas);

/// Endpoint of a sampled trajectory, without recording the path.
LatticePoint sample_endpoint(const TransformSet& ts, std::span<const int> code, LatticePoint x0,
                             const NoiseBound& noise, RandomStream& rng);

}  // namespace spip
