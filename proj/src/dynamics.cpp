#include "spip/dynamics.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "spip/errors.hpp"

namespace spip {
namespace {

using i128 = __int128;

constexpr std::int64_t kSmallCoeff = std::int64_t{1} << 24;
constexpr std::int64_t kSmallNoise = std::int64_t{1} << 32;
constexpr std::int64_t kSmallCoord = std::int64_t{1} << 28;

// Floor division for any sign of divisor.
i128 fdiv(i128 a, i128 b) {
  if (b < 0) {
    a = -a;
    b = -b;
  }
  i128 q = a / b;
  if (a % b < 0) --q;
  return q;
}
BigInt fdiv(const BigInt& a, const BigInt& b) { return floor_div(a, b); }

template <class Int>
Int cdiv(const Int& a, const Int& b) {
  return -fdiv(Int(-a), b);
}

std::int64_t narrow(i128 v) { return static_cast<std::int64_t>(v); }
std::int64_t narrow(const BigInt& v) {
  auto r = to_int64(v);
  if (!r) throw InputError("lattice coordinate overflows 64 bits");
  return *r;
}

bool small_coord(std::int64_t v) { return v >= -kSmallCoord && v <= kSmallCoord; }
bool small_point(LatticePoint p) { return small_coord(p.x) && small_coord(p.y); }
bool small_box(const Box& b) {
  return small_coord(b.x_min) && small_coord(b.x_max) && small_coord(b.y_min) && small_coord(b.y_max);
}

// Integer views of the map/noise numerators for either arithmetic.
struct Small {
  const detail::MapNumerators& m;
  const detail::NoiseNumerators& n;
  i128 a(int i) const { return m.sa[i]; }
  i128 b(int i) const { return m.sb[i]; }
  i128 den() const { return m.sden; }
  i128 p() const { return n.sp; }
  i128 q() const { return n.sq; }
  i128 big_q() const { return n.sbig_q; }
  using Int = i128;
};
struct Big {
  const detail::MapNumerators& m;
  const detail::NoiseNumerators& n;
  const BigInt& a(int i) const { return m.a[i]; }
  const BigInt& b(int i) const { return m.b[i]; }
  const BigInt& den() const { return m.den; }
  const BigInt& p() const { return n.p; }
  const BigInt& q() const { return n.q; }
  const BigInt& big_q() const { return n.big_q; }
  using Int = BigInt;
};

// Rounded range of n/den ± ε for numerators n_lo ≤ n_hi.
template <class V, class Int = typename V::Int>
std::pair<std::int64_t, std::int64_t> rounded_range(const V& v, const Int& n_lo, const Int& n_hi) {
  const Int dq = v.den() * v.q();
  const Int pd = v.p() * v.den();
  return {narrow(fdiv(Int(n_lo * v.q() - pd), dq)), narrow(fdiv(Int(n_hi * v.q() + pd), dq))};
}

template <class V, class Int = typename V::Int>
Int row_numerator(const V& v, int row, std::int64_t x, std::int64_t y) {
  return v.a(2 * row) * Int(x) + v.a(2 * row + 1) * Int(y) + v.b(row);
}

template <class V>
Box branch_box_impl(const V& v, LatticePoint x) {
  using Int = typename V::Int;
  const Int n0 = row_numerator(v, 0, x.x, x.y);
  const Int n1 = row_numerator(v, 1, x.x, x.y);
  auto [x_lo, x_hi] = rounded_range(v, n0, n0);
  auto [y_lo, y_hi] = rounded_range(v, n1, n1);
  return {x_lo, x_hi, y_lo, y_hi};
}

template <class V>
LatticePoint apply_sample_impl(const V& v, LatticePoint x, NoiseSample s) {
  using Int = typename V::Int;
  const Int dq = v.den() * v.big_q();
  const Int n0 = row_numerator(v, 0, x.x, x.y) * v.big_q() + Int(s.kx) * v.den();
  const Int n1 = row_numerator(v, 1, x.x, x.y) * v.big_q() + Int(s.ky) * v.den();
  return {narrow(fdiv(n0, dq)), narrow(fdiv(n1, dq))};
}

template <class V>
Box image_box_impl(const V& v, const Box& from) {
  using Int = typename V::Int;
  Int lo[2], hi[2];
  for (int row = 0; row < 2; ++row) {
    const Int ax_lo = v.a(2 * row) * Int(from.x_min), ax_hi = v.a(2 * row) * Int(from.x_max);
    const Int ay_lo = v.a(2 * row + 1) * Int(from.y_min), ay_hi = v.a(2 * row + 1) * Int(from.y_max);
    lo[row] = std::min(ax_lo, ax_hi) + std::min(ay_lo, ay_hi) + v.b(row);
    hi[row] = std::max(ax_lo, ax_hi) + std::max(ay_lo, ay_hi) + v.b(row);
  }
  auto [x_lo, x_hi] = rounded_range(v, lo[0], hi[0]);
  auto [y_lo, y_hi] = rounded_range(v, lo[1], hi[1]);
  return {x_lo, x_hi, y_lo, y_hi};
}

// y ∈ branch(x) ⇔ for each row c: y_c − ε ≤ v_c(x) < y_c + 1 + ε. Scaled by D·q:
//   (y_c q − p) D − q(a_c1 x1 + b_c) ≤ q a_c2 x2 < ((y_c + 1) q + p) D − q(a_c1 x1 + b_c)
template <class V>
std::vector<LatticePoint> preimage_impl(const V& v, LatticePoint y, const Box& window) {
  using Int = typename V::Int;
  std::vector<LatticePoint> out;
  const Int yc[2] = {Int(y.x), Int(y.y)};
  for (std::int64_t x1 = window.x_min; x1 <= window.x_max; ++x1) {
    std::int64_t lo = window.y_min, hi = window.y_max;
    for (int row = 0; row < 2 && lo <= hi; ++row) {
      const Int shift = v.q() * (v.a(2 * row) * Int(x1) + v.b(row));
      const Int lower = (yc[row] * v.q() - v.p()) * v.den() - shift;
      const Int upper = ((yc[row] + 1) * v.q() + v.p()) * v.den() - shift;
      const Int coeff = v.q() * v.a(2 * row + 1);
      if (coeff == 0) {
        if (!(lower <= 0 && 0 < upper)) hi = lo - 1;
        continue;
      }
      Int first, last;
      if (coeff > 0) {
        first = cdiv(lower, coeff);
        last = cdiv(upper, coeff) - 1;
      } else {
        first = fdiv(upper, coeff) + 1;
        last = fdiv(lower, coeff);
      }
      if (first > Int(lo)) lo = first > Int(hi) ? hi + 1 : narrow(first);
      if (last < Int(hi)) hi = last < Int(lo) ? lo - 1 : narrow(last);
    }
    for (std::int64_t x2 = lo; x2 <= hi; ++x2) out.push_back({x1, x2});
  }
  return out;
}

BigInt lcm(const BigInt& a, const BigInt& b) { return a / boost::multiprecision::gcd(a, b) * b; }

bool fits(const BigInt& z, std::int64_t bound) { return z >= -bound && z <= bound; }

}  // namespace

AffineMap::AffineMap(Matrix2q a, Vector2q b) : a_(std::move(a)), b_(std::move(b)) {
  if (!is_contractive(a_)) throw NotContractive("affine map is not contractive (‖A‖₂ ≥ 1)");
  BigInt den = 1;
  for (int i = 0; i < 4; ++i) den = lcm(den, denominator(a_(i / 2, i % 2)));
  for (int i = 0; i < 2; ++i) den = lcm(den, denominator(b_(i)));
  num_.den = den;
  bool small = fits(den, kSmallCoeff);
  for (int i = 0; i < 4; ++i) {
    const Rational& e = a_(i / 2, i % 2);
    num_.a[i] = numerator(e) * (den / denominator(e));
    small = small && fits(num_.a[i], kSmallCoeff);
  }
  for (int i = 0; i < 2; ++i) {
    num_.b[i] = numerator(b_(i)) * (den / denominator(b_(i)));
    small = small && fits(num_.b[i], kSmallCoeff);
  }
  num_.small = small;
  if (small) {
    num_.sden = den.convert_to<std::int64_t>();
    for (int i = 0; i < 4; ++i) num_.sa[i] = num_.a[i].convert_to<std::int64_t>();
    for (int i = 0; i < 2; ++i) num_.sb[i] = num_.b[i].convert_to<std::int64_t>();
  }
}

Vector2q AffineMap::image(LatticePoint x) const {
  return a_ * Vector2q(Rational(x.x), Rational(x.y)) + b_;
}

AffineMap make_affine_map(const Rational& a11, const Rational& a12, const Rational& a21, const Rational& a22,
                          const Rational& b1, const Rational& b2) {
  Matrix2q a;
  a << a11, a12, a21, a22;
  return AffineMap(a, Vector2q(b1, b2));
}

NoiseBound::NoiseBound(Rational epsilon, BigInt sample_denominator)
    : epsilon_(std::move(epsilon)), big_q_(std::move(sample_denominator)) {
  if (epsilon_ < 0) throw InputError("noise bound must be non-negative");
  if (big_q_ < 2) throw InputError("sample denominator must be at least 2");
  auto radius = to_int64(floor(epsilon_ * Rational(big_q_)));
  if (!radius) throw InputError("noise grid radius ε·Q overflows 64 bits");
  grid_radius_ = *radius;
  num_.p = numerator(epsilon_);
  num_.q = denominator(epsilon_);
  num_.big_q = big_q_;
  num_.small = fits(num_.p, kSmallNoise) && fits(num_.q, kSmallNoise) && fits(big_q_, kSmallNoise);
  if (num_.small) {
    num_.sp = num_.p.convert_to<std::int64_t>();
    num_.sq = num_.q.convert_to<std::int64_t>();
    num_.sbig_q = big_q_.convert_to<std::int64_t>();
  }
}

bool NoiseBound::admits(const Vector2q& delta) const {
  return abs(delta(0)) <= epsilon_ && abs(delta(1)) <= epsilon_;
}

Vector2q NoiseSample::delta(const NoiseBound& noise) const {
  const Rational q(noise.sample_denominator());
  return Vector2q(Rational(kx) / q, Rational(ky) / q);
}

TransformSet::TransformSet(std::vector<AffineMap> maps) : maps_(std::move(maps)) {
  if (maps_.empty()) throw InputError("transform set needs at least one map");
}

const AffineMap& TransformSet::at(int symbol) const {
  if (symbol < 1 || static_cast<std::size_t>(symbol) > maps_.size())
    throw InvalidCode("symbol " + std::to_string(symbol) + " outside 1.." + std::to_string(maps_.size()));
  return maps_[static_cast<std::size_t>(symbol - 1)];
}

void validate_code(const TransformSet& ts, std::span<const int> code) {
  for (int s : code) (void)ts.at(s);
}

LatticePoint apply_with_noise(const AffineMap& map, LatticePoint x, const Vector2q& delta) {
  const Vector2q v = map.image(x) + delta;
  return {narrow(floor(v(0))), narrow(floor(v(1)))};
}

Box branch_box(const AffineMap& map, LatticePoint x, const NoiseBound& noise) {
  const auto& mn = map.numerators();
  const auto& nn = noise.numerators();
  if (mn.small && nn.small && small_point(x)) return branch_box_impl(Small{mn, nn}, x);
  return branch_box_impl(Big{mn, nn}, x);
}

std::vector<LatticePoint> branch_set(const AffineMap& map, LatticePoint x, const NoiseBound& noise) {
  std::vector<LatticePoint> out;
  const Box box = branch_box(map, x, noise);
  out.reserve(box.cells());
  box.for_each([&](LatticePoint p) { out.push_back(p); });
  return out;
}

NoiseSample draw_noise(const NoiseBound& noise, RandomStream& rng) {
  const std::int64_t r = noise.grid_radius();
  if (r == 0) return {};
  const std::int64_t kx = rng.uniform_int(-r, r);
  const std::int64_t ky = rng.uniform_int(-r, r);
  return {kx, ky};
}

LatticePoint apply_sample(const AffineMap& map, LatticePoint x, const NoiseBound& noise, NoiseSample sample) {
  const auto& mn = map.numerators();
  const auto& nn = noise.numerators();
  if (mn.small && nn.small && small_point(x)) return apply_sample_impl(Small{mn, nn}, x, sample);
  return apply_sample_impl(Big{mn, nn}, x, sample);
}

Step sample_step(const AffineMap& map, LatticePoint x, const NoiseBound& noise, RandomStream& rng) {
  const NoiseSample s = draw_noise(noise, rng);
  return {apply_sample(map, x, noise, s), s.delta(noise)};
}

std::vector<LatticePoint> preimage_set(const AffineMap& map, LatticePoint y, const NoiseBound& noise,
                                       const Box& window) {
  if (window.empty()) throw EmptyWindow("preimage window is empty");
  const auto& mn = map.numerators();
  const auto& nn = noise.numerators();
  if (mn.small && nn.small && small_point(y) && small_box(window)) return preimage_impl(Small{mn, nn}, y, window);
  return preimage_impl(Big{mn, nn}, y, window);
}

Box image_box(const AffineMap& map, const Box& from, const NoiseBound& noise) {
  if (from.empty()) return from;
  const auto& mn = map.numerators();
  const auto& nn = noise.numerators();
  if (mn.small && nn.small && small_box(from)) return image_box_impl(Small{mn, nn}, from);
  return image_box_impl(Big{mn, nn}, from);
}

Box reach_box(const TransformSet& ts, const NoiseBound& noise, Box from, int steps) {
  for (int i = 0; i < steps && !from.empty(); ++i) {
    Box next;
    for (const auto& map : ts) next = next.hull(image_box(map, from, noise));
    from = next;
  }
  return from;
}

Trajectory sample_trajectory(const TransformSet& ts, std::span<const int> code, LatticePoint x0,
                             const NoiseBound& noise, RandomStream& rng) {
  validate_code(ts, code);
  Trajectory t;
  t.states.reserve(code.size() + 1);
  t.states.push_back(x0);
  t.noises.emplace();
  t.noises->reserve(code.size());
  for (int symbol : code) {
    Step s = sample_step(ts.at(symbol), t.states.back(), noise, rng);
    t.states.push_back(s.point);
    t.noises->push_back(std::move(s.delta));
  }
  return t;
}

Trajectory replay_trajectory(const TransformSet& ts, std::span<const int> code, LatticePoint x0,
                             std::span<const Vector2q> deltas) {
  validate_code(ts, code);
  if (deltas.size() != code.size()) throw LengthMismatch("need one noise vector per symbol");
  Trajectory t;
  t.states.push_back(x0);
  t.noises.emplace(deltas.begin(), deltas.end());
  for (std::size_t i = 0; i < code.size(); ++i)
    t.states.push_back(apply_with_noise(ts.at(code[i]), t.states.back(), deltas[i]));
  return t;
}

LatticePoint sample_endpoint(const TransformSet& ts, std::span<const int> code, LatticePoint x0,
                             const NoiseBound& noise, RandomStream& rng) {
  LatticePoint x = x0;
  for (int symbol : code) x = apply_sample(ts.at(symbol), x, noise, draw_noise(noise, rng));
  return x;
}

}  // namespace spip
