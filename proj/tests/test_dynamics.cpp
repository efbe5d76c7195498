#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include <Eigen/Eigenvalues>

#include "spip/dynamics.hpp"
#include "spip/errors.hpp"
#include "test_support.hpp"

using namespace spip;
using spip::testing::q;

TEST_CASE("rational parsing and printing") {
  CHECK(parse_rational("1/2") == q(1, 2));
  CHECK(parse_rational("-3/6") == q(-1, 2));
  CHECK(parse_rational("0.25") == q(1, 4));
  CHECK(parse_rational("-0.4") == q(-2, 5));
  CHECK(parse_rational("7") == q(7));
  CHECK(parse_rational("010/08") == q(5, 4));
  CHECK(to_string(q(-2, 4)) == "-1/2");
  CHECK(to_string(q(3)) == "3/1");
  CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("abc"), std::invalid_argument);
  CHECK(floor(q(-1, 2)) == -1);
  CHECK(floor(q(-2, 1)) == -2);
  CHECK(floor(q(7, 2)) == 3);
  CHECK(ceil(q(-1, 2)) == 0);
}

TEST_CASE("make_affine_map certifies contraction exactly") {
  CHECK_NOTHROW(make_affine_map(q(1, 2), 0, 0, q(1, 2), 1, 0));
  CHECK_THROWS_AS(make_affine_map(1, 0, 0, 1, 0, 0), NotContractive);

  // Oracle: floating-point eigenvalues of AᵀA for the sheared map.
  Eigen::Matrix2d a;
  a << 0.9, 0.9, 0.0, 0.9;
  const double lambda_max = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(a.transpose() * a).eigenvalues().maxCoeff();
  CHECK(lambda_max > 1.0);
  CHECK_THROWS_AS(make_affine_map(q(9, 10), q(9, 10), 0, q(9, 10), 0, 0), NotContractive);

  SUBCASE("agrees with the floating eigenvalue test away from the boundary") {
    RandomStream rng(11);
    int checked = 0;
    for (int i = 0; i < 2000; ++i) {
      Matrix2q m;
      Eigen::Matrix2d d;
      for (int k = 0; k < 4; ++k) {
        const auto num = rng.uniform_int(-12, 12);
        m(k / 2, k % 2) = q(num, 10);
        d(k / 2, k % 2) = static_cast<double>(num) / 10.0;
      }
      const double top = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(d.transpose() * d).eigenvalues().maxCoeff();
      if (std::abs(top - 1.0) < 1e-9) continue;
      CHECK(is_contractive(m) == (top < 1.0));
      ++checked;
    }
    CHECK(checked > 1900);
  }
}

TEST_CASE("apply_with_noise replays the worked example") {
  const AffineMap t1 = testing::half_identity(1, 0);
  const AffineMap t2 = testing::half_identity(0, 1);
  CHECK(apply_with_noise(t1, {0, 0}, Vector2q(q(3, 10), q(-4, 10))) == LatticePoint{1, -1});
  CHECK(apply_with_noise(t2, {1, -1}, Vector2q(q(-2, 10), q(2, 10))) == LatticePoint{0, 0});
  CHECK(apply_with_noise(t1, {0, 0}, Vector2q(q(1, 10), q(4, 10))) == LatticePoint{1, 0});
  CHECK(apply_with_noise(testing::half_identity(0, 0), {0, 0}, Vector2q(q(0), q(0))) == LatticePoint{0, 0});
  // Floor, not truncation.
  CHECK(apply_with_noise(testing::half_identity(0, 0), {-1, -3}, Vector2q(q(0), q(0))) == LatticePoint{-1, -2});
}

TEST_CASE("branch_set matches the dense-grid oracle") {
  const AffineMap t1 = testing::half_identity(1, 0);
  const auto four = branch_set(t1, {0, 0}, NoiseBound(q(1, 2)));
  CHECK(four == std::vector<LatticePoint>{{0, -1}, {0, 0}, {1, -1}, {1, 0}});
  CHECK(std::set<LatticePoint>(four.begin(), four.end()) == testing::grid_branch_oracle(t1, {0, 0}, q(1, 2)));

  CHECK(branch_set(t1, {0, 0}, NoiseBound(q(0))) == std::vector<LatticePoint>{{1, 0}});

  const AffineMap centred = testing::half_identity(q(1, 2), q(1, 2));
  CHECK(branch_set(centred, {0, 0}, NoiseBound(q(1, 4))) == std::vector<LatticePoint>{{0, 0}});
  CHECK(testing::grid_branch_oracle(centred, {0, 0}, q(1, 4)) == std::set<LatticePoint>{{0, 0}});

  SUBCASE("random maps, states and noise bounds") {
    RandomStream rng(5);
    for (int i = 0; i < 300; ++i) {
      const AffineMap map = testing::random_map(rng);
      const LatticePoint x{rng.uniform_int(-20, 20), rng.uniform_int(-20, 20)};
      const Rational eps = q(rng.uniform_int(0, 40), 40);
      const auto got = branch_set(map, x, NoiseBound(eps));
      // Denominator 40·8·4 keeps every floor boundary on the oracle grid.
      CHECK(std::set<LatticePoint>(got.begin(), got.end()) == testing::grid_branch_oracle(map, x, eps, 1280));
    }
  }
}

TEST_CASE("branch sets are products of consecutive ranges") {
  RandomStream rng(17);
  for (int i = 0; i < 500; ++i) {
    const AffineMap map = testing::random_map(rng);
    const LatticePoint x{rng.uniform_int(-50, 50), rng.uniform_int(-50, 50)};
    const Rational eps = q(rng.uniform_int(0, 30), 10);
    const Box box = branch_box(map, x, NoiseBound(eps));
    const Vector2q v = map.image(x);
    CHECK(box.x_min == floor(v(0) - eps));
    CHECK(box.x_max == floor(v(0) + eps));
    CHECK(box.y_min == floor(v(1) - eps));
    CHECK(box.y_max == floor(v(1) + eps));
    CHECK(box.width() >= 1);
    CHECK(box.height() >= 1);
  }
}

TEST_CASE("sample_step is deterministic and lands in the branch set") {
  const AffineMap t1 = testing::half_identity(1, 0);
  const NoiseBound noise(q(1, 2));
  RandomStream a(42), b(42);
  const Step sa = sample_step(t1, {0, 0}, noise, a);
  const Step sb = sample_step(t1, {0, 0}, noise, b);
  CHECK(sa.point == sb.point);
  CHECK(sa.delta == sb.delta);
  CHECK(noise.admits(sa.delta));
  CHECK(denominator(sa.delta(0)) <= noise.sample_denominator());

  RandomStream zero(1);
  CHECK(sample_step(t1, {3, 3}, NoiseBound(q(0)), zero).delta == Vector2q(q(0), q(0)));

  SUBCASE("10^4 random (map, x, ε) samples") {
    RandomStream rng(2024);
    for (int i = 0; i < 10'000; ++i) {
      const AffineMap map = testing::random_map(rng);
      const LatticePoint x{rng.uniform_int(-30, 30), rng.uniform_int(-30, 30)};
      const NoiseBound nb(q(rng.uniform_int(0, 20), 10));
      const Step s = sample_step(map, x, nb, rng);
      REQUIRE(in_branch_set(map, x, nb, s.point));
      REQUIRE(nb.admits(s.delta));
      REQUIRE(apply_with_noise(map, x, s.delta) == s.point);
    }
  }
}

TEST_CASE("small-denominator noise grids reach the closed endpoints") {
  // Q = 2, ε = 1/2: δ ∈ {−1/2, 0, 1/2}; all four outcomes must appear.
  const AffineMap t1 = testing::half_identity(1, 0);
  const NoiseBound noise(q(1, 2), BigInt(2));
  CHECK(noise.grid_radius() == 1);
  RandomStream rng(3);
  std::set<LatticePoint> seen;
  for (int i = 0; i < 400; ++i) seen.insert(sample_step(t1, {0, 0}, noise, rng).point);
  CHECK(seen.size() == 4);
  CHECK_THROWS_AS(NoiseBound(q(1, 2), BigInt(1)), InputError);
  CHECK_THROWS_AS(NoiseBound(q(-1, 2)), InputError);
}

TEST_CASE("preimage_set is dual to branch_set") {
  const AffineMap t1 = testing::half_identity(1, 0);
  const NoiseBound half(q(1, 2));
  const auto pre = preimage_set(t1, {1, 0}, half, Box{-4, 4, -4, 4});
  CHECK(std::find(pre.begin(), pre.end(), LatticePoint{0, 0}) != pre.end());

  const AffineMap centred = testing::half_identity(q(1, 2), q(1, 2));
  CHECK(preimage_set(centred, {40, 40}, NoiseBound(q(0)), Box{-4, 4, -4, 4}).empty());
  CHECK_THROWS_AS(preimage_set(t1, {0, 0}, half, Box{1, 0, 0, 0}), EmptyWindow);

  RandomStream rng(9);
  for (int i = 0; i < 40; ++i) {
    const AffineMap map = testing::random_map(rng);
    const NoiseBound nb(q(rng.uniform_int(0, 12), 8));
    const Box window{-3, 3, -3, 3};
    const Box ys = image_box(map, window, nb);
    for (std::int64_t yx = ys.x_min - 1; yx <= ys.x_max + 1; ++yx)
      for (std::int64_t yy = ys.y_min - 1; yy <= ys.y_max + 1; ++yy) {
        const LatticePoint y{yx, yy};
        const auto pre_y = preimage_set(map, y, nb, window);
        const std::set<LatticePoint> got(pre_y.begin(), pre_y.end());
        window.for_each([&](LatticePoint x) { REQUIRE(in_branch_set(map, x, nb, y) == got.contains(x)); });
      }
  }
}

TEST_CASE("image_box and reach_box contain every reachable state") {
  RandomStream rng(21);
  for (int i = 0; i < 30; ++i) {
    const TransformSet ts = testing::random_transform_set(rng, 2);
    const NoiseBound nb(q(rng.uniform_int(0, 8), 8));
    const LatticePoint x0{rng.uniform_int(-10, 10), rng.uniform_int(-10, 10)};
    std::set<LatticePoint> layer{x0};
    for (int step = 1; step <= 3; ++step) {
      std::set<LatticePoint> next;
      for (const auto& x : layer)
        for (const auto& map : ts)
          for (const auto& y : branch_set(map, x, nb)) next.insert(y);
      const Box box = reach_box(ts, nb, Box::point(x0), step);
      for (const auto& y : next) REQUIRE(box.contains(y));
      layer = std::move(next);
    }
  }
}

TEST_CASE("trajectories") {
  const auto inst = testing::worked_example();
  const SymbolicCode code{1, 2, 1};
  const std::vector<Vector2q> deltas{Vector2q(q(3, 10), q(-4, 10)), Vector2q(q(-2, 10), q(2, 10)),
                                     Vector2q(q(1, 10), q(4, 10))};
  const Trajectory t = replay_trajectory(inst.maps, code, inst.x0, deltas);
  CHECK(t.states == std::vector<LatticePoint>{{0, 0}, {1, -1}, {0, 0}, {1, 0}});

  RandomStream rng(8);
  const Trajectory empty = sample_trajectory(inst.maps, SymbolicCode{}, {4, 5}, inst.noise, rng);
  CHECK(empty.states == std::vector<LatticePoint>{{4, 5}});

  CHECK_THROWS_AS(sample_trajectory(inst.maps, SymbolicCode{1, 3}, {0, 0}, inst.noise, rng), InvalidCode);

  RandomStream r1(77), r2(77);
  const SymbolicCode longer{1, 2, 2, 1, 2, 1, 1};
  const Trajectory s = sample_trajectory(inst.maps, longer, {0, 0}, inst.noise, r1);
  CHECK(s.endpoint() == sample_endpoint(inst.maps, longer, {0, 0}, inst.noise, r2));
  // Recorded noise reproduces the states exactly.
  CHECK(replay_trajectory(inst.maps, longer, {0, 0}, *s.noises).states == s.states);
}

TEST_CASE("far states move inward") {
  // s bounds ‖A‖₂ from above; floating point here only selects test points.
  RandomStream rng(31);
  for (int i = 0; i < 200; ++i) {
    const AffineMap map = testing::random_map(rng);
    Eigen::Matrix2d a;
    for (int k = 0; k < 4; ++k) a(k / 2, k % 2) = to_double(map.linear()(k / 2, k % 2));
    const double s = std::sqrt(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(a.transpose() * a).eigenvalues().maxCoeff()) + 1e-9;
    const NoiseBound nb(q(rng.uniform_int(0, 10), 10));
    const double b_norm = std::hypot(to_double(map.offset()(0)), to_double(map.offset()(1)));
    const double radius = (b_norm + (1.0 + to_double(nb.epsilon())) * std::sqrt(2.0)) / (1.0 - s);
    const double angle = 6.283185307179586 * rng.uniform_real();
    const double r = radius * (1.01 + 3.0 * rng.uniform_real()) + 1.0;
    const LatticePoint x{std::llround(r * std::cos(angle)), std::llround(r * std::sin(angle))};
    const double norm_x = std::hypot(static_cast<double>(x.x), static_cast<double>(x.y));
    if (norm_x <= radius) continue;
    for (const auto& y : branch_set(map, x, nb))
      CHECK(std::hypot(static_cast<double>(y.x), static_cast<double>(y.y)) < norm_x);
  }
}

TEST_CASE("large coordinates take the arbitrary-precision path consistently") {
  const AffineMap map = make_affine_map(q(1, 3), q(1, 7), q(-1, 5), q(2, 9), q(5, 11), q(-1, 13));
  const NoiseBound nb(q(3, 7));
  for (std::int64_t base : {std::int64_t{1} << 27, std::int64_t{1} << 29, std::int64_t{1} << 40}) {
    const LatticePoint x{base + 3, -base - 5};
    const Box box = branch_box(map, x, nb);
    const Vector2q v = map.image(x);
    CHECK(box.x_min == floor(v(0) - nb.epsilon()));
    CHECK(box.y_max == floor(v(1) + nb.epsilon()));
    RandomStream rng(1);
    const Step s = sample_step(map, x, nb, rng);
    CHECK(apply_with_noise(map, x, s.delta) == s.point);
  }
}
