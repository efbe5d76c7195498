#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "spip/errors.hpp"
#include "spip/experiments.hpp"
#include "test_support.hpp"

using namespace spip;
using spip::testing::q;

TEST_CASE("shannon_entropy") {
  const std::vector<std::uint64_t> uniform{5, 5, 5, 5};
  CHECK(shannon_entropy(uniform) == doctest::Approx(2.0).epsilon(1e-12));
  const std::vector<std::uint64_t> single{17};
  CHECK(shannon_entropy(single) == 0.0);
  const std::vector<std::uint64_t> skew{750, 250};
  const double closed = -0.75 * std::log2(0.75) - 0.25 * std::log2(0.25);
  CHECK(std::abs(shannon_entropy(skew) - closed) < 1e-12);
  CHECK(std::abs(shannon_entropy(skew) - 0.811278) < 1e-6);

  const std::vector<std::uint64_t> permuted{250, 750, 0};
  CHECK(shannon_entropy(permuted) == doctest::Approx(shannon_entropy(skew)));

  std::map<LatticePoint, std::uint64_t> hist{{{0, 0}, 3}, {{1, 0}, 3}};
  CHECK(shannon_entropy(hist) == doctest::Approx(1.0));

  CHECK_THROWS_AS(shannon_entropy(std::vector<std::uint64_t>{}), EmptyHistogram);
  CHECK_THROWS_AS(shannon_entropy(std::vector<std::uint64_t>{0, 0}), EmptyHistogram);
}

TEST_CASE("symbolic_freedom reproduces the published freedom column") {
  // (transforms, entropy, freedom) as printed in the reference table.
  struct Row {
    int m;
    double h, f;
  };
  const Row rows[] = {{2, 2.71, 2.71},  {4, 3.23, 1.62},  {6, 3.23, 1.25},  {8, 3.47, 1.16},
                      {12, 3.57, 1.00}, {20, 3.70, 0.86}, {30, 3.85, 0.79}, {40, 3.94, 0.74}};
  for (const auto& r : rows) {
    CAPTURE(r.m);
    CHECK(std::abs(symbolic_freedom(r.h, r.m) - r.f) <= 0.01);
  }
  CHECK(symbolic_freedom(3.57, 12) == doctest::Approx(3.57 / std::log2(12.0)));
  CHECK(symbolic_freedom(1.5, 1) == 1.5);
}

TEST_CASE("generated maps are contractive with half-integer offsets") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto ts = generate_transform_set(5, seed);
    REQUIRE(ts.size() == 5);
    for (const auto& map : ts) {
      CHECK(is_contractive(map.linear()));
      for (int c = 0; c < 2; ++c) {
        const Rational b = map.offset()(c);
        CHECK(denominator(b) == 2);
        CHECK(abs(b) <= 3);
      }
      // Scale of a scaled rotation: sqrt(det A) within [0.3, 0.7] up to rounding.
      const double s = std::sqrt(to_double(map.linear().determinant()));
      CHECK(s >= 0.299);
      CHECK(s <= 0.701);
    }
  }
  const auto a = generate_transform_set(3, 9), b = generate_transform_set(3, 9);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("run_metrics invariants") {
  RunConfig single{"one", 20, 3, q(1, 4), 1, 4, 5};
  const auto m1 = run_metrics(single);
  CHECK(m1.entropy_bits == 0.0);
  CHECK(m1.unique_endpoints == 1);
  CHECK(m1.collisions == 0);
  CHECK(m1.most_frequent_count == 1);

  RunConfig cfg{"x", 50, 6, q(3, 10), 1000, 11, 12};
  const auto a = run_metrics(cfg);
  CHECK(a == run_metrics(cfg));
  CHECK(a == run_metrics(cfg, 4));
  CHECK(a.entropy_bits >= 0.0);
  CHECK(a.entropy_bits <= std::log2(static_cast<double>(a.unique_endpoints)) + 1e-12);
  CHECK(a.collisions <= a.unique_endpoints);
  CHECK(a.most_frequent_count <= cfg.trials);
  CHECK(a.symbolic_freedom == doctest::Approx(a.entropy_bits / std::log2(6.0)));
}

TEST_CASE("run_metrics matches a direct recount") {
  // Oracle: replay every trial step by step (symbol, then noise) and rebuild the histogram here.
  RunConfig cfg{"x", 25, 4, q(1, 2), 300, 21, 22};
  const auto ts = generate_transform_set(cfg.transforms, cfg.map_seed);
  const NoiseBound noise(cfg.epsilon);
  std::map<LatticePoint, std::uint64_t> hist;
  double dist = 0;
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    auto rng = RandomStream::derive(cfg.noise_seed, t);
    LatticePoint end{0, 0};
    for (int i = 0; i < cfg.steps; ++i) {
      const auto symbol = rng.uniform_int(1, cfg.transforms);
      end = sample_step(ts.at(static_cast<int>(symbol)), end, noise, rng).point;
    }
    ++hist[end];
    dist += std::hypot(static_cast<double>(end.x), static_cast<double>(end.y));
  }
  const auto got = run_metrics(cfg);
  CHECK(got.unique_endpoints == hist.size());
  std::uint64_t coll = 0, top = 0;
  for (const auto& [p, c] : hist) {
    coll += c >= 2 ? 1 : 0;
    top = std::max(top, c);
  }
  CHECK(got.collisions == coll);
  CHECK(got.most_frequent_count == top);
  CHECK(got.entropy_bits == doctest::Approx(shannon_entropy(hist)).epsilon(1e-12));
  CHECK(got.avg_distance == doctest::Approx(dist / static_cast<double>(cfg.trials)).epsilon(1e-12));
}

TEST_CASE("default suite") {
  const auto suite = default_suite();
  REQUIRE(suite.size() == 8);
  const int steps[] = {30, 60, 120, 200, 300, 500, 800, 1200};
  const int ms[] = {2, 4, 6, 8, 12, 20, 30, 40};
  const Rational eps[] = {q(1, 20), q(1, 10), q(1, 4), q(2, 5), q(1, 2), q(3, 5), q(7, 10), q(4, 5)};
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(suite[i].steps == steps[i]);
    CHECK(suite[i].transforms == ms[i]);
    CHECK(suite[i].epsilon == eps[i]);
    CHECK(suite[i].trials == 1000);
    CHECK(suite[i].label == "Run " + std::to_string(i + 1));
  }
}

TEST_CASE("suite CSV") {
  std::vector<RunConfig> cfgs{{"a", 10, 2, q(1, 10), 50, 1, 2}, {"b", 20, 3, q(1, 2), 50, 3, 4}};
  const auto metrics = run_suite(cfgs);
  const auto csv = suite_csv(cfgs, metrics);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line ==
        "experiment,steps,transforms,epsilon,entropy_bits,unique_endpoints,collisions,most_frequent_count,avg_distance,"
        "symbolic_freedom");
  std::getline(in, line);
  CHECK(line.rfind("a,10,2,0.1,", 0) == 0);
  std::getline(in, line);
  CHECK(line.rfind("b,20,3,0.5,", 0) == 0);
  CHECK_FALSE(std::getline(in, line));

  CHECK(suite_csv(cfgs, run_suite(cfgs, 8)) == csv);
}

TEST_CASE("spearman") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> up{2, 4, 6, 8, 100}, down{5, 4, 3, 2, 1};
  CHECK(spearman(x, up) == doctest::Approx(1.0));
  CHECK(spearman(x, down) == doctest::Approx(-1.0));
  // Ties take average ranks: Pearson on ranks (1,2,3,4) vs (1.5,1.5,3.5,3.5).
  const std::vector<double> a{1, 2, 3, 4}, b{7, 7, 9, 9};
  CHECK(spearman(a, b) == doctest::Approx(0.894427191).epsilon(1e-9));
}

TEST_CASE("sweep surface") {
  CHECK(noise_branching_proxy(q(1, 10)) == 1);
  CHECK(noise_branching_proxy(q(7, 10)) == 7);
  CHECK(noise_branching_proxy(q(71, 100)) == 8);
  CHECK(noise_branching_proxy(0) == 1);

  const std::vector<int> n1{1};
  const std::vector<Rational> e1{q(1, 10)};
  const auto one = sweep_surface(n1, e1, 10);
  REQUIRE(one.size() == 1);
  CHECK(std::abs(one[0].log2_space - 3.321928094887362) < 1e-9);

  const std::vector<int> n5{5};
  const std::vector<Rational> step{q(7, 10), q(71, 100)};
  const auto s = sweep_surface(n5, step, 10);
  CHECK(std::abs(s[0].log2_space - 5 * std::log2(70.0)) < 1e-9);
  CHECK(std::abs(s[1].log2_space - 5 * std::log2(80.0)) < 1e-9);

  const std::vector<int> n128{128};
  const std::vector<Rational> e4{q(2, 5)};
  CHECK(std::abs(sweep_surface(n128, e4, 10)[0].log2_space - 681.0) < 0.5);

  const std::vector<int> n12{1, 2};
  const auto two = sweep_surface(n12, e1, 10);
  const auto csv = surface_csv(two);
  CHECK(csv == "n,epsilon,log2_space\n1,0.1,3.321928095\n2,0.1,6.643856190\n");
}

TEST_CASE("grover cost") {
  const auto c = grover_cost(2, 4, 3);
  CHECK(c.log2_space == doctest::Approx(9.0));
  CHECK(std::exp2(c.log2_space) == doctest::Approx(512.0));
  CHECK(c.log2_grover == doctest::Approx(4.5));
  CHECK(grover_cost(1, 4, 128).log2_space == doctest::Approx(256.0));
  const auto z = grover_cost(5, 3, 0);
  CHECK(z.log2_space == 0.0);
  CHECK(z.log2_grover == 0.0);
}

TEST_CASE("decimal rendering") {
  CHECK(decimal(q(1, 20)) == "0.05");
  CHECK(decimal(q(-3, 4)) == "-0.75");
  CHECK(decimal(q(2)) == "2");
  CHECK(decimal(q(1, 3), 4) == "0.3333");
  CHECK(decimal(q(2, 3), 4) == "0.6667");
}
