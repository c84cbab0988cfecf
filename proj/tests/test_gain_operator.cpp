#include <catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "smallgain/error.hpp"
#include "smallgain/gain_operator.hpp"

using namespace smallgain;
using Catch::Approx;
using CF = ComparisonFunction;

namespace {

GainOperator banded(double a, double b, Aggregation mode, std::size_t window,
                    Boundary boundary = Boundary::Periodic) {
  return GainOperator(GainFamily(BandedGains({{-1, CF::linear(a)}, {1, CF::linear(b)}}), mode), window, boundary);
}

// Random 4×4 Max family mixing linear and power leaves, plus the same gains as
// a plain callable for the path oracle.
struct MixedFamily {
  GainOperator op;
  std::vector<std::vector<std::pair<double, double>>> cp;  // (c, p), c = 0 for no edge
};

MixedFamily mixed_family(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FiniteGains g(n);
  std::vector<std::vector<std::pair<double, double>>> cp(n, std::vector<std::pair<double, double>>(n, {0.0, 1.0}));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || u(rng) < 0.2) continue;
      const double c = 0.2 + 1.3 * u(rng);
      const double p = u(rng) < 0.5 ? 1.0 : 0.5 + 1.5 * u(rng);
      cp[i][j] = {c, p};
      g.set(i, j, p == 1.0 ? CF::linear(c) : CF::power(c, p));
    }
  return {GainOperator(GainFamily(std::move(g), Aggregation::Max)), cp};
}

}  // namespace

TEST_CASE("apply on the 2×2 family") {
  const auto s = StateVector({1.0, 2.0});
  CHECK(apply(fixture::linear_op(fixture::two_by_two()), s).values() == std::vector<double>{1.0, 0.25});
  CHECK(apply(fixture::linear_op(fixture::two_by_two(), Aggregation::Sum), s).values() ==
        std::vector<double>{1.0, 0.25});
  CHECK(apply(fixture::linear_op(fixture::two_by_two()), StateVector({0.0, 0.0})).values() ==
        std::vector<double>{0.0, 0.0});
}

TEST_CASE("sup ties resolve to the lowest index") {
  const auto op = fixture::linear_op({{0.0, 0.5, 0.5}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}});
  const auto r = apply_with_witness(op, StateVector({0.0, 1.0, 1.0}));
  CHECK(r.value[0] == 0.5);
  CHECK(r.witness[0] == 1);
  CHECK(r.witness[1] == -1);
}

TEST_CASE("path-form powers") {
  const auto op = fixture::linear_op(fixture::two_by_two());
  const auto s = StateVector({1.0, 2.0});
  const auto p2 = power_apply_pathform(op, s, 2);
  CHECK(p2.value.values() == std::vector<double>{0.125, 0.25});
  CHECK(p2.paths[0] == std::vector<long>{0, 1, 0});
  CHECK(apply(op, apply(op, s)).values() == p2.value.values());
  CHECK(power_apply_pathform(op, s, 1).value.values() == apply(op, s).values());
  CHECK_THROWS_AS(power_apply_pathform(fixture::linear_op(fixture::two_by_two(), Aggregation::Sum), s, 2), Error);

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int rep = 0; rep < 20; ++rep) {
    const auto fam = mixed_family(rng, 4);
    std::vector<double> x(4);
    for (auto& v : x) v = u(rng);
    const auto gamma = [&](std::size_t i, std::size_t j, double r) {
      const auto [c, p] = fam.cp[i][j];
      return c == 0.0 ? 0.0 : c * std::pow(r, p);
    };
    const auto want = oracle::max_power_by_paths(4, gamma, x, 3);
    auto iter = fam.op.make(x);
    for (int k = 0; k < 3; ++k) iter = apply(fam.op, iter);
    const auto got = power_apply_pathform(fam.op, fam.op.make(x), 3).value;
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(std::abs(got[i] - iter[i]) <= 1e-12 * std::max(1.0, iter[i]));
      CHECK(std::abs(got[i] - want[i]) <= 1e-12 * std::max(1.0, want[i]));
    }
  }
}

TEST_CASE("spectral radius examples") {
  CHECK(spectral_radius(fixture::linear_op(fixture::two_by_two())).value == Approx(std::sqrt(0.125)).margin(1e-6));
  CHECK(spectral_radius(banded(0.4, 0.5, Aggregation::Sum, 201)).value == Approx(0.9).margin(1e-9));
  CHECK(spectral_radius(GainOperator(GainFamily(FiniteGains(3), Aggregation::Max))).value == 0.0);
  FiniteGains nl(2);
  nl.set(0, 1, CF::power(1.0, 2.0));
  CHECK_THROWS_AS(spectral_radius(GainOperator(GainFamily(nl, Aggregation::Max))), Error);
}

TEST_CASE("spectral radius against independent oracles") {
  std::mt19937_64 rng(101);
  for (int rep = 0; rep < 40; ++rep) {
    const auto a = oracle::random_matrix(rng, 2 + rep % 5);
    const double rmax = oracle::max_cycle_mean(a);
    const double rsum = oracle::eigen_spectral_radius(a);
    CHECK(spectral_radius(fixture::linear_op(a, Aggregation::Max)).value == Approx(rmax).epsilon(1e-9));
    CHECK(spectral_radius(fixture::linear_op(a, Aggregation::Sum)).value == Approx(rsum).epsilon(1e-8));
  }
  // Two-node Max families: r = √(γ₁₂γ₂₁).
  std::uniform_real_distribution<double> u(0.05, 3.0);
  for (int rep = 0; rep < 20; ++rep) {
    const double p = u(rng), q = u(rng);
    CHECK(spectral_radius(fixture::linear_op({{0.0, p}, {q, 0.0}})).value == Approx(std::sqrt(p * q)).margin(1e-6));
  }
}

TEST_CASE("cycle analysis") {
  auto rep = cycle_analysis(fixture::linear_op(fixture::two_by_two()));
  REQUIRE(rep.cycles.size() == 1);
  CHECK(rep.cycles[0].product == 0.125);
  CHECK(rep.all_contractions);
  CHECK_FALSE(rep.witness);

  rep = cycle_analysis(fixture::linear_op({{0.0, 2.0}, {1.0, 0.0}}));
  CHECK_FALSE(rep.all_contractions);
  REQUIRE(rep.witness);
  CHECK(rep.cycles[*rep.witness].nodes == std::vector<std::size_t>{0, 1});
  CHECK(rep.cycles[*rep.witness].product == 2.0);

  CHECK(cycle_analysis(GainOperator(GainFamily(FiniteGains(1), Aggregation::Max))).cycles.empty());
  CHECK_THROWS_AS(cycle_analysis(banded(0.4, 0.5, Aggregation::Max, 11)), Error);

  // Complete digraph on 4 nodes has 20 simple cycles.
  std::mt19937_64 rng(7);
  CHECK(cycle_analysis(fixture::linear_op(oracle::random_matrix(rng, 4))).cycles.size() == 20);
}

TEST_CASE("kleene star") {
  const auto op = fixture::linear_op(fixture::two_by_two());
  auto k = kleene_star(op, StateVector({1.0, 1.0}));
  CHECK(k.status == KleeneStatus::Converged);
  CHECK(k.closure.values() == std::vector<double>{1.0, 1.0});
  k = kleene_star(op, StateVector({0.0, 1.0}));
  CHECK(k.closure.values() == std::vector<double>{0.5, 1.0});

  const auto super = fixture::linear_op({{0.0, 1.2}, {1.0, 0.0}});
  CHECK(kleene_star(super, super.ones()).status == KleeneStatus::Diverged);
  CHECK_THROWS_AS(kleene_star(fixture::linear_op(fixture::two_by_two(), Aggregation::Sum), op.ones()), Error);
}

TEST_CASE("kleene star fixed relations on random subcritical families") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int rep = 0; rep < 30; ++rep) {
    auto a = oracle::random_matrix(rng, 4);
    a = fixture::scaled(a, 0.8 / oracle::max_cycle_mean(a));
    const auto op = fixture::linear_op(a);
    std::vector<double> s(4);
    for (auto& v : s) v = u(rng);
    const auto k = kleene_star(op, op.make(s));
    REQUIRE(k.status == KleeneStatus::Converged);
    const auto gq = apply(op, k.closure);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(s[i] <= k.closure[i]);
      CHECK(gq[i] <= k.closure[i] + 1e-12);
    }
  }
}

TEST_CASE("strict decay point") {
  auto cert = strict_decay_point(fixture::linear_op(fixture::two_by_two()), 0.5);
  CHECK(cert.s0.values() == std::vector<double>{1.0, 1.0});
  CHECK(cert.lambda == Approx(2.0 / 3.0));
  CHECK(cert.residual <= 0.0);

  cert = strict_decay_point(banded(0.4, 0.5, Aggregation::Max, 101), 0.05);
  CHECK(cert.s0.values() == std::vector<double>(101, 1.0));
  CHECK(cert.lambda == Approx(1.0 / 1.05));

  cert = strict_decay_point(GainOperator(GainFamily(FiniteGains(3), Aggregation::Max)), 2.0);
  CHECK(cert.s0.values() == std::vector<double>(3, 1.0));
  CHECK(cert.lambda == Approx(1.0 / 3.0));

  try {
    strict_decay_point(fixture::linear_op(fixture::two_by_two()), 2.0);  // 3·0.354 ≥ 1
    FAIL("expected epsilon-too-large");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::epsilon_too_large);
  }
}

TEST_CASE("Sum-mode decay point via Neumann series") {
  const auto op = fixture::linear_op({{0.0, 0.3, 0.4}, {0.2, 0.0, 0.5}, {0.6, 0.1, 0.0}}, Aggregation::Sum);
  const double r = spectral_radius(op).value;
  const double eps = (1.0 / r - 1.0) / 2.0;
  const auto cert = decay_point(op, eps);
  const auto g = apply(op, cert.s0);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(cert.s0[i] >= 1.0);
    CHECK(g[i] <= cert.lambda * cert.s0[i] + 1e-12);
  }
}

TEST_CASE("monotone, homogeneous, subadditive") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (auto mode : {Aggregation::Max, Aggregation::Sum}) {
    const auto op = fixture::linear_op(oracle::random_matrix(rng, 5), mode);
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<double> s1(5), s2(5);
      for (std::size_t i = 0; i < 5; ++i) {
        s1[i] = u(rng);
        s2[i] = s1[i] + u(rng);
      }
      const auto a1 = op.apply_raw(s1), a2 = op.apply_raw(s2);
      for (std::size_t i = 0; i < 5; ++i) CHECK(a1[i] <= a2[i]);

      const double c = u(rng);
      std::vector<double> cs(5), sum(5);
      for (std::size_t i = 0; i < 5; ++i) {
        cs[i] = c * s1[i];
        sum[i] = s1[i] + s2[i];
      }
      const auto ac = op.apply_raw(cs), as = op.apply_raw(sum);
      for (std::size_t i = 0; i < 5; ++i) {
        CHECK(std::abs(ac[i] - c * a1[i]) <= 1e-12 * std::max(1.0, ac[i]));
        CHECK(as[i] <= a1[i] + a2[i] + 1e-12);
      }
    }
  }
}

TEST_CASE("block-diagonal families: spectral radius is the max over blocks") {
  std::mt19937_64 rng(53);
  for (int rep = 0; rep < 10; ++rep) {
    BlockDiagonalGains blocks;
    double want = 0.0;
    for (int b = 0; b < 3; ++b) {
      const auto a = oracle::random_matrix(rng, 2 + static_cast<std::size_t>(b));
      want = std::max(want, oracle::max_cycle_mean(a));
      blocks.blocks.push_back(std::get<FiniteGains>(fixture::linear_family(a, Aggregation::Max).structure()));
    }
    const GainOperator op(GainFamily(blocks, Aggregation::Max));
    CHECK(op.dimension() == 9);
    CHECK(spectral_radius(op).value == Approx(want).epsilon(1e-9));
    CHECK(cycle_analysis(op).all_contractions == (want < 1.0));
  }
}

TEST_CASE("banded operators are window independent on constant profiles") {
  const auto small = banded(0.4, 0.5, Aggregation::Sum, 16);
  const auto large = banded(0.4, 0.5, Aggregation::Sum, 128);
  const auto a = apply(small, small.ones().scaled(2.0));
  const auto b = apply(large, large.ones().scaled(2.0));
  CHECK(a.values() == std::vector<double>(16, 1.8));
  CHECK(b.values() == std::vector<double>(128, 1.8));
  // Zero padding loses one neighbour at each end.
  const auto z = apply(banded(0.4, 0.5, Aggregation::Sum, 16, Boundary::ZeroPad), small.ones());
  CHECK(z[0] == 0.5);
  CHECK(z[15] == 0.4);
  CHECK_THROWS_AS(banded(0.4, 0.5, Aggregation::Sum, 2), Error);
}
