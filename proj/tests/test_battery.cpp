#include <catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "smallgain/battery.hpp"

using namespace smallgain;

namespace {

BatteryOptions opts(std::uint64_t seed) {
  BatteryOptions o;
  o.samples = 300;
  o.seed = seed;
  return o;
}

fixture::Matrix matrix_of(const GainFamily& f) {
  const auto& g = std::get<FiniteGains>(f.structure());
  fixture::Matrix a(g.size(), std::vector<double>(g.size(), 0.0));
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) a[i][j] = g.at(i, j).linear_coefficient().value_or(0.0);
  return a;
}

}  // namespace

TEST_CASE("battery examples") {
  auto r = run_battery(fixture::linear_op({{0.0, 0.5, 0.2}, {0.3, 0.0, 0.6}, {0.4, 0.1, 0.0}}), opts(1));
  CHECK(r.agree);
  CHECK(r.consensus);
  CHECK(r.probes.size() == 6);

  r = run_battery(fixture::linear_op({{0.0, 1.2}, {1.0, 0.0}}), opts(1));
  CHECK(r.agree);
  CHECK_FALSE(r.consensus);

  r = run_battery(GainOperator(GainFamily(FiniteGains(3), Aggregation::Max)), opts(1));
  CHECK(r.agree);
  CHECK(r.consensus);
}

TEST_CASE("random families hit the requested spectral radius") {
  for (auto mode : {Aggregation::Max, Aggregation::Sum}) {
    for (std::uint64_t k = 0; k < 10; ++k) {
      const auto fam = random_linear_family(5, k, 3, mode, 0.7);
      const auto a = matrix_of(fam);
      const double r = mode == Aggregation::Max ? oracle::max_cycle_mean(a) : oracle::eigen_spectral_radius(a);
      CHECK(r == Catch::Approx(0.7).epsilon(1e-8));
      for (std::size_t i = 0; i < 3; ++i) CHECK(a[i][i] == 0.0);
    }
  }
  // Same (seed, index), same family.
  CHECK(matrix_of(random_linear_family(5, 3, 3, Aggregation::Max, 0.7)) ==
        matrix_of(random_linear_family(5, 3, 3, Aggregation::Max, 0.7)));
}

TEST_CASE("battery agrees with the oracle on random families") {
  for (std::uint64_t k = 0; k < 12; ++k) {
    const auto mode = k % 2 == 0 ? Aggregation::Max : Aggregation::Sum;
    const bool sub = (k / 2) % 2 == 0;
    const auto r = run_battery(GainOperator(random_linear_family(9, k, 3, mode, sub ? 0.6 : 1.5)), opts(k));
    INFO("instance " << k);
    CHECK(r.agree);
    CHECK(r.consensus == sub);
  }
}
