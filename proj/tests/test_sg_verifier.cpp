#include <catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "smallgain/ode_sim.hpp"
#include "smallgain/sg_verifier.hpp"

using namespace smallgain;
using Catch::Approx;
using CF = ComparisonFunction;

namespace {

VerifyBudgets small_budgets(std::uint64_t seed = 1) {
  VerifyBudgets b;
  b.samples = 300;
  b.seed = seed;
  return b;
}

NetworkSpec finite_spec(const fixture::Matrix& a, Aggregation mode = Aggregation::Max) {
  NetworkSpec s;
  s.gains = fixture::linear_family(a, mode);
  s.data.beta_max = KLFunction::exponential(1.0, 1.0);
  s.data.gamma_max = CF::identity();
  return s;
}

bool holds(CheckStatus s) { return s == CheckStatus::Pass || s == CheckStatus::Supported; }

}  // namespace

TEST_CASE("linear network preset is ISS by the spectral criterion") {
  const auto v = verify(linear_invariant_network(0.4, 0.5), small_budgets());
  CHECK(v.conclusion == Conclusion::ISS);
  CHECK(v.grade == "criterion");
  REQUIRE(v.spectral_value);
  CHECK(*v.spectral_value == Approx(0.9).margin(1e-9));
  for (const char* name : {"well_defined", "envelopes", "mbi_evidence", "mlim_evidence"})
    CHECK(holds(v.check(name).status));
  REQUIRE(v.sigma);
  REQUIRE(v.gamma);
  CHECK((*v.sigma)(1.0) == Approx(20.0).epsilon(1e-9));
  CHECK((*v.gamma)(1.0) == Approx(20.0).epsilon(1e-9));

  const auto super = verify(linear_invariant_network(0.5, 0.55, 51), small_budgets());
  CHECK(super.conclusion != Conclusion::ISS);
  CHECK(super.counterevidence);
}

TEST_CASE("cubic network preset is ISS") {
  const auto v = verify(cubic_max_network(0.9, 0.9, 0.01, 51), small_budgets());
  CHECK(v.conclusion == Conclusion::ISS);
  CHECK(v.grade == "criterion");  // the preset gains are linear constants
  CHECK_FALSE(v.counterevidence);

  const auto over = verify(cubic_max_network(1.1, 0.9, 0.01, 51), small_budgets());
  CHECK(over.conclusion != Conclusion::ISS);
  CHECK(over.counterevidence);
}

TEST_CASE("supercritical 2×2 family carries a cycle witness") {
  const auto v = verify(finite_spec({{0.0, 1.2}, {1.0, 0.0}}), small_budgets());
  CHECK(v.conclusion == Conclusion::Inconclusive);
  CHECK(v.counterevidence);
  REQUIRE(v.cycle_witness);
  CHECK(*v.cycle_witness == std::vector<std::size_t>{0, 1});
  REQUIRE(v.cycle_value);
  CHECK(*v.cycle_value == Approx(1.2));
  CHECK(v.check("mbi_evidence").status == CheckStatus::Falsified);
}

TEST_CASE("missing transient envelope is inconclusive") {
  auto spec = finite_spec(fixture::two_by_two());
  spec.data.beta_max.reset();
  const auto v = verify(spec, small_budgets());
  CHECK(v.check("envelopes").status == CheckStatus::Inconclusive);
  CHECK(v.conclusion == Conclusion::Inconclusive);
}

TEST_CASE("synthesize_ugs_gains") {
  auto [s, g] = synthesize_ugs_gains(CF::linear(10.0), CF::identity(), CF::identity());
  CHECK(s(0.5) == Approx(10.0));
  CHECK(g(2.0) == Approx(40.0));
  std::tie(s, g) = synthesize_ugs_gains(CF::identity(), CF::identity(), CF::zero());
  CHECK(s(3.0) == Approx(6.0));
  CHECK(g(3.0) == 0.0);
  std::tie(s, g) = synthesize_ugs_gains(CF::power(1.0, 0.5), CF::power(2.0, 3.0), CF::linear(0.5));
  CHECK(validate_class(s, 5).ok);
  CHECK(validate_class(g, 5).ok);
}

TEST_CASE("scaling gains down never flips ISS to falsified") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0.3, 0.95);
  for (int rep = 0; rep < 10; ++rep) {
    auto a = oracle::random_matrix(rng, 3);
    a = fixture::scaled(a, u(rng) / oracle::max_cycle_mean(a));
    const auto base = verify(finite_spec(a), small_budgets(static_cast<std::uint64_t>(rep)));
    REQUIRE(base.conclusion == Conclusion::ISS);
    for (double c : {0.9, 0.5, 0.1}) {
      const auto scaled = verify(finite_spec(fixture::scaled(a, c)), small_budgets(static_cast<std::uint64_t>(rep)));
      CHECK(scaled.conclusion == Conclusion::ISS);
      CHECK_FALSE(scaled.counterevidence);
    }
  }
}

TEST_CASE("synthesized UGS bound holds on simulated linear trajectories") {
  const auto v = verify(linear_invariant_network(0.4, 0.5), small_budgets());
  REQUIRE(v.sigma);
  REQUIRE(v.gamma);
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int rep = 0; rep < 8; ++rep) {
    OdeRun run;
    run.kind = LinearInvariant{0.4, 0.5};
    run.N = 16;
    run.x0.resize(16);
    for (auto& x : run.x0) x = u(rng);
    run.u = InputSignal::table({0.0, 3.0, 7.0}, {u(rng), 0.5 * u(rng), u(rng)});
    run.T = 15.0;
    run.dt = 1e-2;
    const auto t = simulate(run);
    const double bound = (*v.sigma)(t.x0_norm) + (*v.gamma)(t.input_sup);
    for (double s : t.sup_norms) CHECK(s <= bound);
  }
}
