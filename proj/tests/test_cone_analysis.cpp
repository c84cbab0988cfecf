#include <catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "smallgain/cone_analysis.hpp"
#include "smallgain/gain_operator.hpp"

using namespace smallgain;
using Catch::Approx;
using CF = ComparisonFunction;

namespace {

GainOperator zero_op(std::size_t n) { return GainOperator(GainFamily(FiniteGains(n), Aggregation::Max)); }
GainOperator pair_op(double p, double q) { return fixture::linear_op({{0.0, p}, {q, 0.0}}); }

}  // namespace

TEST_CASE("distance to the cone") {
  CHECK(dist_to_cone({1.0, -2.0, 3.0}) == 2.0);
  CHECK(dist_to_cone({0.0, 4.0}) == 0.0);
  CHECK(dist_to_cone({-0.5, -0.25}) == 0.5);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> x(4);
    bool nonneg = true;
    for (auto& v : x) {
      v = u(rng);
      nonneg = nonneg && v >= 0.0;
    }
    CHECK((dist_to_cone(x) == 0.0) == nonneg);
  }
}

TEST_CASE("sphere points have the requested max norm") {
  SampleStream rng(1, 2);
  for (int k = 0; k < 100; ++k) {
    const auto x = sphere_point(rng, 5, 3.5);
    CHECK(sup_norm(x) == 3.5);
    for (double v : x) CHECK(v >= 0.0);
  }
}

TEST_CASE("estimate_eta") {
  // 7/12 frozen from the dense sphere oracle; minimizer (1, 5/6).
  const auto a = fixture::two_by_two();
  const double dense = oracle::eta_2x2_max_dense(a, 1.0);
  CHECK(dense == Approx(7.0 / 12.0).margin(1e-5));
  const auto env = estimate_eta(fixture::linear_op(a), {1.0}, 2000, 7);
  CHECK(env.eta_values[0] == Approx(7.0 / 12.0).margin(0.01));
  CHECK(env.eta_values[0] >= dense - 1e-12);
  CHECK(env.report.verdict == Verdict::Supported);

  const auto flat = estimate_eta(pair_op(1.0, 1.0), {1.0}, 100, 7);
  CHECK(flat.report.verdict == Verdict::Falsified);
  CHECK(flat.eta_values[0] < 1e-12);

  const auto zero = estimate_eta(zero_op(3), {0.5, 2.0}, 50, 7);
  CHECK(zero.eta_values[0] == 0.5);
  CHECK(zero.eta_values[1] == 2.0);

  // Same seed, same numbers.
  const auto again = estimate_eta(fixture::linear_op(a), {1.0}, 2000, 7);
  CHECK(again.eta_values == env.eta_values);
}

TEST_CASE("eta verdict agrees with the spectral radius") {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 50; ++rep) {
    auto a = oracle::random_matrix(rng, 3);
    const double target = rep % 2 == 0 ? 0.6 : 1.4;
    a = fixture::scaled(a, target / oracle::max_cycle_mean(a));
    const auto op = fixture::linear_op(a);
    const auto env = estimate_eta(op, {0.1, 1.0, 10.0}, 200, static_cast<std::uint64_t>(rep));
    INFO("rep " << rep);
    CHECK((env.report.verdict == Verdict::Supported) == (spectral_radius(op).value < 1.0));
  }
}

TEST_CASE("probe_mbi") {
  const auto [w, obs] = mbi_observation(fixture::linear_op(fixture::two_by_two()), {1.0, 1.0});
  CHECK(w == std::vector<double>{0.5, 0.75});
  CHECK(obs.first == 0.75);
  CHECK(obs.second == 1.0);

  const auto zero = probe_mbi(zero_op(3), 200, 3);
  CHECK(zero.report.verdict == Verdict::Supported);
  for (double r : {0.1, 1.0, 5.0}) CHECK(zero.xi(r) == Approx(r).epsilon(1e-12));

  const auto flat = probe_mbi(pair_op(1.0, 1.0), 200, 3);
  CHECK(flat.report.verdict == Verdict::Falsified);
}

TEST_CASE("MBI samples respect the Neumann slack bound") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    auto a = oracle::random_matrix(rng, 3);
    a = fixture::scaled(a, 0.9 / oracle::max_cycle_mean(a));
    const auto env = probe_mbi(fixture::linear_op(a), 300, static_cast<std::uint64_t>(rep));
    CHECK(env.report.verdict == Verdict::Supported);
    for (const auto& [nw, nv] : env.pairs) CHECK(nv <= 10.0 * nw / (1.0 - 0.9) + 1e-12);
  }
}

TEST_CASE("strong SGC") {
  CHECK(check_strong_sgc(fixture::linear_op(fixture::two_by_two()), CF::linear(0.1), 500, 1).verdict ==
        Verdict::Supported);
  const auto bad = check_strong_sgc(pair_op(0.95, 0.95), CF::linear(0.1), 500, 1);
  REQUIRE(bad.verdict == Verdict::Falsified);
  REQUIRE(bad.witness);
  CHECK(bad.witness->x[0] == bad.witness->x[1]);
  CHECK(check_strong_sgc(zero_op(2), CF::linear(5.0), 100, 1).verdict == Verdict::Supported);
}

TEST_CASE("robust strong SGC") {
  CHECK(check_robust_strong_sgc(pair_op(0.3, 0.3), CF::linear(0.05), CF::linear(0.1), 500, 1).verdict ==
        Verdict::Supported);
  // x = 𝟏 also needs (1+ρ)·0.85 ≥ 1 in the unperturbed row, so ρ ≥ 3/17.
  const auto bad = check_robust_strong_sgc(pair_op(0.85, 0.85), CF::linear(0.2), CF::linear(0.2), 500, 1);
  REQUIRE(bad.verdict == Verdict::Falsified);
  REQUIRE(bad.witness);
  CHECK(bad.witness->i.has_value());
  CHECK(bad.witness->j.has_value());
  CHECK(check_robust_strong_sgc(zero_op(3), CF::linear(0.5), CF::linear(0.5), 100, 1).verdict ==
        Verdict::Supported);
}

TEST_CASE("robust strong ⇒ strong ⇒ SGC on random instances") {
  std::mt19937_64 rng(91);
  std::uniform_real_distribution<double> u(0.3, 1.3);
  for (int rep = 0; rep < 40; ++rep) {
    auto a = oracle::random_matrix(rng, 3);
    a = fixture::scaled(a, u(rng) / oracle::max_cycle_mean(a));
    const auto op = fixture::linear_op(a);
    const auto seed = static_cast<std::uint64_t>(rep);
    const bool robust =
        check_robust_strong_sgc(op, CF::linear(0.05), CF::linear(0.05), 300, seed).verdict == Verdict::Supported;
    const bool strong = check_strong_sgc(op, CF::linear(0.05), 300, seed).verdict == Verdict::Supported;
    const bool sgc = estimate_eta(op, {0.1, 1.0, 10.0}, 300, seed).report.verdict == Verdict::Supported;
    INFO("rep " << rep);
    if (robust) CHECK(strong);
    if (strong) CHECK(sgc);
  }
}

TEST_CASE("sgc_parameters keep the strong conditions for certified operators") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    auto a = oracle::random_matrix(rng, 3);
    a = fixture::scaled(a, 0.95 / oracle::max_cycle_mean(a));
    const auto op = fixture::linear_op(a);
    const auto cert = find_decay_certificate(op);
    REQUIRE(cert);
    const auto [rho, omega] = sgc_parameters(*cert);
    CHECK(check_strong_sgc(op, rho, 300, 9).verdict == Verdict::Supported);
    CHECK(check_robust_strong_sgc(op, rho, omega, 300, 9).verdict == Verdict::Supported);
  }
}
