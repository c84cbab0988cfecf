#include <catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "smallgain/comparison_function.hpp"
#include "smallgain/error.hpp"

using namespace smallgain;
using Catch::Approx;
using CF = ComparisonFunction;

TEST_CASE("leaf evaluation") {
  CHECK(CF::linear(0.5)(2.0) == 1.0);
  CHECK(CF::power(1.0, 3.0)(0.5) == 0.125);
  CHECK(CF::saturating(2.0, 1.0)(1.0) == 1.0);
  CHECK(CF::identity()(3.25) == 3.25);
  CHECK(CF::zero()(7.0) == 0.0);
  CHECK_THROWS_AS(CF::linear(1.0)(-1.0), Error);
}

TEST_CASE("inverse") {
  CHECK(CF::inverse(CF::linear(2.0))(3.0) == Approx(1.5).epsilon(1e-15));
  // Bisection path: sum of two leaves has no closed-form inverse.
  const auto f = CF::sum({CF::linear(1.0), CF::power(1.0, 3.0)});
  const auto g = CF::inverse(f);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int k = 0; k < 200; ++k) {
    const double r = std::pow(10.0, u(rng));
    CHECK(std::abs(g(f(r)) - r) <= 1e-10 * std::max(1.0, r));
  }
  CHECK_THROWS_AS(CF::inverse(CF::saturating(1.0, 1.0).with_class(FunctionClass::PositiveDefinite)), Error);
}

TEST_CASE("compose and operators") {
  const auto h = CF::linear(2.0) * CF::power(1.0, 2.0);
  CHECK(h(3.0) == 18.0);
  CHECK(CF::max({CF::linear(0.5), CF::power(1.0, 2.0)})(0.25) == 0.125);
  CHECK(CF::min({CF::linear(0.5), CF::power(1.0, 2.0)})(0.25) == 0.0625);
  CHECK(CF::id_minus(CF::linear(0.25))(4.0) == 3.0);
  CHECK(CF::linear(3.0).scaled(2.0).linear_coefficient() == 6.0);
}

TEST_CASE("declared classes validate on sampled pairs") {
  for (const auto& f : {CF::linear(0.3), CF::power(2.0, 0.5), CF::identity(),
                        CF::sum({CF::linear(1.0), CF::saturating(1.0, 2.0)}),
                        CF::compose(CF::power(1.0, 3.0), CF::linear(0.7))}) {
    const auto chk = validate_class(f, 5);
    INFO(describe(f) << " " << chk.message);
    CHECK(chk.ok);
  }
  // Saturating is bounded, so tagging it K∞ must fail the growth check.
  const auto bad = validate_class(CF::saturating(1.0, 1.0).with_class(FunctionClass::KInfinity), 5);
  CHECK_FALSE(bad.ok);
}

TEST_CASE("rho_from_eta") {
  CHECK(rho_from_eta(CF::linear(0.5))(1.0) == Approx(1.0));
  CHECK(rho_from_eta(CF::linear(0.25))(3.0) == Approx(1.0));
  // Nonlinear η: identity (id+ρ)∘(id−η) = id on the log grid.
  const auto eta = CF::saturating(0.5, 1.0).with_class(FunctionClass::K);
  const auto rho = rho_from_eta(eta);
  for (double r : log_grid(1e-6, 1e6, 121)) {
    const double y = r - eta(r);
    CHECK(std::abs(y + rho(y) - r) <= 1e-9 * std::max(1.0, r));
  }
  // id − η decreasing somewhere: η(r) = 2r.
  CHECK_THROWS_AS(rho_from_eta(CF::linear(2.0)), Error);
}

TEST_CASE("split_id_minus_eta") {
  const auto [eta1, eta2] = split_id_minus_eta(CF::linear(0.5));
  CHECK(eta2(1.0) == Approx(0.25));
  CHECK(eta1(3.0) == Approx(1.0));
  for (double r : log_grid(1e-6, 1e6, 61)) {
    const double lhs = [&] {
      const double a = r - eta2(r);
      return a - eta1(a);
    }();
    CHECK(std::abs(lhs - (r - 0.5 * r)) <= 1e-9 * std::max(1.0, r));
  }
  const auto [z1, z2] = split_id_minus_eta(CF::zero());
  CHECK(z1.is_zero());
  CHECK(z2.is_zero());
}

TEST_CASE("lipschitz lower envelope matches a dense-grid oracle") {
  const auto alpha = CF::power(1.0, 2.0);
  const auto rho = lipschitz_lower_envelope(alpha, 1.0);
  auto sq = [](double y) { return y * y; };
  for (double r : {0.1, 0.25, 0.5, 1.0, 2.0}) {
    const double want = oracle::lipschitz_envelope_dense(sq, 1.0, r, 4.0, 1e-5);
    CHECK(rho(r) == Approx(want).margin(1e-9));
  }
  // Frozen from the oracle above: r² below ½, r − ¼ above.
  CHECK(rho(1.0) == Approx(0.75).margin(1e-9));
  CHECK(rho(0.25) == Approx(0.0625).margin(1e-9));

  const auto lin = lipschitz_lower_envelope(CF::linear(0.3), 1.0);
  CHECK(lin.linear_coefficient() == 0.3);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int k = 0; k < 1000; ++k) {
    const double a = u(rng), b = u(rng);
    CHECK(std::abs(rho(a) - rho(b)) <= std::abs(a - b) + 1e-9);
    CHECK(rho(a) <= alpha(a) + 1e-12);
  }
}

TEST_CASE("piecewise linear") {
  const auto f = CF::piecewise_linear({0.0, 1.0, 2.0}, {0.0, 2.0, 3.0}, 0.5);
  CHECK(f(0.5) == 1.0);
  CHECK(f(1.5) == 2.5);
  CHECK(f(4.0) == 4.0);
  CHECK(f.declared_class() == FunctionClass::KInfinity);
}

TEST_CASE("KL functions") {
  const auto b = KLFunction::exponential(2.0, 0.5);
  CHECK(b(1.0, 0.0) == 2.0);
  CHECK(b(1.0, 2.0) == Approx(2.0 * std::exp(-1.0)));
  CHECK(b.constant() == 2.0);
  CHECK(b(3.0, 1.0) > b(3.0, 2.0));
}
