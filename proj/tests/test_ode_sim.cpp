#include <catch_amalgamated.hpp>
#include <cmath>

#include "smallgain/error.hpp"
#include "smallgain/ode_sim.hpp"

using namespace smallgain;
using Catch::Approx;

namespace {

OdeRun run_of(NetworkKind kind, std::size_t N, double x_star, double u, double T, double dt = 1e-3) {
  OdeRun r;
  r.kind = kind;
  r.N = N;
  r.x0 = constant_profile(N, x_star);
  r.u = InputSignal::constant(u);
  r.T = T;
  r.dt = dt;
  return r;
}

double value_at(const OdeTrajectory& t, double time) {
  for (std::size_t k = 0; k < t.times.size(); ++k)
    if (std::abs(t.times[k] - time) < 1e-9) return t.sup_norms[k];
  FAIL("time " << time << " not recorded");
  return NAN;
}

}  // namespace

TEST_CASE("linear constant profile decays like e^{(a+b-1)t}") {
  const auto t = simulate(run_of(LinearInvariant{0.4, 0.5}, 64, 1.0, 0.0, 10.0));
  CHECK_FALSE(t.blew_up);
  CHECK(t.times.back() == Approx(10.0));
  CHECK(std::abs(t.sup_norms.back() - std::exp(-1.0)) <= 1e-4);
}

TEST_CASE("cubic constant profile follows the scalar comparison") {
  const auto t = simulate(run_of(CubicMax{0.9, 0.5}, 64, 1.0, 0.0, 20.0));
  for (double s : {5.0, 10.0, 20.0}) CHECK(std::abs(value_at(t, s) - 1.0 / std::sqrt(1.0 + 0.2 * s)) <= 1e-4);
  CHECK(std::abs(t.sup_norms.back() - 1.0 / std::sqrt(5.0)) <= 1e-4);

  const auto flat = simulate(run_of(CubicMax{1.0, 0.5}, 64, 1.0, 0.0, 20.0));
  for (double v : flat.sup_norms) CHECK(std::abs(v - 1.0) <= 1e-6);
}

TEST_CASE("zero data stays at the equilibrium") {
  for (const NetworkKind& k : {NetworkKind(LinearInvariant{0.4, 0.5}), NetworkKind(CubicMax{0.9, 0.9}),
                               NetworkKind(GenericBandedLinear{{{-2, 0.3}, {1, 0.2}}, 1.0})}) {
    const auto t = simulate(run_of(k, 8, 0.0, 0.0, 1.0));
    for (double v : t.sup_norms) CHECK(v == 0.0);
  }
}

TEST_CASE("simulate preconditions and blow-up") {
  CHECK_THROWS_AS(simulate(run_of(LinearInvariant{0.4, 0.5}, 2, 1.0, 0.0, 1.0)), Error);
  CHECK_THROWS_AS(simulate(run_of(LinearInvariant{0.4, 0.5}, 8, 1.0, 0.0, 1.0, 0.05)), Error);
  const auto t = simulate(run_of(CubicMax{1.5, 1.5}, 8, 1.0, 0.0, 10.0));
  CHECK(t.blew_up);
  REQUIRE(t.escape_time);
  CHECK(*t.escape_time == Approx(1.0).margin(0.01));  // ż = 0.5 z³ escapes at 1
}

TEST_CASE("reference profiles") {
  CHECK(reference_profile(LinearInvariant{0.4, 0.5}, 1.0, 10.0) == Approx(0.3678794).margin(1e-7));
  CHECK(reference_profile(CubicMax{0.9, 0.2}, 1.0, 20.0) == Approx(0.4472136).margin(1e-7));
  CHECK(reference_profile(CubicMax{1.0, 0.2}, 2.0, 50.0) == 2.0);
  CHECK(reference_profile(LinearInvariant{0.4, 0.5}, 3.0, 0.0) == 3.0);
  CHECK(reference_profile(CubicMax{0.3, 0.2}, 3.0, 0.0) == 3.0);
  CHECK_THROWS_AS(reference_profile(CubicMax{1.5, 0.2}, 1.0, 2.0), Error);
  CHECK_THROWS_AS(reference_profile(GenericBandedLinear{}, 1.0, 1.0), Error);
}

TEST_CASE("RK4 error drops at fourth order") {
  auto err = [](double dt) {
    auto r = run_of(LinearInvariant{0.4, 0.5}, 8, 1.0, 0.0, 1.0, dt);
    r.relaxed_accuracy = true;
    return std::abs(simulate(r).sup_norms.back() - reference_profile(r.kind, 1.0, 1.0));
  };
  const double coarse = err(0.1), fine = err(0.05);
  INFO(coarse << " " << fine);
  CHECK(coarse >= 8.0 * fine);
}

TEST_CASE("window independence for constant profiles") {
  for (const NetworkKind& k : {NetworkKind(LinearInvariant{0.4, 0.5}), NetworkKind(CubicMax{0.9, 0.5})}) {
    const auto a = simulate(run_of(k, 16, 1.3, 0.05, 2.0));
    const auto b = simulate(run_of(k, 128, 1.3, 0.05, 2.0));
    REQUIRE(a.states.size() == b.states.size());
    for (std::size_t s = 0; s < a.states.size(); ++s) {
      for (double v : b.states[s]) CHECK(std::abs(v - a.states[s][0]) <= 1e-12);
      CHECK(std::abs(a.sup_norms[s] - b.sup_norms[s]) <= 1e-12);
    }
  }
}

TEST_CASE("ISS envelope fit on the linear network") {
  std::vector<OdeTrajectory> runs;
  for (double x : {0.5, 1.0, 2.0}) runs.push_back(simulate(run_of(LinearInvariant{0.4, 0.5}, 16, x, 0.0, 20.0, 1e-2)));
  for (double u : {0.05, 0.1, 0.2}) runs.push_back(simulate(run_of(LinearInvariant{0.4, 0.5}, 16, 0.0, u, 60.0, 1e-2)));
  const auto env = fit_iss_envelope(runs);
  CHECK(env.validated);
  CHECK(env.lambda == Approx(0.1).margin(0.01));
  CHECK(env.C <= 1.05);
  CHECK(env.gamma(0.1) == Approx(1.0).margin(0.01));
  // The 0.1 forced run settles at 10u.
  CHECK(runs[4].sup_norms.back() == Approx(1.0).margin(0.01));

  std::vector<OdeTrajectory> zero;
  for (int k = 0; k < 2; ++k) zero.push_back(simulate(run_of(LinearInvariant{0.4, 0.5}, 8, 0.0, 0.0, 1.0)));
  const auto z = fit_iss_envelope(zero);
  CHECK(z.validated);
  CHECK(z.gamma(1.0) == 0.0);
  CHECK(z.beta(1.0, 0.0) >= 0.0);
}

TEST_CASE("threshold scans") {
  auto tmpl = run_of(LinearInvariant{}, 16, 1.0, 0.0, 10.0, 1e-2);
  const auto lin = threshold_scan(tmpl, {{0.4, 0.4}, {0.45, 0.5}, {0.5, 0.5}, {0.5, 0.55}, {0.0, 0.0}});
  const std::vector<ScanClass> want{ScanClass::Decay, ScanClass::Decay, ScanClass::NonDecay, ScanClass::NonDecay,
                                    ScanClass::Decay};
  for (std::size_t k = 0; k < want.size(); ++k) {
    CHECK(lin.rows[k].observed == want[k]);
    CHECK(lin.rows[k].agree);
  }
  CHECK(lin.last_decay == Approx(0.95));
  CHECK(lin.first_non_decay == Approx(1.0));
  CHECK(lin.rows[4].final_norm == Approx(std::exp(-10.0)).epsilon(1e-6));

  tmpl = run_of(CubicMax{}, 16, 1.0, 0.0, 20.0, 1e-2);
  const auto cub = threshold_scan(tmpl, {{0.9, 0.5}, {1.0, 0.3}, {1.1, 0.2}});
  CHECK(cub.rows[0].observed == ScanClass::Decay);
  CHECK(cub.rows[1].observed == ScanClass::NonDecay);
  CHECK(cub.rows[2].observed == ScanClass::BlowUp);
  for (const auto& r : cub.rows) CHECK(r.agree);
}

TEST_CASE("cubic steady state grows with the input") {
  double prev = 0.0;
  for (double u : {0.05, 0.1, 0.2, 0.4}) {
    const auto t = simulate(run_of(CubicMax{0.5, 0.5}, 8, 0.0, u, 40.0, 1e-2));
    CHECK(t.sup_norms.back() > prev);
    prev = t.sup_norms.back();
  }
}
