#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smallgain/comparison_function.hpp"
#include "smallgain/gain_operator.hpp"
#include "smallgain/random.hpp"

namespace smallgain {

// ‖x⁻‖∞, the max-norm distance from x to the nonnegative orthant.
double dist_to_cone(const std::vector<double>& x);

// Probes are one-sided: a witness falsifies a condition, a clean sweep only supports it.
enum class Verdict { Supported, Falsified };
const char* to_string(Verdict v);

struct Witness {
  std::vector<double> x;
  std::string inequality;
  double radius = 0.0;
  double value = 0.0;  // the quantity that crossed the threshold
  std::optional<std::size_t> i;
  std::optional<std::size_t> j;
};

struct ProbeReport {
  Verdict verdict = Verdict::Supported;
  std::size_t samples = 0;
  std::optional<Witness> witness;
};

// Uniform point on the max-norm sphere of radius r: coordinates U[0, r], then
// the vector is rescaled so its largest coordinate equals r.
std::vector<double> sphere_point(SampleStream& rng, std::size_t n, double r);

// Unit-norm directions worth testing besides eᵢ and 𝟏: cycle witness vectors
// (finite and block-diagonal families) and per-component Perron vectors for
// linear gains. Empty for banded families.
std::vector<std::vector<double>> structured_directions(const GainOperator& op, std::size_t max_cycles = 256);

struct EtaEnvelope {
  std::vector<double> radii;
  std::vector<double> eta_values;    // sampled infimum per radius
  std::vector<double> eta_monotone;  // isotonic lower envelope
  std::vector<std::vector<double>> minimizers;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
  ProbeReport report;

  // Piecewise-linear η through the lower envelope, continued linearly.
  ComparisonFunction as_function() const;
};

// inf over ‖x‖ = r of dist(A(x) − x, ℝⁿ₊).
EtaEnvelope estimate_eta(const GainOperator& op, const std::vector<double>& radii,
                         std::size_t samples_per_radius, std::uint64_t seed);

// Unit-vector form: inf over ‖x‖ = r of the largest η with A(x) ≱ x − η z,
// i.e. maxᵢ (xᵢ − A(x)ᵢ)/zᵢ. z defaults to 𝟏.
EtaEnvelope estimate_eta_unit(const GainOperator& op, const std::vector<double>& radii,
                              std::size_t samples_per_radius, std::uint64_t seed,
                              std::vector<double> z = {});

struct MbiEnvelope {
  std::vector<std::pair<double, double>> pairs;  // (‖w‖, ‖v‖)
  ComparisonFunction xi;
  double max_ratio = 0.0;
  ProbeReport report;
};

// w := (v − A(v))⁺ for sampled v ≥ 0; ξ is the isotonic upper envelope of ‖v‖ over ‖w‖.
MbiEnvelope probe_mbi(const GainOperator& op, std::size_t sample_count, std::uint64_t seed);
// Single observation, exposed for tests and the CLI.
std::pair<std::vector<double>, std::pair<double, double>> mbi_observation(const GainOperator& op,
                                                                          const std::vector<double>& v);

// Searches for x ≠ 0 with (id + ρ)(A(x)) ≥ x componentwise.
ProbeReport check_strong_sgc(const GainOperator& op, const ComparisonFunction& rho, std::size_t samples,
                             std::uint64_t seed);

// Searches for (i, j, x) with (id + ρ)(A(x) + ω(x_j)eᵢ) ≥ x componentwise.
ProbeReport check_robust_strong_sgc(const GainOperator& op, const ComparisonFunction& rho,
                                    const ComparisonFunction& omega, std::size_t samples,
                                    std::uint64_t seed);

// (ρ, ω) for which the strong and robust strong conditions provably hold when
// the operator is linear and has a decay certificate Γ(s0) ≤ λ s0.
std::pair<ComparisonFunction, ComparisonFunction> sgc_parameters(const StrictDecayCertificate& cert);
// (ρ, ω) from a uniform small-gain margin η: ω = η/4, ρ = η/4 ∘ (id − η/4)⁻¹.
std::pair<ComparisonFunction, ComparisonFunction> sgc_parameters(const ComparisonFunction& eta);

}  // namespace smallgain
