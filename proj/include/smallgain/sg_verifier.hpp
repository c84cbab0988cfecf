#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smallgain/comparison_function.hpp"
#include "smallgain/gain_network.hpp"
#include "smallgain/gain_operator.hpp"

namespace smallgain {

struct NetworkSpec {
  GainFamily gains{FiniteGains(), Aggregation::Max};
  AggregatedISSData data;
  // Evaluation window for banded families.
  std::size_t window = 201;
  Boundary boundary = Boundary::Periodic;

  GainOperator make_operator() const;
};

struct VerifyBudgets {
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
  std::size_t k_max = 10000;
  std::vector<double> radii{1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e3};
  std::vector<double> times{0.0, 0.5, 1.0, 2.0, 5.0, 10.0};
};

enum class CheckStatus { Pass, Supported, Falsified, Inconclusive };
const char* to_string(CheckStatus s);

struct HypothesisCheck {
  std::string name;  // well_defined, envelopes, mbi_evidence, mlim_evidence
  CheckStatus status = CheckStatus::Pass;
  std::string detail;
  std::vector<double> witness;  // violating vector, when there is one
};

enum class Conclusion { ISS, UGS, Inconclusive };
const char* to_string(Conclusion c);

struct SmallGainVerdict {
  std::vector<HypothesisCheck> checks;
  Conclusion conclusion = Conclusion::Inconclusive;
  bool counterevidence = false;
  std::string grade;  // "criterion" for linear gains, "evidence" otherwise
  std::optional<double> spectral_value;
  std::optional<std::vector<std::size_t>> cycle_witness;
  std::optional<double> cycle_value;  // product (linear) or max ratio of that cycle
  std::optional<ComparisonFunction> xi;
  std::optional<ComparisonFunction> sigma;
  std::optional<ComparisonFunction> gamma;

  const HypothesisCheck& check(const std::string& name) const;
};

SmallGainVerdict verify(const NetworkSpec& spec, const VerifyBudgets& budgets = {});

// σ = ξ∘(2σ_max), γ = ξ∘(2γ_max)
std::pair<ComparisonFunction, ComparisonFunction> synthesize_ugs_gains(const ComparisonFunction& xi,
                                                                       const ComparisonFunction& sigma_max,
                                                                       const ComparisonFunction& gamma_max);

// ẋᵢ = a xᵢ₋₁ − xᵢ + b xᵢ₊₁ + u: Sum-mode gains a, b with β(r, t) = r e^{−t}, γ = id
// (variation of constants).
NetworkSpec linear_invariant_network(double a, double b, std::size_t window = 201);

// ẋᵢ = −xᵢ³ + max{a xᵢ₋₁³, b xᵢ₊₁³, u}: Max-mode gains ((1+ε)a)^{1/3}, ((1+ε)b)^{1/3}
// and γ(r) = ((1+ε)r)^{1/3}. The transient is declared as σ = id, since the
// polynomial-rate β is not of the C·r·e^{−λt} form.
NetworkSpec cubic_max_network(double a, double b, double epsilon, std::size_t window = 201);

}  // namespace smallgain
