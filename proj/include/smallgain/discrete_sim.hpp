#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smallgain/comparison_function.hpp"
#include "smallgain/gain_operator.hpp"
#include "smallgain/state_vector.hpp"

namespace smallgain {

// Monotone operator A on ℝⁿ₊ driving x(k+1) = A(x(k)) + u(k): either a gain
// operator or a nonnegative matrix (which may have a diagonal, e.g. A(x) = 0.5x).
class MonotoneMap {
 public:
  explicit MonotoneMap(GainOperator op);
  static MonotoneMap matrix(std::vector<std::vector<double>> a, long lo = 0,
                            Boundary boundary = Boundary::Periodic);

  std::size_t dimension() const { return n_; }
  // Homogeneous of degree one and subadditive (linear gains or a matrix).
  bool homogeneous() const;
  const GainOperator* gain_operator() const { return op_ ? &*op_ : nullptr; }
  const std::vector<std::vector<double>>& matrix_entries() const { return matrix_; }

  void apply_raw(const double* in, double* out) const;
  std::vector<double> apply_raw(const std::vector<double>& in) const;
  StateVector apply(const StateVector& x) const;

  StateVector make(std::vector<double> values) const { return StateVector(std::move(values), lo_, boundary_); }
  StateVector ones() const { return StateVector::constant(n_, 1.0, lo_, boundary_); }
  StateVector zeros() const { return StateVector::constant(n_, 0.0, lo_, boundary_); }

  SpectralEstimate spectral_radius(double tol = 1e-12, std::size_t n_max = 10000) const;
  // Γ(s0) ≤ λ s0 with s0 > 0, λ < 1, when one can be found.
  std::optional<StrictDecayCertificate> decay_certificate() const;
  // Test directions for constant-solution candidates (see structured_directions).
  std::vector<std::vector<double>> probe_directions() const;

 private:
  MonotoneMap() = default;

  std::optional<GainOperator> op_;
  std::vector<std::vector<double>> matrix_;
  std::size_t n_ = 0;
  long lo_ = 0;
  Boundary boundary_ = Boundary::Periodic;
};

// Constant input or one entry per step.
struct DiscreteInput {
  std::vector<StateVector> values;
  bool constant = true;

  static DiscreteInput constant_input(StateVector u) { return {{std::move(u)}, true}; }
  static DiscreteInput sequence(std::vector<StateVector> u) { return {std::move(u), false}; }
  const StateVector& at(std::size_t k) const;
};

struct DiscreteTrajectory {
  std::vector<StateVector> states;  // x(0..K)
  std::vector<StateVector> inputs;  // u(0..K−1)
  bool overflow = false;

  double input_sup_norm() const;
};

// Equality recursion x(k+1) = A(x(k)) + u(k); stops early with `overflow` set
// once ‖x(k)‖ exceeds 1e12.
DiscreteTrajectory iterate(const MonotoneMap& map, const StateVector& x0, const DiscreteInput& u,
                           std::size_t K);

// An inequality solution: x(k+1) = d_k ⊙ (A(x(k)) + u(k)) with d_k ∈ [0,1]ⁿ random.
DiscreteTrajectory damped_solution(const MonotoneMap& map, const StateVector& x0, const DiscreteInput& u,
                                   std::size_t K, std::uint64_t seed);

struct EissCertificate {
  double M = 1.0;
  double a = 0.5;
  ComparisonFunction gamma;
};

struct EissCheck {
  bool pass = true;
  std::optional<std::size_t> first_violation;
  double max_excess = 0.0;  // max over k of lhs − rhs (negative when passing)
};

EissCheck check_eiss(const DiscreteTrajectory& traj, const EissCertificate& cert);

// Certificate from the orbit of 𝟏: with a_k = ‖Aᵏ𝟏‖ and N the first k ≥ 1 with
// a_k ≤ aᵏ, M = max_{m<N} a_m/aᵐ and γ(s) = s·Σ_{m<N} a_m/(1 − a_N). The
// decay rate is a = r + margin with margin = min(0.05, (1 − r)/2).
EissCertificate fit_eiss_certificate(const MonotoneMap& map);

enum class MlimEvidence { Positive, Negative, Inconclusive };
const char* to_string(MlimEvidence e);

struct MlimOptions {
  std::vector<double> eps_grid{0.1};
  std::size_t k_max = 10000;
  std::uint64_t seed = 0;
  std::size_t damped_runs = 4;
  std::optional<StateVector> seed_override;
};

struct MlimAttainment {
  double epsilon = 0.0;
  std::optional<std::size_t> N;
  double norm_at_N = 0.0;
};

struct MlimReport {
  bool seed_constructed = false;
  std::string seed_method;  // "strict-decay", "kleene-majorant", "override" or "none"
  std::optional<StateVector> x0;
  double bound = 0.0;       // ξ(‖w‖)
  std::vector<MlimAttainment> attainment;  // extremal (equality) branch
  std::size_t solutions_tested = 0;
  MlimEvidence evidence = MlimEvidence::Inconclusive;
  std::string negative_solution;
  std::vector<double> negative_vector;
};

MlimReport mlim_probe(const MonotoneMap& map, const StateVector& w, const ComparisonFunction& xi,
                      const MlimOptions& options = {});

// V(x) = max_{0≤n<N} ηⁿ‖Aⁿx‖.
class LyapunovEvaluator {
 public:
  LyapunovEvaluator(MonotoneMap map, double eta, std::size_t N, double C, double psi)
      : map_(std::move(map)), eta_(eta), N_(N), C_(C), psi_(psi) {}

  double operator()(const StateVector& x) const;
  double operator()(const std::vector<double>& x) const;

  double eta() const { return eta_; }
  std::size_t truncation() const { return N_; }
  double C() const { return C_; }
  double psi() const { return psi_; }
  const MonotoneMap& map() const { return map_; }

 private:
  MonotoneMap map_;
  double eta_;
  std::size_t N_;
  double C_;
  double psi_;
};

LyapunovEvaluator build_lyapunov(const MonotoneMap& map, double eta);

struct DissipationCheck {
  bool pass = true;
  std::optional<std::size_t> first_violation;
  double max_excess = 0.0;
};

// V(x(k+1)) ≤ η⁻¹V(x(k)) + ψ‖u(k)‖ at every step, within 1e−9.
DissipationCheck check_dissipation(const LyapunovEvaluator& V, const DiscreteTrajectory& traj);

}  // namespace smallgain
