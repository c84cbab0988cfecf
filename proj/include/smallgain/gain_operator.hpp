#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smallgain/gain_network.hpp"
#include "smallgain/state_vector.hpp"

namespace smallgain {

// Γ⊗ or Γ⊞ for a gain family, bound to an evaluation window. Finite and
// block-diagonal families use their own dimension; banded families need an
// explicit window, centred at 0 unless `lo` is given.
class GainOperator {
 public:
  explicit GainOperator(GainFamily family);
  GainOperator(GainFamily family, std::size_t window, Boundary boundary = Boundary::Periodic,
               std::optional<long> lo = std::nullopt);

  const GainFamily& family() const { return family_; }
  Aggregation mode() const { return family_.mode(); }
  std::size_t dimension() const { return n_; }
  long lo() const { return lo_; }
  Boundary boundary() const { return boundary_; }
  bool linear() const { return linear_; }

  StateVector ones() const { return StateVector::constant(n_, 1.0, lo_, boundary_); }
  StateVector zeros() const { return StateVector::constant(n_, 0.0, lo_, boundary_); }
  StateVector make(std::vector<double> values) const;
  StateVector unit(std::size_t position) const;

  // Raw evaluation on positions 0..n−1; `witness` (optional) receives the
  // position attaining each sup, lowest position on ties, −1 for empty rows.
  void apply_raw(const double* in, double* out, long* witness = nullptr) const;
  std::vector<double> apply_raw(const std::vector<double>& in) const;

  // (1 + ε)·Γ etc. share the structure; used by the decay-point iteration.
  GainOperator scaled(double c) const;

  struct Edge {
    std::size_t j;
    ComparisonFunction gain;
    double k;  // slope when linear, NaN otherwise
  };
  // Incoming edges of each position, sorted by source position.
  const std::vector<std::vector<Edge>>& rows() const { return rows_; }

 private:
  void build();

  GainFamily family_;
  std::size_t n_ = 0;
  long lo_ = 0;
  Boundary boundary_ = Boundary::Periodic;
  bool linear_ = true;
  std::vector<std::vector<Edge>> rows_;
};

StateVector apply(const GainOperator& op, const StateVector& s);

struct ApplyResult {
  StateVector value;
  std::vector<long> witness;  // absolute index of the maximizing neighbour
};
ApplyResult apply_with_witness(const GainOperator& op, const StateVector& s);

struct PathPowerResult {
  StateVector value;
  // For each position, the maximizing index path i = j₁, j₂, …, j_{n+1}
  // (absolute indices); empty when the value is zero through every path.
  std::vector<std::vector<long>> paths;
};
PathPowerResult power_apply_pathform(const GainOperator& op, const StateVector& s, std::size_t n);

struct SpectralEstimate {
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  // "periodic-ratio": normalized iterates repeated with period p and the value
  // is the p-step growth rate; "gelfand-inf": running infimum of the quotients.
  std::string method;
  std::size_t period = 0;
  std::vector<double> history;      // ‖Γⁿ𝟏‖^{1/n}
  std::vector<double> running_inf;  // min over the first n quotients (upper bounds on r)
};

SpectralEstimate spectral_radius(const GainOperator& op, double tol = 1e-12, std::size_t n_max = 10000);

// Gelfand iteration on 𝟏 for any monotone, degree-one homogeneous map on ℝⁿ₊.
using RawMap = std::function<void(const double*, double*)>;
SpectralEstimate gelfand_estimate(std::size_t dim, const RawMap& map, double tol = 1e-12,
                                  std::size_t n_max = 10000);

struct CycleRecord {
  std::vector<std::size_t> nodes;  // i₁ → i₂ → … → i_k → i₁, 0-based positions
  bool linear = true;
  double product = 0.0;            // linear gains: exact product of the cycle gains
  double max_ratio = 0.0;          // nonlinear: max of composition(r)/r on the grid
  std::optional<double> violation_r;
  bool contraction = true;
};

struct CycleReport {
  std::vector<CycleRecord> cycles;
  bool all_contractions = true;
  bool truncated = false;
  std::optional<std::size_t> witness;  // index into cycles of the first violation
  std::optional<double> max_product;   // linear families only
};

struct CycleOptions {
  std::size_t max_cycles = 100000;
  double grid_lo = 1e-6;
  double grid_hi = 1e6;
  std::size_t grid_points = 121;
};

CycleReport cycle_analysis(const GainOperator& op, const CycleOptions& options = {});

// Composition γ_{i₁i₂} ∘ … ∘ γ_{i_k i₁} at r.
double cycle_composition(const GainOperator& op, const std::vector<std::size_t>& nodes, double r);
// Vector s with s_{i₁} = r and s_{i_m} = γ_{i_m i_{m+1}}(s_{i_{m+1}}), zero off the
// cycle. Γ(s) ≥ s whenever the cycle composition at r is ≥ r.
std::vector<double> cycle_witness_vector(const GainOperator& op, const std::vector<std::size_t>& nodes,
                                         double r);

enum class KleeneStatus { Converged, Diverged, MaxIterations };
const char* to_string(KleeneStatus s);

struct KleeneResult {
  StateVector closure;
  KleeneStatus status = KleeneStatus::Converged;
  std::size_t iterations = 0;
};

KleeneResult kleene_star(const GainOperator& op, const StateVector& s, double tol = 1e-12,
                         std::size_t k_max = 10000);

struct StrictDecayCertificate {
  StateVector s0;
  double lambda = 0.0;
  double residual = 0.0;  // max_i Γ(s0)_i − λ·s0_i
  std::size_t iterations = 0;
};

StrictDecayCertificate strict_decay_point(const GainOperator& op, double epsilon, double tol = 1e-12);

// Decay point for either mode: Qᵉ(𝟏) in Max mode, the truncated Neumann series
// Σ ((1+ε)Γ)ᵏ 𝟏 in Sum mode (linear gains only there).
StrictDecayCertificate decay_point(const GainOperator& op, double epsilon);

// Σ_k ((1+ε)A)ᵏ 𝟏 for a linear map; values and iteration count. Throws
// epsilon-too-large when the partial sums exceed 1e12.
std::vector<double> neumann_decay_vector(std::size_t dim, const RawMap& map, double epsilon,
                                         std::size_t* iterations = nullptr);

// Tries s0 = 𝟏 first, then decay_point with ε = (1/r − 1)/2 from the spectral
// estimate. nullopt when r ≥ 1 or no certificate validates.
std::optional<StrictDecayCertificate> find_decay_certificate(const GainOperator& op);

}  // namespace smallgain
