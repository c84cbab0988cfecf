#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "smallgain/comparison_function.hpp"
#include "smallgain/state_vector.hpp"

namespace smallgain {

// ẋᵢ = a xᵢ₋₁ − xᵢ + b xᵢ₊₁ + u
struct LinearInvariant {
  double a = 0.0;
  double b = 0.0;
};

// ẋᵢ = −xᵢ³ + max{a xᵢ₋₁³, b xᵢ₊₁³, u}
struct CubicMax {
  double a = 0.0;
  double b = 0.0;
};

// ẋᵢ = −decay·xᵢ + Σₒ cₒ xᵢ₊ₒ + u
struct GenericBandedLinear {
  std::map<long, double> coefficients;
  double decay = 1.0;
};

using NetworkKind = std::variant<LinearInvariant, CubicMax, GenericBandedLinear>;

const char* kind_name(const NetworkKind& kind);

// Scalar input applied to every component, constant on [times[k], times[k+1]).
struct InputSignal {
  std::vector<double> times{0.0};
  std::vector<double> values{0.0};

  static InputSignal constant(double u);
  static InputSignal table(std::vector<double> times, std::vector<double> values);
  double at(double t) const;
  double sup_norm() const;
};

struct OdeRun {
  NetworkKind kind = LinearInvariant{};
  std::size_t N = 64;
  Boundary boundary = Boundary::Periodic;
  std::vector<double> x0;  // size N
  InputSignal u;
  double dt = 1e-3;
  double T = 10.0;
  std::size_t record_every = 10;  // the final state is always recorded
  bool relaxed_accuracy = false;  // permits dt > 0.01
};

std::vector<double> constant_profile(std::size_t N, double value);

struct OdeTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<double> sup_norms;
  bool blew_up = false;
  std::optional<double> escape_time;
  double x0_norm = 0.0;
  double input_sup = 0.0;
  std::string accuracy_note;  // set for runs through the non-smooth max
};

// Fixed-step RK4 with step T/round(T/dt). Aborts once the sup norm exceeds 1e9.
OdeTrajectory simulate(const OdeRun& run);

// Exact value of the constant-profile solution from x* at time t, u ≡ 0.
double reference_profile(const NetworkKind& kind, double x_star, double t);

struct IssEnvelope {
  KLFunction beta;
  ComparisonFunction gamma;
  double C = 0.0;
  double lambda = 0.0;
  bool validated = true;
  std::size_t rounds = 0;  // inflation rounds used
  std::optional<std::size_t> violating_run;
  double max_excess = 0.0;
};

// β(r, t) = C r e^{−λt} from u ≡ 0 runs, γ as the isotonic envelope of the
// largest sup norm against ‖u‖∞ on x0 = 0 runs; validated on every run with
// slack 1e−6, inflating C and γ by 1.05 up to 20 times on failure.
IssEnvelope fit_iss_envelope(const std::vector<OdeTrajectory>& runs);

enum class ScanClass { Decay, NonDecay, BlowUp };
const char* to_string(ScanClass c);

struct ScanRow {
  double a = 0.0;
  double b = 0.0;
  double criterion = 0.0;  // a + b (linear) or max{a, b} (cubic)
  bool predicted_decay = false;
  ScanClass observed = ScanClass::Decay;
  double initial_norm = 0.0;
  double final_norm = 0.0;
  bool agree = true;
};

struct ScanTable {
  std::vector<ScanRow> rows;
  // Largest criterion value classified decay and smallest classified otherwise.
  std::optional<double> last_decay;
  std::optional<double> first_non_decay;
};

// Classifies each (a, b) by ‖x(T)‖ < 0.99‖x(0)‖ using the template run with its
// kind's parameters replaced.
ScanTable threshold_scan(const OdeRun& tmpl, const std::vector<std::pair<double, double>>& grid);

}  // namespace smallgain
