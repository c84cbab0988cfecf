#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace smallgain {

// Declared class of a comparison function. Zero is kept separate because
// gain entries may be K or identically zero.
enum class FunctionClass { Zero, PositiveDefinite, K, KInfinity };

const char* to_string(FunctionClass c);
FunctionClass function_class_from_string(const std::string& s);

// At least as strong as `required` (K∞ implies K implies PD).
bool implies(FunctionClass declared, FunctionClass required);

enum class NodeKind {
  Zero,
  Linear,
  Power,
  Saturating,
  Identity,
  Compose,
  Sum,
  Max,
  Min,
  IdMinus,
  Inverse,
  LipschitzEnvelope,
  PiecewiseLinear,
};

struct Node;

// Immutable expression tree over [0, ∞). Copies share structure.
class ComparisonFunction {
 public:
  ComparisonFunction();  // Zero

  static ComparisonFunction zero();
  static ComparisonFunction linear(double k);
  static ComparisonFunction power(double c, double p);
  static ComparisonFunction saturating(double c, double theta);
  static ComparisonFunction identity();
  static ComparisonFunction compose(ComparisonFunction outer, ComparisonFunction inner);
  static ComparisonFunction sum(std::vector<ComparisonFunction> terms);
  static ComparisonFunction max(std::vector<ComparisonFunction> terms);
  static ComparisonFunction min(std::vector<ComparisonFunction> terms);
  // r ↦ r − η(r); the caller asserts the class (K∞ unless told otherwise).
  static ComparisonFunction id_minus(ComparisonFunction eta);
  static ComparisonFunction inverse(ComparisonFunction f);
  // r ↦ inf_{y≥0} α(y) + L|y − r|
  static ComparisonFunction lipschitz_envelope(ComparisonFunction alpha, double L);
  // Linear interpolation through (x[k], y[k]) with x[0] = 0, extended past the
  // last knot with `tail_slope`.
  static ComparisonFunction piecewise_linear(std::vector<double> x, std::vector<double> y,
                                             double tail_slope);

  double operator()(double r) const;
  double eval(double r) const { return (*this)(r); }

  // Solves f(r) = y for strictly increasing f. Closed forms where available,
  // bisection otherwise.
  double invert(double y) const;

  NodeKind kind() const;
  FunctionClass declared_class() const;
  ComparisonFunction with_class(FunctionClass c) const;
  bool is_zero() const { return kind() == NodeKind::Zero; }

  // Slope k if the tree is exactly r ↦ k·r (Zero counts as k = 0).
  std::optional<double> linear_coefficient() const;

  const Node& node() const { return *node_; }

  // Scalar multiple c·f, kept linear when f is.
  ComparisonFunction scaled(double c) const;

 private:
  explicit ComparisonFunction(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
  friend struct Node;
};

struct Node {
  NodeKind kind = NodeKind::Zero;
  double a = 0.0;  // k, c, L
  double b = 0.0;  // p, θ, tail slope
  std::vector<ComparisonFunction> children;
  std::vector<double> xs, ys;
  FunctionClass cls = FunctionClass::Zero;

  static ComparisonFunction make(Node n);
};

// Composition helpers.
ComparisonFunction operator*(const ComparisonFunction& outer, const ComparisonFunction& inner);

// β(r, t) = g(r)·exp(−λ t)
struct KLFunction {
  ComparisonFunction g = ComparisonFunction::identity();
  double rate = 1.0;

  static KLFunction exponential(double C, double rate);
  double operator()(double r, double t) const;
  // C when g is linear, nullopt otherwise.
  std::optional<double> constant() const { return g.linear_coefficient(); }
};

struct ClassCheck {
  bool ok = true;
  std::string message;
  double r1 = 0.0;
  double r2 = 0.0;
};

struct GrowthWitness {
  double R;
  double B;
};

// Sampled validation of the declared class: f(0) = 0, positivity, strict
// monotonicity on random pairs, and growth for K∞ (f(R) > B for each witness;
// default witness f(1e12) exceeds f(1e6) by 0.1%).
ClassCheck validate_class(const ComparisonFunction& f, std::uint64_t seed, std::size_t pairs = 1000,
                          const std::vector<GrowthWitness>& witnesses = {});

// Geometric grid helper used by identity checks: `count` points in [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t count);

// ρ = η ∘ (id − η)⁻¹, so that (id + ρ) ∘ (id − η) = id.
ComparisonFunction rho_from_eta(const ComparisonFunction& eta);

ComparisonFunction lipschitz_lower_envelope(const ComparisonFunction& alpha, double L);

// η₂ = η/2 and η₁ = η₂ ∘ (id − η₂)⁻¹, with (id − η₁) ∘ (id − η₂) = id − η.
std::pair<ComparisonFunction, ComparisonFunction> split_id_minus_eta(const ComparisonFunction& eta);

std::string describe(const ComparisonFunction& f);

}  // namespace smallgain
