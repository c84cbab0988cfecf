#include "smallgain/comparison_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "smallgain/error.hpp"
#include "smallgain/random.hpp"

namespace smallgain {

SampleStream::SampleStream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

double SampleStream::log_uniform(double lo, double hi) {
  return std::exp(uniform(std::log(lo), std::log(hi)));
}

std::size_t SampleStream::index(std::size_t n) {
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return static_cast<std::size_t>(v % n);
}

const char* to_string(FunctionClass c) {
  switch (c) {
    case FunctionClass::Zero: return "zero";
    case FunctionClass::PositiveDefinite: return "PD";
    case FunctionClass::K: return "K";
    case FunctionClass::KInfinity: return "Kinf";
  }
  return "?";
}

FunctionClass function_class_from_string(const std::string& s) {
  if (s == "zero") return FunctionClass::Zero;
  if (s == "PD" || s == "pd") return FunctionClass::PositiveDefinite;
  if (s == "K" || s == "k") return FunctionClass::K;
  if (s == "Kinf" || s == "kinf" || s == "K_inf") return FunctionClass::KInfinity;
  fail(ErrorKind::schema, "unknown function class '" + s + "'");
}

bool implies(FunctionClass declared, FunctionClass required) {
  auto rank = [](FunctionClass c) {
    switch (c) {
      case FunctionClass::Zero: return 0;
      case FunctionClass::PositiveDefinite: return 1;
      case FunctionClass::K: return 2;
      case FunctionClass::KInfinity: return 3;
    }
    return 0;
  };
  if (required == FunctionClass::Zero) return declared == FunctionClass::Zero;
  return rank(declared) >= rank(required);
}

namespace {

int rank(FunctionClass c) {
  switch (c) {
    case FunctionClass::Zero: return 0;
    case FunctionClass::PositiveDefinite: return 1;
    case FunctionClass::K: return 2;
    case FunctionClass::KInfinity: return 3;
  }
  return 0;
}

FunctionClass weakest(const std::vector<ComparisonFunction>& fs) {
  FunctionClass out = FunctionClass::KInfinity;
  for (const auto& f : fs)
    if (rank(f.declared_class()) < rank(out)) out = f.declared_class();
  return out;
}

// Class of a sum or max: zero terms drop out, one K∞ term lifts K terms to K∞,
// any PD term caps the result at PD.
FunctionClass join_class(const std::vector<ComparisonFunction>& fs) {
  bool any_nonzero = false, any_kinf = false, any_pd = false;
  for (const auto& f : fs) {
    switch (f.declared_class()) {
      case FunctionClass::Zero: break;
      case FunctionClass::PositiveDefinite: any_nonzero = any_pd = true; break;
      case FunctionClass::K: any_nonzero = true; break;
      case FunctionClass::KInfinity: any_nonzero = any_kinf = true; break;
    }
  }
  if (!any_nonzero) return FunctionClass::Zero;
  if (any_pd) return FunctionClass::PositiveDefinite;
  return any_kinf ? FunctionClass::KInfinity : FunctionClass::K;
}

void require_finite_nonneg(double v, const char* what) {
  require(std::isfinite(v) && v >= 0.0, ErrorKind::invalid_input,
          std::string(what) + " must be a finite nonnegative number");
}

double bisect_inverse(const ComparisonFunction& f, double y) {
  double hi = 1.0;
  while (!(f(hi) >= y)) {
    hi *= 2.0;
    if (!std::isfinite(hi) || hi > 1e300)
      fail(ErrorKind::range_error, "inverse of " + describe(f) + " does not bracket " +
                                       std::to_string(y));
  }
  double lo = 0.0;
  if (hi > 1.0) lo = hi / 2.0;
  // Run to machine precision; the midpoint stops moving once lo and hi are adjacent.
  for (int it = 0; it < 2000; ++it) {
    const double mid = lo + (hi - lo) / 2.0;
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < y)
      lo = mid;
    else
      hi = mid;
  }
  return (std::abs(f(lo) - y) <= std::abs(f(hi) - y)) ? lo : hi;
}

double envelope_eval(const ComparisonFunction& alpha, double L, double r) {
  if (r == 0.0) return 0.0;
  const double ar = alpha(r);
  const double Y = r + ar / L;
  auto objective = [&](double y) { return alpha(y) + L * std::abs(y - r); };

  // y = r always belongs to the candidate set, so the result never exceeds α(r).
  double best = ar;
  double best_y = r;
  constexpr int kGrid = 10000;
  const double y0 = Y * 1e-12;
  const double q = std::pow(Y / y0, 1.0 / (kGrid - 1));
  std::vector<double> ys;
  ys.reserve(kGrid + 1);
  ys.push_back(0.0);
  double y = y0;
  for (int k = 0; k < kGrid; ++k, y *= q) ys.push_back(std::min(y, Y));
  std::size_t best_k = 0;
  for (std::size_t k = 0; k < ys.size(); ++k) {
    const double v = objective(ys[k]);
    if (v < best) {
      best = v;
      best_y = ys[k];
      best_k = k;
    }
  }
  if (best_y != r) {
    double a = ys[best_k == 0 ? 0 : best_k - 1];
    double b = ys[std::min(best_k + 1, ys.size() - 1)];
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = objective(c), fd = objective(d);
    for (int it = 0; it < 40; ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = objective(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = objective(d);
      }
    }
    best = std::min({best, fc, fd});
  }
  return best;
}

double piecewise_eval(const Node& n, double r) {
  const auto& xs = n.xs;
  const auto& ys = n.ys;
  if (r >= xs.back()) return ys.back() + n.b * (r - xs.back());
  const auto it = std::upper_bound(xs.begin(), xs.end(), r);
  const std::size_t k = static_cast<std::size_t>(it - xs.begin());
  const double x0 = xs[k - 1], x1 = xs[k];
  const double t = (r - x0) / (x1 - x0);
  return ys[k - 1] + t * (ys[k] - ys[k - 1]);
}

}  // namespace

ComparisonFunction Node::make(Node n) {
  return ComparisonFunction(std::make_shared<const Node>(std::move(n)));
}

ComparisonFunction::ComparisonFunction() : node_(std::make_shared<const Node>()) {}

ComparisonFunction ComparisonFunction::zero() { return ComparisonFunction(); }

ComparisonFunction ComparisonFunction::linear(double k) {
  require_finite_nonneg(k, "linear slope");
  if (k == 0.0) return zero();
  Node n;
  n.kind = NodeKind::Linear;
  n.a = k;
  n.cls = FunctionClass::KInfinity;
  return Node::make(std::move(n));
}

ComparisonFunction ComparisonFunction::power(double c, double p) {
  require_finite_nonneg(c, "power coefficient");
  require(std::isfinite(p) && p > 0.0, ErrorKind::invalid_input, "power exponent must be positive");
  if (c == 0.0) return zero();
  Node n;
  n.kind = NodeKind::Power;
  n.a = c;
  n.b = p;
  n.cls = FunctionClass::KInfinity;
  return Node::make(std::move(n));
}

ComparisonFunction ComparisonFunction::saturating(double c, double theta) {
  require_finite_nonneg(c, "saturating level");
  require(std::isfinite(theta) && theta > 0.0, ErrorKind::invalid_input,
          "saturating scale must be positive");
  if (c == 0.0) return zero();
  Node n;
  n.kind = NodeKind::Saturating;
  n.a = c;
  n.b = theta;
  n.cls = FunctionClass::K;
  return Node::make(std::move(n));
}

ComparisonFunction ComparisonFunction::identity() {
  Node n;
  n.kind = NodeKind::Identity;
  n.cls = FunctionClass::KInfinity;
  return Node::make(std::move(n));
}

ComparisonFunction ComparisonFunction::compose(ComparisonFunction outer, ComparisonFunction inner) {
  if (outer.is_zero() || inner.is_zero()) return zero();
  if (outer.kind() == NodeKind::Identity) return inner;
  if (inner.kind() == NodeKind::Identity) return outer;
  if (outer.kind() == NodeKind::Linear && inner.kind() == NodeKind::Linear)
    return linear(outer.node().a * inner.node().a);
  Node n;
  n.kind = NodeKind::Compose;
  const FunctionClass co = outer.declared_class(), ci = inner.declared_class();
  if (co == FunctionClass::KInfinity && ci == FunctionClass::KInfinity)
    n.cls = FunctionClass::KInfinity;
  else if (implies(co, FunctionClass::K) && implies(ci, FunctionClass::K))
    n.cls = FunctionClass::K;
  else
    n.cls = FunctionClass::PositiveDefinite;
  n.children = {std::move(outer), std::move(inner)};
  return Node::make(std::move(n));
}

namespace {
ComparisonFunction aggregate(NodeKind kind, std::vector<ComparisonFunction> terms) {
  require(!terms.empty(), ErrorKind::invalid_input, "aggregate needs at least one term");
  if (terms.size() == 1) return terms.front();
  Node n;
  n.kind = kind;
  if (kind == NodeKind::Min) {
    bool any_zero = false;
    for (const auto& t : terms) any_zero = any_zero || t.is_zero();
    if (any_zero) return ComparisonFunction::zero();
    n.cls = weakest(terms);
  } else {
    std::vector<ComparisonFunction> nonzero;
    for (auto& t : terms)
      if (!t.is_zero()) nonzero.push_back(t);
    if (nonzero.empty()) return ComparisonFunction::zero();
    if (nonzero.size() == 1) return nonzero.front();
    terms = std::move(nonzero);
    n.cls = join_class(terms);
  }
  n.children = std::move(terms);
  return Node::make(std::move(n));
}
}  // namespace

ComparisonFunction ComparisonFunction::sum(std::vector<ComparisonFunction> terms) {
  return aggregate(NodeKind::Sum, std::move(terms));
}
ComparisonFunction ComparisonFunction::max(std::vector<ComparisonFunction> terms) {
  return aggregate(NodeKind::Max, std::move(terms));
}
ComparisonFunction ComparisonFunction::min(std::vector<ComparisonFunction> terms) {
  return aggregate(NodeKind::Min, std::move(terms));
}

ComparisonFunction ComparisonFunction::id_minus(ComparisonFunction eta) {
  if (eta.is_zero()) return identity();
  Node n;
  n.kind = NodeKind::IdMinus;
  n.cls = FunctionClass::KInfinity;
  n.children = {std::move(eta)};
  return Node::make(std::move(n));
}

ComparisonFunction ComparisonFunction::inverse(ComparisonFunction f) {
  require(implies(f.declared_class(), FunctionClass::K), ErrorKind::invalid_input,
          "inverse requires a strictly increasing (class K) function, got " + describe(f));
  if (f.kind() == NodeKind::Inverse) return f.node().children.front();
  if (f.kind() == NodeKind::Identity) return f;
  if (f.kind() == NodeKind::Linear) return linear(1.0 / f.node().a);
  Node n;
  n.kind = NodeKind::Inverse;
  n.cls = f.declared_class();
  n.children = {std::move(f)};
  return Node::make(std::move(n));
}

ComparisonFunction ComparisonFunction::lipschitz_envelope(ComparisonFunction alpha, double L) {
  require(std::isfinite(L) && L > 0.0, ErrorKind::invalid_input, "Lipschitz constant must be positive");
  if (alpha.is_zero()) return zero();
  Node n;
  n.kind = NodeKind::LipschitzEnvelope;
  n.a = L;
  // The envelope of a K (K∞) function is again K (K∞); PD stays PD.
  n.cls = alpha.declared_class();
  n.children = {std::move(alpha)};
  return Node::make(std::move(n));
}

ComparisonFunction ComparisonFunction::piecewise_linear(std::vector<double> x, std::vector<double> y,
                                                        double tail_slope) {
  require(!x.empty() && x.size() == y.size(), ErrorKind::invalid_input,
          "piecewise_linear needs matching, nonempty knot arrays");
  require(x.front() == 0.0 && y.front() == 0.0, ErrorKind::invalid_input,
          "piecewise_linear must start at (0, 0)");
  require_finite_nonneg(tail_slope, "tail slope");
  bool strictly = tail_slope > 0.0;
  bool all_zero = tail_slope == 0.0;
  for (std::size_t k = 1; k < x.size(); ++k) {
    require(std::isfinite(x[k]) && x[k] > x[k - 1], ErrorKind::invalid_input,
            "piecewise_linear knots must be strictly increasing");
    require(std::isfinite(y[k]) && y[k] >= y[k - 1], ErrorKind::invalid_input,
            "piecewise_linear values must be nondecreasing");
    strictly = strictly && y[k] > y[k - 1];
    all_zero = all_zero && y[k] == 0.0;
  }
  if (all_zero) return zero();
  Node n;
  n.kind = NodeKind::PiecewiseLinear;
  n.b = tail_slope;
  n.cls = strictly ? FunctionClass::KInfinity : FunctionClass::PositiveDefinite;
  n.xs = std::move(x);
  n.ys = std::move(y);
  return Node::make(std::move(n));
}

NodeKind ComparisonFunction::kind() const { return node_->kind; }
FunctionClass ComparisonFunction::declared_class() const { return node_->cls; }

ComparisonFunction ComparisonFunction::with_class(FunctionClass c) const {
  if (c == node_->cls) return *this;
  Node n = *node_;
  n.cls = c;
  return Node::make(std::move(n));
}

double ComparisonFunction::operator()(double r) const {
  require(r >= 0.0, ErrorKind::invalid_input, "comparison functions are defined on r >= 0");
  const Node& n = *node_;
  switch (n.kind) {
    case NodeKind::Zero: return 0.0;
    case NodeKind::Linear: return n.a * r;
    case NodeKind::Power: return n.a * std::pow(r, n.b);
    case NodeKind::Saturating: return n.a * r / (r + n.b);
    case NodeKind::Identity: return r;
    case NodeKind::Compose: return n.children[0](n.children[1](r));
    case NodeKind::Sum: {
      double s = 0.0;
      for (const auto& c : n.children) s += c(r);
      return s;
    }
    case NodeKind::Max: {
      double s = 0.0;
      for (const auto& c : n.children) s = std::max(s, c(r));
      return s;
    }
    case NodeKind::Min: {
      double s = std::numeric_limits<double>::infinity();
      for (const auto& c : n.children) s = std::min(s, c(r));
      return s;
    }
    case NodeKind::IdMinus: return std::max(0.0, r - n.children[0](r));
    case NodeKind::Inverse: return n.children[0].invert(r);
    case NodeKind::LipschitzEnvelope: return envelope_eval(n.children[0], n.a, r);
    case NodeKind::PiecewiseLinear: return piecewise_eval(n, r);
  }
  return 0.0;
}

double ComparisonFunction::invert(double y) const {
  require(y >= 0.0, ErrorKind::invalid_input, "inverse evaluated at a negative value");
  if (y == 0.0) return 0.0;
  const Node& n = *node_;
  switch (n.kind) {
    case NodeKind::Zero:
      fail(ErrorKind::range_error, "the zero function has no inverse");
    case NodeKind::Linear: return y / n.a;
    case NodeKind::Power: return std::pow(y / n.a, 1.0 / n.b);
    case NodeKind::Identity: return y;
    case NodeKind::Saturating:
      require(y < n.a, ErrorKind::range_error, "value outside the range of a saturating gain");
      return n.b * y / (n.a - y);
    case NodeKind::Inverse: return n.children[0](y);
    case NodeKind::Compose: return n.children[1].invert(n.children[0].invert(y));
    case NodeKind::IdMinus:
      if (auto k = n.children[0].linear_coefficient(); k && *k < 1.0) return y / (1.0 - *k);
      break;
    default: break;
  }
  return bisect_inverse(*this, y);
}

std::optional<double> ComparisonFunction::linear_coefficient() const {
  const Node& n = *node_;
  switch (n.kind) {
    case NodeKind::Zero: return 0.0;
    case NodeKind::Linear: return n.a;
    case NodeKind::Identity: return 1.0;
    case NodeKind::Power:
      if (n.b == 1.0) return n.a;
      return std::nullopt;
    case NodeKind::Compose: {
      auto o = n.children[0].linear_coefficient();
      auto i = n.children[1].linear_coefficient();
      if (o && i) return *o * *i;
      return std::nullopt;
    }
    case NodeKind::Sum:
    case NodeKind::Max:
    case NodeKind::Min: {
      std::optional<double> acc;
      for (const auto& c : n.children) {
        auto k = c.linear_coefficient();
        if (!k) return std::nullopt;
        if (!acc)
          acc = *k;
        else if (n.kind == NodeKind::Sum)
          *acc += *k;
        else if (n.kind == NodeKind::Max)
          acc = std::max(*acc, *k);
        else
          acc = std::min(*acc, *k);
      }
      return acc;
    }
    case NodeKind::IdMinus: {
      auto k = n.children[0].linear_coefficient();
      if (k && *k <= 1.0) return 1.0 - *k;
      return std::nullopt;
    }
    case NodeKind::Inverse: {
      auto k = n.children[0].linear_coefficient();
      if (k && *k > 0.0) return 1.0 / *k;
      return std::nullopt;
    }
    case NodeKind::LipschitzEnvelope: {
      auto k = n.children[0].linear_coefficient();
      if (k) return std::min(*k, n.a);
      return std::nullopt;
    }
    case NodeKind::Saturating:
    case NodeKind::PiecewiseLinear: return std::nullopt;
  }
  return std::nullopt;
}

ComparisonFunction ComparisonFunction::scaled(double c) const {
  require_finite_nonneg(c, "scale factor");
  if (auto k = linear_coefficient()) return linear(c * *k);
  if (c == 1.0) return *this;
  return compose(linear(c), *this);
}

ComparisonFunction operator*(const ComparisonFunction& outer, const ComparisonFunction& inner) {
  return ComparisonFunction::compose(outer, inner);
}

KLFunction KLFunction::exponential(double C, double rate) {
  require(std::isfinite(rate) && rate > 0.0, ErrorKind::invalid_input, "KL decay rate must be positive");
  return KLFunction{ComparisonFunction::linear(C), rate};
}

double KLFunction::operator()(double r, double t) const {
  require(t >= 0.0, ErrorKind::invalid_input, "KL functions are defined for t >= 0");
  return g(r) * std::exp(-rate * t);
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  require(lo > 0.0 && hi >= lo && count >= 1, ErrorKind::invalid_input, "bad log grid");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t k = 0; k < count; ++k)
    out[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

ClassCheck validate_class(const ComparisonFunction& f, std::uint64_t seed, std::size_t pairs,
                          const std::vector<GrowthWitness>& witnesses) {
  ClassCheck out;
  const FunctionClass c = f.declared_class();
  SampleStream rng(seed, 0x636c617373ULL);
  auto bad = [&](std::string msg, double r1, double r2) {
    out.ok = false;
    out.message = std::move(msg);
    out.r1 = r1;
    out.r2 = r2;
    return out;
  };
  if (f(0.0) != 0.0) return bad("f(0) != 0", 0.0, 0.0);
  for (std::size_t k = 0; k < pairs; ++k) {
    double r1 = rng.log_uniform(1e-6, 1e6);
    double r2 = rng.log_uniform(1e-6, 1e6);
    if (r1 > r2) std::swap(r1, r2);
    const double f1 = f(r1), f2 = f(r2);
    if (!std::isfinite(f1) || !std::isfinite(f2)) return bad("non-finite value", r1, r2);
    if (c == FunctionClass::Zero) {
      if (f1 != 0.0 || f2 != 0.0) return bad("declared zero but nonzero value", r1, r2);
      continue;
    }
    if (f1 <= 0.0) return bad("not positive definite", r1, r1);
    if (implies(c, FunctionClass::K) && r1 < r2 && !(f1 < f2))
      return bad("not strictly increasing", r1, r2);
  }
  if (c == FunctionClass::KInfinity) {
    if (witnesses.empty()) {
      const double lo = f(1e6), hi = f(1e12);
      if (!(hi > lo * (1.0 + 1e-3))) return bad("no growth between 1e6 and 1e12", 1e6, 1e12);
    }
    for (const auto& w : witnesses)
      if (!(f(w.R) > w.B)) return bad("growth witness failed", w.R, w.B);
  }
  return out;
}

namespace {

void check_id_minus_monotone(const ComparisonFunction& eta) {
  const auto grid = log_grid(1e-6, 1e6, 241);
  double prev = 0.0;
  for (double r : grid) {
    const double e = eta(r);
    const double v = r - e;
    if (!(e < r) || !(v > prev))
      fail(ErrorKind::invalid_input, "id - eta is not strictly increasing (sampled at r = " +
                                         std::to_string(r) + ")");
    prev = v;
  }
}

}  // namespace

ComparisonFunction rho_from_eta(const ComparisonFunction& eta) {
  if (eta.is_zero()) return ComparisonFunction::zero();
  check_id_minus_monotone(eta);
  if (auto k = eta.linear_coefficient()) return ComparisonFunction::linear(*k / (1.0 - *k));
  return ComparisonFunction::compose(eta, ComparisonFunction::inverse(ComparisonFunction::id_minus(eta)));
}

ComparisonFunction lipschitz_lower_envelope(const ComparisonFunction& alpha, double L) {
  require(std::isfinite(L) && L > 0.0, ErrorKind::invalid_input, "Lipschitz constant must be positive");
  if (auto k = alpha.linear_coefficient(); k && *k <= L) return alpha;
  return ComparisonFunction::lipschitz_envelope(alpha, L);
}

std::pair<ComparisonFunction, ComparisonFunction> split_id_minus_eta(const ComparisonFunction& eta) {
  if (eta.is_zero()) return {ComparisonFunction::zero(), ComparisonFunction::zero()};
  check_id_minus_monotone(eta);
  const ComparisonFunction eta2 = eta.scaled(0.5);
  return {rho_from_eta(eta2), eta2};
}

std::string describe(const ComparisonFunction& f) {
  const Node& n = f.node();
  std::ostringstream os;
  os.precision(17);
  auto list = [&](const char* name) {
    os << name << "(";
    for (std::size_t k = 0; k < n.children.size(); ++k) os << (k ? ", " : "") << describe(n.children[k]);
    os << ")";
  };
  switch (n.kind) {
    case NodeKind::Zero: os << "zero"; break;
    case NodeKind::Linear: os << "linear(" << n.a << ")"; break;
    case NodeKind::Power: os << "power(" << n.a << ", " << n.b << ")"; break;
    case NodeKind::Saturating: os << "saturating(" << n.a << ", " << n.b << ")"; break;
    case NodeKind::Identity: os << "id"; break;
    case NodeKind::Compose: list("compose"); break;
    case NodeKind::Sum: list("sum"); break;
    case NodeKind::Max: list("max"); break;
    case NodeKind::Min: list("min"); break;
    case NodeKind::IdMinus: list("id_minus"); break;
    case NodeKind::Inverse: list("inverse"); break;
    case NodeKind::LipschitzEnvelope:
      os << "lipschitz_envelope(" << describe(n.children[0]) << ", " << n.a << ")";
      break;
    case NodeKind::PiecewiseLinear: os << "piecewise_linear[" << n.xs.size() << " knots]"; break;
  }
  return os.str();
}

}  // namespace smallgain
