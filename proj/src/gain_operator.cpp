#include "smallgain/gain_operator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "smallgain/error.hpp"

namespace smallgain {

namespace {

constexpr double kBlowUp = 1e9;

inline double eval_edge(const GainOperator::Edge& e, double x) {
  return std::isnan(e.k) ? e.gain(x) : e.k * x;
}

}  // namespace

GainOperator::GainOperator(GainFamily family) : family_(std::move(family)) {
  const auto dim = family_.fixed_dimension();
  require(dim.has_value(), ErrorKind::invalid_input, "banded families need an evaluation window");
  n_ = *dim;
  build();
}

GainOperator::GainOperator(GainFamily family, std::size_t window, Boundary boundary, std::optional<long> lo)
    : family_(std::move(family)), n_(window), boundary_(boundary) {
  if (auto dim = family_.fixed_dimension()) {
    require(*dim == window, ErrorKind::invalid_input, "window size does not match the family dimension");
    lo_ = lo.value_or(0);
  } else {
    lo_ = lo.value_or(-static_cast<long>(window / 2));
  }
  build();
}

void GainOperator::build() {
  rows_.assign(n_, {});
  auto add = [this](std::size_t i, std::size_t j, const ComparisonFunction& g) {
    const auto k = g.linear_coefficient();
    if (!k) linear_ = false;
    rows_[i].push_back({j, g, k ? *k : std::numeric_limits<double>::quiet_NaN()});
  };
  const auto& st = family_.structure();
  if (auto* f = std::get_if<FiniteGains>(&st)) {
    for (const auto& e : f->nonzero()) add(e.i, e.j, e.gain);
  } else if (auto* bd = std::get_if<BlockDiagonalGains>(&st)) {
    for (std::size_t b = 0; b < bd->blocks.size(); ++b) {
      const std::size_t off = bd->offset_of(b);
      for (const auto& e : bd->blocks[b].nonzero()) add(off + e.i, off + e.j, e.gain);
    }
  } else {
    const auto& banded = std::get<BandedGains>(st);
    require(n_ >= static_cast<std::size_t>(2 * banded.reach() + 1), ErrorKind::invalid_input,
            "window must be wider than twice the band reach");
    const long n = static_cast<long>(n_);
    for (long p = 0; p < n; ++p) {
      for (const auto& [o, g] : banded.offsets) {
        long q = p + o;
        if (boundary_ == Boundary::Periodic) {
          q = ((q % n) + n) % n;
        } else if (q < 0 || q >= n) {
          continue;
        }
        add(static_cast<std::size_t>(p), static_cast<std::size_t>(q), g);
      }
    }
  }
  for (auto& row : rows_)
    std::stable_sort(row.begin(), row.end(), [](const Edge& a, const Edge& b) { return a.j < b.j; });
}

StateVector GainOperator::make(std::vector<double> values) const {
  require(values.size() == n_, ErrorKind::invalid_input, "vector size does not match the operator window");
  return StateVector(std::move(values), lo_, boundary_);
}

StateVector GainOperator::unit(std::size_t position) const {
  std::vector<double> v(n_, 0.0);
  v.at(position) = 1.0;
  return make(std::move(v));
}

void GainOperator::apply_raw(const double* in, double* out, long* witness) const {
  const bool is_max = mode() == Aggregation::Max;
  for (std::size_t i = 0; i < n_; ++i) {
    double acc = 0.0;
    long arg = -1;
    for (const auto& e : rows_[i]) {
      const double v = eval_edge(e, in[e.j]);
      if (is_max) {
        if (arg < 0 || v > acc) {
          acc = std::max(acc, v);
          arg = static_cast<long>(e.j);
        }
      } else {
        acc += v;
        if (arg < 0) arg = static_cast<long>(e.j);
      }
    }
    out[i] = acc;
    if (witness) witness[i] = arg;
  }
}

std::vector<double> GainOperator::apply_raw(const std::vector<double>& in) const {
  std::vector<double> out(n_);
  apply_raw(in.data(), out.data());
  return out;
}

GainOperator GainOperator::scaled(double c) const {
  GainOperator out = *this;
  out.family_ = family_.scaled(c);
  out.linear_ = true;
  out.build();
  return out;
}

namespace {

void check_input(const GainOperator& op, const StateVector& s) {
  require(s.size() == op.dimension(), ErrorKind::invalid_input,
          "state vector window does not match the operator (" + std::to_string(s.size()) + " vs " +
              std::to_string(op.dimension()) + ")");
}

}  // namespace

StateVector apply(const GainOperator& op, const StateVector& s) {
  check_input(op, s);
  std::vector<double> out(op.dimension());
  op.apply_raw(s.values().data(), out.data());
  return s.with_values(std::move(out));
}

ApplyResult apply_with_witness(const GainOperator& op, const StateVector& s) {
  check_input(op, s);
  std::vector<double> out(op.dimension());
  std::vector<long> w(op.dimension());
  op.apply_raw(s.values().data(), out.data(), w.data());
  for (long& x : w)
    if (x >= 0) x += s.lo();
  return {s.with_values(std::move(out)), std::move(w)};
}

PathPowerResult power_apply_pathform(const GainOperator& op, const StateVector& s, std::size_t n) {
  require(op.mode() == Aggregation::Max, ErrorKind::unsupported_mode,
          "the path formula holds for the max operator only");
  require(n >= 1, ErrorKind::invalid_input, "power must be at least 1");
  check_input(op, s);
  const std::size_t dim = op.dimension();
  // best[m][i]: sup over paths of length m ending in i of the composed gains
  // applied to s at the far end of the path; arg[m][i]: next node on that path.
  std::vector<std::vector<double>> best(n + 1, std::vector<double>(dim, 0.0));
  std::vector<std::vector<long>> arg(n + 1, std::vector<long>(dim, -1));
  best[0] = s.values();
  for (std::size_t m = 1; m <= n; ++m) {
    for (std::size_t i = 0; i < dim; ++i) {
      double b = 0.0;
      long a = -1;
      for (const auto& e : op.rows()[i]) {
        const double v = eval_edge(e, best[m - 1][e.j]);
        if (a < 0 || v > b) {
          b = std::max(b, v);
          a = static_cast<long>(e.j);
        }
      }
      best[m][i] = b;
      arg[m][i] = a;
    }
  }
  PathPowerResult out{s.with_values(best[n]), std::vector<std::vector<long>>(dim)};
  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<long> path{static_cast<long>(i)};
    long cur = static_cast<long>(i);
    for (std::size_t m = n; m >= 1 && cur >= 0; --m) {
      cur = arg[m][static_cast<std::size_t>(cur)];
      if (cur >= 0) path.push_back(cur);
    }
    if (path.size() == n + 1) {
      for (long& p : path) p += s.lo();
      out.paths[i] = std::move(path);
    }
  }
  return out;
}

SpectralEstimate spectral_radius(const GainOperator& op, double tol, std::size_t n_max) {
  require(op.linear(), ErrorKind::requires_linear_gains,
          "spectral radius needs homogeneous (linear) gains");
  return gelfand_estimate(
      op.dimension(), [&op](const double* in, double* out) { op.apply_raw(in, out); }, tol, n_max);
}

SpectralEstimate gelfand_estimate(std::size_t dim, const RawMap& map, double tol, std::size_t n_max) {
  require(tol > 0.0, ErrorKind::invalid_input, "tolerance must be positive");
  SpectralEstimate est;
  const std::size_t window = std::max<std::size_t>(1, std::min<std::size_t>(dim, 64));
  std::vector<double> v(dim, 1.0), w(dim);
  std::deque<std::vector<double>> past{v};
  std::deque<double> past_log{0.0};
  double log_norm = 0.0;
  double inf = std::numeric_limits<double>::infinity();
  if (dim == 0) {
    est.method = "nilpotent";
    est.converged = true;
    return est;
  }
  for (std::size_t n = 1; n <= n_max; ++n) {
    map(v.data(), w.data());
    const double m = sup_norm(w);
    est.iterations = n;
    if (m == 0.0) {
      est.history.push_back(0.0);
      est.running_inf.push_back(0.0);
      est.value = 0.0;
      est.converged = true;
      est.method = "nilpotent";
      return est;
    }
    log_norm += std::log(m);
    for (std::size_t k = 0; k < dim; ++k) v[k] = w[k] / m;
    const double q = std::exp(log_norm / static_cast<double>(n));
    inf = std::min(inf, q);
    est.history.push_back(q);
    est.running_inf.push_back(inf);
    for (std::size_t p = 1; p <= past.size(); ++p) {
      const auto& old = past[past.size() - p];
      double diff = 0.0;
      for (std::size_t k = 0; k < dim; ++k) diff = std::max(diff, std::abs(v[k] - old[k]));
      if (diff < tol) {
        const double ratio = std::exp((log_norm - past_log[past_log.size() - p]) / static_cast<double>(p));
        est.value = std::min(ratio, inf);
        est.converged = true;
        est.method = "periodic-ratio";
        est.period = p;
        return est;
      }
    }
    past.push_back(v);
    past_log.push_back(log_norm);
    if (past.size() > window) {
      past.pop_front();
      past_log.pop_front();
    }
  }
  est.value = inf;
  est.method = "gelfand-inf";
  return est;
}

const char* to_string(KleeneStatus s) {
  switch (s) {
    case KleeneStatus::Converged: return "converged";
    case KleeneStatus::Diverged: return "diverged";
    case KleeneStatus::MaxIterations: return "max_iterations";
  }
  return "?";
}

KleeneResult kleene_star(const GainOperator& op, const StateVector& s, double tol, std::size_t k_max) {
  require(op.mode() == Aggregation::Max, ErrorKind::unsupported_mode,
          "the Kleene star is defined for the max operator");
  require(tol >= 0.0, ErrorKind::invalid_input, "tolerance must be nonnegative");
  check_input(op, s);
  const std::size_t dim = op.dimension();
  std::vector<double> q = s.values(), x = s.values(), y(dim);
  const double limit = kBlowUp * s.sup_norm();
  KleeneResult res{s, KleeneStatus::MaxIterations, 0};
  for (std::size_t k = 1; k <= k_max; ++k) {
    op.apply_raw(x.data(), y.data());
    std::swap(x, y);
    res.iterations = k;
    if (sup_norm(x) > limit) {
      res.status = KleeneStatus::Diverged;
      res.closure = s.with_values(q);
      return res;
    }
    // Once an iterate adds nothing, no later one can: Γ commutes with sups.
    bool added = false;
    for (std::size_t i = 0; i < dim; ++i) {
      if (x[i] > q[i] + tol) added = true;
      q[i] = std::max(q[i], x[i]);
    }
    if (!added) {
      res.status = KleeneStatus::Converged;
      break;
    }
  }
  res.closure = s.with_values(std::move(q));
  return res;
}

namespace {

double decay_residual(const GainOperator& op, const std::vector<double>& s0, double lambda) {
  const auto g = op.apply_raw(s0);
  double r = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s0.size(); ++i) r = std::max(r, g[i] - lambda * s0[i]);
  return s0.empty() ? 0.0 : r;
}

}  // namespace

StrictDecayCertificate strict_decay_point(const GainOperator& op, double epsilon, double tol) {
  require(op.mode() == Aggregation::Max, ErrorKind::unsupported_mode,
          "strict decay points via the Kleene star need the max operator");
  require(op.linear(), ErrorKind::requires_linear_gains, "strict decay points need linear gains");
  require(epsilon > 0.0 && std::isfinite(epsilon), ErrorKind::invalid_input, "epsilon must be positive");
  const auto spec = spectral_radius(op);
  if (spec.converged && spec.value * (1.0 + epsilon) >= 1.0)
    fail(ErrorKind::epsilon_too_large, "(1+eps)*r = " + std::to_string(spec.value * (1.0 + epsilon)) +
                                           " is not below 1");
  const GainOperator boosted = op.scaled(1.0 + epsilon);
  const auto star = kleene_star(boosted, op.ones(), 0.0, 1000000);
  if (star.status != KleeneStatus::Converged)
    fail(ErrorKind::epsilon_too_large, "scaled Kleene star did not converge");
  StrictDecayCertificate cert;
  cert.s0 = star.closure;
  cert.lambda = 1.0 / (1.0 + epsilon);
  cert.iterations = star.iterations;
  cert.residual = decay_residual(op, cert.s0.values(), cert.lambda);
  if (cert.residual > tol)
    fail(ErrorKind::numeric_failure, "strict decay residual " + std::to_string(cert.residual) +
                                         " exceeds tolerance");
  return cert;
}

std::vector<double> neumann_decay_vector(std::size_t dim, const RawMap& map, double epsilon,
                                         std::size_t* iterations) {
  require(epsilon > 0.0 && std::isfinite(epsilon), ErrorKind::invalid_input, "epsilon must be positive");
  const double c = 1.0 + epsilon;
  std::vector<double> s(dim, 1.0), term(dim, 1.0), next(dim);
  std::size_t k = 0;
  for (; k < 1000000; ++k) {
    map(term.data(), next.data());
    for (std::size_t i = 0; i < dim; ++i) term[i] = c * next[i];
    for (std::size_t i = 0; i < dim; ++i) s[i] += term[i];
    const double t = sup_norm(term), total = sup_norm(s);
    if (total > 1e12) fail(ErrorKind::epsilon_too_large, "Neumann series of (1+eps)*A diverges");
    if (t <= 1e-17 * total) break;
  }
  if (iterations) *iterations = k + 1;
  return s;
}

StrictDecayCertificate decay_point(const GainOperator& op, double epsilon) {
  if (op.mode() == Aggregation::Max) return strict_decay_point(op, epsilon);
  require(op.linear(), ErrorKind::requires_linear_gains, "Neumann decay points need linear gains");
  StrictDecayCertificate cert;
  auto s = neumann_decay_vector(
      op.dimension(), [&op](const double* in, double* out) { op.apply_raw(in, out); }, epsilon,
      &cert.iterations);
  cert.s0 = op.make(std::move(s));
  cert.lambda = 1.0 / (1.0 + epsilon);
  cert.residual = decay_residual(op, cert.s0.values(), cert.lambda);
  if (cert.residual > 1e-12) fail(ErrorKind::epsilon_too_large, "Neumann decay point failed to validate");
  return cert;
}

std::optional<StrictDecayCertificate> find_decay_certificate(const GainOperator& op) {
  if (!op.linear()) return std::nullopt;
  std::optional<StrictDecayCertificate> best;
  auto score = [](const StrictDecayCertificate& c) { return c.s0.sup_norm() / (1.0 - c.lambda); };
  const auto ones = op.ones();
  const double l1 = sup_norm(op.apply_raw(ones.values()));
  if (l1 > 0.0 && l1 < 1.0) best = StrictDecayCertificate{ones, l1, decay_residual(op, ones.values(), l1), 0};
  const auto spec = spectral_radius(op);
  if (spec.value < 1.0) {
    const double eps = spec.value > 0.0 ? std::min(1.0, (1.0 / spec.value - 1.0) / 2.0) : 1.0;
    try {
      auto c = decay_point(op, eps);
      if (!best || score(c) < score(*best)) best = std::move(c);
    } catch (const Error&) {
      // The spectral estimate is an upper bound only; a failed decay point
      // leaves whatever the constant vector gave.
    }
  }
  return best;
}

}  // namespace smallgain
