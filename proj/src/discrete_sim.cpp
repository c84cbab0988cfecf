#include "smallgain/discrete_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "smallgain/cone_analysis.hpp"
#include "smallgain/error.hpp"
#include "smallgain/random.hpp"

namespace smallgain {

namespace {

constexpr double kOverflow = 1e12;

}  // namespace

MonotoneMap::MonotoneMap(GainOperator op)
    : op_(std::move(op)), n_(op_->dimension()), lo_(op_->lo()), boundary_(op_->boundary()) {}

MonotoneMap MonotoneMap::matrix(std::vector<std::vector<double>> a, long lo, Boundary boundary) {
  MonotoneMap m;
  m.n_ = a.size();
  for (const auto& row : a) {
    require(row.size() == a.size(), ErrorKind::invalid_input, "matrix must be square");
    for (double v : row)
      require(std::isfinite(v) && v >= 0.0, ErrorKind::invalid_input, "matrix entries must be nonnegative");
  }
  m.matrix_ = std::move(a);
  m.lo_ = lo;
  m.boundary_ = boundary;
  return m;
}

bool MonotoneMap::homogeneous() const { return op_ ? op_->linear() : true; }

void MonotoneMap::apply_raw(const double* in, double* out) const {
  if (op_) {
    op_->apply_raw(in, out);
    return;
  }
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += matrix_[i][j] * in[j];
    out[i] = s;
  }
}

std::vector<double> MonotoneMap::apply_raw(const std::vector<double>& in) const {
  require(in.size() == n_, ErrorKind::invalid_input, "vector size does not match the map");
  std::vector<double> out(n_);
  apply_raw(in.data(), out.data());
  return out;
}

StateVector MonotoneMap::apply(const StateVector& x) const { return x.with_values(apply_raw(x.values())); }

SpectralEstimate MonotoneMap::spectral_radius(double tol, std::size_t n_max) const {
  if (op_) return smallgain::spectral_radius(*op_, tol, n_max);
  return gelfand_estimate(
      n_, [this](const double* in, double* out) { apply_raw(in, out); }, tol, n_max);
}

std::optional<StrictDecayCertificate> MonotoneMap::decay_certificate() const {
  if (op_) return find_decay_certificate(*op_);
  auto residual = [this](const std::vector<double>& s0, double lambda) {
    const auto g = apply_raw(s0);
    double r = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i) r = std::max(r, g[i] - lambda * s0[i]);
    return r;
  };
  const auto one = ones();
  const double l1 = sup_norm(apply_raw(one.values()));
  if (l1 > 0.0 && l1 < 1.0) return StrictDecayCertificate{one, l1, residual(one.values(), l1), 0};
  const auto spec = spectral_radius();
  if (spec.value >= 1.0) return std::nullopt;
  const double eps = spec.value > 0.0 ? std::min(1.0, (1.0 / spec.value - 1.0) / 2.0) : 1.0;
  try {
    StrictDecayCertificate cert;
    auto s = neumann_decay_vector(
        n_, [this](const double* in, double* out) { apply_raw(in, out); }, eps, &cert.iterations);
    cert.lambda = 1.0 / (1.0 + eps);
    cert.residual = residual(s, cert.lambda);
    cert.s0 = make(std::move(s));
    if (cert.residual > 1e-12) return std::nullopt;
    return cert;
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::vector<std::vector<double>> MonotoneMap::probe_directions() const {
  if (op_) return structured_directions(*op_);
  return {};
}

const StateVector& DiscreteInput::at(std::size_t k) const {
  require(!values.empty(), ErrorKind::invalid_input, "empty input");
  if (constant) return values.front();
  require(k < values.size(), ErrorKind::invalid_input, "input sequence shorter than the horizon");
  return values[k];
}

double DiscreteTrajectory::input_sup_norm() const {
  double m = 0.0;
  for (const auto& u : inputs) m = std::max(m, u.sup_norm());
  return m;
}

DiscreteTrajectory iterate(const MonotoneMap& map, const StateVector& x0, const DiscreteInput& u,
                           std::size_t K) {
  require(x0.size() == map.dimension(), ErrorKind::invalid_input, "initial state has the wrong size");
  DiscreteTrajectory traj;
  traj.states.reserve(K + 1);
  traj.states.push_back(x0);
  std::vector<double> next(map.dimension());
  for (std::size_t k = 0; k < K; ++k) {
    const StateVector& uk = u.at(k);
    require(uk.size() == map.dimension(), ErrorKind::invalid_input, "input has the wrong size");
    map.apply_raw(traj.states.back().values().data(), next.data());
    for (std::size_t i = 0; i < next.size(); ++i) next[i] += uk[i];
    traj.inputs.push_back(uk);
    if (!(sup_norm(next) <= kOverflow)) {
      traj.overflow = true;
      break;
    }
    traj.states.push_back(x0.with_values(next));
  }
  return traj;
}

DiscreteTrajectory damped_solution(const MonotoneMap& map, const StateVector& x0, const DiscreteInput& u,
                                   std::size_t K, std::uint64_t seed) {
  DiscreteTrajectory traj;
  traj.states.push_back(x0);
  SampleStream rng(seed, 0x64616d70ULL);
  std::vector<double> next(map.dimension());
  for (std::size_t k = 0; k < K; ++k) {
    const StateVector& uk = u.at(k);
    map.apply_raw(traj.states.back().values().data(), next.data());
    for (std::size_t i = 0; i < next.size(); ++i) next[i] = rng.uniform() * (next[i] + uk[i]);
    traj.inputs.push_back(uk);
    if (!(sup_norm(next) <= kOverflow)) {
      traj.overflow = true;
      break;
    }
    traj.states.push_back(x0.with_values(next));
  }
  return traj;
}

EissCheck check_eiss(const DiscreteTrajectory& traj, const EissCertificate& cert) {
  EissCheck out;
  out.max_excess = -std::numeric_limits<double>::infinity();
  if (traj.states.empty()) return out;
  const double x0 = traj.states.front().sup_norm();
  const double forcing = cert.gamma(traj.input_sup_norm());
  double ak = 1.0;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const double excess = traj.states[k].sup_norm() - (cert.M * x0 * ak + forcing);
    out.max_excess = std::max(out.max_excess, excess);
    if (excess > 1e-9 && out.pass) {
      out.pass = false;
      out.first_violation = k;
    }
    ak *= cert.a;
  }
  return out;
}

EissCertificate fit_eiss_certificate(const MonotoneMap& map) {
  require(map.homogeneous(), ErrorKind::requires_linear_gains, "eISS certificates need a homogeneous map");
  const auto spec = map.spectral_radius();
  require(spec.value < 1.0, ErrorKind::invalid_input, "operator is not subcritical (r >= 1)");
  const double r = spec.value;
  const double a = r + std::min(0.05, (1.0 - r) / 2.0);
  const double log_a = std::log(a);
  std::vector<double> v(map.dimension(), 1.0), w(map.dimension());
  double log_ak = 0.0, M = 1.0, S = 1.0, aN = 0.0;
  std::size_t k = 1;
  for (; k <= 1000000; ++k) {
    map.apply_raw(v.data(), w.data());
    const double m = sup_norm(w);
    if (m == 0.0) {
      aN = 0.0;
      break;
    }
    log_ak += std::log(m);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / m;
    if (log_ak <= static_cast<double>(k) * log_a) {
      aN = std::exp(log_ak);
      break;
    }
    M = std::max(M, std::exp(log_ak - static_cast<double>(k) * log_a));
    S += std::exp(log_ak);
  }
  if (k > 1000000) fail(ErrorKind::numeric_failure, "orbit of 1 did not drop below the rate within 1e6 steps");
  return EissCertificate{M, a, ComparisonFunction::linear(S / (1.0 - aN))};
}

const char* to_string(MlimEvidence e) {
  switch (e) {
    case MlimEvidence::Positive: return "positive";
    case MlimEvidence::Negative: return "negative";
    case MlimEvidence::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

bool is_decreasing_seed(const MonotoneMap& map, const std::vector<double>& x0, const std::vector<double>& w) {
  const auto ax = map.apply_raw(x0);
  for (std::size_t i = 0; i < x0.size(); ++i)
    if (ax[i] + w[i] > x0[i] * (1.0 + 1e-12)) return false;
  return true;
}

// Z = sup_k Fᵏ(s) with F(x) = A(x) + w. For a sup-preserving A, F(Z) ≤ Z.
std::optional<std::vector<double>> kleene_majorant(const MonotoneMap& map, const std::vector<double>& w,
                                                   std::size_t k_max) {
  const std::size_t n = map.dimension();
  std::vector<double> s(n, 1.0 + sup_norm(w));
  std::vector<double> z = s, x = s, y(n);
  const double limit = 1e9 * sup_norm(s);
  for (std::size_t k = 0; k < k_max; ++k) {
    map.apply_raw(x.data(), y.data());
    for (std::size_t i = 0; i < n; ++i) y[i] += w[i];
    std::swap(x, y);
    if (sup_norm(x) > limit) return std::nullopt;
    bool added = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] > z[i]) {
        z[i] = x[i];
        added = true;
      }
    }
    if (!added) return z;
  }
  return std::nullopt;
}

}  // namespace

MlimReport mlim_probe(const MonotoneMap& map, const StateVector& w, const ComparisonFunction& xi,
                      const MlimOptions& options) {
  require(w.size() == map.dimension(), ErrorKind::invalid_input, "input has the wrong size");
  require(!options.eps_grid.empty(), ErrorKind::invalid_input, "epsilon grid is empty");
  const std::size_t n = map.dimension();
  const double wn = w.sup_norm();
  MlimReport rep;
  rep.bound = xi(wn);
  const double eps_max = *std::max_element(options.eps_grid.begin(), options.eps_grid.end());

  // Seed with x0 ≥ A(x0) + w.
  std::optional<std::vector<double>> x0;
  if (options.seed_override) {
    if (is_decreasing_seed(map, options.seed_override->values(), w.values())) {
      x0 = options.seed_override->values();
      rep.seed_method = "override";
    }
  } else if (auto cert = map.decay_certificate()) {
    // t(1 − λ)·min(s0) ≥ ‖w‖ with a factor-two margin.
    const double t = wn > 0.0 ? 2.0 * wn / ((1.0 - cert->lambda) * cert->s0.min()) : 1.0;
    std::vector<double> v = cert->s0.values();
    for (double& x : v) x *= t;
    if (is_decreasing_seed(map, v, w.values())) {
      x0 = std::move(v);
      rep.seed_method = "strict-decay";
    }
  }
  if (!x0 && !options.seed_override && map.gain_operator() &&
      map.gain_operator()->mode() == Aggregation::Max) {
    if (auto z = kleene_majorant(map, w.values(), options.k_max);
        z && is_decreasing_seed(map, *z, w.values())) {
      x0 = std::move(*z);
      rep.seed_method = "kleene-majorant";
    }
  }
  if (!x0) rep.seed_method = "none";
  rep.seed_constructed = x0.has_value();

  bool negative = false;
  auto mark_negative = [&](std::string what, std::vector<double> v) {
    if (negative) return;
    negative = true;
    rep.negative_solution = std::move(what);
    rep.negative_vector = std::move(v);
  };

  const auto input = DiscreteInput::constant_input(w);
  if (x0) {
    rep.x0 = w.with_values(*x0);
    const auto traj = iterate(map, *rep.x0, input, options.k_max);
    ++rep.solutions_tested;
    for (double eps : options.eps_grid) {
      MlimAttainment at{eps, std::nullopt, 0.0};
      for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const double norm = traj.states[k].sup_norm();
        if (norm <= eps + rep.bound) {
          at.N = k;
          at.norm_at_N = norm;
          break;
        }
      }
      if (!at.N) mark_negative("equality recursion from the seed", *x0);
      rep.attainment.push_back(at);
    }
    // Damped decreasing solutions x(k+1) = min(x(k), d ⊙ (A(x(k)) + w)).
    for (std::size_t run = 0; run < options.damped_runs; ++run) {
      SampleStream rng(options.seed, 0x6d6c696dULL + run);
      std::vector<double> x = *x0, y(n);
      bool attained = false;
      ++rep.solutions_tested;
      for (std::size_t k = 0; k <= options.k_max; ++k) {
        if (sup_norm(x) <= eps_max + rep.bound) {
          attained = true;
          break;
        }
        map.apply_raw(x.data(), y.data());
        for (std::size_t i = 0; i < n; ++i) x[i] = std::min(x[i], rng.uniform() * (y[i] + w[i]));
      }
      if (!attained) mark_negative("damped decreasing solution " + std::to_string(run), *x0);
    }
  }

  // Constant solutions: x(k) ≡ v is decreasing and solves the inequality when
  // v ≤ A(v) + w; it attains only if ‖v‖ ≤ ε + ξ(‖w‖).
  std::vector<std::vector<double>> dirs;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> e(n, 0.0);
    e[i] = 1.0;
    dirs.push_back(std::move(e));
  }
  dirs.emplace_back(n, 1.0);
  for (auto& d : map.probe_directions()) dirs.push_back(std::move(d));
  const double base = 1.0 + eps_max + rep.bound;
  for (const auto& d : dirs) {
    for (double t : {0.5, 1.0, 2.0, 10.0, 1e2, 1e3, 1e6}) {
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = d[i] * t * base;
      ++rep.solutions_tested;
      const auto av = map.apply_raw(v);
      bool solves = true;
      for (std::size_t i = 0; i < n && solves; ++i) solves = v[i] <= av[i] + w[i];
      if (solves && sup_norm(v) > eps_max + rep.bound) {
        std::ostringstream os;
        os << "constant solution with norm " << sup_norm(v);
        mark_negative(os.str(), v);
      }
    }
  }

  if (negative)
    rep.evidence = MlimEvidence::Negative;
  else if (rep.seed_constructed)
    rep.evidence = MlimEvidence::Positive;
  else
    rep.evidence = MlimEvidence::Inconclusive;
  return rep;
}

double LyapunovEvaluator::operator()(const StateVector& x) const { return (*this)(x.values()); }

double LyapunovEvaluator::operator()(const std::vector<double>& x) const {
  std::vector<double> y = x, z(y.size());
  double best = sup_norm(y);
  double scale = 1.0;
  for (std::size_t n = 1; n < N_; ++n) {
    map_.apply_raw(y.data(), z.data());
    std::swap(y, z);
    scale *= eta_;
    best = std::max(best, scale * sup_norm(y));
  }
  return best;
}

LyapunovEvaluator build_lyapunov(const MonotoneMap& map, double eta) {
  require(map.homogeneous(), ErrorKind::requires_linear_gains, "the Lyapunov construction needs linear gains");
  require(std::isfinite(eta) && eta > 1.0, ErrorKind::invalid_input, "eta must exceed 1");
  const auto spec = map.spectral_radius();
  if (eta * spec.value >= 1.0)
    fail(ErrorKind::eta_too_large, "eta * r = " + std::to_string(eta * spec.value) + " is not below 1");
  // N: first n with ηⁿ‖Aⁿ𝟏‖ < 1e−3. Beyond N every term is dominated by the n = 0 term.
  const double log_eta = std::log(eta), threshold = std::log(1e-3);
  std::vector<double> v(map.dimension(), 1.0), w(map.dimension());
  double log_an = 0.0;
  std::size_t N = 1;
  for (;; ++N) {
    if (N > 1000000) fail(ErrorKind::numeric_failure, "Lyapunov truncation did not settle");
    map.apply_raw(v.data(), w.data());
    const double m = sup_norm(w);
    if (m == 0.0) break;
    log_an += std::log(m);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / m;
    if (static_cast<double>(N) * log_eta + log_an < threshold) break;
  }
  const double C = sup_norm(map.apply_raw(map.ones().values()));
  const double psi = eta * C >= 1.0 ? std::pow(eta * C, static_cast<double>(N - 1)) : 1.0;
  return LyapunovEvaluator(map, eta, N, C, psi);
}

DissipationCheck check_dissipation(const LyapunovEvaluator& V, const DiscreteTrajectory& traj) {
  DissipationCheck out;
  out.max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
    const double rhs = V(traj.states[k]) / V.eta() + V.psi() * traj.inputs[k].sup_norm();
    const double excess = V(traj.states[k + 1]) - rhs;
    out.max_excess = std::max(out.max_excess, excess);
    if (excess > 1e-9 + 1e-12 * rhs && out.pass) {
      out.pass = false;
      out.first_violation = k;
    }
  }
  return out;
}

}  // namespace smallgain
