#include "smallgain/cone_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smallgain/error.hpp"
#include "smallgain/isotonic.hpp"

namespace smallgain {

namespace {

constexpr double kZeroTol = 1e-12;
constexpr double kMbiRatioLimit = 1e6;
constexpr std::uint64_t kUnitStream = 1ULL << 40;
constexpr std::uint64_t kMbiStream = 2ULL << 40;
constexpr std::uint64_t kStrongStream = 3ULL << 40;
constexpr std::uint64_t kRobustStream = 4ULL << 40;

std::vector<double> scaled(const std::vector<double>& d, double r) {
  std::vector<double> x(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) x[k] = d[k] * r;
  return x;
}

std::vector<double> normalized(std::vector<double> v) {
  const double m = sup_norm(v);
  if (m > 0.0)
    for (double& x : v) x /= m;
  return v;
}

// Vertices reachable from v (forward) intersected with those reaching v.
std::vector<std::vector<std::size_t>> strong_components(const GainOperator& op) {
  const std::size_t n = op.dimension();
  std::vector<std::vector<std::size_t>> fwd(n), bwd(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& e : op.rows()[i]) {
      fwd[i].push_back(e.j);
      bwd[e.j].push_back(i);
    }
  auto reach = [n](const std::vector<std::vector<std::size_t>>& g, std::size_t s) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> st{s};
    seen[s] = 1;
    while (!st.empty()) {
      const std::size_t v = st.back();
      st.pop_back();
      for (std::size_t w : g[v])
        if (!seen[w]) {
          seen[w] = 1;
          st.push_back(w);
        }
    }
    return seen;
  };
  std::vector<char> assigned(n, 0);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t v = 0; v < n; ++v) {
    if (assigned[v]) continue;
    const auto f = reach(fwd, v), b = reach(bwd, v);
    std::vector<std::size_t> comp;
    for (std::size_t w = 0; w < n; ++w)
      if (f[w] && b[w]) {
        comp.push_back(w);
        assigned[w] = 1;
      }
    if (comp.size() >= 2) out.push_back(std::move(comp));
  }
  return out;
}

// Perron vector of the restriction of a linear sum operator to `comp`, by power
// iteration on I + A_C (primitive, so it converges).
std::vector<double> perron_vector(const GainOperator& op, const std::vector<std::size_t>& comp) {
  const std::size_t n = op.dimension();
  std::vector<char> in(n, 0);
  for (std::size_t v : comp) in[v] = 1;
  std::vector<double> v(n, 0.0), w(n);
  for (std::size_t c : comp) v[c] = 1.0;
  for (int it = 0; it < 5000; ++it) {
    op.apply_raw(v.data(), w.data());
    double m = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      w[k] = in[k] ? v[k] + w[k] : 0.0;
      m = std::max(m, w[k]);
    }
    double diff = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      w[k] /= m;
      diff = std::max(diff, std::abs(w[k] - v[k]));
    }
    std::swap(v, w);
    if (diff < 1e-15) break;
  }
  return v;
}

// Deterministic candidates shared by all probes: eᵢ, 𝟏 and structured directions.
std::vector<std::vector<double>> canonical_directions(const GainOperator& op) {
  const std::size_t n = op.dimension();
  std::vector<std::vector<double>> dirs;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> e(n, 0.0);
    e[i] = 1.0;
    dirs.push_back(std::move(e));
  }
  dirs.emplace_back(n, 1.0);
  for (auto& d : structured_directions(op)) dirs.push_back(std::move(d));
  return dirs;
}

Witness make_witness(std::vector<double> x, std::string inequality, double radius, double value) {
  Witness w;
  w.x = std::move(x);
  w.inequality = std::move(inequality);
  w.radius = radius;
  w.value = value;
  return w;
}

using Score = double (*)(const std::vector<double>& x, const std::vector<double>& ax,
                         const std::vector<double>& z);

double dist_score(const std::vector<double>& x, const std::vector<double>& ax, const std::vector<double>&) {
  double d = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) d = std::max(d, x[k] - ax[k]);
  return d;
}

double unit_score(const std::vector<double>& x, const std::vector<double>& ax, const std::vector<double>& z) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < x.size(); ++k) best = std::max(best, (x[k] - ax[k]) / z[k]);
  return std::max(best, 0.0);
}

EtaEnvelope sweep_eta(const GainOperator& op, const std::vector<double>& radii, std::size_t samples,
                      std::uint64_t seed, std::uint64_t stream_base, Score score,
                      const std::vector<double>& z, const char* inequality) {
  const std::size_t n = op.dimension();
  require(samples >= n + 2, ErrorKind::invalid_input,
          "samples per radius must be at least window size + 2");
  require(!radii.empty(), ErrorKind::invalid_input, "radius grid is empty");
  for (std::size_t k = 0; k < radii.size(); ++k)
    require(radii[k] > 0.0 && (k == 0 || radii[k] > radii[k - 1]), ErrorKind::invalid_input,
            "radii must be positive and increasing");
  EtaEnvelope env;
  env.radii = radii;
  env.seed = seed;
  const auto dirs = canonical_directions(op);
  std::vector<double> ax(n);
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const double r = radii[ri];
    SampleStream rng(seed, stream_base + ri);
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> arg;
    auto test = [&](const std::vector<double>& x) {
      op.apply_raw(x.data(), ax.data());
      const double d = score(x, ax, z);
      ++env.sample_count;
      if (d < best) {
        best = d;
        arg = x;
      }
    };
    for (const auto& d : dirs) test(scaled(d, r));
    for (std::size_t s = n + 1; s < samples; ++s) test(sphere_point(rng, n, r));
    env.eta_values.push_back(best);
    env.minimizers.push_back(arg);
    if (best < kZeroTol && env.report.verdict == Verdict::Supported) {
      env.report.verdict = Verdict::Falsified;
      env.report.witness = make_witness(arg, inequality, r, best);
    }
  }
  env.report.samples = env.sample_count;
  env.eta_monotone = isotonic_fit(env.eta_values, PoolRule::Min);
  return env;
}

}  // namespace

double dist_to_cone(const std::vector<double>& x) {
  double d = 0.0;
  for (double v : x) d = std::max(d, -v);
  return d;
}

const char* to_string(Verdict v) { return v == Verdict::Supported ? "supported" : "falsified"; }

std::vector<double> sphere_point(SampleStream& rng, std::size_t n, double r) {
  std::vector<double> x(n);
  double m = 0.0;
  for (auto& v : x) {
    v = rng.uniform(0.0, r);
    m = std::max(m, v);
  }
  if (m == 0.0) {
    x[rng.index(n)] = r;
    return x;
  }
  for (auto& v : x) v *= r / m;
  // Rescaling can leave the largest entry an ulp off r.
  *std::max_element(x.begin(), x.end()) = r;
  return x;
}

std::vector<std::vector<double>> structured_directions(const GainOperator& op, std::size_t max_cycles) {
  std::vector<std::vector<double>> out;
  if (op.family().is_banded() || op.dimension() > 64) return out;
  CycleOptions opts;
  opts.max_cycles = 10000;
  const auto rep = cycle_analysis(op, opts);
  std::vector<std::size_t> order(rep.cycles.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rep.cycles[a].max_ratio > rep.cycles[b].max_ratio;
  });
  if (order.size() > max_cycles) order.resize(max_cycles);
  for (std::size_t k : order) {
    const auto& c = rep.cycles[k];
    const double r = c.violation_r.value_or(1.0);
    auto v = normalized(cycle_witness_vector(op, c.nodes, r));
    if (sup_norm(v) > 0.0) out.push_back(std::move(v));
  }
  if (op.linear() && op.mode() == Aggregation::Sum) {
    for (const auto& comp : strong_components(op)) {
      auto v = perron_vector(op, comp);
      if (sup_norm(v) > 0.0) out.push_back(std::move(v));
    }
  }
  return out;
}

ComparisonFunction EtaEnvelope::as_function() const {
  std::vector<double> xs{0.0}, ys{0.0};
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double y = std::max(eta_monotone[k], ys.back());
    xs.push_back(radii[k]);
    ys.push_back(y);
  }
  const double tail = radii.empty() ? 0.0 : ys.back() / xs.back();
  return ComparisonFunction::piecewise_linear(std::move(xs), std::move(ys), tail);
}

EtaEnvelope estimate_eta(const GainOperator& op, const std::vector<double>& radii,
                         std::size_t samples_per_radius, std::uint64_t seed) {
  return sweep_eta(op, radii, samples_per_radius, seed, 0, dist_score, {},
                   "dist(A(x) - x, cone) < 1e-12, i.e. A(x) >= x componentwise");
}

EtaEnvelope estimate_eta_unit(const GainOperator& op, const std::vector<double>& radii,
                              std::size_t samples_per_radius, std::uint64_t seed, std::vector<double> z) {
  if (z.empty()) z.assign(op.dimension(), 1.0);
  require(z.size() == op.dimension(), ErrorKind::invalid_input, "unit vector z has the wrong size");
  for (double v : z) require(v > 0.0, ErrorKind::invalid_input, "unit vector z must be positive");
  return sweep_eta(op, radii, samples_per_radius, seed, kUnitStream, unit_score, z,
                   "A(x) >= x - eta*z for eta < 1e-12");
}

std::pair<std::vector<double>, std::pair<double, double>> mbi_observation(const GainOperator& op,
                                                                          const std::vector<double>& v) {
  const auto av = op.apply_raw(v);
  std::vector<double> w(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) w[k] = std::max(0.0, v[k] - av[k]);
  return {w, {sup_norm(w), sup_norm(v)}};
}

MbiEnvelope probe_mbi(const GainOperator& op, std::size_t sample_count, std::uint64_t seed) {
  const std::size_t n = op.dimension();
  MbiEnvelope env;
  SampleStream rng(seed, kMbiStream);
  std::vector<std::vector<double>> candidates;
  for (const auto& d : canonical_directions(op))
    for (double t : {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3}) candidates.push_back(scaled(d, t));
  for (std::size_t s = 0; s < sample_count; ++s) candidates.push_back(sphere_point(rng, n, rng.log_uniform(1e-3, 1e3)));

  for (const auto& v : candidates) {
    const auto [w, obs] = mbi_observation(op, v);
    ++env.report.samples;
    const double ratio = obs.first > 0.0 ? obs.second / obs.first : std::numeric_limits<double>::infinity();
    if (std::isfinite(ratio)) {
      env.pairs.push_back(obs);
      env.max_ratio = std::max(env.max_ratio, ratio);
    }
    if ((obs.first <= kZeroTol * obs.second || ratio > kMbiRatioLimit) &&
        env.report.verdict == Verdict::Supported) {
      env.report.verdict = Verdict::Falsified;
      env.report.witness = make_witness(v, "(id - A)(v) <= w with ||v||/||w|| > 1e6", obs.second, ratio);
    }
  }

  // Upper envelope over ‖w‖, with ties merged to their largest ‖v‖.
  auto pairs = env.pairs;
  std::sort(pairs.begin(), pairs.end());
  std::vector<double> xs{0.0}, ys{0.0};
  for (const auto& [a, b] : pairs) {
    if (a <= 0.0) continue;
    if (a == xs.back()) {
      ys.back() = std::max(ys.back(), b);
    } else {
      xs.push_back(a);
      ys.push_back(b);
    }
  }
  ys = isotonic_fit(ys, PoolRule::Max);
  double tail = 0.0;
  for (std::size_t k = 1; k < xs.size(); ++k) {
    // Keep ξ strictly increasing so it stays in K∞.
    ys[k] = std::max(ys[k], ys[k - 1] + 1e-12 * (xs[k] - xs[k - 1]));
    tail = std::max(tail, ys[k] / xs[k]);
  }
  env.xi = xs.size() > 1 ? ComparisonFunction::piecewise_linear(xs, ys, tail) : ComparisonFunction::identity();
  return env;
}

namespace {

// Random test points for the strong conditions: canonical directions at unit
// scale and at a spread of magnitudes, then random sphere points with
// log-uniform radii. ρ and ω are nonlinear in general, so scale matters.
template <class Visit>
void strong_candidates(const GainOperator& op, std::size_t samples, std::uint64_t seed,
                       std::uint64_t stream, Visit&& visit) {
  const std::size_t n = op.dimension();
  for (const auto& d : canonical_directions(op))
    for (double t : {1.0, 1e-3, 1e-1, 1e1, 1e3})
      if (visit(scaled(d, t))) return;
  SampleStream rng(seed, stream);
  for (std::size_t s = 0; s < samples; ++s)
    if (visit(sphere_point(rng, n, rng.log_uniform(1e-3, 1e3)))) return;
}

}  // namespace

ProbeReport check_strong_sgc(const GainOperator& op, const ComparisonFunction& rho, std::size_t samples,
                             std::uint64_t seed) {
  ProbeReport rep;
  const std::size_t n = op.dimension();
  std::vector<double> ax(n);
  strong_candidates(op, samples, seed, kStrongStream, [&](const std::vector<double>& x) {
    ++rep.samples;
    op.apply_raw(x.data(), ax.data());
    double slack = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      const double lhs = ax[k] + rho(ax[k]);
      slack = std::min(slack, lhs - x[k]);
      if (lhs < x[k]) return false;
    }
    rep.verdict = Verdict::Falsified;
    rep.witness = make_witness(x, "(id + rho)(A(x)) >= x componentwise", sup_norm(x), slack);
    return true;
  });
  return rep;
}

ProbeReport check_robust_strong_sgc(const GainOperator& op, const ComparisonFunction& rho,
                                    const ComparisonFunction& omega, std::size_t samples,
                                    std::uint64_t seed) {
  for (double r : log_grid(1e-6, 1e6, 61))
    require(omega(r) < r, ErrorKind::invalid_input, "omega must stay below the identity");
  ProbeReport rep;
  const std::size_t n = op.dimension();
  std::vector<double> ax(n);
  strong_candidates(op, samples, seed, kRobustStream, [&](const std::vector<double>& x) {
    ++rep.samples;
    op.apply_raw(x.data(), ax.data());
    // A perturbation at row i only changes component i, so at most one
    // component may fail before the perturbation is applied.
    std::optional<std::size_t> failing;
    std::size_t failures = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (ax[k] + rho(ax[k]) < x[k]) {
        ++failures;
        if (!failing) failing = k;
      }
    }
    if (failures > 1) return false;
    for (std::size_t i = 0; i < n; ++i) {
      if (failing && *failing != i) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const double v = ax[i] + omega(x[j]);
        if (v + rho(v) >= x[i]) {
          rep.verdict = Verdict::Falsified;
          rep.witness = make_witness(x, "(id + rho)(A(x) + omega(x_j) e_i) >= x componentwise",
                                     sup_norm(x), v + rho(v) - x[i]);
          rep.witness->i = i;
          rep.witness->j = j;
          return true;
        }
      }
    }
    return false;
  });
  return rep;
}

std::pair<ComparisonFunction, ComparisonFunction> sgc_parameters(const StrictDecayCertificate& cert) {
  // Γ_{ij}(s0) ≤ λ s0 + ω‖s0‖𝟏 ≤ μ s0 with μ = λ + (1 − λ)/4 once
  // ω = (1 − λ) min(s0) / (4‖s0‖); a strict decay point of (1 + ρ)Γ_{ij}
  // rules out Γ_{ij}(x) ≥ x for every x ≠ 0.
  const double lambda = cert.lambda;
  const double omega = (1.0 - lambda) * cert.s0.min() / (4.0 * cert.s0.sup_norm());
  const double mu = lambda + (1.0 - lambda) / 4.0;
  const double rho = (1.0 / mu - 1.0) / 2.0;
  return {ComparisonFunction::linear(rho), ComparisonFunction::linear(omega)};
}

std::pair<ComparisonFunction, ComparisonFunction> sgc_parameters(const ComparisonFunction& eta) {
  const auto quarter = eta.scaled(0.25);
  return {rho_from_eta(quarter), quarter};
}

}  // namespace smallgain
