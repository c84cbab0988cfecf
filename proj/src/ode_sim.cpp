#include "smallgain/ode_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smallgain/error.hpp"
#include "smallgain/isotonic.hpp"

namespace smallgain {

namespace {

constexpr double kBlowUp = 1e9;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

class Rhs {
 public:
  Rhs(const OdeRun& run) : kind_(run.kind), n_(run.N), periodic_(run.boundary == Boundary::Periodic) {}

  void operator()(const std::vector<double>& x, double u, std::vector<double>& dx) const {
    std::visit(overloaded{
                   [&](const LinearInvariant& k) {
                     for (std::size_t i = 0; i < n_; ++i)
                       dx[i] = k.a * at(x, i, -1) - x[i] + k.b * at(x, i, 1) + u;
                   },
                   [&](const CubicMax& k) {
                     for (std::size_t i = 0; i < n_; ++i) {
                       const double l = at(x, i, -1), r = at(x, i, 1);
                       dx[i] = -x[i] * x[i] * x[i] + std::max({k.a * l * l * l, k.b * r * r * r, u});
                     }
                   },
                   [&](const GenericBandedLinear& k) {
                     for (std::size_t i = 0; i < n_; ++i) {
                       double s = -k.decay * x[i] + u;
                       for (const auto& [o, c] : k.coefficients) s += c * at(x, i, o);
                       dx[i] = s;
                     }
                   },
               },
               kind_);
  }

 private:
  double at(const std::vector<double>& x, std::size_t i, long offset) const {
    const long n = static_cast<long>(n_);
    long j = static_cast<long>(i) + offset;
    if (periodic_) {
      j %= n;
      if (j < 0) j += n;
      return x[static_cast<std::size_t>(j)];
    }
    return (j < 0 || j >= n) ? 0.0 : x[static_cast<std::size_t>(j)];
  }

  const NetworkKind& kind_;
  std::size_t n_;
  bool periodic_;
};

void validate_kind(const NetworkKind& kind) {
  std::visit(overloaded{
                 [](const LinearInvariant& k) {
                   require(k.a >= 0.0 && k.b >= 0.0 && std::isfinite(k.a + k.b), ErrorKind::invalid_input,
                           "a and b must be nonnegative");
                 },
                 [](const CubicMax& k) {
                   require(k.a >= 0.0 && k.b >= 0.0 && std::isfinite(k.a + k.b), ErrorKind::invalid_input,
                           "a and b must be nonnegative");
                 },
                 [](const GenericBandedLinear& k) {
                   require(std::isfinite(k.decay), ErrorKind::invalid_input, "decay must be finite");
                   for (const auto& [o, c] : k.coefficients)
                     require(o != 0 && c >= 0.0 && std::isfinite(c), ErrorKind::invalid_input,
                             "banded coefficients need nonzero offsets and nonnegative values");
                 },
             },
             kind);
}

}  // namespace

const char* kind_name(const NetworkKind& kind) {
  return std::visit(overloaded{
                        [](const LinearInvariant&) { return "linear_invariant"; },
                        [](const CubicMax&) { return "cubic_max"; },
                        [](const GenericBandedLinear&) { return "generic_banded_linear"; },
                    },
                    kind);
}

InputSignal InputSignal::constant(double u) { return table({0.0}, {u}); }

InputSignal InputSignal::table(std::vector<double> times, std::vector<double> values) {
  require(!times.empty() && times.size() == values.size(), ErrorKind::invalid_input,
          "input table needs matching, nonempty times and values");
  require(times.front() == 0.0, ErrorKind::invalid_input, "input table must start at t = 0");
  for (std::size_t k = 1; k < times.size(); ++k)
    require(times[k] > times[k - 1], ErrorKind::invalid_input, "input times must increase");
  for (double v : values)
    require(std::isfinite(v) && v >= 0.0, ErrorKind::invalid_input, "inputs must be nonnegative");
  InputSignal s;
  s.times = std::move(times);
  s.values = std::move(values);
  return s;
}

double InputSignal::at(double t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return values.front();
  return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

double InputSignal::sup_norm() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> constant_profile(std::size_t N, double value) { return std::vector<double>(N, value); }

OdeTrajectory simulate(const OdeRun& run) {
  validate_kind(run.kind);
  require(run.N >= 3, ErrorKind::invalid_input, "window must have at least 3 positions");
  require(run.x0.size() == run.N, ErrorKind::invalid_input, "x0 size must equal N");
  require(run.dt > 0.0 && std::isfinite(run.dt), ErrorKind::invalid_input, "dt must be positive");
  require(run.dt <= 0.01 || run.relaxed_accuracy, ErrorKind::invalid_input,
          "dt above 0.01 needs relaxed_accuracy");
  require(run.T >= 0.0 && std::isfinite(run.T), ErrorKind::invalid_input, "T must be nonnegative");
  require(run.record_every >= 1, ErrorKind::invalid_input, "record_every must be at least 1");
  for (double v : run.x0)
    require(std::isfinite(v) && v >= 0.0, ErrorKind::invalid_input, "x0 must be nonnegative");

  const std::size_t steps = run.T == 0.0 ? 0 : std::max<std::size_t>(1, std::llround(run.T / run.dt));
  const double h = steps ? run.T / static_cast<double>(steps) : 0.0;
  const Rhs f(run);
  const std::size_t n = run.N;

  OdeTrajectory traj;
  traj.x0_norm = sup_norm(run.x0);
  traj.input_sup = run.u.sup_norm();
  if (std::holds_alternative<CubicMax>(run.kind))
    traj.accuracy_note = "max term is non-smooth; RK4 order holds only away from switching surfaces";

  auto record = [&](double t, const std::vector<double>& x) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.sup_norms.push_back(sup_norm(x));
  };

  std::vector<double> x = run.x0, k1(n), k2(n), k3(n), k4(n), tmp(n);
  record(0.0, x);
  for (std::size_t s = 1; s <= steps; ++s) {
    const double t = static_cast<double>(s - 1) * h;
    const double u0 = run.u.at(t), uh = run.u.at(t + 0.5 * h), u1 = run.u.at(t + h);
    f(x, u0, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    f(tmp, uh, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    f(tmp, uh, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    f(tmp, u1, k4);
    for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    const double norm = sup_norm(x);
    const double tn = static_cast<double>(s) * h;
    if (!std::isfinite(norm) || norm > kBlowUp) {
      traj.blew_up = true;
      traj.escape_time = tn;
      break;
    }
    if (s % run.record_every == 0 || s == steps) record(tn, x);
  }
  return traj;
}

double reference_profile(const NetworkKind& kind, double x_star, double t) {
  require(x_star >= 0.0 && t >= 0.0, ErrorKind::invalid_input, "x* and t must be nonnegative");
  return std::visit(
      overloaded{
          [&](const LinearInvariant& k) { return x_star * std::exp((k.a + k.b - 1.0) * t); },
          [&](const CubicMax& k) {
            // ż = (m − 1) z³
            const double m = std::max(k.a, k.b);
            if (m == 1.0 || x_star == 0.0) return x_star;
            const double d = 1.0 + 2.0 * (1.0 - m) * x_star * x_star * t;
            if (d <= 0.0)
              fail(ErrorKind::unsupported_reference, "constant profile has escaped before t");
            return x_star / std::sqrt(d);
          },
          [&](const GenericBandedLinear&) -> double {
            fail(ErrorKind::unsupported_reference, "no closed form for generic banded networks");
          },
      },
      kind);
}

IssEnvelope fit_iss_envelope(const std::vector<OdeTrajectory>& runs) {
  IssEnvelope env;

  // β from u ≡ 0 runs: pooled regression of log(‖x(t)‖/‖x0‖) on t.
  double st = 0, sy = 0, stt = 0, sty = 0, count = 0;
  bool any_decay = false;
  for (const auto& r : runs) {
    if (r.input_sup != 0.0 || r.x0_norm == 0.0) continue;
    any_decay = true;
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      if (r.sup_norms[k] <= 0.0) continue;
      const double y = std::log(r.sup_norms[k] / r.x0_norm), t = r.times[k];
      st += t;
      sy += y;
      stt += t * t;
      sty += t * y;
      count += 1;
    }
  }
  double lambda = 0.0;
  if (count >= 2) {
    const double var = stt - st * st / count;
    if (var > 0.0) lambda = std::max(0.0, -(sty - st * sy / count) / var);
  }
  double C = 0.0;
  for (const auto& r : runs) {
    if (r.input_sup != 0.0 || r.x0_norm == 0.0) continue;
    for (std::size_t k = 0; k < r.times.size(); ++k)
      C = std::max(C, r.sup_norms[k] / r.x0_norm * std::exp(lambda * r.times[k]));
  }
  if (!any_decay) lambda = 1.0;

  // γ from x0 = 0 runs.
  std::map<double, double> peak;
  for (const auto& r : runs) {
    if (r.x0_norm != 0.0 || r.input_sup == 0.0) continue;
    double m = 0.0;
    for (double v : r.sup_norms) m = std::max(m, v);
    peak[r.input_sup] = std::max(peak[r.input_sup], m);
  }
  ComparisonFunction gamma;
  if (!peak.empty()) {
    std::vector<double> xs{0.0}, raw;
    for (const auto& [u, m] : peak) {
      xs.push_back(u);
      raw.push_back(m);
    }
    const auto up = isotonic_fit(raw, PoolRule::Max);
    std::vector<double> ys{0.0};
    ys.insert(ys.end(), up.begin(), up.end());
    gamma = ComparisonFunction::piecewise_linear(xs, ys, ys.back() / xs.back());
  }

  for (std::size_t round = 0;; ++round) {
    env.validated = true;
    env.violating_run.reset();
    env.max_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t ri = 0; ri < runs.size(); ++ri) {
      const auto& r = runs[ri];
      const double forced = gamma(r.input_sup);
      for (std::size_t k = 0; k < r.times.size(); ++k) {
        const double excess = r.sup_norms[k] - (C * r.x0_norm * std::exp(-lambda * r.times[k]) + forced);
        env.max_excess = std::max(env.max_excess, excess);
        if (excess > 1e-6 && env.validated) {
          env.validated = false;
          env.violating_run = ri;
        }
      }
      if (r.blew_up && env.validated) {
        env.validated = false;
        env.violating_run = ri;
      }
    }
    env.rounds = round;
    if (env.validated || round == 20) break;
    C *= 1.05;
    gamma = gamma.scaled(1.05);
  }
  if (runs.empty()) env.max_excess = 0.0;
  env.C = C;
  env.lambda = lambda;
  env.beta = KLFunction{ComparisonFunction::linear(C), lambda};
  env.gamma = gamma;
  return env;
}

const char* to_string(ScanClass c) {
  switch (c) {
    case ScanClass::Decay: return "decay";
    case ScanClass::NonDecay: return "non-decay";
    case ScanClass::BlowUp: return "blow-up";
  }
  return "?";
}

ScanTable threshold_scan(const OdeRun& tmpl, const std::vector<std::pair<double, double>>& grid) {
  const bool linear = std::holds_alternative<LinearInvariant>(tmpl.kind);
  require(linear || std::holds_alternative<CubicMax>(tmpl.kind), ErrorKind::invalid_input,
          "threshold scans need a linear_invariant or cubic_max template");
  ScanTable table;
  for (const auto& [a, b] : grid) {
    OdeRun run = tmpl;
    ScanRow row;
    row.a = a;
    row.b = b;
    if (linear) {
      run.kind = LinearInvariant{a, b};
      row.criterion = a + b;
    } else {
      run.kind = CubicMax{a, b};
      row.criterion = std::max(a, b);
    }
    row.predicted_decay = row.criterion < 1.0;
    const auto traj = simulate(run);
    row.initial_norm = traj.x0_norm;
    row.final_norm = traj.sup_norms.back();
    if (traj.blew_up)
      row.observed = ScanClass::BlowUp;
    else if (row.final_norm < 0.99 * row.initial_norm)
      row.observed = ScanClass::Decay;
    else
      row.observed = ScanClass::NonDecay;
    row.agree = row.predicted_decay == (row.observed == ScanClass::Decay);
    if (row.observed == ScanClass::Decay)
      table.last_decay = std::max(table.last_decay.value_or(row.criterion), row.criterion);
    else
      table.first_non_decay = std::min(table.first_non_decay.value_or(row.criterion), row.criterion);
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace smallgain
