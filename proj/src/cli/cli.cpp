#include "smallgain/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "smallgain/battery.hpp"
#include "smallgain/cone_analysis.hpp"
#include "smallgain/discrete_sim.hpp"
#include "smallgain/error.hpp"
#include "smallgain/json_io.hpp"
#include "smallgain/ode_sim.hpp"
#include "smallgain/sg_verifier.hpp"

namespace smallgain::cli {

namespace {

struct Context {
  json config;
  std::string command;
  std::optional<std::uint64_t> seed;
  Format format = Format::Json;
};

// What a command hands back: the report body, the verdict string and exit code,
// and for simulations the CSV body.
struct CommandResult {
  json report;
  std::string verdict;
  int exit_code = kOk;
  std::string csv;
};

std::uint64_t need_seed(const Context& ctx) {
  if (!ctx.seed) fail(ErrorKind::schema, "command '" + ctx.command + "' samples and needs a seed (--seed or \"seed\")");
  return *ctx.seed;
}

const json& section(const Context& ctx, const char* key) {
  if (!ctx.config.contains(key)) fail(ErrorKind::schema, std::string("missing section '") + key + "'");
  return ctx.config.at(key);
}

json budgets(const Context& ctx) {
  if (!ctx.config.contains("budgets")) return json::object();
  const auto& b = ctx.config.at("budgets");
  if (!b.is_object()) fail(ErrorKind::schema, "'budgets' must be an object");
  return b;
}

void append_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

json optional_size(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }
json optional_double(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---- analyze ---------------------------------------------------------------

CommandResult cmd_analyze(const Context& ctx) {
  const auto spec = network_from_json(section(ctx, "network"));
  const auto b = budgets(ctx);
  VerifyBudgets vb;
  vb.seed = need_seed(ctx);
  vb.samples = get_count(b, "samples", vb.samples);
  vb.k_max = get_count(b, "k_max", vb.k_max);
  const auto v = verify(spec, vb);

  json checks = json::array();
  for (const auto& c : v.checks)
    checks.push_back({{"name", c.name}, {"status", to_string(c.status)}, {"detail", c.detail}, {"witness", c.witness}});
  CommandResult res;
  res.report = {{"checks", checks},
                {"conclusion", to_string(v.conclusion)},
                {"grade", v.grade},
                {"counterevidence", v.counterevidence},
                {"spectral_value", optional_double(v.spectral_value)},
                {"cycle_witness", v.cycle_witness ? json(*v.cycle_witness) : json(nullptr)},
                {"cycle_value", optional_double(v.cycle_value)},
                {"xi", v.xi ? function_to_json(*v.xi) : json(nullptr)},
                {"sigma", v.sigma ? function_to_json(*v.sigma) : json(nullptr)},
                {"gamma", v.gamma ? function_to_json(*v.gamma) : json(nullptr)}};
  if (v.conclusion != Conclusion::Inconclusive) {
    res.verdict = to_string(v.conclusion);
  } else {
    res.verdict = v.counterevidence ? "falsified" : "inconclusive";
    res.exit_code = kFalsified;
  }
  return res;
}

// ---- spectral --------------------------------------------------------------

CommandResult cmd_spectral(const Context& ctx) {
  const auto spec = network_from_json(section(ctx, "network"));
  const auto op = spec.make_operator();
  const auto b = budgets(ctx);
  const auto est = spectral_radius(op, get_number(b, "tol", 1e-12), get_count(b, "n_max", 10000));
  CommandResult res;
  res.report = {{"value", est.value},
                {"method", est.method},
                {"iterations", est.iterations},
                {"converged", est.converged},
                {"period", est.period},
                {"upper_bound", est.running_inf.empty() ? json(nullptr) : json(est.running_inf.back())},
                {"dimension", op.dimension()}};
  if (!spec.gains.is_banded()) {
    const auto cyc = cycle_analysis(op);
    json c = {{"count", cyc.cycles.size()},
              {"all_contractions", cyc.all_contractions},
              {"truncated", cyc.truncated},
              {"max_product", optional_double(cyc.max_product)}};
    if (cyc.witness) {
      const auto& rec = cyc.cycles[*cyc.witness];
      c["witness"] = {{"nodes", rec.nodes}, {"product", rec.product}, {"max_ratio", rec.max_ratio}};
    }
    res.report["cycles"] = c;
  }
  const bool sub = est.value < 1.0;
  res.verdict = sub ? "subcritical" : "supercritical";
  res.exit_code = sub ? kOk : kFalsified;
  return res;
}

// ---- closure ---------------------------------------------------------------

CommandResult cmd_closure(const Context& ctx) {
  const auto spec = network_from_json(section(ctx, "network"));
  const auto op = spec.make_operator();
  const auto b = budgets(ctx);
  const auto s = ctx.config.contains("s") ? op.make(state_vector_from_json(ctx.config.at("s"), "s").values()) : op.ones();
  const auto k = kleene_star(op, s, get_number(b, "tol", 1e-12), get_count(b, "k_max", 10000));
  CommandResult res;
  res.report = {{"s", s.values()},
                {"closure", k.closure.values()},
                {"status", to_string(k.status)},
                {"iterations", k.iterations}};
  res.verdict = to_string(k.status);
  res.exit_code = k.status == KleeneStatus::Converged ? kOk : kNumericFailure;
  if (ctx.config.contains("epsilon")) {
    const double eps = get_number(ctx.config, "epsilon");
    try {
      const auto cert = strict_decay_point(op, eps);
      res.report["decay_point"] = {{"epsilon", eps},
                                   {"s0", cert.s0.values()},
                                   {"lambda", cert.lambda},
                                   {"residual", cert.residual},
                                   {"iterations", cert.iterations}};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::epsilon_too_large) throw;
      res.report["decay_point"] = {{"epsilon", eps}, {"error", e.what()}};
      if (res.exit_code == kOk) {
        res.verdict = "epsilon-too-large";
        res.exit_code = kFalsified;
      }
    }
  }
  return res;
}

// ---- simulate-discrete -----------------------------------------------------

MonotoneMap map_from_config(const json& cfg) {
  if (cfg.contains("matrix")) {
    const auto& m = cfg.at("matrix");
    if (!m.is_array()) fail(ErrorKind::schema, "'matrix' must be an array of rows");
    std::vector<std::vector<double>> rows;
    for (const auto& r : m) rows.push_back(vector_from_json(r, "matrix"));
    for (const auto& r : rows)
      if (r.size() != rows.size()) fail(ErrorKind::schema, "'matrix' must be square");
    return MonotoneMap::matrix(std::move(rows));
  }
  if (cfg.contains("network")) return MonotoneMap(network_from_json(cfg.at("network")).make_operator());
  fail(ErrorKind::schema, "simulate-discrete needs 'matrix' or 'network'");
}

StateVector state_from_json(const MonotoneMap& map, const json& j, const char* what) {
  if (j.is_number()) return map.ones().scaled(get_number(json{{what, j}}, what));
  const auto v = state_vector_from_json(j, what);
  if (v.size() != map.dimension()) fail(ErrorKind::schema, std::string("'") + what + "' has the wrong length");
  return map.make(v.values());
}

CommandResult cmd_simulate_discrete(const Context& ctx) {
  const auto& cfg = ctx.config;
  const auto map = map_from_config(cfg);
  const auto x0 = state_from_json(map, cfg.contains("x0") ? cfg.at("x0") : json(0.0), "x0");
  DiscreteInput u = DiscreteInput::constant_input(map.zeros());
  if (cfg.contains("u")) {
    const auto& uj = cfg.at("u");
    if (uj.is_object()) {
      std::vector<StateVector> seq;
      const auto& s = uj.contains("sequence") ? uj.at("sequence") : json();
      if (!s.is_array()) fail(ErrorKind::schema, "'u.sequence' must be an array");
      for (const auto& e : s) seq.push_back(state_from_json(map, e, "u"));
      u = DiscreteInput::sequence(std::move(seq));
    } else {
      u = DiscreteInput::constant_input(state_from_json(map, uj, "u"));
    }
  }
  const std::size_t K = get_count(cfg, "K", 50);
  const auto traj = iterate(map, x0, u, K);

  CommandResult res;
  json norms = json::array();
  for (const auto& s : traj.states) norms.push_back(s.sup_norm());
  res.report = {{"K", K},
                {"steps", traj.states.size() - 1},
                {"overflow", traj.overflow},
                {"sup_norms", norms},
                {"final_state", traj.states.back().values()}};
  bool ok = true;

  if (cfg.contains("damped")) {
    const std::size_t runs = get_count(cfg, "damped", 0);
    const auto seed = need_seed(ctx);
    bool dominated = true;
    for (std::size_t r = 0; r < runs; ++r) {
      const auto d = damped_solution(map, x0, u, K, seed + r);
      for (std::size_t k = 0; k < d.states.size() && k < traj.states.size(); ++k)
        if (!leq(d.states[k].values(), traj.states[k].values(), 1e-12)) dominated = false;
    }
    res.report["damped"] = {{"runs", runs}, {"dominated", dominated}};
    ok = ok && dominated;
  }
  if (cfg.value("eiss", false)) {
    const auto cert = fit_eiss_certificate(map);
    const auto chk = check_eiss(traj, cert);
    res.report["eiss"] = {{"M", cert.M},
                          {"a", cert.a},
                          {"gamma", function_to_json(cert.gamma)},
                          {"pass", chk.pass},
                          {"first_violation", optional_size(chk.first_violation)},
                          {"max_excess", chk.max_excess}};
    ok = ok && chk.pass;
  }
  if (cfg.contains("lyapunov")) {
    const auto V = build_lyapunov(map, get_number(cfg.at("lyapunov"), "eta"));
    const auto chk = check_dissipation(V, traj);
    res.report["lyapunov"] = {{"eta", V.eta()},
                              {"N", V.truncation()},
                              {"C", V.C()},
                              {"psi", V.psi()},
                              {"V_x0", V(x0)},
                              {"pass", chk.pass},
                              {"first_violation", optional_size(chk.first_violation)},
                              {"max_excess", chk.max_excess}};
    ok = ok && chk.pass;
  }
  if (cfg.contains("mlim")) {
    const auto& mj = cfg.at("mlim");
    MlimOptions mo;
    mo.seed = need_seed(ctx);
    mo.k_max = get_count(mj, "k_max", mo.k_max);
    if (mj.contains("eps_grid")) mo.eps_grid = vector_from_json(mj.at("eps_grid"), "eps_grid");
    const auto w = state_from_json(map, mj.contains("w") ? mj.at("w") : json(0.0), "w");
    ComparisonFunction xi;
    if (mj.contains("xi")) {
      xi = function_from_json(mj.at("xi"));
    } else if (const auto cert = map.decay_certificate()) {
      xi = ComparisonFunction::linear(cert->s0.sup_norm() / ((1.0 - cert->lambda) * cert->s0.min()));
    } else {
      fail(ErrorKind::schema, "'mlim.xi' is required when the map has no decay certificate");
    }
    const auto m = mlim_probe(map, w, xi, mo);
    json att = json::array();
    for (const auto& a : m.attainment)
      att.push_back({{"epsilon", a.epsilon}, {"N", optional_size(a.N)}, {"norm_at_N", a.norm_at_N}});
    res.report["mlim"] = {{"evidence", to_string(m.evidence)},
                          {"seed_method", m.seed_method},
                          {"x0", m.x0 ? json(m.x0->values()) : json(nullptr)},
                          {"bound", m.bound},
                          {"xi", function_to_json(xi)},
                          {"attainment", att},
                          {"solutions_tested", m.solutions_tested},
                          {"negative_solution", m.negative_solution},
                          {"negative_vector", m.negative_vector}};
    ok = ok && m.evidence == MlimEvidence::Positive;
  }

  if (traj.overflow) {
    res.verdict = "overflow";
    res.exit_code = kNumericFailure;
  } else {
    res.verdict = ok ? "completed" : "violated";
    res.exit_code = ok ? kOk : kFalsified;
  }

  std::string& csv = res.csv;
  csv = "k,i,x_i,u_i\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const auto& x = traj.states[k];
    for (std::size_t i = 0; i < x.size(); ++i) {
      csv += std::to_string(k) + "," + std::to_string(x.lo() + static_cast<long>(i)) + ",";
      append_number(csv, x[i]);
      csv += ",";
      if (k < traj.inputs.size()) append_number(csv, traj.inputs[k][i]);
      csv += "\n";
    }
  }
  return res;
}

// ---- simulate-ode / threshold-scan -----------------------------------------

json ode_config_echo(const OdeRun& run) {
  return {{"kind", kind_name(run.kind)}, {"N", run.N},   {"boundary", to_string(run.boundary)},
          {"dt", run.dt},                {"T", run.T},   {"record_every", run.record_every},
          {"input_sup", run.u.sup_norm()}};
}

bool constant_profile_run(const OdeRun& run) {
  if (std::holds_alternative<GenericBandedLinear>(run.kind) || run.u.sup_norm() != 0.0) return false;
  for (double v : run.x0)
    if (v != run.x0.front()) return false;
  return true;
}

CommandResult cmd_simulate_ode(const Context& ctx) {
  const auto run = ode_run_from_json(section(ctx, "ode"));
  const auto traj = simulate(run);
  CommandResult res;
  res.report = {{"run", ode_config_echo(run)},
                {"times", traj.times},
                {"sup_norms", traj.sup_norms},
                {"final_sup_norm", traj.sup_norms.back()},
                {"blew_up", traj.blew_up},
                {"escape_time", optional_double(traj.escape_time)},
                {"accuracy_note", traj.accuracy_note}};
  if (constant_profile_run(run)) {
    double worst = 0.0;
    bool available = true;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      try {
        worst = std::max(worst, std::abs(traj.sup_norms[k] - reference_profile(run.kind, run.x0.front(), traj.times[k])));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::unsupported_reference) throw;
        available = false;
        break;
      }
    }
    res.report["reference_max_abs_error"] = available ? json(worst) : json(nullptr);
  }
  if (ctx.config.contains("envelope")) {
    const auto& ej = ctx.config.at("envelope");
    std::vector<OdeTrajectory> runs;
    const auto x0_levels = ej.contains("x0_levels") ? vector_from_json(ej.at("x0_levels"), "x0_levels")
                                                    : std::vector<double>{0.5, 1.0, 2.0};
    const auto u_levels = ej.contains("u_levels") ? vector_from_json(ej.at("u_levels"), "u_levels")
                                                  : std::vector<double>{0.05, 0.1, 0.2};
    for (double x : x0_levels) {
      OdeRun r = run;
      r.x0 = constant_profile(run.N, x);
      r.u = InputSignal::constant(0.0);
      runs.push_back(simulate(r));
    }
    for (double u : u_levels) {
      OdeRun r = run;
      r.x0 = constant_profile(run.N, 0.0);
      r.u = InputSignal::constant(u);
      runs.push_back(simulate(r));
    }
    const auto env = fit_iss_envelope(runs);
    res.report["envelope"] = {{"C", env.C},
                              {"lambda", env.lambda},
                              {"gamma", function_to_json(env.gamma)},
                              {"validated", env.validated},
                              {"rounds", env.rounds},
                              {"violating_run", optional_size(env.violating_run)},
                              {"max_excess", env.max_excess}};
  }
  if (traj.blew_up) {
    res.verdict = "blow-up";
    res.exit_code = kNumericFailure;
  } else {
    res.verdict = "completed";
  }
  std::string& csv = res.csv;
  csv = "t,i,x_i\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    for (std::size_t i = 0; i < traj.states[k].size(); ++i) {
      append_number(csv, traj.times[k]);
      csv += "," + std::to_string(i) + ",";
      append_number(csv, traj.states[k][i]);
      csv += "\n";
    }
  }
  return res;
}

CommandResult cmd_threshold_scan(const Context& ctx) {
  const auto tmpl = ode_run_from_json(section(ctx, "ode"));
  const auto& gj = section(ctx, "grid");
  if (!gj.is_array()) fail(ErrorKind::schema, "'grid' must be an array of [a, b] pairs");
  std::vector<std::pair<double, double>> grid;
  for (const auto& p : gj) {
    const auto v = vector_from_json(p, "grid");
    if (v.size() != 2) fail(ErrorKind::schema, "'grid' entries must be [a, b]");
    grid.emplace_back(v[0], v[1]);
  }
  const auto table = threshold_scan(tmpl, grid);
  json rows = json::array();
  bool all = true;
  for (const auto& r : table.rows) {
    rows.push_back({{"a", r.a},
                    {"b", r.b},
                    {"criterion", r.criterion},
                    {"predicted", r.predicted_decay ? "decay" : "non-decay"},
                    {"observed", to_string(r.observed)},
                    {"initial_norm", r.initial_norm},
                    {"final_norm", r.final_norm},
                    {"agree", r.agree}});
    all = all && r.agree;
  }
  CommandResult res;
  res.report = {{"template", ode_config_echo(tmpl)},
                {"rows", rows},
                {"last_decay", optional_double(table.last_decay)},
                {"first_non_decay", optional_double(table.first_non_decay)}};
  res.verdict = all ? "consistent" : "inconsistent";
  res.exit_code = all ? kOk : kFalsified;
  return res;
}

// ---- battery ---------------------------------------------------------------

json battery_json(const BatteryReport& b) {
  json probes = json::array();
  for (const auto& p : b.probes) probes.push_back({{"name", p.name}, {"supports", p.supports}, {"detail", p.detail}});
  return {{"probes", probes},
          {"agree", b.agree},
          {"consensus", b.consensus},
          {"certificate", b.certificate},
          {"spectral_value", b.spectral_value}};
}

CommandResult cmd_battery(const Context& ctx) {
  const auto seed = need_seed(ctx);
  const auto bj = budgets(ctx);
  BatteryOptions bo;
  bo.seed = seed;
  bo.samples = get_count(bj, "samples", bo.samples);
  bo.k_max = get_count(bj, "k_max", bo.k_max);
  CommandResult res;
  json instances = json::array();
  std::size_t disagreements = 0;

  if (ctx.config.contains("network")) {
    const auto op = network_from_json(ctx.config.at("network")).make_operator();
    const auto b = run_battery(op, bo);
    instances.push_back(battery_json(b));
    if (!b.agree) ++disagreements;
  } else {
    const auto& rj = section(ctx, "random");
    const std::size_t count = get_count(rj, "count", 50);
    const std::size_t n = get_count(rj, "n", 3);
    std::vector<Aggregation> modes{Aggregation::Max, Aggregation::Sum};
    if (rj.contains("modes")) {
      modes.clear();
      for (const auto& m : rj.at("modes")) modes.push_back(aggregation_from_string(m.get<std::string>()));
      if (modes.empty()) fail(ErrorKind::schema, "'random.modes' is empty");
    }
    const auto sub = rj.contains("sub_range") ? vector_from_json(rj.at("sub_range"), "sub_range")
                                              : std::vector<double>{0.2, 0.8};
    const auto sup = rj.contains("super_range") ? vector_from_json(rj.at("super_range"), "super_range")
                                                : std::vector<double>{1.2, 2.0};
    if (sub.size() != 2 || sup.size() != 2) fail(ErrorKind::schema, "ranges must be [lo, hi]");
    SampleStream targets(seed, 0x7461726765ULL);
    for (std::size_t k = 0; k < count; ++k) {
      const Aggregation mode = modes[k % modes.size()];
      const bool subcritical = k < (count + 1) / 2;
      const auto& range = subcritical ? sub : sup;
      const double target = targets.uniform(range[0], range[1]);
      const auto family = random_linear_family(seed, k, n, mode, target);
      BatteryOptions o = bo;
      o.seed = seed + 1000003ULL * (k + 1);
      const auto b = run_battery(GainOperator(family), o);
      json inst = battery_json(b);
      inst["mode"] = to_string(mode);
      inst["target_r"] = target;
      inst["oracle"] = subcritical ? "subcritical" : "supercritical";
      inst["matches_oracle"] = b.agree && b.consensus == subcritical;
      json m = json::array();
      const auto& g = std::get<FiniteGains>(family.structure());
      for (std::size_t i = 0; i < n; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < n; ++j) row.push_back(g.at(i, j).linear_coefficient().value_or(0.0));
        m.push_back(row);
      }
      inst["matrix"] = m;
      if (!(b.agree && b.consensus == subcritical)) ++disagreements;
      instances.push_back(inst);
    }
  }
  res.report = {{"instances", instances}, {"disagreements", disagreements}};
  res.verdict = disagreements == 0 ? "agree" : "disagree";
  res.exit_code = disagreements == 0 ? kOk : kNumericFailure;
  return res;
}

int exit_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::epsilon_too_large:
    case ErrorKind::eta_too_large:
      return kFalsified;
    case ErrorKind::numeric_failure:
    case ErrorKind::range_error:
      return kNumericFailure;
    default:
      return kConfigError;
  }
}

json envelope(const Context& ctx) {
  return {{"schema", kSchemaVersion},
          {"tool", "smallgain"},
          {"version", kVersion},
          {"command", ctx.command},
          {"seed", ctx.seed ? json(*ctx.seed) : json(nullptr)},
          {"config", ctx.config}};
}

}  // namespace

Outcome execute(const json& config, std::optional<std::uint64_t> seed, Format format, const std::string& command) {
  Outcome out;
  Context ctx;
  ctx.config = config;
  ctx.format = format;
  try {
    if (!config.is_object()) fail(ErrorKind::schema, "config must be a JSON object");
    if (config.contains("schema") && config.at("schema") != kSchemaVersion)
      fail(ErrorKind::schema, "unsupported schema version");
    std::string cfg_command;
    if (config.contains("command")) {
      if (!config.at("command").is_string()) fail(ErrorKind::schema, "'command' must be a string");
      cfg_command = config.at("command").get<std::string>();
    }
    if (!command.empty() && !cfg_command.empty() && command != cfg_command)
      fail(ErrorKind::schema, "command '" + command + "' conflicts with config command '" + cfg_command + "'");
    ctx.command = command.empty() ? cfg_command : command;
    if (ctx.command.empty()) fail(ErrorKind::schema, "no command given");
    if (seed)
      ctx.seed = seed;
    else if (config.contains("seed")) {
      if (!config.at("seed").is_number_unsigned()) fail(ErrorKind::schema, "'seed' must be a nonnegative integer");
      ctx.seed = config.at("seed").get<std::uint64_t>();
    }

    CommandResult res;
    if (ctx.command == "analyze")
      res = cmd_analyze(ctx);
    else if (ctx.command == "spectral")
      res = cmd_spectral(ctx);
    else if (ctx.command == "closure")
      res = cmd_closure(ctx);
    else if (ctx.command == "simulate-discrete")
      res = cmd_simulate_discrete(ctx);
    else if (ctx.command == "simulate-ode")
      res = cmd_simulate_ode(ctx);
    else if (ctx.command == "threshold-scan")
      res = cmd_threshold_scan(ctx);
    else if (ctx.command == "battery")
      res = cmd_battery(ctx);
    else
      fail(ErrorKind::schema, "unknown command '" + ctx.command + "'");

    if (format == Format::Csv && res.csv.empty())
      fail(ErrorKind::schema, "--format csv is only available for simulate-discrete and simulate-ode");
    out.exit_code = res.exit_code;
    if (format == Format::Csv) {
      out.output = std::move(res.csv);
    } else {
      json env = envelope(ctx);
      env["report"] = std::move(res.report);
      env["verdict"] = res.verdict;
      out.output = env.dump(2) + "\n";
    }
    if (res.exit_code != kOk) out.diagnostics = ctx.command + ": verdict " + res.verdict;
  } catch (const Error& e) {
    out.exit_code = exit_for(e.kind());
    out.diagnostics = e.what();
    if (out.exit_code != kConfigError && format == Format::Json) {
      json env = envelope(ctx);
      env["report"] = {{"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}}};
      env["verdict"] = "error";
      out.output = env.dump(2) + "\n";
    }
  } catch (const json::exception& e) {
    out.exit_code = kConfigError;
    out.diagnostics = std::string("schema-error: ") + e.what();
  }
  return out;
}

Outcome execute_text(const std::string& text, std::optional<std::uint64_t> seed, Format format,
                     const std::string& command) {
  json config;
  try {
    config = json::parse(text);
  } catch (const json::parse_error& e) {
    Outcome out;
    out.exit_code = kConfigError;
    out.diagnostics = std::string("malformed JSON: ") + e.what();
    return out;
  }
  return execute(config, seed, format, command);
}

namespace {

void write_atomic(const std::string& path, const std::string& data) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string());
    f << data;
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Small-gain analysis of monotone gain networks"};
  app.set_version_flag("--version", std::string(kVersion));
  std::string command, config_path, out_path, format = "json";
  std::optional<std::uint64_t> seed;
  app.add_option("command", command,
                 "analyze | spectral | closure | simulate-discrete | simulate-ode | threshold-scan | battery");
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--out", out_path, "output file (stdout when omitted)");
  app.add_option("--seed", seed, "seed for sampling commands");
  app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  const auto start = std::chrono::steady_clock::now();
  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "cannot read config " << config_path << "\n";
    return kConfigError;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const auto outcome = execute_text(buf.str(), seed, format == "csv" ? Format::Csv : Format::Json, command);

  if (!outcome.output.empty()) {
    if (out_path.empty()) {
      std::cout << outcome.output;
    } else {
      try {
        write_atomic(out_path, outcome.output);
      } catch (const std::exception& e) {
        std::cerr << "output: " << e.what() << "\n";
        return kConfigError;
      }
    }
  }
  if (!outcome.diagnostics.empty()) std::cerr << outcome.diagnostics << "\n";
  const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
  std::cerr << "wall time " << wall.count() << " s\n";
  return outcome.exit_code;
}

}  // namespace smallgain::cli
