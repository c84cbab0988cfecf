#include "smallgain/json_io.hpp"

#include <cmath>
#include <string>

#include "smallgain/error.hpp"

namespace smallgain {

namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorKind::schema, std::string("missing field '") + key + "'");
  return j.at(key);
}

double as_number(const json& v, const std::string& what) {
  if (!v.is_number()) fail(ErrorKind::schema, "'" + what + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(ErrorKind::schema, "'" + what + "' must be finite");
  return x;
}

std::vector<ComparisonFunction> terms_from_json(const json& j) {
  const auto& t = field(j, "terms");
  if (!t.is_array()) fail(ErrorKind::schema, "'terms' must be an array");
  std::vector<ComparisonFunction> out;
  for (const auto& e : t) out.push_back(function_from_json(e));
  return out;
}

std::vector<GainEntry> entries_from_json(const json& j, std::size_t n) {
  std::vector<GainEntry> out;
  const auto& g = field(j, "gains");
  if (g.is_array() && !g.empty() && g.front().is_array()) {
    // Dense matrix of gains, rows are targets.
    if (g.size() != n) fail(ErrorKind::schema, "'gains' matrix must have n rows");
    for (std::size_t i = 0; i < n; ++i) {
      if (!g[i].is_array() || g[i].size() != n) fail(ErrorKind::schema, "'gains' matrix must be n×n");
      for (std::size_t k = 0; k < n; ++k) {
        auto f = function_from_json(g[i][k]);
        if (!f.is_zero()) out.push_back({i, k, std::move(f)});
      }
    }
    return out;
  }
  if (!g.is_array()) fail(ErrorKind::schema, "'gains' must be an array");
  for (const auto& e : g) {
    const auto i = get_count(e, "i", static_cast<std::size_t>(-1));
    const auto k = get_count(e, "j", static_cast<std::size_t>(-1));
    if (i >= n || k >= n) fail(ErrorKind::schema, "gain entry index out of range");
    out.push_back({i, k, function_from_json(field(e, "gain"))});
  }
  return out;
}

}  // namespace

double get_number(const json& j, const char* key) { return as_number(field(j, key), key); }

double get_number(const json& j, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return as_number(j.at(key), key);
}

std::size_t get_count(const json& j, const char* key, std::size_t fallback) {
  if (!j.is_object() || !j.contains(key)) {
    if (fallback == static_cast<std::size_t>(-1)) fail(ErrorKind::schema, std::string("missing field '") + key + "'");
    return fallback;
  }
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    fail(ErrorKind::schema, std::string("'") + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

std::vector<double> vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) fail(ErrorKind::schema, std::string("'") + what + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(as_number(v, what));
  return out;
}

StateVector state_vector_from_json(const json& j, const char* what) {
  if (j.is_array()) return StateVector(vector_from_json(j, what));
  if (!j.is_object()) fail(ErrorKind::schema, std::string("'") + what + "' must be an array or a state object");
  auto values = vector_from_json(field(j, "values"), what);
  long lo = 0;
  if (j.contains("window")) {
    const auto w = vector_from_json(j.at("window"), "window");
    if (w.size() != 2 || w[0] != std::floor(w[0]) || w[1] - w[0] + 1 != static_cast<double>(values.size()))
      fail(ErrorKind::schema, std::string("'") + what + ".window' must be [lo, hi] matching the values");
    lo = static_cast<long>(w[0]);
  }
  Boundary b = Boundary::Periodic;
  if (j.contains("boundary")) {
    if (!j.at("boundary").is_string()) fail(ErrorKind::schema, "'boundary' must be a string");
    b = boundary_from_string(j.at("boundary").get<std::string>());
  }
  return StateVector(std::move(values), lo, b);
}

ComparisonFunction function_from_json(const json& j) {
  if (j.is_number()) return ComparisonFunction::linear(as_number(j, "gain"));
  if (!j.is_object()) fail(ErrorKind::schema, "a gain must be a number or an object");
  const auto& tv = field(j, "kind");
  if (!tv.is_string()) fail(ErrorKind::schema, "'kind' must be a string");
  const std::string t = tv.get<std::string>();
  ComparisonFunction f;
  if (t == "zero")
    f = ComparisonFunction::zero();
  else if (t == "linear")
    f = ComparisonFunction::linear(get_number(j, "k"));
  else if (t == "power")
    f = ComparisonFunction::power(get_number(j, "c"), get_number(j, "p"));
  else if (t == "saturating")
    f = ComparisonFunction::saturating(get_number(j, "c"), get_number(j, "theta"));
  else if (t == "identity")
    f = ComparisonFunction::identity();
  else if (t == "compose")
    f = ComparisonFunction::compose(function_from_json(field(j, "outer")), function_from_json(field(j, "inner")));
  else if (t == "sum")
    f = ComparisonFunction::sum(terms_from_json(j));
  else if (t == "max")
    f = ComparisonFunction::max(terms_from_json(j));
  else if (t == "min")
    f = ComparisonFunction::min(terms_from_json(j));
  else if (t == "piecewise_linear")
    f = ComparisonFunction::piecewise_linear(vector_from_json(field(j, "x"), "x"), vector_from_json(field(j, "y"), "y"),
                                             get_number(j, "tail_slope"));
  else
    fail(ErrorKind::schema, "unknown gain kind '" + t + "'");
  if (j.contains("class")) {
    if (!j.at("class").is_string()) fail(ErrorKind::schema, "'class' must be a string");
    f = f.with_class(function_class_from_string(j.at("class").get<std::string>()));
  }
  return f;
}

json function_to_json(const ComparisonFunction& f) {
  const Node& n = f.node();
  json out;
  switch (n.kind) {
    case NodeKind::Zero: out = {{"kind", "zero"}}; break;
    case NodeKind::Linear: out = {{"kind", "linear"}, {"k", n.a}}; break;
    case NodeKind::Power: out = {{"kind", "power"}, {"c", n.a}, {"p", n.b}}; break;
    case NodeKind::Saturating: out = {{"kind", "saturating"}, {"c", n.a}, {"theta", n.b}}; break;
    case NodeKind::Identity: out = {{"kind", "identity"}}; break;
    case NodeKind::Compose:
      out = {{"kind", "compose"}, {"outer", function_to_json(n.children[0])}, {"inner", function_to_json(n.children[1])}};
      break;
    case NodeKind::Sum:
    case NodeKind::Max:
    case NodeKind::Min: {
      json terms = json::array();
      for (const auto& c : n.children) terms.push_back(function_to_json(c));
      out = {{"kind", n.kind == NodeKind::Sum ? "sum" : n.kind == NodeKind::Max ? "max" : "min"}, {"terms", terms}};
      break;
    }
    case NodeKind::IdMinus: out = {{"kind", "id_minus"}, {"eta", function_to_json(n.children[0])}}; break;
    case NodeKind::Inverse: out = {{"kind", "inverse"}, {"of", function_to_json(n.children[0])}}; break;
    case NodeKind::LipschitzEnvelope:
      out = {{"kind", "lipschitz_envelope"}, {"alpha", function_to_json(n.children[0])}, {"L", n.a}};
      break;
    case NodeKind::PiecewiseLinear:
      out = {{"kind", "piecewise_linear"}, {"x", n.xs}, {"y", n.ys}, {"tail_slope", n.b}};
      break;
  }
  out["class"] = to_string(n.cls);
  return out;
}

KLFunction kl_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::schema, "a KL function must be an object");
  const double rate = get_number(j, "rate");
  if (!(rate > 0.0)) fail(ErrorKind::schema, "'rate' must be positive");
  if (j.contains("g")) return KLFunction{function_from_json(j.at("g")), rate};
  return KLFunction::exponential(get_number(j, "C"), rate);
}

json kl_to_json(const KLFunction& b) { return {{"g", function_to_json(b.g)}, {"rate", b.rate}}; }

NetworkSpec network_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::schema, "'network' must be an object");
  const std::size_t window = get_count(j, "window", 201);
  if (j.contains("preset")) {
    const auto& p = j.at("preset");
    const auto& kv = field(p, "kind");
    if (!kv.is_string()) fail(ErrorKind::schema, "'kind' must be a string");
    const std::string kind = kv.get<std::string>();
    NetworkSpec spec;
    if (kind == "linear_invariant")
      spec = linear_invariant_network(get_number(p, "a"), get_number(p, "b"), window);
    else if (kind == "cubic_max")
      spec = cubic_max_network(get_number(p, "a"), get_number(p, "b"), get_number(p, "epsilon", 1e-3), window);
    else
      fail(ErrorKind::schema, "unknown preset '" + kind + "'");
    if (j.contains("boundary")) spec.boundary = boundary_from_string(j.at("boundary").get<std::string>());
    return spec;
  }

  const auto& mv = field(j, "mode");
  if (!mv.is_string()) fail(ErrorKind::schema, "'mode' must be a string");
  const Aggregation mode = aggregation_from_string(mv.get<std::string>());
  const auto& st = field(j, "structure");
  const auto& kv = field(st, "kind");
  if (!kv.is_string()) fail(ErrorKind::schema, "'structure.kind' must be a string");
  const std::string structure = kv.get<std::string>();

  NetworkSpec spec;
  spec.window = window;
  if (j.contains("boundary")) {
    if (!j.at("boundary").is_string()) fail(ErrorKind::schema, "'boundary' must be a string");
    spec.boundary = boundary_from_string(j.at("boundary").get<std::string>());
  }
  if (structure == "finite") {
    const std::size_t n = get_count(st, "n", static_cast<std::size_t>(-1));
    spec.gains = GainFamily(FiniteGains(n, entries_from_json(st, n)), mode);
  } else if (structure == "banded") {
    const auto& o = field(st, "offsets");
    if (!o.is_object()) fail(ErrorKind::schema, "'offsets' must map offsets to gains");
    std::map<long, ComparisonFunction> by;
    for (const auto& [k, v] : o.items()) {
      long off = 0;
      try {
        std::size_t used = 0;
        off = std::stol(k, &used);
        if (used != k.size()) throw std::invalid_argument(k);
      } catch (const std::exception&) {
        fail(ErrorKind::schema, "offset keys must be integers, got '" + k + "'");
      }
      by[off] = function_from_json(v);
    }
    spec.gains = GainFamily(BandedGains(std::move(by)), mode);
  } else if (structure == "block_diagonal") {
    const auto& b = field(st, "blocks");
    if (!b.is_array()) fail(ErrorKind::schema, "'blocks' must be an array");
    BlockDiagonalGains blocks;
    for (const auto& blk : b) {
      const std::size_t n = get_count(blk, "n", static_cast<std::size_t>(-1));
      blocks.blocks.emplace_back(n, entries_from_json(blk, n));
    }
    spec.gains = GainFamily(std::move(blocks), mode);
  } else {
    fail(ErrorKind::schema, "unknown structure '" + structure + "'");
  }

  if (j.contains("iss")) {
    const auto& iss = j.at("iss");
    if (!iss.is_object()) fail(ErrorKind::schema, "'iss' must be an object");
    if (iss.contains("beta_max")) spec.data.beta_max = kl_from_json(iss.at("beta_max"));
    if (iss.contains("sigma_max")) spec.data.sigma_max = function_from_json(iss.at("sigma_max"));
    if (iss.contains("gamma_max")) spec.data.gamma_max = function_from_json(iss.at("gamma_max"));
    if (iss.contains("subsystems")) {
      if (!iss.at("subsystems").is_array()) fail(ErrorKind::schema, "'subsystems' must be an array");
      for (const auto& s : iss.at("subsystems")) {
        SubsystemISS sub;
        if (s.contains("beta")) sub.beta = kl_from_json(s.at("beta"));
        if (s.contains("sigma")) sub.sigma = function_from_json(s.at("sigma"));
        if (s.contains("gamma")) sub.gamma = function_from_json(s.at("gamma"));
        spec.data.subsystems.push_back(std::move(sub));
      }
    }
  }
  return spec;
}

OdeRun ode_run_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::schema, "'ode' must be an object");
  OdeRun run;
  const auto& kv = field(j, "kind");
  if (!kv.is_string()) fail(ErrorKind::schema, "'kind' must be a string");
  const std::string kind = kv.get<std::string>();
  if (kind == "linear_invariant") {
    run.kind = LinearInvariant{get_number(j, "a"), get_number(j, "b")};
  } else if (kind == "cubic_max") {
    run.kind = CubicMax{get_number(j, "a"), get_number(j, "b")};
  } else if (kind == "generic_banded_linear") {
    GenericBandedLinear g;
    g.decay = get_number(j, "decay", 1.0);
    const auto& o = field(j, "coefficients");
    if (!o.is_object()) fail(ErrorKind::schema, "'coefficients' must map offsets to numbers");
    for (const auto& [k, v] : o.items()) {
      try {
        g.coefficients[std::stol(k)] = as_number(v, "coefficient");
      } catch (const std::logic_error&) {
        fail(ErrorKind::schema, "offset keys must be integers, got '" + k + "'");
      }
    }
    run.kind = g;
  } else {
    fail(ErrorKind::schema, "unknown ode kind '" + kind + "'");
  }
  run.N = get_count(j, "N", 64);
  if (j.contains("boundary")) {
    if (!j.at("boundary").is_string()) fail(ErrorKind::schema, "'boundary' must be a string");
    run.boundary = boundary_from_string(j.at("boundary").get<std::string>());
  }
  if (!j.contains("x0") || j.at("x0").is_number())
    run.x0 = constant_profile(run.N, get_number(j, "x0", 1.0));
  else
    run.x0 = vector_from_json(j.at("x0"), "x0");
  if (j.contains("u")) {
    const auto& u = j.at("u");
    if (u.is_number())
      run.u = InputSignal::constant(as_number(u, "u"));
    else
      run.u = InputSignal::table(vector_from_json(field(u, "times"), "times"),
                                 vector_from_json(field(u, "values"), "values"));
  }
  run.dt = get_number(j, "dt", 1e-3);
  run.T = get_number(j, "T", 10.0);
  run.record_every = get_count(j, "record_every", 10);
  if (j.contains("relaxed_accuracy")) {
    if (!j.at("relaxed_accuracy").is_boolean()) fail(ErrorKind::schema, "'relaxed_accuracy' must be a boolean");
    run.relaxed_accuracy = j.at("relaxed_accuracy").get<bool>();
  }
  return run;
}

}  // namespace smallgain
