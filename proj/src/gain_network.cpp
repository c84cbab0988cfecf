#include "smallgain/gain_network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <type_traits>

#include "smallgain/error.hpp"

namespace smallgain {

const char* to_string(Aggregation m) { return m == Aggregation::Max ? "max" : "sum"; }

Aggregation aggregation_from_string(const std::string& s) {
  if (s == "max") return Aggregation::Max;
  if (s == "sum") return Aggregation::Sum;
  fail(ErrorKind::schema, "unknown aggregation mode '" + s + "'");
}

namespace {

void require_gain_class(const ComparisonFunction& g) {
  const FunctionClass c = g.declared_class();
  require(c == FunctionClass::Zero || implies(c, FunctionClass::K), ErrorKind::invalid_input,
          "gains must be class K or zero, got " + describe(g));
}

}  // namespace

FiniteGains::FiniteGains(std::size_t n) : n_(n), grid_(n * n) {}

FiniteGains::FiniteGains(std::size_t n, const std::vector<GainEntry>& entries) : FiniteGains(n) {
  for (const auto& e : entries) set(e.i, e.j, e.gain);
}

void FiniteGains::set(std::size_t i, std::size_t j, ComparisonFunction gain) {
  require(i < n_ && j < n_, ErrorKind::invalid_input, "gain index out of range");
  require(i != j || gain.is_zero(), ErrorKind::invalid_input, "diagonal gains must be zero");
  require_gain_class(gain);
  grid_[i * n_ + j] = std::move(gain);
}

std::vector<GainEntry> FiniteGains::nonzero() const {
  std::vector<GainEntry> out;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      if (!at(i, j).is_zero()) out.push_back({i, j, at(i, j)});
  return out;
}

BandedGains::BandedGains(std::map<long, ComparisonFunction> by_offset) {
  for (auto& [o, g] : by_offset) {
    require(o != 0, ErrorKind::invalid_input, "offset 0 would be a self-gain");
    require_gain_class(g);
    if (!g.is_zero()) offsets.emplace(o, g);
  }
}

long BandedGains::reach() const {
  long r = 0;
  for (const auto& [o, g] : offsets) r = std::max(r, std::labs(o));
  return r;
}

std::size_t BlockDiagonalGains::size() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.size();
  return n;
}

std::size_t BlockDiagonalGains::offset_of(std::size_t block) const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < block; ++k) n += blocks[k].size();
  return n;
}

GainFamily::GainFamily(GainStructure structure, Aggregation mode)
    : structure_(std::move(structure)), mode_(mode) {
  if (auto* b = std::get_if<BandedGains>(&structure_)) {
    for (const auto& [o, g] : b->offsets) {
      require(o != 0, ErrorKind::invalid_input, "offset 0 would be a self-gain");
      require_gain_class(g);
    }
  }
}

std::vector<ComparisonFunction> GainFamily::generators() const {
  std::vector<ComparisonFunction> out;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FiniteGains>) {
          for (const auto& e : s.nonzero()) out.push_back(e.gain);
        } else if constexpr (std::is_same_v<T, BandedGains>) {
          for (const auto& [o, g] : s.offsets)
            if (!g.is_zero()) out.push_back(g);
        } else {
          for (const auto& b : s.blocks)
            for (const auto& e : b.nonzero()) out.push_back(e.gain);
        }
      },
      structure_);
  return out;
}

bool GainFamily::all_linear() const {
  for (const auto& g : generators())
    if (!g.linear_coefficient()) return false;
  return true;
}

std::optional<std::size_t> GainFamily::fixed_dimension() const {
  if (auto* f = std::get_if<FiniteGains>(&structure_)) return f->size();
  if (auto* b = std::get_if<BlockDiagonalGains>(&structure_)) return b->size();
  return std::nullopt;
}

GainFamily GainFamily::scaled(double c) const {
  auto scale_finite = [c](const FiniteGains& f) {
    FiniteGains out(f.size());
    for (const auto& e : f.nonzero()) out.set(e.i, e.j, e.gain.scaled(c));
    return out;
  };
  if (auto* f = std::get_if<FiniteGains>(&structure_)) return GainFamily(scale_finite(*f), mode_);
  if (auto* b = std::get_if<BandedGains>(&structure_)) {
    std::map<long, ComparisonFunction> m;
    for (const auto& [o, g] : b->offsets) m.emplace(o, g.scaled(c));
    return GainFamily(BandedGains(std::move(m)), mode_);
  }
  const auto& bd = std::get<BlockDiagonalGains>(structure_);
  BlockDiagonalGains out;
  for (const auto& blk : bd.blocks) out.blocks.push_back(scale_finite(blk));
  return GainFamily(std::move(out), mode_);
}

namespace {

// Largest row sum at radius r.
double max_row_sum(const GainFamily& g, double r) {
  auto finite_rows = [r](const FiniteGains& f) {
    double best = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < f.size(); ++j) s += f.at(i, j)(r);
      best = std::max(best, s);
    }
    return best;
  };
  if (auto* f = std::get_if<FiniteGains>(&g.structure())) return finite_rows(*f);
  if (auto* b = std::get_if<BandedGains>(&g.structure())) {
    double s = 0.0;
    for (const auto& [o, gain] : b->offsets) s += gain(r);
    return s;
  }
  double best = 0.0;
  for (const auto& blk : std::get<BlockDiagonalGains>(g.structure()).blocks)
    best = std::max(best, finite_rows(blk));
  return best;
}

}  // namespace

WellDefinednessReport check_well_defined(const GainFamily& g, const std::vector<double>& radii) {
  require(!radii.empty(), ErrorKind::invalid_input, "check_well_defined needs at least one radius");
  WellDefinednessReport rep;
  rep.mode = g.mode();
  rep.radii = radii;
  const auto gens = g.generators();
  for (double r : radii) {
    require(r > 0.0, ErrorKind::invalid_input, "radii must be positive");
    double v = 0.0;
    if (g.mode() == Aggregation::Max) {
      for (const auto& f : gens) v = std::max(v, f(r));
    } else {
      v = max_row_sum(g, r);
    }
    rep.values.push_back(v);
    if (!std::isfinite(v) && rep.pass) {
      rep.pass = false;
      rep.witness_r = r;
    }
  }
  return rep;
}

std::optional<ComparisonFunction> AggregatedISSData::sigma_envelope() const {
  if (sigma_max) return sigma_max;
  if (beta_max) return beta_max->g;
  return std::nullopt;
}

DominationReport check_envelopes(const AggregatedISSData& data, const std::vector<double>& radii,
                                 const std::vector<double>& times) {
  DominationReport rep;
  constexpr double kSlack = 1e-12;
  auto violated = [&](const char* field, std::size_t k, double r, double t) {
    rep.pass = false;
    rep.failed_field = field;
    rep.subsystem = k;
    rep.r = r;
    rep.t = t;
    return rep;
  };
  for (std::size_t k = 0; k < data.subsystems.size(); ++k) {
    const auto& s = data.subsystems[k];
    for (double r : radii) {
      if (s.gamma(r) > data.gamma_max(r) * (1 + kSlack) + kSlack) return violated("gamma", k, r, 0.0);
      if (s.sigma) {
        const auto env = data.sigma_envelope();
        if (!env) return violated("sigma_max missing", k, r, 0.0);
        if ((*s.sigma)(r) > (*env)(r) * (1 + kSlack) + kSlack) return violated("sigma", k, r, 0.0);
      }
      if (s.beta) {
        if (!data.beta_max) return violated("beta_max missing", k, r, 0.0);
        for (double t : times)
          if ((*s.beta)(r, t) > (*data.beta_max)(r, t) * (1 + kSlack) + kSlack)
            return violated("beta", k, r, t);
      }
    }
  }
  return rep;
}

}  // namespace smallgain
