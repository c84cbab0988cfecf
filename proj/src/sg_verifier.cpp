#include "smallgain/sg_verifier.hpp"

#include <cmath>
#include <sstream>

#include "smallgain/cone_analysis.hpp"
#include "smallgain/discrete_sim.hpp"
#include "smallgain/error.hpp"

namespace smallgain {

GainOperator NetworkSpec::make_operator() const {
  if (gains.is_banded()) return GainOperator(gains, window, boundary);
  return GainOperator(gains);
}

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Supported: return "supported";
    case CheckStatus::Falsified: return "falsified";
    case CheckStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

const char* to_string(Conclusion c) {
  switch (c) {
    case Conclusion::ISS: return "ISS";
    case Conclusion::UGS: return "UGS";
    case Conclusion::Inconclusive: return "inconclusive";
  }
  return "?";
}

const HypothesisCheck& SmallGainVerdict::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  fail(ErrorKind::invalid_input, "no hypothesis check named " + name);
}

namespace {

bool holds(CheckStatus s) { return s == CheckStatus::Pass || s == CheckStatus::Supported; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

SmallGainVerdict verify(const NetworkSpec& spec, const VerifyBudgets& budgets) {
  SmallGainVerdict out;
  const GainOperator op = spec.make_operator();
  const bool linear = op.linear();
  out.grade = linear ? "criterion" : "evidence";

  {
    const auto wd = check_well_defined(spec.gains, budgets.radii);
    HypothesisCheck c{"well_defined", wd.pass ? CheckStatus::Pass : CheckStatus::Falsified, "", {}};
    c.detail = wd.pass ? std::string(spec.gains.mode() == Aggregation::Max ? "sup of generators finite"
                                                                          : "row sums finite")
                       : "unbounded aggregate at r = " + fmt(*wd.witness_r);
    out.checks.push_back(std::move(c));
  }
  {
    const auto dom = check_envelopes(spec.data, budgets.radii, budgets.times);
    HypothesisCheck c{"envelopes", dom.pass ? CheckStatus::Pass : CheckStatus::Falsified, "", {}};
    if (!dom.pass)
      c.detail = dom.failed_field + " of subsystem " + std::to_string(*dom.subsystem) + " at r = " + fmt(dom.r) +
                 ", t = " + fmt(dom.t);
    else if (!spec.data.sigma_envelope()) {
      c.status = CheckStatus::Inconclusive;
      c.detail = "no transient envelope (beta_max or sigma_max) declared";
    } else {
      c.detail = "dominated on " + std::to_string(budgets.radii.size()) + " radii";
    }
    out.checks.push_back(std::move(c));
  }

  if (!spec.gains.is_banded()) {
    const auto cycles = cycle_analysis(op);
    if (cycles.witness) {
      const auto& rec = cycles.cycles[*cycles.witness];
      out.cycle_witness = rec.nodes;
      out.cycle_value = rec.linear ? rec.product : rec.max_ratio;
    }
  }

  std::optional<StrictDecayCertificate> cert;
  if (linear) {
    out.spectral_value = spectral_radius(op).value;
    cert = find_decay_certificate(op);
  }

  const auto mbi = probe_mbi(op, budgets.samples, budgets.seed);
  const auto eta = estimate_eta(op, budgets.radii, std::max<std::size_t>(budgets.samples / budgets.radii.size(),
                                                                         op.dimension() + 2),
                                budgets.seed + 1);
  if (cert)
    out.xi = ComparisonFunction::linear(cert->s0.sup_norm() / ((1.0 - cert->lambda) * cert->s0.min()));
  else
    out.xi = mbi.xi;

  {
    HypothesisCheck c{"mbi_evidence", CheckStatus::Supported, "", {}};
    const bool probes_ok = mbi.report.verdict == Verdict::Supported && eta.report.verdict == Verdict::Supported;
    std::string probe_text = std::string("probe_mbi ") + to_string(mbi.report.verdict) + " (" +
                             std::to_string(mbi.report.samples) + " samples), estimate_eta " +
                             to_string(eta.report.verdict);
    if (linear) {
      const bool sub = *out.spectral_value < 1.0;
      c.status = sub ? CheckStatus::Pass : CheckStatus::Falsified;
      c.detail = "spectral radius " + fmt(*out.spectral_value) + (sub ? " < 1" : " >= 1") + "; " + probe_text;
      if (sub != probes_ok) c.detail += "; probes disagree with the spectral criterion";
    } else {
      c.status = probes_ok ? CheckStatus::Supported : CheckStatus::Falsified;
      c.detail = probe_text;
    }
    if (mbi.report.witness)
      c.witness = mbi.report.witness->x;
    else if (eta.report.witness)
      c.witness = eta.report.witness->x;
    out.checks.push_back(std::move(c));
  }
  {
    const MonotoneMap map(op);
    MlimOptions mo;
    mo.seed = budgets.seed;
    mo.k_max = budgets.k_max;
    const auto w = StateVector::constant(op.dimension(), 0.1, op.lo(), op.boundary());
    const auto m = mlim_probe(map, w, *out.xi, mo);
    HypothesisCheck c{"mlim_evidence", CheckStatus::Supported, "", {}};
    c.detail = std::string("mlim_probe ") + to_string(m.evidence) + ", seed " + m.seed_method + ", " +
               std::to_string(m.solutions_tested) + " solutions";
    if (!m.negative_solution.empty()) c.detail += ", " + m.negative_solution;
    switch (m.evidence) {
      case MlimEvidence::Positive: c.status = CheckStatus::Supported; break;
      case MlimEvidence::Negative: c.status = CheckStatus::Falsified; break;
      case MlimEvidence::Inconclusive: c.status = CheckStatus::Inconclusive; break;
    }
    if (linear) {
      const bool sub = *out.spectral_value < 1.0;
      if (sub && m.evidence == MlimEvidence::Positive) c.status = CheckStatus::Pass;
      if (!sub) c.status = CheckStatus::Falsified;
    }
    c.witness = m.negative_vector;
    out.checks.push_back(std::move(c));
  }

  bool ugs = true;
  for (const auto& c : out.checks) {
    if (c.status == CheckStatus::Falsified) out.counterevidence = true;
    if (c.name != "mlim_evidence" && !holds(c.status)) ugs = false;
  }
  if (ugs) out.conclusion = holds(out.check("mlim_evidence").status) ? Conclusion::ISS : Conclusion::UGS;

  if (out.conclusion != Conclusion::Inconclusive) {
    const auto sigma_max = spec.data.sigma_envelope();
    auto [s, g] = synthesize_ugs_gains(*out.xi, *sigma_max, spec.data.gamma_max);
    out.sigma = s;
    out.gamma = g;
  }
  return out;
}

std::pair<ComparisonFunction, ComparisonFunction> synthesize_ugs_gains(const ComparisonFunction& xi,
                                                                       const ComparisonFunction& sigma_max,
                                                                       const ComparisonFunction& gamma_max) {
  return {xi * sigma_max.scaled(2.0), xi * gamma_max.scaled(2.0)};
}

NetworkSpec linear_invariant_network(double a, double b, std::size_t window) {
  require(a >= 0.0 && b >= 0.0, ErrorKind::invalid_input, "a and b must be nonnegative");
  std::map<long, ComparisonFunction> g;
  if (a > 0.0) g[-1] = ComparisonFunction::linear(a);
  if (b > 0.0) g[1] = ComparisonFunction::linear(b);
  NetworkSpec spec{GainFamily(BandedGains(std::move(g)), Aggregation::Sum), {}, window, Boundary::Periodic};
  const auto beta = KLFunction::exponential(1.0, 1.0);
  spec.data.subsystems.push_back({beta, std::nullopt, ComparisonFunction::identity()});
  spec.data.beta_max = beta;
  spec.data.gamma_max = ComparisonFunction::identity();
  return spec;
}

NetworkSpec cubic_max_network(double a, double b, double epsilon, std::size_t window) {
  require(a >= 0.0 && b >= 0.0, ErrorKind::invalid_input, "a and b must be nonnegative");
  require(epsilon > 0.0, ErrorKind::invalid_input, "epsilon must be positive");
  const double c = std::cbrt(1.0 + epsilon);
  std::map<long, ComparisonFunction> g;
  if (a > 0.0) g[-1] = ComparisonFunction::linear(c * std::cbrt(a));
  if (b > 0.0) g[1] = ComparisonFunction::linear(c * std::cbrt(b));
  NetworkSpec spec{GainFamily(BandedGains(std::move(g)), Aggregation::Max), {}, window, Boundary::Periodic};
  const auto gu = ComparisonFunction::power(c, 1.0 / 3.0);
  spec.data.subsystems.push_back({std::nullopt, ComparisonFunction::identity(), gu});
  spec.data.sigma_max = ComparisonFunction::identity();
  spec.data.gamma_max = gu;
  return spec;
}

}  // namespace smallgain
