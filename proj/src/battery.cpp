#include "smallgain/battery.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

#include "smallgain/cone_analysis.hpp"
#include "smallgain/discrete_sim.hpp"
#include "smallgain/error.hpp"
#include "smallgain/random.hpp"

namespace smallgain {

namespace {

std::string witness_text(const ProbeReport& r) {
  if (!r.witness) return "no witness in " + std::to_string(r.samples) + " samples";
  std::ostringstream os;
  os << r.witness->inequality << " at radius " << r.witness->radius;
  if (r.witness->i) os << " i=" << *r.witness->i;
  if (r.witness->j) os << " j=" << *r.witness->j;
  return os.str();
}

ProbeOutcome from_report(std::string name, const ProbeReport& r) {
  return {std::move(name), r.verdict == Verdict::Supported, witness_text(r)};
}

}  // namespace

BatteryReport run_battery(const GainOperator& op, const BatteryOptions& options) {
  BatteryReport rep;
  if (op.linear()) rep.spectral_value = spectral_radius(op).value;

  const auto cert = find_decay_certificate(op);
  rep.certificate = cert.has_value();
  ComparisonFunction rho = ComparisonFunction::linear(0.05);
  ComparisonFunction omega = ComparisonFunction::linear(0.01);
  std::optional<ComparisonFunction> xi;
  if (cert) {
    std::tie(rho, omega) = sgc_parameters(*cert);
    xi = ComparisonFunction::linear(cert->s0.sup_norm() / ((1.0 - cert->lambda) * cert->s0.min()));
  }

  const auto mbi = probe_mbi(op, options.samples, options.seed);
  if (!xi) xi = mbi.xi;

  {
    const MonotoneMap map(op);
    MlimOptions mo;
    mo.seed = options.seed;
    mo.k_max = options.k_max;
    const auto w = StateVector::constant(op.dimension(), 0.1, op.lo(), op.boundary());
    const auto m = mlim_probe(map, w, *xi, mo);
    std::string detail = std::string(to_string(m.evidence)) + ", seed " + m.seed_method;
    if (!m.negative_solution.empty()) detail += ", " + m.negative_solution;
    rep.probes.push_back({"mlim", m.evidence == MlimEvidence::Positive, detail});
  }
  rep.probes.push_back(from_report("mbi", mbi.report));
  const std::size_t eta_samples = std::max<std::size_t>(options.samples / options.radii.size(), op.dimension() + 2);
  rep.probes.push_back(
      from_report("uniform-sgc", estimate_eta(op, options.radii, eta_samples, options.seed + 1).report));
  rep.probes.push_back(
      from_report("unit-sgc", estimate_eta_unit(op, options.radii, eta_samples, options.seed + 2).report));
  rep.probes.push_back(from_report("strong-sgc", check_strong_sgc(op, rho, options.samples, options.seed + 3)));
  rep.probes.push_back(from_report("robust-strong-sgc",
                                   check_robust_strong_sgc(op, rho, omega, options.samples, options.seed + 4)));

  rep.consensus = rep.probes.front().supports;
  rep.agree = std::all_of(rep.probes.begin(), rep.probes.end(),
                          [&](const ProbeOutcome& p) { return p.supports == rep.consensus; });
  return rep;
}

GainFamily random_linear_family(std::uint64_t seed, std::uint64_t index, std::size_t n, Aggregation mode,
                                double target_r) {
  require(n >= 2, ErrorKind::invalid_input, "random families need n >= 2");
  require(target_r > 0.0, ErrorKind::invalid_input, "target spectral radius must be positive");
  SampleStream rng(seed, index);
  for (;;) {
    std::vector<double> a(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) a[i * n + j] = rng.uniform(0.0, 2.0);
    auto build = [&](double c) {
      FiniteGains g(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j) g.set(i, j, ComparisonFunction::linear(c * a[i * n + j]));
      return GainFamily(std::move(g), mode);
    };
    const auto r = spectral_radius(GainOperator(build(1.0))).value;
    if (r > 1e-6) return build(target_r / r);  // an acyclic draw has r = 0; redraw
  }
}

}  // namespace smallgain
