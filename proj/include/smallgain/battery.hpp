#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smallgain/gain_operator.hpp"

namespace smallgain {

// Outcome of one probe in the equivalence battery. `supports` is true when
// the probe found no counterevidence against the small-gain property.
struct ProbeOutcome {
  std::string name;
  bool supports = true;
  std::string detail;
};

struct BatteryOptions {
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
  std::vector<double> radii{0.1, 1.0, 10.0};
  std::size_t k_max = 10000;
};

struct BatteryReport {
  std::vector<ProbeOutcome> probes;  // mlim, mbi, uniform-sgc, unit-sgc, strong-sgc, robust-strong-sgc
  bool agree = true;                 // all six probes give the same answer
  bool consensus = true;             // the common answer (meaningful when agree)
  bool certificate = false;          // a decay certificate fixed ρ, ω and ξ
  double spectral_value = 0.0;       // linear families only
};

// Runs the six probes on one finite-dimensional family. In finite dimensions
// they are all equivalent for linear gains, so disagreement is a bug signal.
BatteryReport run_battery(const GainOperator& op, const BatteryOptions& options);

// n×n linear family with zero diagonal and off-diagonal entries U[0, 2], rescaled so
// its spectral radius equals `target_r`. Stream `index` of `seed`.
GainFamily random_linear_family(std::uint64_t seed, std::uint64_t index, std::size_t n, Aggregation mode,
                                double target_r);

}  // namespace smallgain
