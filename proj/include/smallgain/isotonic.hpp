#pragma once

#include <vector>

namespace smallgain {

// How pool-adjacent-violators merges a violating block.
//   Mean: least-squares isotonic regression.
//   Max:  smallest nondecreasing majorant (upper envelope).
//   Min:  largest nondecreasing minorant (lower envelope).
enum class PoolRule { Mean, Max, Min };

// Nondecreasing fit of `values` (already ordered by abscissa). `weights` is only
// used by the Mean rule; empty means unit weights.
std::vector<double> isotonic_fit(const std::vector<double>& values, PoolRule rule,
                                 const std::vector<double>& weights = {});

}  // namespace smallgain
