#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace smallgain {

// Deterministic sample source. Each (seed, stream) pair yields an independent,
// platform-stable sequence; probes use one stream per radius or per instance.
class SampleStream {
 public:
  SampleStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next() { return engine_(); }
  // 53-bit uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double log_uniform(double lo, double hi);
  std::size_t index(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace smallgain
