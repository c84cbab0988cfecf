#include "smallgain/isotonic.hpp"

#include <algorithm>

#include "smallgain/error.hpp"

namespace smallgain {

std::vector<double> isotonic_fit(const std::vector<double>& values, PoolRule rule,
                                 const std::vector<double>& weights) {
  require(weights.empty() || weights.size() == values.size(), ErrorKind::invalid_input,
          "isotonic_fit: weight count mismatch");
  struct Block {
    double value;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    blocks.push_back({values[k], weights.empty() ? 1.0 : weights[k], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].value > blocks.back().value) {
      Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      switch (rule) {
        case PoolRule::Mean:
          prev.value = (prev.value * prev.weight + top.value * top.weight) / (prev.weight + top.weight);
          break;
        case PoolRule::Max: prev.value = std::max(prev.value, top.value); break;
        case PoolRule::Min: prev.value = std::min(prev.value, top.value); break;
      }
      prev.weight += top.weight;
      prev.count += top.count;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& b : blocks) out.insert(out.end(), b.count, b.value);
  return out;
}

}  // namespace smallgain
