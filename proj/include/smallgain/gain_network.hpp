#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "smallgain/comparison_function.hpp"
#include "smallgain/state_vector.hpp"

namespace smallgain {

enum class Aggregation { Max, Sum };

const char* to_string(Aggregation m);
Aggregation aggregation_from_string(const std::string& s);

struct GainEntry {
  std::size_t i;
  std::size_t j;
  ComparisonFunction gain;
};

// n×n grid; entry (i, j) is the gain from node j into node i.
class FiniteGains {
 public:
  FiniteGains() = default;
  explicit FiniteGains(std::size_t n);
  FiniteGains(std::size_t n, const std::vector<GainEntry>& entries);

  std::size_t size() const { return n_; }
  const ComparisonFunction& at(std::size_t i, std::size_t j) const { return grid_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, ComparisonFunction gain);
  // Nonzero entries in row-major order.
  std::vector<GainEntry> nonzero() const;

 private:
  std::size_t n_ = 0;
  std::vector<ComparisonFunction> grid_;
};

// Spatially invariant gains on ℤ: node i receives γ_o(s_{i+o}) for each offset o.
struct BandedGains {
  std::map<long, ComparisonFunction> offsets;

  BandedGains() = default;
  explicit BandedGains(std::map<long, ComparisonFunction> by_offset);
  long reach() const;  // max |offset|
};

struct BlockDiagonalGains {
  std::vector<FiniteGains> blocks;

  std::size_t size() const;
  std::size_t offset_of(std::size_t block) const;
};

using GainStructure = std::variant<FiniteGains, BandedGains, BlockDiagonalGains>;

class GainFamily {
 public:
  GainFamily(GainStructure structure, Aggregation mode);

  const GainStructure& structure() const { return structure_; }
  Aggregation mode() const { return mode_; }
  bool is_finite() const { return std::holds_alternative<FiniteGains>(structure_); }
  bool is_banded() const { return std::holds_alternative<BandedGains>(structure_); }
  bool is_block_diagonal() const { return std::holds_alternative<BlockDiagonalGains>(structure_); }

  // Every nonzero gain, once per occurrence.
  std::vector<ComparisonFunction> generators() const;
  bool all_linear() const;
  // Dimension for finite and block-diagonal structures.
  std::optional<std::size_t> fixed_dimension() const;

  GainFamily with_mode(Aggregation mode) const { return GainFamily(structure_, mode); }
  // Every gain replaced by c·γ.
  GainFamily scaled(double c) const;

 private:
  GainStructure structure_;
  Aggregation mode_;
};

struct WellDefinednessReport {
  Aggregation mode = Aggregation::Max;
  std::vector<double> radii;
  std::vector<double> values;  // sup over generators (Max) or largest row sum (Sum)
  bool pass = true;
  std::optional<double> witness_r;
};

WellDefinednessReport check_well_defined(const GainFamily& g, const std::vector<double>& radii);

// Per-subsystem ISS data and the uniform envelopes required by the small-gain theorems.
struct SubsystemISS {
  std::optional<KLFunction> beta;
  std::optional<ComparisonFunction> sigma;
  ComparisonFunction gamma;
};

struct AggregatedISSData {
  std::vector<SubsystemISS> subsystems;
  std::optional<KLFunction> beta_max;
  std::optional<ComparisonFunction> sigma_max;
  ComparisonFunction gamma_max;

  // σ_max if declared, otherwise β_max(·, 0).
  std::optional<ComparisonFunction> sigma_envelope() const;
};

struct DominationReport {
  bool pass = true;
  std::string failed_field;
  std::optional<std::size_t> subsystem;
  double r = 0.0;
  double t = 0.0;
};

DominationReport check_envelopes(const AggregatedISSData& data, const std::vector<double>& radii,
                                 const std::vector<double>& times);

}  // namespace smallgain
