#pragma once

#include <vector>

#include "smallgain/gain_network.hpp"
#include "smallgain/gain_operator.hpp"

namespace fixture {

using Matrix = std::vector<std::vector<double>>;

// Linear finite family; a[i][j] is the gain from j into i.
inline smallgain::GainFamily linear_family(const Matrix& a, smallgain::Aggregation mode) {
  smallgain::FiniteGains g(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (a[i][j] != 0.0) g.set(i, j, smallgain::ComparisonFunction::linear(a[i][j]));
  return smallgain::GainFamily(std::move(g), mode);
}

inline smallgain::GainOperator linear_op(const Matrix& a, smallgain::Aggregation mode = smallgain::Aggregation::Max) {
  return smallgain::GainOperator(linear_family(a, mode));
}

// The 2×2 family used throughout: γ₁₂ = 0.5, γ₂₁ = 0.25 (0-based (0,1) and (1,0)).
inline Matrix two_by_two() { return {{0.0, 0.5}, {0.25, 0.0}}; }

inline Matrix scaled(Matrix a, double c) {
  for (auto& row : a)
    for (double& v : row) v *= c;
  return a;
}

}  // namespace fixture
