#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace smallgain {

enum class Boundary { Periodic, ZeroPad };

const char* to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

// Finite truncation of a nonnegative ℓ∞ vector. Position k holds the value at
// absolute index lo + k.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(std::vector<double> values, long lo = 0, Boundary boundary = Boundary::Periodic);

  static StateVector constant(std::size_t n, double value, long lo = 0,
                              Boundary boundary = Boundary::Periodic);

  std::size_t size() const { return values_.size(); }
  long lo() const { return lo_; }
  long hi() const { return lo_ + static_cast<long>(values_.size()) - 1; }
  Boundary boundary() const { return boundary_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }

  double sup_norm() const;
  double min() const;

  // Same window and boundary, new values.
  StateVector with_values(std::vector<double> values) const;
  StateVector scaled(double c) const;
  bool same_window(const StateVector& other) const;

 private:
  std::vector<double> values_;
  long lo_ = 0;
  Boundary boundary_ = Boundary::Periodic;
};

double sup_norm(const StateVector& v);
double sup_norm(const std::vector<double>& v);

// a ≤ b + tol componentwise.
bool leq(const std::vector<double>& a, const std::vector<double>& b, double tol = 0.0);

}  // namespace smallgain
