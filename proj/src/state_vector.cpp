#include "smallgain/state_vector.hpp"

#include <algorithm>
#include <cmath>

#include "smallgain/error.hpp"

namespace smallgain {

const char* to_string(Boundary b) { return b == Boundary::Periodic ? "periodic" : "zero_pad"; }

Boundary boundary_from_string(const std::string& s) {
  if (s == "periodic") return Boundary::Periodic;
  if (s == "zero_pad" || s == "zeropad" || s == "zero") return Boundary::ZeroPad;
  fail(ErrorKind::schema, "unknown boundary '" + s + "'");
}

StateVector::StateVector(std::vector<double> values, long lo, Boundary boundary)
    : values_(std::move(values)), lo_(lo), boundary_(boundary) {
  for (double v : values_) {
    if (!std::isfinite(v)) fail(ErrorKind::numeric_failure, "state vector entry is not finite");
    if (v < 0.0) fail(ErrorKind::invalid_input, "state vector entries must be nonnegative");
  }
}

StateVector StateVector::constant(std::size_t n, double value, long lo, Boundary boundary) {
  return StateVector(std::vector<double>(n, value), lo, boundary);
}

double StateVector::sup_norm() const { return smallgain::sup_norm(values_); }

double StateVector::min() const {
  return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

StateVector StateVector::with_values(std::vector<double> values) const {
  require(values.size() == values_.size(), ErrorKind::invalid_input, "window size mismatch");
  return StateVector(std::move(values), lo_, boundary_);
}

StateVector StateVector::scaled(double c) const {
  std::vector<double> v = values_;
  for (double& x : v) x *= c;
  return with_values(std::move(v));
}

bool StateVector::same_window(const StateVector& other) const {
  return lo_ == other.lo_ && values_.size() == other.values_.size() && boundary_ == other.boundary_;
}

double sup_norm(const StateVector& v) { return v.sup_norm(); }

double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool leq(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (!(a[k] <= b[k] + tol)) return false;
  return true;
}

}  // namespace smallgain
