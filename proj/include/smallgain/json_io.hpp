#pragma once

#include "json.hpp"

#include "smallgain/comparison_function.hpp"
#include "smallgain/gain_network.hpp"
#include "smallgain/ode_sim.hpp"
#include "smallgain/sg_verifier.hpp"

namespace smallgain {

using json = nlohmann::json;

// Gain syntax: a bare number k is Linear(k); otherwise an object with "kind"
// in zero, linear, power, saturating, identity, compose, sum, max, min,
// piecewise_linear. Errors raise ErrorKind::schema.
ComparisonFunction function_from_json(const json& j);
json function_to_json(const ComparisonFunction& f);

// {"C": c, "rate": λ} or {"g": <gain>, "rate": λ}
KLFunction kl_from_json(const json& j);
json kl_to_json(const KLFunction& b);

// "network" object: either {"preset": {...}} or {"mode", "structure": {"kind", ...}}
// plus optional "iss", "window" and "boundary".
NetworkSpec network_from_json(const json& j);

// "ode" object for simulate-ode and threshold-scan.
OdeRun ode_run_from_json(const json& j);

std::vector<double> vector_from_json(const json& j, const char* what);
// Array of values or {"window": [lo, hi], "boundary": ..., "values": [...]}.
StateVector state_vector_from_json(const json& j, const char* what);

// Typed field access with schema errors naming the field.
double get_number(const json& j, const char* key);
double get_number(const json& j, const char* key, double fallback);
std::size_t get_count(const json& j, const char* key, std::size_t fallback);

}  // namespace smallgain
