// Simple-cycle enumeration (Johnson, 1975) and the cycle contraction check.
#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "smallgain/comparison_function.hpp"
#include "smallgain/error.hpp"
#include "smallgain/gain_operator.hpp"

namespace smallgain {

namespace {

using Graph = std::vector<std::vector<std::size_t>>;

// Strongly connected component of `root` in the subgraph induced by vertices ≥ root.
std::vector<std::size_t> component_of(const Graph& g, std::size_t root) {
  const std::size_t n = g.size();
  std::vector<char> fwd(n, 0), bwd(n, 0);
  std::vector<std::size_t> stack{root};
  fwd[root] = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t w : g[v])
      if (w >= root && !fwd[w]) {
        fwd[w] = 1;
        stack.push_back(w);
      }
  }
  Graph rev(n);
  for (std::size_t v = root; v < n; ++v)
    for (std::size_t w : g[v])
      if (w >= root) rev[w].push_back(v);
  stack = {root};
  bwd[root] = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t w : rev[v])
      if (!bwd[w]) {
        bwd[w] = 1;
        stack.push_back(w);
      }
  }
  std::vector<std::size_t> out;
  for (std::size_t v = root; v < n; ++v)
    if (fwd[v] && bwd[v]) out.push_back(v);
  return out;
}

struct Johnson {
  Johnson(const Graph& graph, std::size_t max_cycles) : g(graph), limit(max_cycles) {}

  const Graph& g;
  std::size_t limit;
  std::vector<std::vector<std::size_t>> cycles;
  bool truncated = false;

  std::vector<char> in_comp, blocked;
  std::vector<std::set<std::size_t>> B;
  std::vector<std::size_t> path;
  std::size_t start = 0;

  void unblock(std::size_t u) {
    blocked[u] = 0;
    auto pending = std::move(B[u]);
    B[u].clear();
    for (std::size_t w : pending)
      if (blocked[w]) unblock(w);
  }

  bool circuit(std::size_t v) {
    bool found = false;
    path.push_back(v);
    blocked[v] = 1;
    for (std::size_t w : g[v]) {
      if (!in_comp[w] || truncated) continue;
      if (w == start) {
        if (cycles.size() >= limit) {
          truncated = true;
          break;
        }
        cycles.push_back(path);
        found = true;
      } else if (!blocked[w] && circuit(w)) {
        found = true;
      }
    }
    if (found) {
      unblock(v);
    } else {
      for (std::size_t w : g[v])
        if (in_comp[w]) B[w].insert(v);
    }
    path.pop_back();
    return found;
  }

  void run() {
    const std::size_t n = g.size();
    in_comp.assign(n, 0);
    blocked.assign(n, 0);
    B.assign(n, {});
    for (start = 0; start < n && !truncated; ++start) {
      const auto comp = component_of(g, start);
      const bool self_loop = std::find(g[start].begin(), g[start].end(), start) != g[start].end();
      if (comp.size() < 2 && !self_loop) continue;
      std::fill(in_comp.begin(), in_comp.end(), 0);
      for (std::size_t v : comp) {
        in_comp[v] = 1;
        blocked[v] = 0;
        B[v].clear();
      }
      circuit(start);
    }
  }
};

const GainOperator::Edge& edge(const GainOperator& op, std::size_t i, std::size_t j) {
  for (const auto& e : op.rows()[i])
    if (e.j == j) return e;
  fail(ErrorKind::invalid_input, "no gain from " + std::to_string(j) + " into " + std::to_string(i));
}

double eval(const GainOperator::Edge& e, double x) { return std::isnan(e.k) ? e.gain(x) : e.k * x; }

}  // namespace

double cycle_composition(const GainOperator& op, const std::vector<std::size_t>& nodes, double r) {
  double x = r;
  for (std::size_t m = nodes.size(); m-- > 0;) {
    const std::size_t next = nodes[(m + 1) % nodes.size()];
    x = eval(edge(op, nodes[m], next), x);
  }
  return x;
}

std::vector<double> cycle_witness_vector(const GainOperator& op, const std::vector<std::size_t>& nodes,
                                         double r) {
  std::vector<double> s(op.dimension(), 0.0);
  if (nodes.empty()) return s;
  s[nodes[0]] = r;
  for (std::size_t m = nodes.size(); m-- > 1;) {
    const std::size_t next = nodes[(m + 1) % nodes.size()];
    s[nodes[m]] = eval(edge(op, nodes[m], next), s[next]);
  }
  return s;
}

CycleReport cycle_analysis(const GainOperator& op, const CycleOptions& options) {
  require(!op.family().is_banded(), ErrorKind::unsupported_structure,
          "banded families have infinitely many cycles");
  Graph g(op.dimension());
  for (std::size_t i = 0; i < op.dimension(); ++i)
    for (const auto& e : op.rows()[i]) g[i].push_back(e.j);

  Johnson j(g, options.max_cycles);
  j.run();

  CycleReport rep;
  rep.truncated = j.truncated;
  const auto grid = log_grid(options.grid_lo, options.grid_hi, options.grid_points);
  for (auto& nodes : j.cycles) {
    CycleRecord c;
    c.nodes = std::move(nodes);
    double product = 1.0;
    for (std::size_t m = 0; m < c.nodes.size(); ++m) {
      const auto& e = edge(op, c.nodes[m], c.nodes[(m + 1) % c.nodes.size()]);
      if (std::isnan(e.k)) c.linear = false;
      product *= e.k;
    }
    if (c.linear) {
      c.product = product;
      c.max_ratio = product;
      c.contraction = product < 1.0;
      if (!c.contraction) c.violation_r = 1.0;
    } else {
      for (double r : grid) {
        const double ratio = cycle_composition(op, c.nodes, r) / r;
        c.max_ratio = std::max(c.max_ratio, ratio);
        if (ratio >= 1.0 && !c.violation_r) c.violation_r = r;
      }
      c.contraction = !c.violation_r.has_value();
    }
    if (!c.contraction && !rep.witness) rep.witness = rep.cycles.size();
    rep.all_contractions = rep.all_contractions && c.contraction;
    rep.cycles.push_back(std::move(c));
  }
  if (op.linear()) {
    double m = 0.0;
    for (const auto& c : rep.cycles) m = std::max(m, c.product);
    rep.max_product = m;
  }
  return rep;
}

}  // namespace smallgain
