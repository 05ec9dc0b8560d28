#pragma once

// Quantum operation dependency graph.
//
// O_j depends on O_i when they share a qubit and O_j is the first operation
// after O_i touching that qubit. A (from, to) pair is stored once; its edge
// carries every qubit that induces it (two for back-to-back CNOTs on the same
// pair).

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qkmap/circuit_ir.hpp"
#include "qkmap/errors.hpp"
#include "qkmap/qec_profile.hpp"

namespace qkmap {

struct QodgNode {
  QuantumOp op;
  std::size_t level = 0;
  double delay_us = 0.0;
  std::uint32_t ancilla = 0;
};

struct QodgEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  std::vector<QubitIndex> shared_qubits;  // ascending, nonempty

  bool operator==(const QodgEdge&) const = default;
};

struct Qodg {
  std::vector<QodgNode> nodes;
  std::vector<QodgEdge> edges;
  std::vector<std::size_t> level_sizes;  // n_i, indexed by level

  // Edge indices per node; rebuilt by index_edges().
  std::vector<std::vector<std::size_t>> out_edges;
  std::vector<std::vector<std::size_t>> in_edges;

  std::size_t size() const { return nodes.size(); }
  std::size_t level_count() const { return level_sizes.size(); }

  void index_edges() {
    out_edges.assign(nodes.size(), {});
    in_edges.assign(nodes.size(), {});
    for (std::size_t e = 0; e < edges.size(); ++e) {
      out_edges.at(edges[e].from).push_back(e);
      in_edges.at(edges[e].to).push_back(e);
    }
  }
};

/// Kahn topological order; throws InternalError on a cycle.
inline std::vector<std::size_t> topological_order(const Qodg& g) {
  std::vector<std::size_t> indegree(g.nodes.size(), 0);
  for (const QodgEdge& e : g.edges) ++indegree.at(e.to);
  // Min-heap on node index keeps the order deterministic and seq-first.
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t v = 0; v < g.nodes.size(); ++v)
    if (indegree[v] == 0) ready.push(v);
  std::vector<std::size_t> order;
  order.reserve(g.nodes.size());
  while (!ready.empty()) {
    std::size_t v = ready.top();
    ready.pop();
    order.push_back(v);
    for (std::size_t e : g.out_edges[v])
      if (--indegree[g.edges[e].to] == 0) ready.push(g.edges[e].to);
  }
  if (order.size() != g.nodes.size()) throw InternalError("QODG contains a cycle");
  return order;
}

/// ASAP leveling: level = 1 + max(pred levels), 0 for sources.
inline void level_graph(Qodg& g) {
  if (g.out_edges.size() != g.nodes.size()) g.index_edges();
  g.level_sizes.clear();
  for (std::size_t v : topological_order(g)) {
    std::size_t level = 0;
    for (std::size_t e : g.in_edges[v]) level = std::max(level, g.nodes[g.edges[e].from].level + 1);
    g.nodes[v].level = level;
    if (g.level_sizes.size() <= level) g.level_sizes.resize(level + 1, 0);
    ++g.level_sizes[level];
  }
}

inline Qodg build_qodg(const Kernel& kernel, const QecProfile& profile) {
  Qodg g;
  g.nodes.reserve(kernel.body.size());
  for (const QuantumOp& op : kernel.body) {
    QecRow row = profile.row(op.kind);
    g.nodes.push_back({op, 0, row.delay_us, row.ancilla});
  }

  QubitIndex max_qubit = 0;
  for (const QuantumOp& op : kernel.body)
    for (QubitIndex q : op.operands()) max_qubit = std::max(max_qubit, q);
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> last_use(kernel.body.empty() ? 0 : max_qubit + 1, kNone);

  for (std::size_t j = 0; j < kernel.body.size(); ++j) {
    const QuantumOp& op = kernel.body[j];
    std::size_t first_edge = g.edges.size();
    for (QubitIndex q : op.operands()) {
      std::size_t i = last_use[q];
      last_use[q] = j;
      if (i == kNone) continue;
      auto existing = std::find_if(g.edges.begin() + static_cast<std::ptrdiff_t>(first_edge),
                                   g.edges.end(), [i](const QodgEdge& e) { return e.from == i; });
      if (existing != g.edges.end()) {
        existing->shared_qubits.push_back(q);
        std::sort(existing->shared_qubits.begin(), existing->shared_qubits.end());
      } else {
        g.edges.push_back({i, j, {q}});
      }
    }
  }
  g.index_edges();
  level_graph(g);
  return g;
}

/// Longest path where a path's length is the sum of its node delays plus the
/// routing delay of its edges. `edge_routing_us`, when given, is indexed like
/// g.edges.
inline double critical_path(const Qodg& g,
                            std::optional<std::span<const double>> edge_routing_us = std::nullopt) {
  if (edge_routing_us && edge_routing_us->size() != g.edges.size())
    throw ConfigError("routing delay list does not match edge count");
  std::vector<double> finish(g.nodes.size(), 0.0);
  double best = 0.0;
  for (std::size_t v : topological_order(g)) {
    double start = 0.0;
    for (std::size_t e : g.in_edges[v]) {
      double routed = finish[g.edges[e].from] + (edge_routing_us ? (*edge_routing_us)[e] : 0.0);
      start = std::max(start, routed);
    }
    finish[v] = start + g.nodes[v].delay_us;
    best = std::max(best, finish[v]);
  }
  return best;
}

/// Graphviz dump: one node per op (id, kind, level), edges labelled with the
/// shared qubit names.
inline void write_qodg_dot(std::ostream& out, const Qodg& g, std::string_view name,
                           std::span<const LogicalQubit> qubits = {}) {
  out << "digraph \"" << name << "\" {\n";
  for (std::size_t v = 0; v < g.nodes.size(); ++v) {
    out << "  n" << v << " [label=\"" << v << ": " << to_string(g.nodes[v].op.kind)
        << "\\nlevel " << g.nodes[v].level << "\"];\n";
  }
  for (const QodgEdge& e : g.edges) {
    out << "  n" << e.from << " -> n" << e.to << " [label=\"";
    for (std::size_t i = 0; i < e.shared_qubits.size(); ++i) {
      if (i) out << ',';
      QubitIndex q = e.shared_qubits[i];
      if (q < qubits.size())
        out << qubits[q].name;
      else
        out << 'q' << q;
    }
    out << "\"];\n";
  }
  out << "}\n";
}

}  // namespace qkmap
