#pragma once

// Ancilla-constrained list scheduling of a bound QODG on k cores.
//
// Time is discretized into scheduling levels of `cycle_time_us`. An operation
// started at level S with duration T holds its ancilla on its core for levels
// S..S+T-1. A dependency x -> y between cores m and n requires
// S_y >= S_x + T_x + r[m][n], where r[m][m] is the cache-to-QRCR load.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qkmap/binding.hpp"
#include "qkmap/errors.hpp"
#include "qkmap/fabric.hpp"
#include "qkmap/partition.hpp"
#include "qkmap/qodg.hpp"

namespace qkmap {

struct ScheduleConfig {
  double cycle_time_us = 1.0;
  std::uint64_t l_init = 0;  // 0: use the serial-schedule bound

  void validate() const {
    if (!(cycle_time_us > 0.0) || !std::isfinite(cycle_time_us))
      throw ConfigError("cycle time must be positive");
  }
};

/// ceil(duration / cycle), with a relative slack so values such as
/// 96.00000000000001 us do not round up to an extra level.
inline std::uint64_t to_levels(double duration_us, double cycle_time_us) {
  double ratio = duration_us / cycle_time_us;
  double slack = 1e-9 * std::max(1.0, std::abs(ratio));
  double levels = std::ceil(ratio - slack);
  return levels <= 0.0 ? 0 : static_cast<std::uint64_t>(levels);
}

struct QuantizedDelays {
  std::uint32_t k = 1;
  std::vector<std::uint64_t> op_levels;       // T_x, per node, >= 1
  std::vector<std::uint64_t> routing_levels;  // r[m][n], k*k row-major
  std::uint64_t l_init = 0;

  std::uint64_t routing(std::uint32_t m, std::uint32_t n) const {
    return routing_levels.at(std::size_t{m} * k + n);
  }
};

inline QuantizedDelays quantize(const Qodg& g, const DelayMatrix& d, const ScheduleConfig& cfg) {
  cfg.validate();
  QuantizedDelays q;
  q.k = d.k;
  q.op_levels.reserve(g.nodes.size());
  std::uint64_t serial = 0;
  for (const QodgNode& node : g.nodes) {
    std::uint64_t t = std::max<std::uint64_t>(1, to_levels(node.delay_us, cfg.cycle_time_us));
    q.op_levels.push_back(t);
    serial += t;
  }
  q.routing_levels.reserve(d.values.size());
  std::uint64_t max_r = 0;
  for (double v : d.values) {
    q.routing_levels.push_back(to_levels(v, cfg.cycle_time_us));
    max_r = std::max(max_r, q.routing_levels.back());
  }
  q.l_init = cfg.l_init != 0 ? cfg.l_init : serial + g.nodes.size() * max_r;
  return q;
}

struct ScheduledOp {
  std::size_t node = 0;
  std::uint32_t core = 0;
  std::uint64_t start = 0;     // S_x, first level is 1
  std::uint64_t duration = 0;  // T_x

  std::uint64_t last_level() const { return start + duration - 1; }
};

/// Constant ancilla usage over levels [first, last].
struct OccupancySegment {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
  std::uint64_t ancilla = 0;
};

struct Route {
  std::size_t edge = 0;
  std::uint32_t from_core = 0;
  std::uint32_t to_core = 0;
  std::vector<GridCoord> path;
  std::uint64_t depart = 0;  // first level in flight
  std::uint64_t arrive = 0;  // last level in flight
};

struct MappedSchedule {
  std::vector<ScheduledOp> ops;  // indexed by node
  std::uint64_t makespan = 0;    // L, levels
  double latency_us = 0.0;
  std::vector<std::vector<OccupancySegment>> occupancy;  // per core
  std::vector<Route> routes;

  std::uint64_t peak_ancilla(std::uint32_t core) const {
    std::uint64_t peak = 0;
    for (const OccupancySegment& s : occupancy.at(core)) peak = std::max(peak, s.ancilla);
    return peak;
  }

  /// Ancilla in use on `core` at `level` (0 outside the schedule).
  std::uint64_t usage_at(std::uint32_t core, std::uint64_t level) const {
    for (const OccupancySegment& s : occupancy.at(core))
      if (s.first <= level && level <= s.last) return s.ancilla;
    return 0;
  }
};

/// Core of every node: binding of its part.
inline std::vector<std::uint32_t> node_cores(std::span<const std::uint32_t> part_of,
                                             const Binding& binding) {
  std::vector<std::uint32_t> cores;
  cores.reserve(part_of.size());
  for (std::uint32_t p : part_of) cores.push_back(binding.part_to_core.at(p));
  return cores;
}

/// Longest routed path from each node to any sink, in levels (including the
/// node's own duration).
inline std::vector<std::uint64_t> sink_distances(const Qodg& g, std::span<const std::uint32_t> core,
                                                 const QuantizedDelays& q) {
  std::vector<std::uint64_t> dist(g.nodes.size(), 0);
  std::vector<std::size_t> order = topological_order(g);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    std::size_t v = *it;
    std::uint64_t tail = 0;
    for (std::size_t e : g.out_edges[v]) {
      std::size_t s = g.edges[e].to;
      tail = std::max(tail, q.routing(core[v], core[s]) + dist[s]);
    }
    dist[v] = q.op_levels[v] + tail;
  }
  return dist;
}

namespace detail {

inline std::vector<std::vector<OccupancySegment>> build_occupancy(
    const std::vector<ScheduledOp>& ops, const Qodg& g, std::uint32_t k) {
  std::vector<std::map<std::uint64_t, std::int64_t>> delta(k);
  for (const ScheduledOp& op : ops) {
    auto a = static_cast<std::int64_t>(g.nodes[op.node].ancilla);
    delta[op.core][op.start] += a;
    delta[op.core][op.start + op.duration] -= a;
  }
  std::vector<std::vector<OccupancySegment>> out(k);
  for (std::uint32_t c = 0; c < k; ++c) {
    std::int64_t level_usage = 0;
    for (auto it = delta[c].begin(); it != delta[c].end(); ++it) {
      level_usage += it->second;
      auto next = std::next(it);
      if (next == delta[c].end() || level_usage == 0) continue;
      out[c].push_back({it->first, next->first - 1, static_cast<std::uint64_t>(level_usage)});
    }
  }
  return out;
}

}  // namespace detail

/// Critical-path list scheduling. Ready operations are considered in order of
/// decreasing routed distance to a sink (ties: lower seq) and start at the
/// earliest level where their dependencies have arrived and their core has
/// the ancilla to spare.
inline MappedSchedule list_schedule(const Qodg& g, std::span<const std::uint32_t> part_of,
                                    const Binding& binding, std::uint64_t budget_per_core,
                                    const QuantizedDelays& q, const ScheduleConfig& cfg,
                                    const GridLayout& layout) {
  cfg.validate();
  const std::size_t n = g.nodes.size();
  const std::uint32_t k = q.k;
  if (part_of.size() != n) throw ConfigError("partition does not cover the graph");
  if (binding.part_to_core.size() != k) throw ConfigError("binding size does not match core count");
  {
    std::vector<bool> seen(k, false);
    for (std::uint32_t c : binding.part_to_core) {
      if (c >= k || seen[c]) throw ConfigError("binding is not a permutation");
      seen[c] = true;
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (g.nodes[v].ancilla > budget_per_core) {
      throw ConfigError("operation " + std::to_string(v) + " (" +
                        std::string(to_string(g.nodes[v].op.kind)) + ") needs " +
                        std::to_string(g.nodes[v].ancilla) + " ancilla but each core has " +
                        std::to_string(budget_per_core));
    }
  }

  const std::vector<std::uint32_t> core = node_cores(part_of, binding);
  const std::vector<std::uint64_t> priority = sink_distances(g, core, q);

  MappedSchedule s;
  s.ops.resize(n);
  std::vector<std::uint64_t> earliest(n, 1);
  std::vector<std::size_t> waiting(n, 0);
  for (std::size_t v = 0; v < n; ++v) waiting[v] = g.in_edges[v].size();

  std::vector<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (waiting[v] == 0) ready.push_back(v);

  struct Running {
    std::uint64_t last;
    std::uint64_t ancilla;
  };
  std::vector<std::vector<Running>> running(k);
  std::vector<std::uint64_t> in_use(k, 0);

  auto by_priority = [&](std::size_t a, std::size_t b) {
    if (priority[a] != priority[b]) return priority[a] > priority[b];
    return g.nodes[a].op.seq < g.nodes[b].op.seq || (g.nodes[a].op.seq == g.nodes[b].op.seq && a < b);
  };

  std::size_t scheduled = 0;
  std::uint64_t level = 1;
  while (scheduled < n) {
    // Retire operations finished before this level.
    for (std::uint32_t c = 0; c < k; ++c) {
      auto& r = running[c];
      for (std::size_t i = 0; i < r.size();) {
        if (r[i].last < level) {
          in_use[c] -= r[i].ancilla;
          r[i] = r.back();
          r.pop_back();
        } else {
          ++i;
        }
      }
    }

    std::sort(ready.begin(), ready.end(), by_priority);
    std::vector<std::size_t> still_ready;
    std::vector<std::size_t> released;
    for (std::size_t v : ready) {
      const std::uint32_t c = core[v];
      if (earliest[v] > level || in_use[c] + g.nodes[v].ancilla > budget_per_core) {
        still_ready.push_back(v);
        continue;
      }
      const std::uint64_t t = q.op_levels[v];
      s.ops[v] = {v, c, level, t};
      if (level + t - 1 > q.l_init) throw InternalError("schedule exceeded the level bound");
      running[c].push_back({level + t - 1, g.nodes[v].ancilla});
      in_use[c] += g.nodes[v].ancilla;
      ++scheduled;
      for (std::size_t e : g.out_edges[v]) {
        std::size_t succ = g.edges[e].to;
        earliest[succ] = std::max(earliest[succ], level + t + q.routing(c, core[succ]));
        if (--waiting[succ] == 0) released.push_back(succ);
      }
    }
    ready = std::move(still_ready);
    ready.insert(ready.end(), released.begin(), released.end());
    if (scheduled == n) break;

    // Next level at which something can change: a dependency arrives or an
    // operation releases its ancilla.
    std::uint64_t next = std::numeric_limits<std::uint64_t>::max();
    for (std::size_t v : ready)
      if (earliest[v] > level) next = std::min(next, earliest[v]);
    for (const auto& r : running)
      for (const Running& op : r) next = std::min(next, op.last + 1);
    if (next == std::numeric_limits<std::uint64_t>::max() || next <= level)
      throw InternalError("list scheduler stalled");
    level = next;
  }

  for (const ScheduledOp& op : s.ops) s.makespan = std::max(s.makespan, op.last_level());
  s.latency_us = static_cast<double>(s.makespan) * cfg.cycle_time_us;
  s.occupancy = detail::build_occupancy(s.ops, g, k);

  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const QodgEdge& edge = g.edges[e];
    std::uint32_t m = core[edge.from], x = core[edge.to];
    if (m == x) continue;
    const ScheduledOp& src = s.ops[edge.from];
    std::uint64_t depart = src.start + src.duration;
    std::uint64_t r = q.routing(m, x);
    s.routes.push_back({e, m, x, xy_route(m, x, layout), depart, depart + (r > 0 ? r - 1 : 0)});
  }
  return s;
}

enum class ViolationKind {
  MissingOp,       // an operation without exactly one start level
  WrongCore,       // operation not on the core its part is bound to
  WrongDuration,   // duration differs from the quantized delay
  Precedence,      // successor starts before predecessor + routing
  AncillaBudget,   // core over budget at some level
  Makespan,        // reported makespan differs from last finishing level
  LevelBound,      // makespan beyond l_init
};

inline std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::MissingOp: return "missing-op";
    case ViolationKind::WrongCore: return "wrong-core";
    case ViolationKind::WrongDuration: return "wrong-duration";
    case ViolationKind::Precedence: return "precedence";
    case ViolationKind::AncillaBudget: return "ancilla-budget";
    case ViolationKind::Makespan: return "makespan";
    case ViolationKind::LevelBound: return "level-bound";
  }
  return "?";
}

struct Violation {
  ViolationKind kind;
  std::uint64_t subject = 0;  // node, edge, or core depending on kind
  std::uint64_t level = 0;
  std::string detail;
};

struct VerificationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(ViolationKind kind) const {
    return static_cast<std::size_t>(std::count_if(
        violations.begin(), violations.end(), [kind](const Violation& v) { return v.kind == kind; }));
  }
};

/// Re-derives every constraint from the raw schedule rows; shares no state
/// with list_schedule.
inline VerificationResult verify_schedule(const MappedSchedule& s, const Qodg& g,
                                          std::span<const std::uint32_t> part_of,
                                          const Binding& binding, std::uint64_t budget_per_core,
                                          const QuantizedDelays& q) {
  VerificationResult result;
  auto report = [&](ViolationKind kind, std::uint64_t subject, std::uint64_t level, std::string detail) {
    result.violations.push_back({kind, subject, level, std::move(detail)});
  };

  // Exactly one start per operation.
  std::vector<int> starts(g.nodes.size(), 0);
  std::vector<const ScheduledOp*> row(g.nodes.size(), nullptr);
  for (const ScheduledOp& op : s.ops) {
    if (op.node >= g.nodes.size() || op.start < 1) {
      report(ViolationKind::MissingOp, op.node, op.start, "row for unknown node or level < 1");
      continue;
    }
    ++starts[op.node];
    row[op.node] = &op;
  }
  for (std::size_t v = 0; v < g.nodes.size(); ++v) {
    if (starts[v] != 1) {
      report(ViolationKind::MissingOp, v, 0, std::to_string(starts[v]) + " start levels");
      continue;
    }
    std::uint32_t expected_core = binding.part_to_core.at(part_of[v]);
    if (row[v]->core != expected_core)
      report(ViolationKind::WrongCore, v, row[v]->start,
             "on core " + std::to_string(row[v]->core) + ", bound to " + std::to_string(expected_core));
    if (row[v]->duration != q.op_levels.at(v))
      report(ViolationKind::WrongDuration, v, row[v]->start, "duration mismatch");
  }
  if (!result.ok()) return result;

  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const ScheduledOp& x = *row[g.edges[e].from];
    const ScheduledOp& y = *row[g.edges[e].to];
    std::uint64_t ready = x.start + x.duration + q.routing(x.core, y.core);
    if (ready > y.start) {
      report(ViolationKind::Precedence, e, y.start,
             "successor starts at " + std::to_string(y.start) + ", needs >= " + std::to_string(ready));
    }
  }

  // Ancilla usage per core, swept over start/end events.
  std::vector<std::vector<std::pair<std::uint64_t, std::int64_t>>> events(q.k);
  for (const ScheduledOp& op : s.ops) {
    auto a = static_cast<std::int64_t>(g.nodes[op.node].ancilla);
    events.at(op.core).push_back({op.start, a});
    events.at(op.core).push_back({op.start + op.duration, -a});
  }
  for (std::uint32_t c = 0; c < q.k; ++c) {
    auto& ev = events[c];
    std::sort(ev.begin(), ev.end());
    std::int64_t usage = 0;
    for (std::size_t i = 0; i < ev.size(); ++i) {
      usage += ev[i].second;
      bool last_at_level = i + 1 == ev.size() || ev[i + 1].first != ev[i].first;
      if (last_at_level && usage > static_cast<std::int64_t>(budget_per_core)) {
        report(ViolationKind::AncillaBudget, c, ev[i].first,
               std::to_string(usage) + " ancilla in use, budget " + std::to_string(budget_per_core));
      }
    }
  }

  std::uint64_t last = 0;
  for (const ScheduledOp& op : s.ops) last = std::max(last, op.start + op.duration - 1);
  if (last != s.makespan)
    report(ViolationKind::Makespan, 0, last,
           "makespan " + std::to_string(s.makespan) + " but last op ends at " + std::to_string(last));
  if (s.makespan > q.l_init)
    report(ViolationKind::LevelBound, 0, s.makespan, "makespan exceeds l_init " + std::to_string(q.l_init));
  return result;
}

}  // namespace qkmap
