#pragma once

// k-way multi-constraint partitioning of a leveled QODG.
//
// Every level holding at least k nodes gets its own balance dimension
// (one-hot weight vectors), which forces its nodes to spread across parts so
// the parts can run concurrently. Cut weight is the number of shared qubits on
// edges whose endpoints land in different parts.
//
// The heuristic is multi-constraint recursive bisection (region growing)
// followed by FM-style refinement over single-node moves and same-dimension
// swaps; moves that would break any dimension's balance are never taken.
// Node-count balance is enforced only when no level is wide enough to carry a
// dimension.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <vector>

#include "qkmap/errors.hpp"
#include "qkmap/qodg.hpp"

namespace qkmap {

struct WeightVectors {
  std::uint32_t k = 1;
  std::vector<std::size_t> balanced_levels;  // dimension j <-> level balanced_levels[j]
  std::vector<std::int32_t> dimension;       // per node; -1 for the zero vector

  std::size_t n_con() const { return balanced_levels.size(); }

  /// Dense one-hot vector of node v.
  std::vector<std::uint32_t> vector(std::size_t v) const {
    std::vector<std::uint32_t> out(n_con(), 0);
    if (dimension.at(v) >= 0) out[static_cast<std::size_t>(dimension[v])] = 1;
    return out;
  }

  /// Total weight per dimension.
  std::vector<std::uint64_t> totals() const {
    std::vector<std::uint64_t> t(n_con(), 0);
    for (std::int32_t d : dimension)
      if (d >= 0) ++t[static_cast<std::size_t>(d)];
    return t;
  }
};

inline WeightVectors assign_weight_vectors(const Qodg& g, std::uint32_t k) {
  if (k < 1) throw ConfigError("part count k must be >= 1");
  WeightVectors w;
  w.k = k;
  std::vector<std::int32_t> dim_of_level(g.level_sizes.size(), -1);
  for (std::size_t level = 0; level < g.level_sizes.size(); ++level) {
    if (g.level_sizes[level] >= k) {
      dim_of_level[level] = static_cast<std::int32_t>(w.balanced_levels.size());
      w.balanced_levels.push_back(level);
    }
  }
  w.dimension.reserve(g.nodes.size());
  for (const QodgNode& node : g.nodes) w.dimension.push_back(dim_of_level.at(node.level));
  return w;
}

/// Per-part admissible weight range for each dimension, and the node-count
/// cap (unbounded unless there are no dimensions).
struct BalanceBounds {
  std::vector<std::int64_t> lo, hi;  // per dimension, for one part
  std::int64_t max_part_size = std::numeric_limits<std::int64_t>::max();
  bool size_constrained = false;
};

/// Tolerance band [floor(W/k)(1-eps), ceil(W/k)(1+eps)], tightened to whole
/// nodes but never tighter than {floor(W/k), ceil(W/k)}.
inline BalanceBounds balance_bounds(const WeightVectors& w, std::size_t node_count,
                                    double epsilon) {
  constexpr double kSlack = 1e-9;
  BalanceBounds b;
  const auto k = static_cast<std::int64_t>(w.k);
  for (std::uint64_t total : w.totals()) {
    auto t = static_cast<std::int64_t>(total);
    std::int64_t fl = t / k;
    std::int64_t ce = (t + k - 1) / k;
    auto lo = static_cast<std::int64_t>(std::ceil(static_cast<double>(fl) * (1.0 - epsilon) - kSlack));
    auto hi = static_cast<std::int64_t>(std::floor(static_cast<double>(ce) * (1.0 + epsilon) + kSlack));
    b.lo.push_back(std::min(fl, std::max<std::int64_t>(lo, 0)));
    b.hi.push_back(std::max(ce, hi));
  }
  if (w.n_con() == 0) {
    auto n = static_cast<std::int64_t>(node_count);
    std::int64_t ce = (n + k - 1) / k;
    auto cap = static_cast<std::int64_t>(std::floor(static_cast<double>(ce) * (1.0 + epsilon) + kSlack));
    b.max_part_size = std::max(ce, cap);
    b.size_constrained = true;
  }
  return b;
}

struct PartitionOptions {
  double epsilon = 0.1;
  std::uint64_t seed = 1;
  std::size_t restarts = 4;
};

struct Partition {
  std::uint32_t k = 1;
  std::vector<std::uint32_t> assignment;  // node -> part
  std::vector<std::size_t> cut_edges;     // indices into g.edges
  std::vector<std::uint64_t> traffic;     // k*k row-major, w[m][x]
  std::uint64_t cut_weight = 0;

  std::uint64_t traffic_at(std::uint32_t from, std::uint32_t to) const {
    return traffic.at(std::size_t{from} * k + to);
  }

  std::vector<std::size_t> part_sizes() const {
    std::vector<std::size_t> sizes(k, 0);
    for (std::uint32_t p : assignment) ++sizes.at(p);
    return sizes;
  }
};

/// w[m][x] = shared qubits carried by cut edges running from part m to part x.
inline std::vector<std::uint64_t> traffic_matrix(const Qodg& g,
                                                 std::span<const std::uint32_t> assignment,
                                                 std::uint32_t k) {
  if (assignment.size() != g.nodes.size()) throw ConfigError("assignment size mismatch");
  std::vector<std::uint64_t> w(std::size_t{k} * k, 0);
  for (const QodgEdge& e : g.edges) {
    std::uint32_t m = assignment[e.from], x = assignment[e.to];
    if (m >= k || x >= k) throw ConfigError("part index out of range");
    if (m != x) w[std::size_t{m} * k + x] += e.shared_qubits.size();
  }
  return w;
}

inline std::uint64_t cut_weight(const Qodg& g, std::span<const std::uint32_t> assignment) {
  std::uint64_t cut = 0;
  for (const QodgEdge& e : g.edges)
    if (assignment[e.from] != assignment[e.to]) cut += e.shared_qubits.size();
  return cut;
}

/// Wraps an assignment with its cut-edge list and traffic matrix.
inline Partition make_partition(const Qodg& g, std::vector<std::uint32_t> assignment,
                                std::uint32_t k) {
  Partition p;
  p.k = k;
  p.traffic = traffic_matrix(g, assignment, k);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (assignment[g.edges[e].from] != assignment[g.edges[e].to]) {
      p.cut_edges.push_back(e);
      p.cut_weight += g.edges[e].shared_qubits.size();
    }
  }
  p.assignment = std::move(assignment);
  return p;
}

namespace detail {

struct Neighbor {
  std::size_t node;
  std::int64_t weight;
};

/// Refinement over a subset of nodes that may only take labels from `parts`.
/// Nodes outside the subset keep their labels and only contribute edges.
class Refiner {
 public:
  Refiner(const std::vector<std::vector<Neighbor>>& adj, const std::vector<std::int32_t>& dim,
          std::size_t n_con, std::vector<std::uint32_t>& label)
      : adj_(adj), dim_(dim), n_con_(n_con), label_(label) {}

  /// Per-part bounds: lo/hi indexed [slot * n_con + c]; max_size per slot.
  struct SlotBounds {
    std::vector<std::int64_t> lo, hi;
    std::vector<std::int64_t> max_size;
    bool size_constrained = false;
  };

  void run(std::span<const std::size_t> active, std::span<const std::uint32_t> parts,
           const SlotBounds& bounds, std::size_t max_passes = 8) {
    active_.assign(active.begin(), active.end());
    parts_.assign(parts.begin(), parts.end());
    bounds_ = &bounds;
    slot_of_.clear();
    std::uint32_t max_label = 0;
    for (std::uint32_t p : parts_) max_label = std::max(max_label, p);
    slot_of_.assign(max_label + 1, -1);
    for (std::size_t s = 0; s < parts_.size(); ++s) slot_of_[parts_[s]] = static_cast<std::int32_t>(s);

    counts_.assign(parts_.size() * std::max<std::size_t>(n_con_, 1), 0);
    sizes_.assign(parts_.size(), 0);
    for (std::size_t v : active_) {
      std::size_t s = slot(label_[v]);
      ++sizes_[s];
      if (dim_[v] >= 0) ++counts_[s * n_con_ + static_cast<std::size_t>(dim_[v])];
    }
    groups_.assign(n_con_ + 1, {});
    for (std::size_t v : active_) {
      if (dim_[v] >= 0)
        groups_[static_cast<std::size_t>(dim_[v])].push_back(v);
      else if (bounds.size_constrained)
        groups_[n_con_].push_back(v);
    }
    locked_.assign(label_.size(), false);

    for (std::size_t pass = 0; pass < max_passes; ++pass)
      if (!fm_pass()) break;
  }

 private:
  static constexpr std::size_t kStallLimit = 32;

  std::size_t slot(std::uint32_t part) const {
    return static_cast<std::size_t>(slot_of_.at(part));
  }

  std::int64_t move_gain(std::size_t v, std::uint32_t to) const {
    std::uint32_t from = label_[v];
    std::int64_t gain = 0;
    for (const Neighbor& n : adj_[v]) {
      if (label_[n.node] == from)
        gain -= n.weight;
      else if (label_[n.node] == to)
        gain += n.weight;
    }
    return gain;
  }

  std::int64_t edge_weight(std::size_t u, std::size_t v) const {
    for (const Neighbor& n : adj_[u])
      if (n.node == v) return n.weight;
    return 0;
  }

  bool move_feasible(std::size_t v, std::uint32_t to) const {
    std::size_t s_from = slot(label_[v]), s_to = slot(to);
    if (bounds_->size_constrained && sizes_[s_to] + 1 > bounds_->max_size[s_to]) return false;
    if (dim_[v] >= 0) {
      auto c = static_cast<std::size_t>(dim_[v]);
      if (counts_[s_from * n_con_ + c] - 1 < bounds_->lo[s_from * n_con_ + c]) return false;
      if (counts_[s_to * n_con_ + c] + 1 > bounds_->hi[s_to * n_con_ + c]) return false;
    }
    return true;
  }

  void apply_move(std::size_t v, std::uint32_t to) {
    std::size_t s_from = slot(label_[v]), s_to = slot(to);
    --sizes_[s_from];
    ++sizes_[s_to];
    if (dim_[v] >= 0) {
      auto c = static_cast<std::size_t>(dim_[v]);
      --counts_[s_from * n_con_ + c];
      ++counts_[s_to * n_con_ + c];
    }
    label_[v] = to;
  }

  struct Step {
    std::size_t u, v;  // v == npos for single moves
    std::uint32_t u_from, v_from;
  };
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  bool fm_pass() {
    std::fill(locked_.begin(), locked_.end(), false);
    std::vector<Step> history;
    std::int64_t cumulative = 0, best = 0;
    std::size_t best_len = 0, stall = 0;

    while (true) {
      std::int64_t best_gain = std::numeric_limits<std::int64_t>::min();
      Step chosen{npos, npos, 0, 0};
      std::uint32_t chosen_to = 0;

      for (std::size_t v : active_) {
        if (locked_[v]) continue;
        for (std::uint32_t to : parts_) {
          if (to == label_[v] || !move_feasible(v, to)) continue;
          std::int64_t gain = move_gain(v, to);
          if (gain > best_gain) {
            best_gain = gain;
            chosen = {v, npos, label_[v], 0};
            chosen_to = to;
          }
        }
      }
      // Swaps keep every count fixed, so they are always feasible.
      for (const auto& group : groups_) {
        for (std::size_t i = 0; i < group.size(); ++i) {
          std::size_t u = group[i];
          if (locked_[u]) continue;
          for (std::size_t j = i + 1; j < group.size(); ++j) {
            std::size_t v = group[j];
            if (locked_[v] || label_[u] == label_[v]) continue;
            std::int64_t gain =
                move_gain(u, label_[v]) + move_gain(v, label_[u]) - 2 * edge_weight(u, v);
            if (gain > best_gain) {
              best_gain = gain;
              chosen = {u, v, label_[u], label_[v]};
            }
          }
        }
      }
      if (chosen.u == npos) break;

      if (chosen.v == npos) {
        apply_move(chosen.u, chosen_to);
      } else {
        apply_move(chosen.u, chosen.v_from);
        apply_move(chosen.v, chosen.u_from);
        locked_[chosen.v] = true;
      }
      locked_[chosen.u] = true;
      history.push_back(chosen);
      cumulative += best_gain;
      if (cumulative > best) {
        best = cumulative;
        best_len = history.size();
        stall = 0;
      } else if (++stall >= kStallLimit) {
        break;
      }
    }
    while (history.size() > best_len) {
      const Step& s = history.back();
      if (s.v != npos) apply_move(s.v, s.v_from);
      apply_move(s.u, s.u_from);
      history.pop_back();
    }
    return best > 0;
  }

  const std::vector<std::vector<Neighbor>>& adj_;
  const std::vector<std::int32_t>& dim_;
  std::size_t n_con_;
  std::vector<std::uint32_t>& label_;

  std::vector<std::size_t> active_;
  std::vector<std::uint32_t> parts_;
  const SlotBounds* bounds_ = nullptr;
  std::vector<std::int32_t> slot_of_;
  std::vector<std::int64_t> counts_;
  std::vector<std::int64_t> sizes_;
  std::vector<std::vector<std::size_t>> groups_;
  std::vector<bool> locked_;
};

class Bisector {
 public:
  Bisector(const Qodg& g, const WeightVectors& w, const BalanceBounds& bounds,
           std::vector<std::vector<Neighbor>> adj, std::mt19937_64& rng, bool randomize)
      : g_(g), w_(w), bounds_(bounds), adj_(std::move(adj)), rng_(rng), randomize_(randomize) {}

  std::vector<std::uint32_t> run() {
    label_.assign(g_.nodes.size(), 0);
    std::vector<std::size_t> all(g_.nodes.size());
    std::iota(all.begin(), all.end(), 0);
    split(all, 0, w_.k);
    return label_;
  }

  const std::vector<std::vector<Neighbor>>& adjacency() const { return adj_; }

 private:
  // Nodes in `set` currently carry label `first`; they end up in
  // [first, first + parts).
  void split(const std::vector<std::size_t>& set, std::uint32_t first, std::uint32_t parts) {
    if (parts <= 1 || set.empty()) {
      for (std::size_t v : set) label_[v] = first;
      return;
    }
    const std::uint32_t k1 = (parts + 1) / 2;
    const std::uint32_t k2 = parts - k1;
    const std::uint32_t side_a = first, side_b = first + k1;
    const std::size_t n_con = w_.n_con();

    std::vector<std::int64_t> total(n_con, 0);
    for (std::size_t v : set)
      if (w_.dimension[v] >= 0) ++total[static_cast<std::size_t>(w_.dimension[v])];

    // Admissible range for side A so both sides can still be split into
    // parts that each meet the per-part bounds.
    Refiner::SlotBounds sb;
    sb.lo.resize(2 * n_con);
    sb.hi.resize(2 * n_con);
    std::vector<std::int64_t> target(n_con);
    for (std::size_t c = 0; c < n_con; ++c) {
      std::int64_t lo_a = std::max<std::int64_t>(k1 * bounds_.lo[c], total[c] - k2 * bounds_.hi[c]);
      std::int64_t hi_a = std::min<std::int64_t>(k1 * bounds_.hi[c], total[c] - k2 * bounds_.lo[c]);
      sb.lo[c] = lo_a;
      sb.hi[c] = hi_a;
      sb.lo[n_con + c] = total[c] - hi_a;
      sb.hi[n_con + c] = total[c] - lo_a;
      std::int64_t proportional = (total[c] * k1 + parts / 2) / parts;
      target[c] = std::clamp(proportional, lo_a, hi_a);
    }
    const auto n = static_cast<std::int64_t>(set.size());
    std::int64_t size_target = (n * k1 + parts / 2) / parts;
    if (bounds_.size_constrained) {
      std::int64_t cap = bounds_.max_part_size;
      sb.size_constrained = true;
      sb.max_size = {k1 * cap, k2 * cap};
      size_target = std::clamp(size_target, n - k2 * cap, k1 * cap);
    } else {
      sb.max_size = {std::numeric_limits<std::int64_t>::max(), std::numeric_limits<std::int64_t>::max()};
    }

    grow(set, side_a, side_b, target, size_target);

    Refiner refiner(adj_, w_.dimension, n_con, label_);
    std::uint32_t slots[2] = {side_a, side_b};
    refiner.run(set, slots, sb);

    std::vector<std::size_t> a, b;
    for (std::size_t v : set) (label_[v] == side_a ? a : b).push_back(v);
    split(a, side_a, k1);
    split(b, side_b, k2);
  }

  // Greedy region growing of side A until every dimension target and the
  // size target are met; the rest goes to side B.
  void grow(const std::vector<std::size_t>& set, std::uint32_t side_a, std::uint32_t side_b,
            std::vector<std::int64_t> need, std::int64_t size_target) {
    for (std::size_t v : set) label_[v] = side_b;
    std::vector<char> in_set(g_.nodes.size(), 0);
    for (std::size_t v : set) in_set[v] = 1;

    std::vector<std::size_t> order = set;
    if (randomize_) std::shuffle(order.begin(), order.end(), rng_);

    std::int64_t size = 0;
    // Connectivity of each candidate to side A minus its edges to others.
    std::vector<std::int64_t> affinity(g_.nodes.size(), 0);
    std::vector<char> touched(g_.nodes.size(), 0);
    std::vector<std::size_t> frontier;

    auto admissible = [&](std::size_t v) {
      if (label_[v] == side_a) return false;
      std::int32_t d = w_.dimension[v];
      if (d >= 0) return need[static_cast<std::size_t>(d)] > 0;
      return size < size_target;
    };
    auto remaining_demand = [&] {
      for (std::int64_t x : need)
        if (x > 0) return true;
      return size < size_target;
    };
    auto take = [&](std::size_t v) {
      label_[v] = side_a;
      ++size;
      if (w_.dimension[v] >= 0) --need[static_cast<std::size_t>(w_.dimension[v])];
      for (const Neighbor& nb : adj_[v]) {
        if (!in_set[nb.node] || label_[nb.node] == side_a) continue;
        affinity[nb.node] += nb.weight;
        if (!touched[nb.node]) {
          touched[nb.node] = 1;
          frontier.push_back(nb.node);
        }
      }
    };

    std::size_t cursor = 0;
    while (remaining_demand()) {
      std::size_t best = static_cast<std::size_t>(-1);
      std::int64_t best_aff = std::numeric_limits<std::int64_t>::min();
      for (std::size_t v : frontier) {
        if (!admissible(v)) continue;
        if (affinity[v] > best_aff || (affinity[v] == best_aff && v < best)) {
          best_aff = affinity[v];
          best = v;
        }
      }
      if (best == static_cast<std::size_t>(-1)) {
        while (cursor < order.size() && !admissible(order[cursor])) ++cursor;
        if (cursor == order.size()) break;
        best = order[cursor];
      }
      take(best);
    }
  }

  const Qodg& g_;
  const WeightVectors& w_;
  const BalanceBounds& bounds_;
  std::vector<std::vector<Neighbor>> adj_;
  std::mt19937_64& rng_;
  bool randomize_;
  std::vector<std::uint32_t> label_;
};

inline std::vector<std::vector<Neighbor>> weighted_adjacency(const Qodg& g) {
  std::vector<std::vector<Neighbor>> adj(g.nodes.size());
  for (const QodgEdge& e : g.edges) {
    auto weight = static_cast<std::int64_t>(e.shared_qubits.size());
    adj[e.from].push_back({e.to, weight});
    adj[e.to].push_back({e.from, weight});
  }
  return adj;
}

}  // namespace detail

/// Checks an assignment against the balance bounds the partitioner enforces.
inline bool satisfies_bounds(const WeightVectors& w, const BalanceBounds& b,
                             std::span<const std::uint32_t> assignment) {
  const std::size_t n_con = w.n_con();
  std::vector<std::int64_t> counts(std::size_t{w.k} * n_con, 0);
  std::vector<std::int64_t> sizes(w.k, 0);
  for (std::size_t v = 0; v < assignment.size(); ++v) {
    ++sizes.at(assignment[v]);
    if (w.dimension[v] >= 0) ++counts[assignment[v] * n_con + static_cast<std::size_t>(w.dimension[v])];
  }
  for (std::uint32_t p = 0; p < w.k; ++p) {
    if (b.size_constrained && sizes[p] > b.max_part_size) return false;
    for (std::size_t c = 0; c < n_con; ++c) {
      std::int64_t x = counts[p * n_con + c];
      if (x < b.lo[c] || x > b.hi[c]) return false;
    }
  }
  return true;
}

inline Partition kway_partition(const Qodg& g, const WeightVectors& w,
                                const PartitionOptions& options = {}) {
  if (!(options.epsilon > 0.0 && options.epsilon < 1.0))
    throw ConfigError("balance tolerance epsilon must lie in (0, 1)");
  if (w.dimension.size() != g.nodes.size()) throw ConfigError("weight vectors do not match graph");
  const std::uint32_t k = w.k;
  if (k == 1 || g.nodes.empty())
    return make_partition(g, std::vector<std::uint32_t>(g.nodes.size(), 0), k);

  const BalanceBounds bounds = balance_bounds(w, g.nodes.size(), options.epsilon);
  auto adj = detail::weighted_adjacency(g);

  detail::Refiner::SlotBounds final_bounds;
  const std::size_t n_con = w.n_con();
  for (std::uint32_t p = 0; p < k; ++p) {
    final_bounds.lo.insert(final_bounds.lo.end(), bounds.lo.begin(), bounds.lo.end());
    final_bounds.hi.insert(final_bounds.hi.end(), bounds.hi.begin(), bounds.hi.end());
  }
  final_bounds.max_size.assign(k, bounds.max_part_size);
  final_bounds.size_constrained = bounds.size_constrained;
  (void)n_con;

  std::vector<std::size_t> all(g.nodes.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::uint32_t> parts(k);
  std::iota(parts.begin(), parts.end(), 0);

  std::mt19937_64 rng(options.seed);
  std::vector<std::uint32_t> best;
  std::uint64_t best_cut = std::numeric_limits<std::uint64_t>::max();
  std::size_t best_max_size = std::numeric_limits<std::size_t>::max();

  const std::size_t runs = std::max<std::size_t>(options.restarts, 1);
  for (std::size_t run = 0; run < runs; ++run) {
    detail::Bisector bisector(g, w, bounds, adj, rng, run > 0);
    std::vector<std::uint32_t> label = bisector.run();
    detail::Refiner refiner(adj, w.dimension, n_con, label);
    refiner.run(all, parts, final_bounds);

    std::uint64_t cut = cut_weight(g, label);
    std::vector<std::size_t> sizes(k, 0);
    for (std::uint32_t p : label) ++sizes[p];
    std::size_t max_size = *std::max_element(sizes.begin(), sizes.end());
    if (cut < best_cut || (cut == best_cut && max_size < best_max_size)) {
      best_cut = cut;
      best_max_size = max_size;
      best = std::move(label);
    }
  }
  if (!satisfies_bounds(w, bounds, best)) throw InternalError("partition violates balance bounds");
  return make_partition(g, std::move(best), k);
}

/// CSV dump: node,part
inline void write_partition_csv(std::ostream& out, const Partition& p) {
  out << "node,part\n";
  for (std::size_t v = 0; v < p.assignment.size(); ++v) out << v << ',' << p.assignment[v] << '\n';
}

}  // namespace qkmap
