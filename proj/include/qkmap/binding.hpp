#pragma once

// Part-to-core binding: a one-to-one assignment minimizing
//   sum over m != x of w[m][x] * d[core(m)][core(x)].
// Small k is solved exactly by enumerating permutations in lexicographic
// order; larger k falls back to a greedy seed improved by pairwise swaps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "qkmap/errors.hpp"
#include "qkmap/fabric.hpp"

namespace qkmap {

struct Binding {
  std::vector<std::uint32_t> part_to_core;
  double cost = 0.0;       // microsecond-qubits
  bool exhaustive = true;  // false when produced by the swap heuristic
};

struct BindOptions {
  /// Largest k solved by full enumeration.
  std::uint32_t exhaustive_limit = 8;
};

/// Communication cost of a binding; w is k*k row-major traffic.
inline double binding_cost(std::span<const std::uint64_t> w, const DelayMatrix& d,
                           std::span<const std::uint32_t> part_to_core) {
  const std::uint32_t k = d.k;
  double cost = 0.0;
  for (std::uint32_t m = 0; m < k; ++m) {
    for (std::uint32_t x = 0; x < k; ++x) {
      if (m == x) continue;
      std::uint64_t traffic = w[std::size_t{m} * k + x];
      if (traffic != 0) cost += static_cast<double>(traffic) * d.at(part_to_core[m], part_to_core[x]);
    }
  }
  return cost;
}

namespace detail {

inline bool strictly_less(double a, double b) {
  return a < b - 1e-9 * std::max(1.0, std::abs(b));
}

inline Binding swap_local_search(std::span<const std::uint64_t> w, const DelayMatrix& d) {
  const std::uint32_t k = d.k;
  // Greedy seed: parts by descending total traffic, each placed on the free
  // core that adds the least cost against parts already placed.
  std::vector<std::uint64_t> volume(k, 0);
  for (std::uint32_t m = 0; m < k; ++m)
    for (std::uint32_t x = 0; x < k; ++x)
      if (m != x) {
        volume[m] += w[std::size_t{m} * k + x];
        volume[x] += w[std::size_t{m} * k + x];
      }
  std::vector<std::uint32_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return volume[a] > volume[b]; });

  constexpr std::uint32_t kFree = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> core_of(k, kFree);
  std::vector<bool> used(k, false);
  for (std::uint32_t part : order) {
    std::uint32_t best_core = kFree;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::uint32_t c = 0; c < k; ++c) {
      if (used[c]) continue;
      double added = 0.0;
      bool any_placed = false;
      for (std::uint32_t other = 0; other < k; ++other) {
        if (core_of[other] == kFree) continue;
        any_placed = true;
        added += static_cast<double>(w[std::size_t{part} * k + other]) * d.at(c, core_of[other]);
        added += static_cast<double>(w[std::size_t{other} * k + part]) * d.at(core_of[other], c);
      }
      if (!any_placed) {
        // First part goes to the most central core.
        for (std::uint32_t o = 0; o < k; ++o)
          if (o != c) added += d.at(c, o);
      }
      if (best_core == kFree || strictly_less(added, best_cost)) {
        best_cost = added;
        best_core = c;
      }
    }
    core_of[part] = best_core;
    used[best_core] = true;
  }

  double cost = binding_cost(w, d, core_of);
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::uint32_t a = 0; a < k; ++a) {
      for (std::uint32_t b = a + 1; b < k; ++b) {
        std::swap(core_of[a], core_of[b]);
        double candidate = binding_cost(w, d, core_of);
        if (strictly_less(candidate, cost)) {
          cost = candidate;
          improved = true;
        } else {
          std::swap(core_of[a], core_of[b]);
        }
      }
    }
  }
  return {core_of, cost, false};
}

}  // namespace detail

inline Binding bind_parts(std::span<const std::uint64_t> w, const DelayMatrix& d,
                          const BindOptions& options = {}) {
  const std::uint32_t k = d.k;
  if (w.size() != std::size_t{k} * k || d.values.size() != std::size_t{k} * k)
    throw ConfigError("binding: traffic and delay matrices must both be k x k");
  for (std::uint32_t x = 0; x < k; ++x)
    for (std::uint32_t y = 0; y < k; ++y)
      if (x != y && d.at(x, y) < 0.0) throw ConfigError("binding: negative inter-core delay");

  if (k > options.exhaustive_limit) return detail::swap_local_search(w, d);

  std::vector<std::uint32_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  Binding best{perm, binding_cost(w, d, perm), true};
  while (std::next_permutation(perm.begin(), perm.end())) {
    double cost = binding_cost(w, d, perm);
    if (detail::strictly_less(cost, best.cost)) {
      best.cost = cost;
      best.part_to_core = perm;
    }
  }
  return best;
}

}  // namespace qkmap
