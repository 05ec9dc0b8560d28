#pragma once

// Multi-core fabric model: core geometry from the ancilla budget and data-qubit
// population, core placement on a 2-D mesh, routing delays, xy routes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "qkmap/errors.hpp"
#include "qkmap/qec_profile.hpp"
#include "qkmap/qodg.hpp"

namespace qkmap {

struct RequpParams {
  std::uint32_t k = 4;                 // core count
  std::uint64_t ancilla_budget = 800;  // A, physical ancilla over all cores
  double beta_pmd_us = 10.0;           // qubit unit-distance delay
  std::uint32_t alpha_int = 3;         // interconnect width, cells
  double gamma_mem = 0.2;              // memory-size routing coefficient

  /// Integer ancilla available to each core at any scheduling level.
  std::uint64_t per_core_budget() const { return ancilla_budget / k; }

  void validate() const {
    if (k < 1) throw ConfigError("core count k must be >= 1");
    if (ancilla_budget == 0) throw ConfigError("ancilla budget A must be positive");
    if (!(beta_pmd_us > 0.0) || !std::isfinite(beta_pmd_us))
      throw ConfigError("beta_pmd must be positive");
    if (alpha_int == 0) throw ConfigError("alpha_int must be positive");
    if (!(gamma_mem >= 0.0) || !std::isfinite(gamma_mem))
      throw ConfigError("gamma_mem must be nonnegative");
  }
};

struct CoreGeometry {
  std::uint64_t d_max = 0;
  std::uint64_t alpha_qrcr = 0;
  std::uint64_t alpha_core = 0;
  std::uint64_t alpha_cache = 0;
  std::uint64_t alpha_mem = 0;

  bool operator==(const CoreGeometry&) const = default;
};

/// Largest number of distinct logical qubits touched by any one part.
/// `part_of[v]` is the part of QODG node v; parts are [0, k).
inline std::uint64_t compute_dmax(const Qodg& g, std::span<const std::uint32_t> part_of,
                                  std::uint32_t k) {
  std::vector<std::vector<QubitIndex>> touched(k);
  for (std::size_t v = 0; v < g.nodes.size(); ++v) {
    for (QubitIndex q : g.nodes[v].op.operands()) touched.at(part_of[v]).push_back(q);
  }
  std::uint64_t best = 0;
  for (auto& qs : touched) {
    std::sort(qs.begin(), qs.end());
    qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
    best = std::max<std::uint64_t>(best, qs.size());
  }
  return best;
}

namespace detail {

/// Smallest s >= 0 with s*s*den >= num (i.e. ceil(sqrt(num/den))), num >= 0.
inline std::uint64_t ceil_sqrt_ratio(unsigned __int128 num, unsigned __int128 den) {
  long double approx = std::sqrt(static_cast<long double>(num) / static_cast<long double>(den));
  auto s = static_cast<std::uint64_t>(approx);
  while (s > 0 && static_cast<unsigned __int128>(s - 1) * (s - 1) * den >= num) --s;
  while (static_cast<unsigned __int128>(s) * s * den < num) ++s;
  return s;
}

}  // namespace detail

/// Core side lengths in cells. Square roots are evaluated exactly on the
/// rational radicands, so perfect squares never round up spuriously.
inline CoreGeometry compute_geometry(const QecProfile& profile, const RequpParams& params,
                                     std::uint64_t d_max) {
  params.validate();
  using i128 = __int128;
  const i128 a = static_cast<i128>(params.ancilla_budget);
  const i128 k = params.k;
  const i128 a_min = profile.a_min();
  const i128 l_code = profile.code_length();
  if (a_min <= 0 || l_code <= 0) throw ConfigError("QEC profile has no usable rows");

  CoreGeometry g;
  g.d_max = d_max;

  // QRCR radicand (A/k)/A_min*L_code + A/k - D_max/2 over the common
  // denominator 2*k*A_min.
  i128 qrcr_num = 2 * a * l_code + 2 * a * a_min - static_cast<i128>(d_max) * k * a_min;
  if (qrcr_num < 0) {
    throw ConfigError("ancilla budget too small for data-qubit population (A=" +
                      std::to_string(params.ancilla_budget) + ", k=" + std::to_string(params.k) +
                      ", D_max=" + std::to_string(d_max) + ")");
  }
  g.alpha_qrcr = detail::ceil_sqrt_ratio(static_cast<unsigned __int128>(qrcr_num),
                                         static_cast<unsigned __int128>(2 * k * a_min));

  // Core radicand D_max*L_code + A/k over denominator k.
  i128 core_num = static_cast<i128>(d_max) * l_code * k + a;
  g.alpha_core = detail::ceil_sqrt_ratio(static_cast<unsigned __int128>(core_num),
                                         static_cast<unsigned __int128>(k));

  // Cache ring sized for twice the QRCR area, capped by the room left in the
  // core; floored to whole cells.
  const long double ratio = (std::sqrt(3.0L) - 1.0L) / 2.0L;
  auto cache_by_area =
      static_cast<std::int64_t>(std::ceil(ratio * static_cast<long double>(g.alpha_qrcr)));
  std::int64_t spare = static_cast<std::int64_t>(g.alpha_core) - static_cast<std::int64_t>(g.alpha_qrcr);
  // min(cache_by_area, spare/2) floored: compare 2*cache_by_area with spare.
  std::int64_t cache = 2 * cache_by_area <= spare ? cache_by_area
                                                  : (spare >= 0 ? spare / 2 : -((-spare + 1) / 2));
  g.alpha_cache = static_cast<std::uint64_t>(std::max<std::int64_t>(cache, 0));

  // Memory ring: ceil(alpha_core/2 - alpha_qrcr/2 - alpha_cache), clamped at 0.
  std::int64_t twice_mem = static_cast<std::int64_t>(g.alpha_core) -
                           static_cast<std::int64_t>(g.alpha_qrcr) -
                           2 * static_cast<std::int64_t>(g.alpha_cache);
  std::int64_t mem = twice_mem >= 0 ? (twice_mem + 1) / 2 : -((-twice_mem) / 2);
  g.alpha_mem = static_cast<std::uint64_t>(std::max<std::int64_t>(mem, 0));
  return g;
}

struct GridCoord {
  std::int64_t row = 0;
  std::int64_t col = 0;

  bool operator==(const GridCoord&) const = default;
};

struct GridLayout {
  std::uint32_t k = 1;
  std::uint32_t rows = 1;
  std::uint32_t cols = 1;

  GridCoord position(std::uint32_t core) const {
    if (core >= k) throw ConfigError("core index " + std::to_string(core) + " out of range");
    return {core / cols, core % cols};
  }

  std::uint64_t manhattan(std::uint32_t x, std::uint32_t y) const {
    GridCoord a = position(x), b = position(y);
    return static_cast<std::uint64_t>(std::llabs(a.row - b.row) + std::llabs(a.col - b.col));
  }
};

/// rows = floor(sqrt(k)), cols = ceil(k / rows); core i sits at
/// (i / cols, i % cols), leaving trailing slots empty for non-rectangular k.
inline GridLayout grid_layout(std::uint32_t k) {
  if (k < 1) throw ConfigError("core count k must be >= 1");
  std::uint32_t rows = 1;
  while (static_cast<std::uint64_t>(rows + 1) * (rows + 1) <= k) ++rows;
  std::uint32_t cols = (k + rows - 1) / rows;
  return {k, rows, cols};
}

struct DelayMatrix {
  std::uint32_t k = 1;
  GridLayout grid;
  std::vector<double> values;  // row-major k*k, microseconds

  double at(std::uint32_t x, std::uint32_t y) const { return values.at(x * k + y); }
};

/// Inter-core entries scale with Manhattan distance; the diagonal is the
/// cache-to-QRCR load delay.
inline DelayMatrix delay_matrix(const CoreGeometry& geom, const RequpParams& params,
                                const GridLayout& layout) {
  DelayMatrix d{layout.k, layout, std::vector<double>(std::size_t{layout.k} * layout.k, 0.0)};
  const double hop = static_cast<double>(geom.alpha_core + params.alpha_int) * params.beta_pmd_us;
  const double intra = (static_cast<double>(geom.alpha_qrcr + geom.alpha_cache) +
                        params.gamma_mem * static_cast<double>(geom.alpha_mem)) /
                       2.0 * params.beta_pmd_us;
  for (std::uint32_t x = 0; x < layout.k; ++x) {
    for (std::uint32_t y = 0; y < layout.k; ++y) {
      d.values[x * layout.k + y] =
          x == y ? intra : static_cast<double>(layout.manhattan(x, y)) * hop;
    }
  }
  return d;
}

/// Column-first then row-wise path, both endpoints included.
inline std::vector<GridCoord> xy_route(std::uint32_t from, std::uint32_t to,
                                       const GridLayout& layout) {
  GridCoord cur = layout.position(from);
  const GridCoord dst = layout.position(to);
  std::vector<GridCoord> path{cur};
  while (cur.col != dst.col) {
    cur.col += dst.col > cur.col ? 1 : -1;
    path.push_back(cur);
  }
  while (cur.row != dst.row) {
    cur.row += dst.row > cur.row ? 1 : -1;
    path.push_back(cur);
  }
  return path;
}

}  // namespace qkmap
