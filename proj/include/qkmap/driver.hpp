#pragma once

// Whole-program mapping: every distinct kernel goes through QODG construction,
// partitioning, core geometry, binding and scheduling exactly once; stages
// then replay their representative's schedule serially.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "qkmap/binding.hpp"
#include "qkmap/circuit_ir.hpp"
#include "qkmap/errors.hpp"
#include "qkmap/fabric.hpp"
#include "qkmap/partition.hpp"
#include "qkmap/qec_profile.hpp"
#include "qkmap/qodg.hpp"
#include "qkmap/scheduling.hpp"

namespace qkmap {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct MapperConfig {
  RequpParams fabric;
  ScheduleConfig schedule;
  PartitionOptions partition;
  BindOptions binding;
  /// When set, cores are sized for this total budget instead of
  /// fabric.ancilla_budget; the scheduler still enforces fabric.ancilla_budget.
  std::optional<std::uint64_t> geometry_budget;
};

struct PhaseTimings {
  double parse_ms = 0.0;
  double qodg_ms = 0.0;
  double partition_ms = 0.0;
  double bind_ms = 0.0;
  double schedule_ms = 0.0;
};

struct KernelMapping {
  std::string kernel_id;
  std::uint64_t multiplicity = 0;
  Qodg qodg;
  WeightVectors weights;
  Partition partition;
  CoreGeometry geometry;
  DelayMatrix delays;
  Binding binding;
  QuantizedDelays quantized;
  MappedSchedule schedule;
  double critical_path_us = 0.0;  // without routing
  double latency_us = 0.0;
};

struct StageReport {
  std::string kernel_id;
  std::string representative_id;
  std::uint64_t repetitions = 1;
  double latency_us = 0.0;  // one instance
};

struct MappingReport {
  MapperConfig config;
  std::string qec_code;
  std::uint32_t code_length = 0;
  GridLayout grid;
  std::vector<KernelMapping> kernels;  // one per representative, first-call order
  std::vector<StageReport> stages;
  double program_latency_us = 0.0;
  std::vector<std::uint64_t> peak_ancilla_per_core;  // max over kernels
  std::size_t schedules_computed = 0;
  PhaseTimings timings;
  std::vector<std::string> assumptions;

  const KernelMapping& kernel(std::string_view id) const {
    for (const KernelMapping& k : kernels)
      if (k.kernel_id == id) return k;
    throw ConfigError("no mapping for kernel '" + std::string(id) + "'");
  }
};

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace detail

/// Largest ancilla requirement among the operations the program executes.
inline std::uint64_t max_used_ancilla(const KernelProgram& program, const QecProfile& profile) {
  std::uint64_t best = 0;
  for (const Stage& s : program.sequence.stages)
    for (const QuantumOp& op : program.kernel(s.kernel_id).body)
      best = std::max<std::uint64_t>(best, profile.row(op.kind).ancilla);
  return best;
}

/// Maps one kernel body onto the fabric.
inline KernelMapping map_kernel(const Kernel& kernel, const QecProfile& profile,
                                const MapperConfig& config, PhaseTimings* timings = nullptr) {
  using clock = std::chrono::steady_clock;
  PhaseTimings local;
  PhaseTimings& t = timings != nullptr ? *timings : local;
  const RequpParams& fabric = config.fabric;

  KernelMapping m;
  m.kernel_id = kernel.id;

  auto t0 = clock::now();
  m.qodg = build_qodg(kernel, profile);
  m.critical_path_us = critical_path(m.qodg);
  t.qodg_ms += detail::elapsed_ms(t0);

  t0 = clock::now();
  m.weights = assign_weight_vectors(m.qodg, fabric.k);
  m.partition = kway_partition(m.qodg, m.weights, config.partition);
  t.partition_ms += detail::elapsed_ms(t0);

  t0 = clock::now();
  RequpParams sizing = fabric;
  if (config.geometry_budget) sizing.ancilla_budget = *config.geometry_budget;
  std::uint64_t d_max = compute_dmax(m.qodg, m.partition.assignment, fabric.k);
  m.geometry = compute_geometry(profile, sizing, d_max);
  GridLayout layout = grid_layout(fabric.k);
  m.delays = delay_matrix(m.geometry, fabric, layout);
  m.binding = bind_parts(m.partition.traffic, m.delays, config.binding);
  t.bind_ms += detail::elapsed_ms(t0);

  t0 = clock::now();
  m.quantized = quantize(m.qodg, m.delays, config.schedule);
  m.schedule = list_schedule(m.qodg, m.partition.assignment, m.binding, fabric.per_core_budget(),
                             m.quantized, config.schedule, layout);
  VerificationResult check = verify_schedule(m.schedule, m.qodg, m.partition.assignment, m.binding,
                                             fabric.per_core_budget(), m.quantized);
  if (!check.ok()) {
    const Violation& v = check.violations.front();
    throw InternalError("schedule for kernel '" + kernel.id + "' failed verification: " +
                        std::string(to_string(v.kind)) + " " + v.detail);
  }
  m.latency_us = m.schedule.latency_us;
  t.schedule_ms += detail::elapsed_ms(t0);
  return m;
}

inline std::vector<std::string> default_assumptions(const MapperConfig& config) {
  std::vector<std::string> a = {
      "computational stages run serially; qubit hand-off latency between stages is not modeled",
      "every repetition of a kernel replays the single mapping of its representative",
      "data qubits are not tracked across stages; each kernel mapping starts from its own placement",
      "interconnect links are uncontended; xy routes are reported but not scheduled as resources",
      "dependencies inside one core pay the cache-to-QRCR load delay",
      "core geometry is derived per kernel from its own D_max",
      "operation delays and routing delays are rounded up to whole scheduling levels",
  };
  if (config.geometry_budget && *config.geometry_budget != config.fabric.ancilla_budget) {
    a.push_back("cores are sized for an ancilla budget of " + std::to_string(*config.geometry_budget) +
                " while the scheduler enforces " + std::to_string(config.fabric.ancilla_budget));
  }
  return a;
}

inline MappingReport map_program(const KernelProgram& program, const QecProfile& profile,
                                 const MapperConfig& config) {
  config.fabric.validate();
  config.schedule.validate();
  if (program.sequence.stages.empty()) throw ConfigError("empty program: no stages to map");

  const std::uint64_t needed = max_used_ancilla(program, profile);
  if (config.fabric.per_core_budget() < needed) {
    throw ConfigError("per-core ancilla budget A/k = " + std::to_string(config.fabric.per_core_budget()) +
                      " is below the largest operation requirement " + std::to_string(needed));
  }

  MappingReport report;
  report.config = config;
  report.qec_code = profile.code_name();
  report.code_length = profile.code_length();
  report.grid = grid_layout(config.fabric.k);
  report.assumptions = default_assumptions(config);
  report.peak_ancilla_per_core.assign(config.fabric.k, 0);

  KernelSet set = identify_kernels(program);
  for (const std::string& rep : set.representatives) {
    KernelMapping m = map_kernel(program.kernel(rep), profile, config, &report.timings);
    ++report.schedules_computed;
    m.multiplicity = set.multiplicity(rep);
    for (std::uint32_t c = 0; c < config.fabric.k; ++c)
      report.peak_ancilla_per_core[c] = std::max(report.peak_ancilla_per_core[c], m.schedule.peak_ancilla(c));
    report.kernels.push_back(std::move(m));
  }

  for (const KernelInstance& inst : set.instances) {
    double latency = report.kernel(inst.representative_id).latency_us;
    report.stages.push_back({inst.kernel_id, inst.representative_id, inst.repetitions, latency});
    report.program_latency_us += static_cast<double>(inst.repetitions) * latency;
  }
  return report;
}

namespace detail {

/// Shortest decimal that round-trips at 12 significant digits; integers
/// print without a fraction.
inline std::string format_number(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

template <typename T>
inline void write_row(std::ostream& out, std::span<const T> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ' ';
    if constexpr (std::is_floating_point_v<T>)
      out << format_number(values[i]);
    else
      out << values[i];
  }
}

}  // namespace detail

/// Structured-text report. Timings are omitted unless requested.
inline void write_report(std::ostream& out, const MappingReport& r, bool include_timings = false) {
  using detail::format_number;
  const MapperConfig& c = r.config;
  const std::uint32_t k = c.fabric.k;

  out << "qkmap-report: 1\n";
  out << "tool_version: " << kToolVersion << '\n';
  out << "config:\n";
  out << "  qec_code: " << r.qec_code << '\n';
  out << "  code_length: " << r.code_length << '\n';
  out << "  k: " << k << '\n';
  out << "  ancilla_budget: " << c.fabric.ancilla_budget << '\n';
  out << "  ancilla_per_core: " << c.fabric.per_core_budget() << '\n';
  out << "  geometry_budget: " << c.geometry_budget.value_or(c.fabric.ancilla_budget) << '\n';
  out << "  beta_pmd_us: " << format_number(c.fabric.beta_pmd_us) << '\n';
  out << "  alpha_int: " << c.fabric.alpha_int << '\n';
  out << "  gamma_mem: " << format_number(c.fabric.gamma_mem) << '\n';
  out << "  cycle_time_us: " << format_number(c.schedule.cycle_time_us) << '\n';
  out << "  epsilon: " << format_number(c.partition.epsilon) << '\n';
  out << "  seed: " << c.partition.seed << '\n';

  out << "FABRIC:\n";
  out << "  grid: " << r.grid.rows << 'x' << r.grid.cols << '\n';
  out << "  cores:\n";
  for (std::uint32_t core = 0; core < k; ++core) {
    GridCoord p = r.grid.position(core);
    out << "    " << core << ": " << p.row << ',' << p.col << '\n';
  }
  for (const KernelMapping& m : r.kernels) {
    out << "  kernel " << m.kernel_id << ":\n";
    out << "    d_max: " << m.geometry.d_max << '\n';
    out << "    alpha_qrcr: " << m.geometry.alpha_qrcr << '\n';
    out << "    alpha_core: " << m.geometry.alpha_core << '\n';
    out << "    alpha_cache: " << m.geometry.alpha_cache << '\n';
    out << "    alpha_mem: " << m.geometry.alpha_mem << '\n';
    out << "    delay_us:\n";
    for (std::uint32_t x = 0; x < k; ++x) {
      out << "      " << x << ": ";
      detail::write_row<double>(out, std::span<const double>(m.delays.values).subspan(std::size_t{x} * k, k));
      out << '\n';
    }
  }

  out << "KERNELS:\n";
  for (const KernelMapping& m : r.kernels) {
    out << "  kernel " << m.kernel_id << ":\n";
    out << "    multiplicity: " << m.multiplicity << '\n';
    out << "    ops: " << m.qodg.nodes.size() << '\n';
    out << "    edges: " << m.qodg.edges.size() << '\n';
    out << "    levels: " << m.qodg.level_count() << '\n';
    out << "    n_con: " << m.weights.n_con() << '\n';
    out << "    critical_path_us: " << format_number(m.critical_path_us) << '\n';
    out << "    partition:\n";
    out << "      cut_weight: " << m.partition.cut_weight << '\n';
    for (std::uint32_t p = 0; p < k; ++p) {
      out << "      part " << p << ":";
      for (std::size_t v = 0; v < m.partition.assignment.size(); ++v)
        if (m.partition.assignment[v] == p) out << ' ' << v;
      out << '\n';
    }
    out << "      traffic:\n";
    for (std::uint32_t p = 0; p < k; ++p) {
      out << "        " << p << ": ";
      detail::write_row<std::uint64_t>(
          out, std::span<const std::uint64_t>(m.partition.traffic).subspan(std::size_t{p} * k, k));
      out << '\n';
    }
    out << "    binding:\n";
    out << "      exhaustive: " << (m.binding.exhaustive ? "true" : "false") << '\n';
    out << "      cost: " << format_number(m.binding.cost) << '\n';
    out << "      part_to_core: ";
    detail::write_row<std::uint32_t>(out, m.binding.part_to_core);
    out << '\n';
    out << "    schedule:\n";
    out << "      makespan_levels: " << m.schedule.makespan << '\n';
    out << "      latency_us: " << format_number(m.latency_us) << '\n';
    out << "      peak_ancilla: ";
    for (std::uint32_t core = 0; core < k; ++core) out << (core ? " " : "") << m.schedule.peak_ancilla(core);
    out << '\n';
    out << "      routes: " << m.schedule.routes.size() << '\n';
    out << "      rows: op_id kind core start dur\n";
    for (const ScheduledOp& op : m.schedule.ops) {
      out << "        " << op.node << ' ' << to_string(m.qodg.nodes[op.node].op.kind) << ' ' << op.core
          << ' ' << op.start << ' ' << op.duration << '\n';
    }
  }

  out << "PROGRAM:\n";
  out << "  stages:\n";
  for (std::size_t i = 0; i < r.stages.size(); ++i) {
    const StageReport& s = r.stages[i];
    out << "    " << i << ": " << s.kernel_id << " representative " << s.representative_id
        << " repetitions " << s.repetitions << " latency_us " << format_number(s.latency_us) << '\n';
  }
  out << "  schedules_computed: " << r.schedules_computed << '\n';
  out << "  peak_ancilla_per_core: ";
  detail::write_row<std::uint64_t>(out, r.peak_ancilla_per_core);
  out << '\n';
  out << "  total_latency_us: " << format_number(r.program_latency_us) << '\n';

  if (include_timings) {
    out << "TIMINGS:\n";
    out << "  parse_ms: " << format_number(r.timings.parse_ms) << '\n';
    out << "  qodg_ms: " << format_number(r.timings.qodg_ms) << '\n';
    out << "  partition_ms: " << format_number(r.timings.partition_ms) << '\n';
    out << "  bind_ms: " << format_number(r.timings.bind_ms) << '\n';
    out << "  schedule_ms: " << format_number(r.timings.schedule_ms) << '\n';
  }

  out << "ASSUMPTIONS:\n";
  for (const std::string& a : r.assumptions) out << "  - " << a << '\n';
}

inline std::string report_text(const MappingReport& r, bool include_timings = false) {
  std::ostringstream s;
  write_report(s, r, include_timings);
  return s.str();
}

struct SweepPoint {
  double axis = 0.0;
  double latency_us = 0.0;
  double runtime_ms = 0.0;
};

struct SweepResult {
  std::string axis;  // "A" or "k"
  std::vector<SweepPoint> points;
  std::vector<std::string> warnings;
  /// Budget sweeps: latency with every level able to run concurrently, and
  /// the smallest swept budget reaching it.
  std::optional<double> unbounded_latency_us;
  std::optional<double> saturation_budget;
};

struct BudgetSweepOptions {
  /// Re-derive core geometry from each swept budget. Off by default: cores
  /// are sized once for the largest budget.
  bool coupled_geometry = false;
};

inline SweepResult sweep_budget(const KernelProgram& program, const QecProfile& profile,
                                const MapperConfig& base, std::span<const std::uint64_t> budgets,
                                const BudgetSweepOptions& options = {}) {
  using clock = std::chrono::steady_clock;
  SweepResult result;
  result.axis = "A";
  const std::uint64_t needed = max_used_ancilla(program, profile);
  const std::uint32_t k = base.fabric.k;

  std::vector<std::uint64_t> feasible;
  for (std::uint64_t a : budgets) {
    if (a / k < needed) {
      result.warnings.push_back("skipping A=" + std::to_string(a) + ": A/k=" + std::to_string(a / k) +
                                " below largest operation requirement " + std::to_string(needed));
      continue;
    }
    feasible.push_back(a);
  }
  std::sort(feasible.begin(), feasible.end());
  feasible.erase(std::unique(feasible.begin(), feasible.end()), feasible.end());
  if (feasible.empty()) return result;

  std::optional<std::uint64_t> sizing;
  if (!options.coupled_geometry) sizing = base.geometry_budget.value_or(feasible.back());

  for (std::uint64_t a : feasible) {
    MapperConfig cfg = base;
    cfg.fabric.ancilla_budget = a;
    cfg.geometry_budget = sizing;
    auto t0 = clock::now();
    try {
      MappingReport r = map_program(program, profile, cfg);
      result.points.push_back({static_cast<double>(a), r.program_latency_us, detail::elapsed_ms(t0)});
    } catch (const ConfigError& e) {
      result.warnings.push_back("skipping A=" + std::to_string(a) + ": " + e.what());
    }
  }

  if (!options.coupled_geometry && !result.points.empty()) {
    // Enough ancilla per core for every operation of every kernel at once.
    std::uint64_t all_at_once = 0;
    for (const std::string& rep : identify_kernels(program).representatives) {
      std::uint64_t sum = 0;
      for (const QuantumOp& op : program.kernel(rep).body) sum += profile.row(op.kind).ancilla;
      all_at_once = std::max(all_at_once, sum);
    }
    MapperConfig cfg = base;
    cfg.fabric.ancilla_budget = std::max<std::uint64_t>(all_at_once, needed) * k;
    cfg.geometry_budget = sizing;
    double unbounded = map_program(program, profile, cfg).program_latency_us;
    result.unbounded_latency_us = unbounded;
    for (const SweepPoint& p : result.points) {
      if (p.latency_us <= unbounded + 1e-9 * std::max(1.0, unbounded)) {
        result.saturation_budget = p.axis;
        break;
      }
    }
  }
  return result;
}

inline SweepResult sweep_cores(const KernelProgram& program, const QecProfile& profile,
                               const MapperConfig& base, std::span<const std::uint32_t> core_counts) {
  using clock = std::chrono::steady_clock;
  SweepResult result;
  result.axis = "k";
  std::vector<std::uint32_t> ks(core_counts.begin(), core_counts.end());
  ks.push_back(1);
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  for (std::uint32_t k : ks) {
    if (k == 0) {
      result.warnings.push_back("skipping k=0");
      continue;
    }
    MapperConfig cfg = base;
    cfg.fabric.k = k;
    auto t0 = clock::now();
    try {
      MappingReport r = map_program(program, profile, cfg);
      result.points.push_back({static_cast<double>(k), r.program_latency_us, detail::elapsed_ms(t0)});
    } catch (const ConfigError& e) {
      result.warnings.push_back("skipping k=" + std::to_string(k) + ": " + e.what());
    }
  }
  return result;
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
  out << "axis,latency_us,runtime_ms\n";
  for (const SweepPoint& p : sweep.points) {
    out << detail::format_number(p.axis) << ',' << detail::format_number(p.latency_us) << ','
        << std::fixed << std::setprecision(3) << p.runtime_ms << std::defaultfloat << '\n';
  }
}

}  // namespace qkmap
