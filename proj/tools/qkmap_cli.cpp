// qkmap command-line front end.
//
//   qkmap map <netlist> --qec <profile> -k 4 -A 800 [--out report.txt]
//   qkmap sweep-budget <netlist> --qec <profile> -k 4 --from 400 --to 1600 --step 100
//   qkmap sweep-cores <netlist> --qec <profile> -A 800 --k-list 1,2,4,8
//
// Exit codes: 0 success, 2 configuration error, 3 parse error, 1 internal error.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qkmap/qkmap.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitParse = 3;
constexpr int kExitInternal = 1;

struct CommonOptions {
  std::string netlist;
  std::string qec;
  std::uint32_t k = 4;
  std::uint64_t ancilla = 800;
  double beta_pmd = 10.0;
  std::uint32_t alpha_int = 3;
  double gamma_mem = 0.2;
  double cycle_time = 1.0;
  double epsilon = 0.1;
  std::uint64_t seed = 1;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_k, bool with_a) {
  cmd->add_option("netlist", o.netlist, "Netlist file")->required();
  cmd->add_option("--qec", o.qec, "QEC profile file, or a bundled name (steane, bacon-shor)")
      ->required();
  if (with_k) cmd->add_option("-k", o.k, "Core count")->capture_default_str();
  if (with_a) cmd->add_option("-A", o.ancilla, "Total ancilla budget")->capture_default_str();
  cmd->add_option("--beta-pmd", o.beta_pmd, "Qubit unit-distance delay (us)")->capture_default_str();
  cmd->add_option("--alpha-int", o.alpha_int, "Interconnect width (cells)")->capture_default_str();
  cmd->add_option("--gamma-mem", o.gamma_mem, "Memory-size routing coefficient")->capture_default_str();
  cmd->add_option("--cycle-time", o.cycle_time, "Scheduling level length (us)")->capture_default_str();
  cmd->add_option("--epsilon", o.epsilon, "Partition balance tolerance")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Partitioner seed")->capture_default_str();
  cmd->add_option("--out", o.out, "Output file (default: stdout)");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qkmap::ConfigError("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

qkmap::QecProfile resolve_profile(const std::string& name_or_path) {
  std::vector<std::string> warnings;
  qkmap::QecProfile profile;
  if (!std::filesystem::exists(name_or_path)) {
    if (auto bundled = qkmap::bundled_profile(name_or_path)) return *bundled;
  }
  profile = qkmap::parse_qec_profile(read_file(name_or_path), &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';
  return profile;
}

qkmap::MapperConfig make_config(const CommonOptions& o) {
  qkmap::MapperConfig c;
  c.fabric.k = o.k;
  c.fabric.ancilla_budget = o.ancilla;
  c.fabric.beta_pmd_us = o.beta_pmd;
  c.fabric.alpha_int = o.alpha_int;
  c.fabric.gamma_mem = o.gamma_mem;
  c.schedule.cycle_time_us = o.cycle_time;
  c.partition.epsilon = o.epsilon;
  c.partition.seed = o.seed;
  return c;
}

template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw qkmap::ConfigError("cannot write '" + path + "'");
  fn(out);
}

std::vector<std::uint32_t> parse_k_list(const std::string& text) {
  std::vector<std::uint32_t> ks;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      unsigned long v = std::stoul(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      ks.push_back(static_cast<std::uint32_t>(v));
    } catch (const std::exception&) {
      throw qkmap::ConfigError("invalid core count '" + item + "' in --k-list");
    }
  }
  if (ks.empty()) throw qkmap::ConfigError("--k-list is empty");
  return ks;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel-level quantum circuit mapper for multi-core fabrics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qkmap::kToolVersion));

  CommonOptions map_opts;
  std::string dump_qodg, dump_partition;
  bool timings = false;
  auto* map_cmd = app.add_subcommand("map", "Map a netlist and write the mapping report");
  add_common(map_cmd, map_opts, true, true);
  map_cmd->add_option("--dump-qodg", dump_qodg, "Write each kernel's QODG as Graphviz");
  map_cmd->add_option("--dump-partition", dump_partition, "Write each kernel's partition as CSV");
  map_cmd->add_flag("--timings", timings, "Append per-phase wall-clock timings to the report");

  CommonOptions budget_opts;
  std::uint64_t from = 0, to = 0, step = 100;
  bool coupled = false;
  auto* budget_cmd = app.add_subcommand("sweep-budget", "Latency versus total ancilla budget");
  add_common(budget_cmd, budget_opts, true, false);
  budget_cmd->add_option("--from", from, "First budget")->required();
  budget_cmd->add_option("--to", to, "Last budget")->required();
  budget_cmd->add_option("--step", step, "Budget increment")->capture_default_str();
  budget_cmd->add_flag("--coupled-geometry", coupled,
                       "Size cores from each swept budget instead of the largest one");

  CommonOptions cores_opts;
  std::string k_list = "1,2,4,8";
  auto* cores_cmd = app.add_subcommand("sweep-cores", "Latency and runtime versus core count");
  add_common(cores_cmd, cores_opts, false, true);
  cores_cmd->add_option("--k-list", k_list, "Comma-separated core counts")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (map_cmd->parsed()) {
      auto t0 = std::chrono::steady_clock::now();
      qkmap::KernelProgram program = qkmap::parse_program(read_file(map_opts.netlist));
      double parse_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      qkmap::QecProfile profile = resolve_profile(map_opts.qec);
      qkmap::MappingReport report = qkmap::map_program(program, profile, make_config(map_opts));
      report.timings.parse_ms = parse_ms;
      with_output(map_opts.out, [&](std::ostream& out) { qkmap::write_report(out, report, timings); });
      if (!dump_qodg.empty()) {
        with_output(dump_qodg, [&](std::ostream& out) {
          for (const auto& m : report.kernels) qkmap::write_qodg_dot(out, m.qodg, m.kernel_id, program.qubits);
        });
      }
      if (!dump_partition.empty()) {
        with_output(dump_partition, [&](std::ostream& out) {
          out << "kernel,node,part\n";
          for (const auto& m : report.kernels)
            for (std::size_t v = 0; v < m.partition.assignment.size(); ++v)
              out << m.kernel_id << ',' << v << ',' << m.partition.assignment[v] << '\n';
        });
      }
    } else if (budget_cmd->parsed()) {
      if (step == 0) throw qkmap::ConfigError("--step must be positive");
      if (to < from) throw qkmap::ConfigError("--to must not be below --from");
      std::vector<std::uint64_t> budgets;
      for (std::uint64_t a = from; a <= to; a += step) budgets.push_back(a);
      qkmap::KernelProgram program = qkmap::parse_program(read_file(budget_opts.netlist));
      qkmap::QecProfile profile = resolve_profile(budget_opts.qec);
      qkmap::BudgetSweepOptions options;
      options.coupled_geometry = coupled;
      qkmap::SweepResult sweep =
          qkmap::sweep_budget(program, profile, make_config(budget_opts), budgets, options);
      for (const std::string& w : sweep.warnings) std::cerr << "warning: " << w << '\n';
      if (sweep.unbounded_latency_us)
        std::cerr << "unbounded-budget latency_us: " << *sweep.unbounded_latency_us << '\n';
      if (sweep.saturation_budget)
        std::cerr << "saturation budget: " << *sweep.saturation_budget << '\n';
      with_output(budget_opts.out, [&](std::ostream& out) { qkmap::write_sweep_csv(out, sweep); });
      if (sweep.points.empty()) throw qkmap::ConfigError("no feasible budget in the sweep");
    } else if (cores_cmd->parsed()) {
      std::vector<std::uint32_t> ks = parse_k_list(k_list);
      qkmap::KernelProgram program = qkmap::parse_program(read_file(cores_opts.netlist));
      qkmap::QecProfile profile = resolve_profile(cores_opts.qec);
      qkmap::SweepResult sweep = qkmap::sweep_cores(program, profile, make_config(cores_opts), ks);
      for (const std::string& w : sweep.warnings) std::cerr << "warning: " << w << '\n';
      with_output(cores_opts.out, [&](std::ostream& out) { qkmap::write_sweep_csv(out, sweep); });
      if (sweep.points.empty()) throw qkmap::ConfigError("no feasible core count in the sweep");
    }
  } catch (const qkmap::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const qkmap::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}
