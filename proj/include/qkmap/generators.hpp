#pragma once

// Synthetic netlists used by the sweeps, the CLI samples and the tests.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qkmap/circuit_ir.hpp"

namespace qkmap::gen {

/// Fault-tolerant Toffoli over the {H, T, Tdg, CNOT} set (15 operations).
inline void append_toffoli(std::ostream& out, const std::string& a, const std::string& b,
                           const std::string& c) {
  out << "H " << c << '\n'
      << "CNOT " << b << ',' << c << '\n'
      << "Tdg " << c << '\n'
      << "CNOT " << a << ',' << c << '\n'
      << "T " << c << '\n'
      << "CNOT " << b << ',' << c << '\n'
      << "Tdg " << c << '\n'
      << "CNOT " << a << ',' << c << '\n'
      << "T " << b << '\n'
      << "T " << c << '\n'
      << "H " << c << '\n'
      << "CNOT " << a << ',' << b << '\n'
      << "T " << a << '\n'
      << "Tdg " << b << '\n'
      << "CNOT " << a << ',' << b << '\n';
}

inline std::string toffoli_netlist() {
  std::ostringstream out;
  out << "qubit a\nqubit b\nqubit c\n";
  append_toffoli(out, "a", "b", "c");
  return out.str();
}

struct WalkParams {
  std::uint32_t qubits = 24;
  std::uint32_t toffolis = 30;     // per walk step
  std::uint32_t extra_gates = 50;  // single-qubit and CNOT filler per step
  std::uint64_t steps = 5;         // repetitions of the step kernel
  std::uint64_t seed = 7;
};

/// Quantum-walk-like program: a random oracle step (Toffolis plus filler)
/// wrapped in one kernel, replayed `steps` times, with an implicit
/// initialization run of Hadamards in front.
inline std::string walk_netlist(const WalkParams& p) {
  std::mt19937_64 rng(p.seed);
  auto pick = [&](std::uint32_t bound) { return static_cast<std::uint32_t>(rng() % bound); };
  auto name = [](std::uint32_t i) { return "w" + std::to_string(i); };

  std::ostringstream out;
  out << "# synthetic quantum-walk benchmark\n";
  for (std::uint32_t i = 0; i < p.qubits; ++i) out << "qubit " << name(i) << '\n';
  for (std::uint32_t i = 0; i < p.qubits; ++i) out << "H " << name(i) << '\n';
  out << ".kernel walk_step\n";
  const std::uint32_t total = p.toffolis + p.extra_gates;
  std::uint32_t toffolis_left = p.toffolis;
  for (std::uint32_t i = 0; i < total; ++i) {
    bool toffoli = toffolis_left > 0 && pick(total - i) < toffolis_left;
    if (toffoli) {
      --toffolis_left;
      std::uint32_t a = pick(p.qubits), b = pick(p.qubits - 1), c = pick(p.qubits - 2);
      if (b >= a) ++b;
      std::uint32_t lo = std::min(a, b), hi = std::max(a, b);
      if (c >= lo) ++c;
      if (c >= hi) ++c;
      append_toffoli(out, name(a), name(b), name(c));
    } else {
      switch (pick(4)) {
        case 0: out << "X " << name(pick(p.qubits)) << '\n'; break;
        case 1: out << "H " << name(pick(p.qubits)) << '\n'; break;
        case 2: out << "S " << name(pick(p.qubits)) << '\n'; break;
        default: {
          std::uint32_t a = pick(p.qubits), b = pick(p.qubits - 1);
          if (b >= a) ++b;
          out << "CNOT " << name(a) << ',' << name(b) << '\n';
        }
      }
    }
  }
  out << ".endkernel\n";
  out << ".call walk_step x" << p.steps << '\n';
  return out.str();
}

/// Phase estimation: n control qubits, each driving its own controlled-U
/// kernel over a shared target register; kernel j is called 2^j times.
/// All controlled-U kernels are structurally identical.
inline std::string phase_estimation_netlist(std::uint32_t controls, std::uint32_t targets = 3) {
  std::ostringstream out;
  for (std::uint32_t i = 0; i < controls; ++i) out << "qubit c" << i << '\n';
  for (std::uint32_t i = 0; i < targets; ++i) out << "qubit t" << i << '\n';
  for (std::uint32_t i = 0; i < controls; ++i) out << "H c" << i << '\n';
  for (std::uint32_t j = 0; j < controls; ++j) {
    out << ".kernel cu" << j << '\n';
    std::string c = "c" + std::to_string(j);
    for (std::uint32_t t = 0; t < targets; ++t) {
      std::string tgt = "t" + std::to_string(t);
      out << "CNOT " << c << ',' << tgt << '\n' << "T " << tgt << '\n';
    }
    if (targets >= 2) append_toffoli(out, c, "t0", "t1");
    out << ".endkernel\n";
  }
  for (std::uint32_t j = 0; j < controls; ++j)
    out << ".call cu" << j << " x" << (std::uint64_t{1} << j) << '\n';
  // Inverse-QFT stand-in on the controls.
  for (std::uint32_t i = 0; i < controls; ++i) {
    out << "H c" << i << '\n';
    for (std::uint32_t j = i + 1; j < controls; ++j) out << "CNOT c" << j << ",c" << i << '\n';
  }
  return out.str();
}

/// `chains` independent single-qubit chains of `length` alternating H/T ops
/// in one kernel.
inline std::string parallel_chains_netlist(std::uint32_t chains, std::uint32_t length) {
  std::ostringstream out;
  for (std::uint32_t c = 0; c < chains; ++c) out << "qubit q" << c << '\n';
  out << ".kernel chains\n";
  for (std::uint32_t c = 0; c < chains; ++c)
    for (std::uint32_t i = 0; i < length; ++i) out << (i % 2 ? "T" : "H") << " q" << c << '\n';
  out << ".endkernel\n.call chains\n";
  return out.str();
}

/// A single level of `count` Hadamards on distinct qubits.
inline std::string hadamard_level_netlist(std::uint32_t count) {
  std::ostringstream out;
  for (std::uint32_t i = 0; i < count; ++i) out << "qubit q" << i << '\n';
  for (std::uint32_t i = 0; i < count; ++i) out << "H q" << i << '\n';
  return out.str();
}

}  // namespace qkmap::gen
