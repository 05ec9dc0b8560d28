#pragma once

// Hierarchical netlist IR: qubit declarations, kernel blocks, stage calls.
//
// Text format (one statement per line, '#' starts a comment):
//
//   qubit <name>
//   .kernel <id>
//     <GATE> <q>[,<q>]
//   .endkernel
//   .call <id> [x<count>]
//   <GATE> <q>[,<q>]          # loose gate, wrapped in an implicit kernel
//
// Loose gates outside any block are grouped into one implicit kernel per
// maximal contiguous run; a run is broken only by `.kernel` blocks and `.call`
// statements.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qkmap/errors.hpp"

namespace qkmap {

using QubitIndex = std::uint32_t;

enum class OpKind : std::uint8_t { H, S, T, Tdg, X, Y, Z, CNOT };

inline constexpr std::array<OpKind, 8> kAllOpKinds = {
    OpKind::H, OpKind::S, OpKind::T, OpKind::Tdg,
    OpKind::X, OpKind::Y, OpKind::Z, OpKind::CNOT};

constexpr std::string_view to_string(OpKind kind) {
  switch (kind) {
    case OpKind::H: return "H";
    case OpKind::S: return "S";
    case OpKind::T: return "T";
    case OpKind::Tdg: return "Tdg";
    case OpKind::X: return "X";
    case OpKind::Y: return "Y";
    case OpKind::Z: return "Z";
    case OpKind::CNOT: return "CNOT";
  }
  return "?";
}

constexpr std::size_t arity(OpKind kind) { return kind == OpKind::CNOT ? 2 : 1; }

/// Case-insensitive gate-name lookup.
inline std::optional<OpKind> parse_op_kind(std::string_view name) {
  for (OpKind kind : kAllOpKinds) {
    std::string_view canonical = to_string(kind);
    if (canonical.size() != name.size()) continue;
    bool equal = true;
    for (std::size_t i = 0; i < name.size() && equal; ++i) {
      equal = std::toupper(static_cast<unsigned char>(name[i])) ==
              std::toupper(static_cast<unsigned char>(canonical[i]));
    }
    if (equal) return kind;
  }
  return std::nullopt;
}

struct LogicalQubit {
  std::string name;
  QubitIndex index = 0;

  bool operator==(const LogicalQubit&) const = default;
};

struct QuantumOp {
  OpKind kind = OpKind::H;
  std::array<QubitIndex, 2> operand_storage{};
  std::uint8_t operand_count = 0;
  std::size_t seq = 0;

  QuantumOp() = default;
  QuantumOp(OpKind k, QubitIndex q, std::size_t s)
      : kind(k), operand_storage{q, 0}, operand_count(1), seq(s) {}
  QuantumOp(OpKind k, QubitIndex a, QubitIndex b, std::size_t s)
      : kind(k), operand_storage{a, b}, operand_count(2), seq(s) {}

  std::span<const QubitIndex> operands() const {
    return {operand_storage.data(), operand_count};
  }

  bool touches(QubitIndex q) const {
    for (QubitIndex o : operands())
      if (o == q) return true;
    return false;
  }

  bool operator==(const QuantumOp& other) const {
    return kind == other.kind && seq == other.seq &&
           std::equal(operands().begin(), operands().end(),
                      other.operands().begin(), other.operands().end());
  }
};

/// Kind plus operand pattern with qubits renamed by first use inside the
/// kernel body. Two kernels are structurally identical iff these match.
struct CanonicalOp {
  OpKind kind;
  std::array<std::uint32_t, 2> operands;
  std::uint8_t operand_count;

  bool operator==(const CanonicalOp&) const = default;
};

struct Kernel {
  std::string id;
  std::vector<QuantumOp> body;
  std::vector<QubitIndex> touched_qubits;  // ascending
  std::uint64_t structural_hash = 0;

  bool operator==(const Kernel&) const = default;
};

struct Stage {
  std::string kernel_id;
  std::uint64_t repetitions = 1;

  bool operator==(const Stage&) const = default;
};

struct StageSequence {
  std::vector<Stage> stages;

  bool operator==(const StageSequence&) const = default;
};

struct KernelProgram {
  std::vector<LogicalQubit> qubits;
  std::vector<Kernel> kernels;  // definition order
  StageSequence sequence;
  std::vector<std::string> distinct_kernels;  // representative ids

  const Kernel* find_kernel(std::string_view id) const {
    for (const Kernel& k : kernels)
      if (k.id == id) return &k;
    return nullptr;
  }

  const Kernel& kernel(std::string_view id) const {
    const Kernel* k = find_kernel(id);
    if (k == nullptr) throw ConfigError("unknown kernel '" + std::string(id) + "'");
    return *k;
  }

  bool operator==(const KernelProgram&) const = default;
};

/// First-use canonical form of a kernel body, plus the first-use qubit order.
inline std::pair<std::vector<CanonicalOp>, std::vector<QubitIndex>> canonical_form(
    std::span<const QuantumOp> body) {
  std::vector<CanonicalOp> ops;
  std::vector<QubitIndex> first_use;
  std::unordered_map<QubitIndex, std::uint32_t> rename;
  ops.reserve(body.size());
  for (const QuantumOp& op : body) {
    CanonicalOp c{op.kind, {0, 0}, op.operand_count};
    for (std::size_t i = 0; i < op.operand_count; ++i) {
      QubitIndex q = op.operand_storage[i];
      auto [it, inserted] = rename.try_emplace(q, static_cast<std::uint32_t>(first_use.size()));
      if (inserted) first_use.push_back(q);
      c.operands[i] = it->second;
    }
    ops.push_back(c);
  }
  return {std::move(ops), std::move(first_use)};
}

/// FNV-1a over the canonical form.
inline std::uint64_t structural_hash(std::span<const QuantumOp> body) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  auto [ops, order] = canonical_form(body);
  mix(ops.size());
  for (const CanonicalOp& c : ops) {
    mix(static_cast<std::uint64_t>(c.kind));
    mix(c.operand_count);
    for (std::size_t i = 0; i < c.operand_count; ++i) mix(c.operands[i]);
  }
  return h;
}

/// Fills touched_qubits and structural_hash from the body.
inline void finalize_kernel(Kernel& k) {
  std::vector<bool> seen;
  k.touched_qubits.clear();
  for (const QuantumOp& op : k.body) {
    for (QubitIndex q : op.operands()) {
      if (q >= seen.size()) seen.resize(q + 1, false);
      if (!seen[q]) {
        seen[q] = true;
        k.touched_qubits.push_back(q);
      }
    }
  }
  std::sort(k.touched_qubits.begin(), k.touched_qubits.end());
  k.structural_hash = structural_hash(k.body);
}

struct KernelInstance {
  std::size_t stage = 0;
  std::string kernel_id;
  std::string representative_id;
  std::uint64_t repetitions = 1;
  /// qubit_binding[i] is the instance qubit playing the role of the
  /// representative's i-th first-used qubit.
  std::vector<QubitIndex> qubit_binding;
};

struct KernelSet {
  std::vector<std::string> representatives;  // first-call order
  std::vector<KernelInstance> instances;      // one per stage

  std::uint64_t multiplicity(std::string_view representative) const {
    std::uint64_t total = 0;
    for (const KernelInstance& inst : instances)
      if (inst.representative_id == representative) total += inst.repetitions;
    return total;
  }
};

/// Merges structurally identical kernels. Kernels never called by a stage are
/// not representatives.
inline KernelSet identify_kernels(const KernelProgram& program) {
  KernelSet result;
  struct Bucket {
    std::string id;
    std::vector<CanonicalOp> canonical;
    std::vector<QubitIndex> first_use;
  };
  std::unordered_map<std::uint64_t, std::vector<Bucket>> buckets;
  std::map<std::string, std::pair<std::string, std::vector<QubitIndex>>, std::less<>> resolved;

  for (std::size_t s = 0; s < program.sequence.stages.size(); ++s) {
    const Stage& stage = program.sequence.stages[s];
    auto it = resolved.find(stage.kernel_id);
    if (it == resolved.end()) {
      const Kernel& k = program.kernel(stage.kernel_id);
      auto [canonical, first_use] = canonical_form(k.body);
      std::vector<Bucket>& candidates = buckets[k.structural_hash];
      const Bucket* match = nullptr;
      for (const Bucket& b : candidates) {
        if (b.canonical == canonical) {
          match = &b;
          break;
        }
      }
      std::string rep;
      if (match == nullptr) {
        candidates.push_back({k.id, canonical, first_use});
        result.representatives.push_back(k.id);
        rep = k.id;
      } else {
        rep = match->id;
      }
      it = resolved.emplace(k.id, std::make_pair(rep, first_use)).first;
    }
    result.instances.push_back(
        {s, stage.kernel_id, it->second.first, stage.repetitions, it->second.second});
  }
  return result;
}

/// Total number of operations executed by the program, honoring repetitions.
inline std::uint64_t flat_size(const KernelProgram& program) {
  std::uint64_t total = 0;
  for (const Stage& s : program.sequence.stages)
    total += s.repetitions * program.kernel(s.kernel_id).body.size();
  return total;
}

/// Fully unrolled operation list; seq renumbered from 0.
inline std::vector<QuantumOp> flat_expansion(const KernelProgram& program) {
  std::vector<QuantumOp> out;
  out.reserve(static_cast<std::size_t>(flat_size(program)));
  for (const Stage& s : program.sequence.stages) {
    const Kernel& k = program.kernel(s.kernel_id);
    for (std::uint64_t r = 0; r < s.repetitions; ++r) {
      for (QuantumOp op : k.body) {
        op.seq = out.size();
        out.push_back(op);
      }
    }
  }
  return out;
}

namespace detail {

inline bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

inline bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '[' || c == ']' ||
         c == '.';
}

inline bool is_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s.front())) return false;
  for (char c : s)
    if (!is_ident_char(c)) return false;
  return true;
}

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

inline std::vector<Token> split_ws(std::string_view line, std::size_t base_column = 1) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back({line.substr(start, i - start), base_column + start});
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Parses the netlist format described at the top of this header.
inline KernelProgram parse_program(std::string_view text) {
  using detail::Token;

  KernelProgram program;
  std::unordered_map<std::string, QubitIndex> qubit_ids;

  struct PendingKernel {
    Kernel kernel;
    bool implicit = false;
    std::size_t line = 0;
  };
  struct PendingCall {
    std::string id;      // empty for implicit kernels
    std::size_t pending_index = 0;
    std::uint64_t repetitions = 1;
    std::size_t line = 0, column = 0;
  };
  std::vector<PendingKernel> pending;
  std::vector<PendingCall> calls;
  std::unordered_map<std::string, std::size_t> kernel_ids;

  std::optional<std::size_t> open_kernel;   // explicit block being parsed
  std::optional<std::size_t> open_implicit; // current loose-gate run
  std::size_t open_line = 0;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);

    std::vector<Token> tokens = detail::split_ws(line);
    if (tokens.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    const Token& head = tokens.front();

    auto fail = [&](std::size_t column, const std::string& msg) -> ParseError {
      return ParseError(line_no, column, msg);
    };
    auto expect_count = [&](std::size_t n) {
      if (tokens.size() != n) {
        std::size_t col = tokens.size() > n ? tokens[n].column : head.column + head.text.size();
        throw fail(col, "expected " + std::to_string(n - 1) + " argument(s) after '" +
                            std::string(head.text) + "'");
      }
    };

    if (head.text == "qubit") {
      expect_count(2);
      if (open_kernel) throw fail(head.column, "qubit declaration inside kernel block");
      std::string name(tokens[1].text);
      if (!detail::is_identifier(name)) throw fail(tokens[1].column, "invalid qubit name '" + name + "'");
      if (qubit_ids.contains(name)) throw fail(tokens[1].column, "duplicate qubit '" + name + "'");
      auto index = static_cast<QubitIndex>(program.qubits.size());
      qubit_ids.emplace(name, index);
      program.qubits.push_back({name, index});
    } else if (head.text == ".kernel") {
      expect_count(2);
      if (open_kernel) throw fail(head.column, "nested .kernel blocks are not allowed");
      std::string id(tokens[1].text);
      if (!detail::is_identifier(id)) throw fail(tokens[1].column, "invalid kernel id '" + id + "'");
      if (kernel_ids.contains(id)) throw fail(tokens[1].column, "duplicate kernel '" + id + "'");
      open_implicit.reset();
      kernel_ids.emplace(id, pending.size());
      pending.push_back({Kernel{id, {}, {}, 0}, false, line_no});
      open_kernel = pending.size() - 1;
      open_line = line_no;
    } else if (head.text == ".endkernel") {
      expect_count(1);
      if (!open_kernel) throw fail(head.column, ".endkernel without matching .kernel");
      if (pending[*open_kernel].kernel.body.empty())
        throw fail(head.column, "kernel '" + pending[*open_kernel].kernel.id + "' has an empty body");
      open_kernel.reset();
    } else if (head.text == ".call") {
      if (open_kernel) throw fail(head.column, ".call inside kernel block");
      if (tokens.size() < 2 || tokens.size() > 3) expect_count(tokens.size() < 2 ? 2 : 3);
      open_implicit.reset();
      std::uint64_t reps = 1;
      if (tokens.size() == 3) {
        std::string_view count = tokens[2].text;
        if (count.size() < 2 || (count[0] != 'x' && count[0] != 'X'))
          throw fail(tokens[2].column, "repetition must be written x<count>");
        std::int64_t value = 0;
        auto [ptr, ec] = std::from_chars(count.data() + 1, count.data() + count.size(), value);
        if (ec != std::errc{} || ptr != count.data() + count.size())
          throw fail(tokens[2].column + 1, "invalid repetition count '" + std::string(count.substr(1)) + "'");
        if (value < 1) throw fail(tokens[2].column + 1, "repetition count must be >= 1");
        reps = static_cast<std::uint64_t>(value);
      }
      calls.push_back({std::string(tokens[1].text), 0, reps, line_no, tokens[1].column});
    } else {
      std::optional<OpKind> kind = parse_op_kind(head.text);
      if (!kind) {
        if (!head.text.empty() && head.text.front() == '.')
          throw fail(head.column, "unknown directive '" + std::string(head.text) + "'");
        throw fail(head.column, "unknown gate kind '" + std::string(head.text) + "'");
      }
      // Operand list: everything after the gate name, comma separated.
      std::size_t rest_start = head.column - 1 + head.text.size();
      std::string_view rest = line.substr(rest_start);
      std::vector<Token> operands;
      std::size_t field_start = 0;
      while (true) {
        std::size_t comma = rest.find(',', field_start);
        std::string_view field =
            rest.substr(field_start, comma == std::string_view::npos ? std::string_view::npos
                                                                     : comma - field_start);
        std::size_t lead = 0;
        while (lead < field.size() && std::isspace(static_cast<unsigned char>(field[lead]))) ++lead;
        std::string_view name = detail::trim(field);
        std::size_t column = rest_start + field_start + lead + 1;
        if (name.empty()) throw fail(column, "missing operand");
        if (!detail::is_identifier(name)) throw fail(column, "invalid operand '" + std::string(name) + "'");
        operands.push_back({name, column});
        if (comma == std::string_view::npos) break;
        field_start = comma + 1;
      }
      if (operands.size() != arity(*kind)) {
        throw fail(operands.front().column,
                   "arity mismatch: " + std::string(to_string(*kind)) + " takes " +
                       std::to_string(arity(*kind)) + " operand(s), got " +
                       std::to_string(operands.size()));
      }
      std::array<QubitIndex, 2> q{};
      for (std::size_t i = 0; i < operands.size(); ++i) {
        auto it = qubit_ids.find(std::string(operands[i].text));
        if (it == qubit_ids.end())
          throw fail(operands[i].column, "undeclared qubit '" + std::string(operands[i].text) + "'");
        q[i] = it->second;
      }
      if (operands.size() == 2 && q[0] == q[1])
        throw fail(operands[1].column, "arity mismatch: CNOT operands must be distinct");

      std::size_t target;
      if (open_kernel) {
        target = *open_kernel;
      } else {
        if (!open_implicit) {
          pending.push_back({Kernel{}, true, line_no});
          open_implicit = pending.size() - 1;
          calls.push_back({"", *open_implicit, 1, line_no, head.column});
        }
        target = *open_implicit;
      }
      std::vector<QuantumOp>& body = pending[target].kernel.body;
      body.push_back(operands.size() == 2 ? QuantumOp(*kind, q[0], q[1], body.size())
                                          : QuantumOp(*kind, q[0], body.size()));
    }
    if (eol == text.size()) break;
  }
  if (open_kernel) throw ParseError(open_line, 1, "unterminated .kernel block");

  // Implicit kernels get ids that cannot collide with user kernels.
  std::size_t implicit_counter = 0;
  for (PendingKernel& pk : pending) {
    if (!pk.implicit) continue;
    std::string id = "_top" + std::to_string(implicit_counter++);
    while (kernel_ids.contains(id)) id += "_";
    kernel_ids.emplace(id, 0);
    pk.kernel.id = id;
  }

  for (PendingKernel& pk : pending) {
    finalize_kernel(pk.kernel);
    program.kernels.push_back(std::move(pk.kernel));
  }
  for (const PendingCall& call : calls) {
    std::string id = call.id;
    if (id.empty()) {
      id = program.kernels[call.pending_index].id;
    } else if (program.find_kernel(id) == nullptr) {
      throw ParseError(call.line, call.column, "call to undefined kernel '" + id + "'");
    }
    program.sequence.stages.push_back({id, call.repetitions});
  }
  program.distinct_kernels = identify_kernels(program).representatives;
  return program;
}

/// Emits the program in the netlist format; implicit kernels become explicit
/// blocks, so parse_program(serialize_program(p)) == p.
inline std::string serialize_program(const KernelProgram& program) {
  std::ostringstream out;
  for (const LogicalQubit& q : program.qubits) out << "qubit " << q.name << '\n';
  for (const Kernel& k : program.kernels) {
    out << ".kernel " << k.id << '\n';
    for (const QuantumOp& op : k.body) {
      out << "  " << to_string(op.kind) << ' ';
      auto ops = op.operands();
      for (std::size_t i = 0; i < ops.size(); ++i) {
        if (i) out << ',';
        out << program.qubits.at(ops[i]).name;
      }
      out << '\n';
    }
    out << ".endkernel\n";
  }
  for (const Stage& s : program.sequence.stages) {
    out << ".call " << s.kernel_id;
    if (s.repetitions != 1) out << " x" << s.repetitions;
    out << '\n';
  }
  return out.str();
}

}  // namespace qkmap
