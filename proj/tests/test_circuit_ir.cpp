#include <gtest/gtest.h>

#include <random>
#include <string>

#include "qkmap/circuit_ir.hpp"
#include "qkmap/generators.hpp"
#include "support/oracles.hpp"
#include "support/random_inputs.hpp"

using namespace qkmap;

namespace {

std::vector<oracle::FlatOp> named(const KernelProgram& p) {
  std::vector<oracle::FlatOp> out;
  for (const QuantumOp& op : flat_expansion(p)) {
    oracle::FlatOp f{std::string(to_string(op.kind)), {}};
    for (QubitIndex q : op.operands()) f.operands.push_back(p.qubits[q].name);
    out.push_back(f);
  }
  return out;
}

ParseError parse_error_of(const std::string& text) {
  try {
    parse_program(text);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no parse error for:\n" << text;
  return ParseError(0, 0, "none");
}

}  // namespace

TEST(ParseProgram, LooseGatesFormImplicitKernel) {
  KernelProgram p = parse_program("qubit a\nqubit b\nCNOT a,b\nT b");
  ASSERT_EQ(p.kernels.size(), 1u);
  EXPECT_EQ(p.kernels[0].body.size(), 2u);
  EXPECT_EQ(p.kernels[0].touched_qubits, (std::vector<QubitIndex>{0, 1}));
  ASSERT_EQ(p.sequence.stages.size(), 1u);
  EXPECT_EQ(p.sequence.stages[0].kernel_id, p.kernels[0].id);
  EXPECT_EQ(p.qubits.size(), 2u);
}

TEST(ParseProgram, ExplicitKernelWithRepetition) {
  KernelProgram p = parse_program("qubit q0\n.kernel K\nH q0\n.endkernel\n.call K x3");
  ASSERT_EQ(p.sequence.stages.size(), 1u);
  EXPECT_EQ(p.sequence.stages[0], (Stage{"K", 3}));
  EXPECT_EQ(p.distinct_kernels, std::vector<std::string>{"K"});
}

TEST(ParseProgram, CommentsBlankLinesAndCase) {
  KernelProgram p = parse_program("# header\nqubit a  # data\nqubit b\r\n\n  h a\ncnot a , b\ntdg b\n");
  ASSERT_EQ(p.kernels.size(), 1u);
  const auto& body = p.kernels[0].body;
  ASSERT_EQ(body.size(), 3u);
  EXPECT_EQ(body[0].kind, OpKind::H);
  EXPECT_EQ(body[1], QuantumOp(OpKind::CNOT, 0, 1, 1));
  EXPECT_EQ(body[2].kind, OpKind::Tdg);
}

TEST(ParseProgram, RepeatedCnotOperandIsArityMismatch) {
  ParseError e = parse_error_of("qubit a\nCNOT a,a\n");
  EXPECT_EQ(e.line(), 2u);
  EXPECT_NE(std::string(e.what()).find("arity mismatch"), std::string::npos);
}

TEST(ParseProgram, ReportsLineAndColumn) {
  ParseError e = parse_error_of("qubit a\nqubit b\n  CNOT a,zz\n");
  EXPECT_EQ(e.line(), 3u);
  EXPECT_EQ(e.column(), 10u);
  EXPECT_NE(std::string(e.what()).find("undeclared qubit"), std::string::npos);
}

TEST(ParseProgram, RejectsMalformedInput) {
  const char* cases[] = {
      "qubit a\nCNOT a\n",                          // one operand
      "qubit a\nH a,a\n",                           // two operands
      "qubit a\nFOO a\n",                           // unknown gate
      "qubit a\n.kernel K\nH a\n.endkernel\n.call K x0\n",
      "qubit a\n.kernel K\nH a\n.endkernel\n.call K 3\n",
      "qubit a\n.call K\n",                         // undefined kernel
      "qubit a\n.kernel K\nH a\n",                  // unterminated
      "qubit a\n.kernel K\n.endkernel\n",           // empty body
      "qubit a\n.kernel K\n.kernel L\n",            // nested
      "qubit a\nqubit a\n",                         // duplicate qubit
      "qubit a\n.kernel K\nH a\n.endkernel\n.kernel K\nH a\n.endkernel\n",
      "H a\nqubit a\n",                             // use before declaration
      "qubit a\n.bogus\n",
      "qubit a\n.endkernel\n",
  };
  for (const char* text : cases) EXPECT_THROW(parse_program(text), ParseError) << text;
}

TEST(ParseProgram, MissingOperandColumnPointsAtGap) {
  ParseError e = parse_error_of("qubit a\nCNOT a,\n");
  EXPECT_EQ(e.line(), 2u);
  EXPECT_NE(std::string(e.what()).find("missing operand"), std::string::npos);
}

TEST(ParseProgram, LooseRunsSplitAtCalls) {
  KernelProgram p = parse_program(
      "qubit a\nH a\nT a\n.kernel K\nX a\n.endkernel\n.call K\nS a\n");
  ASSERT_EQ(p.sequence.stages.size(), 3u);
  EXPECT_EQ(p.kernel(p.sequence.stages[0].kernel_id).body.size(), 2u);
  EXPECT_EQ(p.sequence.stages[1].kernel_id, "K");
  EXPECT_EQ(p.kernel(p.sequence.stages[2].kernel_id).body.size(), 1u);
}

TEST(ParseProgram, ImplicitIdsAvoidUserIds) {
  KernelProgram p = parse_program("qubit a\n.kernel _top0\nX a\n.endkernel\nH a\n.call _top0\n");
  std::set<std::string> ids;
  for (const Kernel& k : p.kernels) ids.insert(k.id);
  EXPECT_EQ(ids.size(), 2u);
}

TEST(IdentifyKernels, IdenticalBodiesOverDifferentQubitsMerge) {
  KernelProgram p = parse_program(
      "qubit a\nqubit b\n.kernel K1\nH a\nT a\n.endkernel\n.kernel K2\nH b\nT b\n.endkernel\n"
      ".call K1\n.call K2\n");
  KernelSet s = identify_kernels(p);
  EXPECT_EQ(s.representatives, std::vector<std::string>{"K1"});
  ASSERT_EQ(s.instances.size(), 2u);
  EXPECT_EQ(s.instances[1].representative_id, "K1");
  EXPECT_EQ(s.instances[1].qubit_binding, std::vector<QubitIndex>{1});
}

TEST(IdentifyKernels, DifferentOperandPatternsStayApart) {
  KernelProgram p = parse_program(
      "qubit a\nqubit b\n.kernel K1\nCNOT a,b\nH a\n.endkernel\n.kernel K2\nCNOT a,b\nH b\n.endkernel\n"
      ".call K1\n.call K2\n");
  EXPECT_EQ(identify_kernels(p).representatives.size(), 2u);
}

TEST(IdentifyKernels, SingleKernelIsItsOwnRepresentative) {
  KernelProgram p = parse_program("qubit a\n.kernel K\nH a\n.endkernel\n.call K\n");
  KernelSet s = identify_kernels(p);
  EXPECT_EQ(s.representatives, std::vector<std::string>{"K"});
  EXPECT_EQ(s.multiplicity("K"), 1u);
}

TEST(IdentifyKernels, UncalledKernelsAreIgnored) {
  KernelProgram p = parse_program("qubit a\n.kernel K\nH a\n.endkernel\n.kernel L\nT a\n.endkernel\n.call K\n");
  EXPECT_EQ(identify_kernels(p).representatives, std::vector<std::string>{"K"});
}

TEST(IdentifyKernels, PhaseEstimationGeometricMultiplicity) {
  for (std::uint32_t n = 1; n <= 8; ++n) {
    std::string text;
    text += "qubit u\nqubit c\n";
    for (std::uint32_t j = 0; j < n; ++j)
      text += ".kernel U" + std::to_string(j) + "\nCNOT c,u\nT u\n.endkernel\n";
    for (std::uint32_t j = 0; j < n; ++j)
      text += ".call U" + std::to_string(j) + " x" + std::to_string(1u << j) + "\n";
    KernelSet s = identify_kernels(parse_program(text));
    ASSERT_EQ(s.representatives.size(), 1u);
    EXPECT_EQ(s.instances.size(), n);
    EXPECT_EQ(s.multiplicity(s.representatives[0]), (std::uint64_t{1} << n) - 1);
  }
}

TEST(IdentifyKernels, GeneratedPhaseEstimationSharesOneControlledKernel) {
  KernelProgram p = parse_program(gen::phase_estimation_netlist(5));
  KernelSet s = identify_kernels(p);
  std::uint64_t cu = 0;
  for (const KernelInstance& inst : s.instances)
    if (inst.kernel_id.rfind("cu", 0) == 0) {
      EXPECT_EQ(inst.representative_id, "cu0");
      cu += inst.repetitions;
    }
  EXPECT_EQ(cu, 31u);
}

TEST(Serialization, RoundTripsRandomPrograms) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    KernelProgram p = parse_program(randomized::random_netlist(rng, 30, 6));
    EXPECT_EQ(parse_program(serialize_program(p)), p);
  }
  for (const std::string& text :
       {gen::walk_netlist({}), gen::phase_estimation_netlist(4), gen::toffoli_netlist()}) {
    KernelProgram p = parse_program(text);
    EXPECT_EQ(parse_program(serialize_program(p)), p);
  }
}

TEST(FlatExpansion, MatchesTextInterpreter) {
  for (const std::string& text :
       {gen::walk_netlist({}), gen::phase_estimation_netlist(5), gen::toffoli_netlist(),
        std::string("qubit a\nqubit b\nH a\n.kernel K\nCNOT b,a\n.endkernel\n.call K x4\nT b\n")}) {
    KernelProgram p = parse_program(text);
    std::vector<oracle::FlatOp> expected = oracle::expand_source(text);
    EXPECT_EQ(flat_size(p), expected.size());
    EXPECT_EQ(named(p), expected);
  }
}

TEST(FlatExpansion, MergingPreservesOperationSequence) {
  KernelProgram p = parse_program(gen::phase_estimation_netlist(4));
  KernelSet s = identify_kernels(p);
  std::vector<std::pair<OpKind, std::vector<QubitIndex>>> via_reps;
  for (const KernelInstance& inst : s.instances) {
    const Kernel& rep = p.kernel(inst.representative_id);
    auto [canonical, first_use] = canonical_form(rep.body);
    for (std::uint64_t r = 0; r < inst.repetitions; ++r)
      for (const CanonicalOp& op : canonical) {
        std::vector<QubitIndex> qs;
        for (std::uint8_t i = 0; i < op.operand_count; ++i) qs.push_back(inst.qubit_binding[op.operands[i]]);
        via_reps.push_back({op.kind, qs});
      }
  }
  std::vector<std::pair<OpKind, std::vector<QubitIndex>>> direct;
  for (const QuantumOp& op : flat_expansion(p))
    direct.push_back({op.kind, {op.operands().begin(), op.operands().end()}});
  EXPECT_EQ(via_reps, direct);
}
