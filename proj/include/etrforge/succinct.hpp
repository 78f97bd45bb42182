#pragma once

#include <cstdint>
#include <vector>

#include "etrforge/ast.hpp"
#include "etrforge/eval.hpp"

namespace etrforge {

// Plain Boolean circuit over {INPUT_k, NOT, AND, OR}. Operand ids always
// precede their gate; evaluation is a single forward sweep.
struct Gate {
  enum class Op { Input, Not, And, Or };
  Op op;
  int input = -1;  // Input: which input bit
  int a = -1;      // Not/And/Or
  int b = -1;      // And/Or
};

struct BoolCircuit {
  int input_width = 0;
  std::vector<Gate> gates;
  std::vector<int> outputs;
};

// Acyclic (operands precede gates), outputs exist. Throws IllFormed.
void validate_circuit(const BoolCircuit& c);

std::vector<bool> eval_circuit(const BoolCircuit& c, const std::vector<bool>& input);

// Node labels of the succinctly encoded formula tree. The record layout is
// fixed bit-exactly so circuits are portable fixtures: 8 opcode bits, then
// parent, child0, child1 and payload of N bits each, every field packed least
// significant bit first.
enum class Opcode : uint8_t {
  Const0 = 0,
  Const1 = 1,
  Var = 2,
  Add = 3,
  Mul = 4,
  And = 5,
  Or = 6,
  Not = 7,
  Lt = 8,
  Le = 9,
  Eq = 10,
  Neg = 11,  // unary arithmetic negation; not part of the original table
  Disabled = 255
};

bool opcode_is_arithmetic(Opcode op);
bool opcode_is_boolean(Opcode op);
bool opcode_is_leaf(Opcode op);
bool opcode_is_unary(Opcode op);

struct NodeDescription {
  Opcode opcode = Opcode::Disabled;
  uint64_t parent = 0;
  uint64_t child0 = 0;
  uint64_t child1 = 0;
  uint64_t payload = 0;
};

// A circuit computing node descriptions for indices 0..2^N-1, N being the
// input width. The output width must be 8 + 4N. With unary_vars set, variable
// payloads hold the variable number in unary (payload 0^(N-k) 1^k means
// variable k), which keeps the variable count polynomial.
struct SuccCircuit {
  BoolCircuit circuit;
  bool unary_vars = false;

  int index_width() const { return circuit.input_width; }
};

void validate_succ(const SuccCircuit& s);

// Decodes the description of node i. Throws MalformedOpcode for opcode bytes
// outside the table.
NodeDescription eval_node(const SuccCircuit& s, uint64_t index);

// Reconstructs the explicit formula tree hanging from `root` by evaluating the
// circuit at every reachable index, checking parent/child agreement, leaf and
// unary conventions, acyclicity and the label type discipline along the way.
// Node indices outside the reached tree are not inspected. Variables are named
// "x<k>" from the payload.
EtrInstance expand_succ(const SuccCircuit& s, long cap = kDefaultCap, uint64_t root = 0);

// Negation removal: the output circuit, over index width N+3, contains for
// every Boolean node v of the source a node v+ computing the same truth value
// (published at the source index of v) and a node v- computing its negation
// (published at index 7*2^N + source index), uses only < and = comparisons and
// no Boolean negation, and triplicates arithmetic subtrees.
SuccCircuit remove_negations(const SuccCircuit& s);

// Compiles a SigmaPiEtr instance into a succinct circuit with unary variable
// payloads by unrolling every binder: the copy of node v under binder values
// e1..el lives at index (id(v), e1..el, slot). Constants must be nonnegative
// integers; values above 1 occupy a chain of addition nodes in the slot
// dimension.
SuccCircuit compile_sigma_pi(const EtrInstance& inst);

}  // namespace etrforge
