#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "etrforge/errors.hpp"
#include "etrforge/eval.hpp"
#include "etrforge/succinct.hpp"
#include "etrforge/textio.hpp"

using namespace etrforge;

namespace {

// Test-only fixture builder: a lookup-table circuit computing the given node
// descriptions directly, independent of compile_sigma_pi.
SuccCircuit table_circuit(int n, const std::vector<NodeDescription>& nodes, bool unary = false) {
  BoolCircuit c;
  c.input_width = n;
  for (int i = 0; i < n; ++i) c.gates.push_back({Gate::Op::Input, i, -1, -1});
  std::vector<int> nots;
  for (int i = 0; i < n; ++i) {
    c.gates.push_back({Gate::Op::Not, -1, i, -1});
    nots.push_back(static_cast<int>(c.gates.size()) - 1);
  }
  int constant_false = -1;
  {
    c.gates.push_back({Gate::Op::And, -1, 0, nots[0]});
    constant_false = static_cast<int>(c.gates.size()) - 1;
  }
  auto minterm = [&](uint64_t index) {
    int acc = -1;
    for (int j = 0; j < n; ++j) {
      int lit = (index >> j) & 1 ? j : nots[j];
      if (acc < 0) {
        acc = lit;
      } else {
        c.gates.push_back({Gate::Op::And, -1, acc, lit});
        acc = static_cast<int>(c.gates.size()) - 1;
      }
    }
    return acc;
  };
  std::vector<int> selectors;
  for (uint64_t i = 0; i < (uint64_t{1} << n); ++i) selectors.push_back(minterm(i));

  auto desc_bits = [&](const NodeDescription& d) {
    std::vector<bool> bits;
    for (int j = 0; j < 8; ++j) bits.push_back((static_cast<uint64_t>(d.opcode) >> j) & 1);
    for (auto field : {d.parent, d.child0, d.child1, d.payload})
      for (int j = 0; j < n; ++j) bits.push_back((field >> j) & 1);
    return bits;
  };
  int m = 8 + 4 * n;
  for (int bit = 0; bit < m; ++bit) {
    int acc = -1;
    for (uint64_t i = 0; i < (uint64_t{1} << n); ++i) {
      NodeDescription d = i < nodes.size() ? nodes[i] : NodeDescription{};
      if (!desc_bits(d)[static_cast<size_t>(bit)]) continue;
      if (acc < 0) {
        acc = selectors[i];
      } else {
        c.gates.push_back({Gate::Op::Or, -1, acc, selectors[i]});
        acc = static_cast<int>(c.gates.size()) - 1;
      }
    }
    c.outputs.push_back(acc < 0 ? constant_false : acc);
  }
  SuccCircuit s;
  s.circuit = std::move(c);
  s.unary_vars = unary;
  return s;
}

// The node set for "x0 = 1" over a 2-bit index space.
std::vector<NodeDescription> x0_eq_1_nodes() {
  NodeDescription root{Opcode::Eq, 0, 1, 2, 0};
  NodeDescription var{Opcode::Var, 0, 1, 1, 0};
  NodeDescription one{Opcode::Const1, 0, 2, 2, 0};
  return {root, var, one};
}

}  // namespace

TEST_CASE("eval_node decodes hand-built fixtures") {
  SuccCircuit s = table_circuit(2, x0_eq_1_nodes());
  NodeDescription root = eval_node(s, 0);
  CHECK(root.opcode == Opcode::Eq);
  CHECK(root.child0 == 1);
  CHECK(root.child1 == 2);
  CHECK(eval_node(s, 1).opcode == Opcode::Var);
  CHECK(eval_node(s, 2).opcode == Opcode::Const1);
  // indices beyond the node list are disabled
  CHECK(eval_node(s, 3).opcode == Opcode::Disabled);
  // children agree with their parent on the fixture
  CHECK(eval_node(s, root.child0).parent == 0);
  CHECK(eval_node(s, root.child1).parent == 0);
}

TEST_CASE("expand_succ rebuilds the explicit formula") {
  SuccCircuit s = table_circuit(2, x0_eq_1_nodes());
  EtrInstance inst = expand_succ(s);
  CHECK(formula_equal(inst.formula, f_eq(t_var("x0"), t_int(1))));
  CHECK(inst.declared_vars == std::set<std::string>{"x0"});
}

TEST_CASE("expand_succ rejects inconsistent trees") {
  // dangling parent pointer: the var child claims node 3 as its parent
  auto nodes = x0_eq_1_nodes();
  nodes[1].parent = 3;
  CHECK_THROWS_AS(expand_succ(table_circuit(2, nodes)), EtrError);

  // child pointing to a disabled slot
  nodes = x0_eq_1_nodes();
  nodes[0].child1 = 3;
  CHECK_THROWS_AS(expand_succ(table_circuit(2, nodes)), EtrError);

  // Boolean node under an arithmetic comparison child
  nodes = x0_eq_1_nodes();
  NodeDescription andnode{Opcode::And, 0, 1, 2, 0};
  nodes[0] = NodeDescription{Opcode::Eq, 0, 1, 2, 0};
  nodes[1] = andnode;  // eq child is Boolean
  nodes[1].parent = 0;
  CHECK_THROWS_AS(expand_succ(table_circuit(2, nodes)), EtrError);

  // a leaf must point its children to itself
  nodes = x0_eq_1_nodes();
  nodes[2].child0 = 1;
  CHECK_THROWS_AS(expand_succ(table_circuit(2, nodes)), EtrError);
}

TEST_CASE("unary payload decoding") {
  std::vector<NodeDescription> nodes = x0_eq_1_nodes();
  nodes[1].payload = 0b11;  // variable 2 in unary
  SuccCircuit s = table_circuit(2, nodes, true);
  EtrInstance inst = expand_succ(s);
  CHECK(formula_equal(inst.formula, f_eq(t_var("x2"), t_int(1))));
  // a gap in the unary block is malformed
  nodes[1].payload = 0b10;
  CHECK_THROWS_AS(expand_succ(table_circuit(2, nodes, true)), EtrError);
}

TEST_CASE("remove_negations gadget shapes") {
  int n = 2;
  uint64_t minus_base = uint64_t{7} << n;

  // source atom x0 = 1: the negative node decodes to (s < t) or (t < s)
  SuccCircuit eq_fix = table_circuit(n, x0_eq_1_nodes());
  SuccCircuit r = remove_negations(eq_fix);
  EtrInstance plus = expand_succ(r, kDefaultCap, 0);
  CHECK(formula_equal(plus.formula, f_eq(t_var("x0"), t_int(1))));
  EtrInstance minus = expand_succ(r, kDefaultCap, minus_base | 0);
  CHECK(formula_equal(minus.formula,
                      f_or(f_lt(t_var("x0"), t_int(1)), f_lt(t_int(1), t_var("x0")))));

  // source atom x0 <= 1: the positive node becomes (s < t) or (s = t)
  auto le_nodes = x0_eq_1_nodes();
  le_nodes[0].opcode = Opcode::Le;
  SuccCircuit le_fix = table_circuit(n, le_nodes);
  SuccCircuit rle = remove_negations(le_fix);
  EtrInstance le_plus = expand_succ(rle, kDefaultCap, 0);
  CHECK(formula_equal(le_plus.formula,
                      f_or(f_lt(t_var("x0"), t_int(1)), f_eq(t_var("x0"), t_int(1)))));
  EtrInstance le_minus = expand_succ(rle, kDefaultCap, minus_base | 0);
  CHECK(formula_equal(le_minus.formula, f_lt(t_int(1), t_var("x0"))));

  // source not(x0 = 1): the positive node is s- and (0 = 0)
  std::vector<NodeDescription> not_nodes(4);
  not_nodes[0] = NodeDescription{Opcode::Not, 0, 1, 1, 0};
  not_nodes[1] = NodeDescription{Opcode::Eq, 0, 2, 3, 0};
  not_nodes[2] = NodeDescription{Opcode::Var, 1, 2, 2, 0};
  not_nodes[3] = NodeDescription{Opcode::Const1, 1, 3, 3, 0};
  SuccCircuit not_fix = table_circuit(n, not_nodes);
  SuccCircuit rnot = remove_negations(not_fix);
  EtrInstance not_plus = expand_succ(rnot, kDefaultCap, 0);
  FormulaPtr want = f_and(f_or(f_lt(t_var("x0"), t_int(1)), f_lt(t_int(1), t_var("x0"))),
                          f_eq(t_int(0), t_int(0)));
  CHECK(formula_equal(not_plus.formula, want));

  // no Boolean negation and no <= remain anywhere in the output
  for (uint64_t i = 0; i < (uint64_t{1} << (n + 3)); ++i) {
    NodeDescription d = eval_node(rnot, i);
    CHECK(d.opcode != Opcode::Not);
    CHECK(d.opcode != Opcode::Le);
  }
}

TEST_CASE("compile_sigma_pi on a summation") {
  // sum_e x compiles to an addition of two copies of the variable
  EtrInstance inst;
  inst.dialect = Dialect::SigmaPiEtr;
  inst.formula = f_eq(t_sum("e", 2, t_var("x")), t_int(0));
  SuccCircuit s = compile_sigma_pi(inst);
  CHECK(s.unary_vars);
  EtrInstance out = expand_succ(s);
  CHECK(formula_equal(out.formula, f_eq(t_add(t_var("x0"), t_var("x0")), t_int(0))));
}

TEST_CASE("compile_sigma_pi on a product over the binder") {
  // prod_e e expands to 0 * 1 = 0
  EtrInstance inst;
  inst.dialect = Dialect::SigmaPiEtr;
  inst.formula = f_eq(t_prod("e", 2, t_var("e")), t_int(1));
  EtrInstance out = expand_succ(compile_sigma_pi(inst));
  CHECK(formula_equal(out.formula, f_eq(t_mul(t_int(0), t_int(1)), t_int(1))));
  CHECK(eval_term(out.formula->lhs, {}) == Rational(0));
}

TEST_CASE("compile_sigma_pi without binders is structural identity up to renaming") {
  EtrInstance inst;
  inst.dialect = Dialect::SigmaPiEtr;
  inst.formula = f_le(t_add(t_var("u"), t_int(1)), t_var("v"));
  EtrInstance out = expand_succ(compile_sigma_pi(inst));
  // sorted variable order: u -> x0, v -> x1
  CHECK(formula_equal(out.formula, f_le(t_add(t_var("x0"), t_int(1)), t_var("x1"))));
}

TEST_CASE("compile_sigma_pi spells constants as addition chains") {
  EtrInstance inst;
  inst.dialect = Dialect::SigmaPiEtr;
  inst.formula = f_eq(t_var("u"), t_int(5));
  EtrInstance out = expand_succ(compile_sigma_pi(inst));
  CHECK(eval_term(out.formula->rhs, {}) == Rational(5));

  inst.formula = f_eq(t_var("u"), t_const(Rational(1, 2)));
  CHECK_THROWS_AS(compile_sigma_pi(inst), EtrError);
}

TEST_CASE("circuit validation") {
  BoolCircuit c;
  c.input_width = 1;
  c.gates.push_back({Gate::Op::Input, 0, -1, -1});
  c.outputs.push_back(0);
  CHECK_NOTHROW(validate_circuit(c));
  CHECK(eval_circuit(c, {true})[0]);

  SuccCircuit s;
  s.circuit = c;  // 1 output instead of 8 + 4
  CHECK_THROWS_AS(validate_succ(s), EtrError);
}
