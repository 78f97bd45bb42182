#include "etrforge/succinct.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "etrforge/errors.hpp"

namespace etrforge {

void validate_circuit(const BoolCircuit& c) {
  if (c.input_width < 1) fail(Err::IllFormed, "circuit needs at least one input bit");
  for (size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    switch (g.op) {
      case Gate::Op::Input:
        if (g.input < 0 || g.input >= c.input_width)
          fail(Err::IllFormed, "gate g" + std::to_string(i) + " reads input bit " +
                                   std::to_string(g.input) + " outside width " +
                                   std::to_string(c.input_width));
        break;
      case Gate::Op::Not:
        if (g.a < 0 || g.a >= static_cast<int>(i))
          fail(Err::IllFormed, "gate g" + std::to_string(i) + " operand must precede it");
        break;
      case Gate::Op::And:
      case Gate::Op::Or:
        if (g.a < 0 || g.a >= static_cast<int>(i) || g.b < 0 || g.b >= static_cast<int>(i))
          fail(Err::IllFormed, "gate g" + std::to_string(i) + " operands must precede it");
        break;
    }
  }
  if (c.outputs.empty()) fail(Err::IllFormed, "circuit has no outputs");
  for (int o : c.outputs)
    if (o < 0 || o >= static_cast<int>(c.gates.size()))
      fail(Err::IllFormed, "output gate g" + std::to_string(o) + " does not exist");
}

std::vector<bool> eval_circuit(const BoolCircuit& c, const std::vector<bool>& input) {
  if (static_cast<int>(input.size()) != c.input_width)
    fail(Err::WidthMismatch, "circuit input width mismatch");
  std::vector<bool> val(c.gates.size());
  for (size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    switch (g.op) {
      case Gate::Op::Input: val[i] = input[g.input]; break;
      case Gate::Op::Not: val[i] = !val[g.a]; break;
      case Gate::Op::And: val[i] = val[g.a] && val[g.b]; break;
      case Gate::Op::Or: val[i] = val[g.a] || val[g.b]; break;
    }
  }
  std::vector<bool> out;
  out.reserve(c.outputs.size());
  for (int o : c.outputs) out.push_back(val[o]);
  return out;
}

bool opcode_is_arithmetic(Opcode op) {
  switch (op) {
    case Opcode::Const0:
    case Opcode::Const1:
    case Opcode::Var:
    case Opcode::Add:
    case Opcode::Mul:
    case Opcode::Neg:
      return true;
    default:
      return false;
  }
}

bool opcode_is_boolean(Opcode op) {
  switch (op) {
    case Opcode::And:
    case Opcode::Or:
    case Opcode::Not:
    case Opcode::Lt:
    case Opcode::Le:
    case Opcode::Eq:
      return true;
    default:
      return false;
  }
}

bool opcode_is_leaf(Opcode op) {
  return op == Opcode::Const0 || op == Opcode::Const1 || op == Opcode::Var;
}

bool opcode_is_unary(Opcode op) { return op == Opcode::Not || op == Opcode::Neg; }

void validate_succ(const SuccCircuit& s) {
  validate_circuit(s.circuit);
  int n = s.index_width();
  if (n > 62) fail(Err::TooLarge, "index width beyond 62 bits");
  int want = 8 + 4 * n;
  if (static_cast<int>(s.circuit.outputs.size()) != want)
    fail(Err::WidthMismatch, "description width must be 8 + 4N = " + std::to_string(want) +
                                 ", got " + std::to_string(s.circuit.outputs.size()));
}

namespace {

uint64_t field_bits(const std::vector<bool>& out, int offset, int n) {
  uint64_t v = 0;
  for (int j = 0; j < n; ++j)
    if (out[offset + j]) v |= (uint64_t{1} << j);
  return v;
}

bool known_opcode(uint64_t code) { return code <= 11 || code == 255; }

}  // namespace

NodeDescription eval_node(const SuccCircuit& s, uint64_t index) {
  int n = s.index_width();
  if (n < 62 && index >= (uint64_t{1} << n)) fail(Err::IllFormed, "node index out of range");
  std::vector<bool> input(n);
  for (int j = 0; j < n; ++j) input[j] = (index >> j) & 1;
  std::vector<bool> out = eval_circuit(s.circuit, input);
  uint64_t code = field_bits(out, 0, 8);
  if (!known_opcode(code)) fail(Err::MalformedOpcode, "opcode byte " + std::to_string(code));
  NodeDescription d;
  d.opcode = static_cast<Opcode>(code);
  d.parent = field_bits(out, 8, n);
  d.child0 = field_bits(out, 8 + n, n);
  d.child1 = field_bits(out, 8 + 2 * n, n);
  d.payload = field_bits(out, 8 + 3 * n, n);
  return d;
}

namespace {

// Reconstructs the tree hanging from one index, enforcing the consistency
// rules along the way.
class Expander {
public:
  Expander(const SuccCircuit& s, long cap) : s_(s), budget_(cap) {}

  FormulaPtr expand_formula_at(uint64_t root) {
    NodeDescription d = fetch(root, "root");
    // Subtree expansion (root != 0) tolerates an outside parent pointer.
    if (root == 0 && d.parent != 0)
      fail(Err::IllFormed, "root parent pointer must be a self-loop");
    if (!opcode_is_boolean(d.opcode))
      fail(Err::IllFormed, "root node must carry a Boolean label");
    return build_formula(root, d, 0);
  }

  std::set<std::string> var_names;

private:
  NodeDescription fetch(uint64_t index, const char* what) {
    if (--budget_ < 0) fail(Err::TooLarge, "expansion exceeds the cap");
    if (!visited_.insert(index).second)
      fail(Err::IllFormed, "node " + std::to_string(index) + " is reachable twice (not a tree)");
    NodeDescription d = eval_node(s_, index);
    if (d.opcode == Opcode::Disabled)
      fail(Err::IllFormed, std::string(what) + " pointer reaches the disabled node " +
                               std::to_string(index));
    return d;
  }

  void check_shape(uint64_t index, const NodeDescription& d) {
    if (opcode_is_leaf(d.opcode)) {
      if (d.child0 != index || d.child1 != index)
        fail(Err::IllFormed, "leaf node " + std::to_string(index) + " must point children to itself");
      return;
    }
    if (opcode_is_unary(d.opcode)) {
      if (d.child1 != d.child0)
        fail(Err::IllFormed, "unary node " + std::to_string(index) + " must set child1 = child0");
      if (d.child0 == index)
        fail(Err::IllFormed, "unary node " + std::to_string(index) + " points to itself");
      return;
    }
    if (d.child0 == index || d.child1 == index)
      fail(Err::IllFormed, "binary node " + std::to_string(index) + " points to itself");
    if (d.child0 == d.child1)
      fail(Err::IllFormed, "binary node " + std::to_string(index) + " reuses one child twice");
  }

  NodeDescription fetch_child(uint64_t parent, uint64_t child) {
    NodeDescription d = fetch(child, "child");
    if (d.parent != parent)
      fail(Err::IllFormed, "node " + std::to_string(child) + " does not agree with its parent " +
                               std::to_string(parent));
    return d;
  }

  void guard_depth(int depth) {
    if (depth > 1 << 16) fail(Err::TooLarge, "tree deeper than 2^16");
  }

  FormulaPtr build_formula(uint64_t index, const NodeDescription& d, int depth) {
    guard_depth(depth);
    check_shape(index, d);
    switch (d.opcode) {
      case Opcode::And:
      case Opcode::Or: {
        NodeDescription c0 = fetch_child(index, d.child0);
        NodeDescription c1 = fetch_child(index, d.child1);
        if (!opcode_is_boolean(c0.opcode) || !opcode_is_boolean(c1.opcode))
          fail(Err::IllFormed, "connective node " + std::to_string(index) +
                                   " has a non-Boolean child");
        FormulaPtr l = build_formula(d.child0, c0, depth + 1);
        FormulaPtr r = build_formula(d.child1, c1, depth + 1);
        return d.opcode == Opcode::And ? f_and(std::move(l), std::move(r))
                                       : f_or(std::move(l), std::move(r));
      }
      case Opcode::Not: {
        NodeDescription c0 = fetch_child(index, d.child0);
        if (!opcode_is_boolean(c0.opcode))
          fail(Err::IllFormed, "negation node " + std::to_string(index) + " has a non-Boolean child");
        return f_not(build_formula(d.child0, c0, depth + 1));
      }
      case Opcode::Lt:
      case Opcode::Le:
      case Opcode::Eq: {
        NodeDescription c0 = fetch_child(index, d.child0);
        NodeDescription c1 = fetch_child(index, d.child1);
        if (!opcode_is_arithmetic(c0.opcode) || !opcode_is_arithmetic(c1.opcode))
          fail(Err::IllFormed, "comparison node " + std::to_string(index) +
                                   " has a Boolean child");
        TermPtr l = build_term(d.child0, c0, depth + 1);
        TermPtr r = build_term(d.child1, c1, depth + 1);
        CmpOp op = d.opcode == Opcode::Lt ? CmpOp::Lt : d.opcode == Opcode::Le ? CmpOp::Le : CmpOp::Eq;
        return f_atom(op, std::move(l), std::move(r));
      }
      default:
        fail(Err::IllFormed, "arithmetic node " + std::to_string(index) +
                                 " appears in a Boolean position");
    }
  }

  TermPtr build_term(uint64_t index, const NodeDescription& d, int depth) {
    guard_depth(depth);
    check_shape(index, d);
    switch (d.opcode) {
      case Opcode::Const0:
        return t_int(0);
      case Opcode::Const1:
        return t_int(1);
      case Opcode::Var: {
        std::string name = "x" + std::to_string(decode_var(index, d.payload));
        var_names.insert(name);
        return t_var(name);
      }
      case Opcode::Neg: {
        NodeDescription c0 = fetch_child(index, d.child0);
        require_arith(index, c0);
        return t_neg(build_term(d.child0, c0, depth + 1));
      }
      case Opcode::Add:
      case Opcode::Mul: {
        NodeDescription c0 = fetch_child(index, d.child0);
        NodeDescription c1 = fetch_child(index, d.child1);
        require_arith(index, c0);
        require_arith(index, c1);
        TermPtr l = build_term(d.child0, c0, depth + 1);
        TermPtr r = build_term(d.child1, c1, depth + 1);
        return d.opcode == Opcode::Add ? t_add(std::move(l), std::move(r))
                                       : t_mul(std::move(l), std::move(r));
      }
      default:
        fail(Err::IllFormed, "Boolean node " + std::to_string(index) +
                                 " appears under an arithmetic node");
    }
  }

  static void require_arith(uint64_t parent, const NodeDescription& c) {
    if (!opcode_is_arithmetic(c.opcode))
      fail(Err::IllFormed, "Boolean node below arithmetic node " + std::to_string(parent));
  }

  uint64_t decode_var(uint64_t index, uint64_t payload) {
    if (!s_.unary_vars) return payload;
    // Unary payload: 0^(N-k) 1^k from the least significant bit.
    uint64_t k = 0;
    uint64_t p = payload;
    while (p & 1) {
      ++k;
      p >>= 1;
    }
    if (p != 0)
      fail(Err::IllFormed, "variable payload of node " + std::to_string(index) +
                               " is not a unary block");
    return k;
  }

  const SuccCircuit& s_;
  long budget_;
  std::set<uint64_t> visited_;
};

}  // namespace

EtrInstance expand_succ(const SuccCircuit& s, long cap, uint64_t root) {
  validate_succ(s);
  int n = s.index_width();
  if (n < 62 && (uint64_t{1} << n) > static_cast<uint64_t>(cap))
    fail(Err::TooLarge, "2^" + std::to_string(n) + " node indices exceed the cap");
  Expander ex(s, cap);
  EtrInstance inst;
  inst.dialect = Dialect::Etr;
  inst.formula = ex.expand_formula_at(root);
  inst.declared_vars = std::move(ex.var_names);
  return inst;
}

// ---------------------------------------------------------------------------
// circuit builder

namespace {

class CircuitBuilder {
public:
  explicit CircuitBuilder(int input_width) {
    c_.input_width = input_width;
    for (int i = 0; i < input_width; ++i) {
      Gate g;
      g.op = Gate::Op::Input;
      g.input = i;
      c_.gates.push_back(g);
    }
  }

  int input(int k) const { return k; }

  int bnot(int a) {
    Gate g;
    g.op = Gate::Op::Not;
    g.a = a;
    return push(g);
  }

  int band(int a, int b) {
    Gate g;
    g.op = Gate::Op::And;
    g.a = a;
    g.b = b;
    return push(g);
  }

  int bor(int a, int b) {
    Gate g;
    g.op = Gate::Op::Or;
    g.a = a;
    g.b = b;
    return push(g);
  }

  int cfalse() {
    if (false_ < 0) false_ = band(0, bnot(0));
    return false_;
  }

  int ctrue() {
    if (true_ < 0) true_ = bnot(cfalse());
    return true_;
  }

  int bit(bool b) { return b ? ctrue() : cfalse(); }

  int band_all(const std::vector<int>& xs) {
    if (xs.empty()) return ctrue();
    int acc = xs[0];
    for (size_t i = 1; i < xs.size(); ++i) acc = band(acc, xs[i]);
    return acc;
  }

  int bor_all(const std::vector<int>& xs) {
    if (xs.empty()) return cfalse();
    int acc = xs[0];
    for (size_t i = 1; i < xs.size(); ++i) acc = bor(acc, xs[i]);
    return acc;
  }

  // wires == value over the little-endian wire vector
  int equals_const(const std::vector<int>& wires, uint64_t value) {
    std::vector<int> lits;
    for (size_t j = 0; j < wires.size(); ++j)
      lits.push_back((value >> j) & 1 ? wires[j] : bnot(wires[j]));
    return band_all(lits);
  }

  std::vector<int> const_bits(uint64_t value, int n) {
    std::vector<int> out;
    for (int j = 0; j < n; ++j) out.push_back(bit((value >> j) & 1));
    return out;
  }

  // Runs a foreign circuit on the given wires; returns its output wires.
  std::vector<int> embed(const BoolCircuit& sub, const std::vector<int>& inputs) {
    std::vector<int> map(sub.gates.size());
    for (size_t i = 0; i < sub.gates.size(); ++i) {
      const Gate& g = sub.gates[i];
      switch (g.op) {
        case Gate::Op::Input: map[i] = inputs[g.input]; break;
        case Gate::Op::Not: map[i] = bnot(map[g.a]); break;
        case Gate::Op::And: map[i] = band(map[g.a], map[g.b]); break;
        case Gate::Op::Or: map[i] = bor(map[g.a], map[g.b]); break;
      }
    }
    std::vector<int> out;
    out.reserve(sub.outputs.size());
    for (int o : sub.outputs) out.push_back(map[o]);
    return out;
  }

  BoolCircuit finish(std::vector<int> outputs) {
    c_.outputs = std::move(outputs);
    validate_circuit(c_);
    return std::move(c_);
  }

private:
  int push(const Gate& g) {
    c_.gates.push_back(g);
    return static_cast<int>(c_.gates.size()) - 1;
  }

  BoolCircuit c_;
  int false_ = -1;
  int true_ = -1;
};

// A node description as wire vectors, plus the merge-by-selector machinery.
struct DescWires {
  std::vector<int> opcode;  // 8
  std::vector<int> parent, child0, child1, payload;
};

class DescMerger {
public:
  DescMerger(CircuitBuilder& b, int ptr_bits) : b_(b), ptr_bits_(ptr_bits) {}

  void add_case(int selector, const DescWires& d) {
    cases_.emplace_back(selector, d);
  }

  // Unselected indices decode as disabled (opcode 255, zero fields).
  std::vector<int> merge_outputs() {
    std::vector<int> sels;
    for (const auto& [sel, d] : cases_) {
      (void)d;
      sels.push_back(sel);
    }
    int none = b_.bnot(b_.bor_all(sels));
    std::vector<int> out;
    for (int j = 0; j < 8; ++j) out.push_back(merge_bit([&](const DescWires& d) { return d.opcode[j]; }, none));
    append_field(out, [&](const DescWires& d) { return d.parent; });
    append_field(out, [&](const DescWires& d) { return d.child0; });
    append_field(out, [&](const DescWires& d) { return d.child1; });
    append_field(out, [&](const DescWires& d) { return d.payload; });
    return out;
  }

private:
  template <typename FieldBit>
  int merge_bit(FieldBit field_bit, int none) {
    std::vector<int> terms;
    for (const auto& [sel, d] : cases_) terms.push_back(b_.band(sel, field_bit(d)));
    terms.push_back(none);  // disabled opcode is all ones; fields get forced below
    return b_.bor_all(terms);
  }

  template <typename Field>
  void append_field(std::vector<int>& out, Field field) {
    for (int j = 0; j < ptr_bits_; ++j) {
      std::vector<int> terms;
      for (const auto& [sel, d] : cases_) terms.push_back(b_.band(sel, field(d)[j]));
      out.push_back(b_.bor_all(terms));  // zero when nothing matches
    }
  }

  CircuitBuilder& b_;
  int ptr_bits_;
  std::vector<std::pair<int, DescWires>> cases_;
};

}  // namespace

// ---------------------------------------------------------------------------
// remove_negations

namespace {

// Gadget slots, before the XOR-3 relocation that moves the root to index 0:
// slots 0-2 hold the arithmetic copies w1..w3, slots 3-4 the v+/v- roots and
// the rest gadget-internal nodes.
constexpr uint64_t kRelocation = 3;

struct RemoveNegBuilder {
  CircuitBuilder& b;
  int n;  // source index width
  std::vector<int> pub_index;   // N+3 published input wires
  std::vector<int> orig;        // low N wires
  std::vector<int> slot_wires;  // gadget slot (after undoing the relocation)
  DescWires cur, par;           // source descriptions at orig and at parent(orig)
  int is_root;

  // Published pointer (slot, base): base is N wires, slot a gadget constant.
  DescWires empty_desc() const { return DescWires{}; }

  std::vector<int> pptr(uint64_t slot, const std::vector<int>& base) {
    std::vector<int> out = base;
    uint64_t published = slot ^ kRelocation;
    for (int j = 0; j < 3; ++j) out.push_back(b.bit((published >> j) & 1));
    return out;
  }

  std::vector<int> self() const { return pub_index; }

  std::vector<int> opcode_const(Opcode op) { return b.const_bits(static_cast<uint64_t>(op), 8); }

  // Parent pointer for gadget node at `slot_plus`/`slot_minus` of a Boolean
  // source node: connectives consume the like-signed gadget, negation flips.
  std::vector<int> boolean_parent(bool positive) {
    int par_is_not = b.equals_const(par.opcode, static_cast<uint64_t>(Opcode::Not));
    uint64_t same = positive ? 3 : 4;
    uint64_t flip = positive ? 4 : 3;
    std::vector<int> same_ptr = pptr(same, field(cur.parent));
    std::vector<int> flip_ptr = pptr(flip, field(cur.parent));
    std::vector<int> sel;
    for (size_t j = 0; j < same_ptr.size(); ++j)
      sel.push_back(b.bor(b.band(par_is_not, flip_ptr[j]), b.band(b.bnot(par_is_not), same_ptr[j])));
    // the root's positive gadget is the new root: parent = self
    std::vector<int> out;
    for (size_t j = 0; j < sel.size(); ++j)
      out.push_back(b.bor(b.band(is_root, self()[j]), b.band(b.bnot(is_root), sel[j])));
    return out;
  }

  // Parent pointer of arithmetic copy k (0-based slot) given the parent's
  // opcode: arithmetic parents keep the slot, comparison parents route each
  // copy into the gadget node that consumes it.
  std::vector<int> arith_copy_parent(uint64_t k) {
    auto table_slot = [&](Opcode cmp) -> uint64_t {
      switch (cmp) {
        case Opcode::Eq: return k == 0 ? 3 : k == 1 ? 5 : 6;
        case Opcode::Le: return k == 0 ? 5 : k == 1 ? 6 : 4;
        case Opcode::Lt: return k == 0 ? 3 : k == 1 ? 5 : 6;
        default: return 0;
      }
    };
    int is_eq = b.equals_const(par.opcode, static_cast<uint64_t>(Opcode::Eq));
    int is_le = b.equals_const(par.opcode, static_cast<uint64_t>(Opcode::Le));
    int is_lt = b.equals_const(par.opcode, static_cast<uint64_t>(Opcode::Lt));
    std::vector<int> p_eq = pptr(table_slot(Opcode::Eq), field(cur.parent));
    std::vector<int> p_le = pptr(table_slot(Opcode::Le), field(cur.parent));
    std::vector<int> p_lt = pptr(table_slot(Opcode::Lt), field(cur.parent));
    std::vector<int> p_ar = pptr(k, field(cur.parent));
    int is_cmp = b.bor(is_eq, b.bor(is_le, is_lt));
    std::vector<int> out;
    for (size_t j = 0; j < p_ar.size(); ++j) {
      int cmp_bits = b.bor(b.band(is_eq, p_eq[j]), b.bor(b.band(is_le, p_le[j]), b.band(is_lt, p_lt[j])));
      out.push_back(b.bor(b.band(is_cmp, cmp_bits), b.band(b.bnot(is_cmp), p_ar[j])));
    }
    return out;
  }

  static std::vector<int> field(const std::vector<int>& wires) { return wires; }
};

}  // namespace

SuccCircuit remove_negations(const SuccCircuit& s) {
  validate_succ(s);
  int n = s.index_width();
  CircuitBuilder b(n + 3);

  RemoveNegBuilder rb{b, n, {}, {}, {}, {}, {}, 0};
  for (int j = 0; j < n + 3; ++j) rb.pub_index.push_back(b.input(j));
  for (int j = 0; j < n; ++j) rb.orig.push_back(b.input(j));
  // Undo the relocation on the slot bits: gadget slot = published slot xor 3.
  rb.slot_wires = {b.bnot(b.input(n)), b.bnot(b.input(n + 1)), b.input(n + 2)};

  auto unpack = [&](const std::vector<int>& out) {
    DescWires d;
    for (int j = 0; j < 8; ++j) d.opcode.push_back(out[j]);
    for (int j = 0; j < n; ++j) d.parent.push_back(out[8 + j]);
    for (int j = 0; j < n; ++j) d.child0.push_back(out[8 + n + j]);
    for (int j = 0; j < n; ++j) d.child1.push_back(out[8 + 2 * n + j]);
    for (int j = 0; j < n; ++j) d.payload.push_back(out[8 + 3 * n + j]);
    return d;
  };
  rb.cur = unpack(b.embed(s.circuit, rb.orig));
  rb.par = unpack(b.embed(s.circuit, rb.cur.parent));

  std::vector<int> root_bits;
  for (int j = 0; j < n; ++j) root_bits.push_back(b.bnot(rb.orig[j]));
  rb.is_root = b.band_all(root_bits);

  DescMerger merger(b, n + 3);

  auto sel = [&](uint64_t slot, Opcode src_op) {
    return b.band(b.equals_const(rb.slot_wires, slot),
                  b.equals_const(rb.cur.opcode, static_cast<uint64_t>(src_op)));
  };
  auto add = [&](uint64_t slot, Opcode src_op, Opcode out_op, std::vector<int> parent,
                 std::vector<int> child0, std::vector<int> child1, std::vector<int> payload) {
    DescWires d;
    d.opcode = rb.opcode_const(out_op);
    d.parent = std::move(parent);
    d.child0 = std::move(child0);
    d.child1 = std::move(child1);
    d.payload = std::move(payload);
    merger.add_case(sel(slot, src_op), d);
  };
  std::vector<int> zero_payload = b.const_bits(0, n + 3);
  auto pay = [&]() {
    std::vector<int> p = rb.cur.payload;
    for (int j = 0; j < 3; ++j) p.push_back(b.cfalse());
    return p;
  };
  const auto& orig = rb.orig;
  const auto& s0 = rb.cur.child0;
  const auto& t0 = rb.cur.child1;

  // Arithmetic copies w1..w3 at slots 0..2. Copies keep their own opcode; the
  // copy's opcode wires come from the source, so one case per opcode keeps the
  // emitted description exact.
  for (Opcode op : {Opcode::Const0, Opcode::Const1, Opcode::Var, Opcode::Add, Opcode::Mul, Opcode::Neg}) {
    for (uint64_t k = 0; k < 3; ++k) {
      std::vector<int> parent = rb.arith_copy_parent(k);
      std::vector<int> c0, c1;
      if (opcode_is_leaf(op)) {
        c0 = rb.self();
        c1 = rb.self();
      } else if (op == Opcode::Neg) {
        c0 = rb.pptr(k, s0);
        c1 = rb.pptr(k, s0);
      } else {
        c0 = rb.pptr(k, s0);
        c1 = rb.pptr(k, t0);
      }
      add(k, op, op, std::move(parent), std::move(c0), std::move(c1),
          op == Opcode::Var ? pay() : zero_payload);
    }
  }

  // v computes s = t: v+ is s1 = t1, v- is (s2 < t2) or (t3 < s3).
  add(3, Opcode::Eq, Opcode::Eq, rb.boolean_parent(true), rb.pptr(0, s0), rb.pptr(0, t0), zero_payload);
  add(4, Opcode::Eq, Opcode::Or, rb.boolean_parent(false), rb.pptr(5, orig), rb.pptr(6, orig), zero_payload);
  add(5, Opcode::Eq, Opcode::Lt, rb.pptr(4, orig), rb.pptr(1, s0), rb.pptr(1, t0), zero_payload);
  add(6, Opcode::Eq, Opcode::Lt, rb.pptr(4, orig), rb.pptr(2, t0), rb.pptr(2, s0), zero_payload);

  // v computes s <= t: v+ is (s1 < t1) or (s2 = t2), v- is t3 < s3.
  add(3, Opcode::Le, Opcode::Or, rb.boolean_parent(true), rb.pptr(5, orig), rb.pptr(6, orig), zero_payload);
  add(4, Opcode::Le, Opcode::Lt, rb.boolean_parent(false), rb.pptr(2, t0), rb.pptr(2, s0), zero_payload);
  add(5, Opcode::Le, Opcode::Lt, rb.pptr(3, orig), rb.pptr(0, s0), rb.pptr(0, t0), zero_payload);
  add(6, Opcode::Le, Opcode::Eq, rb.pptr(3, orig), rb.pptr(1, s0), rb.pptr(1, t0), zero_payload);

  // v computes s < t: v+ is s1 < t1, v- is (t2 < s2) or (s3 = t3).
  add(3, Opcode::Lt, Opcode::Lt, rb.boolean_parent(true), rb.pptr(0, s0), rb.pptr(0, t0), zero_payload);
  add(4, Opcode::Lt, Opcode::Or, rb.boolean_parent(false), rb.pptr(5, orig), rb.pptr(6, orig), zero_payload);
  add(5, Opcode::Lt, Opcode::Lt, rb.pptr(4, orig), rb.pptr(1, t0), rb.pptr(1, s0), zero_payload);
  add(6, Opcode::Lt, Opcode::Eq, rb.pptr(4, orig), rb.pptr(2, s0), rb.pptr(2, t0), zero_payload);

  // Connectives: v+/v- via De Morgan.
  add(3, Opcode::And, Opcode::And, rb.boolean_parent(true), rb.pptr(3, s0), rb.pptr(3, t0), zero_payload);
  add(4, Opcode::And, Opcode::Or, rb.boolean_parent(false), rb.pptr(4, s0), rb.pptr(4, t0), zero_payload);
  add(3, Opcode::Or, Opcode::Or, rb.boolean_parent(true), rb.pptr(3, s0), rb.pptr(3, t0), zero_payload);
  add(4, Opcode::Or, Opcode::And, rb.boolean_parent(false), rb.pptr(4, s0), rb.pptr(4, t0), zero_payload);

  // v computes not s: v+ = s- and (0=0), v- = s+ and (0'=0'), with each 0=0
  // a separate fresh subformula so every node keeps one parent.
  add(3, Opcode::Not, Opcode::And, rb.boolean_parent(true), rb.pptr(4, s0), rb.pptr(5, orig), zero_payload);
  add(4, Opcode::Not, Opcode::And, rb.boolean_parent(false), rb.pptr(3, s0), rb.pptr(0, orig), zero_payload);
  add(5, Opcode::Not, Opcode::Eq, rb.pptr(3, orig), rb.pptr(6, orig), rb.pptr(7, orig), zero_payload);
  add(6, Opcode::Not, Opcode::Const0, rb.pptr(5, orig), rb.self(), rb.self(), zero_payload);
  add(7, Opcode::Not, Opcode::Const0, rb.pptr(5, orig), rb.self(), rb.self(), zero_payload);
  add(0, Opcode::Not, Opcode::Eq, rb.pptr(4, orig), rb.pptr(1, orig), rb.pptr(2, orig), zero_payload);
  add(1, Opcode::Not, Opcode::Const0, rb.pptr(0, orig), rb.self(), rb.self(), zero_payload);
  add(2, Opcode::Not, Opcode::Const0, rb.pptr(0, orig), rb.self(), rb.self(), zero_payload);

  SuccCircuit out;
  out.unary_vars = s.unary_vars;
  out.circuit = b.finish(merger.merge_outputs());
  validate_succ(out);
  return out;
}

// ---------------------------------------------------------------------------
// compile_sigma_pi

namespace {

enum class SrcKind { FAnd, FOr, FNot, FCmp, TAdd, TMul, TNeg, TSum, TProd, TConstSmall, TConstChain, TVarFree, TVarBinder };

struct SrcNode {
  SrcKind kind;
  Opcode opcode = Opcode::Disabled;  // for direct-mapped kinds
  int child0 = -1, child1 = -1;      // node ids
  int parent = -1;
  int depth = 0;          // number of binder ancestors
  int binder_pos = 0;     // TVarBinder: 1-based position among binder ancestors
  long var_index = -1;    // TVarFree
  long const_value = 0;   // TConstSmall / TConstChain
};

struct ChainNode {
  bool is_add = false;
  int child0 = -1, child1 = -1;  // chain slots
  int parent = 0;                // chain slot
};

// Balanced addition tree over `k` ones, in slot order with the root at slot 0.
std::vector<ChainNode> build_const_chain(long k) {
  std::vector<ChainNode> chain;
  // returns slot of the subtree computing value v
  std::function<int(long)> make = [&](long v) -> int {
    int slot = static_cast<int>(chain.size());
    chain.emplace_back();
    if (v == 1) {
      chain[slot].is_add = false;
      return slot;
    }
    chain[slot].is_add = true;
    int l = make(v / 2);
    chain[slot].child0 = l;
    chain[l].parent = slot;
    int r = make(v - v / 2);
    chain[slot].child1 = r;
    chain[r].parent = slot;
    return slot;
  };
  make(k);
  return chain;
}

struct Compilation {
  std::vector<SrcNode> nodes;
  std::map<int, std::vector<ChainNode>> chains;  // node id -> constant chain
  std::map<std::string, long> var_ids;
  int max_depth = 0;
};

class SourceWalker {
public:
  Compilation walk(const EtrInstance& inst) {
    // Deterministic variable numbering: sorted free-variable names.
    for (const auto& name : free_vars(inst.formula)) {
      long id = static_cast<long>(comp_.var_ids.size());
      comp_.var_ids[name] = id;
    }
    walk_formula(inst.formula, -1);
    return std::move(comp_);
  }

private:
  int new_node(SrcKind kind, int parent, int depth) {
    SrcNode n;
    n.kind = kind;
    n.parent = parent < 0 ? 0 : parent;  // the root points at itself
    n.depth = depth;
    comp_.nodes.push_back(n);
    comp_.max_depth = std::max(comp_.max_depth, depth);
    return static_cast<int>(comp_.nodes.size()) - 1;
  }

  int walk_formula(const FormulaPtr& f, int parent) {
    switch (f->kind) {
      case FormulaKind::And:
      case FormulaKind::Or: {
        int id = new_node(f->kind == FormulaKind::And ? SrcKind::FAnd : SrcKind::FOr, parent, 0);
        comp_.nodes[id].opcode = f->kind == FormulaKind::And ? Opcode::And : Opcode::Or;
        comp_.nodes[id].child0 = walk_formula(f->f, id);
        comp_.nodes[id].child1 = walk_formula(f->g, id);
        return id;
      }
      case FormulaKind::Not: {
        int id = new_node(SrcKind::FNot, parent, 0);
        comp_.nodes[id].opcode = Opcode::Not;
        comp_.nodes[id].child0 = walk_formula(f->f, id);
        comp_.nodes[id].child1 = comp_.nodes[id].child0;
        return id;
      }
      case FormulaKind::Atom: {
        int id = new_node(SrcKind::FCmp, parent, 0);
        comp_.nodes[id].opcode =
            f->op == CmpOp::Lt ? Opcode::Lt : f->op == CmpOp::Le ? Opcode::Le : Opcode::Eq;
        comp_.nodes[id].child0 = walk_term(f->lhs, id, {});
        comp_.nodes[id].child1 = walk_term(f->rhs, id, {});
        return id;
      }
    }
    fail(Err::IllFormed, "unreachable formula kind");
  }

  int walk_term(const TermPtr& t, int parent, std::vector<std::string> binders) {
    int depth = static_cast<int>(binders.size());
    switch (t->kind) {
      case TermKind::Add:
      case TermKind::Mul: {
        int id = new_node(t->kind == TermKind::Add ? SrcKind::TAdd : SrcKind::TMul, parent, depth);
        comp_.nodes[id].opcode = t->kind == TermKind::Add ? Opcode::Add : Opcode::Mul;
        comp_.nodes[id].child0 = walk_term(t->a, id, binders);
        comp_.nodes[id].child1 = walk_term(t->b, id, binders);
        return id;
      }
      case TermKind::Neg: {
        int id = new_node(SrcKind::TNeg, parent, depth);
        comp_.nodes[id].opcode = Opcode::Neg;
        comp_.nodes[id].child0 = walk_term(t->a, id, binders);
        comp_.nodes[id].child1 = comp_.nodes[id].child0;
        return id;
      }
      case TermKind::Sum:
      case TermKind::Prod: {
        int id = new_node(t->kind == TermKind::Sum ? SrcKind::TSum : SrcKind::TProd, parent, depth);
        comp_.nodes[id].opcode = t->kind == TermKind::Sum ? Opcode::Add : Opcode::Mul;
        binders.push_back(t->binder);
        comp_.nodes[id].child0 = walk_term(t->a, id, binders);
        comp_.nodes[id].child1 = comp_.nodes[id].child0;  // both copies of the body
        return id;
      }
      case TermKind::Const: {
        if (!t->value.is_integer() || t->value.sign() < 0)
          fail(Err::DialectViolation,
               "constant " + t->value.str() + " is not a nonnegative integer; clear denominators first");
        long k = t->value.to_long();
        if (k <= 1) {
          int id = new_node(SrcKind::TConstSmall, parent, depth);
          comp_.nodes[id].opcode = k == 0 ? Opcode::Const0 : Opcode::Const1;
          comp_.nodes[id].const_value = k;
          return id;
        }
        if (k > 4096) fail(Err::TooLarge, "constant " + std::to_string(k) + " beyond the chain limit");
        int id = new_node(SrcKind::TConstChain, parent, depth);
        comp_.nodes[id].const_value = k;
        comp_.chains[id] = build_const_chain(k);
        return id;
      }
      case TermKind::Var: {
        if (t->var.is_indexed())
          fail(Err::DialectViolation, "indexed variables cannot be compiled succinctly");
        auto pos = std::find(binders.rbegin(), binders.rend(), t->var.base);
        if (pos != binders.rend()) {
          int id = new_node(SrcKind::TVarBinder, parent, depth);
          comp_.nodes[id].binder_pos =
              static_cast<int>(binders.rend() - pos);  // 1-based among ancestors
          return id;
        }
        int id = new_node(SrcKind::TVarFree, parent, depth);
        comp_.nodes[id].opcode = Opcode::Var;
        comp_.nodes[id].var_index = comp_.var_ids.at(t->var.base);
        return id;
      }
    }
    fail(Err::IllFormed, "unreachable term kind");
  }

  Compilation comp_;
};

int bits_for(long n) {
  int b = 0;
  while ((1L << b) < n) ++b;
  return b;
}

}  // namespace

SuccCircuit compile_sigma_pi(const EtrInstance& inst) {
  if (dialect_allows_indexing(inst.dialect))
    fail(Err::DialectViolation, "vi dialects cannot be compiled succinctly");
  ValidationReport report = validate_dialect(inst);
  if (!report.ok()) fail(Err::DialectViolation, report.to_string());

  SourceWalker walker;
  Compilation comp = walker.walk(inst);

  long max_chain = 1;
  for (const auto& [id, chain] : comp.chains) {
    (void)id;
    max_chain = std::max<long>(max_chain, static_cast<long>(chain.size()));
  }
  int v_bits = std::max(1, bits_for(static_cast<long>(comp.nodes.size())));
  int e_bits = comp.max_depth;
  int s_bits = max_chain > 1 ? bits_for(max_chain) : 0;
  int base_bits = v_bits + e_bits + s_bits;
  // Unary payloads need one bit per variable number.
  int n = std::max(base_bits, static_cast<int>(comp.var_ids.size()) > 0
                                  ? static_cast<int>(comp.var_ids.size()) - 1
                                  : 1);
  n = std::max(n, 1);
  if (n > 24) fail(Err::TooLarge, "compiled index width " + std::to_string(n) + " beyond 24 bits");

  // Index layout, most significant first: [pad][v][e1..eE][slot].
  CircuitBuilder b(n);
  std::vector<int> slot_w, e_w, v_w, pad_w;
  {
    int at = 0;
    for (int j = 0; j < s_bits; ++j) slot_w.push_back(b.input(at++));
    for (int j = 0; j < e_bits; ++j) e_w.push_back(b.input(at++));  // e_w[0] = innermost e_E
    for (int j = 0; j < v_bits; ++j) v_w.push_back(b.input(at++));
    for (; at < n;) pad_w.push_back(b.input(at++));
  }
  // e_w is little-endian over [e_E .. e_1]: binder position i (1-based)
  // lives at wire e_w[E - i].
  auto e_wire = [&](int pos) { return e_w[e_bits - pos]; };

  DescMerger merger(b, n);

  // Pointer to (node id, e-prefix of length `depth`, slot); e bits beyond the
  // depth are zero.
  auto ptr = [&](int node, int depth, uint64_t slot, int forced_pos = 0, bool forced_val = false) {
    std::vector<int> out;
    for (int j = 0; j < s_bits; ++j) out.push_back(b.bit((slot >> j) & 1));
    for (int j = 0; j < e_bits; ++j) {
      int pos = e_bits - j;  // binder position of this wire
      if (pos == forced_pos)
        out.push_back(b.bit(forced_val));
      else if (pos <= depth)
        out.push_back(e_w[j]);
      else
        out.push_back(b.cfalse());
    }
    for (int j = 0; j < v_bits; ++j) out.push_back(b.bit((static_cast<uint64_t>(node) >> j) & 1));
    for (size_t j = 0; j < pad_w.size(); ++j) out.push_back(b.cfalse());
    return out;
  };

  std::vector<int> self_ptr;
  for (int j = 0; j < n; ++j) self_ptr.push_back(b.input(j));
  std::vector<int> zero_payload = b.const_bits(0, n);

  // Parent pointer of node `id` at depth d: binder parents live one e-level
  // up, everything else at the same level; the root points at itself.
  auto parent_ptr = [&](const Compilation& c, int id) -> std::vector<int> {
    if (id == 0) return self_ptr;
    const SrcNode& me = c.nodes[id];
    const SrcNode& up = c.nodes[me.parent];
    bool parent_is_binder = up.kind == SrcKind::TSum || up.kind == SrcKind::TProd;
    return ptr(me.parent, parent_is_binder ? up.depth : me.depth, 0);
  };

  for (size_t id = 0; id < comp.nodes.size(); ++id) {
    const SrcNode& node = comp.nodes[id];
    // Selector: v == id, pad == 0, unused e bits == 0, slot == 0 (chains add
    // their own slot cases below).
    std::vector<int> conds;
    conds.push_back(b.equals_const(v_w, static_cast<uint64_t>(id)));
    for (int w : pad_w) conds.push_back(b.bnot(w));
    for (int j = 0; j < e_bits; ++j) {
      int pos = e_bits - j;
      if (pos > node.depth) conds.push_back(b.bnot(e_w[j]));
    }
    std::vector<int> slot_zero = conds;
    for (int w : slot_w) slot_zero.push_back(b.bnot(w));
    int sel0 = b.band_all(slot_zero);

    DescWires d;
    d.payload = zero_payload;
    d.parent = parent_ptr(comp, static_cast<int>(id));
    switch (node.kind) {
      case SrcKind::FAnd:
      case SrcKind::FOr:
      case SrcKind::FCmp:
      case SrcKind::TAdd:
      case SrcKind::TMul: {
        d.opcode = b.const_bits(static_cast<uint64_t>(node.opcode), 8);
        d.child0 = ptr(node.child0, node.depth, 0);
        d.child1 = ptr(node.child1, node.depth, 0);
        break;
      }
      case SrcKind::FNot:
      case SrcKind::TNeg: {
        d.opcode = b.const_bits(static_cast<uint64_t>(node.opcode), 8);
        d.child0 = ptr(node.child0, node.depth, 0);
        d.child1 = d.child0;
        break;
      }
      case SrcKind::TSum:
      case SrcKind::TProd: {
        // v_(e) = body_(e,0) (+ or *) body_(e,1)
        d.opcode = b.const_bits(static_cast<uint64_t>(node.opcode), 8);
        d.child0 = ptr(node.child0, node.depth + 1, 0, node.depth + 1, false);
        d.child1 = ptr(node.child0, node.depth + 1, 0, node.depth + 1, true);
        break;
      }
      case SrcKind::TConstSmall: {
        d.opcode = b.const_bits(static_cast<uint64_t>(node.opcode), 8);
        d.child0 = self_ptr;
        d.child1 = self_ptr;
        break;
      }
      case SrcKind::TVarFree: {
        d.opcode = b.const_bits(static_cast<uint64_t>(Opcode::Var), 8);
        d.child0 = self_ptr;
        d.child1 = self_ptr;
        // unary payload: var k is a block of k ones
        uint64_t unary = node.var_index == 0 ? 0 : ((uint64_t{1} << node.var_index) - 1);
        d.payload = b.const_bits(unary, n);
        break;
      }
      case SrcKind::TVarBinder: {
        // const0/const1 selected by the matching e bit of the index
        int ew = e_wire(node.binder_pos);
        d.opcode = {ew, b.cfalse(), b.cfalse(), b.cfalse(), b.cfalse(), b.cfalse(), b.cfalse(), b.cfalse()};
        d.child0 = self_ptr;
        d.child1 = self_ptr;
        break;
      }
      case SrcKind::TConstChain: {
        const auto& chain = comp.chains.at(static_cast<int>(id));
        for (size_t slot = 0; slot < chain.size(); ++slot) {
          std::vector<int> cslot = conds;
          cslot.push_back(b.equals_const(slot_w, slot));
          int sel = b.band_all(cslot);
          const ChainNode& cn = chain[slot];
          DescWires cd;
          cd.payload = zero_payload;
          cd.opcode = b.const_bits(
              static_cast<uint64_t>(cn.is_add ? Opcode::Add : Opcode::Const1), 8);
          if (cn.is_add) {
            cd.child0 = ptr(static_cast<int>(id), node.depth, static_cast<uint64_t>(cn.child0));
            cd.child1 = ptr(static_cast<int>(id), node.depth, static_cast<uint64_t>(cn.child1));
          } else {
            cd.child0 = self_ptr;
            cd.child1 = self_ptr;
          }
          cd.parent = slot == 0 ? parent_ptr(comp, static_cast<int>(id))
                                : ptr(static_cast<int>(id), node.depth,
                                      static_cast<uint64_t>(cn.parent));
          merger.add_case(sel, cd);
        }
        continue;  // chain emitted all slots including slot 0
      }
    }
    merger.add_case(sel0, d);
  }

  SuccCircuit out;
  out.unary_vars = true;
  out.circuit = b.finish(merger.merge_outputs());
  validate_succ(out);
  return out;
}

}  // namespace etrforge
