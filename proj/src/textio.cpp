#include "etrforge/textio.hpp"

#include <cctype>
#include <sstream>

#include "etrforge/errors.hpp"

namespace etrforge::textio {

namespace {

[[noreturn]] void syntax_error(int line, int col, const std::string& msg) {
  fail(Err::SyntaxError, std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
}

// ---------------------------------------------------------------------------
// s-expressions

struct Sexp {
  bool is_atom = false;
  std::string text;
  std::vector<Sexp> items;
  int line = 1, col = 1;
};

class SexpReader {
public:
  // Holds a copy: callers routinely pass freshly joined temporaries.
  SexpReader(std::string s, int first_line) : s_(std::move(s)), line_(first_line) {}

  bool at_end() {
    skip_ws();
    return pos_ >= s_.size();
  }

  Sexp read() {
    skip_ws();
    if (pos_ >= s_.size()) syntax_error(line_, col_, "unexpected end of input");
    char c = s_[pos_];
    if (c == ')') syntax_error(line_, col_, "unexpected ')'");
    if (c == '(') {
      Sexp list;
      list.line = line_;
      list.col = col_;
      advance();
      while (true) {
        skip_ws();
        if (pos_ >= s_.size()) syntax_error(list.line, list.col, "unterminated '('");
        if (s_[pos_] == ')') {
          advance();
          return list;
        }
        list.items.push_back(read());
      }
    }
    Sexp atom;
    atom.is_atom = true;
    atom.line = line_;
    atom.col = col_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
           s_[pos_] != '(' && s_[pos_] != ')') {
      atom.text += s_[pos_];
      advance();
    }
    return atom;
  }

private:
  void advance() {
    if (s_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) advance();
  }

  std::string s_;
  size_t pos_ = 0;
  int line_;
  int col_ = 1;
};

const std::string& head(const Sexp& s) {
  if (s.is_atom || s.items.empty() || !s.items[0].is_atom)
    syntax_error(s.line, s.col, "expected a keyword form");
  return s.items[0].text;
}

void expect_arity(const Sexp& s, size_t n, const char* what) {
  if (s.items.size() != n + 1)
    syntax_error(s.line, s.col, std::string(what) + " expects " + std::to_string(n) + " arguments");
}

void expect_min_arity(const Sexp& s, size_t n, const char* what) {
  if (s.items.size() < n + 1)
    syntax_error(s.line, s.col,
                 std::string(what) + " expects at least " + std::to_string(n) + " arguments");
}

std::string atom_symbol(const Sexp& s) {
  if (!s.is_atom) syntax_error(s.line, s.col, "expected a symbol");
  return s.text;
}

Rational atom_rational(const Sexp& s) {
  if (!s.is_atom) syntax_error(s.line, s.col, "expected a rational");
  try {
    return Rational::from_string(s.text);
  } catch (const EtrError&) {
    syntax_error(s.line, s.col, "malformed rational '" + s.text + "'");
  }
}

long atom_integer(const Sexp& s) {
  Rational r = atom_rational(s);
  if (!r.is_integer()) syntax_error(s.line, s.col, "expected an integer");
  return r.to_long();
}

// ---------------------------------------------------------------------------
// terms and formulas

TermPtr term_from(const Sexp& s) {
  const std::string& h = head(s);
  if (h == "const") {
    expect_arity(s, 1, "const");
    return t_const(atom_rational(s.items[1]));
  }
  if (h == "var") {
    expect_arity(s, 1, "var");
    return t_var(atom_symbol(s.items[1]));
  }
  if (h == "ivar") {
    expect_min_arity(s, 2, "ivar");
    std::vector<TermPtr> idx;
    for (size_t i = 2; i < s.items.size(); ++i) idx.push_back(term_from(s.items[i]));
    return t_ivar(atom_symbol(s.items[1]), std::move(idx));
  }
  if (h == "neg") {
    expect_arity(s, 1, "neg");
    return t_neg(term_from(s.items[1]));
  }
  if (h == "add" || h == "mul") {
    expect_min_arity(s, 2, h.c_str());
    TermPtr acc = term_from(s.items[1]);
    for (size_t i = 2; i < s.items.size(); ++i) {
      TermPtr rhs = term_from(s.items[i]);
      acc = h == "add" ? t_add(std::move(acc), std::move(rhs)) : t_mul(std::move(acc), std::move(rhs));
    }
    return acc;
  }
  if (h == "sum" || h == "prod") {
    expect_arity(s, 3, h.c_str());
    std::string binder = atom_symbol(s.items[1]);
    long domain = atom_integer(s.items[2]);
    if (domain < 2 || domain > 64) syntax_error(s.items[2].line, s.items[2].col, "bad binder domain");
    TermPtr body = term_from(s.items[3]);
    return h == "sum" ? t_sum(binder, static_cast<int>(domain), std::move(body))
                      : t_prod(binder, static_cast<int>(domain), std::move(body));
  }
  syntax_error(s.line, s.col, "unknown term keyword '" + h + "'");
}

FormulaPtr formula_from(const Sexp& s) {
  const std::string& h = head(s);
  if (h == "lt" || h == "le" || h == "eq") {
    expect_arity(s, 2, h.c_str());
    CmpOp op = h == "lt" ? CmpOp::Lt : h == "le" ? CmpOp::Le : CmpOp::Eq;
    return f_atom(op, term_from(s.items[1]), term_from(s.items[2]));
  }
  if (h == "not") {
    expect_arity(s, 1, "not");
    return f_not(formula_from(s.items[1]));
  }
  if (h == "and" || h == "or") {
    expect_min_arity(s, 2, h.c_str());
    FormulaPtr acc = formula_from(s.items[1]);
    for (size_t i = 2; i < s.items.size(); ++i) {
      FormulaPtr rhs = formula_from(s.items[i]);
      acc = h == "and" ? f_and(std::move(acc), std::move(rhs)) : f_or(std::move(acc), std::move(rhs));
    }
    return acc;
  }
  syntax_error(s.line, s.col, "unknown formula keyword '" + h + "'");
}

void print_term_rec(std::ostream& os, const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Const:
      os << "(const " << t->value << ")";
      return;
    case TermKind::Var:
      if (!t->var.is_indexed()) {
        os << "(var " << t->var.base << ")";
      } else {
        os << "(ivar " << t->var.base;
        for (const auto& e : t->var.index) {
          os << " ";
          print_term_rec(os, e);
        }
        os << ")";
      }
      return;
    case TermKind::Neg:
      os << "(neg ";
      print_term_rec(os, t->a);
      os << ")";
      return;
    case TermKind::Add:
    case TermKind::Mul:
      os << (t->kind == TermKind::Add ? "(add " : "(mul ");
      print_term_rec(os, t->a);
      os << " ";
      print_term_rec(os, t->b);
      os << ")";
      return;
    case TermKind::Sum:
    case TermKind::Prod:
      os << (t->kind == TermKind::Sum ? "(sum " : "(prod ") << t->binder << " " << t->domain << " ";
      print_term_rec(os, t->a);
      os << ")";
      return;
  }
}

const char* cmp_keyword(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "lt";
    case CmpOp::Le: return "le";
    case CmpOp::Eq: return "eq";
  }
  return "?";
}

void print_formula_rec(std::ostream& os, const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::Atom:
      os << "(" << cmp_keyword(f->op) << " ";
      print_term_rec(os, f->lhs);
      os << " ";
      print_term_rec(os, f->rhs);
      os << ")";
      return;
    case FormulaKind::Not:
      os << "(not ";
      print_formula_rec(os, f->f);
      os << ")";
      return;
    case FormulaKind::And:
    case FormulaKind::Or:
      os << (f->kind == FormulaKind::And ? "(and " : "(or ");
      print_formula_rec(os, f->f);
      os << " ";
      print_formula_rec(os, f->g);
      os << ")";
      return;
  }
}

// ---------------------------------------------------------------------------
// events and probabilistic formulas

EventPtr event_from(const Sexp& s) {
  if (s.is_atom) {
    if (s.text == "top") return e_top();
    syntax_error(s.line, s.col, "unknown event atom '" + s.text + "'");
  }
  const std::string& h = head(s);
  if (h == "eq") {
    expect_arity(s, 2, "eq");
    std::string var = atom_symbol(s.items[1]);
    const Sexp& v = s.items[2];
    if (!v.is_atom) syntax_error(v.line, v.col, "event value must be an atom");
    if (!v.text.empty() && (std::isdigit(static_cast<unsigned char>(v.text[0])) || v.text[0] == '-'))
      return e_eq(var, atom_integer(v));
    return e_eq_dummy(var, v.text);
  }
  if (h == "not") {
    expect_arity(s, 1, "not");
    return e_not(event_from(s.items[1]));
  }
  if (h == "and") {
    expect_min_arity(s, 2, "and");
    EventPtr acc = event_from(s.items[1]);
    for (size_t i = 2; i < s.items.size(); ++i) acc = e_and(acc, event_from(s.items[i]));
    return acc;
  }
  syntax_error(s.line, s.col, "unknown event keyword '" + h + "'");
}

ProbTermPtr prob_term_from(const Sexp& s) {
  const std::string& h = head(s);
  if (h == "P") {
    expect_arity(s, 1, "P");
    return p_prob(event_from(s.items[1]));
  }
  if (h == "neg") {
    expect_arity(s, 1, "neg");
    return p_neg(prob_term_from(s.items[1]));
  }
  if (h == "add" || h == "mul") {
    expect_min_arity(s, 2, h.c_str());
    ProbTermPtr acc = prob_term_from(s.items[1]);
    for (size_t i = 2; i < s.items.size(); ++i) {
      ProbTermPtr rhs = prob_term_from(s.items[i]);
      acc = h == "add" ? p_add(std::move(acc), std::move(rhs)) : p_mul(std::move(acc), std::move(rhs));
    }
    return acc;
  }
  if (h == "sum") {
    expect_arity(s, 3, "sum");
    std::string binder = atom_symbol(s.items[1]);
    long domain = atom_integer(s.items[2]);
    if (domain < 2 || domain > 64) syntax_error(s.items[2].line, s.items[2].col, "bad summation domain");
    return p_sum(binder, static_cast<int>(domain), prob_term_from(s.items[3]));
  }
  syntax_error(s.line, s.col, "unknown probabilistic term keyword '" + h + "'");
}

ProbFormulaPtr prob_formula_from(const Sexp& s) {
  const std::string& h = head(s);
  if (h == "lt" || h == "le" || h == "eq") {
    expect_arity(s, 2, h.c_str());
    CmpOp op = h == "lt" ? CmpOp::Lt : h == "le" ? CmpOp::Le : CmpOp::Eq;
    return pf_atom(op, prob_term_from(s.items[1]), prob_term_from(s.items[2]));
  }
  if (h == "not") {
    expect_arity(s, 1, "not");
    return pf_not(prob_formula_from(s.items[1]));
  }
  if (h == "and" || h == "or") {
    expect_min_arity(s, 2, h.c_str());
    ProbFormulaPtr acc = prob_formula_from(s.items[1]);
    for (size_t i = 2; i < s.items.size(); ++i) {
      ProbFormulaPtr rhs = prob_formula_from(s.items[i]);
      acc = h == "and" ? pf_and(std::move(acc), std::move(rhs)) : pf_or(std::move(acc), std::move(rhs));
    }
    return acc;
  }
  syntax_error(s.line, s.col, "unknown probabilistic formula keyword '" + h + "'");
}

void print_event_rec(std::ostream& os, const EventPtr& e) {
  switch (e->kind) {
    case EventKind::Top:
      os << "top";
      return;
    case EventKind::AtomEq:
      os << "(eq " << e->var << " ";
      if (const long* v = std::get_if<long>(&e->value))
        os << *v;
      else
        os << std::get<std::string>(e->value);
      os << ")";
      return;
    case EventKind::Not:
      os << "(not ";
      print_event_rec(os, e->f);
      os << ")";
      return;
    case EventKind::And:
      os << "(and ";
      print_event_rec(os, e->f);
      os << " ";
      print_event_rec(os, e->g);
      os << ")";
      return;
  }
}

void print_prob_term_rec(std::ostream& os, const ProbTermPtr& t) {
  switch (t->kind) {
    case ProbTermKind::Prob:
      os << "(P ";
      print_event_rec(os, t->event);
      os << ")";
      return;
    case ProbTermKind::Neg:
      os << "(neg ";
      print_prob_term_rec(os, t->a);
      os << ")";
      return;
    case ProbTermKind::Add:
    case ProbTermKind::Mul:
      os << (t->kind == ProbTermKind::Add ? "(add " : "(mul ");
      print_prob_term_rec(os, t->a);
      os << " ";
      print_prob_term_rec(os, t->b);
      os << ")";
      return;
    case ProbTermKind::Sum:
      os << "(sum " << t->binder << " " << t->domain << " ";
      print_prob_term_rec(os, t->a);
      os << ")";
      return;
  }
}

void print_prob_formula_rec(std::ostream& os, const ProbFormulaPtr& f) {
  switch (f->kind) {
    case ProbFormulaKind::Atom:
      os << "(" << cmp_keyword(f->op) << " ";
      print_prob_term_rec(os, f->lhs);
      os << " ";
      print_prob_term_rec(os, f->rhs);
      os << ")";
      return;
    case ProbFormulaKind::Not:
      os << "(not ";
      print_prob_formula_rec(os, f->f);
      os << ")";
      return;
    case ProbFormulaKind::And:
    case ProbFormulaKind::Or:
      os << (f->kind == ProbFormulaKind::And ? "(and " : "(or ");
      print_prob_formula_rec(os, f->f);
      os << " ";
      print_prob_formula_rec(os, f->g);
      os << ")";
      return;
  }
}

// ---------------------------------------------------------------------------
// ESO sentences

EsoTermPtr eso_term_from(const Sexp& s) {
  const std::string& h = head(s);
  if (h == "const") {
    expect_arity(s, 1, "const");
    return s_const(atom_rational(s.items[1]));
  }
  if (h == "app") {
    expect_min_arity(s, 1, "app");
    std::vector<std::string> args;
    for (size_t i = 2; i < s.items.size(); ++i) args.push_back(atom_symbol(s.items[i]));
    return s_app(atom_symbol(s.items[1]), std::move(args));
  }
  if (h == "add" || h == "mul") {
    expect_min_arity(s, 2, h.c_str());
    EsoTermPtr acc = eso_term_from(s.items[1]);
    for (size_t i = 2; i < s.items.size(); ++i) {
      EsoTermPtr rhs = eso_term_from(s.items[i]);
      acc = h == "add" ? s_add(std::move(acc), std::move(rhs)) : s_mul(std::move(acc), std::move(rhs));
    }
    return acc;
  }
  if (h == "sub") {
    expect_arity(s, 2, "sub");
    return s_sub(eso_term_from(s.items[1]), eso_term_from(s.items[2]));
  }
  if (h == "sum") {
    expect_arity(s, 2, "sum");
    return s_sum(atom_symbol(s.items[1]), eso_term_from(s.items[2]));
  }
  syntax_error(s.line, s.col, "unknown ESO term keyword '" + h + "'");
}

EsoFormulaPtr eso_formula_from(const Sexp& s) {
  const std::string& h = head(s);
  if (h == "eqv") {
    expect_arity(s, 2, "eqv");
    return q_vareq(atom_symbol(s.items[1]), atom_symbol(s.items[2]));
  }
  if (h == "rel") {
    expect_min_arity(s, 1, "rel");
    std::vector<std::string> args;
    for (size_t i = 2; i < s.items.size(); ++i) args.push_back(atom_symbol(s.items[i]));
    return q_rel(atom_symbol(s.items[1]), std::move(args));
  }
  if (h == "lt" || h == "le" || h == "eq") {
    expect_arity(s, 2, h.c_str());
    CmpOp op = h == "lt" ? CmpOp::Lt : h == "le" ? CmpOp::Le : CmpOp::Eq;
    return q_cmp(op, eso_term_from(s.items[1]), eso_term_from(s.items[2]));
  }
  if (h == "not") {
    expect_arity(s, 1, "not");
    EsoFormulaPtr inner = eso_formula_from(s.items[1]);
    if (inner->kind != EsoFormulaKind::VarEq && inner->kind != EsoFormulaKind::Rel &&
        inner->kind != EsoFormulaKind::Cmp)
      syntax_error(s.line, s.col, "negation is only available on atoms");
    if (inner->negated) syntax_error(s.line, s.col, "double negation");
    EsoFormula flipped = *inner;
    flipped.negated = true;
    return std::make_shared<const EsoFormula>(std::move(flipped));
  }
  if (h == "and" || h == "or") {
    expect_min_arity(s, 2, h.c_str());
    EsoFormulaPtr acc = eso_formula_from(s.items[1]);
    for (size_t i = 2; i < s.items.size(); ++i) {
      EsoFormulaPtr rhs = eso_formula_from(s.items[i]);
      acc = h == "and" ? q_and(std::move(acc), std::move(rhs)) : q_or(std::move(acc), std::move(rhs));
    }
    return acc;
  }
  if (h == "exists" || h == "forall") {
    expect_arity(s, 2, h.c_str());
    std::string var = atom_symbol(s.items[1]);
    EsoFormulaPtr body = eso_formula_from(s.items[2]);
    return h == "exists" ? q_exists(var, std::move(body)) : q_forall(var, std::move(body));
  }
  if (h == "existsf") {
    expect_arity(s, 3, "existsf");
    std::string fn = atom_symbol(s.items[1]);
    long arity = atom_integer(s.items[2]);
    if (arity < 0 || arity > 16) syntax_error(s.items[2].line, s.items[2].col, "bad arity");
    return q_existsf(fn, static_cast<int>(arity), eso_formula_from(s.items[3]));
  }
  syntax_error(s.line, s.col, "unknown ESO formula keyword '" + h + "'");
}

void print_eso_term_rec(std::ostream& os, const EsoTermPtr& t) {
  switch (t->kind) {
    case EsoTermKind::Const:
      os << "(const " << t->value << ")";
      return;
    case EsoTermKind::App:
      os << "(app " << t->fn;
      for (const auto& a : t->args) os << " " << a;
      os << ")";
      return;
    case EsoTermKind::Add:
    case EsoTermKind::Sub:
    case EsoTermKind::Mul: {
      const char* kw = t->kind == EsoTermKind::Add ? "add" : t->kind == EsoTermKind::Sub ? "sub" : "mul";
      os << "(" << kw << " ";
      print_eso_term_rec(os, t->a);
      os << " ";
      print_eso_term_rec(os, t->b);
      os << ")";
      return;
    }
    case EsoTermKind::Sum:
      os << "(sum " << t->binder << " ";
      print_eso_term_rec(os, t->a);
      os << ")";
      return;
  }
}

void print_eso_formula_rec(std::ostream& os, const EsoFormulaPtr& f) {
  if (f->negated) os << "(not ";
  switch (f->kind) {
    case EsoFormulaKind::VarEq:
      os << "(eqv " << f->x << " " << f->y << ")";
      break;
    case EsoFormulaKind::Rel:
      os << "(rel " << f->rel;
      for (const auto& a : f->args) os << " " << a;
      os << ")";
      break;
    case EsoFormulaKind::Cmp:
      os << "(" << cmp_keyword(f->op) << " ";
      print_eso_term_rec(os, f->lhs);
      os << " ";
      print_eso_term_rec(os, f->rhs);
      os << ")";
      break;
    case EsoFormulaKind::And:
    case EsoFormulaKind::Or:
      os << (f->kind == EsoFormulaKind::And ? "(and " : "(or ");
      print_eso_formula_rec(os, f->f);
      os << " ";
      print_eso_formula_rec(os, f->g);
      os << ")";
      break;
    case EsoFormulaKind::Exists:
    case EsoFormulaKind::Forall:
      os << (f->kind == EsoFormulaKind::Exists ? "(exists " : "(forall ") << f->var << " ";
      print_eso_formula_rec(os, f->f);
      os << ")";
      break;
    case EsoFormulaKind::ExistsF:
      os << "(existsf " << f->var << " " << f->arity << " ";
      print_eso_formula_rec(os, f->f);
      os << ")";
      break;
  }
  if (f->negated) os << ")";
}

// ---------------------------------------------------------------------------
// line-level helpers

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) {
    if (cur.back() == '\r') cur.pop_back();
    lines.push_back(cur);
  }
  return lines;
}

std::string strip(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

void check_version_header(const std::vector<std::string>& lines) {
  if (lines.empty() || strip(lines[0]) != kVersionHeader)
    fail(Err::SyntaxError, std::string("missing version header '") + kVersionHeader + "'");
}

// Splits "key: v1 v2; key2: v3" into ordered (key, values) segments.
std::vector<std::pair<std::string, std::vector<std::string>>> parse_segments(
    const std::string& line, int lineno) {
  std::vector<std::pair<std::string, std::vector<std::string>>> out;
  std::stringstream ss(line);
  std::string seg;
  while (std::getline(ss, seg, ';')) {
    seg = strip(seg);
    if (seg.empty()) continue;
    auto colon = seg.find(':');
    if (colon == std::string::npos) syntax_error(lineno, 1, "expected 'key: values' segment");
    std::string key = strip(seg.substr(0, colon));
    out.emplace_back(key, split_ws(seg.substr(colon + 1)));
  }
  return out;
}

std::string join_from(const std::vector<std::string>& lines, size_t start) {
  std::string out;
  for (size_t i = start; i < lines.size(); ++i) {
    out += lines[i];
    out += '\n';
  }
  return out;
}

long parse_long(const std::string& s, int lineno, const char* what) {
  try {
    size_t used = 0;
    long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    syntax_error(lineno, 1, std::string("malformed ") + what + " '" + s + "'");
  }
}

// Rows of the form "tok tok ... : value". Returns tokens and the value text.
bool parse_table_row(const std::string& line, std::vector<std::string>* toks, std::string* value) {
  auto colon = line.find(':');
  if (colon == std::string::npos) return false;
  *toks = split_ws(line.substr(0, colon));
  std::string v = strip(line.substr(colon + 1));
  if (v.empty()) return false;
  *value = v;
  return true;
}

// ---------------------------------------------------------------------------
// circuit blocks (shared between succ and succ18 files)

struct CircuitHeader {
  int inputs = 0;
  std::vector<std::string> output_names;
  bool unary = false;
};

CircuitHeader parse_circuit_header(const std::string& line, int lineno) {
  CircuitHeader h;
  bool saw_inputs = false, saw_outputs = false;
  for (const auto& [key, values] : parse_segments(line, lineno)) {
    if (key == "inputs") {
      if (values.size() != 1) syntax_error(lineno, 1, "inputs expects one number");
      h.inputs = static_cast<int>(parse_long(values[0], lineno, "input width"));
      saw_inputs = true;
    } else if (key == "outputs") {
      h.output_names = values;
      saw_outputs = true;
    } else if (key == "unary") {
      if (values.size() != 1 || (values[0] != "0" && values[0] != "1"))
        syntax_error(lineno, 1, "unary expects 0 or 1");
      h.unary = values[0] == "1";
    } else {
      syntax_error(lineno, 1, "unknown circuit header key '" + key + "'");
    }
  }
  if (!saw_inputs || !saw_outputs) syntax_error(lineno, 1, "circuit header needs inputs and outputs");
  return h;
}

int gate_id(const std::string& tok, int lineno) {
  if (tok.size() < 2 || tok[0] != 'g') syntax_error(lineno, 1, "expected gate name g<i>, got '" + tok + "'");
  return static_cast<int>(parse_long(tok.substr(1), lineno, "gate id"));
}

// Parses gate lines until `end` (inclusive) or the end of input when
// stop_at_end is false. Returns the next line index.
size_t parse_gate_lines(const std::vector<std::string>& lines, size_t i, bool stop_at_end,
                        const CircuitHeader& header, BoolCircuit* out) {
  out->input_width = header.inputs;
  for (; i < lines.size(); ++i) {
    std::string line = strip(lines[i]);
    if (line.empty()) continue;
    if (stop_at_end && line == "end") {
      ++i;
      break;
    }
    int lineno = static_cast<int>(i + 1);
    auto toks = split_ws(line);
    if (toks.size() < 3 || toks[1] != "=") syntax_error(lineno, 1, "expected 'g<i> = OP ...'");
    int id = gate_id(toks[0], lineno);
    if (id != static_cast<int>(out->gates.size()))
      syntax_error(lineno, 1, "gate ids must be consecutive from g0");
    Gate g;
    const std::string& op = toks[2];
    if (op.rfind("INPUT", 0) == 0) {
      if (toks.size() != 3) syntax_error(lineno, 1, "INPUT takes no operands");
      g.op = Gate::Op::Input;
      g.input = static_cast<int>(parse_long(op.substr(5), lineno, "input bit"));
    } else if (op == "NOT") {
      if (toks.size() != 4) syntax_error(lineno, 1, "NOT takes one operand");
      g.op = Gate::Op::Not;
      g.a = gate_id(toks[3], lineno);
    } else if (op == "AND" || op == "OR") {
      if (toks.size() != 5) syntax_error(lineno, 1, op + " takes two operands");
      g.op = op == "AND" ? Gate::Op::And : Gate::Op::Or;
      g.a = gate_id(toks[3], lineno);
      g.b = gate_id(toks[4], lineno);
    } else {
      syntax_error(lineno, 1, "unknown gate op '" + op + "'");
    }
    out->gates.push_back(g);
  }
  for (const auto& name : header.output_names) out->outputs.push_back(gate_id(name, 0));
  validate_circuit(*out);
  return i;
}

void print_circuit_body(std::ostream& os, const BoolCircuit& c) {
  for (size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    os << "g" << i << " = ";
    switch (g.op) {
      case Gate::Op::Input: os << "INPUT" << g.input; break;
      case Gate::Op::Not: os << "NOT g" << g.a; break;
      case Gate::Op::And: os << "AND g" << g.a << " g" << g.b; break;
      case Gate::Op::Or: os << "OR g" << g.a << " g" << g.b; break;
    }
    os << "\n";
  }
}

std::string circuit_header_line(const BoolCircuit& c, bool with_unary, bool unary) {
  std::ostringstream os;
  os << "inputs: " << c.input_width << "; outputs:";
  for (int o : c.outputs) os << " g" << o;
  if (with_unary && unary) os << "; unary: 1";
  return os.str();
}

// ---------------------------------------------------------------------------
// distribution bodies (shared between distribution files and witnesses)

void parse_distribution_body(const std::vector<std::string>& lines, size_t i, Distribution* d) {
  if (i >= lines.size()) fail(Err::SyntaxError, "distribution body missing");
  int lineno = static_cast<int>(i + 1);
  bool saw_vars = false, saw_domain = false;
  for (const auto& [key, values] : parse_segments(lines[i], lineno)) {
    if (key == "vars") {
      d->vars = values;
      saw_vars = true;
    } else if (key == "domain") {
      if (values.size() != 1) syntax_error(lineno, 1, "domain expects one number");
      d->domain = static_cast<int>(parse_long(values[0], lineno, "domain"));
      saw_domain = true;
    } else {
      syntax_error(lineno, 1, "unknown distribution header key '" + key + "'");
    }
  }
  if (!saw_vars || !saw_domain) syntax_error(lineno, 1, "distribution header needs vars and domain");
  for (++i; i < lines.size(); ++i) {
    std::string line = strip(lines[i]);
    if (line.empty()) continue;
    lineno = static_cast<int>(i + 1);
    std::vector<std::string> toks;
    std::string value;
    if (!parse_table_row(line, &toks, &value)) syntax_error(lineno, 1, "expected 'v1 ... vn : mass'");
    if (toks.size() != d->vars.size()) syntax_error(lineno, 1, "tuple arity mismatch");
    std::vector<int> tuple;
    for (const auto& t : toks) tuple.push_back(static_cast<int>(parse_long(t, lineno, "tuple value")));
    if (!d->entries.emplace(std::move(tuple), Rational::from_string(value)).second)
      syntax_error(lineno, 1, "duplicate tuple");
  }
}

void print_distribution_body(std::ostream& os, const Distribution& d) {
  os << "vars:";
  for (const auto& v : d.vars) os << " " << v;
  os << "; domain: " << d.domain << "\n";
  for (const auto& [tuple, mass] : d.entries) {
    for (int v : tuple) os << v << " ";
    os << ": " << mass << "\n";
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// public expression-level API

TermPtr parse_term(const std::string& text) {
  SexpReader r(text, 1);
  TermPtr t = term_from(r.read());
  if (!r.at_end()) fail(Err::SyntaxError, "trailing input after term");
  return t;
}

std::string print_term(const TermPtr& t) {
  std::ostringstream os;
  print_term_rec(os, t);
  return os.str();
}

FormulaPtr parse_formula(const std::string& text) {
  SexpReader r(text, 1);
  FormulaPtr f = formula_from(r.read());
  if (!r.at_end()) fail(Err::SyntaxError, "trailing input after formula");
  return f;
}

std::string print_formula(const FormulaPtr& f) {
  std::ostringstream os;
  print_formula_rec(os, f);
  return os.str();
}

ProbFormulaPtr parse_prob_formula(const std::string& text) {
  SexpReader r(text, 1);
  ProbFormulaPtr f = prob_formula_from(r.read());
  if (!r.at_end()) fail(Err::SyntaxError, "trailing input after formula");
  return f;
}

std::string print_prob_formula(const ProbFormulaPtr& f) {
  std::ostringstream os;
  print_prob_formula_rec(os, f);
  return os.str();
}

EsoSentence parse_eso_sentence(const std::string& text) {
  SexpReader r(text, 1);
  EsoSentence s = eso_formula_from(r.read());
  if (!r.at_end()) fail(Err::SyntaxError, "trailing input after sentence");
  return s;
}

std::string print_eso_sentence(const EsoSentence& s) {
  std::ostringstream os;
  print_eso_formula_rec(os, s);
  return os.str();
}

// ---------------------------------------------------------------------------
// file-level API

EtrInstance parse_etr(const std::string& text) {
  auto lines = split_lines(text);
  check_version_header(lines);
  if (lines.size() < 2 || strip(lines[1]).rfind("dialect:", 0) != 0)
    fail(Err::SyntaxError, "expected 'dialect: <name>' on line 2");
  EtrInstance inst;
  inst.dialect = dialect_from_name(strip(strip(lines[1]).substr(8)));
  size_t i = 2;
  if (i < lines.size() && strip(lines[i]).rfind("vars:", 0) == 0) {
    for (const auto& v : split_ws(strip(lines[i]).substr(5))) inst.declared_vars.insert(v);
    ++i;
  }
  SexpReader r(join_from(lines, i), static_cast<int>(i + 1));
  inst.formula = formula_from(r.read());
  while (!r.at_end()) {
    Sexp s = r.read();
    if (head(s) != "candidates") syntax_error(s.line, s.col, "expected a (candidates ...) form");
    expect_arity(s, 2, "candidates");
    std::string name = atom_symbol(s.items[1]);
    const Sexp& vals = s.items[2];
    if (vals.is_atom) syntax_error(vals.line, vals.col, "expected a value list");
    std::vector<Rational> cs;
    for (const auto& v : vals.items) cs.push_back(atom_rational(v));
    inst.candidates[name] = std::move(cs);
  }
  ValidationReport report = validate_dialect(inst);
  if (!report.ok()) fail(Err::DialectViolation, report.to_string());
  return inst;
}

std::string print_etr(const EtrInstance& inst) {
  std::ostringstream os;
  os << kVersionHeader << "\n";
  os << "dialect: " << dialect_name(inst.dialect) << "\n";
  if (!inst.declared_vars.empty()) {
    os << "vars:";
    for (const auto& v : inst.declared_vars) os << " " << v;
    os << "\n";
  }
  print_formula_rec(os, inst.formula);
  os << "\n";
  for (const auto& [name, values] : inst.candidates) {
    os << "(candidates " << name << " (";
    for (size_t i = 0; i < values.size(); ++i) os << (i ? " " : "") << values[i];
    os << "))\n";
  }
  return os.str();
}

QbfInstance parse_qbf(const std::string& text) {
  auto lines = split_lines(text);
  check_version_header(lines);
  if (lines.size() < 2 || strip(lines[1]).rfind("prefix:", 0) != 0)
    fail(Err::SyntaxError, "expected 'prefix: ...' on line 2");
  QbfInstance q;
  auto toks = split_ws(strip(lines[1]).substr(7));
  if (toks.size() % 2 != 0) fail(Err::SyntaxError, "prefix must alternate quantifier and variable");
  for (size_t i = 0; i < toks.size(); i += 2) {
    Quant quant;
    if (toks[i] == "A")
      quant = Quant::Forall;
    else if (toks[i] == "E")
      quant = Quant::Exists;
    else
      fail(Err::SyntaxError, "quantifier must be A or E, got '" + toks[i] + "'");
    q.prefix.emplace_back(quant, toks[i + 1]);
  }
  size_t i = 2;
  while (i < lines.size() && strip(lines[i]).empty()) ++i;
  if (i >= lines.size() || strip(lines[i]).rfind("matrix:", 0) != 0)
    fail(Err::SyntaxError, "expected 'matrix: ...'");
  std::string rest = strip(lines[i]).substr(7) + "\n" + join_from(lines, i + 1);
  SexpReader r(rest, static_cast<int>(i + 1));
  q.matrix = formula_from(r.read());
  if (!r.at_end()) fail(Err::SyntaxError, "trailing input after matrix");
  validate_qbf(q);
  return q;
}

std::string print_qbf(const QbfInstance& q) {
  std::ostringstream os;
  os << kVersionHeader << "\n";
  os << "prefix:";
  for (const auto& [quant, name] : q.prefix)
    os << " " << (quant == Quant::Forall ? "A" : "E") << " " << name;
  os << "\n";
  os << "matrix: ";
  print_formula_rec(os, q.matrix);
  os << "\n";
  return os.str();
}

Distribution parse_distribution(const std::string& text) {
  auto lines = split_lines(text);
  check_version_header(lines);
  Distribution d;
  parse_distribution_body(lines, 1, &d);
  validate_distribution(d);
  return d;
}

std::string print_distribution(const Distribution& d) {
  std::ostringstream os;
  os << kVersionHeader << "\n";
  print_distribution_body(os, d);
  return os.str();
}

ProbSatInstance parse_prob(const std::string& text) {
  auto lines = split_lines(text);
  check_version_header(lines);
  if (lines.size() < 2) fail(Err::SyntaxError, "probabilistic instance body missing");
  ProbSatInstance inst;
  bool saw_vars = false, saw_domain = false;
  for (const auto& [key, values] : parse_segments(lines[1], 2)) {
    if (key == "vars") {
      inst.vars = values;
      saw_vars = true;
    } else if (key == "domain") {
      if (values.size() != 1) syntax_error(2, 1, "domain expects one number");
      inst.domain = static_cast<int>(parse_long(values[0], 2, "domain"));
      saw_domain = true;
    } else {
      syntax_error(2, 1, "unknown header key '" + key + "'");
    }
  }
  if (!saw_vars || !saw_domain) syntax_error(2, 1, "header needs vars and domain");
  size_t i = 2;
  if (i < lines.size() && strip(lines[i]).rfind("small-model:", 0) == 0) {
    inst.small_model_p = parse_long(strip(strip(lines[i]).substr(12)), static_cast<int>(i + 1),
                                    "small-model parameter");
    ++i;
  }
  SexpReader r(join_from(lines, i), static_cast<int>(i + 1));
  inst.formula = prob_formula_from(r.read());
  if (!r.at_end()) fail(Err::SyntaxError, "trailing input after formula");
  return inst;
}

std::string print_prob(const ProbSatInstance& inst) {
  std::ostringstream os;
  os << kVersionHeader << "\n";
  os << "vars:";
  for (const auto& v : inst.vars) os << " " << v;
  os << "; domain: " << inst.domain << "\n";
  if (inst.small_model_p) os << "small-model: " << *inst.small_model_p << "\n";
  print_prob_formula_rec(os, inst.formula);
  os << "\n";
  return os.str();
}

SuccCircuit parse_succ(const std::string& text) {
  auto lines = split_lines(text);
  check_version_header(lines);
  if (lines.size() < 2) fail(Err::SyntaxError, "circuit header missing");
  CircuitHeader header = parse_circuit_header(strip(lines[1]), 2);
  SuccCircuit s;
  s.unary_vars = header.unary;
  parse_gate_lines(lines, 2, false, header, &s.circuit);
  validate_succ(s);
  return s;
}

std::string print_succ(const SuccCircuit& s) {
  std::ostringstream os;
  os << kVersionHeader << "\n";
  os << circuit_header_line(s.circuit, true, s.unary_vars) << "\n";
  print_circuit_body(os, s.circuit);
  return os.str();
}

Succ18Instance parse_succ18(const std::string& text) {
  auto lines = split_lines(text);
  check_version_header(lines);
  Succ18Instance inst;
  size_t i = 1;
  while (i < lines.size()) {
    std::string line = strip(lines[i]);
    if (line.empty()) {
      ++i;
      continue;
    }
    int lineno = static_cast<int>(i + 1);
    auto toks = split_ws(line);
    if (toks.size() != 2 || toks[0] != "circuit")
      syntax_error(lineno, 1, "expected 'circuit <index>'");
    if (parse_long(toks[1], lineno, "circuit index") != static_cast<long>(inst.circuits.size()))
      syntax_error(lineno, 1, "circuit indices must be consecutive from 0");
    ++i;
    if (i >= lines.size()) syntax_error(lineno, 1, "circuit header missing");
    CircuitHeader header = parse_circuit_header(strip(lines[i]), static_cast<int>(i + 1));
    BoolCircuit c;
    i = parse_gate_lines(lines, i + 1, true, header, &c);
    inst.circuits.push_back(std::move(c));
  }
  validate_succ18(inst);
  return inst;
}

std::string print_succ18(const Succ18Instance& inst) {
  std::ostringstream os;
  os << kVersionHeader << "\n";
  for (size_t i = 0; i < inst.circuits.size(); ++i) {
    os << "circuit " << i << "\n";
    os << circuit_header_line(inst.circuits[i], false, false) << "\n";
    print_circuit_body(os, inst.circuits[i]);
    os << "end\n";
  }
  return os.str();
}

EsoInstance parse_eso(const std::string& text) {
  auto lines = split_lines(text);
  check_version_header(lines);
  if (lines.size() < 2 || strip(lines[1]).rfind("domain:", 0) != 0)
    fail(Err::SyntaxError, "expected 'domain: ...' on line 2");
  EsoInstance inst;
  inst.structure.domain = split_ws(strip(lines[1]).substr(7));
  size_t i = 2;
  while (i < lines.size()) {
    std::string line = strip(lines[i]);
    int lineno = static_cast<int>(i + 1);
    if (line.empty()) {
      ++i;
      continue;
    }
    if (line.rfind("sentence:", 0) == 0) {
      std::string rest = line.substr(9) + "\n" + join_from(lines, i + 1);
      SexpReader r(rest, lineno);
      inst.sentence = eso_formula_from(r.read());
      if (!r.at_end()) fail(Err::SyntaxError, "trailing input after sentence");
      validate_structure(inst.structure);
      return inst;
    }
    auto toks = split_ws(line);
    bool is_rel = toks.size() == 2 && toks[0] == "rel";
    bool is_fun = toks.size() == 2 && toks[0] == "fun";
    if (!is_rel && !is_fun) syntax_error(lineno, 1, "expected 'rel NAME/ARITY', 'fun NAME/ARITY' or 'sentence:'");
    auto slash = toks[1].find('/');
    if (slash == std::string::npos) syntax_error(lineno, 1, "expected NAME/ARITY");
    std::string name = toks[1].substr(0, slash);
    int arity = static_cast<int>(parse_long(toks[1].substr(slash + 1), lineno, "arity"));
    ++i;
    if (is_rel) {
      RelationTable rel;
      rel.arity = arity;
      for (; i < lines.size() && strip(lines[i]) != "end"; ++i) {
        std::string row = strip(lines[i]);
        if (row.empty()) continue;
        std::vector<int> tup;
        for (const auto& t : split_ws(row)) {
          int p = inst.structure.atom_position(t);
          if (p < 0) syntax_error(static_cast<int>(i + 1), 1, "unknown domain atom '" + t + "'");
          tup.push_back(p);
        }
        rel.tuples.insert(std::move(tup));
      }
      if (i >= lines.size()) syntax_error(lineno, 1, "missing 'end' after relation rows");
      ++i;
      inst.structure.relations[name] = std::move(rel);
    } else {
      FunctionTable fn;
      fn.arity = arity;
      for (; i < lines.size() && strip(lines[i]) != "end"; ++i) {
        std::string row = strip(lines[i]);
        if (row.empty()) continue;
        std::vector<std::string> toks2;
        std::string value;
        if (!parse_table_row(row, &toks2, &value))
          syntax_error(static_cast<int>(i + 1), 1, "expected 'a1 ... ak : value'");
        std::vector<int> tup;
        for (const auto& t : toks2) {
          int p = inst.structure.atom_position(t);
          if (p < 0) syntax_error(static_cast<int>(i + 1), 1, "unknown domain atom '" + t + "'");
          tup.push_back(p);
        }
        fn.values[std::move(tup)] = Rational::from_string(value);
      }
      if (i >= lines.size()) syntax_error(lineno, 1, "missing 'end' after function rows");
      ++i;
      inst.structure.functions[name] = std::move(fn);
    }
  }
  fail(Err::SyntaxError, "missing 'sentence:' section");
}

std::string print_eso(const EsoInstance& inst) {
  std::ostringstream os;
  os << kVersionHeader << "\n";
  os << "domain:";
  for (const auto& a : inst.structure.domain) os << " " << a;
  os << "\n";
  for (const auto& [name, rel] : inst.structure.relations) {
    os << "rel " << name << "/" << rel.arity << "\n";
    for (const auto& tup : rel.tuples) {
      for (size_t k = 0; k < tup.size(); ++k) os << (k ? " " : "") << inst.structure.domain[tup[k]];
      os << "\n";
    }
    os << "end\n";
  }
  for (const auto& [name, fn] : inst.structure.functions) {
    os << "fun " << name << "/" << fn.arity << "\n";
    for (const auto& [tup, val] : fn.values) {
      for (int v : tup) os << inst.structure.domain[v] << " ";
      os << ": " << val << "\n";
    }
    os << "end\n";
  }
  os << "sentence: ";
  print_eso_formula_rec(os, inst.sentence);
  os << "\n";
  return os.str();
}

Witness parse_witness(const std::string& text) {
  auto lines = split_lines(text);
  check_version_header(lines);
  if (lines.size() < 2 || strip(lines[1]).rfind("witness:", 0) != 0)
    fail(Err::SyntaxError, "expected 'witness: <kind>' on line 2");
  std::string kind = strip(strip(lines[1]).substr(8));
  Witness w;
  size_t i = 2;
  if (i < lines.size() && strip(lines[i]).rfind("provenance:", 0) == 0) {
    w.provenance = strip(strip(lines[i]).substr(11));
    ++i;
  }
  if (kind == "assignment") {
    w.kind = WitnessKind::AssignmentW;
    for (; i < lines.size(); ++i) {
      std::string line = strip(lines[i]);
      if (line.empty()) continue;
      std::vector<std::string> toks;
      std::string value;
      if (!parse_table_row(line, &toks, &value) || toks.size() != 1)
        syntax_error(static_cast<int>(i + 1), 1, "expected 'name : value'");
      w.assignment[toks[0]] = Rational::from_string(value);
    }
    return w;
  }
  if (kind == "distribution") {
    w.kind = WitnessKind::DistributionW;
    parse_distribution_body(lines, i, &w.distribution);
    validate_distribution(w.distribution);
    return w;
  }
  if (kind == "eso-tables") {
    w.kind = WitnessKind::EsoTablesW;
    while (i < lines.size()) {
      std::string line = strip(lines[i]);
      if (line.empty()) {
        ++i;
        continue;
      }
      int lineno = static_cast<int>(i + 1);
      auto toks = split_ws(line);
      if (toks.size() != 2 || toks[0] != "table") syntax_error(lineno, 1, "expected 'table NAME/ARITY'");
      auto slash = toks[1].find('/');
      if (slash == std::string::npos) syntax_error(lineno, 1, "expected NAME/ARITY");
      std::string name = toks[1].substr(0, slash);
      EsoTables::Table table;
      table.arity = static_cast<int>(parse_long(toks[1].substr(slash + 1), lineno, "arity"));
      ++i;
      for (; i < lines.size() && strip(lines[i]) != "end"; ++i) {
        std::string row = strip(lines[i]);
        if (row.empty()) continue;
        std::vector<std::string> tup;
        std::string value;
        if (!parse_table_row(row, &tup, &value))
          syntax_error(static_cast<int>(i + 1), 1, "expected 'a1 ... ak : value'");
        table.entries[std::move(tup)] = Rational::from_string(value);
      }
      if (i >= lines.size()) syntax_error(lineno, 1, "missing 'end' after table rows");
      ++i;
      w.tables.tables[name] = std::move(table);
    }
    return w;
  }
  fail(Err::SyntaxError, "unknown witness kind '" + kind + "'");
}

std::string print_witness(const Witness& w) {
  std::ostringstream os;
  os << kVersionHeader << "\n";
  os << "witness: " << witness_kind_name(w.kind) << "\n";
  if (!w.provenance.empty()) os << "provenance: " << w.provenance << "\n";
  switch (w.kind) {
    case WitnessKind::AssignmentW:
      for (const auto& [name, value] : w.assignment) os << name << " : " << value << "\n";
      break;
    case WitnessKind::DistributionW:
      print_distribution_body(os, w.distribution);
      break;
    case WitnessKind::EsoTablesW:
      for (const auto& [name, table] : w.tables.tables) {
        os << "table " << name << "/" << table.arity << "\n";
        for (const auto& [tup, val] : table.entries) {
          for (const auto& a : tup) os << a << " ";
          os << ": " << val << "\n";
        }
        os << "end\n";
      }
      break;
  }
  return os.str();
}

EmajsatInstance parse_emajsat(const std::string& text) {
  auto lines = split_lines(text);
  check_version_header(lines);
  if (lines.size() < 3 || strip(lines[1]).rfind("xvars:", 0) != 0 ||
      strip(lines[2]).rfind("yvars:", 0) != 0)
    fail(Err::SyntaxError, "expected 'xvars: ...' and 'yvars: ...' lines");
  EmajsatInstance inst;
  inst.xvars = split_ws(strip(lines[1]).substr(6));
  inst.yvars = split_ws(strip(lines[2]).substr(6));
  SexpReader r(join_from(lines, 3), 4);
  inst.matrix = formula_from(r.read());
  if (!r.at_end()) fail(Err::SyntaxError, "trailing input after formula");
  return inst;
}

std::string print_emajsat(const EmajsatInstance& inst) {
  std::ostringstream os;
  os << kVersionHeader << "\n";
  os << "xvars:";
  for (const auto& v : inst.xvars) os << " " << v;
  os << "\n";
  os << "yvars:";
  for (const auto& v : inst.yvars) os << " " << v;
  os << "\n";
  print_formula_rec(os, inst.matrix);
  os << "\n";
  return os.str();
}

}  // namespace etrforge::textio
