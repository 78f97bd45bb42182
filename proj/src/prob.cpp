#include "etrforge/prob.hpp"

#include "etrforge/errors.hpp"

namespace etrforge {

EventPtr e_top() {
  EventFormula e;
  e.kind = EventKind::Top;
  return std::make_shared<const EventFormula>(std::move(e));
}

EventPtr e_eq(const std::string& var, EventValue value) {
  EventFormula e;
  e.kind = EventKind::AtomEq;
  e.var = var;
  e.value = std::move(value);
  return std::make_shared<const EventFormula>(std::move(e));
}

EventPtr e_eq(const std::string& var, long value) { return e_eq(var, EventValue(value)); }

EventPtr e_eq_dummy(const std::string& var, const std::string& dummy) {
  return e_eq(var, EventValue(dummy));
}

EventPtr e_not(EventPtr f) {
  EventFormula e;
  e.kind = EventKind::Not;
  e.f = std::move(f);
  return std::make_shared<const EventFormula>(std::move(e));
}

EventPtr e_and(EventPtr f, EventPtr g) {
  EventFormula e;
  e.kind = EventKind::And;
  e.f = std::move(f);
  e.g = std::move(g);
  return std::make_shared<const EventFormula>(std::move(e));
}

EventPtr e_and_all(const std::vector<EventPtr>& fs) {
  if (fs.empty()) fail(Err::IllFormed, "empty event conjunction");
  EventPtr acc = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) acc = e_and(acc, fs[i]);
  return acc;
}

bool event_equal(const EventPtr& a, const EventPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case EventKind::Top:
      return true;
    case EventKind::AtomEq:
      return a->var == b->var && a->value == b->value;
    case EventKind::Not:
      return event_equal(a->f, b->f);
    case EventKind::And:
      return event_equal(a->f, b->f) && event_equal(a->g, b->g);
  }
  return false;
}

ProbTermPtr p_prob(EventPtr event) {
  ProbTerm t;
  t.kind = ProbTermKind::Prob;
  t.event = std::move(event);
  return std::make_shared<const ProbTerm>(std::move(t));
}

ProbTermPtr p_add(ProbTermPtr a, ProbTermPtr b) {
  ProbTerm t;
  t.kind = ProbTermKind::Add;
  t.a = std::move(a);
  t.b = std::move(b);
  return std::make_shared<const ProbTerm>(std::move(t));
}

ProbTermPtr p_neg(ProbTermPtr a) {
  ProbTerm t;
  t.kind = ProbTermKind::Neg;
  t.a = std::move(a);
  return std::make_shared<const ProbTerm>(std::move(t));
}

ProbTermPtr p_sub(ProbTermPtr a, ProbTermPtr b) { return p_add(std::move(a), p_neg(std::move(b))); }

ProbTermPtr p_mul(ProbTermPtr a, ProbTermPtr b) {
  ProbTerm t;
  t.kind = ProbTermKind::Mul;
  t.a = std::move(a);
  t.b = std::move(b);
  return std::make_shared<const ProbTerm>(std::move(t));
}

ProbTermPtr p_sum(const std::string& binder, int domain, ProbTermPtr body) {
  if (domain < 2) fail(Err::IllFormed, "summation domain must be at least 2");
  ProbTerm t;
  t.kind = ProbTermKind::Sum;
  t.binder = binder;
  t.domain = domain;
  t.a = std::move(body);
  return std::make_shared<const ProbTerm>(std::move(t));
}

bool prob_term_equal(const ProbTermPtr& a, const ProbTermPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ProbTermKind::Prob:
      return event_equal(a->event, b->event);
    case ProbTermKind::Neg:
      return prob_term_equal(a->a, b->a);
    case ProbTermKind::Add:
    case ProbTermKind::Mul:
      return prob_term_equal(a->a, b->a) && prob_term_equal(a->b, b->b);
    case ProbTermKind::Sum:
      return a->binder == b->binder && a->domain == b->domain && prob_term_equal(a->a, b->a);
  }
  return false;
}

ProbFormulaPtr pf_atom(CmpOp op, ProbTermPtr lhs, ProbTermPtr rhs) {
  ProbFormula f;
  f.kind = ProbFormulaKind::Atom;
  f.op = op;
  f.lhs = std::move(lhs);
  f.rhs = std::move(rhs);
  return std::make_shared<const ProbFormula>(std::move(f));
}

ProbFormulaPtr pf_not(ProbFormulaPtr f) {
  ProbFormula r;
  r.kind = ProbFormulaKind::Not;
  r.f = std::move(f);
  return std::make_shared<const ProbFormula>(std::move(r));
}

ProbFormulaPtr pf_and(ProbFormulaPtr f, ProbFormulaPtr g) {
  ProbFormula r;
  r.kind = ProbFormulaKind::And;
  r.f = std::move(f);
  r.g = std::move(g);
  return std::make_shared<const ProbFormula>(std::move(r));
}

ProbFormulaPtr pf_or(ProbFormulaPtr f, ProbFormulaPtr g) {
  ProbFormula r;
  r.kind = ProbFormulaKind::Or;
  r.f = std::move(f);
  r.g = std::move(g);
  return std::make_shared<const ProbFormula>(std::move(r));
}

ProbFormulaPtr pf_and_all(const std::vector<ProbFormulaPtr>& fs) {
  if (fs.empty()) fail(Err::IllFormed, "empty conjunction");
  ProbFormulaPtr acc = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) acc = pf_and(acc, fs[i]);
  return acc;
}

bool prob_formula_equal(const ProbFormulaPtr& a, const ProbFormulaPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ProbFormulaKind::Atom:
      return a->op == b->op && prob_term_equal(a->lhs, b->lhs) && prob_term_equal(a->rhs, b->rhs);
    case ProbFormulaKind::Not:
      return prob_formula_equal(a->f, b->f);
    case ProbFormulaKind::And:
    case ProbFormulaKind::Or:
      return prob_formula_equal(a->f, b->f) && prob_formula_equal(a->g, b->g);
  }
  return false;
}

namespace {

EventPtr substitute_event(const EventPtr& e, const std::string& binder, long value) {
  switch (e->kind) {
    case EventKind::Top:
      return e;
    case EventKind::AtomEq: {
      if (const auto* dummy = std::get_if<std::string>(&e->value); dummy && *dummy == binder)
        return e_eq(e->var, value);
      return e;
    }
    case EventKind::Not: {
      EventPtr f = substitute_event(e->f, binder, value);
      return f == e->f ? e : e_not(std::move(f));
    }
    case EventKind::And: {
      EventPtr f = substitute_event(e->f, binder, value);
      EventPtr g = substitute_event(e->g, binder, value);
      if (f == e->f && g == e->g) return e;
      return e_and(std::move(f), std::move(g));
    }
  }
  return e;
}

}  // namespace

ProbTermPtr substitute_dummy(const ProbTermPtr& t, const std::string& binder, long value) {
  switch (t->kind) {
    case ProbTermKind::Prob: {
      EventPtr e = substitute_event(t->event, binder, value);
      return e == t->event ? t : p_prob(std::move(e));
    }
    case ProbTermKind::Neg: {
      ProbTermPtr a = substitute_dummy(t->a, binder, value);
      return a == t->a ? t : p_neg(std::move(a));
    }
    case ProbTermKind::Add:
    case ProbTermKind::Mul: {
      ProbTermPtr a = substitute_dummy(t->a, binder, value);
      ProbTermPtr b = substitute_dummy(t->b, binder, value);
      if (a == t->a && b == t->b) return t;
      return t->kind == ProbTermKind::Add ? p_add(std::move(a), std::move(b))
                                          : p_mul(std::move(a), std::move(b));
    }
    case ProbTermKind::Sum: {
      if (t->binder == binder) return t;  // shadowed
      ProbTermPtr a = substitute_dummy(t->a, binder, value);
      return a == t->a ? t : p_sum(t->binder, t->domain, std::move(a));
    }
  }
  return t;
}

void validate_distribution(const Distribution& d) {
  if (d.domain < 2) fail(Err::IllFormed, "distribution domain must be at least 2");
  Rational total(0);
  for (const auto& [tuple, mass] : d.entries) {
    if (tuple.size() != d.vars.size())
      fail(Err::IllFormed, "distribution tuple arity does not match the variable list");
    for (int v : tuple)
      if (v < 0 || v >= d.domain) fail(Err::IllFormed, "distribution tuple value out of domain");
    if (mass.sign() < 0) fail(Err::IllFormed, "negative probability mass");
    total += mass;
  }
  if (total != Rational(1))
    fail(Err::IllFormed, "probability masses sum to " + total.str() + ", expected 1");
}

long support_size(const Distribution& d) {
  long n = 0;
  for (const auto& [tuple, mass] : d.entries) {
    (void)tuple;
    if (mass.sign() > 0) ++n;
  }
  return n;
}

bool check_small_model(const Distribution& d, long p) { return support_size(d) <= p; }

}  // namespace etrforge
