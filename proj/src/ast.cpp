#include "ctxeq/ast.hpp"

#include <sstream>

namespace ctxeq {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

// --- types -----------------------------------------------------------------

TypePtr ty_base(BaseTy b) {
  static TypePtr cache[3] = {
      std::make_shared<Type>(Type{Type::Base{BaseTy::Bool}}),
      std::make_shared<Type>(Type{Type::Base{BaseTy::Int}}),
      std::make_shared<Type>(Type{Type::Base{BaseTy::Unit}}),
  };
  switch (b) {
    case BaseTy::Bool: return cache[0];
    case BaseTy::Int: return cache[1];
    default: return cache[2];
  }
}
TypePtr ty_bool() { return ty_base(BaseTy::Bool); }
TypePtr ty_int() { return ty_base(BaseTy::Int); }
TypePtr ty_unit() { return ty_base(BaseTy::Unit); }

TypePtr ty_arrow(TypePtr dom, TypePtr cod) {
  return std::make_shared<Type>(Type{Type::Arrow{std::move(dom), std::move(cod)}});
}

TypePtr ty_product(std::vector<TypePtr> components) {
  if (components.size() < 2) internal_error("product type needs >= 2 components");
  return std::make_shared<Type>(Type{Type::Product{std::move(components)}});
}

bool type_equal(const TypePtr& a, const TypePtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  return std::visit(
      overloaded{
          [&](const Type::Base& x) {
            auto* y = std::get_if<Type::Base>(&b->node);
            return y && x.b == y->b;
          },
          [&](const Type::Arrow& x) {
            auto* y = std::get_if<Type::Arrow>(&b->node);
            return y && type_equal(x.dom, y->dom) && type_equal(x.cod, y->cod);
          },
          [&](const Type::Product& x) {
            auto* y = std::get_if<Type::Product>(&b->node);
            if (!y || x.components.size() != y->components.size()) return false;
            for (size_t i = 0; i < x.components.size(); ++i)
              if (!type_equal(x.components[i], y->components[i])) return false;
            return true;
          },
      },
      a->node);
}

bool is_base_type(const TypePtr& t) { return std::holds_alternative<Type::Base>(t->node); }
bool is_arrow_type(const TypePtr& t) { return std::holds_alternative<Type::Arrow>(t->node); }

std::string type_to_string(const TypePtr& t) {
  return std::visit(
      overloaded{
          [&](const Type::Base& x) -> std::string {
            switch (x.b) {
              case BaseTy::Bool: return "bool";
              case BaseTy::Int: return "int";
              default: return "unit";
            }
          },
          [&](const Type::Arrow& x) {
            std::string dom = type_to_string(x.dom);
            if (is_arrow_type(x.dom)) dom = "(" + dom + ")";
            return dom + " -> " + type_to_string(x.cod);
          },
          [&](const Type::Product& x) {
            std::string s;
            for (size_t i = 0; i < x.components.size(); ++i) {
              if (i) s += " * ";
              std::string c = type_to_string(x.components[i]);
              if (!std::holds_alternative<Type::Base>(x.components[i]->node)) c = "(" + c + ")";
              s += c;
            }
            return s;
          },
      },
      t->node);
}

// --- constants ---------------------------------------------------------------

bool Constant::operator==(const Constant& o) const {
  if (v.index() != o.v.index()) return false;
  if (is_unit()) return true;
  if (is_bool()) return as_bool() == o.as_bool();
  return as_int() == o.as_int();
}

Constant const_unit() { return Constant{std::monostate{}}; }
Constant const_bool(bool b) { return Constant{b}; }
Constant const_int(BigInt n) { return Constant{std::move(n)}; }

const char* arith_op_name(ArithOp op) {
  switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
    case ArithOp::Div: return "/";
    case ArithOp::Mod: return "mod";
    case ArithOp::Eq: return "=";
    case ArithOp::Ne: return "<>";
    case ArithOp::Lt: return "<";
    case ArithOp::Le: return "<=";
    case ArithOp::Gt: return ">";
    case ArithOp::Ge: return ">=";
    case ArithOp::And: return "&&";
    case ArithOp::Or: return "||";
    case ArithOp::Not: return "not";
  }
  return "?";
}

bool op_is_comparison(ArithOp op) {
  switch (op) {
    case ArithOp::Eq:
    case ArithOp::Ne:
    case ArithOp::Lt:
    case ArithOp::Le:
    case ArithOp::Gt:
    case ArithOp::Ge: return true;
    default: return false;
  }
}

// --- constructors ------------------------------------------------------------

ExprPtr mk_const(Constant c, Span sp) { return std::make_shared<Expr>(Expr{Expr::Const{std::move(c)}, sp}); }
ExprPtr mk_int(int64_t v) { return mk_const(const_int(BigInt(v))); }
ExprPtr mk_bool(bool b) { return mk_const(const_bool(b)); }
ExprPtr mk_unit() { return mk_const(const_unit()); }
ExprPtr mk_var(std::string name, Span sp) { return std::make_shared<Expr>(Expr{Expr::Var{std::move(name)}, sp}); }
ExprPtr mk_lambda(std::optional<std::string> self, std::string param, AnnotPtr annot, ExprPtr body, Span sp) {
  return std::make_shared<Expr>(Expr{Expr::Lambda{std::move(self), std::move(param), std::move(annot), std::move(body)}, sp});
}
ExprPtr mk_tuple(std::vector<ExprPtr> elems, Span sp) {
  return std::make_shared<Expr>(Expr{Expr::Tuple{std::move(elems)}, sp});
}
ExprPtr mk_arith(ArithOp op, std::vector<ExprPtr> args, Span sp) {
  return std::make_shared<Expr>(Expr{Expr::Arith{op, std::move(args)}, sp});
}
ExprPtr mk_app(ExprPtr fn, ExprPtr arg, Span sp) {
  return std::make_shared<Expr>(Expr{Expr::App{std::move(fn), std::move(arg)}, sp});
}
ExprPtr mk_cond(ExprPtr g, ExprPtr t, ExprPtr e, Span sp) {
  return std::make_shared<Expr>(Expr{Expr::Cond{std::move(g), std::move(t), std::move(e)}, sp});
}
ExprPtr mk_newref(LocId loc, ExprPtr init, ExprPtr body, Span sp) {
  return std::make_shared<Expr>(Expr{Expr::NewRef{loc, std::move(init), std::move(body)}, sp});
}
ExprPtr mk_deref(LocId loc, Span sp) { return std::make_shared<Expr>(Expr{Expr::Deref{loc}, sp}); }
ExprPtr mk_assign(LocId loc, ExprPtr rhs, Span sp) {
  return std::make_shared<Expr>(Expr{Expr::Assign{loc, std::move(rhs)}, sp});
}
ExprPtr mk_lettuple(std::vector<std::string> binders, ExprPtr rhs, ExprPtr body, Span sp) {
  return std::make_shared<Expr>(Expr{Expr::LetTuple{std::move(binders), std::move(rhs), std::move(body)}, sp});
}
ExprPtr mk_absname(AlphaId id, TypePtr ty) {
  return std::make_shared<Expr>(Expr{Expr::AbsName{id, std::move(ty)}, Span{}});
}
ExprPtr mk_symconst(KappaId id, BaseTy ty) {
  return std::make_shared<Expr>(Expr{Expr::SymConst{id, ty}, Span{}});
}
ExprPtr mk_bot(Span sp) { return std::make_shared<Expr>(Expr{Expr::Bot{}, sp}); }

// --- value classification ----------------------------------------------------

bool is_value(const ExprPtr& e) {
  return std::visit(
      overloaded{
          [](const Expr::Const&) { return true; },
          [](const Expr::Lambda&) { return true; },
          [&](const Expr::Tuple& t) {
            for (auto& el : t.elems)
              if (!is_value(el)) return false;
            return true;
          },
          [](const Expr::AbsName&) { return true; },
          [](const Expr::SymConst&) { return true; },
          [](const auto&) { return false; },
      },
      e->node);
}

// --- substitution --------------------------------------------------------------

ExprPtr subst(const ExprPtr& e, const std::string& x, const ExprPtr& v) {
  return std::visit(
      overloaded{
          [&](const Expr::Const&) { return e; },
          [&](const Expr::Var& n) { return n.name == x ? v : e; },
          [&](const Expr::Lambda& l) {
            // v is closed, so no capture can occur; only shadowing matters.
            if (l.param == x || (l.self && *l.self == x)) return e;
            ExprPtr b = subst(l.body, x, v);
            if (b == l.body) return e;
            return mk_lambda(l.self, l.param, l.annot, b, e->span);
          },
          [&](const Expr::Tuple& t) {
            std::vector<ExprPtr> elems;
            bool changed = false;
            for (auto& el : t.elems) {
              elems.push_back(subst(el, x, v));
              changed |= elems.back() != el;
            }
            return changed ? mk_tuple(std::move(elems), e->span) : e;
          },
          [&](const Expr::Arith& a) {
            std::vector<ExprPtr> args;
            bool changed = false;
            for (auto& ar : a.args) {
              args.push_back(subst(ar, x, v));
              changed |= args.back() != ar;
            }
            return changed ? mk_arith(a.op, std::move(args), e->span) : e;
          },
          [&](const Expr::App& a) {
            ExprPtr f = subst(a.fn, x, v), g = subst(a.arg, x, v);
            if (f == a.fn && g == a.arg) return e;
            return mk_app(f, g, e->span);
          },
          [&](const Expr::Cond& c) {
            ExprPtr g = subst(c.guard, x, v), t = subst(c.then_e, x, v), el = subst(c.else_e, x, v);
            if (g == c.guard && t == c.then_e && el == c.else_e) return e;
            return mk_cond(g, t, el, e->span);
          },
          [&](const Expr::NewRef& n) {
            ExprPtr i = subst(n.init, x, v), b = subst(n.body, x, v);
            if (i == n.init && b == n.body) return e;
            return mk_newref(n.loc, i, b, e->span);
          },
          [&](const Expr::Deref&) { return e; },
          [&](const Expr::Assign& a) {
            ExprPtr r = subst(a.rhs, x, v);
            if (r == a.rhs) return e;
            return mk_assign(a.loc, r, e->span);
          },
          [&](const Expr::LetTuple& l) {
            ExprPtr r = subst(l.rhs, x, v);
            bool shadowed = false;
            for (auto& b : l.binders) shadowed |= b == x;
            ExprPtr b = shadowed ? l.body : subst(l.body, x, v);
            if (r == l.rhs && b == l.body) return e;
            return mk_lettuple(l.binders, r, b, e->span);
          },
          [&](const Expr::AbsName&) { return e; },
          [&](const Expr::SymConst&) { return e; },
          [&](const Expr::Bot&) { return e; },
      },
      e->node);
}

ExprPtr subst_loc(const ExprPtr& e, LocId from, LocId to) {
  auto fix_annot = [&](const AnnotPtr& a) -> AnnotPtr {
    if (!a) return a;
    bool touched = false;
    for (auto& [loc, pat] : a->loc_patterns) touched |= loc == from;
    if (!touched) return a;
    auto na = std::make_shared<Annot>(*a);
    for (auto& lp : na->loc_patterns)
      if (lp.first == from) lp.first = to;
    return na;
  };
  return std::visit(
      overloaded{
          [&](const Expr::Const&) { return e; },
          [&](const Expr::Var&) { return e; },
          [&](const Expr::Lambda& l) {
            ExprPtr b = subst_loc(l.body, from, to);
            AnnotPtr a = fix_annot(l.annot);
            if (b == l.body && a == l.annot) return e;
            return mk_lambda(l.self, l.param, a, b, e->span);
          },
          [&](const Expr::Tuple& t) {
            std::vector<ExprPtr> elems;
            bool changed = false;
            for (auto& el : t.elems) {
              elems.push_back(subst_loc(el, from, to));
              changed |= elems.back() != el;
            }
            return changed ? mk_tuple(std::move(elems), e->span) : e;
          },
          [&](const Expr::Arith& a) {
            std::vector<ExprPtr> args;
            bool changed = false;
            for (auto& ar : a.args) {
              args.push_back(subst_loc(ar, from, to));
              changed |= args.back() != ar;
            }
            return changed ? mk_arith(a.op, std::move(args), e->span) : e;
          },
          [&](const Expr::App& a) {
            ExprPtr f = subst_loc(a.fn, from, to), g = subst_loc(a.arg, from, to);
            if (f == a.fn && g == a.arg) return e;
            return mk_app(f, g, e->span);
          },
          [&](const Expr::Cond& c) {
            ExprPtr g = subst_loc(c.guard, from, to), t = subst_loc(c.then_e, from, to),
                    el = subst_loc(c.else_e, from, to);
            if (g == c.guard && t == c.then_e && el == c.else_e) return e;
            return mk_cond(g, t, el, e->span);
          },
          [&](const Expr::NewRef& n) {
            // Bound locations are globally distinct (Barendregt), so an inner
            // NewRef can never rebind `from`.
            ExprPtr i = subst_loc(n.init, from, to), b = subst_loc(n.body, from, to);
            if (i == n.init && b == n.body) return e;
            return mk_newref(n.loc, i, b, e->span);
          },
          [&](const Expr::Deref& d) { return d.loc == from ? mk_deref(to, e->span) : e; },
          [&](const Expr::Assign& a) {
            ExprPtr r = subst_loc(a.rhs, from, to);
            if (a.loc != from && r == a.rhs) return e;
            return mk_assign(a.loc == from ? to : a.loc, r, e->span);
          },
          [&](const Expr::LetTuple& l) {
            ExprPtr r = subst_loc(l.rhs, from, to), b = subst_loc(l.body, from, to);
            if (r == l.rhs && b == l.body) return e;
            return mk_lettuple(l.binders, r, b, e->span);
          },
          [&](const Expr::AbsName&) { return e; },
          [&](const Expr::SymConst&) { return e; },
          [&](const Expr::Bot&) { return e; },
      },
      e->node);
}

// --- syntactic collections -----------------------------------------------------

namespace {
void walk(const ExprPtr& e, const std::function<void(const Expr&)>& f) {
  f(*e);
  std::visit(
      overloaded{
          [&](const Expr::Lambda& l) { walk(l.body, f); },
          [&](const Expr::Tuple& t) {
            for (auto& el : t.elems) walk(el, f);
          },
          [&](const Expr::Arith& a) {
            for (auto& ar : a.args) walk(ar, f);
          },
          [&](const Expr::App& a) {
            walk(a.fn, f);
            walk(a.arg, f);
          },
          [&](const Expr::Cond& c) {
            walk(c.guard, f);
            walk(c.then_e, f);
            walk(c.else_e, f);
          },
          [&](const Expr::NewRef& n) {
            walk(n.init, f);
            walk(n.body, f);
          },
          [&](const Expr::Assign& a) { walk(a.rhs, f); },
          [&](const Expr::LetTuple& l) {
            walk(l.rhs, f);
            walk(l.body, f);
          },
          [&](const auto&) {},
      },
      e->node);
}
}  // namespace

void collect_free_locations(const ExprPtr& e, std::set<LocId>& out) {
  // NewRef-bound locations are globally unique ids, so every mention is free
  // except the binder's own occurrences; we collect mentions and drop binders.
  std::set<LocId> bound;
  walk(e, [&](const Expr& n) {
    if (auto* d = std::get_if<Expr::Deref>(&n.node)) out.insert(d->loc);
    if (auto* a = std::get_if<Expr::Assign>(&n.node)) out.insert(a->loc);
    if (auto* r = std::get_if<Expr::NewRef>(&n.node)) bound.insert(r->loc);
    if (auto* l = std::get_if<Expr::Lambda>(&n.node); l && l->annot)
      for (auto& [loc, pat] : l->annot->loc_patterns) out.insert(loc);
  });
  for (LocId b : bound) out.erase(b);
}

std::set<LocId> free_locations(const ExprPtr& e) {
  std::set<LocId> out;
  collect_free_locations(e, out);
  return out;
}

LocId max_static_loc(const ExprPtr& e) {
  LocId m = 0;
  walk(e, [&](const Expr& n) {
    if (auto* r = std::get_if<Expr::NewRef>(&n.node)) m = std::max(m, r->loc);
    if (auto* d = std::get_if<Expr::Deref>(&n.node)) m = std::max(m, d->loc);
    if (auto* a = std::get_if<Expr::Assign>(&n.node)) m = std::max(m, a->loc);
    if (auto* l = std::get_if<Expr::Lambda>(&n.node); l && l->annot)
      for (auto& [loc, pat] : l->annot->loc_patterns) m = std::max(m, loc);
  });
  return m;
}

void collect_abstract_names(const ExprPtr& e, std::set<AlphaId>& out) {
  walk(e, [&](const Expr& n) {
    if (auto* a = std::get_if<Expr::AbsName>(&n.node)) out.insert(a->id);
  });
}

std::set<AlphaId> abstract_names(const ExprPtr& e) {
  std::set<AlphaId> out;
  collect_abstract_names(e, out);
  return out;
}

void collect_sym_consts(const ExprPtr& e, std::set<KappaId>& out) {
  walk(e, [&](const Expr& n) {
    if (auto* k = std::get_if<Expr::SymConst>(&n.node)) out.insert(k->id);
  });
}

std::set<KappaId> sym_consts(const ExprPtr& e) {
  std::set<KappaId> out;
  collect_sym_consts(e, out);
  return out;
}

namespace {
void free_vars_rec(const ExprPtr& e, std::set<std::string>& bound, std::set<std::string>& out) {
  std::visit(
      overloaded{
          [&](const Expr::Var& v) {
            if (!bound.count(v.name)) out.insert(v.name);
          },
          [&](const Expr::Lambda& l) {
            std::set<std::string> b2 = bound;
            b2.insert(l.param);
            if (l.self) b2.insert(*l.self);
            free_vars_rec(l.body, b2, out);
          },
          [&](const Expr::Tuple& t) {
            for (auto& el : t.elems) free_vars_rec(el, bound, out);
          },
          [&](const Expr::Arith& a) {
            for (auto& ar : a.args) free_vars_rec(ar, bound, out);
          },
          [&](const Expr::App& a) {
            free_vars_rec(a.fn, bound, out);
            free_vars_rec(a.arg, bound, out);
          },
          [&](const Expr::Cond& c) {
            free_vars_rec(c.guard, bound, out);
            free_vars_rec(c.then_e, bound, out);
            free_vars_rec(c.else_e, bound, out);
          },
          [&](const Expr::NewRef& n) {
            free_vars_rec(n.init, bound, out);
            free_vars_rec(n.body, bound, out);
          },
          [&](const Expr::Assign& a) { free_vars_rec(a.rhs, bound, out); },
          [&](const Expr::LetTuple& l) {
            free_vars_rec(l.rhs, bound, out);
            std::set<std::string> b2 = bound;
            for (auto& b : l.binders) b2.insert(b);
            free_vars_rec(l.body, b2, out);
          },
          [&](const auto&) {},
      },
      e->node);
}
}  // namespace

std::set<std::string> free_vars(const ExprPtr& e) {
  std::set<std::string> bound, out;
  free_vars_rec(e, bound, out);
  return out;
}

// --- structural equality ---------------------------------------------------------

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      overloaded{
          [&](const Expr::Const& x) { return x.c == std::get<Expr::Const>(b->node).c; },
          [&](const Expr::Var& x) { return x.name == std::get<Expr::Var>(b->node).name; },
          [&](const Expr::Lambda& x) {
            auto& y = std::get<Expr::Lambda>(b->node);
            if (x.self != y.self || x.param != y.param) return false;
            if (!!x.annot != !!y.annot) return false;
            if (x.annot) {
              if (x.annot->sym_names != y.annot->sym_names) return false;
              if (x.annot->loc_patterns.size() != y.annot->loc_patterns.size()) return false;
              for (size_t i = 0; i < x.annot->loc_patterns.size(); ++i) {
                if (x.annot->loc_patterns[i].first != y.annot->loc_patterns[i].first) return false;
                if (!expr_equal(x.annot->loc_patterns[i].second, y.annot->loc_patterns[i].second))
                  return false;
              }
              if (!expr_equal(x.annot->formula, y.annot->formula)) return false;
            }
            return expr_equal(x.body, y.body);
          },
          [&](const Expr::Tuple& x) {
            auto& y = std::get<Expr::Tuple>(b->node);
            if (x.elems.size() != y.elems.size()) return false;
            for (size_t i = 0; i < x.elems.size(); ++i)
              if (!expr_equal(x.elems[i], y.elems[i])) return false;
            return true;
          },
          [&](const Expr::Arith& x) {
            auto& y = std::get<Expr::Arith>(b->node);
            if (x.op != y.op || x.args.size() != y.args.size()) return false;
            for (size_t i = 0; i < x.args.size(); ++i)
              if (!expr_equal(x.args[i], y.args[i])) return false;
            return true;
          },
          [&](const Expr::App& x) {
            auto& y = std::get<Expr::App>(b->node);
            return expr_equal(x.fn, y.fn) && expr_equal(x.arg, y.arg);
          },
          [&](const Expr::Cond& x) {
            auto& y = std::get<Expr::Cond>(b->node);
            return expr_equal(x.guard, y.guard) && expr_equal(x.then_e, y.then_e) &&
                   expr_equal(x.else_e, y.else_e);
          },
          [&](const Expr::NewRef& x) {
            auto& y = std::get<Expr::NewRef>(b->node);
            return x.loc == y.loc && expr_equal(x.init, y.init) && expr_equal(x.body, y.body);
          },
          [&](const Expr::Deref& x) { return x.loc == std::get<Expr::Deref>(b->node).loc; },
          [&](const Expr::Assign& x) {
            auto& y = std::get<Expr::Assign>(b->node);
            return x.loc == y.loc && expr_equal(x.rhs, y.rhs);
          },
          [&](const Expr::LetTuple& x) {
            auto& y = std::get<Expr::LetTuple>(b->node);
            return x.binders == y.binders && expr_equal(x.rhs, y.rhs) && expr_equal(x.body, y.body);
          },
          [&](const Expr::AbsName& x) { return x.id == std::get<Expr::AbsName>(b->node).id; },
          [&](const Expr::SymConst& x) { return x.id == std::get<Expr::SymConst>(b->node).id; },
          [&](const Expr::Bot&) { return true; },
      },
      a->node);
}

// --- printing ---------------------------------------------------------------------

std::string constant_to_string(const Constant& c) {
  if (c.is_unit()) return "()";
  if (c.is_bool()) return c.as_bool() ? "true" : "false";
  return c.as_int().to_string();
}

namespace {
// Precedence levels for parenthesizing on output; mirrors the parser.
enum Prec { P_SEQ = 0, P_ASSIGN, P_OR, P_AND, P_CMP, P_ADD, P_MUL, P_APP, P_ATOM };

int op_prec(ArithOp op) {
  switch (op) {
    case ArithOp::Or: return P_OR;
    case ArithOp::And: return P_AND;
    case ArithOp::Add:
    case ArithOp::Sub: return P_ADD;
    case ArithOp::Mul:
    case ArithOp::Div:
    case ArithOp::Mod: return P_MUL;
    case ArithOp::Not: return P_APP;
    default: return P_CMP;
  }
}

std::string loc_name(LocId l) { return "l#" + std::to_string(l); }

void pp(const ExprPtr& e, int prec, std::string& out);

void pp_paren(const ExprPtr& e, int prec, int min_prec, std::string& out) {
  if (prec < min_prec) {
    out += "(";
    pp(e, P_SEQ, out);
    out += ")";
  } else {
    pp(e, min_prec, out);
  }
}

std::string annot_to_string(const Annot& a) {
  std::string s = "{";
  for (size_t i = 0; i < a.sym_names.size(); ++i) {
    if (i) s += ", ";
    s += a.sym_names[i];
  }
  if (!a.sym_names.empty() || !a.loc_patterns.empty()) {
    s += " | ";
    for (size_t i = 0; i < a.loc_patterns.size(); ++i) {
      if (i) s += ", ";
      s += loc_name(a.loc_patterns[i].first) + " as " + expr_to_string(a.loc_patterns[i].second);
    }
    s += " | " + expr_to_string(a.formula);
  }
  s += "}";
  return s;
}

void pp(const ExprPtr& e, int min_prec, std::string& out) {
  std::visit(
      overloaded{
          [&](const Expr::Const& c) { out += constant_to_string(c.c); },
          [&](const Expr::Var& v) { out += v.name; },
          [&](const Expr::Lambda& l) {
            std::string s = "fun";
            if (l.self) s = "fix " + *l.self + " .. fun";  // display only; parser uses let rec
            s += " " + l.param;
            if (l.annot) s += " " + annot_to_string(*l.annot);
            s += " -> ";
            out += min_prec > P_SEQ ? "(" : "";
            out += s;
            pp(l.body, P_SEQ, out);
            out += min_prec > P_SEQ ? ")" : "";
          },
          [&](const Expr::Tuple& t) {
            out += "(";
            for (size_t i = 0; i < t.elems.size(); ++i) {
              if (i) out += ", ";
              pp(t.elems[i], P_SEQ, out);
            }
            out += ")";
          },
          [&](const Expr::Arith& a) {
            if (a.op == ArithOp::Not) {
              out += min_prec > P_APP ? "(" : "";
              out += "not ";
              pp_paren(a.args[0], P_ATOM, P_ATOM, out);
              out += min_prec > P_APP ? ")" : "";
              return;
            }
            int p = op_prec(a.op);
            if (min_prec > p) out += "(";
            pp(a.args[0], p + 1, out);
            out += std::string(" ") + arith_op_name(a.op) + " ";
            pp(a.args[1], p + 1, out);
            if (min_prec > p) out += ")";
          },
          [&](const Expr::App& a) {
            if (min_prec > P_APP) out += "(";
            pp(a.fn, P_APP, out);
            out += " ";
            pp(a.arg, P_ATOM, out);
            if (min_prec > P_APP) out += ")";
          },
          [&](const Expr::Cond& c) {
            if (min_prec > P_SEQ) out += "(";
            out += "if ";
            pp(c.guard, P_ASSIGN, out);
            out += " then ";
            pp(c.then_e, P_ASSIGN, out);
            out += " else ";
            pp(c.else_e, P_ASSIGN, out);
            if (min_prec > P_SEQ) out += ")";
          },
          [&](const Expr::NewRef& n) {
            if (min_prec > P_SEQ) out += "(";
            out += "ref " + loc_name(n.loc) + " = ";
            pp(n.init, P_ASSIGN, out);
            out += " in ";
            pp(n.body, P_SEQ, out);
            if (min_prec > P_SEQ) out += ")";
          },
          [&](const Expr::Deref& d) { out += "!" + loc_name(d.loc); },
          [&](const Expr::Assign& a) {
            if (min_prec > P_ASSIGN) out += "(";
            out += loc_name(a.loc) + " := ";
            pp(a.rhs, P_ASSIGN, out);
            if (min_prec > P_ASSIGN) out += ")";
          },
          [&](const Expr::LetTuple& l) {
            if (min_prec > P_SEQ) out += "(";
            out += "let ";
            if (l.binders.size() == 1) {
              out += l.binders[0];
            } else {
              out += "(";
              for (size_t i = 0; i < l.binders.size(); ++i) {
                if (i) out += ", ";
                out += l.binders[i];
              }
              out += ")";
            }
            out += " = ";
            pp(l.rhs, P_ASSIGN, out);
            out += " in ";
            pp(l.body, P_SEQ, out);
            if (min_prec > P_SEQ) out += ")";
          },
          [&](const Expr::AbsName& a) { out += "α" + std::to_string(a.id); },
          [&](const Expr::SymConst& k) { out += "_k#" + std::to_string(k.id); },
          [&](const Expr::Bot&) { out += "_bot_"; },
      },
      e->node);
}
}  // namespace

std::string expr_to_string(const ExprPtr& e) {
  std::string out;
  pp(e, P_SEQ, out);
  return out;
}

void parse_error(Span sp, const std::string& msg) {
  std::ostringstream os;
  os << "parse error at " << sp.line << ":" << sp.col << ": " << msg;
  throw CtxeqError(CtxeqError::Kind::Parse, sp, os.str());
}

void type_error(Span sp, const std::string& msg) {
  std::ostringstream os;
  os << "type error";
  if (sp.line) os << " at " << sp.line << ":" << sp.col;
  os << ": " << msg;
  throw CtxeqError(CtxeqError::Kind::Type, sp, os.str());
}

void internal_error(const std::string& msg) {
  throw CtxeqError(CtxeqError::Kind::Internal, Span{}, "internal error: " + msg);
}

}  // namespace ctxeq
