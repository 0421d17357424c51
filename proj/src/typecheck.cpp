#include "ctxeq/typecheck.hpp"

#include <functional>

namespace ctxeq {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

// Inference types: a mutable union-find overlay on Type.
struct TypeChecker::ITy {
  enum class K { Var, Base, Arrow, Product } k;
  // Var
  ITyPtr link;  // union-find parent when bound
  int id = 0;
  // Base
  BaseTy base = BaseTy::Unit;
  // Arrow / Product
  std::vector<ITyPtr> args;
};

TypeChecker::ITyPtr TypeChecker::fresh_var() {
  auto v = std::make_shared<ITy>();
  v->k = ITy::K::Var;
  v->id = static_cast<int>(vars_.size());
  vars_.push_back(v);
  return v;
}

TypeChecker::ITyPtr TypeChecker::from_type(const TypePtr& t) {
  return std::visit(
      overloaded{
          [&](const Type::Base& b) {
            auto n = std::make_shared<ITy>();
            n->k = ITy::K::Base;
            n->base = b.b;
            return n;
          },
          [&](const Type::Arrow& a) {
            auto n = std::make_shared<ITy>();
            n->k = ITy::K::Arrow;
            n->args = {from_type(a.dom), from_type(a.cod)};
            return n;
          },
          [&](const Type::Product& p) {
            auto n = std::make_shared<ITy>();
            n->k = ITy::K::Product;
            for (auto& c : p.components) n->args.push_back(from_type(c));
            return n;
          },
      },
      t->node);
}

TypeChecker::ITyPtr TypeChecker::find(ITyPtr t) {
  while (t->k == ITy::K::Var && t->link) t = t->link;
  return t;
}

bool TypeChecker::occurs(const ITy* var, ITyPtr t) {
  t = find(t);
  if (t.get() == var) return true;
  for (auto& a : t->args)
    if (occurs(var, a)) return true;
  return false;
}

static std::string ity_str(const TypeChecker* self, const std::shared_ptr<TypeChecker::ITy>& t);

void TypeChecker::unify(ITyPtr a, ITyPtr b, Span sp) {
  a = find(a);
  b = find(b);
  if (a == b) return;
  if (a->k == ITy::K::Var) {
    if (occurs(a.get(), b)) type_error(sp, "cyclic type");
    a->link = b;
    return;
  }
  if (b->k == ITy::K::Var) {
    unify(b, a, sp);
    return;
  }
  if (a->k != b->k || (a->k == ITy::K::Base && a->base != b->base) ||
      a->args.size() != b->args.size()) {
    type_error(sp, "cannot unify " + ity_str(this, a) + " with " + ity_str(this, b));
  }
  for (size_t i = 0; i < a->args.size(); ++i) unify(a->args[i], b->args[i], sp);
}

static std::string ity_str(const TypeChecker*, const std::shared_ptr<TypeChecker::ITy>& t) {
  using ITy = TypeChecker::ITy;
  switch (t->k) {
    case ITy::K::Var: return "'t" + std::to_string(t->id);
    case ITy::K::Base:
      return t->base == BaseTy::Bool ? "bool" : t->base == BaseTy::Int ? "int" : "unit";
    case ITy::K::Arrow: return "(" + ity_str(nullptr, t->args[0]) + " -> " + ity_str(nullptr, t->args[1]) + ")";
    case ITy::K::Product: {
      std::string s = "(";
      for (size_t i = 0; i < t->args.size(); ++i) {
        if (i) s += " * ";
        s += ity_str(nullptr, t->args[i]);
      }
      return s + ")";
    }
  }
  return "?";
}

TypeChecker::ITyPtr TypeChecker::infer(std::map<std::string, ITyPtr>& env, const StoreTyping& store,
                                       std::map<LocId, ITyPtr>& locs, const ExprPtr& e) {
  auto base = [](BaseTy b) {
    auto n = std::make_shared<ITy>();
    n->k = ITy::K::Base;
    n->base = b;
    return n;
  };
  auto loc_ty = [&](LocId l, Span sp) -> ITyPtr {
    auto it = locs.find(l);
    if (it != locs.end()) return it->second;
    auto st = store.locs.find(l);
    if (st != store.locs.end()) {
      auto n = from_type(st->second);
      locs[l] = n;
      return n;
    }
    type_error(sp, "unbound location");
  };
  return std::visit(
      overloaded{
          [&](const Expr::Const& c) { return base(c.c.base_ty()); },
          [&](const Expr::Var& v) -> ITyPtr {
            auto it = env.find(v.name);
            if (it == env.end()) type_error(e->span, "unbound variable " + v.name);
            return it->second;
          },
          [&](const Expr::Lambda& l) {
            auto dom = fresh_var();
            auto cod = fresh_var();
            auto arrow = std::make_shared<ITy>();
            arrow->k = ITy::K::Arrow;
            arrow->args = {dom, cod};
            auto saved_param = env.find(l.param) != env.end() ? std::optional(env[l.param]) : std::nullopt;
            env[l.param] = dom;
            std::optional<ITyPtr> saved_self;
            if (l.self) {
              if (env.count(*l.self)) saved_self = env[*l.self];
              env[*l.self] = arrow;
            }
            if (l.annot) {
              // Patterns type against their location contents; the formula is
              // boolean. Annotation kappa names live in their own scope.
              std::map<std::string, ITyPtr> ks;
              for (auto& k : l.annot->sym_names) ks[k] = fresh_var();
              std::map<std::string, ITyPtr> aenv = ks;
              for (auto& [loc, pat] : l.annot->loc_patterns)
                unify(infer(aenv, store, locs, pat), loc_ty(loc, e->span), e->span);
              unify(infer(aenv, store, locs, l.annot->formula), base(BaseTy::Bool), e->span);
            }
            auto body = infer(env, store, locs, l.body);
            unify(cod, body, e->span);
            if (saved_param)
              env[l.param] = *saved_param;
            else
              env.erase(l.param);
            if (l.self) {
              if (saved_self)
                env[*l.self] = *saved_self;
              else
                env.erase(*l.self);
            }
            return arrow;
          },
          [&](const Expr::Tuple& t) {
            auto n = std::make_shared<ITy>();
            n->k = ITy::K::Product;
            for (auto& el : t.elems) n->args.push_back(infer(env, store, locs, el));
            return n;
          },
          [&](const Expr::Arith& a) -> ITyPtr {
            switch (a.op) {
              case ArithOp::Add:
              case ArithOp::Sub:
              case ArithOp::Mul:
              case ArithOp::Div:
              case ArithOp::Mod:
                for (auto& ar : a.args) unify(infer(env, store, locs, ar), base(BaseTy::Int), e->span);
                return base(BaseTy::Int);
              case ArithOp::Lt:
              case ArithOp::Le:
              case ArithOp::Gt:
              case ArithOp::Ge:
                for (auto& ar : a.args) unify(infer(env, store, locs, ar), base(BaseTy::Int), e->span);
                return base(BaseTy::Bool);
              case ArithOp::Eq:
              case ArithOp::Ne: {
                // equality is allowed on any one base type
                auto t0 = infer(env, store, locs, a.args[0]);
                unify(t0, infer(env, store, locs, a.args[1]), e->span);
                return base(BaseTy::Bool);
              }
              case ArithOp::And:
              case ArithOp::Or:
              case ArithOp::Not:
                for (auto& ar : a.args) unify(infer(env, store, locs, ar), base(BaseTy::Bool), e->span);
                return base(BaseTy::Bool);
            }
            internal_error("bad op");
          },
          [&](const Expr::App& a) {
            auto fn = infer(env, store, locs, a.fn);
            auto arg = infer(env, store, locs, a.arg);
            auto cod = fresh_var();
            auto arrow = std::make_shared<ITy>();
            arrow->k = ITy::K::Arrow;
            arrow->args = {arg, cod};
            unify(fn, arrow, e->span);
            return cod;
          },
          [&](const Expr::Cond& c) {
            unify(infer(env, store, locs, c.guard), base(BaseTy::Bool), e->span);
            auto t = infer(env, store, locs, c.then_e);
            unify(t, infer(env, store, locs, c.else_e), e->span);
            return t;
          },
          [&](const Expr::NewRef& n) {
            auto it = infer(env, store, locs, n.init);
            locs[n.loc] = it;
            return infer(env, store, locs, n.body);
          },
          [&](const Expr::Deref& d) { return loc_ty(d.loc, e->span); },
          [&](const Expr::Assign& a) {
            unify(infer(env, store, locs, a.rhs), loc_ty(a.loc, e->span), e->span);
            return base(BaseTy::Unit);
          },
          [&](const Expr::LetTuple& l) {
            auto rhs = infer(env, store, locs, l.rhs);
            std::vector<std::pair<std::string, std::optional<ITyPtr>>> saved;
            // the wildcard binder is sequencing sugar; its rhs must be unit
            if (l.binders.size() == 1 && l.binders[0] == "_")
              unify(rhs, base(BaseTy::Unit), e->span);
            if (l.binders.size() == 1) {
              saved.push_back({l.binders[0], env.count(l.binders[0]) ? std::optional(env[l.binders[0]]) : std::nullopt});
              env[l.binders[0]] = rhs;
            } else {
              auto prod = std::make_shared<ITy>();
              prod->k = ITy::K::Product;
              for (auto& b : l.binders) {
                auto v = fresh_var();
                prod->args.push_back(v);
                saved.push_back({b, env.count(b) ? std::optional(env[b]) : std::nullopt});
                env[b] = v;
              }
              unify(rhs, prod, e->span);
            }
            auto body = infer(env, store, locs, l.body);
            for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
              if (it->second)
                env[it->first] = *it->second;
              else
                env.erase(it->first);
            }
            return body;
          },
          [&](const Expr::AbsName& a) { return from_type(a.ty); },
          [&](const Expr::SymConst& k) { return base(k.ty); },
          [&](const Expr::Bot&) -> ITyPtr { return fresh_var(); },
      },
      e->node);
}

TypePtr TypeChecker::resolve(ITyPtr t, bool default_int, Span sp) {
  t = find(t);
  switch (t->k) {
    case ITy::K::Var:
      if (!default_int) type_error(sp, "ambiguous type (unresolved type variable)");
      t->link = from_type(ty_int());
      return ty_int();
    case ITy::K::Base: return ty_base(t->base);
    case ITy::K::Arrow: return ty_arrow(resolve(t->args[0], default_int, sp), resolve(t->args[1], default_int, sp));
    case ITy::K::Product: {
      std::vector<TypePtr> cs;
      for (auto& a : t->args) cs.push_back(resolve(a, default_int, sp));
      return ty_product(std::move(cs));
    }
  }
  internal_error("resolve");
}

TypePtr TypeChecker::typecheck(const TypeEnv& env, const StoreTyping& store, const ExprPtr& e,
                               bool require_ground) {
  std::map<std::string, ITyPtr> ienv;
  for (auto& [k, v] : env.vars) ienv[k] = from_type(v);
  std::map<LocId, ITyPtr> locs;
  auto t = infer(ienv, store, locs, e);
  return resolve(t, !require_ground, e->span);
}

TypePtr TypeChecker::typecheck_pair(const ExprPtr& left, const ExprPtr& right) {
  std::map<std::string, ITyPtr> env;
  StoreTyping store;
  std::map<LocId, ITyPtr> locs;
  auto tl = infer(env, store, locs, left);
  auto tr = infer(env, store, locs, right);
  unify(tl, tr, right->span);
  // Residual variables (e.g. an unapplied callback's answer type) are
  // defaulted to int; both sides get the same choice by sharing the unifier.
  return resolve(tl, true, left->span);
}

TypePtr typecheck(const ExprPtr& e) {
  TypeChecker tc;
  return tc.typecheck(TypeEnv{}, StoreTyping{}, e, false);
}

}  // namespace ctxeq
