#include "ctxeq/symenv.hpp"

namespace ctxeq {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

std::string SymEnv::to_string() const {
  if (atoms.empty()) return "T";
  std::string s;
  for (size_t i = 0; i < atoms.size(); ++i) {
    if (i) s += " /\\ ";
    s += "_k#" + std::to_string(atoms[i].lhs) + (atoms[i].equal ? " = " : " <> ") +
         expr_to_string(atoms[i].rhs);
  }
  return s;
}

std::optional<Constant> eval_ground(const ExprPtr& e, const Assignment& a) {
  using R = std::optional<Constant>;
  return std::visit(
      overloaded{
          [&](const Expr::Const& c) -> R { return c.c; },
          [&](const Expr::SymConst& k) -> R {
            const Constant* v = a.lookup(k.id);
            if (!v) return std::nullopt;
            return *v;
          },
          [&](const Expr::Arith& ar) -> R {
            std::vector<Constant> vs;
            for (auto& arg : ar.args) {
              auto v = eval_ground(arg, a);
              if (!v) return std::nullopt;
              vs.push_back(*v);
            }
            switch (ar.op) {
              case ArithOp::Add: return const_int(vs[0].as_int() + vs[1].as_int());
              case ArithOp::Sub: return const_int(vs[0].as_int() - vs[1].as_int());
              case ArithOp::Mul: return const_int(vs[0].as_int() * vs[1].as_int());
              case ArithOp::Div:
                if (vs[1].as_int().is_zero()) return std::nullopt;
                return const_int(vs[0].as_int().div_euclid(vs[1].as_int()));
              case ArithOp::Mod:
                if (vs[1].as_int().is_zero()) return std::nullopt;
                return const_int(vs[0].as_int().mod_euclid(vs[1].as_int()));
              case ArithOp::Eq: return const_bool(vs[0] == vs[1]);
              case ArithOp::Ne: return const_bool(!(vs[0] == vs[1]));
              case ArithOp::Lt: return const_bool(vs[0].as_int() < vs[1].as_int());
              case ArithOp::Le: return const_bool(vs[0].as_int() <= vs[1].as_int());
              case ArithOp::Gt: return const_bool(vs[0].as_int() > vs[1].as_int());
              case ArithOp::Ge: return const_bool(vs[0].as_int() >= vs[1].as_int());
              case ArithOp::And: return const_bool(vs[0].as_bool() && vs[1].as_bool());
              case ArithOp::Or: return const_bool(vs[0].as_bool() || vs[1].as_bool());
              case ArithOp::Not: return const_bool(!vs[0].as_bool());
            }
            return std::nullopt;
          },
          [&](const auto&) -> R { return std::nullopt; },
      },
      e->node);
}

bool satisfies(const SymEnv& sigma, const Assignment& a) {
  for (auto& atom : sigma.atoms) {
    const Constant* lhs = a.lookup(atom.lhs);
    auto rhs = eval_ground(atom.rhs, a);
    if (!lhs || !rhs) return false;
    bool eq = *lhs == *rhs;
    if (eq != atom.equal) return false;
  }
  return true;
}

ExprPtr subst_kappas(const ExprPtr& e, const std::map<KappaId, ExprPtr>& m) {
  return std::visit(
      overloaded{
          [&](const Expr::SymConst& k) -> ExprPtr {
            auto it = m.find(k.id);
            return it == m.end() ? e : it->second;
          },
          [&](const Expr::Arith& ar) -> ExprPtr {
            std::vector<ExprPtr> args;
            bool changed = false;
            for (auto& arg : ar.args) {
              args.push_back(subst_kappas(arg, m));
              changed |= args.back() != arg;
            }
            return changed ? mk_arith(ar.op, std::move(args), e->span) : e;
          },
          [&](const Expr::Tuple& t) -> ExprPtr {
            std::vector<ExprPtr> elems;
            bool changed = false;
            for (auto& el : t.elems) {
              elems.push_back(subst_kappas(el, m));
              changed |= elems.back() != el;
            }
            return changed ? mk_tuple(std::move(elems), e->span) : e;
          },
          [&](const Expr::Cond& c) -> ExprPtr {
            ExprPtr g = subst_kappas(c.guard, m), t = subst_kappas(c.then_e, m),
                    el = subst_kappas(c.else_e, m);
            return (g == c.guard && t == c.then_e && el == c.else_e) ? e : mk_cond(g, t, el, e->span);
          },
          [&](const auto&) -> ExprPtr { return e; },
      },
      e->node);
}

ExprPtr instantiate(const ExprPtr& e, const Assignment& a) {
  return std::visit(
      overloaded{
          [&](const Expr::SymConst& k) -> ExprPtr {
            const Constant* v = a.lookup(k.id);
            return v ? mk_const(*v) : e;
          },
          [&](const Expr::Const&) { return e; },
          [&](const Expr::Var&) { return e; },
          [&](const Expr::Lambda& l) {
            ExprPtr b = instantiate(l.body, a);
            return b == l.body ? e : mk_lambda(l.self, l.param, l.annot, b, e->span);
          },
          [&](const Expr::Tuple& t) {
            std::vector<ExprPtr> elems;
            bool changed = false;
            for (auto& el : t.elems) {
              elems.push_back(instantiate(el, a));
              changed |= elems.back() != el;
            }
            return changed ? mk_tuple(std::move(elems), e->span) : e;
          },
          [&](const Expr::Arith& ar) {
            std::vector<ExprPtr> args;
            bool changed = false;
            for (auto& arg : ar.args) {
              args.push_back(instantiate(arg, a));
              changed |= args.back() != arg;
            }
            return changed ? mk_arith(ar.op, std::move(args), e->span) : e;
          },
          [&](const Expr::App& ap) {
            ExprPtr f = instantiate(ap.fn, a), g = instantiate(ap.arg, a);
            return (f == ap.fn && g == ap.arg) ? e : mk_app(f, g, e->span);
          },
          [&](const Expr::Cond& c) {
            ExprPtr g = instantiate(c.guard, a), t = instantiate(c.then_e, a), el = instantiate(c.else_e, a);
            return (g == c.guard && t == c.then_e && el == c.else_e) ? e : mk_cond(g, t, el, e->span);
          },
          [&](const Expr::NewRef& n) {
            ExprPtr i = instantiate(n.init, a), b = instantiate(n.body, a);
            return (i == n.init && b == n.body) ? e : mk_newref(n.loc, i, b, e->span);
          },
          [&](const Expr::Deref&) { return e; },
          [&](const Expr::Assign& as) {
            ExprPtr r = instantiate(as.rhs, a);
            return r == as.rhs ? e : mk_assign(as.loc, r, e->span);
          },
          [&](const Expr::LetTuple& l) {
            ExprPtr r = instantiate(l.rhs, a), b = instantiate(l.body, a);
            return (r == l.rhs && b == l.body) ? e : mk_lettuple(l.binders, r, b, e->span);
          },
          [&](const Expr::AbsName&) { return e; },
          [&](const Expr::Bot&) { return e; },
      },
      e->node);
}

}  // namespace ctxeq
