#include "ctxeq/eval.hpp"

#include <deque>

namespace ctxeq {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

ExprPtr plug(const EvalCtx& ctx, ExprPtr e) {
  for (auto it = ctx.frames.rbegin(); it != ctx.frames.rend(); ++it) {
    e = std::visit(
        overloaded{
            [&](const Frame::TupleF& t) {
              std::vector<ExprPtr> elems = t.done;
              elems.push_back(e);
              elems.insert(elems.end(), t.pending.begin(), t.pending.end());
              return mk_tuple(std::move(elems));
            },
            [&](const Frame::ArithF& a) {
              std::vector<ExprPtr> args = a.done;
              args.push_back(e);
              args.insert(args.end(), a.pending.begin(), a.pending.end());
              return mk_arith(a.op, std::move(args));
            },
            [&](const Frame::AppFn& a) { return mk_app(e, a.arg); },
            [&](const Frame::AppArg& a) { return mk_app(a.fn, e); },
            [&](const Frame::AssignF& a) { return mk_assign(a.loc, e); },
            [&](const Frame::CondF& c) { return mk_cond(e, c.then_e, c.else_e); },
            [&](const Frame::LetTupleF& l) { return mk_lettuple(l.binders, e, l.body); },
        },
        it->f);
  }
  return e;
}

namespace {
// descends into the leftmost non-value position, pushing frames
Decomposition decompose_rec(const ExprPtr& e, std::vector<Frame>& frames) {
  if (std::holds_alternative<Expr::Bot>(e->node))
    return {Decomposition::K::StuckBot, {}, nullptr};
  if (std::holds_alternative<Expr::Var>(e->node)) internal_error("decompose: open term");
  if (is_value(e)) internal_error("decompose: descended into a value");

  auto descend = [&](Frame f, const ExprPtr& sub) {
    frames.push_back(std::move(f));
    return decompose_rec(sub, frames);
  };

  return std::visit(
      overloaded{
          [&](const Expr::Tuple& t) -> Decomposition {
            for (size_t i = 0; i < t.elems.size(); ++i) {
              if (is_value(t.elems[i])) continue;
              Frame::TupleF f;
              f.done.assign(t.elems.begin(), t.elems.begin() + i);
              f.pending.assign(t.elems.begin() + i + 1, t.elems.end());
              return descend(Frame{std::move(f)}, t.elems[i]);
            }
            internal_error("tuple of values is a value");
          },
          [&](const Expr::Arith& a) -> Decomposition {
            for (size_t i = 0; i < a.args.size(); ++i) {
              if (is_value(a.args[i])) continue;
              Frame::ArithF f;
              f.op = a.op;
              f.done.assign(a.args.begin(), a.args.begin() + i);
              f.pending.assign(a.args.begin() + i + 1, a.args.end());
              return descend(Frame{std::move(f)}, a.args[i]);
            }
            return {Decomposition::K::Redex, EvalCtx{std::move(frames)}, e};
          },
          [&](const Expr::App& a) -> Decomposition {
            if (!is_value(a.fn)) return descend(Frame{Frame::AppFn{a.arg}}, a.fn);
            if (!is_value(a.arg)) return descend(Frame{Frame::AppArg{a.fn}}, a.arg);
            return {Decomposition::K::Redex, EvalCtx{std::move(frames)}, e};
          },
          [&](const Expr::Cond& c) -> Decomposition {
            if (!is_value(c.guard)) return descend(Frame{Frame::CondF{c.then_e, c.else_e}}, c.guard);
            return {Decomposition::K::Redex, EvalCtx{std::move(frames)}, e};
          },
          [&](const Expr::NewRef& n) -> Decomposition {
            if (!is_value(n.init)) internal_error("NewRef with non-value initializer");
            return {Decomposition::K::Redex, EvalCtx{std::move(frames)}, e};
          },
          [&](const Expr::Deref&) -> Decomposition {
            return {Decomposition::K::Redex, EvalCtx{std::move(frames)}, e};
          },
          [&](const Expr::Assign& a) -> Decomposition {
            if (!is_value(a.rhs)) return descend(Frame{Frame::AssignF{a.loc}}, a.rhs);
            return {Decomposition::K::Redex, EvalCtx{std::move(frames)}, e};
          },
          [&](const Expr::LetTuple& l) -> Decomposition {
            if (!is_value(l.rhs)) return descend(Frame{Frame::LetTupleF{l.binders, l.body}}, l.rhs);
            return {Decomposition::K::Redex, EvalCtx{std::move(frames)}, e};
          },
          [&](const auto&) -> Decomposition { internal_error("decompose: unexpected node"); },
      },
      e->node);
}
}  // namespace

Decomposition decompose(const ExprPtr& e) {
  if (is_value(e)) return {Decomposition::K::AlreadyValue, {}, nullptr};
  std::vector<Frame> frames;
  return decompose_rec(e, frames);
}

bool is_abs_call(const ExprPtr& redex) {
  auto* a = std::get_if<Expr::App>(&redex->node);
  return a && std::holds_alternative<Expr::AbsName>(a->fn->node);
}

namespace {

// Reduces a base redex. Mode selects concrete-only or symbolic behaviour.
// Returns successors as (sigma delta applied, store, expr).
std::vector<SymBranch> step_redex(bool symbolic, const SymEnv& sigma, const Store& s,
                                  const EvalCtx& ctx, const ExprPtr& redex, NameGen& gen,
                                  ConstraintEngine* solver) {
  auto one = [&](SymEnv sg, Store st, ExprPtr e) {
    return std::vector<SymBranch>{{std::move(sg), std::move(st), plug(ctx, std::move(e))}};
  };

  return std::visit(
      overloaded{
          [&](const Expr::App& a) -> std::vector<SymBranch> {
            auto* lam = std::get_if<Expr::Lambda>(&a.fn->node);
            if (!lam) internal_error("step: application head is not a function");
            ExprPtr body = subst(lam->body, lam->param, a.arg);
            if (lam->self) body = subst(body, *lam->self, a.fn);
            return one(sigma, s, body);
          },
          [&](const Expr::Arith& ar) -> std::vector<SymBranch> {
            bool any_sym = false;
            for (auto& arg : ar.args) any_sym |= std::holds_alternative<Expr::SymConst>(arg->node);
            if (!any_sym) {
              Assignment empty;
              auto v = eval_ground(redex, empty);
              if (!v) return one(sigma, s, mk_bot());  // division by zero diverges
              return one(sigma, s, mk_const(*v));
            }
            if (!symbolic) internal_error("step_concrete hit a symbolic operand");
            // symbolic divisor: split on zero
            if ((ar.op == ArithOp::Div || ar.op == ArithOp::Mod) &&
                std::holds_alternative<Expr::SymConst>(ar.args[1]->node)) {
              auto& d = std::get<Expr::SymConst>(ar.args[1]->node);
              std::vector<SymBranch> out;
              SymEnv zero = sigma;
              zero.add_eq(d.id, mk_int(0));
              SatResult zr = solver->sat(zero);
              if (zr.is_sat()) out.push_back({zero, s, plug(ctx, mk_bot()), false});
              if (zr.is_unknown()) out.push_back({zero, s, nullptr, true});
              SymEnv nz = sigma;
              nz.add_ne(d.id, mk_int(0));
              SatResult nr = solver->sat(nz);
              if (nr.is_sat()) {
                BaseTy rt = BaseTy::Int;
                KappaId k = nz.declare(gen, rt);
                nz.add_eq(k, redex);
                out.push_back({nz, s, plug(ctx, mk_symconst(k, rt)), false});
              }
              if (nr.is_unknown()) out.push_back({nz, s, nullptr, true});
              return out;
            }
            if ((ar.op == ArithOp::Div || ar.op == ArithOp::Mod)) {
              auto* c = std::get_if<Expr::Const>(&ar.args[1]->node);
              if (c && c->c.is_int() && c->c.as_int().is_zero()) return one(sigma, s, mk_bot());
            }
            BaseTy rt;
            switch (ar.op) {
              case ArithOp::Add:
              case ArithOp::Sub:
              case ArithOp::Mul:
              case ArithOp::Div:
              case ArithOp::Mod: rt = BaseTy::Int; break;
              default: rt = BaseTy::Bool; break;
            }
            SymEnv sg = sigma;
            KappaId k = sg.declare(gen, rt);
            sg.add_eq(k, redex);
            return one(std::move(sg), s, mk_symconst(k, rt));
          },
          [&](const Expr::Cond& c) -> std::vector<SymBranch> {
            if (auto* g = std::get_if<Expr::Const>(&c.guard->node))
              return one(sigma, s, g->c.as_bool() ? c.then_e : c.else_e);
            auto* k = std::get_if<Expr::SymConst>(&c.guard->node);
            if (!k) internal_error("cond guard is neither constant nor symbolic");
            if (!symbolic) internal_error("step_concrete hit a symbolic guard");
            std::vector<SymBranch> out;
            SymEnv st = sigma;
            st.add_eq(k->id, mk_bool(true));
            SatResult tr = solver->sat(st);
            if (tr.is_sat()) out.push_back({st, s, plug(ctx, c.then_e), false});
            if (tr.is_unknown()) out.push_back({st, s, nullptr, true});
            SymEnv sf = sigma;
            sf.add_eq(k->id, mk_bool(false));
            SatResult fr = solver->sat(sf);
            if (fr.is_sat()) out.push_back({sf, s, plug(ctx, c.else_e), false});
            if (fr.is_unknown()) out.push_back({sf, s, nullptr, true});
            return out;
          },
          [&](const Expr::NewRef& n) -> std::vector<SymBranch> {
            LocId fresh = gen.fresh_loc();
            Store st = s;
            st[fresh] = n.init;
            return one(sigma, std::move(st), subst_loc(n.body, n.loc, fresh));
          },
          [&](const Expr::Deref& d) -> std::vector<SymBranch> {
            auto it = s.find(d.loc);
            if (it == s.end()) internal_error("deref of unbound location");
            return one(sigma, s, it->second);
          },
          [&](const Expr::Assign& a) -> std::vector<SymBranch> {
            Store st = s;
            st[a.loc] = a.rhs;
            return one(sigma, std::move(st), mk_unit());
          },
          [&](const Expr::LetTuple& l) -> std::vector<SymBranch> {
            ExprPtr body = l.body;
            if (l.binders.size() == 1) {
              body = subst(body, l.binders[0], l.rhs);
            } else {
              auto* t = std::get_if<Expr::Tuple>(&l.rhs->node);
              if (!t || t->elems.size() != l.binders.size())
                internal_error("let-tuple arity mismatch");
              for (size_t i = 0; i < l.binders.size(); ++i)
                body = subst(body, l.binders[i], t->elems[i]);
            }
            return one(sigma, s, body);
          },
          [&](const auto&) -> std::vector<SymBranch> { internal_error("step: not a redex"); },
      },
      redex->node);
}

}  // namespace

std::optional<std::pair<Store, ExprPtr>> step_concrete(const Store& s, const ExprPtr& e, NameGen& gen) {
  Decomposition d = decompose(e);
  if (d.k != Decomposition::K::Redex) return std::nullopt;
  if (is_abs_call(d.redex)) return std::nullopt;  // interaction, not a tau step
  SymEnv empty;
  auto out = step_redex(false, empty, s, d.ctx, d.redex, gen, nullptr);
  if (out.size() != 1) internal_error("concrete step must be deterministic");
  return std::make_pair(std::move(out[0].store), std::move(out[0].expr));
}

std::vector<SymBranch> step_symbolic(const SymEnv& sigma, const Store& s, const ExprPtr& e,
                                     NameGen& gen, ConstraintEngine& solver) {
  Decomposition d = decompose(e);
  if (d.k != Decomposition::K::Redex) return {};
  return step_redex(true, sigma, s, d.ctx, d.redex, gen, &solver);
}

std::vector<InteractionBranch> reduce_to_interaction(const SymEnv& sigma, const Store& s,
                                                     const ExprPtr& e, uint64_t fuel, NameGen& gen,
                                                     ConstraintEngine& solver) {
  std::vector<InteractionBranch> out;
  struct Item {
    SymEnv sigma;
    Store store;
    ExprPtr expr;
    uint64_t fuel;
    uint64_t taus;
  };
  std::deque<Item> work;
  work.push_back({sigma, s, e, fuel, 0});
  while (!work.empty()) {
    Item it = std::move(work.front());
    work.pop_front();
    Decomposition d = decompose(it.expr);
    if (d.k == Decomposition::K::AlreadyValue) {
      out.push_back({InteractionBranch::K::Value, it.sigma, it.store, it.expr, {}, 0, nullptr,
                     nullptr, it.taus});
      continue;
    }
    if (d.k == Decomposition::K::StuckBot) {
      out.push_back({InteractionBranch::K::Stuck, it.sigma, it.store, nullptr, {}, 0, nullptr,
                     nullptr, it.taus});
      continue;
    }
    if (is_abs_call(d.redex)) {
      auto& app = std::get<Expr::App>(d.redex->node);
      auto& an = std::get<Expr::AbsName>(app.fn->node);
      out.push_back({InteractionBranch::K::Call, it.sigma, it.store, nullptr, d.ctx, an.id, an.ty,
                     app.arg, it.taus});
      continue;
    }
    if (it.fuel == 0) {
      out.push_back({InteractionBranch::K::Fuel, it.sigma, it.store, nullptr, {}, 0, nullptr,
                     nullptr, it.taus});
      continue;
    }
    auto succs = step_redex(true, it.sigma, it.store, d.ctx, d.redex, gen, &solver);
    for (auto& sb : succs) {
      if (sb.unknown) {
        out.push_back({InteractionBranch::K::Unknown, sb.sigma, sb.store, nullptr, {}, 0, nullptr,
                       nullptr, it.taus});
        continue;
      }
      work.push_back({std::move(sb.sigma), std::move(sb.store), std::move(sb.expr), it.fuel - 1,
                      it.taus + 1});
    }
  }
  return out;
}

}  // namespace ctxeq
