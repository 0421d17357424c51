#include "ctxeq/config.hpp"

namespace ctxeq {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

Config initial_config(const ExprPtr& program, const TypePtr& ty) {
  Config c;
  c.ehat = program;
  c.ehat_ty = ty;
  return c;
}

Config bottom_config() {
  Config c;
  c.bottom = true;
  return c;
}

// --- ultimate patterns ------------------------------------------------------

namespace {
PatNode ulpatt_value_rec(const ExprPtr& v, const TypePtr& ty, int& next,
                         std::vector<std::pair<int, Binding>>& bindings) {
  return std::visit(
      overloaded{
          [&](const Expr::Lambda&) {
            if (!is_arrow_type(ty)) internal_error("ulpatt: function against non-arrow type");
            PatNode n;
            n.k = PatNode::K::Hole;
            n.index = next++;
            n.ty = ty;
            bindings.push_back({n.index, Binding{v, ty}});
            return n;
          },
          [&](const Expr::Tuple& t) {
            auto* p = std::get_if<Type::Product>(&ty->node);
            if (!p || p->components.size() != t.elems.size())
              internal_error("ulpatt: tuple/type arity mismatch");
            PatNode n;
            n.k = PatNode::K::Tup;
            for (size_t i = 0; i < t.elems.size(); ++i)
              n.kids.push_back(ulpatt_value_rec(t.elems[i], p->components[i], next, bindings));
            return n;
          },
          [&](const Expr::Const&) {
            PatNode n;
            n.k = PatNode::K::Lit;
            n.lit = v;
            return n;
          },
          [&](const Expr::SymConst&) {
            PatNode n;
            n.k = PatNode::K::Lit;
            n.lit = v;
            return n;
          },
          [&](const Expr::AbsName&) {
            PatNode n;
            n.k = PatNode::K::Lit;
            n.lit = v;
            return n;
          },
          [&](const auto&) -> PatNode { internal_error("ulpatt of a non-value"); },
      },
      v->node);
}

PatNode ulpatt_type_rec(const TypePtr& ty, NameGen& gen, UlpattType& out) {
  return std::visit(
      overloaded{
          [&](const Type::Base& b) {
            PatNode n;
            n.k = PatNode::K::Lit;
            if (b.b == BaseTy::Unit) {
              n.lit = mk_unit();
            } else {
              KappaId k = gen.fresh_kappa();
              out.kappas.push_back({k, b.b});
              n.lit = mk_symconst(k, b.b);
            }
            return n;
          },
          [&](const Type::Arrow&) {
            AlphaId a = gen.fresh_alpha();
            out.alphas.push_back({a, ty});
            PatNode n;
            n.k = PatNode::K::Lit;
            n.lit = mk_absname(a, ty);
            return n;
          },
          [&](const Type::Product& p) {
            PatNode n;
            n.k = PatNode::K::Tup;
            for (auto& c : p.components) n.kids.push_back(ulpatt_type_rec(c, gen, out));
            return n;
          },
      },
      ty->node);
}

ExprPtr pat_to_value(const PatNode& n, const std::map<int, Binding>& bindings) {
  switch (n.k) {
    case PatNode::K::Lit: return n.lit;
    case PatNode::K::Hole: {
      auto it = bindings.find(n.index);
      if (it == bindings.end()) internal_error("pattern hole without binding");
      return it->second.value;
    }
    case PatNode::K::Tup: {
      std::vector<ExprPtr> elems;
      for (auto& k : n.kids) elems.push_back(pat_to_value(k, bindings));
      return mk_tuple(std::move(elems));
    }
  }
  internal_error("pat_to_value");
}
}  // namespace

UlpattValue ulpatt_value(const ExprPtr& v, const TypePtr& ty, int next_index) {
  UlpattValue out;
  int next = next_index;
  out.pattern.root = ulpatt_value_rec(v, ty, next, out.bindings);
  return out;
}

UlpattType ulpatt_type(const TypePtr& ty, NameGen& gen) {
  UlpattType out;
  out.pattern.root = ulpatt_type_rec(ty, gen, out);
  std::map<int, Binding> none;
  out.value = pat_to_value(out.pattern.root, none);
  return out;
}

ExprPtr plug_pattern(const Pattern& p, const std::map<int, Binding>& bindings) {
  return pat_to_value(p.root, bindings);
}

bool pattern_equal(const Pattern& a, const Pattern& b) {
  std::function<bool(const PatNode&, const PatNode&)> eq = [&](const PatNode& x, const PatNode& y) {
    if (x.k != y.k) return false;
    switch (x.k) {
      case PatNode::K::Hole: return x.index == y.index;
      case PatNode::K::Lit: return expr_equal(x.lit, y.lit);
      case PatNode::K::Tup:
        if (x.kids.size() != y.kids.size()) return false;
        for (size_t i = 0; i < x.kids.size(); ++i)
          if (!eq(x.kids[i], y.kids[i])) return false;
        return true;
    }
    return false;
  };
  return eq(a.root, b.root);
}

namespace {
void pat_str(const PatNode& n, std::string& out) {
  switch (n.k) {
    case PatNode::K::Hole:
      out += "_fn#" + std::to_string(n.index);
      break;
    case PatNode::K::Lit:
      out += expr_to_string(n.lit);
      break;
    case PatNode::K::Tup: {
      out += "(";
      for (size_t i = 0; i < n.kids.size(); ++i) {
        if (i) out += ", ";
        pat_str(n.kids[i], out);
      }
      out += ")";
      break;
    }
  }
}
}  // namespace

std::string pattern_to_string(const Pattern& p) {
  std::string s;
  pat_str(p.root, s);
  return s;
}

std::string move_to_string(const Move& m) {
  switch (m.k) {
    case Move::K::PropApp:
      return "_app(α" + std::to_string(m.alpha) + ", " + pattern_to_string(m.pat) + ")";
    case Move::K::PropRet: return "_ret(" + pattern_to_string(m.pat) + ")";
    case Move::K::OpApp:
      return "app(g#" + std::to_string(m.index) + ", " + pattern_to_string(m.pat) + ")";
    case Move::K::OpRet: return "ret(" + pattern_to_string(m.pat) + ")";
    case Move::K::Term: return "TERM";
  }
  return "?";
}

PatternMatch match_patterns(const Pattern& left, const Pattern& right) {
  PatternMatch out;
  std::function<bool(const PatNode&, const PatNode&)> walk = [&](const PatNode& l,
                                                                 const PatNode& r) {
    if (l.k != r.k) return false;
    switch (l.k) {
      case PatNode::K::Hole:
        if (l.index != r.index) internal_error("hole numbering diverged between sides");
        return true;
      case PatNode::K::Lit: {
        auto* la = std::get_if<Expr::AbsName>(&l.lit->node);
        auto* ra = std::get_if<Expr::AbsName>(&r.lit->node);
        if (la || ra) return la && ra && la->id == ra->id;  // names are shared; must agree
        if (expr_equal(l.lit, r.lit)) return true;
        auto* lc = std::get_if<Expr::Const>(&l.lit->node);
        auto* rc = std::get_if<Expr::Const>(&r.lit->node);
        if (lc && rc) return false;  // distinct constants can never match
        out.leaves.push_back({l.lit, r.lit});
        return true;
      }
      case PatNode::K::Tup:
        if (l.kids.size() != r.kids.size()) return false;
        for (size_t i = 0; i < l.kids.size(); ++i)
          if (!walk(l.kids[i], r.kids[i])) return false;
        return true;
    }
    return false;
  };
  out.skeleton_match = walk(left.root, right.root);
  if (!out.skeleton_match) out.leaves.clear();
  return out;
}

// --- single-side transitions -----------------------------------------------

std::vector<PropMove> proponent_moves(const SymEnv& sigma, const Config& c, uint64_t fuel,
                                      NameGen& gen, ConstraintEngine& solver) {
  if (!c.is_proponent()) internal_error("proponent_moves on a non-proponent configuration");
  std::vector<PropMove> out;
  for (auto& br : reduce_to_interaction(sigma, c.store, c.ehat, fuel, gen, solver)) {
    if (br.k == InteractionBranch::K::Value) {
      UlpattValue up = ulpatt_value(br.value, c.ehat_ty, c.next_gamma_index());
      Config nc = c;
      nc.store = br.store;
      nc.ehat = nullptr;
      nc.ehat_ty = nullptr;
      for (auto& [i, b] : up.bindings) nc.gamma[i] = b;
      out.push_back({Move{Move::K::PropRet, 0, -1, up.pattern}, br.sigma, std::move(nc), br.taus});
    } else if (br.k == InteractionBranch::K::Call) {
      auto* arrow = std::get_if<Type::Arrow>(&br.alpha_ty->node);
      if (!arrow) internal_error("abstract name without arrow type");
      UlpattValue up = ulpatt_value(br.arg, arrow->dom, c.next_gamma_index());
      Config nc = c;
      nc.store = br.store;
      nc.stack.push_back(KFrame{br.ctx, arrow->cod, c.ehat_ty});
      nc.ehat = nullptr;
      nc.ehat_ty = nullptr;
      for (auto& [i, b] : up.bindings) nc.gamma[i] = b;
      out.push_back({Move{Move::K::PropApp, br.alpha, -1, up.pattern}, br.sigma, std::move(nc), br.taus});
    }
    // Stuck and Fuel branches produce no move
  }
  return out;
}

void admit_pattern_names(const UlpattType& pat, SymEnv& sigma, Config& c) {
  for (auto& [a, ty] : pat.alphas) c.alphas[a] = ty;
  for (auto& [k, ty] : pat.kappas) sigma.declare_existing(k, ty);
}

Config apply_op_app(const Config& c, int index, const UlpattType& pat) {
  auto it = c.gamma.find(index);
  if (it == c.gamma.end()) internal_error("op-app on unknown index");
  auto* arrow = std::get_if<Type::Arrow>(&it->second.ty->node);
  if (!arrow) internal_error("op-app on non-arrow binding");
  Config nc = c;
  for (auto& [a, ty] : pat.alphas) nc.alphas[a] = ty;
  // |-> : beta-reduce immediately when the callee is a concrete function
  const ExprPtr& fn = it->second.value;
  if (auto* lam = std::get_if<Expr::Lambda>(&fn->node)) {
    ExprPtr body = subst(lam->body, lam->param, pat.value);
    if (lam->self) body = subst(body, *lam->self, fn);
    nc.ehat = body;
  } else {
    nc.ehat = mk_app(fn, pat.value);
  }
  nc.ehat_ty = arrow->cod;
  return nc;
}

Config apply_op_ret(const Config& c, const UlpattType& pat) {
  if (c.stack.empty()) internal_error("op-ret with empty stack");
  Config nc = c;
  KFrame top = nc.stack.back();
  nc.stack.pop_back();
  for (auto& [a, ty] : pat.alphas) nc.alphas[a] = ty;
  nc.ehat = plug(top.ctx, pat.value);
  nc.ehat_ty = top.result_ty;
  return nc;
}

std::vector<OpMove> opponent_moves(const SymEnv& sigma, const Config& c, NameGen& gen) {
  if (!c.is_opponent()) internal_error("opponent_moves on a non-opponent configuration");
  std::vector<OpMove> out;
  for (auto& [i, b] : c.gamma) {
    auto* arrow = std::get_if<Type::Arrow>(&b.ty->node);
    if (!arrow) internal_error("gamma binding with non-arrow type");
    UlpattType pat = ulpatt_type(arrow->dom, gen);
    SymEnv sg = sigma;
    Config nc = c;
    admit_pattern_names(pat, sg, nc);
    nc = apply_op_app(nc, i, pat);
    out.push_back({Move{Move::K::OpApp, 0, i, pat.pattern}, std::move(sg), std::move(nc)});
  }
  if (!c.stack.empty()) {
    UlpattType pat = ulpatt_type(c.stack.back().hole_ty, gen);
    SymEnv sg = sigma;
    Config nc = c;
    admit_pattern_names(pat, sg, nc);
    nc = apply_op_ret(nc, pat);
    out.push_back({Move{Move::K::OpRet, 0, -1, pat.pattern}, std::move(sg), std::move(nc)});
  } else {
    out.push_back({Move{Move::K::Term, 0, -1, {}}, sigma, bottom_config()});
  }
  return out;
}

// --- wellformedness -----------------------------------------------------------

bool wellformed(const Config& c) {
  if (c.bottom) return true;
  if (c.ehat && !c.ehat_ty) return false;
  auto names_ok = [&](const ExprPtr& e) {
    for (AlphaId a : abstract_names(e))
      if (!c.alphas.count(a)) return false;
    return free_vars(e).empty();
  };
  std::set<LocId> dom;
  for (auto& [l, v] : c.store) dom.insert(l);
  auto locs_ok = [&](const ExprPtr& e) {
    for (LocId l : free_locations(e))
      if (!dom.count(l)) return false;
    return true;
  };
  for (auto& [i, b] : c.gamma) {
    if (!b.value || !b.ty || !is_value(b.value)) return false;
    if (!names_ok(b.value) || !locs_ok(b.value)) return false;
  }
  for (auto& [l, v] : c.store) {
    if (!is_value(v)) return false;
    if (!names_ok(v) || !locs_ok(v)) return false;
  }
  for (auto& fr : c.stack) {
    ExprPtr plugged = plug(fr.ctx, mk_unit());
    if (!names_ok(plugged) || !locs_ok(plugged)) return false;
    if (!fr.hole_ty || !fr.result_ty) return false;
  }
  if (c.ehat && (!names_ok(c.ehat) || !locs_ok(c.ehat))) return false;
  return true;
}

}  // namespace ctxeq
