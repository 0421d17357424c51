#include "ctxeq/upto.hpp"

#include <algorithm>
#include <functional>

#include "ctxeq/solver.hpp"

namespace ctxeq {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

// --- garbage collection ---------------------------------------------------------

namespace {
// Location closure: starts from the roots' free locations and chases
// through stored values.
std::set<LocId> reachable_locs(const Config& c, const std::vector<ExprPtr>& extra_roots) {
  std::set<LocId> reach;
  std::vector<LocId> work;
  auto add = [&](const std::set<LocId>& ls) {
    for (LocId l : ls)
      if (reach.insert(l).second) work.push_back(l);
  };
  for (auto& [i, b] : c.gamma) add(free_locations(b.value));
  for (auto& fr : c.stack) add(free_locations(plug(fr.ctx, mk_unit())));
  if (c.ehat) add(free_locations(c.ehat));
  for (auto& e : extra_roots) add(free_locations(e));
  while (!work.empty()) {
    LocId l = work.back();
    work.pop_back();
    auto it = c.store.find(l);
    if (it != c.store.end()) add(free_locations(it->second));
  }
  return reach;
}
}  // namespace

void gc_config(Config& c) {
  if (c.bottom) return;
  std::set<LocId> reach = reachable_locs(c, {});
  for (auto it = c.store.begin(); it != c.store.end();) {
    if (!reach.count(it->first))
      it = c.store.erase(it);
    else
      ++it;
  }
  std::set<AlphaId> used;
  for (auto& [i, b] : c.gamma) collect_abstract_names(b.value, used);
  for (auto& fr : c.stack) collect_abstract_names(plug(fr.ctx, mk_unit()), used);
  for (auto& [l, v] : c.store) collect_abstract_names(v, used);
  if (c.ehat) collect_abstract_names(c.ehat, used);
  for (auto it = c.alphas.begin(); it != c.alphas.end();) {
    if (!used.count(it->first))
      it = c.alphas.erase(it);
    else
      ++it;
  }
}

void gc_node(PairNode& n) {
  gc_config(n.left);
  gc_config(n.right);
}

void dedup_gamma(PairNode& n) {
  if (n.left.bottom && n.right.bottom) return;
  const Config& a = n.left.bottom ? n.right : n.left;
  const Config* b = n.both_live() ? &n.right : nullptr;
  std::vector<int> idx;
  for (auto& [i, bd] : a.gamma) idx.push_back(i);
  std::set<int> drop;
  for (size_t x = 0; x < idx.size(); ++x) {
    if (drop.count(idx[x])) continue;
    for (size_t y = x + 1; y < idx.size(); ++y) {
      if (drop.count(idx[y])) continue;
      bool same = expr_equal(a.gamma.at(idx[x]).value, a.gamma.at(idx[y]).value);
      if (same && b)
        same = expr_equal(b->gamma.at(idx[x]).value, b->gamma.at(idx[y]).value);
      if (same) drop.insert(idx[y]);
    }
  }
  for (int i : drop) {
    if (!n.left.bottom) n.left.gamma.erase(i);
    if (!n.right.bottom) n.right.gamma.erase(i);
  }
}

PairNode weaken(const PairNode& n, const std::set<int>& drop) {
  PairNode out = n;
  for (int i : drop) {
    if (!out.left.bottom) out.left.gamma.erase(i);
    if (!out.right.bottom) out.right.gamma.erase(i);
  }
  return out;
}

// --- canonical keys ----------------------------------------------------------------

namespace {

// Serializes configurations while renaming locations (per side), abstract
// names, kappas and indices (shared) in traversal order.
class KeyBuilder {
public:
  std::string out;
  std::map<AlphaId, int> alpha_map;
  std::map<KappaId, int> kappa_map;
  std::map<int, int> index_map;

  int alpha_num(AlphaId a) {
    auto it = alpha_map.find(a);
    if (it != alpha_map.end()) return it->second;
    int n = static_cast<int>(alpha_map.size());
    alpha_map.emplace(a, n);
    return n;
  }
  int kappa_num(KappaId k) {
    auto it = kappa_map.find(k);
    if (it != kappa_map.end()) return it->second;
    int n = static_cast<int>(kappa_map.size());
    kappa_map.emplace(k, n);
    return n;
  }

  struct SideState {
    std::map<LocId, int> loc_map;
    std::vector<LocId> pending_locs;  // discovered but not yet serialized
  };

  int loc_num(SideState& st, LocId l) {
    auto it = st.loc_map.find(l);
    if (it != st.loc_map.end()) return it->second;
    int n = static_cast<int>(st.loc_map.size());
    st.loc_map.emplace(l, n);
    st.pending_locs.push_back(l);
    return n;
  }

  void expr(SideState& st, const ExprPtr& e) {
    std::visit(
        overloaded{
            [&](const Expr::Const& c) { out += "c:" + constant_to_string(c.c) + " "; },
            [&](const Expr::Var& v) { out += "v:" + v.name + " "; },
            [&](const Expr::Lambda& l) {
              out += "(lam " + (l.self ? *l.self : "") + " " + l.param + " ";
              if (l.annot) {
                out += "{";
                for (auto& s : l.annot->sym_names) out += s + ",";
                out += "|";
                for (auto& [loc, pat] : l.annot->loc_patterns) {
                  out += "L" + std::to_string(loc_num(st, loc)) + " as ";
                  expr(st, pat);
                }
                out += "|";
                expr(st, l.annot->formula);
                out += "}";
              }
              expr(st, l.body);
              out += ")";
            },
            [&](const Expr::Tuple& t) {
              out += "(tup ";
              for (auto& el : t.elems) expr(st, el);
              out += ")";
            },
            [&](const Expr::Arith& a) {
              out += std::string("(op ") + arith_op_name(a.op) + " ";
              for (auto& ar : a.args) expr(st, ar);
              out += ")";
            },
            [&](const Expr::App& a) {
              out += "(app ";
              expr(st, a.fn);
              expr(st, a.arg);
              out += ")";
            },
            [&](const Expr::Cond& c) {
              out += "(if ";
              expr(st, c.guard);
              expr(st, c.then_e);
              expr(st, c.else_e);
              out += ")";
            },
            [&](const Expr::NewRef& n) {
              out += "(new L" + std::to_string(loc_num(st, n.loc)) + " ";
              expr(st, n.init);
              expr(st, n.body);
              out += ")";
            },
            [&](const Expr::Deref& d) { out += "!L" + std::to_string(loc_num(st, d.loc)) + " "; },
            [&](const Expr::Assign& a) {
              out += "(set L" + std::to_string(loc_num(st, a.loc)) + " ";
              expr(st, a.rhs);
              out += ")";
            },
            [&](const Expr::LetTuple& l) {
              out += "(let ";
              for (auto& b : l.binders) out += b + ",";
              expr(st, l.rhs);
              expr(st, l.body);
              out += ")";
            },
            [&](const Expr::AbsName& a) { out += "a" + std::to_string(alpha_num(a.id)) + " "; },
            [&](const Expr::SymConst& k) { out += "k" + std::to_string(kappa_num(k.id)) + " "; },
            [&](const Expr::Bot&) { out += "bot "; },
        },
        e->node);
  }

  void config(const Config& c, bool include_stack_and_e) {
    if (c.bottom) {
      out += "BOT;";
      return;
    }
    SideState st;
    out += "G[";
    for (auto& [i, b] : c.gamma) {
      out += "g" + std::to_string(index_num(i)) + ":" + type_to_string(b.ty) + "=";
      expr(st, b.value);
      out += ";";
    }
    out += "]K[";
    if (include_stack_and_e) {
      for (auto& fr : c.stack) {
        out += type_to_string(fr.hole_ty) + ">" + type_to_string(fr.result_ty) + ":";
        expr(st, plug(fr.ctx, mk_var("\xE2\x80\xA2hole")));
        out += ";";
      }
    }
    out += "]E[";
    if (include_stack_and_e && c.ehat) {
      out += type_to_string(c.ehat_ty) + ":";
      expr(st, c.ehat);
    }
    out += "]S[";
    // store entries in discovery order; serializing values may discover more
    size_t done = 0;
    while (done < st.pending_locs.size()) {
      LocId l = st.pending_locs[done++];
      auto it = c.store.find(l);
      out += "L" + std::to_string(st.loc_map.at(l)) + "=";
      if (it == c.store.end()) {
        out += "?";  // a location bound inside a lambda body only
      } else {
        expr(st, it->second);
      }
      out += ";";
    }
    // any store entry never discovered is unreachable garbage; gc removed it
    out += "]";
  }

  int index_num(int i) {
    auto it = index_map.find(i);
    if (it != index_map.end()) return it->second;
    int n = static_cast<int>(index_map.size());
    index_map.emplace(i, n);
    return n;
  }

  void sigma(const SymEnv& sg) {
    // canonical logical form over the kappas the configurations can see:
    // dead definitions inlined, boolean handles folded, duplicates dropped
    std::set<KappaId> live;
    for (auto& [k, n] : kappa_map) live.insert(k);
    SigmaKeyForm form = sigma_key_form(sg, live);
    out += "SIG[";
    SideState dummy;
    for (auto& atom : form.atoms) {
      auto it = sg.decls.find(atom.lhs);
      out += "k" + std::to_string(kappa_num(atom.lhs));
      out += it != sg.decls.end() && it->second == BaseTy::Bool ? "b" : "i";
      out += atom.equal ? "=" : "#";
      expr(dummy, atom.rhs);
      out += ";";
    }
    for (auto& f : form.facts) {
      out += "F:";
      expr(dummy, f);
      out += ";";
    }
    out += "]";
  }
};

std::string build_key(const PairNode& n, bool include_stack_and_e, bool include_pending) {
  PairNode copy = n;
  gc_node(copy);
  dedup_gamma(copy);
  KeyBuilder kb;
  kb.out += copy.separated ? "S1 " : "S0 ";
  kb.out += copy.left.bottom ? "L:BOT " : "L ";
  kb.config(copy.left, include_stack_and_e);
  kb.out += copy.right.bottom ? " R:BOT " : " R ";
  kb.config(copy.right, include_stack_and_e);
  kb.sigma(copy.sigma);
  if (include_pending) {
    kb.out += "P[";
    for (auto& p : copy.pending) {
      kb.out += std::to_string(p.index) + "@" + std::to_string(p.depth) + "#" +
                std::to_string(std::hash<std::string>{}(p.snapshot)) + ";";
    }
    kb.out += "]";
  }
  return kb.out;
}

}  // namespace

std::string canonical_key(const PairNode& n) { return build_key(n, true, true); }

std::string snapshot_key(const PairNode& n) { return build_key(n, false, false); }

// --- separation ---------------------------------------------------------------------

namespace {
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(size_t n) : parent(n) {
    for (size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

std::set<LocId> footprint(const Config& c, const ExprPtr& root) {
  std::set<LocId> reach = free_locations(root);
  std::vector<LocId> work(reach.begin(), reach.end());
  while (!work.empty()) {
    LocId l = work.back();
    work.pop_back();
    auto it = c.store.find(l);
    if (it == c.store.end()) continue;
    for (LocId m : free_locations(it->second))
      if (reach.insert(m).second) work.push_back(m);
  }
  return reach;
}
}  // namespace

Separation separate(const PairNode& n) {
  Separation out;
  bool bot_mode = !n.both_live();
  const Config& base = bot_mode ? n.live() : n.left;

  // items: one per Gamma index, then one per stack position
  std::vector<int> indices;
  for (auto& [i, b] : base.gamma) indices.push_back(i);
  size_t ni = indices.size();
  size_t nk = base.stack.size();
  size_t total = ni + nk;
  if (total == 0) return out;

  UnionFind uf(total);
  // force all stack positions into one block when a side is bottom: a
  // complete trace needs the whole stack popped
  if (bot_mode)
    for (size_t p = 1; p < nk; ++p) uf.unite(static_cast<int>(ni + p - 1), static_cast<int>(ni + p));

  auto join_side = [&](const Config& c) {
    std::map<LocId, int> owner;
    auto visit = [&](int item, const std::set<LocId>& fp) {
      for (LocId l : fp) {
        auto [it, fresh] = owner.emplace(l, item);
        if (!fresh) uf.unite(item, it->second);
      }
    };
    for (size_t x = 0; x < ni; ++x) visit(static_cast<int>(x), footprint(c, c.gamma.at(indices[x]).value));
    for (size_t p = 0; p < nk; ++p)
      visit(static_cast<int>(ni + p), footprint(c, plug(c.stack[p].ctx, mk_unit())));
  };
  join_side(base);
  if (!bot_mode) join_side(n.right);

  // collect blocks; focused = block containing the stack top, else the block
  // of the smallest index
  std::map<int, std::vector<int>> groups;
  for (size_t t = 0; t < total; ++t) groups[uf.find(static_cast<int>(t))].push_back(static_cast<int>(t));
  if (groups.size() <= 1) return out;

  int focus_root = nk > 0 ? uf.find(static_cast<int>(ni + nk - 1)) : uf.find(0);
  std::vector<int> roots;
  roots.push_back(focus_root);
  for (auto& [r, members] : groups)
    if (r != focus_root) roots.push_back(r);

  out.split = true;
  out.frame_block.assign(nk, -1);
  bool all_frames_one_block = true;
  for (size_t p = 0; p < nk; ++p) {
    int r = uf.find(static_cast<int>(ni + p));
    for (size_t bi = 0; bi < roots.size(); ++bi)
      if (roots[bi] == r) out.frame_block[p] = static_cast<int>(bi);
    all_frames_one_block &= out.frame_block[p] == out.frame_block[0];
  }

  for (size_t bi = 0; bi < roots.size(); ++bi) {
    PairNode block;
    block.sigma = n.sigma;
    block.separated = true;
    auto build_side = [&](const Config& src) {
      Config c;
      c.alphas = src.alphas;  // gc below prunes
      for (size_t x = 0; x < ni; ++x)
        if (uf.find(static_cast<int>(x)) == roots[bi]) c.gamma[indices[x]] = src.gamma.at(indices[x]);
      for (size_t p = 0; p < nk; ++p)
        if (out.frame_block[p] == static_cast<int>(bi)) c.stack.push_back(src.stack[p]);
      c.store = src.store;  // gc strips the other blocks' cells
      return c;
    };
    if (bot_mode) {
      block.left = n.left.bottom ? bottom_config() : build_side(n.left);
      block.right = n.right.bottom ? bottom_config() : build_side(n.right);
      // only the frame block keeps the bottom partner; frameless blocks are
      // discharged reflexively (their challenges are answered by themselves)
      bool has_frames = false;
      for (size_t p = 0; p < nk; ++p) has_frames |= out.frame_block[p] == static_cast<int>(bi);
      bool discharged = !has_frames && !(nk == 0 && bi == 0);
      out.self_discharged.push_back(discharged);
    } else {
      block.left = build_side(n.left);
      block.right = build_side(n.right);
      out.self_discharged.push_back(false);
    }
    // pendings stay with the (single) frame block when frames were not split
    if (all_frames_one_block && nk > 0 && out.frame_block[0] == static_cast<int>(bi))
      block.pending = n.pending;
    gc_node(block);
    out.blocks.push_back(std::move(block));
  }
  for (size_t x = 0; x < ni; ++x) {
    int r = uf.find(static_cast<int>(x));
    for (size_t bi = 0; bi < roots.size(); ++bi)
      if (roots[bi] == r) out.index_block[indices[x]] = static_cast<int>(bi);
  }
  return out;
}

PairNode merge_blocks(const Separation& sep, const SymEnv& sigma) {
  PairNode out;
  out.sigma = sigma;
  auto merge_side = [&](bool left) -> Config {
    Config c;
    bool bottom = false;
    for (auto& b : sep.blocks) {
      const Config& src = left ? b.left : b.right;
      if (src.bottom) {
        bottom = true;
        continue;
      }
      for (auto& [a, t] : src.alphas) c.alphas[a] = t;
      for (auto& [i, bd] : src.gamma) c.gamma[i] = bd;
      for (auto& [l, v] : src.store) c.store[l] = v;
    }
    if (bottom) return bottom_config();
    // re-interleave stacks by the recorded shape
    std::vector<size_t> cursor(sep.blocks.size(), 0);
    for (int blk : sep.frame_block) {
      const Config& src = left ? sep.blocks[blk].left : sep.blocks[blk].right;
      c.stack.push_back(src.stack[cursor[blk]++]);
    }
    return c;
  };
  out.left = merge_side(true);
  out.right = merge_side(false);
  return out;
}

// --- state invariants -----------------------------------------------------------------

bool index_annotated(const PairNode& n, int index) {
  auto check = [&](const Config& c) {
    if (c.bottom) return false;
    auto it = c.gamma.find(index);
    if (it == c.gamma.end()) return false;
    auto* lam = std::get_if<Expr::Lambda>(&it->second.value->node);
    return lam && lam->annot != nullptr;
  };
  return check(n.left) || check(n.right);
}

namespace {
// Matches a store value against a pattern over kappa names, accumulating
// fillers. Patterns are value contexts: names, constants and tuples.
bool match_pattern(const ExprPtr& pattern, const ExprPtr& value,
                   std::map<std::string, ExprPtr>& fillers) {
  if (auto* v = std::get_if<Expr::Var>(&pattern->node)) {
    auto [it, fresh] = fillers.emplace(v->name, value);
    return fresh || expr_equal(it->second, value);
  }
  if (auto* c = std::get_if<Expr::Const>(&pattern->node)) {
    auto* vc = std::get_if<Expr::Const>(&value->node);
    return vc && c->c == vc->c;
  }
  if (auto* t = std::get_if<Expr::Tuple>(&pattern->node)) {
    auto* vt = std::get_if<Expr::Tuple>(&value->node);
    if (!vt || vt->elems.size() != t->elems.size()) return false;
    for (size_t i = 0; i < t->elems.size(); ++i)
      if (!match_pattern(t->elems[i], vt->elems[i], fillers)) return false;
    return true;
  }
  return false;
}

BaseTy value_base_ty(const ExprPtr& v) {
  if (auto* c = std::get_if<Expr::Const>(&v->node)) return c->c.base_ty();
  if (auto* k = std::get_if<Expr::SymConst>(&v->node)) return k->ty;
  internal_error("invariant filler is not first-order");
}

ExprPtr subst_names(const ExprPtr& e, const std::map<std::string, ExprPtr>& m) {
  ExprPtr out = e;
  for (auto& [name, v] : m) out = subst(out, name, v);
  return out;
}
}  // namespace

InvariantResult apply_invariant(PairNode& n, int index, InvariantPhase, ConstraintEngine& solver,
                                NameGen& gen) {
  struct SideAnnot {
    Config* config;
    AnnotPtr annot;
  };
  std::vector<SideAnnot> sides;
  std::vector<std::string> names;  // unified by position
  for (Config* c : {&n.left, &n.right}) {
    if (c->bottom) continue;
    auto it = c->gamma.find(index);
    if (it == c->gamma.end()) continue;
    auto* lam = std::get_if<Expr::Lambda>(&it->second.value->node);
    if (!lam || !lam->annot) continue;
    sides.push_back({c, lam->annot});
    if (lam->annot->sym_names.size() > names.size()) names = lam->annot->sym_names;
  }
  if (sides.empty()) return {InvariantOutcome::NoAnnotation, ""};
  if (names.empty()) return {InvariantOutcome::Applied, "re-entry flag only"};

  // 1. pattern-match each annotated location's current contents
  // fillers are keyed by position so both sides' names line up
  std::map<std::string, ExprPtr> fillers;  // keyed by the unified name list
  auto unify_name = [&](const SideAnnot& sa, const std::string& local) -> std::string {
    for (size_t i = 0; i < sa.annot->sym_names.size(); ++i)
      if (sa.annot->sym_names[i] == local) return i < names.size() ? names[i] : local;
    return local;
  };
  for (auto& sa : sides) {
    std::map<std::string, ExprPtr> local;
    for (auto& [loc, pat] : sa.annot->loc_patterns) {
      auto it = sa.config->store.find(loc);
      if (it == sa.config->store.end())
        return {InvariantOutcome::Failed, "annotated location not in store"};
      if (!match_pattern(pat, it->second, local))
        return {InvariantOutcome::Failed, "store contents do not match the annotation pattern"};
    }
    for (auto& [ln, v] : local) {
      std::string u = unify_name(sa, ln);
      auto [it, fresh] = fillers.emplace(u, v);
      if (!fresh && !expr_equal(it->second, v))
        return {InvariantOutcome::Failed, "sides disagree on a shared symbolic constant"};
    }
  }

  // 2. tautology check: sigma entails phi instantiated with the fillers
  std::vector<ExprPtr> phis;
  for (auto& sa : sides) {
    std::map<std::string, ExprPtr> ren;
    for (auto& local : sa.annot->sym_names) {
      std::string u = unify_name(sa, local);
      auto it = fillers.find(u);
      if (it == fillers.end())
        return {InvariantOutcome::Failed, "symbolic constant never filled by any pattern"};
      ren[local] = it->second;
    }
    phis.push_back(subst_names(sa.annot->formula, ren));
  }
  ExprPtr phi_inst = phis.size() == 1 ? phis[0] : mk_arith(ArithOp::And, {phis[0], phis[1]});
  Entailment ent = solver.entails(n.sigma, phi_inst);
  if (ent == Entailment::Unknown) return {InvariantOutcome::Unknown, "solver returned unknown"};
  if (ent == Entailment::No) return {InvariantOutcome::Failed, "invariant does not hold here"};

  // 3. abstraction: shared fresh kappas replace the matched contents and the
  // invariant is assumed over them
  std::map<std::string, ExprPtr> fresh;
  for (auto& [name, filler] : fillers) {
    BaseTy ty = value_base_ty(filler);
    KappaId k = n.sigma.declare(gen, ty);
    fresh[name] = mk_symconst(k, ty);
  }
  for (auto& sa : sides) {
    std::map<std::string, ExprPtr> ren;
    for (auto& local : sa.annot->sym_names) ren[local] = fresh.at(unify_name(sa, local));
    for (auto& [loc, pat] : sa.annot->loc_patterns)
      sa.config->store[loc] = subst_names(pat, ren);
  }
  std::vector<ExprPtr> phi_fresh;
  for (auto& sa : sides) {
    std::map<std::string, ExprPtr> ren;
    for (auto& local : sa.annot->sym_names) ren[local] = fresh.at(unify_name(sa, local));
    phi_fresh.push_back(subst_names(sa.annot->formula, ren));
  }
  ExprPtr assume = phi_fresh.size() == 1 ? phi_fresh[0] : mk_arith(ArithOp::And, {phi_fresh[0], phi_fresh[1]});
  n.sigma.assert_formula(gen, assume);
  return {InvariantOutcome::Applied, ""};
}

}  // namespace ctxeq
