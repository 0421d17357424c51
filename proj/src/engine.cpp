#include "ctxeq/engine.hpp"

#include <iostream>

namespace ctxeq {

const char* reason_name(Reason r) {
  switch (r) {
    case Reason::BoundExhausted: return "BoundExhausted";
    case Reason::FuelExhausted: return "FuelExhausted";
    case Reason::SolverUnknown: return "SolverUnknown";
    case Reason::ReentryViolated: return "ReentryViolated";
    case Reason::InvariantFailed: return "InvariantFailed";
  }
  return "?";
}

std::string trace_to_string(const Trace& t) {
  std::string out;
  for (auto& s : t) {
    out += move_to_string(s.move);
    if (s.side == TraceStep::Side::LeftOnly) out += " [left]";
    if (s.side == TraceStep::Side::RightOnly) out += " [right]";
    out += "\n";
  }
  return out;
}

void BisimEngine::poison(Reason r) { reasons_.insert(r); }

bool BisimEngine::timeout_hit() {
  if (timed_out_) return true;
  if (std::chrono::steady_clock::now() > deadline_) {
    timed_out_ = true;
    poison(Reason::BoundExhausted);
  }
  return timed_out_;
}

void BisimEngine::explain(const std::string& line) {
  if (opts_.explain) std::cerr << line << "\n";
}

namespace {

// Advances a configuration by a proponent return; gamma gains the pattern's
// function bindings on the given indices.
void apply_ret(Config& c, const InteractionBranch& br, const UlpattValue& up) {
  c.store = br.store;
  for (auto& [i, b] : up.bindings) c.gamma[i] = b;
  c.ehat = nullptr;
  c.ehat_ty = nullptr;
}

void apply_call(Config& c, const InteractionBranch& br, const UlpattValue& up) {
  auto* arrow = std::get_if<Type::Arrow>(&br.alpha_ty->node);
  c.store = br.store;
  c.stack.push_back(KFrame{br.ctx, arrow->cod, c.ehat_ty});
  for (auto& [i, b] : up.bindings) c.gamma[i] = b;
  c.ehat = nullptr;
  c.ehat_ty = nullptr;
}

// sigma /\ (a = b) for first-order leaves; one of them is symbolic.
void add_leaf_eq(SymEnv& sigma, const ExprPtr& a, const ExprPtr& b, bool equal) {
  if (auto* ka = std::get_if<Expr::SymConst>(&a->node)) {
    if (equal)
      sigma.add_eq(ka->id, b);
    else
      sigma.add_ne(ka->id, b);
    return;
  }
  auto* kb = std::get_if<Expr::SymConst>(&b->node);
  if (!kb) internal_error("leaf pair without a symbolic side");
  if (equal)
    sigma.add_eq(kb->id, a);
  else
    sigma.add_ne(kb->id, a);
}

int next_shared_index(const PairNode& n) {
  int nl = n.left.bottom ? 0 : n.left.next_gamma_index();
  int nr = n.right.bottom ? 0 : n.right.next_gamma_index();
  return std::max(nl, nr);
}

}  // namespace

// Exit-phase invariant application and re-entry snapshot validation when a
// proponent return lands back at the depth of the innermost pending call.
bool BisimEngine::handle_completion(PairNode& child) {
  if (child.pending.empty()) return true;
  size_t depth = child.left.bottom ? child.right.stack.size() : child.left.stack.size();
  if (child.pending.back().depth != depth) return true;
  PendingCall done = child.pending.back();
  child.pending.pop_back();
  if (opts_.annotations) {
    InvariantResult r = apply_invariant(child, done.index, InvariantPhase::PropRetExit, solver_, gen_);
    if (r.outcome == InvariantOutcome::Applied) ++stats_.inv_applied;
    if (r.outcome == InvariantOutcome::Failed) {
      ++stats_.inv_failed;
      soft_reasons_.insert(Reason::InvariantFailed);
      explain("INV failed " + std::to_string(done.index) + ": " + r.detail);
    }
    if (r.outcome == InvariantOutcome::Unknown) {
      soft_reasons_.insert(Reason::SolverUnknown);
      explain("INV unknown " + std::to_string(done.index) + ": " + r.detail);
    }
  }
  if (opts_.reentry) {
    std::string now = snapshot_key(child);
    if (now != done.snapshot) {
      reentry_check_failed_[done.index] = true;
      explain("REENTRY check failed " + std::to_string(done.index));
    }
  }
  return true;
}

bool BisimEngine::child_after_ret(PairNode base, bool left_side, const InteractionBranch& br,
                                  uint64_t bound, size_t depth, bool other_bottom) {
  Config& live = left_side ? base.left : base.right;
  Config& other = left_side ? base.right : base.left;
  if (other_bottom) other = bottom_config();
  UlpattValue up = ulpatt_value(br.value, live.ehat_ty, next_shared_index(base));
  base.sigma = br.sigma;
  apply_ret(live, br, up);
  handle_completion(base);
  trace_.push_back({Move{Move::K::PropRet, 0, -1, up.pattern},
                    other_bottom ? (left_side ? TraceStep::Side::LeftOnly : TraceStep::Side::RightOnly)
                                 : TraceStep::Side::Both});
  bool clean = explore_opp(std::move(base), bound, depth + 1);
  trace_.pop_back();
  return clean;
}

bool BisimEngine::child_after_call(PairNode base, bool left_side, const InteractionBranch& br,
                                   uint64_t bound, size_t depth, bool other_bottom) {
  if (bound == 0) {
    poison(Reason::BoundExhausted);
    return false;
  }
  Config& live = left_side ? base.left : base.right;
  Config& other = left_side ? base.right : base.left;
  if (other_bottom) other = bottom_config();
  auto* arrow = std::get_if<Type::Arrow>(&br.alpha_ty->node);
  if (!arrow) internal_error("call to non-arrow abstract name");
  UlpattValue up = ulpatt_value(br.arg, arrow->dom, next_shared_index(base));
  base.sigma = br.sigma;
  apply_call(live, br, up);
  if (opts_.annotations && !base.pending.empty()) {
    InvariantResult r = apply_invariant(base, base.pending.back().index,
                                        InvariantPhase::PropCallOut, solver_, gen_);
    if (r.outcome == InvariantOutcome::Applied) ++stats_.inv_applied;
    if (r.outcome == InvariantOutcome::Failed) ++stats_.inv_failed;
  }
  trace_.push_back({Move{Move::K::PropApp, br.alpha, -1, up.pattern},
                    other_bottom ? (left_side ? TraceStep::Side::LeftOnly : TraceStep::Side::RightOnly)
                                 : TraceStep::Side::Both});
  bool clean = explore_opp(std::move(base), bound - 1, depth + 1);
  trace_.pop_back();
  return clean;
}

bool BisimEngine::explore_prop(PairNode n, uint64_t bound, size_t depth) {
  ++stats_.nodes;
  stats_.max_depth = std::max<uint64_t>(stats_.max_depth, depth);
  if (timeout_hit()) return false;

  bool clean = true;

  if (!n.both_live()) {
    const Config& live = n.live();
    bool left_side = !n.left.bottom;
    // bottom-paired proponent nodes recur under invariant abstraction (the
    // store is freshly symbolic each round); closing them here is what makes
    // annotated examples against a diverging side finite
    std::string key;
    if (opts_.memoization) {
      key = canonical_key(n);
      auto it = memo_.find(key);
      if (it != memo_.end()) {
        ++stats_.memo_hits;
        return it->second.closed ? it->second.clean : true;
      }
      memo_.emplace(key, MemoEntry{});
    }
    auto branches = reduce_to_interaction(n.sigma, live.store, live.ehat, opts_.fuel, gen_, solver_);
    for (auto& br : branches) {
      stats_.taus_collapsed += br.taus;
      switch (br.k) {
        case InteractionBranch::K::Fuel:
          poison(Reason::FuelExhausted);
          clean = false;
          break;
        case InteractionBranch::K::Unknown:
          poison(Reason::SolverUnknown);
          clean = false;
          break;
        case InteractionBranch::K::Stuck: break;  // silent: bottom matches everything but TERM
        case InteractionBranch::K::Value:
          clean &= child_after_ret(n, left_side, br, bound, depth, false);
          break;
        case InteractionBranch::K::Call:
          clean &= child_after_call(n, left_side, br, bound, depth, false);
          break;
      }
    }
    if (opts_.memoization) {
      auto& e = memo_[key];
      e.closed = true;
      e.clean = clean;
    }
    return clean;
  }

  // live-live: pair the two sides' interaction branches
  auto left_branches =
      reduce_to_interaction(n.sigma, n.left.store, n.left.ehat, opts_.fuel, gen_, solver_);
  for (auto& bl : left_branches) {
    stats_.taus_collapsed += bl.taus;
    if (bl.k == InteractionBranch::K::Fuel) {
      poison(Reason::FuelExhausted);
      clean = false;
      continue;
    }
    if (bl.k == InteractionBranch::K::Unknown) {
      poison(Reason::SolverUnknown);
      clean = false;
      continue;
    }
    auto right_branches =
        reduce_to_interaction(bl.sigma, n.right.store, n.right.ehat, opts_.fuel, gen_, solver_);
    for (auto& br : right_branches) {
      stats_.taus_collapsed += br.taus;
      if (br.k == InteractionBranch::K::Fuel) {
        poison(Reason::FuelExhausted);
        clean = false;
        continue;
      }
      if (br.k == InteractionBranch::K::Unknown) {
        poison(Reason::SolverUnknown);
        clean = false;
        continue;
      }
      // under br.sigma both sides' outcomes are joint; dispatch on the pair
      const bool l_stuck = bl.k == InteractionBranch::K::Stuck;
      const bool r_stuck = br.k == InteractionBranch::K::Stuck;
      if (l_stuck && r_stuck) continue;  // both diverge: nothing to match
      if (l_stuck || r_stuck) {
        // one side is silent; the other moves against bottom
        PairNode base = n;
        base.sigma = br.sigma;
        const InteractionBranch& mover = l_stuck ? br : bl;
        bool mover_left = !l_stuck;
        // the mover's branch sigma is br.sigma either way (joint)
        InteractionBranch m = mover;
        m.sigma = br.sigma;
        if (m.k == InteractionBranch::K::Value)
          clean &= child_after_ret(base, mover_left, m, bound, depth, true);
        else
          clean &= child_after_call(base, mover_left, m, bound, depth, true);
        continue;
      }

      // both sides produced a move
      const bool l_ret = bl.k == InteractionBranch::K::Value;
      const bool r_ret = br.k == InteractionBranch::K::Value;
      int next_idx = next_shared_index(n);

      auto mismatch_both_ways = [&](const SymEnv& sg) {
        InteractionBranch l2 = bl;
        l2.sigma = sg;
        InteractionBranch r2 = br;
        r2.sigma = sg;
        if (l_ret)
          clean &= child_after_ret(n, true, l2, bound, depth, true);
        else
          clean &= child_after_call(n, true, l2, bound, depth, true);
        if (r_ret)
          clean &= child_after_ret(n, false, r2, bound, depth, true);
        else
          clean &= child_after_call(n, false, r2, bound, depth, true);
      };

      if (l_ret != r_ret || (!l_ret && bl.alpha != br.alpha)) {
        mismatch_both_ways(br.sigma);
        continue;
      }

      // same move kind (and callee if calls): compare patterns
      TypePtr lty = l_ret ? n.left.ehat_ty : std::get<Type::Arrow>(bl.alpha_ty->node).dom;
      TypePtr rty = r_ret ? n.right.ehat_ty : std::get<Type::Arrow>(br.alpha_ty->node).dom;
      UlpattValue upl = ulpatt_value(l_ret ? bl.value : bl.arg, lty, next_idx);
      UlpattValue upr = ulpatt_value(r_ret ? br.value : br.arg, rty, next_idx);
      PatternMatch pm = match_patterns(upl.pattern, upr.pattern);
      if (!pm.skeleton_match) {
        mismatch_both_ways(br.sigma);
        continue;
      }

      // matched-equality branch first, then each disequality split
      {
        SymEnv eq = br.sigma;
        for (auto& [a, b] : pm.leaves) add_leaf_eq(eq, a, b, true);
        bool feasible = true;
        if (!pm.leaves.empty()) {
          SatResult s = solver_.sat(eq);
          if (s.is_unknown()) {
            poison(Reason::SolverUnknown);
            clean = false;
            feasible = false;
          } else {
            feasible = s.is_sat();
          }
        }
        if (feasible) {
          PairNode child = n;
          child.sigma = eq;
          if (l_ret) {
            apply_ret(child.left, bl, upl);
            apply_ret(child.right, br, upr);
            handle_completion(child);
            trace_.push_back({Move{Move::K::PropRet, 0, -1, upl.pattern}, TraceStep::Side::Both});
            clean &= explore_opp(std::move(child), bound, depth + 1);
            trace_.pop_back();
          } else if (bound == 0) {
            poison(Reason::BoundExhausted);
            clean = false;
          } else {
            apply_call(child.left, bl, upl);
            apply_call(child.right, br, upr);
            if (opts_.annotations && !child.pending.empty()) {
              InvariantResult r = apply_invariant(child, child.pending.back().index,
                                                  InvariantPhase::PropCallOut, solver_, gen_);
              if (r.outcome == InvariantOutcome::Applied) ++stats_.inv_applied;
              if (r.outcome == InvariantOutcome::Failed) ++stats_.inv_failed;
            }
            trace_.push_back({Move{Move::K::PropApp, bl.alpha, -1, upl.pattern}, TraceStep::Side::Both});
            clean &= explore_opp(std::move(child), bound - 1, depth + 1);
            trace_.pop_back();
          }
        }
      }
      for (size_t k = 0; k < pm.leaves.size(); ++k) {
        SymEnv dis = br.sigma;
        for (size_t j = 0; j < k; ++j) add_leaf_eq(dis, pm.leaves[j].first, pm.leaves[j].second, true);
        add_leaf_eq(dis, pm.leaves[k].first, pm.leaves[k].second, false);
        SatResult s = solver_.sat(dis);
        if (s.is_unknown()) {
          poison(Reason::SolverUnknown);
          clean = false;
          continue;
        }
        if (!s.is_sat()) continue;
        mismatch_both_ways(dis);
      }
    }
  }
  return clean;
}

bool BisimEngine::explore_opp(PairNode n, uint64_t bound, size_t depth) {
  ++stats_.nodes;
  stats_.max_depth = std::max<uint64_t>(stats_.max_depth, depth);
  if (timeout_hit()) return false;

  if (opts_.gc) {
    gc_node(n);
    if (opts_.memoization) dedup_gamma(n);
    // sigma is carried whole along the path: the canonical key restricts it
    // on its own, and a witness needs the full constraint to instantiate the
    // trace's symbolic constants
  }

  bool clean = true;

  if (!n.both_live()) {
    Config& live = n.live();
    bool left_side = !n.left.bottom;
    if (!live.is_opponent()) internal_error("bottom-paired node with a proponent live side");

    // a complete trace: the live side terminates, bottom cannot
    if (live.stack.empty()) {
      if (n.separated) {
        // the trace is local to a separation block, so it may not replay on
        // the whole programs; re-finding it without separation is the
        // caller's job
        pseudo_witness_ = true;
        return false;
      }
      trace_.push_back({Move{Move::K::Term, 0, -1, {}},
                        left_side ? TraceStep::Side::LeftOnly : TraceStep::Side::RightOnly});
      throw WitnessFound{n.sigma};
    }

    if (opts_.separation) {
      Separation sep = separate(n);
      if (sep.split) {
        ++stats_.sep_splits;
        explain("SEP split " + std::to_string(sep.blocks.size()) + " blocks (bottom)");
        for (size_t b = 0; b < sep.blocks.size(); ++b) {
          if (sep.self_discharged[b]) {
            ++stats_.sep_discharged;
            continue;
          }
          clean &= explore_opp(sep.blocks[b], bound, depth);
        }
        return clean;
      }
    }

    std::string key;
    if (opts_.memoization) {
      key = canonical_key(n);
      auto it = memo_.find(key);
      if (it != memo_.end()) {
        ++stats_.memo_hits;
        explain("MEMO hit " + std::to_string(std::hash<std::string>{}(key) % 0xffff));
        return it->second.closed ? it->second.clean : true;
      }
      memo_.emplace(key, MemoEntry{});
    }

    // opponent return into the live side
    {
      UlpattType pat = ulpatt_type(live.stack.back().hole_ty, gen_);
      PairNode child = n;
      Config& cl = left_side ? child.left : child.right;
      admit_pattern_names(pat, child.sigma, cl);
      cl = apply_op_ret(cl, pat);
      trace_.push_back({Move{Move::K::OpRet, 0, -1, pat.pattern},
                        left_side ? TraceStep::Side::LeftOnly : TraceStep::Side::RightOnly});
      clean &= explore_prop(std::move(child), bound, depth + 1);
      trace_.pop_back();
    }
    // opponent applications on the live side
    for (auto& [i, b] : live.gamma) {
      bool flagged = index_annotated(n, i);
      if (opts_.reentry && flagged) {
        bool active = false;
        for (auto& p : n.pending) active |= p.index == i;
        if (active) {
          ++stats_.reentry_skips;
          reentry_skip_used_[i] = true;
          explain("REENTRY skip " + std::to_string(i));
          continue;
        }
      }
      if (bound == 0) {
        poison(Reason::BoundExhausted);
        clean = false;
        continue;
      }
      PairNode child = n;
      if (opts_.annotations && flagged) {
        InvariantResult r = apply_invariant(child, i, InvariantPhase::OpAppEntry, solver_, gen_);
        if (r.outcome == InvariantOutcome::Applied) {
          ++stats_.inv_applied;
          explain("INV applied " + std::to_string(i));
        } else if (r.outcome == InvariantOutcome::Failed) {
          ++stats_.inv_failed;
          soft_reasons_.insert(Reason::InvariantFailed);
          explain("INV failed " + std::to_string(i) + ": " + r.detail);
        } else if (r.outcome == InvariantOutcome::Unknown) {
          soft_reasons_.insert(Reason::SolverUnknown);
        }
      }
      Config& cl = left_side ? child.left : child.right;
      auto* arrow = std::get_if<Type::Arrow>(&cl.gamma.at(i).ty->node);
      if (!arrow) internal_error("op-app on non-arrow");
      UlpattType pat = ulpatt_type(arrow->dom, gen_);
      admit_pattern_names(pat, child.sigma, cl);
      if (opts_.reentry && flagged)
        child.pending.push_back({i, cl.stack.size(), snapshot_key(child)});
      cl = apply_op_app(cl, i, pat);
      trace_.push_back({Move{Move::K::OpApp, 0, i, pat.pattern},
                        left_side ? TraceStep::Side::LeftOnly : TraceStep::Side::RightOnly});
      clean &= explore_prop(std::move(child), bound - 1, depth + 1);
      trace_.pop_back();
    }
    if (opts_.memoization) {
      auto& e = memo_[key];
      e.closed = true;
      e.clean = clean;
    }
    return clean;
  }

  // --- both sides live -------------------------------------------------------
  if (n.left.stack.size() != n.right.stack.size())
    internal_error("stack heights diverged between the two sides");
  if (!n.left.is_opponent() || !n.right.is_opponent())
    internal_error("explore_opp on non-opponent configurations");
  {
    std::set<int> dl, dr;
    for (auto& [i, b] : n.left.gamma) dl.insert(i);
    for (auto& [i, b] : n.right.gamma) dr.insert(i);
    if (dl != dr) internal_error("knowledge domains diverged between the two sides");
  }

  if (opts_.separation) {
    Separation sep = separate(n);
    if (sep.split) {
      ++stats_.sep_splits;
      explain("SEP split " + std::to_string(sep.blocks.size()) + " blocks");
      for (auto& block : sep.blocks) clean &= explore_opp(block, bound, depth);
      return clean;
    }
  }

  std::string key;
  if (opts_.memoization) {
    key = canonical_key(n);
    auto it = memo_.find(key);
    if (it != memo_.end()) {
      ++stats_.memo_hits;
      explain("MEMO hit " + std::to_string(std::hash<std::string>{}(key) % 0xffff));
      return it->second.closed ? it->second.clean : true;
    }
    memo_.emplace(key, MemoEntry{});
  }

  // Term when both stacks are empty: matched trivially, closes the path.
  // OpRet: both sides receive the same fresh pattern.
  if (!n.left.stack.empty()) {
    if (!type_equal(n.left.stack.back().hole_ty, n.right.stack.back().hole_ty))
      internal_error("continuation hole types diverged");
    UlpattType pat = ulpatt_type(n.left.stack.back().hole_ty, gen_);
    PairNode child = n;
    admit_pattern_names(pat, child.sigma, child.left);
    for (auto& [a, ty] : pat.alphas) child.right.alphas[a] = ty;
    child.left = apply_op_ret(child.left, pat);
    child.right = apply_op_ret(child.right, pat);
    trace_.push_back({Move{Move::K::OpRet, 0, -1, pat.pattern}, TraceStep::Side::Both});
    clean &= explore_prop(std::move(child), bound, depth + 1);
    trace_.pop_back();
  }

  for (auto& [i, bnd] : n.left.gamma) {
    if (!type_equal(bnd.ty, n.right.gamma.at(i).ty))
      internal_error("knowledge types diverged at a shared index");
    bool flagged = index_annotated(n, i);
    if (opts_.reentry && flagged) {
      bool active = false;
      for (auto& p : n.pending) active |= p.index == i;
      if (active) {
        ++stats_.reentry_skips;
        reentry_skip_used_[i] = true;
        explain("REENTRY skip " + std::to_string(i));
        continue;
      }
    }
    if (bound == 0) {
      poison(Reason::BoundExhausted);
      clean = false;
      continue;
    }
    PairNode child = n;
    if (opts_.annotations && flagged) {
      InvariantResult r = apply_invariant(child, i, InvariantPhase::OpAppEntry, solver_, gen_);
      if (r.outcome == InvariantOutcome::Applied) {
        ++stats_.inv_applied;
        explain("INV applied " + std::to_string(i));
      } else if (r.outcome == InvariantOutcome::Failed) {
        ++stats_.inv_failed;
        soft_reasons_.insert(Reason::InvariantFailed);
        explain("INV failed " + std::to_string(i) + ": " + r.detail);
      } else if (r.outcome == InvariantOutcome::Unknown) {
        soft_reasons_.insert(Reason::SolverUnknown);
      }
    }
    auto* arrow = std::get_if<Type::Arrow>(&child.left.gamma.at(i).ty->node);
    UlpattType pat = ulpatt_type(arrow->dom, gen_);
    admit_pattern_names(pat, child.sigma, child.left);
    for (auto& [a, ty] : pat.alphas) child.right.alphas[a] = ty;
    if (opts_.reentry && flagged)
      child.pending.push_back({i, child.left.stack.size(), snapshot_key(child)});
    child.left = apply_op_app(child.left, i, pat);
    child.right = apply_op_app(child.right, i, pat);
    trace_.push_back({Move{Move::K::OpApp, 0, i, pat.pattern}, TraceStep::Side::Both});
    clean &= explore_prop(std::move(child), bound - 1, depth + 1);
    trace_.pop_back();
  }

  if (opts_.memoization) {
    auto& e = memo_[key];
    e.closed = true;
    e.clean = clean;
  }
  return clean;
}

Verdict BisimEngine::check_equiv(const ProgramPair& pair) {
  pseudo_witness_ = false;
  deadline_ = std::chrono::steady_clock::now() +
              std::chrono::milliseconds(static_cast<int64_t>(opts_.timeout_seconds * 1000));
  gen_.reserve_locs_above(std::max(max_static_loc(pair.left), max_static_loc(pair.right)));
  PairNode root;
  root.left = initial_config(pair.left, pair.type);
  root.right = initial_config(pair.right, pair.type);

  Verdict v;
  try {
    bool clean = explore_prop(std::move(root), opts_.bound, 0);
    (void)clean;
  } catch (WitnessFound& w) {
    SatResult sr = solver_.sat_model(w.sigma);
    stats_.solver_queries = solver_.stats().external_queries + solver_.stats().cache_hits;
    if (!sr.is_sat() || !sr.model) {
      // the path constraint cannot be instantiated; the witness is unusable
      poison(Reason::SolverUnknown);
      v.k = Verdict::K::Inconclusive;
      v.reasons = reasons_;
      v.stats = stats_;
      return v;
    }
    v.k = Verdict::K::Inequivalent;
    v.witness = trace_;
    v.model = *sr.model;
    v.stats = stats_;
    v.stats.solver_queries = solver_.stats().external_queries + solver_.stats().cache_hits;
    if (!replay(pair, v.witness, v.model))
      internal_error("inequivalence witness failed replay validation");
    return v;
  }
  if (pseudo_witness_ && opts_.separation) {
    // a block-local complete trace was seen; hunt the genuine witness on the
    // unseparated game within the remaining time budget
    double remaining = std::chrono::duration<double>(deadline_ - std::chrono::steady_clock::now()).count();
    if (remaining > 0.05) {
      Options o2 = opts_;
      o2.separation = false;
      o2.timeout_seconds = remaining;
      BisimEngine second(o2, solver_);
      Verdict vr = second.check_equiv(pair);
      vr.stats.nodes += stats_.nodes;
      return vr;
    }
  }
  for (auto& [i, used] : reentry_skip_used_)
    if (used && reentry_check_failed_[i]) poison(Reason::ReentryViolated);
  stats_.solver_queries = solver_.stats().external_queries + solver_.stats().cache_hits;
  v.stats = stats_;
  if (reasons_.empty()) {
    v.k = Verdict::K::Equivalent;
  } else {
    v.k = Verdict::K::Inconclusive;
    v.reasons = reasons_;
    v.reasons.insert(soft_reasons_.begin(), soft_reasons_.end());
  }
  return v;
}

// --- replay ------------------------------------------------------------------------

namespace {

// Concretely drives one program along the witness; returns the number of
// steps survived (incl. Term as the final step).
size_t drive_side(const ExprPtr& program, const TypePtr& ty, const Trace& witness,
                  const Assignment& model, uint64_t fuel) {
  NameGen gen;
  gen.reserve_locs_above(max_static_loc(program));
  ConstraintEngine dummy("");  // concrete runs never branch
  Config c = initial_config(program, ty);
  size_t survived = 0;
  for (auto& step : witness) {
    // Every step is attempted on both programs: the survivor must follow the
    // entire trace, the other must fall off it somewhere.
    switch (step.move.k) {
      case Move::K::Term:
        if (c.is_opponent() && c.stack.empty()) ++survived;
        return survived;
      case Move::K::OpApp:
      case Move::K::OpRet: {
        if (!c.is_opponent()) return survived;
        ExprPtr val = instantiate(plug_pattern(step.move.pat, {}), model);
        UlpattType pat;
        pat.pattern = step.move.pat;
        pat.value = val;
        // collect the alphas the pattern introduces so types stay tracked
        for (AlphaId a : abstract_names(val)) {
          // types are read off the pattern literals
          std::function<TypePtr(const PatNode&)> find = [&](const PatNode& nd) -> TypePtr {
            if (nd.k == PatNode::K::Lit) {
              auto* an = std::get_if<Expr::AbsName>(&nd.lit->node);
              if (an && an->id == a) return an->ty;
            }
            for (auto& kid : nd.kids) {
              TypePtr t = find(kid);
              if (t) return t;
            }
            return nullptr;
          };
          TypePtr t = find(step.move.pat.root);
          if (t) pat.alphas.push_back({a, t});
        }
        if (step.move.k == Move::K::OpApp) {
          if (!c.gamma.count(step.move.index)) return survived;
          c = apply_op_app(c, step.move.index, pat);
        } else {
          if (c.stack.empty()) return survived;
          c = apply_op_ret(c, pat);
        }
        ++survived;
        break;
      }
      case Move::K::PropApp:
      case Move::K::PropRet: {
        if (!c.is_proponent()) return survived;
        // concrete reduction is deterministic: exactly one branch
        auto branches = reduce_to_interaction(SymEnv{}, c.store, c.ehat, fuel, gen, dummy);
        if (branches.size() != 1) return survived;
        auto& br = branches[0];
        if (br.k == InteractionBranch::K::Stuck || br.k == InteractionBranch::K::Fuel)
          return survived;
        // observable label comparison: skeletons with model-instantiated leaves
        std::function<bool(const PatNode&, const PatNode&)> same =
            [&](const PatNode& a, const PatNode& b) {
              if (a.k != b.k) return false;
              if (a.k == PatNode::K::Hole) return a.index == b.index;
              if (a.k == PatNode::K::Lit)
                return expr_equal(instantiate(a.lit, model), instantiate(b.lit, model));
              if (a.kids.size() != b.kids.size()) return false;
              for (size_t i = 0; i < a.kids.size(); ++i)
                if (!same(a.kids[i], b.kids[i])) return false;
              return true;
            };
        if (step.move.k == Move::K::PropRet) {
          if (br.k != InteractionBranch::K::Value) return survived;
          UlpattValue up = ulpatt_value(br.value, c.ehat_ty, c.next_gamma_index());
          if (!same(step.move.pat.root, up.pattern.root)) return survived;
          Config nc = c;
          nc.store = br.store;
          for (auto& [i, b] : up.bindings) nc.gamma[i] = b;
          nc.ehat = nullptr;
          nc.ehat_ty = nullptr;
          c = std::move(nc);
        } else {
          if (br.k != InteractionBranch::K::Call) return survived;
          if (br.alpha != step.move.alpha) return survived;
          auto* arrow = std::get_if<Type::Arrow>(&br.alpha_ty->node);
          UlpattValue up = ulpatt_value(br.arg, arrow->dom, c.next_gamma_index());
          if (!same(step.move.pat.root, up.pattern.root)) return survived;
          Config nc = c;
          nc.store = br.store;
          nc.stack.push_back(KFrame{br.ctx, arrow->cod, c.ehat_ty});
          for (auto& [i, b] : up.bindings) nc.gamma[i] = b;
          nc.ehat = nullptr;
          nc.ehat_ty = nullptr;
          c = std::move(nc);
        }
        ++survived;
        break;
      }
    }
  }
  return survived;
}

}  // namespace

bool replay(const ProgramPair& pair, const Trace& witness, const Assignment& model, uint64_t fuel) {
  if (witness.empty() || witness.back().move.k != Move::K::Term) return false;
  TraceStep::Side term_side = witness.back().side;
  if (term_side == TraceStep::Side::Both) return false;
  bool left_survives = term_side == TraceStep::Side::LeftOnly;
  size_t n = witness.size();
  size_t sl = drive_side(pair.left, pair.type, witness, model, fuel);
  size_t sr = drive_side(pair.right, pair.type, witness, model, fuel);
  size_t survivor = left_survives ? sl : sr;
  size_t loser = left_survives ? sr : sl;
  // the surviving side completes the whole trace; the other provably cannot
  return survivor == n && loser < n;
}

Verdict check_equiv(const ProgramPair& pair, const Options& opts, ExploreStats* stats_out) {
  Options o = opts;
  o.normalize();
  ConstraintEngine solver(o.solver_cmd, o.solver_cmd_is_default);
  BisimEngine engine(o, solver);
  Verdict v = engine.check_equiv(pair);
  if (stats_out) *stats_out = v.stats;
  return v;
}

}  // namespace ctxeq
