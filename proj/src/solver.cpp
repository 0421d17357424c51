#include "ctxeq/solver.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <iostream>

#include "ctxeq/lia.hpp"
#include "ctxeq/smtlib.hpp"

namespace ctxeq {

// --- internal backend ---------------------------------------------------------

namespace {

// Functionally defined kappas are inlined before the query reaches the
// decision procedure: sat(exists k. k = e /\ phi) = sat(phi[e/k]). What
// remains is a set of boolean facts over the free kappas.
struct InlinedQuery {
  std::vector<std::pair<KappaId, ExprPtr>> defs;  // inlined, in order
  std::vector<ExprPtr> facts;
  std::map<KappaId, BaseTy> free_decls;
};

InlinedQuery inline_definitions(const SymEnv& sigma, const std::vector<ExprPtr>& extra) {
  InlinedQuery out;
  std::map<KappaId, ExprPtr> defs;
  std::set<KappaId> seen;  // kappas already emitted free somewhere
  for (auto& atom : sigma.atoms) {
    ExprPtr rhs = subst_kappas(atom.rhs, defs);
    auto it = defs.find(atom.lhs);
    std::set<KappaId> rhs_ks = sym_consts(rhs);
    if (it == defs.end() && atom.equal && !rhs_ks.count(atom.lhs) && !seen.count(atom.lhs)) {
      defs.emplace(atom.lhs, rhs);
      out.defs.push_back({atom.lhs, rhs});
      seen.insert(rhs_ks.begin(), rhs_ks.end());
      continue;
    }
    seen.insert(rhs_ks.begin(), rhs_ks.end());
    if (it == defs.end()) seen.insert(atom.lhs);
    ExprPtr lhs = it != defs.end()
                      ? it->second
                      : mk_symconst(atom.lhs, sigma.decls.count(atom.lhs) ? sigma.decls.at(atom.lhs)
                                                                          : BaseTy::Int);
    ExprPtr eq = mk_arith(ArithOp::Eq, {lhs, rhs});
    out.facts.push_back(atom.equal ? eq : mk_arith(ArithOp::Not, {eq}));
  }
  for (auto& e : extra) out.facts.push_back(subst_kappas(e, defs));
  for (auto& [k, ty] : sigma.decls)
    if (!defs.count(k)) out.free_decls.emplace(k, ty);
  return out;
}

class InternalBackend : public SolverBackend {
public:
  SatResult check(const SymEnv& sigma, const std::vector<ExprPtr>& extra, bool want_model) override {
    InlinedQuery iq = inline_definitions(sigma, extra);
    SymEnv core;
    core.decls = iq.free_decls;
    lia::Solver s;
    lia::Compilation q;
    try {
      q = lia::compile_query(core, iq.facts, s);
    } catch (const lia::Unsupported&) {
      return {SatResult::K::Unknown, std::nullopt, "nonlinear or unsupported term"};
    }
    lia::Result r = s.check(q.formula);
    if (r == lia::Result::Unsat) return {SatResult::K::Unsat, std::nullopt, ""};
    if (r == lia::Result::Unknown) return {SatResult::K::Unknown, std::nullopt, "budget exceeded"};
    SatResult out{SatResult::K::Sat, std::nullopt, ""};
    if (want_model) {
      auto m = s.get_model(q.formula);
      if (m) {
        Assignment a;
        for (auto& [k, ty] : iq.free_decls) {
          if (ty == BaseTy::Int) {
            auto it = m->ints.find(k);
            a.values[k] = const_int(it != m->ints.end() ? it->second : BigInt(0));
          } else if (ty == BaseTy::Bool) {
            auto it = m->bools.find(k);
            a.values[k] = const_bool(it != m->bools.end() && it->second);
          } else {
            a.values[k] = const_unit();
          }
        }
        // defined kappas take their computed values under the model
        for (auto& [k, def] : iq.defs) {
          auto v = eval_ground(def, a);
          auto ty = sigma.decls.count(k) ? sigma.decls.at(k) : BaseTy::Int;
          if (v) {
            a.values[k] = *v;
          } else {
            a.values[k] = ty == BaseTy::Int    ? const_int(BigInt(0))
                          : ty == BaseTy::Bool ? const_bool(false)
                                               : const_unit();
          }
        }
        for (auto& [k, ty] : sigma.decls) {
          if (a.values.count(k)) continue;
          a.values[k] = ty == BaseTy::Int    ? const_int(BigInt(0))
                        : ty == BaseTy::Bool ? const_bool(false)
                                             : const_unit();
        }
        out.model = std::move(a);
      }
    }
    return out;
  }
  std::string name() const override { return "internal-lia"; }
};

// --- external process backend ---------------------------------------------------

class ProcessBackend : public SolverBackend {
public:
  static std::unique_ptr<ProcessBackend> spawn(const std::string& command) {
    auto b = std::unique_ptr<ProcessBackend>(new ProcessBackend());
    if (!b->start(command)) return nullptr;
    return b;
  }

  ~ProcessBackend() override {
    if (pid_ > 0) {
      write_all("(exit)\n");
      close(in_fd_);
      close(out_fd_);
      int status = 0;
      waitpid(pid_, &status, WNOHANG);
      kill(pid_, SIGTERM);
      waitpid(pid_, &status, 0);
    }
  }

  SatResult check(const SymEnv& sigma, const std::vector<ExprPtr>& extra, bool want_model) override {
    if (dead_) return {SatResult::K::Unknown, std::nullopt, "solver process unavailable"};
    std::string q = "(push 1)\n" + smtlib_query_text(sigma, extra) + "(check-sat)\n";
    if (!write_all(q)) return fail("write failed");
    std::string verdict;
    for (;;) {
      std::string line;
      if (!read_line(line, 60000)) return fail("no response to check-sat");
      if (line == "sat" || line == "unsat" || line == "unknown") {
        verdict = line;
        break;
      }
      // diagnostics such as (error ...) are skipped; a real protocol break
      // surfaces as a read timeout above
    }
    SatResult out{SatResult::K::Unknown, std::nullopt, ""};
    if (verdict == "sat") out.k = SatResult::K::Sat;
    if (verdict == "unsat") out.k = SatResult::K::Unsat;
    if (verdict == "unknown") out.reason = "solver returned unknown";
    if (out.k == SatResult::K::Sat && want_model) {
      if (!write_all("(get-model)\n")) return fail("write failed");
      std::string sexp_text;
      if (!read_balanced(sexp_text, 60000)) return fail("bad get-model response");
      size_t pos = 0;
      Sexp s;
      if (parse_sexp(sexp_text, pos, s)) {
        Assignment a = parse_model_sexp(s);
        // Fill any kappa the solver left out (unconstrained).
        for (auto& [k, ty] : sigma.decls) {
          if (a.values.count(k)) continue;
          a.values[k] = ty == BaseTy::Int    ? const_int(BigInt(0))
                        : ty == BaseTy::Bool ? const_bool(false)
                                             : const_unit();
        }
        out.model = std::move(a);
      }
    }
    if (!write_all("(pop 1)\n")) return fail("write failed");
    return out;
  }

  std::string name() const override { return "smtlib-process"; }

private:
  ProcessBackend() = default;

  SatResult fail(const char* why) {
    dead_ = true;
    return {SatResult::K::Unknown, std::nullopt, why};
  }

  bool start(const std::string& command) {
    signal(SIGPIPE, SIG_IGN);
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) return false;
    pid_ = fork();
    if (pid_ < 0) return false;
    if (pid_ == 0) {
      dup2(to_child[0], 0);
      dup2(from_child[1], 1);
      dup2(from_child[1], 2);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", command.c_str(), (char*)nullptr);
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];
    // handshake: solvers echo the string back
    if (!write_all("(set-logic QF_LIA)\n(echo \"ctxeq-ready\")\n")) return false;
    for (;;) {
      std::string line;
      if (!read_line(line, 5000)) return false;
      if (line.find("ctxeq-ready") != std::string::npos) return true;
      if (line.rfind("(error", 0) == 0) continue;  // set-logic complaints are tolerable
    }
  }

  bool write_all(const std::string& s) {
    size_t off = 0;
    while (off < s.size()) {
      ssize_t n = ::write(in_fd_, s.data() + off, s.size() - off);
      if (n <= 0) {
        dead_ = true;
        return false;
      }
      off += static_cast<size_t>(n);
    }
    return true;
  }

  bool fill_buffer(int timeout_ms) {
    struct pollfd p {
      out_fd_, POLLIN, 0
    };
    int pr = poll(&p, 1, timeout_ms);
    if (pr <= 0) return false;
    char buf[4096];
    ssize_t n = ::read(out_fd_, buf, sizeof buf);
    if (n <= 0) {
      dead_ = true;
      return false;
    }
    rbuf_.append(buf, static_cast<size_t>(n));
    return true;
  }

  bool read_line(std::string& line, int timeout_ms) {
    for (;;) {
      size_t nl = rbuf_.find('\n');
      if (nl != std::string::npos) {
        line = rbuf_.substr(0, nl);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        rbuf_.erase(0, nl + 1);
        return true;
      }
      if (!fill_buffer(timeout_ms)) return false;
    }
  }

  // Reads until parentheses balance (a full s-expression).
  bool read_balanced(std::string& out, int timeout_ms) {
    out.clear();
    int depth = 0;
    bool seen_open = false;
    size_t scanned = 0;
    for (;;) {
      for (; scanned < rbuf_.size(); ++scanned) {
        char c = rbuf_[scanned];
        if (c == '(') {
          ++depth;
          seen_open = true;
        } else if (c == ')') {
          --depth;
        }
        if (seen_open && depth == 0) {
          out = rbuf_.substr(0, scanned + 1);
          rbuf_.erase(0, scanned + 1);
          return true;
        }
      }
      if (!fill_buffer(timeout_ms)) return false;
    }
  }

  pid_t pid_ = -1;
  int in_fd_ = -1, out_fd_ = -1;
  std::string rbuf_;
  bool dead_ = false;
};

}  // namespace

std::unique_ptr<SolverBackend> make_internal_backend() { return std::make_unique<InternalBackend>(); }

std::unique_ptr<SolverBackend> make_process_backend(const std::string& command) {
  return ProcessBackend::spawn(command);
}

// --- facade -------------------------------------------------------------------

ConstraintEngine::ConstraintEngine(const std::string& command, bool command_is_default) {
  if (command.empty()) {
    backend_ = make_internal_backend();
    return;
  }
  backend_ = make_process_backend(command);
  if (!backend_) {
    if (command_is_default) {
      backend_ = make_internal_backend();
    } else {
      std::cerr << "ctxeq: could not start solver '" << command << "'; queries become Unknown\n";
    }
  }
}

SatResult ConstraintEngine::sat_with(const SymEnv& sigma, const std::vector<ExprPtr>& extra,
                                     bool want_model) {
  ++stats_.queries;
  // Ground fast path: no atoms and fully concrete extras.
  if (sigma.atoms.empty()) {
    bool ground = true, value = true, total = true;
    Assignment empty;
    for (auto& e : extra) {
      if (!sym_consts(e).empty()) {
        ground = false;
        break;
      }
      auto v = eval_ground(e, empty);
      if (!v) {
        total = false;
        break;
      }
      value = value && v->is_bool() && v->as_bool();
    }
    if (ground && total) {
      if (!value) return {SatResult::K::Unsat, std::nullopt, ""};
      SatResult r{SatResult::K::Sat, std::nullopt, ""};
      if (want_model) {
        Assignment a;
        for (auto& [k, ty] : sigma.decls)
          a.values[k] = ty == BaseTy::Int    ? const_int(BigInt(0))
                        : ty == BaseTy::Bool ? const_bool(false)
                                             : const_unit();
        r.model = std::move(a);
      }
      return r;
    }
  }
  if (!backend_) return {SatResult::K::Unknown, std::nullopt, "no solver backend"};
  std::string key = smtlib_query_text(sigma, extra);
  auto it = cache_.find(key);
  if (it != cache_.end() && (!want_model || it->second.model || !it->second.is_sat())) {
    ++stats_.cache_hits;
    return it->second;
  }
  ++stats_.external_queries;
  SatResult r = backend_->check(sigma, extra, want_model);
  if (!r.is_unknown()) cache_[key] = r;
  return r;
}

Entailment ConstraintEngine::entails(const SymEnv& sigma, const ExprPtr& phi) {
  SatResult neg = sat_with(sigma, {mk_arith(ArithOp::Not, {phi})}, false);
  if (neg.is_unknown()) return Entailment::Unknown;
  if (!neg.is_unsat()) return Entailment::No;
  SatResult pos = sat_with(sigma, {phi}, false);
  if (pos.is_unknown()) return Entailment::Unknown;
  return pos.is_sat() ? Entailment::Yes : Entailment::No;
}

// --- sigma normalization ---------------------------------------------------------

namespace {
std::set<KappaId> reachable_kappas(const SymEnv& sigma, const std::vector<KappaId>& live) {
  std::set<KappaId> reach(live.begin(), live.end());
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& atom : sigma.atoms) {
      std::set<KappaId> ks = sym_consts(atom.rhs);
      ks.insert(atom.lhs);
      bool touches = false;
      for (KappaId k : ks)
        if (reach.count(k)) {
          touches = true;
          break;
        }
      if (!touches) continue;
      for (KappaId k : ks) changed |= reach.insert(k).second;
    }
  }
  return reach;
}

ExprPtr rename_kappas(const ExprPtr& e, const std::map<KappaId, KappaId>& ren);

ExprPtr rename_kappas(const ExprPtr& e, const std::map<KappaId, KappaId>& ren) {
  if (auto* k = std::get_if<Expr::SymConst>(&e->node)) {
    auto it = ren.find(k->id);
    return it == ren.end() ? e : mk_symconst(it->second, k->ty);
  }
  Assignment dummy;
  // reuse instantiate's traversal shape via a local recursion
  struct R {
    const std::map<KappaId, KappaId>& ren;
    ExprPtr run(const ExprPtr& e) {
      if (auto* k = std::get_if<Expr::SymConst>(&e->node)) {
        auto it = ren.find(k->id);
        return it == ren.end() ? e : mk_symconst(it->second, k->ty);
      }
      if (auto* a = std::get_if<Expr::Arith>(&e->node)) {
        std::vector<ExprPtr> args;
        bool changed = false;
        for (auto& arg : a->args) {
          args.push_back(run(arg));
          changed |= args.back() != arg;
        }
        return changed ? mk_arith(a->op, std::move(args), e->span) : e;
      }
      if (auto* t = std::get_if<Expr::Tuple>(&e->node)) {
        std::vector<ExprPtr> elems;
        bool changed = false;
        for (auto& el : t->elems) {
          elems.push_back(run(el));
          changed |= elems.back() != el;
        }
        return changed ? mk_tuple(std::move(elems), e->span) : e;
      }
      return e;  // sigma atoms are first-order
    }
  } r{ren};
  return r.run(e);
}
}  // namespace

SymEnv restrict_sigma(const SymEnv& sigma, const std::vector<KappaId>& live) {
  std::set<KappaId> reach = reachable_kappas(sigma, live);
  SymEnv out;
  for (auto& atom : sigma.atoms) {
    if (!reach.count(atom.lhs)) continue;
    out.atoms.push_back(atom);
  }
  for (auto& [k, ty] : sigma.decls)
    if (reach.count(k)) out.decls.emplace(k, ty);
  for (KappaId k : live) {
    auto it = sigma.decls.find(k);
    if (it != sigma.decls.end()) out.decls.emplace(k, it->second);
  }
  return out;
}

SigmaKeyForm sigma_key_form(const SymEnv& sigma, const std::set<KappaId>& live_roots) {
  SymEnv restricted =
      restrict_sigma(sigma, std::vector<KappaId>(live_roots.begin(), live_roots.end()));
  SigmaKeyForm out;
  std::map<KappaId, ExprPtr> defs;   // eliminated kappas -> their definitions
  std::set<KappaId> emitted_free;    // kappas already emitted into atoms/facts
  std::set<std::string> seen;        // duplicate suppression on rendered form

  auto fold_fact = [](ExprPtr lhs_def, const ExprPtr& rhs, bool equal) -> ExprPtr {
    // (e = true) -> e ; (e = false) -> not e ; else a plain (dis)equality
    if (auto* c = std::get_if<Expr::Const>(&rhs->node); c && c->c.is_bool()) {
      bool want = c->c.as_bool() == equal;
      return want ? lhs_def : mk_arith(ArithOp::Not, {lhs_def});
    }
    ExprPtr eq = mk_arith(ArithOp::Eq, {lhs_def, rhs});
    return equal ? eq : mk_arith(ArithOp::Not, {eq});
  };

  for (auto& atom : restricted.atoms) {
    ExprPtr rhs = subst_kappas(atom.rhs, defs);
    std::set<KappaId> rhs_ks = sym_consts(rhs);
    auto def_it = defs.find(atom.lhs);
    if (def_it != defs.end()) {
      out.facts.push_back(fold_fact(def_it->second, rhs, atom.equal));
      emitted_free.insert(rhs_ks.begin(), rhs_ks.end());
      continue;
    }
    bool eliminable = atom.equal && !live_roots.count(atom.lhs) && !rhs_ks.count(atom.lhs) &&
                      !emitted_free.count(atom.lhs);
    emitted_free.insert(rhs_ks.begin(), rhs_ks.end());
    if (eliminable) {
      defs.emplace(atom.lhs, rhs);
      continue;
    }
    emitted_free.insert(atom.lhs);
    out.atoms.push_back({atom.lhs, atom.equal, rhs});
  }

  // drop disequalities whose kappa is dead, integer-typed and otherwise
  // unconstrained: over an infinite domain they are always satisfiable
  std::set<KappaId> mentioned;
  for (auto& a : out.atoms) {
    for (KappaId k : sym_consts(a.rhs)) mentioned.insert(k);
  }
  for (auto& f : out.facts)
    for (KappaId k : sym_consts(f)) mentioned.insert(k);
  std::map<KappaId, int> lhs_count;
  for (auto& a : out.atoms) ++lhs_count[a.lhs];
  std::vector<Atom> kept;
  for (auto& a : out.atoms) {
    bool dead_free_ne = !a.equal && !live_roots.count(a.lhs) && !mentioned.count(a.lhs) &&
                        lhs_count[a.lhs] == 1 &&
                        restricted.decls.count(a.lhs) &&
                        restricted.decls.at(a.lhs) == BaseTy::Int;
    if (!dead_free_ne) kept.push_back(a);
  }
  out.atoms = std::move(kept);

  // exact-duplicate suppression, stable order
  std::vector<Atom> atoms2;
  for (auto& a : out.atoms) {
    std::string r = std::to_string(a.lhs) + (a.equal ? "=" : "#") + expr_to_string(a.rhs);
    if (seen.insert(r).second) atoms2.push_back(a);
  }
  out.atoms = std::move(atoms2);
  std::vector<ExprPtr> facts2;
  for (auto& f : out.facts) {
    std::string r = expr_to_string(f);
    if (seen.insert("F" + r).second) facts2.push_back(f);
  }
  out.facts = std::move(facts2);
  return out;
}

SymEnv normalize_sigma(const SymEnv& sigma, const std::vector<KappaId>& live,
                       std::map<KappaId, KappaId>* renaming_out) {
  SymEnv restricted = restrict_sigma(sigma, live);
  std::map<KappaId, KappaId> ren;
  KappaId next = 0;
  auto assign = [&](KappaId k) {
    if (!ren.count(k)) ren[k] = next++;
  };
  for (KappaId k : live)
    if (restricted.decls.count(k)) assign(k);
  for (auto& atom : restricted.atoms) {
    assign(atom.lhs);
    for (KappaId k : sym_consts(atom.rhs)) assign(k);
  }
  SymEnv out;
  for (auto& atom : restricted.atoms)
    out.atoms.push_back({ren[atom.lhs], atom.equal, rename_kappas(atom.rhs, ren)});
  for (auto& [k, ty] : restricted.decls) out.decls.emplace(ren[k], ty);
  if (renaming_out) *renaming_out = std::move(ren);
  return out;
}

}  // namespace ctxeq
