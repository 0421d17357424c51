#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctxeq/symenv.hpp"

namespace ctxeq {

struct SatResult {
  enum class K { Sat, Unsat, Unknown } k;
  std::optional<Assignment> model;  // may accompany Sat
  std::string reason;               // for Unknown

  bool is_sat() const { return k == K::Sat; }
  bool is_unsat() const { return k == K::Unsat; }
  bool is_unknown() const { return k == K::Unknown; }
};

enum class Entailment { Yes, No, Unknown };

struct SolverStats {
  uint64_t queries = 0;
  uint64_t cache_hits = 0;
  uint64_t external_queries = 0;
};

// Satisfiability backend interface.
class SolverBackend {
public:
  virtual ~SolverBackend() = default;
  virtual SatResult check(const SymEnv& sigma, const std::vector<ExprPtr>& extra, bool want_model) = 0;
  virtual std::string name() const = 0;
};

// Built-in Cooper-based LIA procedure; used when no external solver runs.
std::unique_ptr<SolverBackend> make_internal_backend();

// External SMT-LIB v2 process (default `z3 -in`). Spawning may fail; the
// factory returns null in that case.
std::unique_ptr<SolverBackend> make_process_backend(const std::string& command);

// Facade over a backend: caching, ground fast path, entailment, sigma
// normalization and garbage collection.
class ConstraintEngine {
public:
  // command empty -> internal backend. If `command_is_default`, a failed
  // spawn silently falls back to the internal backend; otherwise queries
  // return Unknown.
  explicit ConstraintEngine(const std::string& command = "", bool command_is_default = true);

  SatResult sat(const SymEnv& sigma) { return sat_with(sigma, {}, false); }
  SatResult sat_model(const SymEnv& sigma) { return sat_with(sigma, {}, true); }
  SatResult sat_with(const SymEnv& sigma, const std::vector<ExprPtr>& extra, bool want_model);

  // entails(sigma, phi): sat(sigma /\ not phi) unsat and sat(sigma /\ phi) sat.
  Entailment entails(const SymEnv& sigma, const ExprPtr& phi);

  SolverStats& stats() { return stats_; }
  std::string backend_name() const { return backend_ ? backend_->name() : "none"; }

private:
  std::unique_ptr<SolverBackend> backend_;
  std::unordered_map<std::string, SatResult> cache_;
  SolverStats stats_;
};

// Drops sigma atoms unreachable from `live` through the atom dependency
// graph and renames the survivors by first occurrence (live order first).
// Returns the renamed environment and the renaming used.
SymEnv normalize_sigma(const SymEnv& sigma, const std::vector<KappaId>& live,
                       std::map<KappaId, KappaId>* renaming_out = nullptr);

// Same reachability restriction without renaming; safe to substitute for
// sigma on a path whose configurations reference only `live` kappas.
SymEnv restrict_sigma(const SymEnv& sigma, const std::vector<KappaId>& live);

// Canonical logical form of sigma for keying: functionally defined dead
// kappas are inlined away, boolean handles are folded into facts, and exact
// duplicates are dropped. Equisatisfiable with the restriction of sigma.
struct SigmaKeyForm {
  std::vector<Atom> atoms;      // over kappas that could not be eliminated
  std::vector<ExprPtr> facts;   // boolean consequences, first occurrence order
};
SigmaKeyForm sigma_key_form(const SymEnv& sigma, const std::set<KappaId>& live_roots);

}  // namespace ctxeq
