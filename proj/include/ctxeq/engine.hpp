#pragma once

#include <chrono>
#include <set>
#include <unordered_map>

#include "ctxeq/parser.hpp"
#include "ctxeq/solver.hpp"
#include "ctxeq/upto.hpp"

namespace ctxeq {

struct Options {
  uint64_t bound = 6;           // function-call moves per path
  double timeout_seconds = 150.0;
  bool separation = true;
  bool annotations = true;      // state invariants
  bool reentry = true;
  bool all_upto = true;
  bool memoization = true;      // internal: canonical-key closure
  bool gc = true;               // internal: garbage collection
  uint64_t fuel = 10000;        // tau steps per interaction segment
  std::string solver_cmd = "z3 -in";
  bool solver_cmd_is_default = true;
  bool explain = false;

  // Enforces flag implications: annotations off turns re-entry off; the
  // master switch turns everything off.
  void normalize() {
    if (!all_upto) {
      separation = false;
      annotations = false;
      reentry = false;
      memoization = false;
      gc = false;
    }
    if (!annotations) reentry = false;
  }
};

enum class Reason { BoundExhausted, FuelExhausted, SolverUnknown, ReentryViolated, InvariantFailed };
const char* reason_name(Reason r);

struct TraceStep {
  Move move;
  enum class Side { Both, LeftOnly, RightOnly } side = Side::Both;
};
using Trace = std::vector<TraceStep>;

std::string trace_to_string(const Trace& t);

struct ExploreStats {
  uint64_t nodes = 0;
  uint64_t memo_hits = 0;
  uint64_t solver_queries = 0;
  uint64_t max_depth = 0;
  uint64_t sep_splits = 0;
  uint64_t sep_discharged = 0;
  uint64_t reentry_skips = 0;
  uint64_t inv_applied = 0;
  uint64_t inv_failed = 0;
  uint64_t taus_collapsed = 0;
};

struct Verdict {
  enum class K { Equivalent, Inequivalent, Inconclusive } k;
  Trace witness;       // Inequivalent
  Assignment model;    // Inequivalent
  std::set<Reason> reasons;  // Inconclusive
  ExploreStats stats;
};

// Drives one side concretely along a witness; used to validate Inequivalent
// verdicts independently of the symbolic exploration.
bool replay(const ProgramPair& pair, const Trace& witness, const Assignment& model,
            uint64_t fuel = 100000);

class BisimEngine {
public:
  BisimEngine(Options opts, ConstraintEngine& solver) : opts_(opts), solver_(solver) {
    opts_.normalize();
  }

  Verdict check_equiv(const ProgramPair& pair);

private:
  struct WitnessFound {
    SymEnv sigma;
  };
  struct MemoEntry {
    bool closed = false;
    bool clean = true;
  };

  bool explore_prop(PairNode n, uint64_t bound, size_t depth);
  bool explore_opp(PairNode n, uint64_t bound, size_t depth);
  bool timeout_hit();
  void poison(Reason r);
  void explain(const std::string& line);

  // helpers shared between the live-live and bottom cases
  bool child_after_ret(PairNode base, bool left_side, const InteractionBranch& br, uint64_t bound,
                       size_t depth, bool other_bottom);
  bool child_after_call(PairNode base, bool left_side, const InteractionBranch& br, uint64_t bound,
                        size_t depth, bool other_bottom);
  bool handle_completion(PairNode& child);  // invariant exit phase + re-entry validation

  Options opts_;
  ConstraintEngine& solver_;
  ExploreStats stats_;
  std::set<Reason> reasons_;
  std::set<Reason> soft_reasons_;  // attached only when the verdict is inconclusive
  Trace trace_;
  std::unordered_map<std::string, MemoEntry> memo_;
  std::map<int, bool> reentry_skip_used_;
  bool pseudo_witness_ = false;
  std::map<int, bool> reentry_check_failed_;
  std::chrono::steady_clock::time_point deadline_;
  bool timed_out_ = false;
  NameGen gen_;
};

// Convenience wrapper: builds the solver facade from the options.
Verdict check_equiv(const ProgramPair& pair, const Options& opts, ExploreStats* stats_out = nullptr);

}  // namespace ctxeq
