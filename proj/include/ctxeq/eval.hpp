#pragma once

#include "ctxeq/ast.hpp"
#include "ctxeq/solver.hpp"
#include "ctxeq/symenv.hpp"

namespace ctxeq {

using Store = std::map<LocId, ExprPtr>;  // all stored values are closed

// Single-hole evaluation context as a stack of frames, outermost first.
struct Frame {
  struct TupleF {
    std::vector<ExprPtr> done, pending;
  };
  struct ArithF {
    ArithOp op;
    std::vector<ExprPtr> done, pending;
  };
  struct AppFn {
    ExprPtr arg;
  };
  struct AppArg {
    ExprPtr fn;  // a value
  };
  struct AssignF {
    LocId loc;
  };
  struct CondF {
    ExprPtr then_e, else_e;
  };
  struct LetTupleF {
    std::vector<std::string> binders;
    ExprPtr body;
  };
  std::variant<TupleF, ArithF, AppFn, AppArg, AssignF, CondF, LetTupleF> f;
};

struct EvalCtx {
  std::vector<Frame> frames;
};

ExprPtr plug(const EvalCtx& ctx, ExprPtr e);

struct Decomposition {
  enum class K { AlreadyValue, StuckBot, Redex } k;
  EvalCtx ctx;    // Redex
  ExprPtr redex;  // Redex
};

// Unique decomposition e = E[r]; MalformedTerm errors surface as exceptions.
Decomposition decompose(const ExprPtr& e);

// Is the redex a call to an abstract name?  (App with AbsName head)
bool is_abs_call(const ExprPtr& redex);

// One concrete small step; nullopt when e is a value or StuckBot.
// Pre: no symbolic constants anywhere in flight.
std::optional<std::pair<Store, ExprPtr>> step_concrete(const Store& s, const ExprPtr& e, NameGen& gen);

struct SymBranch {
  SymEnv sigma;
  Store store;
  ExprPtr expr;
  bool unknown = false;  // a feasibility check came back unknown
};

// One symbolic step; set of successors (empty iff value or StuckBot).
std::vector<SymBranch> step_symbolic(const SymEnv& sigma, const Store& s, const ExprPtr& e,
                                     NameGen& gen, ConstraintEngine& solver);

struct InteractionBranch {
  enum class K { Value, Stuck, Call, Fuel, Unknown } k;
  SymEnv sigma;
  Store store;
  ExprPtr value;   // Value
  EvalCtx ctx;     // Call: the context around the abstract call
  AlphaId alpha = 0;
  TypePtr alpha_ty;  // Call: the callee's arrow type
  ExprPtr arg;       // Call
  uint64_t taus = 0; // internal steps consumed
};

// Runs tau steps until a value, a stuck Bot, a call to an abstract name, or
// fuel exhaustion; one result per symbolic branch.
std::vector<InteractionBranch> reduce_to_interaction(const SymEnv& sigma, const Store& s,
                                                     const ExprPtr& e, uint64_t fuel, NameGen& gen,
                                                     ConstraintEngine& solver);

}  // namespace ctxeq
