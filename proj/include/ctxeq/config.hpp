#pragma once

#include "ctxeq/eval.hpp"

namespace ctxeq {

// Knowledge environment entry: a proponent value with its type.
struct Binding {
  ExprPtr value;
  TypePtr ty;
};

// Stack frame: a pushed continuation with the type expected in its hole and
// the type the filled context evaluates to.
struct KFrame {
  EvalCtx ctx;
  TypePtr hole_ty;
  TypePtr result_ty;
};

// LTS configuration <A; Gamma; K; s; e^>, or the bottom sink.
struct Config {
  bool bottom = false;
  std::map<AlphaId, TypePtr> alphas;
  std::map<int, Binding> gamma;
  std::vector<KFrame> stack;  // back() is the innermost continuation
  Store store;
  ExprPtr ehat;  // null in opponent configurations
  TypePtr ehat_ty;

  bool is_proponent() const { return !bottom && ehat != nullptr; }
  bool is_opponent() const { return !bottom && ehat == nullptr; }
  int next_gamma_index() const { return gamma.empty() ? 0 : gamma.rbegin()->first + 1; }
};

Config initial_config(const ExprPtr& program, const TypePtr& ty);
Config bottom_config();

// Value context with numbered holes; the ultimate-pattern skeleton.
struct PatNode {
  enum class K { Hole, Lit, Tup } k;
  int index = -1;                // Hole: knowledge-environment index
  TypePtr ty;                    // Hole: its (arrow) type
  ExprPtr lit;                   // Lit: Const | SymConst | AbsName
  std::vector<PatNode> kids;     // Tup
};

struct Pattern {
  PatNode root;
};

struct UlpattValue {
  Pattern pattern;
  std::vector<std::pair<int, Binding>> bindings;  // hole index -> function value
};

// Canonical member of ulpatt(v): functions become holes numbered from
// next_index left to right; constants, symbolic constants and abstract names
// stay verbatim.
UlpattValue ulpatt_value(const ExprPtr& v, const TypePtr& ty, int next_index);

struct UlpattType {
  Pattern pattern;  // no holes: leaves are fresh alphas / kappas / ()
  ExprPtr value;    // the pattern as a value
  std::vector<std::pair<AlphaId, TypePtr>> alphas;
  std::vector<std::pair<KappaId, BaseTy>> kappas;
};

// Canonical opponent pattern for a type: arrows produce fresh abstract
// names, int/bool leaves fresh symbolic constants, unit the unit value.
UlpattType ulpatt_type(const TypePtr& ty, NameGen& gen);

// Reconstruction: plug bindings (and literal leaves) back into a value.
ExprPtr plug_pattern(const Pattern& p, const std::map<int, Binding>& bindings);

bool pattern_equal(const Pattern& a, const Pattern& b);
std::string pattern_to_string(const Pattern& p);

struct Move {
  enum class K { PropApp, PropRet, OpApp, OpRet, Term } k;
  AlphaId alpha = 0;  // PropApp
  int index = -1;     // OpApp
  Pattern pat;
};

std::string move_to_string(const Move& m);

// Structural comparison of two proponent patterns: either the skeletons
// disagree (whole-move mismatch) or they agree up to first-order leaves,
// returned as pairs for equality/disequality branching.
struct PatternMatch {
  bool skeleton_match = false;
  std::vector<std::pair<ExprPtr, ExprPtr>> leaves;  // base-type leaf pairs, not syntactically equal
};
PatternMatch match_patterns(const Pattern& left, const Pattern& right);

// --- single-configuration transitions (tests, replay driving) ---------------

struct PropMove {
  Move move;
  SymEnv sigma;
  Config config;
  uint64_t taus = 0;
};

// Enumerates proponent moves of a proponent configuration (Stuck and Fuel
// branches are silent and omitted; use reduce_to_interaction for those).
std::vector<PropMove> proponent_moves(const SymEnv& sigma, const Config& c, uint64_t fuel,
                                      NameGen& gen, ConstraintEngine& solver);

struct OpMove {
  Move move;
  SymEnv sigma;
  Config config;
};

// Enumerates opponent moves: one OpApp per index, OpRet when the stack is
// nonempty, Term when it is empty.
std::vector<OpMove> opponent_moves(const SymEnv& sigma, const Config& c, NameGen& gen);

// Applies an already-generated opponent pattern to a configuration (the
// engine feeds the same fresh names to both sides).
Config apply_op_app(const Config& c, int index, const UlpattType& pat);
Config apply_op_ret(const Config& c, const UlpattType& pat);

// Registers the pattern's fresh names into sigma/config A.
void admit_pattern_names(const UlpattType& pat, SymEnv& sigma, Config& c);

bool wellformed(const Config& c);

}  // namespace ctxeq
