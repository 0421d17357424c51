#pragma once

#include "ctxeq/ast.hpp"

namespace ctxeq {

// Monomorphic type inference by unification. Lambdas carry no annotations in
// the surface syntax, so checking is inference with an expected-type mode:
// Bot and conditional branches unify against whatever the context demands.
class TypeChecker {
public:
  // Infers the type of e under the given environments. Fails on a type clash
  // or, when `require_ground`, on a type that inference cannot pin down.
  TypePtr typecheck(const TypeEnv& env, const StoreTyping& store, const ExprPtr& e,
                    bool require_ground = true);

  // Joint typing of a program pair: both sides are inferred in one unifier
  // state, their types unified, and any residual type variables defaulted to
  // int. Returns the common ground type.
  TypePtr typecheck_pair(const ExprPtr& left, const ExprPtr& right);

  struct ITy;  // inference types; public for the implementation's free helpers
  using ITyPtr = std::shared_ptr<ITy>;

private:

  ITyPtr fresh_var();
  ITyPtr from_type(const TypePtr& t);
  ITyPtr find(ITyPtr t);
  void unify(ITyPtr a, ITyPtr b, Span sp);
  bool occurs(const ITy* var, ITyPtr t);
  ITyPtr infer(std::map<std::string, ITyPtr>& env, const StoreTyping& store,
               std::map<LocId, ITyPtr>& locs, const ExprPtr& e);
  TypePtr resolve(ITyPtr t, bool default_int, Span sp);

  std::vector<ITyPtr> vars_;
};

// Convenience wrapper for the common closed-expression case.
TypePtr typecheck(const ExprPtr& e);

}  // namespace ctxeq
