#include <doctest.h>

#include "ctxeq/ast.hpp"
#include "ctxeq/parser.hpp"
#include "ctxeq/typecheck.hpp"

using namespace ctxeq;

TEST_CASE("substitution basics") {
  NameGen gen;
  // (x + 1){2/x} = 2 + 1
  ExprPtr e = mk_arith(ArithOp::Add, {mk_var("x"), mk_int(1)});
  ExprPtr r = subst(e, "x", mk_int(2));
  CHECK(expr_equal(r, mk_arith(ArithOp::Add, {mk_int(2), mk_int(1)})));

  // (fun y -> x){(fun z -> z)/x} = fun y -> fun z -> z
  ExprPtr lam = mk_lambda(std::nullopt, "y", nullptr, mk_var("x"));
  ExprPtr id = mk_lambda(std::nullopt, "z", nullptr, mk_var("z"));
  ExprPtr res = subst(lam, "x", id);
  CHECK(expr_equal(res, mk_lambda(std::nullopt, "y", nullptr, id)));

  // shadowing: (fun x -> x){5/x} = fun x -> x
  ExprPtr shadow = mk_lambda(std::nullopt, "x", nullptr, mk_var("x"));
  CHECK(expr_equal(subst(shadow, "x", mk_int(5)), shadow));
}

TEST_CASE("free locations and abstract names") {
  // l := !k + 1 has free locations {l, k}
  ExprPtr e = mk_assign(0, mk_arith(ArithOp::Add, {mk_deref(1), mk_int(1)}));
  CHECK(free_locations(e) == std::set<LocId>{0, 1});

  // fun x -> a0 x has abstract names {a0}
  ExprPtr alpha = mk_absname(0, ty_arrow(ty_int(), ty_int()));
  ExprPtr lam = mk_lambda(std::nullopt, "x", nullptr, mk_app(alpha, mk_var("x")));
  CHECK(abstract_names(lam) == std::set<AlphaId>{0});

  // fun x -> x has no free locations
  CHECK(free_locations(mk_lambda(std::nullopt, "x", nullptr, mk_var("x"))).empty());

  // NewRef binders are not free
  ExprPtr nr = mk_newref(7, mk_int(0), mk_deref(7));
  CHECK(free_locations(nr).empty());
}

TEST_CASE("free locations flow through subst") {
  NameGen gen;
  ExprPtr v = mk_lambda(std::nullopt, "u", nullptr, mk_deref(3));
  ExprPtr e = mk_app(mk_var("f"), mk_deref(4));
  std::set<LocId> before = free_locations(e);
  std::set<LocId> vset = free_locations(v);
  ExprPtr r = subst(e, "f", v);
  for (LocId l : free_locations(r)) CHECK((before.count(l) || vset.count(l)));
}

TEST_CASE("value classification is syntactic") {
  CHECK(is_value(mk_int(5)));
  CHECK(is_value(mk_lambda(std::nullopt, "x", nullptr, mk_var("x"))));
  CHECK(is_value(mk_tuple({mk_int(1), mk_bool(true)})));
  CHECK(is_value(mk_absname(0, ty_arrow(ty_unit(), ty_unit()))));
  CHECK(is_value(mk_symconst(0, BaseTy::Int)));
  CHECK(!is_value(mk_arith(ArithOp::Add, {mk_int(1), mk_int(2)})));
  CHECK(!is_value(mk_tuple({mk_int(1), mk_arith(ArithOp::Add, {mk_int(1), mk_int(2)})})));
  CHECK(!is_value(mk_bot()));
  CHECK(!is_value(mk_deref(0)));
}

TEST_CASE("subst commutes with typing") {
  NameGen gen;
  // e = if b then x else 1 with x : int; v = 41
  ExprPtr e = mk_cond(mk_var("b"), mk_var("x"), mk_int(1));
  TypeChecker tc;
  TypeEnv env;
  env.vars["x"] = ty_int();
  env.vars["b"] = ty_bool();
  TypePtr t1 = tc.typecheck(env, StoreTyping{}, e);
  ExprPtr e2 = subst(e, "x", mk_int(41));
  TypeEnv env2;
  env2.vars["b"] = ty_bool();
  TypeChecker tc2;
  TypePtr t2 = tc2.typecheck(env2, StoreTyping{}, e2);
  CHECK(type_equal(t1, t2));
}
