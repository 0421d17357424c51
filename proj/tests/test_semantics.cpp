#include <doctest.h>

#include "ctxeq/eval.hpp"
#include "ctxeq/parser.hpp"
#include "ctxeq/typecheck.hpp"
#include "gen_util.hpp"

using namespace ctxeq;

TEST_CASE("decompose finds the leftmost-innermost redex") {
  NameGen gen;
  // (fun x -> x) 1 + 2 : context [.] + 2, redex the application
  ExprPtr e = parse_expr_string("(fun x -> x) 1 + 2", gen);
  Decomposition d = decompose(e);
  REQUIRE(d.k == Decomposition::K::Redex);
  CHECK(std::holds_alternative<Expr::App>(d.redex->node));
  CHECK(d.ctx.frames.size() == 1);
  CHECK(expr_equal(plug(d.ctx, d.redex), e));
}

TEST_CASE("decompose of a value") {
  CHECK(decompose(mk_int(5)).k == Decomposition::K::AlreadyValue);
}

TEST_CASE("bot in evaluation position is stuck") {
  NameGen gen;
  ExprPtr e = parse_expr_string("if _bot_ then 1 else 2", gen);
  CHECK(decompose(e).k == Decomposition::K::StuckBot);
  CHECK(decompose(mk_bot()).k == Decomposition::K::StuckBot);
}

TEST_CASE("concrete reduction: references") {
  NameGen gen;
  ExprPtr e = parse_expr_string("ref x = 0 in !x", gen);
  gen.reserve_locs_above(max_static_loc(e));
  Store s;
  auto s1 = step_concrete(s, e, gen);  // allocate
  REQUIRE(s1);
  CHECK(s1->first.size() == 1);
  auto s2 = step_concrete(s1->first, s1->second, gen);  // deref
  REQUIRE(s2);
  CHECK(expr_equal(s2->second, mk_int(0)));
}

TEST_CASE("concrete reduction: conditionals and tuples") {
  NameGen gen;
  Store s;
  ExprPtr e = parse_expr_string("if true then 1 else 2", gen);
  auto r = step_concrete(s, e, gen);
  REQUIRE(r);
  CHECK(expr_equal(r->second, mk_int(1)));

  ExprPtr lt = parse_expr_string("let (x,y) = (1,2) in x", gen);
  auto r2 = step_concrete(s, lt, gen);
  REQUIRE(r2);
  CHECK(expr_equal(r2->second, mk_int(1)));
}

TEST_CASE("division by zero diverges rather than crashing") {
  NameGen gen;
  Store s;
  ExprPtr e = parse_expr_string("1 / 0", gen);
  auto r = step_concrete(s, e, gen);
  REQUIRE(r);
  CHECK(decompose(r->second).k == Decomposition::K::StuckBot);
}

TEST_CASE("symbolic conditionals branch on satisfiability") {
  NameGen gen;
  gen.reserve_kappas_above(10);
  ConstraintEngine solver("");
  SymEnv sg;
  sg.declare_existing(0, BaseTy::Bool);
  Store s;
  ExprPtr e = mk_cond(mk_symconst(0, BaseTy::Bool), mk_int(1), mk_int(2));
  auto branches = step_symbolic(sg, s, e, gen, solver);
  CHECK(branches.size() == 2);

  // under k0 = true only one branch remains
  SymEnv forced = sg;
  forced.add_eq(0, mk_bool(true));
  auto b2 = step_symbolic(forced, s, e, gen, solver);
  REQUIRE(b2.size() == 1);
  CHECK(expr_equal(b2[0].expr, mk_int(1)));
}

TEST_CASE("concrete arithmetic stays concrete under symbolic stepping") {
  NameGen gen;
  ConstraintEngine solver("");
  SymEnv sg;
  Store s;
  ExprPtr e = mk_arith(ArithOp::Add, {mk_int(1), mk_int(2)});
  auto branches = step_symbolic(sg, s, e, gen, solver);
  REQUIRE(branches.size() == 1);
  CHECK(expr_equal(branches[0].expr, mk_int(3)));
  CHECK(branches[0].sigma.atoms.empty());
}

TEST_CASE("symbolic arithmetic introduces one fresh constant") {
  NameGen gen;
  gen.reserve_kappas_above(10);
  ConstraintEngine solver("");
  SymEnv sg;
  sg.declare_existing(0, BaseTy::Int);
  Store s;
  ExprPtr e = mk_arith(ArithOp::Add, {mk_symconst(0, BaseTy::Int), mk_int(2)});
  auto branches = step_symbolic(sg, s, e, gen, solver);
  REQUIRE(branches.size() == 1);
  CHECK(std::holds_alternative<Expr::SymConst>(branches[0].expr->node));
  REQUIRE(branches[0].sigma.atoms.size() == 1);
  CHECK(branches[0].sigma.atoms[0].equal);
}

TEST_CASE("reduce_to_interaction surfaces calls to abstract names") {
  NameGen gen;
  gen.reserve_kappas_above(10);
  ConstraintEngine solver("");
  SymEnv sg;
  Store s;
  // E[alpha ()] with E = [.]; 0  (example 1 shape)
  ExprPtr alpha = mk_absname(gen.fresh_alpha(), ty_arrow(ty_unit(), ty_unit()));
  ExprPtr e = mk_lettuple({"_"}, mk_app(alpha, mk_unit()), mk_int(0));
  auto branches = reduce_to_interaction(sg, s, e, 100, gen, solver);
  REQUIRE(branches.size() == 1);
  CHECK(branches[0].k == InteractionBranch::K::Call);
  CHECK(expr_equal(branches[0].arg, mk_unit()));
  // the continuation plugged with () runs to 0
  ExprPtr resumed = plug(branches[0].ctx, mk_unit());
  auto done = reduce_to_interaction(sg, s, resumed, 100, gen, solver);
  REQUIRE(done.size() == 1);
  CHECK(done[0].k == InteractionBranch::K::Value);
  CHECK(expr_equal(done[0].value, mk_int(0)));
}

TEST_CASE("bot is recognized without burning fuel") {
  NameGen gen;
  ConstraintEngine solver("");
  auto branches = reduce_to_interaction(SymEnv{}, Store{}, mk_bot(), 1, gen, solver);
  REQUIRE(branches.size() == 1);
  CHECK(branches[0].k == InteractionBranch::K::Stuck);
}

TEST_CASE("fuel exhaustion is reported") {
  NameGen gen;
  ConstraintEngine solver("");
  // an unbounded recursion: (rec f x = f x) ()
  ExprPtr loop = mk_lambda("f", "x", nullptr, mk_app(mk_var("f"), mk_var("x")));
  ExprPtr e = mk_app(loop, mk_unit());
  auto branches = reduce_to_interaction(SymEnv{}, Store{}, e, 50, gen, solver);
  REQUIRE(branches.size() == 1);
  CHECK(branches[0].k == InteractionBranch::K::Fuel);
}

TEST_CASE("unique decomposition on random programs") {
  testgen::Rng rng(7);
  for (int iter = 0; iter < 500; ++iter) {
    testgen::FirstOrderGen g(rng, 0);
    ExprPtr e = g.gen_program(20);
    if (is_value(e)) continue;
    Decomposition d = decompose(e);
    if (d.k != Decomposition::K::Redex) continue;
    CHECK(expr_equal(plug(d.ctx, d.redex), e));
  }
}

TEST_CASE("type preservation along concrete steps") {
  testgen::Rng rng(21);
  TypeChecker tc;
  int steps_checked = 0;
  for (int iter = 0; iter < 200; ++iter) {
    testgen::FirstOrderGen g(rng, 0);
    ExprPtr e = g.gen_program(16);
    NameGen gen;
    gen.reserve_locs_above(max_static_loc(e));
    Store s;
    StoreTyping st;
    for (int k = 0; k < 30; ++k) {
      auto r = step_concrete(s, e, gen);
      if (!r) break;
      StoreTyping st2;
      TypeChecker tc1, tc2;
      for (auto& [l, v] : r->first) st2.locs[l] = tc1.typecheck(TypeEnv{}, st2, v, false);
      TypePtr t2 = tc2.typecheck(TypeEnv{}, st2, r->second, false);
      CHECK(type_to_string(t2) == "int");
      s = r->first;
      e = r->second;
      ++steps_checked;
    }
  }
  CHECK(steps_checked > 100);
}
