#include <doctest.h>

#include "ctxeq/config.hpp"
#include "gen_util.hpp"

using namespace ctxeq;

TEST_CASE("value pattern: function components become numbered holes") {
  // (fun x -> e1, 5) gives skeleton (hole_i, 5) with i bound to the function
  ExprPtr lam = mk_lambda(std::nullopt, "x", nullptr, mk_int(7));
  ExprPtr v = mk_tuple({lam, mk_int(5)});
  TypePtr ty = ty_product({ty_arrow(ty_int(), ty_int()), ty_int()});
  UlpattValue up = ulpatt_value(v, ty, 3);
  REQUIRE(up.bindings.size() == 1);
  CHECK(up.bindings[0].first == 3);
  CHECK(expr_equal(up.bindings[0].second.value, lam));
  REQUIRE(up.pattern.root.k == PatNode::K::Tup);
  CHECK(up.pattern.root.kids[0].k == PatNode::K::Hole);
  CHECK(up.pattern.root.kids[1].k == PatNode::K::Lit);
}

TEST_CASE("constants have no holes") {
  UlpattValue up = ulpatt_value(mk_int(7), ty_int(), 0);
  CHECK(up.bindings.empty());
  CHECK(up.pattern.root.k == PatNode::K::Lit);
}

TEST_CASE("two functions get consecutive fresh indices") {
  ExprPtr id1 = mk_lambda(std::nullopt, "x", nullptr, mk_var("x"));
  ExprPtr id2 = mk_lambda(std::nullopt, "y", nullptr, mk_var("y"));
  TypePtr arrow = ty_arrow(ty_int(), ty_int());
  UlpattValue up = ulpatt_value(mk_tuple({id1, id2}), ty_product({arrow, arrow}), 0);
  REQUIRE(up.bindings.size() == 2);
  CHECK(up.bindings[0].first == 0);
  CHECK(up.bindings[1].first == 1);
}

TEST_CASE("abstract names stay verbatim in value patterns") {
  ExprPtr alpha = mk_absname(4, ty_arrow(ty_unit(), ty_unit()));
  UlpattValue up = ulpatt_value(alpha, ty_arrow(ty_unit(), ty_unit()), 0);
  CHECK(up.bindings.empty());
  CHECK(up.pattern.root.k == PatNode::K::Lit);
}

TEST_CASE("type pattern: arrows become abstract names, ints symbolic") {
  NameGen gen;
  UlpattType p1 = ulpatt_type(ty_arrow(ty_unit(), ty_unit()), gen);
  CHECK(p1.alphas.size() == 1);
  CHECK(p1.kappas.empty());

  UlpattType p2 = ulpatt_type(ty_int(), gen);
  CHECK(p2.alphas.empty());
  CHECK(p2.kappas.size() == 1);
  CHECK(p2.kappas[0].second == BaseTy::Int);

  UlpattType p3 = ulpatt_type(ty_product({ty_int(), ty_arrow(ty_unit(), ty_unit())}), gen);
  CHECK(p3.alphas.size() == 1);
  CHECK(p3.kappas.size() == 1);
  auto* t = std::get_if<Expr::Tuple>(&p3.value->node);
  REQUIRE(t);
  CHECK(std::holds_alternative<Expr::SymConst>(t->elems[0]->node));
  CHECK(std::holds_alternative<Expr::AbsName>(t->elems[1]->node));

  // unit leaves stay the unit constant
  UlpattType p4 = ulpatt_type(ty_unit(), gen);
  CHECK(p4.kappas.empty());
  CHECK(expr_equal(p4.value, mk_unit()));
}

TEST_CASE("reconstruction on random values") {
  testgen::Rng rng(5);
  for (int iter = 0; iter < 10000; ++iter) {
    NameGen gen;
    ExprPtr v = testgen::gen_value(rng, gen);
    TypePtr ty = testgen::type_of_value(v);
    UlpattValue up = ulpatt_value(v, ty, 10);
    std::map<int, Binding> bindings(up.bindings.begin(), up.bindings.end());
    CHECK(expr_equal(plug_pattern(up.pattern, bindings), v));
  }
}

TEST_CASE("opponent pattern values type-check at the requested type") {
  testgen::Rng rng(77);
  for (int iter = 0; iter < 200; ++iter) {
    NameGen gen;
    // build a random type from a random value's shape
    ExprPtr v = testgen::gen_value(rng, gen);
    TypePtr ty = testgen::type_of_value(v);
    UlpattType p = ulpatt_type(ty, gen);
    CHECK(type_equal(testgen::type_of_value(p.value), ty));
    // opponent skeletons contain no functions and no concrete base constants
    // (except unit); every base leaf is symbolic
    std::function<void(const PatNode&)> scan = [&](const PatNode& n) {
      if (n.k == PatNode::K::Lit) {
        CHECK(!std::holds_alternative<Expr::Lambda>(n.lit->node));
        if (auto* c = std::get_if<Expr::Const>(&n.lit->node)) CHECK(c->c.is_unit());
      }
      for (auto& kid : n.kids) scan(kid);
    };
    scan(p.pattern.root);
  }
}

TEST_CASE("pattern matching splits on first-order leaves") {
  // (k0, 5) vs (k1, 5): skeletons match with one leaf pair
  Pattern a, b;
  a.root.k = PatNode::K::Tup;
  a.root.kids.push_back({PatNode::K::Lit, -1, nullptr, mk_symconst(0, BaseTy::Int), {}});
  a.root.kids.push_back({PatNode::K::Lit, -1, nullptr, mk_int(5), {}});
  b.root.k = PatNode::K::Tup;
  b.root.kids.push_back({PatNode::K::Lit, -1, nullptr, mk_symconst(1, BaseTy::Int), {}});
  b.root.kids.push_back({PatNode::K::Lit, -1, nullptr, mk_int(5), {}});
  PatternMatch m = match_patterns(a, b);
  CHECK(m.skeleton_match);
  CHECK(m.leaves.size() == 1);

  // distinct constants never match
  Pattern c = a, d = a;
  c.root.kids[1].lit = mk_int(5);
  d.root.kids[1].lit = mk_int(6);
  CHECK(!match_patterns(c, d).skeleton_match);

  // distinct abstract names never match
  Pattern e, f;
  e.root = {PatNode::K::Lit, -1, nullptr, mk_absname(0, ty_arrow(ty_unit(), ty_unit())), {}};
  f.root = {PatNode::K::Lit, -1, nullptr, mk_absname(1, ty_arrow(ty_unit(), ty_unit())), {}};
  CHECK(!match_patterns(e, f).skeleton_match);
}

TEST_CASE("wellformedness checks") {
  Config c;
  c.alphas[0] = ty_arrow(ty_int(), ty_int());
  c.gamma[0] = Binding{mk_lambda(std::nullopt, "x", nullptr, mk_app(mk_absname(0, ty_arrow(ty_int(), ty_int())), mk_var("x"))),
                       ty_arrow(ty_int(), ty_int())};
  CHECK(wellformed(c));
  c.alphas.clear();  // alpha no longer tracked
  CHECK(!wellformed(c));
  CHECK(wellformed(bottom_config()));
}

TEST_CASE("single-configuration proponent moves") {
  NameGen gen;
  ConstraintEngine solver("");
  gen.reserve_kappas_above(10);
  TypePtr uu = ty_arrow(ty_unit(), ty_unit());
  AlphaId alpha = gen.fresh_alpha();

  // <A; G; K; s; E[alpha ()]> emits a proponent application and pushes E
  Config c;
  c.alphas[alpha] = uu;
  c.ehat = mk_lettuple({"_"}, mk_app(mk_absname(alpha, uu), mk_unit()), mk_int(0));
  c.ehat_ty = ty_int();
  auto moves = proponent_moves(SymEnv{}, c, 100, gen, solver);
  REQUIRE(moves.size() == 1);
  CHECK(moves[0].move.k == Move::K::PropApp);
  CHECK(moves[0].move.alpha == alpha);
  CHECK(moves[0].config.stack.size() == 1);
  CHECK(moves[0].config.ehat == nullptr);

  // a value emits a proponent return and clears e
  Config v;
  v.ehat = mk_int(0);
  v.ehat_ty = ty_int();
  auto rets = proponent_moves(SymEnv{}, v, 100, gen, solver);
  REQUIRE(rets.size() == 1);
  CHECK(rets[0].move.k == Move::K::PropRet);
  CHECK(rets[0].config.ehat == nullptr);

  // bot is silent
  Config b;
  b.ehat = mk_bot();
  b.ehat_ty = ty_int();
  CHECK(proponent_moves(SymEnv{}, b, 100, gen, solver).empty());
}

TEST_CASE("single-configuration opponent moves") {
  NameGen gen;
  TypePtr uu = ty_arrow(ty_unit(), ty_unit());
  Config c;
  c.gamma[0] = Binding{mk_lambda(std::nullopt, "f", nullptr,
                                 mk_lettuple({"_"}, mk_app(mk_var("f"), mk_unit()), mk_int(0))),
                       ty_arrow(uu, ty_int())};
  auto moves = opponent_moves(SymEnv{}, c, gen);
  // one application per index plus the termination move (empty stack)
  REQUIRE(moves.size() == 2);
  CHECK(moves[0].move.k == Move::K::OpApp);
  CHECK(moves[0].move.index == 0);
  CHECK(moves[0].config.is_proponent());
  CHECK(moves[1].move.k == Move::K::Term);
  CHECK(moves[1].config.bottom);

  // with a continuation on the stack there is a return instead of TERM
  Config k = c;
  k.stack.push_back(KFrame{EvalCtx{}, ty_unit(), ty_int()});
  auto moves2 = opponent_moves(SymEnv{}, k, gen);
  REQUIRE(moves2.size() == 2);
  CHECK(moves2[1].move.k == Move::K::OpRet);
  CHECK(moves2[1].config.stack.empty());
  CHECK(moves2[1].config.is_proponent());
}

TEST_CASE("trace rendering format") {
  Pattern unit_pat;
  unit_pat.root = {PatNode::K::Lit, -1, nullptr, mk_unit(), {}};
  Pattern hole_pat;
  hole_pat.root = {PatNode::K::Hole, 3, ty_arrow(ty_unit(), ty_unit()), nullptr, {}};
  Pattern sym_pat;
  sym_pat.root = {PatNode::K::Lit, -1, nullptr, mk_symconst(7, BaseTy::Int), {}};

  CHECK(move_to_string(Move{Move::K::OpApp, 0, 3, unit_pat}) == "app(g#3, ())");
  CHECK(move_to_string(Move{Move::K::OpRet, 0, -1, sym_pat}) == "ret(_k#7)");
  CHECK(move_to_string(Move{Move::K::PropApp, 2, -1, unit_pat}) == "_app(α2, ())");
  CHECK(move_to_string(Move{Move::K::PropRet, 0, -1, hole_pat}) == "_ret(_fn#3)");
  CHECK(move_to_string(Move{Move::K::Term, 0, -1, {}}) == "TERM");
}
