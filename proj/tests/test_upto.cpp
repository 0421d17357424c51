#include <doctest.h>

#include "ctxeq/parser.hpp"
#include "ctxeq/solver.hpp"
#include "ctxeq/upto.hpp"

using namespace ctxeq;

TEST_CASE("gc removes unreachable cells and names") {
  Config c;
  c.alphas[0] = ty_arrow(ty_unit(), ty_unit());
  c.gamma[0] = Binding{mk_lambda(std::nullopt, "x", nullptr, mk_int(0)), ty_arrow(ty_int(), ty_int())};
  c.store[7] = mk_int(5);
  gc_config(c);
  CHECK(c.store.empty());
  CHECK(c.alphas.empty());
  CHECK(c.gamma.size() == 1);
}

TEST_CASE("gc keeps reachable cells, including through stored values") {
  Config c;
  c.gamma[0] = Binding{mk_lambda(std::nullopt, "x", nullptr, mk_deref(1)), ty_arrow(ty_int(), ty_int())};
  c.store[1] = mk_lambda(std::nullopt, "y", nullptr, mk_deref(2));  // chains to 2
  c.store[2] = mk_int(5);
  c.store[3] = mk_int(9);  // garbage
  gc_config(c);
  CHECK(c.store.count(1));
  CHECK(c.store.count(2));
  CHECK(!c.store.count(3));
}

TEST_CASE("gc is idempotent") {
  Config c;
  c.gamma[0] = Binding{mk_lambda(std::nullopt, "x", nullptr, mk_deref(1)), ty_arrow(ty_int(), ty_int())};
  c.store[1] = mk_int(0);
  c.store[9] = mk_int(1);
  gc_config(c);
  Config once = c;
  gc_config(c);
  PairNode a, b;
  a.left = once;
  a.right = bottom_config();
  b.left = c;
  b.right = bottom_config();
  CHECK(canonical_key(a) == canonical_key(b));
}

TEST_CASE("canonical key is invariant under permutations") {
  NameGen gen;
  auto build = [&](LocId l, AlphaId al, int idx0) {
    PairNode n;
    n.left.alphas[al] = ty_arrow(ty_unit(), ty_unit());
    n.left.gamma[idx0] =
        Binding{mk_lambda(std::nullopt, "x", nullptr,
                          mk_lettuple({"_"}, mk_app(mk_absname(al, ty_arrow(ty_unit(), ty_unit())), mk_unit()),
                                      mk_deref(l))),
                ty_arrow(ty_unit(), ty_int())};
    n.left.store[l] = mk_int(3);
    n.right.alphas[al] = ty_arrow(ty_unit(), ty_unit());
    n.right.gamma[idx0] = Binding{mk_lambda(std::nullopt, "x", nullptr, mk_int(3)), ty_arrow(ty_unit(), ty_int())};
    return n;
  };
  // permuted locations (per side), alphas and indices (shared) give one key
  std::string k1 = canonical_key(build(4, 2, 0));
  std::string k2 = canonical_key(build(9, 5, 3));
  CHECK(k1 == k2);

  // a genuinely different store value gives a different key
  PairNode m = build(4, 2, 0);
  m.left.store[4] = mk_int(8);
  CHECK(canonical_key(m) != k1);
}

TEST_CASE("kappa renaming in keys") {
  auto build = [&](KappaId k) {
    PairNode n;
    n.sigma.declare_existing(k, BaseTy::Int);
    n.sigma.add_eq(k, mk_int(1));
    n.left.store[0] = mk_symconst(k, BaseTy::Int);
    n.left.gamma[0] = Binding{mk_lambda(std::nullopt, "x", nullptr, mk_deref(0)), ty_arrow(ty_unit(), ty_int())};
    n.right.gamma[0] = Binding{mk_lambda(std::nullopt, "x", nullptr, mk_int(1)), ty_arrow(ty_unit(), ty_int())};
    return n;
  };
  CHECK(canonical_key(build(3)) == canonical_key(build(12)));
}

TEST_CASE("dedup drops identical knowledge pairs") {
  NameGen gen;
  PairNode n;
  TypePtr ty = ty_arrow(ty_int(), ty_int());
  ExprPtr f = mk_lambda(std::nullopt, "x", nullptr, mk_var("x"));
  ExprPtr g = mk_lambda(std::nullopt, "y", nullptr, mk_int(0));
  n.left.gamma[0] = Binding{f, ty};
  n.right.gamma[0] = Binding{g, ty};
  n.left.gamma[1] = Binding{f, ty};
  n.right.gamma[1] = Binding{g, ty};
  n.left.gamma[2] = Binding{g, ty};
  n.right.gamma[2] = Binding{g, ty};
  dedup_gamma(n);
  CHECK(n.left.gamma.size() == 2);  // 1 dropped, 2 kept (differs on the left)
  CHECK(n.left.gamma.count(0));
  CHECK(n.left.gamma.count(2));
}

TEST_CASE("weaken removes indices from both sides") {
  PairNode n;
  TypePtr ty = ty_arrow(ty_int(), ty_int());
  n.left.gamma[0] = Binding{mk_lambda(std::nullopt, "x", nullptr, mk_var("x")), ty};
  n.right.gamma[0] = n.left.gamma[0];
  n.left.gamma[1] = n.left.gamma[0];
  n.right.gamma[1] = n.left.gamma[0];
  PairNode w = weaken(n, {0});
  CHECK(w.left.gamma.size() == 1);
  CHECK(w.right.gamma.size() == 1);
  CHECK(w.left.gamma.count(1));
  CHECK(weaken(n, {}).left.gamma.size() == 2);
}

TEST_CASE("separation splits store-disjoint blocks and reconstructs") {
  NameGen gen;
  PairNode n;
  // left: gamma 0 touches location 1; gamma 1 is pure; one frame touching 1
  n.left.gamma[0] = Binding{mk_lambda(std::nullopt, "x", nullptr, mk_deref(1)), ty_arrow(ty_unit(), ty_int())};
  n.left.gamma[1] = Binding{mk_lambda(std::nullopt, "x", nullptr, mk_int(0)), ty_arrow(ty_unit(), ty_int())};
  n.left.store[1] = mk_int(5);
  n.right.gamma[0] = Binding{mk_lambda(std::nullopt, "x", nullptr, mk_int(5)), ty_arrow(ty_unit(), ty_int())};
  n.right.gamma[1] = Binding{mk_lambda(std::nullopt, "x", nullptr, mk_int(0)), ty_arrow(ty_unit(), ty_int())};
  Frame fr{Frame::LetTupleF{{"_"}, mk_deref(1)}};
  n.left.stack.push_back(KFrame{EvalCtx{{fr}}, ty_unit(), ty_int()});
  n.right.stack.push_back(KFrame{EvalCtx{{Frame{Frame::LetTupleF{{"_"}, mk_int(0)}}}}, ty_unit(), ty_int()});

  Separation sep = separate(n);
  REQUIRE(sep.split);
  CHECK(sep.blocks.size() == 2);
  // focused block holds the stack and the store-sharing entry
  CHECK(sep.blocks[0].left.stack.size() == 1);
  CHECK(sep.blocks[0].left.gamma.count(0));
  CHECK(sep.blocks[0].left.store.count(1));
  CHECK(sep.blocks[1].left.gamma.count(1));
  CHECK(sep.blocks[1].left.store.empty());

  // merging the blocks reproduces the node up to gc
  PairNode merged = merge_blocks(sep, n.sigma);
  PairNode orig = n;
  CHECK(canonical_key(merged) == canonical_key(orig));
}

TEST_CASE("overlapping footprints refuse to split") {
  PairNode n;
  n.left.gamma[0] = Binding{mk_lambda(std::nullopt, "x", nullptr, mk_deref(1)), ty_arrow(ty_unit(), ty_int())};
  n.left.gamma[1] = Binding{mk_lambda(std::nullopt, "x", nullptr, mk_deref(1)), ty_arrow(ty_unit(), ty_int())};
  n.left.store[1] = mk_int(0);
  n.right.gamma[0] = Binding{mk_lambda(std::nullopt, "x", nullptr, mk_int(0)), ty_arrow(ty_unit(), ty_int())};
  n.right.gamma[1] = n.right.gamma[0];
  CHECK(!separate(n).split);
}

TEST_CASE("state invariant: match, entail, abstract") {
  NameGen gen;
  ConstraintEngine solver("");
  // left function annotated {w | l0 as w | w mod 2 = 0}, store l0 = 0
  auto [annot, locs] = parse_annotation_string("{w | x as w | w mod 2 == 0}", {"x"}, gen);
  LocId lx = locs.at("x");
  PairNode n;
  ExprPtr body = mk_assign(lx, mk_int(1));
  ExprPtr lam = mk_lambda(std::nullopt, "z", annot, body);
  n.left.gamma[0] = Binding{lam, ty_arrow(ty_int(), ty_unit())};
  n.left.store[lx] = mk_int(0);
  n.right.gamma[0] = Binding{mk_lambda(std::nullopt, "z", nullptr, mk_unit()), ty_arrow(ty_int(), ty_unit())};
  gen.reserve_kappas_above(50);

  CHECK(index_annotated(n, 0));
  InvariantResult r = apply_invariant(n, 0, InvariantPhase::OpAppEntry, solver, gen);
  CHECK(r.outcome == InvariantOutcome::Applied);
  // the store now holds a fresh symbolic constant constrained to be even
  auto* k = std::get_if<Expr::SymConst>(&n.left.store.at(lx)->node);
  REQUIRE(k);
  Entailment ent = solver.entails(
      n.sigma, mk_arith(ArithOp::Eq, {mk_arith(ArithOp::Mod, {n.left.store.at(lx), mk_int(2)}), mk_int(0)}));
  CHECK(ent == Entailment::Yes);

  // with an odd store value the invariant fails
  PairNode bad = n;
  bad.left.store[lx] = mk_int(1);
  InvariantResult r2 = apply_invariant(bad, 0, InvariantPhase::OpAppEntry, solver, gen);
  CHECK(r2.outcome == InvariantOutcome::Failed);
}

TEST_CASE("empty annotation applies without changing anything") {
  NameGen gen;
  ConstraintEngine solver("");
  auto [annot, locs] = parse_annotation_string("{}", {}, gen);
  PairNode n;
  n.left.gamma[0] = Binding{mk_lambda(std::nullopt, "z", annot, mk_unit()), ty_arrow(ty_unit(), ty_unit())};
  n.right.gamma[0] = Binding{mk_lambda(std::nullopt, "z", nullptr, mk_unit()), ty_arrow(ty_unit(), ty_unit())};
  std::string before = canonical_key(n);
  InvariantResult r = apply_invariant(n, 0, InvariantPhase::OpAppEntry, solver, gen);
  CHECK(r.outcome == InvariantOutcome::Applied);
  CHECK(canonical_key(n) == before);
}

TEST_CASE("snapshot keys ignore stacks but track stores") {
  PairNode a;
  a.left.gamma[0] = Binding{mk_lambda(std::nullopt, "x", nullptr, mk_deref(1)), ty_arrow(ty_unit(), ty_int())};
  a.left.store[1] = mk_int(0);
  a.right.gamma[0] = Binding{mk_lambda(std::nullopt, "x", nullptr, mk_int(0)), ty_arrow(ty_unit(), ty_int())};
  PairNode b = a;
  b.left.stack.push_back(KFrame{EvalCtx{}, ty_unit(), ty_int()});
  b.right.stack.push_back(KFrame{EvalCtx{}, ty_unit(), ty_int()});
  CHECK(snapshot_key(a) == snapshot_key(b));
  PairNode c = a;
  c.left.store[1] = mk_int(7);
  CHECK(snapshot_key(c) != snapshot_key(a));
}
