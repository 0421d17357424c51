#include <doctest.h>

#include "ctxeq/engine.hpp"

using namespace ctxeq;

namespace {
Verdict run(const std::string& left, const std::string& right, Options opts = {}) {
  NameGen gen;
  opts.solver_cmd = "";
  opts.timeout_seconds = 60;
  ProgramPair pair = parse_program_pair(left + "\n|||\n" + right + "\n", gen);
  return check_equiv(pair, opts);
}
}  // namespace

TEST_CASE("identical programs are equivalent") {
  CHECK(run("fun () -> 0", "fun () -> 0").k == Verdict::K::Equivalent);
  CHECK(run("0", "0").k == Verdict::K::Equivalent);
}

TEST_CASE("constant mismatch is inequivalent with a witness") {
  Verdict v = run("fun () -> 0", "fun () -> 1");
  REQUIRE(v.k == Verdict::K::Inequivalent);
  CHECK(!v.witness.empty());
  CHECK(v.witness.back().move.k == Move::K::Term);
  // straight-line inequivalence explores no repeated states
  CHECK(v.stats.memo_hits == 0);
}

TEST_CASE("swap functions are equivalent symbolically") {
  Verdict v = run("let swap xy = let (x,y) = xy in (y, x) in swap",
                  "fun xy -> let (x,y) = xy in ref x = x in ref y = y in x := !x - !y; y := !x + "
                  "!y; x := !y - !x; (!x, !y)");
  CHECK(v.k == Verdict::K::Equivalent);
}

TEST_CASE("meyer-sieber needs no solver") {
  Verdict v = run("fun f -> ref x = 0 in f ()", "fun f -> f ()");
  CHECK(v.k == Verdict::K::Equivalent);
  CHECK(v.stats.solver_queries == 0);
  CHECK(v.stats.sep_splits >= 1);
}

TEST_CASE("conjunction example stays small") {
  Verdict v = run("fun xy -> let (x,y) = xy in if x then y else false",
                  "fun xy -> let (x,y) = xy in x && y");
  CHECK(v.k == Verdict::K::Equivalent);
  CHECK(v.stats.nodes < 40);
}

TEST_CASE("divergence on one side only is observable") {
  Verdict v = run("fun f -> f (); _bot_", "fun f -> f ()");
  CHECK(v.k == Verdict::K::Inequivalent);
}

TEST_CASE("matching divergence is fine") {
  CHECK(run("_bot_", "_bot_").k == Verdict::K::Equivalent);
  CHECK(run("fun q -> _bot_", "fun q -> _bot_").k == Verdict::K::Equivalent);
}

TEST_CASE("well-bracketed state pair stays inconclusive") {
  Options o;
  o.bound = 6;
  Verdict v = run("ref x = 0 in fun f -> x:=0; f(); x:=1; f(); !x", "fun f -> f(); f(); 1", o);
  CHECK(v.k == Verdict::K::Inconclusive);
  CHECK(v.reasons.count(Reason::BoundExhausted));
}

TEST_CASE("bound exhaustion reports inconclusive, never a verdict") {
  Options o;
  o.bound = 1;
  Verdict v = run("fun f -> f (); f (); 0", "fun f -> f (); 0", o);
  CHECK(v.k == Verdict::K::Inconclusive);
}

TEST_CASE("re-entry pair needs its flag") {
  Verdict flagged = run("ref x = 0 in fun f {} -> f (); !x", "fun f -> f (); 0");
  CHECK(flagged.k == Verdict::K::Equivalent);
  CHECK(flagged.stats.reentry_skips >= 1);

  Verdict bare = run("ref x = 0 in fun f -> f (); !x", "fun f -> f (); 0");
  CHECK(bare.k == Verdict::K::Inconclusive);
}

TEST_CASE("a flagged function that changes state downgrades to inconclusive") {
  // the {} flag promises restored state, but the function increments x;
  // skips based on that promise poison the verdict
  Verdict v = run("ref x = 0 in fun f {} -> x := !x + 1; f (); !x - !x",
                  "fun f {} -> f (); 0");
  CHECK(v.k != Verdict::K::Equivalent);
}

TEST_CASE("toggling techniques never flips eq and ineq") {
  const char* pairs[][2] = {
      {"fun f -> ref x = 0 in f ()", "fun f -> f ()"},
      {"fun () -> 0", "fun () -> 1"},
      {"fun xy -> let (x,y) = xy in x - y", "fun xy -> let (x,y) = xy in y - x"},
  };
  for (auto& p : pairs) {
    Verdict base = run(p[0], p[1]);
    for (int cfg = 0; cfg < 4; ++cfg) {
      Options o;
      o.separation = cfg != 0;
      o.annotations = cfg != 1;
      o.reentry = cfg != 2;
      o.all_upto = cfg != 3;
      Verdict v = run(p[0], p[1], o);
      if (base.k == Verdict::K::Equivalent) CHECK(v.k != Verdict::K::Inequivalent);
      if (base.k == Verdict::K::Inequivalent) CHECK(v.k != Verdict::K::Equivalent);
    }
  }
}

TEST_CASE("annotations off forces re-entry off") {
  Options o;
  o.annotations = false;
  o.normalize();
  CHECK(!o.reentry);
  Options o2;
  o2.all_upto = false;
  o2.normalize();
  CHECK(!o2.separation);
  CHECK(!o2.annotations);
  CHECK(!o2.memoization);
}

TEST_CASE("verdicts are deterministic across runs") {
  for (int i = 0; i < 3; ++i) {
    Verdict a = run("fun f -> ref x = 0 in f (); !x", "fun f -> f (); 0");
    Verdict b = run("fun f -> ref x = 0 in f (); !x", "fun f -> f (); 0");
    CHECK(a.k == b.k);
    CHECK(a.stats.nodes == b.stats.nodes);
    CHECK(a.stats.memo_hits == b.stats.memo_hits);
  }
}

TEST_CASE("argument order swap finds a separating model") {
  Verdict v = run("fun xy -> let (x,y) = xy in x - y", "fun xy -> let (x,y) = xy in y - x");
  REQUIRE(v.k == Verdict::K::Inequivalent);
  // the model instantiates the two inputs with values where x-y != y-x
  CHECK(!v.model.values.empty());
}

TEST_CASE("internal reductions collapse into single nodes") {
  // a long arithmetic chain is one interaction, not fifty
  std::string sum = "fun () -> 0";
  std::string chain = "fun () -> 1";
  for (int i = 0; i < 49; ++i) chain += " + 1 - 1";
  Verdict v = run(chain, "fun () -> 1");
  CHECK(v.k == Verdict::K::Equivalent);
  CHECK(v.stats.taus_collapsed >= 49);
  CHECK(v.stats.nodes < 10);
}

TEST_CASE("regression node bounds for the small examples") {
  Verdict sep = run("fun f -> f (); 0", "fun f -> ref x = 0 in f (); !x");
  CHECK(sep.k == Verdict::K::Equivalent);
  CHECK(sep.stats.nodes <= 20);
}
