#include <doctest.h>

#include "ctxeq/engine.hpp"

using namespace ctxeq;

namespace {
struct Checked {
  ProgramPair pair;
  Verdict verdict;
};

Checked run(const std::string& left, const std::string& right, uint64_t bound = 8) {
  NameGen gen;
  Options opts;
  opts.solver_cmd = "";
  opts.bound = bound;
  opts.timeout_seconds = 60;
  Checked c{parse_program_pair(left + "\n|||\n" + right + "\n", gen), {}};
  c.verdict = check_equiv(c.pair, opts);
  return c;
}
}  // namespace

TEST_CASE("witnesses replay") {
  auto c = run("fun () -> 0", "fun () -> 1");
  REQUIRE(c.verdict.k == Verdict::K::Inequivalent);
  CHECK(replay(c.pair, c.verdict.witness, c.verdict.model));
}

TEST_CASE("a tampered witness is rejected") {
  auto c = run("fun () -> 0", "fun () -> 1");
  REQUIRE(c.verdict.k == Verdict::K::Inequivalent);

  // flip the surviving side's return value in the trace
  Trace tampered = c.verdict.witness;
  bool edited = false;
  for (auto& step : tampered) {
    if (step.move.k == Move::K::PropRet && step.side != TraceStep::Side::Both &&
        step.move.pat.root.k == PatNode::K::Lit) {
      step.move.pat.root.lit = mk_int(99);
      edited = true;
      break;
    }
  }
  REQUIRE(edited);
  CHECK(!replay(c.pair, tampered, c.verdict.model));

  // dropping the terminating move also invalidates it
  Trace cut = c.verdict.witness;
  cut.pop_back();
  CHECK(!replay(c.pair, cut, c.verdict.model));

  // swapping the surviving side breaks it too
  Trace flipped = c.verdict.witness;
  for (auto& step : flipped) {
    if (step.side == TraceStep::Side::LeftOnly)
      step.side = TraceStep::Side::RightOnly;
    else if (step.side == TraceStep::Side::RightOnly)
      step.side = TraceStep::Side::LeftOnly;
  }
  CHECK(!replay(c.pair, flipped, c.verdict.model));
}

TEST_CASE("symbolic witnesses replay under their model") {
  auto c = run("fun x -> if x > 0 then 1 else 0", "fun x -> if x >= 0 then 1 else 0");
  REQUIRE(c.verdict.k == Verdict::K::Inequivalent);
  CHECK(replay(c.pair, c.verdict.witness, c.verdict.model));
  // the separating input must be exactly zero
  bool found_zero = false;
  for (auto& [k, v] : c.verdict.model.values)
    if (v.is_int() && v.as_int().is_zero()) found_zero = true;
  CHECK(found_zero);
}

TEST_CASE("higher-order witnesses replay") {
  auto c = run("fun f -> f (fun () -> _bot_)", "fun f -> f (fun () -> ())");
  REQUIRE(c.verdict.k == Verdict::K::Inequivalent);
  CHECK(replay(c.pair, c.verdict.witness, c.verdict.model));
}

TEST_CASE("stateful witnesses replay") {
  auto c = run("ref x = 0 in fun () -> x := !x + 1; !x", "fun () -> 1");
  REQUIRE(c.verdict.k == Verdict::K::Inequivalent);
  CHECK(replay(c.pair, c.verdict.witness, c.verdict.model));
}
