// ctxeq: bounded checker and prover of contextual equivalence for an
// ML-like higher-order language with local references.
//
//   ctxeq check FILE [flags]   exit 0 equivalent / 1 inequivalent /
//                              2 inconclusive / 3 usage or input error
//   ctxeq bench DIR  [flags]   run the corpus under the five standard
//                              up-to-technique configurations

#include <CLI11.hpp>

#include <iostream>

#include "ctxeq/corpus.hpp"

using namespace ctxeq;

namespace {

void add_common_flags(CLI::App* cmd, Options& opts, bool& no_sep, bool& no_annot, bool& no_reentry,
                      bool& no_upto, bool& no_gc, bool& no_memo, std::string& solver) {
  cmd->add_option("--bound", opts.bound, "function-call moves per explored path");
  cmd->add_option("--timeout", opts.timeout_seconds, "wall-clock seconds per file");
  cmd->add_option("--fuel", opts.fuel, "internal reduction steps per interaction segment");
  cmd->add_flag("--no-sep", no_sep, "disable up to separation");
  cmd->add_flag("--no-annot", no_annot, "disable state-invariant annotations (implies --no-reentry)");
  cmd->add_flag("--no-reentry", no_reentry, "disable up to re-entry");
  cmd->add_flag("--no-upto", no_upto, "disable every up-to technique");
  cmd->add_flag("--no-gc", no_gc, "disable garbage collection of configurations");
  cmd->add_flag("--no-memo", no_memo, "disable memoization");
  cmd->add_option("--solver", solver, "SMT solver command (default: z3 -in)");
  cmd->add_flag("--explain", opts.explain, "log one line per up-to technique application");
}

void finish_options(Options& opts, bool no_sep, bool no_annot, bool no_reentry, bool no_upto,
                    bool no_gc, bool no_memo, const std::string& solver) {
  if (no_sep) opts.separation = false;
  if (no_annot) opts.annotations = false;
  if (no_reentry) opts.reentry = false;
  if (no_upto) opts.all_upto = false;
  if (no_gc) opts.gc = false;
  if (no_memo) opts.memoization = false;
  if (!solver.empty()) {
    opts.solver_cmd = solver;
    opts.solver_cmd_is_default = false;
  }
  opts.normalize();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ctxeq: contextual equivalence checker"};
  app.require_subcommand(1);

  Options opts;
  bool no_sep = false, no_annot = false, no_reentry = false, no_upto = false, no_gc = false,
       no_memo = false;
  bool json = false;
  int jobs = 1;
  std::string solver;
  std::string file, dir;

  CLI::App* check = app.add_subcommand("check", "check one two-program file");
  check->add_option("file", file, "input file (two programs split by a `|||` line)")->required();
  add_common_flags(check, opts, no_sep, no_annot, no_reentry, no_upto, no_gc, no_memo, solver);
  check->add_flag("--json", json, "emit a single JSON object");

  CLI::App* bench = app.add_subcommand("bench", "run a corpus directory");
  bench->add_option("dir", dir, "corpus directory (searched recursively for .prog)")->required();
  add_common_flags(bench, opts, no_sep, no_annot, no_reentry, no_upto, no_gc, no_memo, solver);
  bench->add_flag("--json", json, "emit the full JSON report");
  bench->add_option("--jobs", jobs, "parallel file checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  finish_options(opts, no_sep, no_annot, no_reentry, no_upto, no_gc, no_memo, solver);

  try {
    if (check->parsed()) {
      FileOutcome out = check_file(file, opts);
      if (json) {
        std::cout << outcome_json(out) << "\n";
      } else if (!out.error.empty()) {
        std::cerr << out.error << "\n";
      } else {
        std::cout << verdict_name(out.verdict) << "\n";
        if (out.verdict == Verdict::K::Inequivalent) {
          std::cout << "witness trace:\n" << trace_to_string(out.full.witness);
          if (!out.full.model.values.empty()) {
            std::cout << "model:";
            for (auto& [k, v] : out.full.model.values)
              std::cout << " _k#" << k << "=" << constant_to_string(v);
            std::cout << "\n";
          }
        }
        if (out.verdict == Verdict::K::Inconclusive) {
          std::cout << "reasons:";
          for (auto r : out.full.reasons) std::cout << " " << reason_name(r);
          std::cout << "\n";
        }
        auto& s = out.full.stats;
        std::cout << "stats: nodes=" << s.nodes << " memo_hits=" << s.memo_hits
                  << " solver_queries=" << s.solver_queries << " max_depth=" << s.max_depth
                  << " sep_splits=" << s.sep_splits << " reentry_skips=" << s.reentry_skips
                  << " inv_applied=" << s.inv_applied << "\n";
      }
      if (!out.error.empty()) return 3;
      switch (out.verdict) {
        case Verdict::K::Equivalent: return 0;
        case Verdict::K::Inequivalent: return 1;
        case Verdict::K::Inconclusive: return 2;
      }
      return 3;
    }

    // bench
    std::vector<std::string> files = discover_corpus(dir);
    BenchResult r = run_bench(files, opts, jobs);
    if (json)
      std::cout << bench_json(r) << "\n";
    else
      std::cout << bench_table(r);
    return r.any_false_verdict ? 1 : 0;
  } catch (const std::exception& e) {
    std::cerr << "ctxeq: " << e.what() << "\n";
    return 3;
  }
}
