#pragma once

#include <string>
#include <vector>

#include "ctxeq/engine.hpp"

namespace ctxeq {

struct CorpusEntry {
  std::string path;
  enum class Expect { Eq, Ineq } expected = Expect::Eq;
  std::optional<uint64_t> bound_override;
  std::optional<uint64_t> fuel_override;
  std::string notes;
};

// Header convention: a leading comment such as (* expect: eq bound: 12 *).
CorpusEntry parse_corpus_header(const std::string& path, const std::string& text);

// One checked file under one configuration.
struct FileOutcome {
  std::string path;
  CorpusEntry::Expect expected;
  Verdict::K verdict;
  double seconds = 0;
  std::string error;  // parse/type errors
  Verdict full;       // witness etc. (single-run use)
};

// A false verdict: expected eq but reported inequivalent, or vice versa.
bool is_false_verdict(const FileOutcome& o);

struct BenchConfigResult {
  std::string config_name;
  uint64_t eq_proved = 0;
  uint64_t ineq_found = 0;
  uint64_t inconclusive = 0;
  uint64_t errors = 0;
  double total_seconds = 0;
  std::vector<FileOutcome> files;
};

struct BenchResult {
  std::vector<BenchConfigResult> configs;
  bool any_false_verdict = false;
};

// Runs every corpus file under the five standard configurations (all on,
// separation off, annotations off, re-entry off, all off).
BenchResult run_bench(const std::vector<std::string>& files, const Options& base, int jobs);

// Single-file check used by the CLI and the bench runner.
FileOutcome check_file(const std::string& path, const Options& opts);

std::vector<std::string> discover_corpus(const std::string& dir);

// Rendering.
std::string bench_table(const BenchResult& r);
std::string verdict_name(Verdict::K k);
std::string outcome_json(const FileOutcome& o);          // single check, one object
std::string bench_json(const BenchResult& r);            // full report
std::string strip_timing_fields(const std::string& js);  // for determinism checks

}  // namespace ctxeq
